//! Bracketed root finding for the monotone exponent equations.

use crate::error::{Error, Result};

/// A solved exponent together with the residual of its defining equation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
}

/// Root of a strictly decreasing `f` on `(lo, hi)`.
///
/// `f` returns `(value, derivative)`. The upper end is doubled until the sign
/// changes, the bracket is bisected down to `1e-13` and a single Newton step
/// polishes the result when it stays inside the bracket and lowers |f|.
pub fn solve_decreasing<F>(f: F, mut lo: f64, mut hi: f64) -> Result<Root>
where
    F: Fn(f64) -> (f64, f64),
{
    const WIDTH: f64 = 1e-13;
    let (flo, _) = f(lo);
    if !(flo > 0.0) {
        return Err(Error::Solver(format!("f({lo}) = {flo} is not positive")));
    }
    let mut expansions = 0;
    while f(hi).0 > 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::Solver("no sign change found".into()));
        }
    }
    if f(hi).0 == 0.0 {
        return Ok(Root { value: hi, residual: 0.0 });
    }
    while hi - lo > WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (fm, _) = f(mid);
        if fm == 0.0 {
            return Ok(Root { value: mid, residual: 0.0 });
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let (fx, dfx) = f(x);
    let mut residual = fx.abs();
    if dfx != 0.0 {
        let polished = x - fx / dfx;
        if polished >= lo && polished <= hi {
            let r = f(polished).0.abs();
            if r <= residual {
                x = polished;
                residual = r;
            }
        }
    }
    Ok(Root { value: x, residual })
}
