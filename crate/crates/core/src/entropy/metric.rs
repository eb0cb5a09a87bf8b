use crate::error::{Error, Result};
use crate::geometry::{dist, PointCloud};

/// Farthest-point traversal from index 0. Returns the chosen centres and, for
/// every point, its distance to the nearest centre and that centre's rank.
struct Traversal {
    centers: Vec<usize>,
    nearest: Vec<f64>,
    owner: Vec<usize>,
}

impl Traversal {
    fn start(points: &PointCloud) -> Self {
        let first = points.point(0);
        let nearest = points.iter().map(|p| dist(p, first)).collect();
        Traversal { centers: vec![0], nearest, owner: vec![0; points.len()] }
    }

    /// Index and distance of the point farthest from the current centres
    /// (lowest index on ties).
    fn farthest(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &d) in self.nearest.iter().enumerate() {
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    }

    fn add(&mut self, points: &PointCloud, c: usize) {
        let rank = self.centers.len();
        self.centers.push(c);
        let cp = points.point(c);
        for (i, p) in points.iter().enumerate() {
            let d = dist(p, cp);
            if d < self.nearest[i] {
                self.nearest[i] = d;
                self.owner[i] = rank;
            }
        }
    }

    /// Adds centres until every point is within `eps` (closed balls).
    fn until_radius(points: &PointCloud, eps: f64) -> Self {
        let mut t = Traversal::start(points);
        loop {
            let (i, d) = t.farthest();
            if d <= eps {
                return t;
            }
            t.add(points, i);
        }
    }

    fn with_count(points: &PointCloud, k: usize) -> Self {
        let mut t = Traversal::start(points);
        while t.centers.len() < k {
            let (i, d) = t.farthest();
            if d <= 0.0 {
                break;
            }
            t.add(points, i);
        }
        t
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps = {eps} must be positive and finite")));
    }
    Ok(())
}

/// Size of a farthest-point ε-net (closed balls): an upper bound on N(ε, T).
pub fn covering_number(points: &PointCloud, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    if points.is_empty() {
        return Ok(0);
    }
    Ok(Traversal::until_radius(points, eps).centers.len())
}

/// Size of a maximal ε-separated subset (pairwise distance > ε): a lower bound
/// on M(ε, T).
///
/// The larger of the input-order greedy set and the farthest-point net, which
/// is itself ε-separated and maximal.
pub fn packing_number(points: &PointCloud, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    if points.is_empty() {
        return Ok(0);
    }
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        let p = points.point(i);
        if chosen.iter().all(|&c| dist(p, points.point(c)) > eps) {
            chosen.push(i);
        }
    }
    let net = Traversal::until_radius(points, eps).centers.len();
    Ok(chosen.len().max(net))
}

/// Inner entropy number δ_n: the largest δ for which n points of the cloud
/// are pairwise more than δ apart, located by bisection on `packing_number`.
///
/// n = 1 returns the diameter; n ≥ #points returns 0.
pub fn inner_entropy(points: &PointCloud, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if points.is_empty() {
        return Err(Error::invalid("no points"));
    }
    if n == 1 {
        return Ok(points.diameter());
    }
    if n >= points.len() {
        return Ok(0.0);
    }
    let diam = points.diameter();
    let (mut lo, mut hi) = (0.0, diam);
    // invariant: packing(hi) < n; packing(lo) ≥ n once lo > 0
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 || mid == lo || mid == hi {
            break;
        }
        if packing_number(points, mid)? >= n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Upper bound on σ^{(H,∞)}(n) = inf (Σ diam(A_j)^N)^{H/N} from a
/// farthest-point k-centre partition into at most n groups.
pub fn sigma_infty(points: &PointCloud, h: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::invalid(format!("H = {h} outside (0, 1]")));
    }
    if points.is_empty() {
        return Ok(0.0);
    }
    let dim = points.dim();
    let t = Traversal::with_count(points, n);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); t.centers.len()];
    for (i, &o) in t.owner.iter().enumerate() {
        groups[o].push(i);
    }
    let mut total = 0.0;
    for g in &groups {
        let d = if dim == 1 {
            let xs = g.iter().map(|&i| points.point(i)[0]);
            let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            hi - lo
        } else {
            let mut d = 0.0f64;
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    d = d.max(dist(points.point(i), points.point(j)));
                }
            }
            d
        };
        total += d.powi(dim as i32);
    }
    Ok(total.powf(h / dim as f64))
}
