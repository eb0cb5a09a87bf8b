//! Number formatting for text outputs.

/// `x` with 17 significant digits, positional when the magnitude allows.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{x:.16e}");
    }
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Serde adapter for an integrability exponent that may be ∞, written as the
/// string `"inf"` since JSON has no infinite numbers.
pub mod q_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*q)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => super::parse_q(&t).map_err(de::Error::custom),
        }
    }
}

/// Parses a q value: a number or `inf`/`infinity`.
pub fn parse_q(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>().map_err(|_| format!("invalid q '{text}': expected a number or inf"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.5), "0.50000000000000000");
        assert_eq!(sig17(2.0 * 2f64.ln() / 6f64.ln()), "0.77370561446908315");
        assert_eq!(sig17(1234.5), "1234.5000000000000");
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(1e-9), "1.0000000000000001e-9");
    }

    #[test]
    fn q_round_trip() {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct W {
            #[serde(with = "q_serde")]
            q: f64,
        }
        for q in [2.0, f64::INFINITY] {
            let text = serde_json::to_string(&W { q }).unwrap();
            assert_eq!(serde_json::from_str::<W>(&text).unwrap().q, q);
        }
        assert_eq!(serde_json::to_string(&W { q: f64::INFINITY }).unwrap(), r#"{"q":"inf"}"#);
        assert!(parse_q("two").is_err());
    }
}
