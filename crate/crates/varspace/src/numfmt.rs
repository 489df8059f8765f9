//! Fixed-precision float formatting for serialized records.

/// Format with 17 significant decimal digits, enough to round-trip any f64.
pub fn f64_17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for &x in &[
            0.0,
            1.0,
            -1.0 / 3.0,
            std::f64::consts::PI,
            6.02214076e23,
            -2.2250738585072014e-308,
        ] {
            let parsed: f64 = f64_17(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }
}
