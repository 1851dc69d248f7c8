//! Deterministic text formatting shared by the CSV exporters.

use crate::real::Real;

/// Formats a float with 17 significant digits in scientific notation, which
/// round-trips any `f64` bit pattern and never depends on locale.
pub fn write_float<F: Real>(x: F) -> String {
    let v = x.to_f64().unwrap_or(f64::NAN);
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for &x in &[0.1_f64, -3.0, core::f64::consts::PI, 1.0 / 3.0, 1e-300] {
            let s = write_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(s.contains('.'));
        }
    }
}
