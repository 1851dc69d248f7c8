//! Shared helpers for the unit and integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::RotatingFieldParams;
use crate::linalg::Vec3;

pub fn assert_close(got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "got {got}, want {want} (|diff| = {} > {tol})",
        (got - want).abs()
    );
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n + 1` equally spaced points covering `[a, b]`.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

pub trait RandExt {
    fn range(&mut self, lo: f64, hi: f64) -> f64;
    /// A canonical pair with `|q| ≤ 0.95` (clear of the chart poles).
    fn canonical_point(&mut self) -> (f64, f64);
    fn unit_vector(&mut self) -> Vec3<f64>;
    /// Rotating-field parameters in the range the tests exercise.
    fn rotating_params(&mut self) -> RotatingFieldParams<f64>;
}

impl RandExt for ChaCha8Rng {
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.gen_range(lo..hi)
    }

    fn canonical_point(&mut self) -> (f64, f64) {
        (
            self.gen_range(-0.95..0.95),
            self.gen_range(0.0..core::f64::consts::TAU),
        )
    }

    fn unit_vector(&mut self) -> Vec3<f64> {
        loop {
            let v = Vec3::new(
                self.gen_range(-1.0..1.0),
                self.gen_range(-1.0..1.0),
                self.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn rotating_params(&mut self) -> RotatingFieldParams<f64> {
        RotatingFieldParams::new(
            self.gen_range(0.1..2.0),
            self.gen_range(-1.0..2.0),
            self.gen_range(0.5..3.0),
            self.gen_range(0.0..core::f64::consts::TAU),
        )
        .unwrap()
    }
}
