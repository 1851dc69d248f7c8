//! Scalar abstraction: every numerical routine in this crate is generic over
//! [`Real`], which is implemented for `f32` and `f64`. Concrete `f64` aliases
//! of the public types live at the crate root.

use core::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + fmt::Debug
    + fmt::Display
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal, used for tabulated coefficients and
    /// default tolerances.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must be representable")
    }

    /// Tolerance used by unit-norm construction invariants (Bloch vectors,
    /// qubit amplitudes). `1e-12` leaves headroom above `f64` rounding;
    /// `f32` gets a proportionally looser bound.
    fn unit_tol() -> Self;
}

impl Real for f64 {
    fn unit_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn unit_tol() -> Self {
        1e-5
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<F: Real>(p: F) -> F {
    let tau = F::TAU();
    let mut r = p % tau;
    if r < F::zero() {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    // -0.0 normalizes to 0.0
    r + F::zero()
}

/// Signed distance between two angles modulo 2π, in `(-π, π]`.
pub fn angle_diff<F: Real>(a: F, b: F) -> F {
    let tau = F::TAU();
    let mut d = (a - b) % tau;
    if d > F::PI() {
        d -= tau;
    }
    if d <= -F::PI() {
        d += tau;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_into_half_open_interval() {
        assert_eq!(wrap_angle(0.0_f64), 0.0);
        assert!((wrap_angle(7.0_f64) - (7.0 - core::f64::consts::TAU)).abs() < 1e-15);
        let w = wrap_angle(-1e-17_f64);
        assert!((0.0..core::f64::consts::TAU).contains(&w));
        let w = wrap_angle(-3.0_f64);
        assert!((w - (core::f64::consts::TAU - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn angle_diff_is_small_across_wrap() {
        let d = angle_diff(0.01_f64, core::f64::consts::TAU - 0.01);
        assert!((d - 0.02).abs() < 1e-12);
    }
}
