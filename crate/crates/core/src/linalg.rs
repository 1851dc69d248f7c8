//! Minimal fixed-size real linear algebra: 3-vectors, 3×3 matrices and the
//! rotations used throughout the crate.

use core::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::real::Real;

/// A 3-vector of scalars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec3<F> {
    pub x: F,
    pub y: F,
    pub z: F,
}

impl<F: Real> Vec3<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(F::zero(), F::zero(), F::zero())
    }

    pub fn dot(&self, o: &Self) -> F {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> F {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Self {
        *self / self.norm()
    }

    pub fn to_array(&self) -> [F; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [F; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<F: Real> Add for Vec3<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<F: Real> Sub for Vec3<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<F: Real> Neg for Vec3<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<F: Real> Mul<F> for Vec3<F> {
    type Output = Self;
    fn mul(self, s: F) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<F: Real> Div<F> for Vec3<F> {
    type Output = Self;
    fn div(self, s: F) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<F> {
    pub m: [[F; 3]; 3],
}

impl<F: Real> Mat3<F> {
    pub fn identity() -> Self {
        let (o, z) = (F::one(), F::zero());
        Self {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    /// Active rotation by `angle` about the z axis.
    pub fn rotation_z(angle: F) -> Self {
        let (s, c) = angle.sin_cos();
        let z = F::zero();
        Self {
            m: [[c, -s, z], [s, c, z], [z, z, F::one()]],
        }
    }

    /// Rodrigues rotation by `angle` about the unit axis `n`.
    pub fn rotation_axis(n: &Vec3<F>, angle: F) -> Self {
        let (s, c) = angle.sin_cos();
        let t = F::one() - c;
        let (x, y, z) = (n.x, n.y, n.z);
        Self {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    pub fn transpose(&self) -> Self {
        let mut r = *self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[j][i];
            }
        }
        r
    }

    pub fn apply(&self, v: &Vec3<F>) -> Vec3<F> {
        let a = v.to_array();
        let mut out = [F::zero(); 3];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row[0] * a[0] + row[1] * a[1] + row[2] * a[2];
        }
        Vec3::from_array(out)
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let mut r = Self::identity();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = F::zero();
                for (k, row) in o.m.iter().enumerate() {
                    acc += self.m[i][k] * row[j];
                }
                r.m[i][j] = acc;
            }
        }
        r
    }

    pub fn determinant(&self) -> F {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
///
/// Returns `(slope, intercept, max |residual|)`.
pub fn linear_fit<F: Real>(xs: &[F], ys: &[F]) -> Option<(F, F, F)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = F::of_usize(xs.len());
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == F::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut resid = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        resid = resid.max((y - slope * x - intercept).abs());
    }
    Some((slope, intercept, resid))
}

/// Variance of a sample (population form).
pub fn variance<F: Real>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::zero();
    }
    let n = F::of_usize(xs.len());
    let m = xs.iter().fold(F::zero(), |a, &b| a + b) / n;
    xs.iter().fold(F::zero(), |a, &b| a + (b - m) * (b - m)) / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_axis_reduces_to_rotation_z() {
        let rz = Mat3::rotation_z(0.7_f64);
        let ra = Mat3::rotation_axis(&Vec3::new(0.0, 0.0, 1.0), 0.7);
        for i in 0..3 {
            for j in 0..3 {
                assert!((rz.m[i][j] - ra.m[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rotation_is_orthogonal_with_unit_determinant() {
        let n: Vec3<f64> = Vec3::new(0.3, -0.5, 0.8).normalized();
        let r = Mat3::rotation_axis(&n, 1.9);
        let rtr = r.transpose().matmul(&r);
        let id: Mat3<f64> = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                assert!((rtr.m[i][j] - id.m[i][j]).abs() < 1e-14);
            }
        }
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.5 * x + 0.75).collect();
        let (a, b, r) = linear_fit(&xs, &ys).unwrap();
        assert!((a + 2.5).abs() < 1e-13 && (b - 0.75).abs() < 1e-13 && r < 1e-13);
    }
}
