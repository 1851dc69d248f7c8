//! 2×2 complex matrices: Pauli algebra, spin rotations and the small amount
//! of matrix arithmetic needed by the quantum-side oracle.

use num_complex::Complex;

use crate::real::Real;

pub type C<F> = Complex<F>;

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<F> {
    pub m: [[C<F>; 2]; 2],
}

impl<F: Real> Mat2<F> {
    pub fn new(a: C<F>, b: C<F>, c: C<F>, d: C<F>) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        let o = C::new(F::one(), F::zero());
        let z = C::new(F::zero(), F::zero());
        Self::new(o, z, z, o)
    }

    pub fn zero() -> Self {
        let z = C::new(F::zero(), F::zero());
        Self::new(z, z, z, z)
    }

    pub fn sigma_x() -> Self {
        let o = C::new(F::one(), F::zero());
        let z = C::new(F::zero(), F::zero());
        Self::new(z, o, o, z)
    }

    pub fn sigma_y() -> Self {
        let i = C::new(F::zero(), F::one());
        let z = C::new(F::zero(), F::zero());
        Self::new(z, -i, i, z)
    }

    pub fn sigma_z() -> Self {
        let o = C::new(F::one(), F::zero());
        let z = C::new(F::zero(), F::zero());
        Self::new(o, z, z, -o)
    }

    /// `a·σx + b·σy + c·σz` with real coefficients.
    pub fn pauli_combination(a: F, b: F, c: F) -> Self {
        Self::new(
            C::new(c, F::zero()),
            C::new(a, -b),
            C::new(a, b),
            C::new(-c, F::zero()),
        )
    }

    /// Spin rotation `exp(-i·angle·(n·σ)/2)` for a unit axis `n`.
    pub fn spin_rotation(n: [F; 3], angle: F) -> Self {
        let half = angle / F::lit(2.0);
        let (s, c) = half.sin_cos();
        let sigma = Self::pauli_combination(n[0], n[1], n[2]);
        // cos(θ/2)·1 - i sin(θ/2)·(n·σ)
        let mut r = Self::identity().scale(C::new(c, F::zero()));
        r = r.add(&sigma.scale(C::new(F::zero(), -s)));
        r
    }

    pub fn scale(&self, s: C<F>) -> Self {
        let mut r = *self;
        for row in r.m.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] -= o.m[i][j];
            }
        }
        r
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j];
            }
        }
        r
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> C<F> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn apply(&self, v: [C<F>; 2]) -> [C<F>; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// `max |(U†U − 1)_ij|`, zero for a unitary matrix.
    pub fn unitarity_defect(&self) -> F {
        let d = self.adjoint().matmul(self).sub(&Self::identity());
        let mut worst = F::zero();
        for row in d.m.iter() {
            for e in row.iter() {
                worst = worst.max(e.norm());
            }
        }
        worst
    }
}
