//! State representations for a driven two-level system and the exact
//! conversions between them.
//!
//! A pure qubit state, its density matrix, the unit Bloch vector
//! `S = (√(1-q²)cos p, √(1-q²)sin p, -q)` and the canonical pair
//! `(q, p) = (-cos θ, φ)` are four views of the same object; every
//! conversion here is exact up to rounding.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::mat2::{Mat2, C};
use crate::real::{wrap_angle, Real};

/// Which frame a canonical pair refers to: the lab frame `(q, p)` or the
/// frame co-rotating with the drive, `(Q, P)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    Rotating,
}

/// Unit vector on the Bloch sphere, the classical state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<F> {
    v: Vec3<F>,
}

impl<F: Real> BlochVector<F> {
    /// Builds a Bloch vector, requiring `‖S‖ = 1` within the construction
    /// tolerance.
    pub fn new(s1: F, s2: F, s3: F) -> Result<Self> {
        let v = Vec3::new(s1, s2, s3);
        let defect = (v.norm() - F::one()).abs();
        if defect > F::unit_tol() {
            return Err(Error::Domain(format!(
                "Bloch vector norm defect {defect} exceeds tolerance"
            )));
        }
        Ok(Self { v })
    }

    /// Builds from an arbitrary nonzero vector by normalizing it.
    pub fn from_vec_normalized(v: Vec3<F>) -> Result<Self> {
        let n = v.norm();
        if n == F::zero() || !n.is_finite() {
            return Err(Error::Domain("cannot normalize zero vector".into()));
        }
        Ok(Self { v: v / n })
    }

    pub(crate) fn from_vec_unchecked(v: Vec3<F>) -> Self {
        Self { v }
    }

    pub fn s1(&self) -> F {
        self.v.x
    }

    pub fn s2(&self) -> F {
        self.v.y
    }

    pub fn s3(&self) -> F {
        self.v.z
    }

    pub fn as_vec(&self) -> &Vec3<F> {
        &self.v
    }

    pub fn dot(&self, o: &Self) -> F {
        self.v.dot(&o.v)
    }

    pub fn antipode(&self) -> Self {
        Self { v: -self.v }
    }
}

/// Canonical phase-space state `(q, p)` with `q ∈ [-1, 1]`, `p ∈ [0, 2π)`.
///
/// `p` is the relative quantum phase promoted to a conjugate momentum of
/// `q = -cos θ`. All constructors wrap `p` into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState<F> {
    q: F,
    p: F,
    frame: Frame,
}

impl<F: Real> CanonicalState<F> {
    pub fn new(q: F, p: F, frame: Frame) -> Result<Self> {
        if q.abs() > F::one() + F::unit_tol() {
            return Err(Error::Domain(format!("|q| = {} exceeds 1", q.abs())));
        }
        // q within tolerance of ±1 is clamped onto the sphere
        let q = q.min(F::one()).max(-F::one());
        Ok(Self {
            q,
            p: wrap_angle(p),
            frame,
        })
    }

    pub fn lab(q: F, p: F) -> Result<Self> {
        Self::new(q, p, Frame::Lab)
    }

    pub fn rotating(q: F, p: F) -> Result<Self> {
        Self::new(q, p, Frame::Rotating)
    }

    pub fn q(&self) -> F {
        self.q
    }

    pub fn p(&self) -> F {
        self.p
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }
}

/// Pure qubit state `a|+⟩ + b|−⟩` with `|a|² + |b|² = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState<F> {
    pub amp_plus: Complex<F>,
    pub amp_minus: Complex<F>,
}

impl<F: Real> QubitState<F> {
    pub fn new(amp_plus: Complex<F>, amp_minus: Complex<F>) -> Result<Self> {
        let n2 = amp_plus.norm_sqr() + amp_minus.norm_sqr();
        if (n2 - F::one()).abs() > F::unit_tol() {
            return Err(Error::Domain(format!(
                "qubit norm² = {n2} is not 1 within tolerance"
            )));
        }
        Ok(Self {
            amp_plus,
            amp_minus,
        })
    }

    pub(crate) fn from_amplitudes_unchecked(amp_plus: Complex<F>, amp_minus: Complex<F>) -> Self {
        Self {
            amp_plus,
            amp_minus,
        }
    }

    /// `|+⟩`
    pub fn plus() -> Self {
        Self {
            amp_plus: Complex::new(F::one(), F::zero()),
            amp_minus: Complex::new(F::zero(), F::zero()),
        }
    }

    /// `|−⟩`
    pub fn minus() -> Self {
        Self {
            amp_plus: Complex::new(F::zero(), F::zero()),
            amp_minus: Complex::new(F::one(), F::zero()),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex<F> {
        self.amp_plus.conj() * other.amp_plus + self.amp_minus.conj() * other.amp_minus
    }

    pub fn norm(&self) -> F {
        (self.amp_plus.norm_sqr() + self.amp_minus.norm_sqr()).sqrt()
    }

    /// Euclidean distance `‖ψ₁ − ψ₂‖` in spinor space.
    pub fn spinor_distance(&self, other: &Self) -> F {
        ((self.amp_plus - other.amp_plus).norm_sqr()
            + (self.amp_minus - other.amp_minus).norm_sqr())
        .sqrt()
    }
}

/// Density matrix of a pure qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<F> {
    m: Mat2<F>,
}

impl<F: Real> DensityMatrix<F> {
    /// Builds from four entries, requiring hermiticity, unit trace and unit
    /// purity (`Tr ρ² = 1` within `1e-10`).
    pub fn new(entries: [[Complex<F>; 2]; 2]) -> Result<Self> {
        let m = Mat2 { m: entries };
        let herm = m.sub(&m.adjoint());
        for row in herm.m.iter() {
            for e in row.iter() {
                if e.norm() > F::lit(1e-10) {
                    return Err(Error::Domain("density matrix is not Hermitian".into()));
                }
            }
        }
        if (m.trace().re - F::one()).abs() > F::lit(1e-10) || m.trace().im.abs() > F::lit(1e-10) {
            return Err(Error::Domain("density matrix trace is not 1".into()));
        }
        let purity = m.matmul(&m).trace().re;
        if (purity - F::one()).abs() > F::lit(1e-10) {
            return Err(Error::Domain(format!(
                "purity {purity} is not 1 (mixed state)"
            )));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_mat_unchecked(m: Mat2<F>) -> Self {
        Self { m }
    }

    pub fn entries(&self) -> &[[Complex<F>; 2]; 2] {
        &self.m.m
    }

    pub(crate) fn mat(&self) -> &Mat2<F> {
        &self.m
    }

    pub fn trace(&self) -> Complex<F> {
        self.m.trace()
    }

    pub fn purity(&self) -> F {
        self.m.matmul(&self.m).trace().re
    }
}

/// `S = (√(1-q²)cos p, √(1-q²)sin p, -q)`.
///
/// Errors if `|q| > 1` beyond tolerance (enforced at [`CanonicalState`]
/// construction, so this cannot fail on a valid input).
pub fn bloch_from_canonical<F: Real>(state: &CanonicalState<F>) -> BlochVector<F> {
    let r = (F::one() - state.q() * state.q()).max(F::zero()).sqrt();
    let (sp, cp) = state.p().sin_cos();
    BlochVector::from_vec_unchecked(Vec3::new(r * cp, r * sp, -state.q()))
}

/// Inverse chart: `q = -S₃`, `p = atan2(S₂, S₁) mod 2π`; at the poles
/// (`S₁ = S₂ = 0`) the convention `p = 0` is used.
pub fn canonical_from_bloch<F: Real>(s: &BlochVector<F>) -> CanonicalState<F> {
    let p = if s.s1() == F::zero() && s.s2() == F::zero() {
        F::zero()
    } else {
        wrap_angle(s.s2().atan2(s.s1()))
    };
    CanonicalState::new(-s.s3(), p, Frame::Lab).expect("unit vector yields |q| <= 1")
}

/// `|ψ(q,p)⟩ = √((1-q)/2)|+⟩ + √((1+q)/2) e^{ip}|−⟩`.
pub fn qubit_from_canonical<F: Real>(state: &CanonicalState<F>) -> QubitState<F> {
    let half = F::lit(0.5);
    let a = ((F::one() - state.q()) * half).max(F::zero()).sqrt();
    let b = ((F::one() + state.q()) * half).max(F::zero()).sqrt();
    let (sp, cp) = state.p().sin_cos();
    QubitState::from_amplitudes_unchecked(Complex::new(a, F::zero()), Complex::new(b * cp, b * sp))
}

/// The orthogonal-state involution `(p, q) → (p + π, -q)`; the Bloch image
/// is the antipode `S → -S`.
pub fn perpendicular<F: Real>(state: &CanonicalState<F>) -> CanonicalState<F> {
    CanonicalState::new(-state.q(), state.p() + F::PI(), state.frame())
        .expect("negation preserves |q| <= 1")
}

/// `ρ = ½(1 + S·σ)`.
pub fn density_from_bloch<F: Real>(s: &BlochVector<F>) -> DensityMatrix<F> {
    let half = F::lit(0.5);
    let m = Mat2::identity()
        .add(&Mat2::pauli_combination(s.s1(), s.s2(), s.s3()))
        .scale(C::new(half, F::zero()));
    DensityMatrix::from_mat_unchecked(m)
}

/// Recovers `S_i = Tr(ρ σ_i)`.
pub fn bloch_from_density<F: Real>(rho: &DensityMatrix<F>) -> Result<BlochVector<F>> {
    let comp = |sigma: Mat2<F>| rho.mat().matmul(&sigma).trace().re;
    BlochVector::new(
        comp(Mat2::sigma_x()),
        comp(Mat2::sigma_y()),
        comp(Mat2::sigma_z()),
    )
}

/// Density matrix of a pure state `|ψ⟩⟨ψ|`.
pub fn density_from_qubit<F: Real>(psi: &QubitState<F>) -> DensityMatrix<F> {
    let a = psi.amp_plus;
    let b = psi.amp_minus;
    DensityMatrix::from_mat_unchecked(Mat2::new(
        a * a.conj(),
        a * b.conj(),
        b * a.conj(),
        b * b.conj(),
    ))
}

/// Bloch vector `⟨ψ|σ|ψ⟩` of a pure state.
pub fn bloch_from_qubit<F: Real>(psi: &QubitState<F>) -> BlochVector<F> {
    let a = psi.amp_plus;
    let b = psi.amp_minus;
    let cross = a.conj() * b;
    let two = F::lit(2.0);
    BlochVector::from_vec_unchecked(Vec3::new(
        two * cross.re,
        two * cross.im,
        a.norm_sqr() - b.norm_sqr(),
    ))
}
