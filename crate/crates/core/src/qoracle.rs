//! Quantum-side oracle: 2×2 Schrödinger propagation for `H(t) = -½B(t)·σ`,
//! the rotating-wave solutions and the Bloch-sphere distance.
//!
//! Every classical result in this crate is validated against this module, so
//! it deliberately stays close to textbook form: state-level integration of
//! the two complex amplitudes, renormalized per step, with the drift
//! reported rather than hidden.

use num_complex::Complex;

use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::mat2::{Mat2, C};
use crate::ode::solve_dense;
use crate::real::Real;
use crate::state::{DensityMatrix, QubitState};

/// Unitary propagator `U(t)` with `ψ(t) = U(t)ψ(0)`.
#[derive(Clone, Copy, Debug)]
pub struct Propagator<F> {
    mat: Mat2<F>,
}

impl<F: Real> Propagator<F> {
    pub fn new(entries: [[Complex<F>; 2]; 2]) -> Result<Self> {
        let mat = Mat2 { m: entries };
        let defect = mat.unitarity_defect();
        if defect > F::lit(1e-10) {
            return Err(Error::Domain(format!(
                "propagator unitarity defect {defect} exceeds 1e-10"
            )));
        }
        Ok(Self { mat })
    }

    pub fn entries(&self) -> &[[Complex<F>; 2]; 2] {
        &self.mat.m
    }

    pub fn unitarity_defect(&self) -> F {
        self.mat.unitarity_defect()
    }

    pub fn apply(&self, psi: &QubitState<F>) -> QubitState<F> {
        let out = self.mat.apply([psi.amp_plus, psi.amp_minus]);
        QubitState::from_amplitudes_unchecked(out[0], out[1])
    }
}

/// Parameters of the rotating-wave analysis of the nonrotating drive:
/// resonance at `ω = 2B₀`, weak coupling for `B₃/ω ≪ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaParams<F> {
    pub b0: F,
    pub b3: F,
    pub omega: F,
}

impl<F: Real> RwaParams<F> {
    pub fn new(b0: F, b3: F, omega: F) -> Result<Self> {
        if !(omega > F::zero()) {
            return Err(Error::Domain("omega must be positive".into()));
        }
        Ok(Self { b0, b3, omega })
    }

    pub fn coupling_ratio(&self) -> F {
        self.b3 / self.omega
    }

    pub fn is_resonant(&self, tol: F) -> bool {
        (self.omega - F::lit(2.0) * self.b0).abs() <= tol * self.omega.abs().max(F::one())
    }
}

/// Rabi frequency `Ω_R = √((2B₀-ω)² + B₃²)`.
pub fn rabi_frequency<F: Real>(params: &RwaParams<F>) -> F {
    let detune = F::lit(2.0) * params.b0 - params.omega;
    (detune * detune + params.b3 * params.b3).sqrt()
}

fn hamiltonian_matrix<F: Real>(spec: &FieldSpec<F>, t: F) -> Mat2<F> {
    let b = spec.field_at(t);
    let half = F::lit(-0.5);
    Mat2::pauli_combination(half * b.x, half * b.y, half * b.z)
}

/// Integrates `iψ̇ = H(t)ψ` and samples the state on `t_grid`.
///
/// The state is renormalized after every accepted step; the accumulated
/// drift is checked against the same blowup bound as the classical
/// integrator.
pub fn propagate<F: Real>(
    spec: &FieldSpec<F>,
    psi0: &QubitState<F>,
    t_grid: &[F],
) -> Result<Vec<QubitState<F>>> {
    propagate_with_config(spec, psi0, t_grid, &IntegratorConfig::default())
}

pub fn propagate_with_config<F: Real>(
    spec: &FieldSpec<F>,
    psi0: &QubitState<F>,
    t_grid: &[F],
    cfg: &IntegratorConfig<F>,
) -> Result<Vec<QubitState<F>>> {
    propagate_recording_drift(spec, psi0, t_grid, cfg).map(|(states, _)| states)
}

/// Like [`propagate_with_config`], additionally reporting the largest norm
/// defect seen at accepted steps (the drift removed by renormalization).
pub fn propagate_recording_drift<F: Real>(
    spec: &FieldSpec<F>,
    psi0: &QubitState<F>,
    t_grid: &[F],
    cfg: &IntegratorConfig<F>,
) -> Result<(Vec<QubitState<F>>, F)> {
    if t_grid.is_empty() {
        return Ok((Vec::new(), F::zero()));
    }
    if t_grid[0] < F::zero() || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be ascending and >= 0".into()));
    }
    cfg.validate()?;
    let spec = *spec;
    // packed as (Re a, Im a, Re b, Im b)
    let rhs = move |t: F, y: &[F; 4]| {
        let h = hamiltonian_matrix(&spec, t);
        let psi = [C::new(y[0], y[1]), C::new(y[2], y[3])];
        let hp = h.apply(psi);
        // ψ̇ = -i H ψ
        [hp[0].im, -hp[0].re, hp[1].im, -hp[1].re]
    };
    let renorm = cfg.renormalize;
    let mut max_drift = F::zero();
    let dense = solve_dense(
        rhs,
        F::zero(),
        [
            psi0.amp_plus.re,
            psi0.amp_plus.im,
            psi0.amp_minus.re,
            psi0.amp_minus.im,
        ],
        *t_grid.last().unwrap(),
        &cfg.ode_options(),
        |_t, y| {
            let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]).sqrt();
            let defect = (n - F::one()).abs();
            if defect > F::lit(1e-6) {
                return Err(Error::NormBlowup {
                    drift: defect.to_f64().unwrap_or(f64::NAN),
                    limit: 1e-6,
                });
            }
            max_drift = max_drift.max(defect);
            if renorm {
                for c in y.iter_mut() {
                    *c /= n;
                }
            }
            Ok(())
        },
    )?;
    let states = t_grid
        .iter()
        .map(|&t| {
            let y = dense.eval(t);
            let a = C::new(y[0], y[1]);
            let b = C::new(y[2], y[3]);
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            QubitState::from_amplitudes_unchecked(a / n, b / n)
        })
        .collect();
    Ok((states, max_drift))
}

/// Propagator at time `t`, assembled by propagating the two basis states.
pub fn propagator<F: Real>(spec: &FieldSpec<F>, t: F) -> Result<Propagator<F>> {
    let grid = [t];
    let col0 = propagate(spec, &QubitState::plus(), &grid)?[0];
    let col1 = propagate(spec, &QubitState::minus(), &grid)?[0];
    Propagator::new([
        [col0.amp_plus, col1.amp_plus],
        [col0.amp_minus, col1.amp_minus],
    ])
}

// Basis change to the frame where the nonrotating drive reads
// B₀σz - B₃cos(ωt)σx: a π/2 rotation about y,  W = (1/√2)[[1,1],[-1,1]].
fn w_matrix<F: Real>() -> Mat2<F> {
    let inv_sqrt2 = F::FRAC_1_SQRT_2();
    let z = F::zero();
    Mat2::new(
        C::new(inv_sqrt2, z),
        C::new(inv_sqrt2, z),
        C::new(-inv_sqrt2, z),
        C::new(inv_sqrt2, z),
    )
}

/// Rotating-wave solution of the nonrotating drive, in the original basis of
/// `H = -½B·σ`.
///
/// Internally the state is rotated to the axis frame, evolved with
/// `R(t)·exp(-iΩ_R t σ_eff/2)` where `σ_eff = [(2B₀-ω)σz - B₃σx]/Ω_R` and
/// `R(t) = exp(-iωtσz/2)`, and rotated back; at resonance this reduces to
/// the familiar `R(t)·exp(+iB₃tσx/2)`.
pub fn rwa_solution<F: Real>(params: &RwaParams<F>, psi0: &QubitState<F>, t: F) -> QubitState<F> {
    let omega_r = rabi_frequency(params);
    let w = w_matrix::<F>();
    let chi0 = w.apply([psi0.amp_plus, psi0.amp_minus]);
    let evolved = if omega_r == F::zero() {
        chi0
    } else {
        let detune = F::lit(2.0) * params.b0 - params.omega;
        let axis = [-params.b3 / omega_r, F::zero(), detune / omega_r];
        Mat2::spin_rotation(axis, omega_r * t).apply(chi0)
    };
    let framed =
        Mat2::spin_rotation([F::zero(), F::zero(), F::one()], params.omega * t).apply(evolved);
    let out = w.adjoint().apply(framed);
    QubitState::from_amplitudes_unchecked(out[0], out[1])
}

/// Bloch-sphere distance `D = √(2 Tr[(ρ₁-ρ₂)²])`, equal to the Euclidean
/// distance between the two Bloch vectors.
pub fn distance<F: Real>(rho1: &DensityMatrix<F>, rho2: &DensityMatrix<F>) -> F {
    let d = rho1.mat().sub(rho2.mat());
    let tr = d.matmul(&d).trace().re;
    (F::lit(2.0) * tr).max(F::zero()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;
    use crate::state::{
        bloch_from_qubit, density_from_bloch, density_from_qubit, qubit_from_canonical,
        BlochVector, CanonicalState,
    };
    use crate::testutil::{assert_close, grid, seeded_rng, RandExt};

    #[test]
    fn identity_at_t_zero() {
        let spec = FieldSpec::Constant(Vec3::new(-1.0, 0.0, 0.4));
        let psi0 = qubit_from_canonical(&CanonicalState::lab(0.3, 1.0).unwrap());
        let out = propagate(&spec, &psi0, &[0.0]).unwrap();
        assert!(out[0].spinor_distance(&psi0) < 1e-14);
    }

    #[test]
    fn constant_x_field_inverts_plus_state() {
        // B = (-2B₀,0,0) ⇒ H = B₀σx; at t = π/(2B₀) the propagator is -iσx
        let b0 = 0.6;
        let spec = FieldSpec::Constant(Vec3::new(-2.0 * b0, 0.0, 0.0));
        let t = core::f64::consts::PI / (2.0 * b0);
        let out = propagate(&spec, &QubitState::plus(), &[t]).unwrap();
        let s = bloch_from_qubit(&out[0]);
        assert_close(s.s3(), -1.0, 1e-10);
        assert!(s.s1().abs() < 1e-9 && s.s2().abs() < 1e-9);
    }

    #[test]
    fn propagator_is_unitary() {
        let spec = FieldSpec::nonrotating(1.0, 1.5, 3.0).unwrap();
        let u = propagator(&spec, 7.3).unwrap();
        assert!(u.unitarity_defect() < 1e-9);
        // applying the propagator matches direct propagation
        let psi0 = qubit_from_canonical(&CanonicalState::lab(-0.2, 2.2).unwrap());
        let via_u = u.apply(&psi0);
        let direct = propagate(&spec, &psi0, &[7.3]).unwrap()[0];
        assert!(via_u.spinor_distance(&direct) < 1e-8);
    }

    #[test]
    fn rabi_frequency_examples() {
        let p = RwaParams::new(0.5, 0.3, 1.0).unwrap();
        assert_close(rabi_frequency(&p), 0.3, 1e-15);
        let p = RwaParams::new(0.7, 0.0, 1.0).unwrap();
        assert_close(rabi_frequency(&p), 0.4, 1e-15);
        let p = RwaParams::new(1.0, 1.0, 1.0).unwrap();
        assert_close(rabi_frequency(&p), 2.0_f64.sqrt(), 1e-15);
    }

    #[test]
    fn rwa_solution_at_t_zero_and_inversion() {
        let params = RwaParams::new(0.5, 0.05, 1.0).unwrap();
        let psi0 = qubit_from_canonical(&CanonicalState::lab(0.3, 0.7).unwrap());
        assert!(rwa_solution(&params, &psi0, 0.0).spinor_distance(&psi0) < 1e-14);

        // on resonance, t = π/B₃ undoes to an x-rotation by π in the axis
        // frame, which inverts the states polarized along the conserved
        // x direction of the original basis (q = 0, p ∈ {0, π})
        let t = core::f64::consts::PI / params.b3;
        let psi0 = qubit_from_canonical(&CanonicalState::lab(0.0, 0.0).unwrap());
        let psi = rwa_solution(&params, &psi0, t);
        // undo R(t) in the axis frame: χ = W ψ, χ' = R(-t) χ, back: ψ' = W† χ'
        let w = w_matrix::<f64>();
        let r_inv = Mat2::spin_rotation([0.0, 0.0, 1.0], -params.omega * t);
        let chi = r_inv.apply(w.apply([psi.amp_plus, psi.amp_minus]));
        let back = w.adjoint().apply(chi);
        let s = bloch_from_qubit(&QubitState::from_amplitudes_unchecked(back[0], back[1]));
        // S(0) = (1,0,0) is carried to its antipode
        assert_close(s.s1(), -1.0, 1e-12);
        assert!(s.s2().abs() < 1e-12 && s.s3().abs() < 1e-12);
    }

    #[test]
    fn off_resonance_effective_axis_is_unit() {
        let params = RwaParams::new(0.8, 0.3, 1.0).unwrap();
        let omega_r = rabi_frequency(&params);
        let detune = 2.0 * params.b0 - params.omega;
        let sigma = Mat2::<f64>::pauli_combination(-params.b3 / omega_r, 0.0, detune / omega_r);
        let diff = sigma.matmul(&sigma).sub(&Mat2::identity());
        for row in diff.m {
            for e in row {
                assert!(e.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn distance_examples_and_bloch_identity() {
        let s1 = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let rho1 = density_from_bloch(&s1);
        assert_close(distance(&rho1, &rho1), 0.0, 1e-15);

        let rho2 = density_from_bloch(&s1.antipode());
        assert_close(distance(&rho1, &rho2), 2.0, 1e-14);
    }

    #[test]
    fn distance_matches_bloch_norm_for_random_pairs() {
        let mut rng = seeded_rng(0xd157);
        for _ in 0..100 {
            let a = BlochVector::from_vec_normalized(rng.unit_vector()).unwrap();
            let b = BlochVector::from_vec_normalized(rng.unit_vector()).unwrap();
            let d_rho = distance(&density_from_bloch(&a), &density_from_bloch(&b));
            let d_s = (*a.as_vec() - *b.as_vec()).norm();
            assert!((d_rho - d_s).abs() < 1e-12);
        }
    }

    #[test]
    fn unitarity_and_distance_conservation_over_long_run() {
        let spec = FieldSpec::nonrotating(1.0, 1.5, 3.0).unwrap();
        let period = spec.period().unwrap();
        let t_end = 1000.0 * period;
        let psi_a = qubit_from_canonical(&CanonicalState::lab(0.2, 0.4).unwrap());
        let psi_b = qubit_from_canonical(&CanonicalState::lab(-0.5, 2.0).unwrap());
        let ts = grid(0.0, t_end, 40);
        let (out_a, drift) =
            propagate_recording_drift(&spec, &psi_a, &ts, &IntegratorConfig::default()).unwrap();
        // drift removed per accepted step stays far below 1e-9 per period
        assert!(drift < 1e-9, "per-step norm drift {drift}");
        let out_b = propagate(&spec, &psi_b, &ts).unwrap();
        let d0 = distance(
            &density_from_qubit(&out_a[0]),
            &density_from_qubit(&out_b[0]),
        );
        for (pa, pb) in out_a.iter().zip(&out_b) {
            assert!((pa.norm() - 1.0).abs() < 1e-9);
            let d = distance(&density_from_qubit(pa), &density_from_qubit(pb));
            assert!(
                (d - d0).abs() < 1e-8,
                "distance drifted by {}",
                (d - d0).abs()
            );
        }
    }

    #[test]
    fn bloch_image_satisfies_precession_equation() {
        let spec = FieldSpec::rotating(1.0, 0.5, 2.0, 0.0).unwrap();
        let psi0 = qubit_from_canonical(&CanonicalState::lab(0.3, 1.0).unwrap());
        let h = 1e-5;
        for &t in &[0.7, 2.1, 5.5] {
            let out = propagate(&spec, &psi0, &[t - h, t, t + h]).unwrap();
            let sm = bloch_from_qubit(&out[0]);
            let s0 = bloch_from_qubit(&out[1]);
            let sp = bloch_from_qubit(&out[2]);
            let deriv = (*sp.as_vec() - *sm.as_vec()) / (2.0 * h);
            let want = s0.as_vec().cross(&spec.field_at(t));
            assert!((deriv - want).norm() < 1e-6);
        }
    }
}
