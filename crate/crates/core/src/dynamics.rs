//! Numerical integration of the classical precession `dS/dt = S×B(t)`.
//!
//! The 3-vector form is the primary representation: the `(q, p)` chart is
//! singular at the poles, exactly where NOT-gate trajectories pass. A chart
//! integrator is provided as a cross-check and refuses to run near `q = ±1`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fields::{hamiltonian_value_bloch, FieldSpec};
use crate::io::write_float;
use crate::linalg::Vec3;
use crate::ode::{solve_dense, DenseOutput, OdeOptions};
use crate::qoracle;
use crate::real::Real;
use crate::state::{
    bloch_from_canonical, bloch_from_qubit, canonical_from_bloch, qubit_from_canonical,
    BlochVector, CanonicalState,
};

/// Tolerances and behavior switches for trajectory integration.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig<F> {
    pub rel_tol: F,
    pub abs_tol: F,
    pub max_step: Option<F>,
    /// Project the state back to the unit sphere after every accepted step,
    /// recording the drift that was removed.
    pub renormalize: bool,
}

impl<F: Real> Default for IntegratorConfig<F> {
    fn default() -> Self {
        Self {
            rel_tol: F::lit(1e-10),
            abs_tol: F::lit(1e-12),
            max_step: None,
            renormalize: true,
        }
    }
}

impl<F: Real> IntegratorConfig<F> {
    pub fn with_tolerances(rel_tol: F, abs_tol: F) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > F::zero() && self.abs_tol > F::zero()) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn ode_options(&self) -> OdeOptions<F> {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            ..Default::default()
        }
    }
}

/// Integration provenance attached to a trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryMeta<F> {
    pub spec: FieldSpec<F>,
    pub config: IntegratorConfig<F>,
    /// Largest norm defect removed by renormalization (or merely observed,
    /// when renormalization is off).
    pub max_norm_drift: F,
}

/// Time-ordered samples of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory<F> {
    pub times: Vec<F>,
    pub states: Vec<BlochVector<F>>,
    pub canonical: Vec<CanonicalState<F>>,
    pub energies: Vec<F>,
    pub meta: TrajectoryMeta<F>,
}

impl<F: Real> Trajectory<F> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes the `t,s1,s2,s3,q,p,H` CSV form.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,s1,s2,s3,q,p,H")?;
        for i in 0..self.len() {
            let s = &self.states[i];
            let c = &self.canonical[i];
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                write_float(self.times[i]),
                write_float(s.s1()),
                write_float(s.s2()),
                write_float(s.s3()),
                write_float(c.q()),
                write_float(c.p()),
                write_float(self.energies[i]),
            )?;
        }
        Ok(())
    }
}

fn validate_grid<F: Real>(t_grid: &[F]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    if t_grid[0] < F::zero() {
        return Err(Error::Domain("time grid must start at t >= 0".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be ascending".into()));
    }
    Ok(())
}

/// Norm drift above this bound aborts the run as an integrator failure.
const DRIFT_LIMIT: f64 = 1e-6;

/// Integrates the Bloch equation and returns the dense solution together
/// with the maximum norm drift seen at accepted steps.
pub(crate) fn solve_bloch_dense<F: Real>(
    spec: &FieldSpec<F>,
    s0: &BlochVector<F>,
    t_end: F,
    cfg: &IntegratorConfig<F>,
) -> Result<(DenseOutput<F, 3>, F)> {
    cfg.validate()?;
    let spec = *spec;
    let rhs = move |t: F, y: &[F; 3]| {
        let b = spec.field_at(t);
        let s = Vec3::from_array(*y);
        s.cross(&b).to_array()
    };
    let mut max_drift = F::zero();
    let renorm = cfg.renormalize;
    let dense = solve_dense(
        rhs,
        F::zero(),
        s0.as_vec().to_array(),
        t_end,
        &cfg.ode_options(),
        move |_t, y| {
            let norm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            let defect = (norm - F::one()).abs();
            if defect > F::lit(DRIFT_LIMIT) {
                return Err(Error::NormBlowup {
                    drift: defect.to_f64().unwrap_or(f64::NAN),
                    limit: DRIFT_LIMIT,
                });
            }
            max_drift = max_drift.max(defect);
            if renorm {
                for c in y.iter_mut() {
                    *c /= norm;
                }
            }
            Ok(())
        },
    )?;
    Ok((dense, max_drift))
}

fn sample_to_bloch<F: Real>(y: [F; 3], renormalize: bool, max_drift: &mut F) -> BlochVector<F> {
    let v = Vec3::from_array(y);
    let norm = v.norm();
    *max_drift = max_drift.max((norm - F::one()).abs());
    if renormalize {
        BlochVector::from_vec_unchecked(v / norm)
    } else {
        BlochVector::from_vec_unchecked(v)
    }
}

/// Solves `dS/dt = S×B(t)` from `S(0) = s0` with dense output on `t_grid`.
pub fn integrate_bloch<F: Real>(
    spec: &FieldSpec<F>,
    s0: &BlochVector<F>,
    t_grid: &[F],
    cfg: &IntegratorConfig<F>,
) -> Result<Trajectory<F>> {
    validate_grid(t_grid)?;
    let t_end = *t_grid.last().unwrap();
    let (dense, mut max_drift) = solve_bloch_dense(spec, s0, t_end, cfg)?;

    let mut states = Vec::with_capacity(t_grid.len());
    let mut canonical = Vec::with_capacity(t_grid.len());
    let mut energies = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let s = sample_to_bloch(dense.eval(t), cfg.renormalize, &mut max_drift);
        canonical.push(canonical_from_bloch(&s));
        energies.push(hamiltonian_value_bloch(spec, &s, t));
        states.push(s);
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        canonical,
        energies,
        meta: TrajectoryMeta {
            spec: *spec,
            config: *cfg,
            max_norm_drift: max_drift,
        },
    })
}

const CHART_GUARD: f64 = 1e-6;

/// Integrates Hamilton's equations in the `(q, p)` chart directly.
///
/// Provided as a cross-check of the Bloch-space integrator; fails with a
/// singularity error whenever `|q|` comes within `1e-6` of the poles.
pub fn integrate_canonical<F: Real>(
    spec: &FieldSpec<F>,
    initial: &CanonicalState<F>,
    t_grid: &[F],
    cfg: &IntegratorConfig<F>,
) -> Result<Trajectory<F>> {
    validate_grid(t_grid)?;
    cfg.validate()?;
    let guard = F::one() - F::lit(CHART_GUARD);
    if initial.q().abs() >= guard {
        return Err(Error::Singularity {
            q: initial.q().to_f64().unwrap_or(f64::NAN),
        });
    }
    let spec_c = *spec;
    let rhs = move |t: F, y: &[F; 2]| {
        let b = spec_c.field_at(t);
        let (q, p) = (y[0], y[1]);
        let root = (F::one() - q * q).max(F::zero()).sqrt();
        let (sp, cp) = p.sin_cos();
        let qdot = (b.x * sp - b.y * cp) * root;
        let pdot = -(b.x * cp + b.y * sp) * q / root - b.z;
        [qdot, pdot]
    };
    let t_end = *t_grid.last().unwrap();
    let dense = solve_dense(
        rhs,
        F::zero(),
        [initial.q(), initial.p()],
        t_end,
        &cfg.ode_options(),
        move |_t, y| {
            if y[0].abs() >= guard {
                Err(Error::Singularity {
                    q: y[0].to_f64().unwrap_or(f64::NAN),
                })
            } else {
                Ok(())
            }
        },
    )?;

    let mut states = Vec::with_capacity(t_grid.len());
    let mut canonical = Vec::with_capacity(t_grid.len());
    let mut energies = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let y = dense.eval(t);
        let c = CanonicalState::new(y[0], y[1], initial.frame())?;
        let s = bloch_from_canonical(&c);
        energies.push(hamiltonian_value_bloch(spec, &s, t));
        states.push(s);
        canonical.push(c);
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        canonical,
        energies,
        meta: TrajectoryMeta {
            spec: *spec,
            config: *cfg,
            max_norm_drift: F::zero(),
        },
    })
}

/// Maximum deviation `‖S_classical(t) − S_quantum(t)‖` over the grid, where
/// the quantum side comes from the Schrödinger oracle.
pub fn quantum_consistency<F: Real>(
    spec: &FieldSpec<F>,
    initial: &CanonicalState<F>,
    t_grid: &[F],
    cfg: &IntegratorConfig<F>,
) -> Result<F> {
    let s0 = bloch_from_canonical(initial);
    let classical = integrate_bloch(spec, &s0, t_grid, cfg)?;
    let psi0 = qubit_from_canonical(initial);
    let quantum = qoracle::propagate_with_config(spec, &psi0, t_grid, cfg)?;
    let mut worst = F::zero();
    for (s_cl, psi) in classical.states.iter().zip(&quantum) {
        let s_q = bloch_from_qubit(psi);
        let d = (*s_cl.as_vec() - *s_q.as_vec()).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}
