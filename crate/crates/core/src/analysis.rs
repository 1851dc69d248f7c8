//! Stroboscopic and averaging analysis of the nonrotating drive: Lyapunov
//! estimation from nearby trajectories, the `H_k = E - γ q_k` slope fit,
//! potential-weighted drive averages, the high-frequency and strong-coupling
//! predictions, and the rotating-wave error measurement.

use std::io::Write;

use crate::bessel::bessel_j0;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, NonrotatingFieldParams};
use crate::io::write_float;
use crate::linalg::{linear_fit, variance, Vec3};
use crate::ode::solve_dense;
use crate::qoracle::{propagate_with_config, rwa_solution, RwaParams};
use crate::quad::gauss_kronrod;
use crate::real::Real;
use crate::state::{bloch_from_canonical, BlochVector, CanonicalState, QubitState};
use crate::strobe::{stroboscopic_map, StroboscopicMap};

// ---------------------------------------------------------------------------
// Lyapunov estimation
// ---------------------------------------------------------------------------

/// Distance series and exponent estimate for a pair of nearby trajectories.
#[derive(Clone, Debug)]
pub struct LyapunovReport<F> {
    /// `(1/t)·ln(D(t)/D(0))` at the final time.
    pub lambda: F,
    pub d0: F,
    /// `(t_k, D(t_k))` at the stroboscopic instants.
    pub d_series: Vec<(F, F)>,
}

/// Integrates `S0` together with the separation field of a neighbor
/// displaced by chord `delta0`, and reports the separation history.
///
/// The precession equation is linear in `S`, so the difference of two
/// solutions obeys the same equation exactly: a neighbor at `S - δ0·u(0)`
/// stays at `S(t) - δ0·u(t)` with `u̇ = u×B`. Integrating the unit-scale
/// direction `u` instead of a second copy of `S` keeps `D(t) = δ0·‖u(t)‖`
/// conditioned at the integrator tolerance rather than at `ε/δ0`.
pub fn lyapunov_estimate<F: Real>(
    spec: &FieldSpec<F>,
    s0: &BlochVector<F>,
    delta0: F,
    n_periods: usize,
    cfg: &IntegratorConfig<F>,
) -> Result<LyapunovReport<F>> {
    if !(delta0 > F::zero()) || delta0 > F::lit(1e-6) {
        return Err(Error::Domain(
            "delta0 must lie in (0, 1e-6]: zero separation has no exponent".into(),
        ));
    }
    cfg.validate()?;
    let period = spec.period()?;
    let neighbor = displaced_on_sphere(s0, delta0);
    let direction = (*s0.as_vec() - *neighbor.as_vec()) / delta0;

    let spec_c = *spec;
    let rhs = move |t: F, y: &[F; 6]| {
        let b = spec_c.field_at(t);
        let sd = Vec3::new(y[0], y[1], y[2]).cross(&b);
        let ud = Vec3::new(y[3], y[4], y[5]).cross(&b);
        [sd.x, sd.y, sd.z, ud.x, ud.y, ud.z]
    };
    let renorm = cfg.renormalize;
    let y0 = [
        s0.s1(),
        s0.s2(),
        s0.s3(),
        direction.x,
        direction.y,
        direction.z,
    ];
    let t_end = F::of_usize(n_periods) * period;
    let dense = solve_dense(
        rhs,
        F::zero(),
        y0,
        t_end,
        &cfg.ode_options(),
        move |_t, y| {
            if renorm {
                // only the state rides the sphere; ‖u‖ is the observable
                let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                for c in y[..3].iter_mut() {
                    *c /= n;
                }
            }
            Ok(())
        },
    )?;

    let u_norm_0 = direction.norm();
    let d0 = delta0 * u_norm_0;
    let mut d_series = Vec::with_capacity(n_periods + 1);
    for k in 0..=n_periods {
        let t = F::of_usize(k) * period;
        let y = dense.eval(t);
        let u = (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]).sqrt();
        d_series.push((t, delta0 * u));
    }
    let d_end = d_series.last().unwrap().1;
    let lambda = if t_end > F::zero() {
        (d_end / d0).ln() / t_end
    } else {
        F::zero()
    };
    Ok(LyapunovReport {
        lambda,
        d0,
        d_series,
    })
}

/// Rotates `s0` by the chord angle `2·asin(δ/2)` about a perpendicular axis,
/// giving a neighbor at Euclidean distance exactly `δ`.
fn displaced_on_sphere<F: Real>(s0: &BlochVector<F>, delta: F) -> BlochVector<F> {
    let v = *s0.as_vec();
    // coordinate axis least aligned with v
    let candidates = [
        Vec3::new(F::one(), F::zero(), F::zero()),
        Vec3::new(F::zero(), F::one(), F::zero()),
        Vec3::new(F::zero(), F::zero(), F::one()),
    ];
    let mut best = candidates[0];
    let mut best_dot = F::infinity();
    for c in candidates {
        let d = v.dot(&c).abs();
        if d < best_dot {
            best_dot = d;
            best = c;
        }
    }
    let axis = v.cross(&best).normalized();
    let theta = F::lit(2.0) * (delta / F::lit(2.0)).asin();
    let rot = crate::linalg::Mat3::rotation_axis(&axis, theta);
    BlochVector::from_vec_unchecked(rot.apply(&v))
}

// ---------------------------------------------------------------------------
// Gamma slope fitting
// ---------------------------------------------------------------------------

/// Regression output of `H_k = E(q₀,p₀) - γ q_k`.
#[derive(Clone, Copy, Debug)]
pub struct GammaFit<F> {
    /// Magnitude of the fitted slope, `γ = -dH/dq`.
    pub gamma: F,
    /// Regression constant `E(q₀, p₀)`; depends on the initial condition
    /// while γ does not.
    pub intercept: F,
    pub max_residual: F,
    pub n_points: usize,
}

/// Ordinary least squares of the strobe energies against `q_k` for one
/// orbit of a stroboscopic map.
pub fn fit_gamma<F: Real>(map: &StroboscopicMap<F>, ic_index: usize) -> Result<GammaFit<F>> {
    let orbit = map
        .orbits
        .get(ic_index)
        .ok_or_else(|| Error::Domain(format!("no orbit with index {ic_index}")))?;
    let qs: Vec<F> = orbit.samples.iter().map(|s| s.q).collect();
    let hs: Vec<F> = orbit.samples.iter().map(|s| s.h).collect();
    if qs.len() < 3 {
        return Err(Error::Degenerate("need at least 3 strobe points".into()));
    }
    if variance(&qs) < F::lit(1e-12) {
        return Err(Error::Degenerate(
            "q does not vary along this orbit (fixed point)".into(),
        ));
    }
    let (slope, intercept, max_residual) =
        linear_fit(&qs, &hs).ok_or_else(|| Error::Degenerate("degenerate fit".into()))?;
    Ok(GammaFit {
        gamma: -slope,
        intercept,
        max_residual,
        n_points: qs.len(),
    })
}

/// Strobes a nonrotating drive from one initial condition and fits γ.
pub fn gamma_for_nr<F: Real>(
    params: &NonrotatingFieldParams<F>,
    initial: &CanonicalState<F>,
    n_periods: usize,
    cfg: &IntegratorConfig<F>,
) -> Result<GammaFit<F>> {
    let spec = FieldSpec::Nonrotating(*params);
    let map = stroboscopic_map(&spec, &[*initial], n_periods, cfg)?;
    fit_gamma(&map, 0)
}

// ---------------------------------------------------------------------------
// Potential-weighted averages
// ---------------------------------------------------------------------------

/// One per-period entry of the weighted average series.
#[derive(Clone, Copy, Debug)]
pub struct AverageEntry<F> {
    pub k: usize,
    pub value: F,
    /// Set when `|∫V̇ dt|` fell below the denominator guard; the value is
    /// reported but excluded from summaries.
    pub flagged: bool,
}

/// Per-period averages `⟨f⟩_{k+1,k}` and the aggregate over the full window.
#[derive(Clone, Debug)]
pub struct AverageSeries<F> {
    pub entries: Vec<AverageEntry<F>>,
    /// `⟨f⟩` over `[t_start, t_end]` in one ratio.
    pub aggregate: F,
    pub aggregate_flagged: bool,
    pub flagged_count: usize,
    pub t_start: F,
    pub t_end: F,
}

impl<F: Real> AverageSeries<F> {
    /// Writes the `k,f_avg,flagged` CSV form.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "k,f_avg,flagged")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{}",
                e.k,
                write_float(e.value),
                u8::from(e.flagged)
            )?;
        }
        Ok(())
    }
}

struct WeightedAverager<F: Real> {
    dense: crate::ode::DenseOutput<F, 3>,
    spec: FieldSpec<F>,
    b3: F,
    omega: F,
    guard: F,
}

impl<F: Real> WeightedAverager<F> {
    fn new(
        params: &NonrotatingFieldParams<F>,
        initial: &CanonicalState<F>,
        t_end: F,
        cfg: &IntegratorConfig<F>,
    ) -> Result<Self> {
        let spec = FieldSpec::Nonrotating(*params);
        let s0 = bloch_from_canonical(initial);
        let (dense, _) = crate::dynamics::solve_bloch_dense(&spec, &s0, t_end, cfg)?;
        // denominator guard ε = 1e-12 · max|V̇| · T, with V = -2B₃q
        let period = params.period();
        let mut max_vdot = F::zero();
        let n_scan = 64.max((t_end / period).to_f64().unwrap_or(1.0) as usize * 16);
        for i in 0..=n_scan {
            let t = t_end * F::of_usize(i) / F::of_usize(n_scan);
            max_vdot = max_vdot.max(Self::vdot_at(&dense, &spec, params.b3, t).abs());
        }
        Ok(Self {
            dense,
            spec,
            b3: params.b3,
            omega: params.omega,
            guard: F::lit(1e-12) * max_vdot * period,
        })
    }

    fn vdot_at(dense: &crate::ode::DenseOutput<F, 3>, spec: &FieldSpec<F>, b3: F, t: F) -> F {
        let y = dense.eval(t);
        let s = Vec3::from_array(y);
        let sdot = s.cross(&spec.field_at(t));
        // V = -2B₃ q = 2B₃ S₃ ⇒ V̇ = 2B₃ Ṡ₃
        F::lit(2.0) * b3 * sdot.z
    }

    /// `⟨f⟩ = ∫ f V̇ dt / ∫ V̇ dt` over `[t1, t2]`; the denominator is the
    /// exact endpoint difference `V(t2) - V(t1)`.
    fn window(&self, t1: F, t2: F) -> Result<(F, bool)> {
        let numerator = gauss_kronrod(
            &mut |t| (self.omega * t).cos() * Self::vdot_at(&self.dense, &self.spec, self.b3, t),
            t1,
            t2,
            F::lit(1e-10),
            F::lit(1e-12),
            48,
        )?;
        let q_at = |t: F| -self.dense.eval(t)[2];
        let denominator = -F::lit(2.0) * self.b3 * (q_at(t2) - q_at(t1));
        let flagged = denominator.abs() < self.guard.max(F::lit(1e-300));
        if flagged {
            Ok((F::zero(), true))
        } else {
            Ok((numerator / denominator, false))
        }
    }
}

/// Per-period weighted averages `⟨f⟩_{k+1,k}` for `k = 0..n_periods` plus
/// the aggregate over `[0, n_periods·T]`.
pub fn weighted_average_series<F: Real>(
    params: &NonrotatingFieldParams<F>,
    initial: &CanonicalState<F>,
    n_periods: usize,
    cfg: &IntegratorConfig<F>,
) -> Result<AverageSeries<F>> {
    if n_periods == 0 {
        return Err(Error::Domain("need at least one period".into()));
    }
    let period = params.period();
    let t_end = F::of_usize(n_periods) * period;
    let avg = WeightedAverager::new(params, initial, t_end, cfg)?;
    let mut entries = Vec::with_capacity(n_periods);
    let mut flagged_count = 0usize;
    for k in 0..n_periods {
        let t1 = F::of_usize(k) * period;
        let t2 = F::of_usize(k + 1) * period;
        let (value, flagged) = avg.window(t1, t2)?;
        flagged_count += usize::from(flagged);
        entries.push(AverageEntry { k, value, flagged });
    }
    let (aggregate, aggregate_flagged) = avg.window(F::zero(), t_end)?;
    Ok(AverageSeries {
        entries,
        aggregate,
        aggregate_flagged,
        flagged_count,
        t_start: F::zero(),
        t_end,
    })
}

/// The aggregate `⟨f⟩` over an arbitrary window `[0, t_max]`.
pub fn weighted_average_window<F: Real>(
    params: &NonrotatingFieldParams<F>,
    initial: &CanonicalState<F>,
    t_max: F,
    cfg: &IntegratorConfig<F>,
) -> Result<(F, bool)> {
    if !(t_max > F::zero()) {
        return Err(Error::Domain("t_max must be positive".into()));
    }
    let avg = WeightedAverager::new(params, initial, t_max, cfg)?;
    avg.window(F::zero(), t_max)
}

// ---------------------------------------------------------------------------
// Expansion terms
// ---------------------------------------------------------------------------

/// The two coefficient families that weight the Taylor expansion of the
/// per-period average, for `f = cos`:
/// `A_n = ω^{-(n+1)} ∫₀^{2π} cos φ · φⁿ dφ` and
/// `B_n = (2π/ω)^{n+1}/(n+1)`.
#[derive(Clone, Debug)]
pub struct ExpansionTerms<F> {
    pub a: Vec<F>,
    pub b: Vec<F>,
}

/// Exact elementary values via the by-parts recurrence
/// `I_n = n(2π)^{n-1} - n(n-1) I_{n-2}`, `I₀ = I₁ = 0`.
pub fn expansion_terms<F: Real>(omega: F, n_max: usize) -> Result<ExpansionTerms<F>> {
    if !(omega > F::zero()) {
        return Err(Error::Domain("omega must be positive".into()));
    }
    let tau = F::TAU();
    let mut moments = vec![F::zero(); n_max + 1];
    for n in 2..=n_max {
        let nf = F::of_usize(n);
        let prev = if n >= 2 { moments[n - 2] } else { F::zero() };
        moments[n] = nf * tau.powi((n - 1) as i32) - nf * (nf - F::one()) * prev;
    }
    let a = moments
        .iter()
        .enumerate()
        .map(|(n, &m)| m / omega.powi((n + 1) as i32))
        .collect();
    let b = (0..=n_max)
        .map(|n| (tau / omega).powi((n + 1) as i32) / F::of_usize(n + 1))
        .collect();
    Ok(ExpansionTerms { a, b })
}

// ---------------------------------------------------------------------------
// High-frequency prediction
// ---------------------------------------------------------------------------

/// Leading-order per-period weighted average of the drive at high frequency,
/// `⟨f⟩ = -4B₀²/ω²`.
///
/// The exact strobe identity `γ = 2B₃(1 - ⟨f⟩_{k+1,k})` pins this value:
/// measured per-period averages match `-4B₀²/ω²` and are independent of the
/// axial amplitude at this order (see the module tests, which measure both).
pub fn high_freq_average<F: Real>(params: &NonrotatingFieldParams<F>) -> F {
    let r = params.b0 / params.omega;
    F::lit(-4.0) * r * r
}

/// High-frequency slope prediction `γ = 2B₃(1 - ⟨f⟩)`.
pub fn gamma_prediction<F: Real>(params: &NonrotatingFieldParams<F>) -> F {
    F::lit(2.0) * params.b3 * (F::one() - high_freq_average(params))
}

/// One row of a γ-vs-ω sweep.
#[derive(Clone, Copy, Debug)]
pub struct GammaSweepRow<F> {
    pub omega: F,
    pub gamma_fit: F,
    pub gamma_pred: F,
    pub rel_err: F,
}

/// Writes sweep rows in the `omega,gamma_fit,gamma_pred,rel_err` CSV form.
pub fn write_sweep_csv<F: Real, W: Write>(
    rows: &[GammaSweepRow<F>],
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "omega,gamma_fit,gamma_pred,rel_err")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            write_float(r.omega),
            write_float(r.gamma_fit),
            write_float(r.gamma_pred),
            write_float(r.rel_err),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Strong coupling
// ---------------------------------------------------------------------------

/// Strong-coupling averaging result: the renormalized transverse frequency
/// `ω₀ = B₀·J₀(2B₃/ω)` and whether it sits on a Bessel zero (dynamical
/// localization).
#[derive(Clone, Copy, Debug)]
pub struct StrongCouplingResult<F> {
    pub omega0: F,
    pub bessel_argument: F,
    pub localized: bool,
}

impl<F: Real> StrongCouplingResult<F> {
    /// Mean-map level `K_m = 2ω₀√(1-q₀²)cos p₀` through an initial
    /// condition.
    pub fn mean_map_level(&self, initial: &CanonicalState<F>) -> F {
        let root = (F::one() - initial.q() * initial.q()).max(F::zero()).sqrt();
        F::lit(2.0) * self.omega0 * root * initial.p().cos()
    }
}

/// Evaluates `ω₀ = B₀·J₀(2B₃/ω)`. The validity window `B₀T ≪ 1` is the
/// caller's to check; this function reports, it does not enforce.
pub fn strong_coupling<F: Real>(params: &NonrotatingFieldParams<F>) -> StrongCouplingResult<F> {
    let arg = F::lit(2.0) * params.b3 / params.omega;
    let j0 = bessel_j0(arg);
    StrongCouplingResult {
        omega0: params.b0 * j0,
        bessel_argument: arg,
        localized: j0.abs() < F::lit(1e-6),
    }
}

// ---------------------------------------------------------------------------
// RWA error
// ---------------------------------------------------------------------------

/// Maximum spinor-norm deviation `‖ψ(t) - ψ_RWA(t)‖` over `t ∈ [0, ω/B₃]`
/// on a 10³-point grid, for the resonant nonrotating drive.
///
/// Resonance `ω = 2B₀` is enforced; off-resonance behavior is available
/// through [`crate::qoracle::rwa_solution`] directly. For `B₃ = 0` the
/// window collapses and ten drive periods are used instead.
pub fn rwa_error<F: Real>(params: &RwaParams<F>, psi0: &QubitState<F>) -> Result<F> {
    if !params.is_resonant(F::lit(1e-12)) {
        return Err(Error::Domain(format!(
            "resonance omega = 2*b0 required (omega = {}, b0 = {})",
            params.omega, params.b0
        )));
    }
    let t_max = if params.b3 == F::zero() {
        F::lit(10.0) * F::TAU() / params.omega
    } else {
        params.omega / params.b3.abs()
    };
    let n = 1000usize;
    let grid: Vec<F> = (0..=n)
        .map(|i| t_max * F::of_usize(i) / F::of_usize(n))
        .collect();
    let spec = FieldSpec::nonrotating(params.b0, params.b3, params.omega)?;
    let cfg = IntegratorConfig::with_tolerances(F::lit(1e-11), F::lit(1e-13));
    let psis = propagate_with_config(&spec, psi0, &grid, &cfg)?;
    let mut worst = F::zero();
    for (psi, &t) in psis.iter().zip(&grid) {
        let approx = rwa_solution(params, psi0, t);
        worst = worst.max(psi.spinor_distance(&approx));
    }
    Ok(worst)
}
