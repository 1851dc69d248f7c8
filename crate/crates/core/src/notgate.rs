//! Prediction, verification and search of unitary NOT regimes: parameter
//! windows where the drive carries `S(0)` to its antipode,
//! `S(t_not)·S(0) = -1`.
//!
//! For the rotating drive the four resonant cases and their
//! initial-condition classes follow from the closed-form overlap; for the
//! nonrotating drive the resonance condition is expressed through the
//! fitted slope γ and located by bisection.

use std::io::Write;

use serde::Serialize;

use crate::analysis::gamma_for_nr;
use crate::dynamics::{solve_bloch_dense, IntegratorConfig};
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, NonrotatingFieldParams, RotatingFieldParams};
use crate::io::write_float;
use crate::real::Real;
use crate::state::{bloch_from_canonical, CanonicalState};

/// Initial-condition class (branch) on which a regime performs the NOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialClass {
    /// The equator `q₀ = 0`, any phase: a universal phase gate.
    Equator,
    /// The poles `q₀ = ∓1`.
    Poles,
    /// The lines `p₀ = lπ` (any `q₀`): a universal real gate.
    RealLines,
    /// The lines `p₀ = (2l+3)π/4` (any `q₀`), odd quarters.
    QuarterLines,
    /// The lines `p₀ = (l+½)π` (any `q₀`).
    HalfPiLines,
}

impl InitialClass {
    /// A representative `p₀` for branch index `l` (`q₀` free unless the
    /// class pins it).
    pub fn branch_phase<F: Real>(&self, l: u32) -> F {
        let pi = F::PI();
        let lf = F::lit(f64::from(l));
        match self {
            InitialClass::Equator => lf, // any phase; l reused as a knob
            InitialClass::Poles => F::zero(),
            InitialClass::RealLines => lf * pi,
            InitialClass::QuarterLines => (F::lit(2.0) * lf + F::lit(3.0)) * pi / F::lit(4.0),
            InitialClass::HalfPiLines => (lf + F::lit(0.5)) * pi,
        }
    }
}

/// The NOT-instant schedule of a regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum TNotSchedule {
    /// `t = (2n+1)·π/ω`
    OddPiOverOmega,
    /// `t = (2n+1)·π/(2ω)`
    OddPiOverTwoOmega,
    /// `t = (4n+ε)·π/(2ω)` with `ε = 1` for even `l`, `ε = 3` for odd `l`
    EpsilonPiOverTwoOmega,
    /// `t = m(2n+1)·2π/ω`
    PeriodMultiples { m: u32 },
}

impl TNotSchedule {
    /// Evaluates the NOT instant for integer indices `(n, l)`.
    pub fn time<F: Real>(&self, omega: F, n: u32, l: u32) -> F {
        let pi = F::PI();
        let two = F::lit(2.0);
        let nf = F::lit(f64::from(n));
        match self {
            TNotSchedule::OddPiOverOmega => (two * nf + F::one()) * pi / omega,
            TNotSchedule::OddPiOverTwoOmega => (two * nf + F::one()) * pi / (two * omega),
            TNotSchedule::EpsilonPiOverTwoOmega => {
                let eps = if l.is_multiple_of(2) {
                    F::one()
                } else {
                    F::lit(3.0)
                };
                (F::lit(4.0) * nf + eps) * pi / (two * omega)
            }
            TNotSchedule::PeriodMultiples { m } => {
                F::lit(f64::from(*m)) * (two * nf + F::one()) * F::TAU() / omega
            }
        }
    }
}

/// A matched NOT regime: which resonance case fired, on which
/// initial-condition class, with which schedule.
#[derive(Clone, Debug)]
pub struct NotRegime<F> {
    pub case_id: u8,
    /// Integer parameter of the matched resonance (cases 2 and 4).
    pub m: Option<u32>,
    pub class: InitialClass,
    pub schedule: TNotSchedule,
    /// Relative residual of the matched resonance relation.
    pub constraint_residual: F,
}

impl<F: Real> NotRegime<F> {
    pub fn t_not(&self, params: &RotatingFieldParams<F>, n: u32, l: u32) -> F {
        self.schedule.time(params.omega, n, l)
    }
}

/// Integer search bounds for the resonance relations.
#[derive(Clone, Copy, Debug)]
pub struct IntBounds {
    pub max_m: u32,
}

impl Default for IntBounds {
    fn default() -> Self {
        Self { max_m: 16 }
    }
}

const CONSTRAINT_TOL: f64 = 1e-9;

fn rel_close<F: Real>(a: F, b: F) -> Option<F> {
    let scale = a.abs().max(b.abs()).max(F::lit(1e-30));
    let resid = (a - b).abs() / scale;
    (resid < F::lit(CONSTRAINT_TOL)).then_some(resid)
}

/// Checks the four resonance cases and returns every matched regime with
/// its schedule and class. All matching cases are reported; a parameter
/// point can satisfy several (e.g. `B₃ = ω/2, B₀ = ω` satisfies both the
/// `ω = B/2` relation and the case-3 relations).
pub fn predict_regimes<F: Real>(
    params: &RotatingFieldParams<F>,
    bounds: &IntBounds,
) -> Vec<NotRegime<F>> {
    let mut out = Vec::new();
    let omega = params.omega;
    let two = F::lit(2.0);
    let half_omega = omega / two;
    let detuning = params.detuning();

    // case 1: ω² = B₀² + Ω², the equatorial universal phase gate
    if let Some(resid) = rel_close(omega * omega, params.b0 * params.b0 + detuning * detuning) {
        out.push(NotRegime {
            case_id: 1,
            m: None,
            class: InitialClass::Equator,
            schedule: TNotSchedule::OddPiOverOmega,
            constraint_residual: resid,
        });
    }

    let on_axis_resonance = rel_close(params.b3, half_omega);
    if let Some(axis_resid) = on_axis_resonance {
        // case 2: B₀ = (2m+1)ω/2
        for m in 0..=bounds.max_m {
            let want = F::lit(f64::from(2 * m + 1)) * half_omega;
            if let Some(resid) = rel_close(params.b0, want) {
                let resid = resid.max(axis_resid);
                out.push(NotRegime {
                    case_id: 2,
                    m: Some(m),
                    class: InitialClass::Poles,
                    schedule: TNotSchedule::OddPiOverOmega,
                    constraint_residual: resid,
                });
                out.push(NotRegime {
                    case_id: 2,
                    m: Some(m),
                    class: InitialClass::RealLines,
                    schedule: TNotSchedule::OddPiOverOmega,
                    constraint_residual: resid,
                });
                break;
            }
        }
        // case 3: B₀ = ω
        if let Some(resid) = rel_close(params.b0, omega) {
            let resid = resid.max(axis_resid);
            out.push(NotRegime {
                case_id: 3,
                m: None,
                class: InitialClass::Poles,
                schedule: TNotSchedule::OddPiOverTwoOmega,
                constraint_residual: resid,
            });
            out.push(NotRegime {
                case_id: 3,
                m: None,
                class: InitialClass::QuarterLines,
                schedule: TNotSchedule::EpsilonPiOverTwoOmega,
                constraint_residual: resid,
            });
        }
        // case 4: B₀ = ω/(4m), m ≥ 1
        for m in 1..=bounds.max_m {
            let want = omega / F::lit(f64::from(4 * m));
            if let Some(resid) = rel_close(params.b0, want) {
                out.push(NotRegime {
                    case_id: 4,
                    m: Some(m),
                    class: InitialClass::HalfPiLines,
                    schedule: TNotSchedule::PeriodMultiples { m },
                    constraint_residual: resid.max(axis_resid),
                });
                break;
            }
        }
    }
    out
}

/// Sign convention for the case-1 overlap expression. `Corrected` reaches
/// `-1` on the equator class; `Flipped` is the opposite overall sign,
/// retained for cross-checks (it cannot reach `-1` on that class).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Case1Sign {
    #[default]
    Corrected,
    Flipped,
}

/// Closed-form overlap `S(t_not)·S(0)` of each case as a function of the
/// initial condition:
///
/// 1. `2q₀² - 1`
/// 2. `-q₀² + (q₀² - 1)cos 2p₀`
/// 3. `-q₀² + (-1)^{l+1}(q₀² - 1)sin 2p₀`
/// 4. `-q₀² + (1 - q₀²)cos 2p₀`
pub fn overlap_expression<F: Real>(case_id: u8, initial: &CanonicalState<F>, l: u32) -> Result<F> {
    overlap_expression_with(case_id, initial, l, Case1Sign::Corrected)
}

pub fn overlap_expression_with<F: Real>(
    case_id: u8,
    initial: &CanonicalState<F>,
    l: u32,
    case1_sign: Case1Sign,
) -> Result<F> {
    let q2 = initial.q() * initial.q();
    let two = F::lit(2.0);
    let v = match case_id {
        1 => match case1_sign {
            Case1Sign::Corrected => two * q2 - F::one(),
            Case1Sign::Flipped => F::one() - two * q2,
        },
        2 => -q2 + (q2 - F::one()) * (two * initial.p()).cos(),
        3 => {
            let sign = if l.is_multiple_of(2) {
                F::one()
            } else {
                -F::one()
            };
            // (-1)^{l+1}(q₀²-1) = (-1)^l (1-q₀²)
            -q2 + sign * (F::one() - q2) * (two * initial.p()).sin()
        }
        4 => -q2 + (F::one() - q2) * (two * initial.p()).cos(),
        other => return Err(Error::Domain(format!("case_id {other} not in 1..=4"))),
    };
    Ok(v)
}

/// Outcome of a numerical NOT search.
#[derive(Clone, Debug)]
pub struct NotDetection<F> {
    /// Time of the deepest overlap minimum found in `[0, t_max]`.
    pub t_star: F,
    pub min_overlap: F,
    /// `min_overlap ≤ -1 + tol`.
    pub achieved: bool,
    /// All refined local minima `(t, overlap)`, in time order.
    pub minima: Vec<(F, F)>,
    /// The scanned overlap curve `(t, S(t)·S(0))`.
    pub scan: Vec<(F, F)>,
}

impl<F: Real> NotDetection<F> {
    /// Writes the scanned `t,overlap` CSV form.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,overlap")?;
        for &(t, ov) in &self.scan {
            writeln!(w, "{},{}", write_float(t), write_float(ov))?;
        }
        Ok(())
    }
}

/// Tracks `S(t)·S(0)` on a dense grid (at least 200 samples per drive
/// period), refines every local minimum by golden-section search and reports
/// whether the antipode was reached within `tol`.
pub fn detect_not<F: Real>(
    spec: &FieldSpec<F>,
    initial: &CanonicalState<F>,
    t_max: F,
    tol: F,
    cfg: &IntegratorConfig<F>,
) -> Result<NotDetection<F>> {
    if !(t_max > F::zero()) {
        return Err(Error::Domain("t_max must be positive".into()));
    }
    if !(tol > F::zero()) || tol > F::lit(0.1) {
        return Err(Error::Domain("tol must lie in (0, 0.1]".into()));
    }
    let s0 = bloch_from_canonical(initial);
    let (dense, _) = solve_bloch_dense(spec, &s0, t_max, cfg)?;
    let overlap = |t: F| {
        let y = dense.eval(t);
        let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        (y[0] * s0.s1() + y[1] * s0.s2() + y[2] * s0.s3()) / n
    };

    // sampling density: 200 per period for periodic drives, otherwise 200
    // per precession period of the (constant) field, floored at 2000 total
    let samples_per_unit = match spec.period() {
        Ok(period) => F::lit(200.0) / period,
        Err(_) => {
            let b = spec.field_at(F::zero()).norm();
            if b > F::zero() {
                F::lit(200.0) * b / F::TAU()
            } else {
                F::zero()
            }
        }
    };
    let n = ((t_max * samples_per_unit).to_f64().unwrap_or(0.0).ceil() as usize).max(2000);
    let mut scan = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = t_max * F::of_usize(i) / F::of_usize(n);
        scan.push((t, overlap(t)));
    }

    let mut minima = Vec::new();
    for i in 1..n {
        if scan[i].1 <= scan[i - 1].1 && scan[i].1 <= scan[i + 1].1 && scan[i].1 < F::one() {
            let (t, v) = golden_minimize(&overlap, scan[i - 1].0, scan[i + 1].0);
            minima.push((t, v));
        }
    }

    let (mut t_star, mut min_overlap) = scan
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    for &(t, v) in &minima {
        if v < min_overlap {
            min_overlap = v;
            t_star = t;
        }
    }
    Ok(NotDetection {
        t_star,
        min_overlap,
        achieved: min_overlap <= -F::one() + tol,
        minima,
        scan,
    })
}

fn golden_minimize<F: Real>(f: &impl Fn(F) -> F, mut a: F, mut b: F) -> (F, F) {
    let inv_phi = F::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if (b - a).abs() < F::lit(1e-13) * (a.abs() + b.abs() + F::one()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / F::lit(2.0);
    (mid, f(mid))
}

/// Result of the nonrotating resonance search.
#[derive(Clone, Copy, Debug)]
pub struct NrResonance<F> {
    pub b0_star: F,
    pub gamma_star: F,
    /// Residual of `γ² - B₀² - (B₃ - γ/2)²` at the root.
    pub residual: F,
    pub iterations: usize,
}

/// Settings of the γ evaluation inside the resonance search. γ is
/// initial-condition independent, so any generic seed state works; a fixed
/// one keeps the search deterministic.
#[derive(Clone, Copy, Debug)]
pub struct ResonanceSearchSettings<F> {
    pub n_periods: usize,
    pub seed_q0: F,
    pub seed_p0: F,
    pub max_iterations: usize,
}

impl<F: Real> Default for ResonanceSearchSettings<F> {
    fn default() -> Self {
        Self {
            n_periods: 200,
            seed_q0: F::lit(0.5),
            seed_p0: F::lit(1.0),
            max_iterations: 60,
        }
    }
}

/// Bisection on `g(B₀) = γ(B₀)² - B₀² - (B₃ - γ(B₀)/2)²` over `b0_range`,
/// stopping at `|g| < 1e-6·ω²`.
pub fn nr_resonance_search<F: Real>(
    omega: F,
    b3: F,
    b0_range: (F, F),
    settings: &ResonanceSearchSettings<F>,
    cfg: &IntegratorConfig<F>,
) -> Result<NrResonance<F>> {
    let seed = CanonicalState::lab(settings.seed_q0, settings.seed_p0)?;
    let two = F::lit(2.0);
    let gamma_of = |b0: F| -> Result<F> {
        let params = NonrotatingFieldParams::new(b0, b3, omega)?;
        Ok(gamma_for_nr(&params, &seed, settings.n_periods, cfg)?.gamma)
    };
    let g_of = |gamma: F, b0: F| gamma * gamma - b0 * b0 - (b3 - gamma / two) * (b3 - gamma / two);

    let (mut lo, mut hi) = b0_range;
    if !(hi > lo) {
        return Err(Error::Domain("empty b0 range".into()));
    }
    let mut g_lo = g_of(gamma_of(lo)?, lo);
    let g_hi = g_of(gamma_of(hi)?, hi);
    if g_lo * g_hi > F::zero() {
        return Err(Error::NoBracket(format!(
            "g({lo}) = {g_lo} and g({hi}) = {g_hi} have the same sign"
        )));
    }
    let tol = F::lit(1e-6) * omega * omega;
    let mut best = (lo, gamma_of(lo)?, g_lo.abs());
    for iter in 1..=settings.max_iterations {
        let mid = (lo + hi) / two;
        let gamma_mid = gamma_of(mid)?;
        let g_mid = g_of(gamma_mid, mid);
        if g_mid.abs() < best.2 {
            best = (mid, gamma_mid, g_mid.abs());
        }
        if g_mid.abs() < tol {
            return Ok(NrResonance {
                b0_star: mid,
                gamma_star: gamma_mid,
                residual: g_mid,
                iterations: iter,
            });
        }
        if g_lo * g_mid <= F::zero() {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    Ok(NrResonance {
        b0_star: best.0,
        gamma_star: best.1,
        residual: best.2,
        iterations: settings.max_iterations,
    })
}

/// NOT instant of the mean (period-averaged) nonrotating field,
/// `t = π/(2B₀)`; applies on the class `p₀ = (l+½)π`.
pub fn mean_not_time<F: Real>(b0: F) -> Result<F> {
    if !(b0 > F::zero()) {
        return Err(Error::Domain("b0 must be positive".into()));
    }
    Ok(F::PI() / (F::lit(2.0) * b0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_overlap_r;
    use crate::linalg::Vec3;
    use crate::testutil::{assert_close, seeded_rng, RandExt};
    use rand::Rng;

    #[test]
    fn case1_prediction_and_schedule() {
        let omega = 1.0;
        let params =
            RotatingFieldParams::new(3.0_f64.sqrt() / 2.0 * omega, 0.0, omega, 0.0).unwrap();
        // ω² = B₀² + Ω² with B₃ = 0 ⇒ B₀ = √3/2·ω
        let regimes = predict_regimes(&params, &IntBounds::default());
        assert_eq!(regimes.len(), 1);
        let r = &regimes[0];
        assert_eq!(r.case_id, 1);
        assert_eq!(r.class, InitialClass::Equator);
        assert_close(r.t_not(&params, 0, 0), core::f64::consts::PI, 1e-12);

        // oracle: equatorial initial conditions reach the antipode
        let mut rng = seeded_rng(0xca5e1);
        for _ in 0..50 {
            let p0 = rng.range(0.0, core::f64::consts::TAU);
            let ic = CanonicalState::lab(0.0, p0).unwrap();
            for n in 0..3 {
                let ov = exact_overlap_r(&params, &ic, r.t_not(&params, n, 0));
                assert!(ov <= -1.0 + 1e-8, "overlap {ov}");
            }
        }
    }

    #[test]
    fn case2_prediction_classes_and_sharpness() {
        let omega = 2.0;
        let params = RotatingFieldParams::new(omega / 2.0, omega / 2.0, omega, 0.0).unwrap();
        let regimes = predict_regimes(&params, &IntBounds::default());
        // m = 0 matches case 2 (poles + real lines); ω² = B₀² + 0 fails
        // (B₀ = ω/2 ≠ ω), so case 1 is absent
        let cases: Vec<u8> = regimes.iter().map(|r| r.case_id).collect();
        assert_eq!(cases, vec![2, 2]);
        assert_eq!(regimes[0].m, Some(0));
        assert!(regimes.iter().any(|r| r.class == InitialClass::Poles));
        assert!(regimes.iter().any(|r| r.class == InitialClass::RealLines));

        let t_not = regimes[0].t_not(&params, 0, 0);
        assert_close(t_not, core::f64::consts::PI / omega, 1e-12);

        // class members reach -1 ...
        let mut rng = seeded_rng(0xca5e2);
        for _ in 0..50 {
            let q0 = rng.range(-0.99, 0.99);
            let l = rng.gen_range(0..2u32);
            let ic = CanonicalState::lab(q0, f64::from(l) * core::f64::consts::PI).unwrap();
            let ov = exact_overlap_r(&params, &ic, t_not);
            assert!(ov <= -1.0 + 1e-8, "overlap {ov}");
        }
        for q0 in [-1.0, 1.0] {
            let ic = CanonicalState::lab(q0, 0.3).unwrap();
            let ov = exact_overlap_r(&params, &ic, t_not);
            assert!(ov <= -1.0 + 1e-8);
        }
        // ... while states with S₂(0) ≠ 0 stay strictly away (class is sharp)
        for _ in 0..50 {
            let q0 = rng.range(-0.9, 0.9);
            let mut p0 = rng.range(0.05, core::f64::consts::PI - 0.05);
            if rng.gen_bool(0.5) {
                p0 += core::f64::consts::PI;
            }
            let ic = CanonicalState::lab(q0, p0).unwrap();
            let s2 = bloch_from_canonical(&ic).s2();
            assert!(s2.abs() > 1e-3);
            let ov = exact_overlap_r(&params, &ic, t_not);
            assert!(ov > -1.0 + 1e-6, "sharpness violated: overlap {ov}");
        }
    }

    #[test]
    fn case3_prediction_with_epsilon_schedule() {
        let omega = 1.0;
        let params = RotatingFieldParams::new(omega, omega / 2.0, omega, 0.0).unwrap();
        let regimes = predict_regimes(&params, &IntBounds::default());
        // B₀ = ω and B₃ = ω/2 satisfies the case-1 relation too; case 2 does
        // not (ω = (2m+1)ω/2 has no integer solution)
        let cases: Vec<u8> = regimes.iter().map(|r| r.case_id).collect();
        assert!(cases.contains(&1) && cases.contains(&3));
        assert!(!cases.contains(&2));
        let quarter = regimes
            .iter()
            .find(|r| r.class == InitialClass::QuarterLines)
            .unwrap();
        assert_eq!(quarter.schedule, TNotSchedule::EpsilonPiOverTwoOmega);

        // ε-parity: l even → ε = 1, l odd → ε = 3; branch p₀ = (2l+3)π/4
        let mut rng = seeded_rng(0xca5e3);
        for l in 0..4u32 {
            let p0 = quarter.class.branch_phase::<f64>(l);
            for n in 0..3u32 {
                let t = quarter.t_not(&params, n, l);
                for _ in 0..12 {
                    let q0 = rng.range(-0.99, 0.99);
                    let ic = CanonicalState::lab(q0, p0).unwrap();
                    let ov = exact_overlap_r(&params, &ic, t);
                    assert!(ov <= -1.0 + 1e-8, "l={l} n={n} overlap {ov}");
                }
            }
        }
        // poles under the odd-π/(2ω) schedule
        let poles = regimes
            .iter()
            .find(|r| r.case_id == 3 && r.class == InitialClass::Poles)
            .unwrap();
        for n in 0..3u32 {
            let t = poles.t_not(&params, n, 0);
            for q0 in [-1.0, 1.0] {
                let ic = CanonicalState::lab(q0, 0.0).unwrap();
                assert!(exact_overlap_r(&params, &ic, t) <= -1.0 + 1e-8);
            }
        }
    }

    #[test]
    fn case4_prediction() {
        let omega = 1.0;
        for m in 1..=3u32 {
            let params =
                RotatingFieldParams::new(omega / f64::from(4 * m), omega / 2.0, omega, 0.0)
                    .unwrap();
            let regimes = predict_regimes(&params, &IntBounds::default());
            let r4 = regimes.iter().find(|r| r.case_id == 4).unwrap();
            assert_eq!(r4.m, Some(m));
            assert_eq!(r4.class, InitialClass::HalfPiLines);
            let mut rng = seeded_rng(0xca5e4 + u64::from(m));
            for n in 0..2u32 {
                let t = r4.t_not(&params, n, 0);
                assert_close(
                    t,
                    f64::from(m) * f64::from(2 * n + 1) * core::f64::consts::TAU / omega,
                    1e-12,
                );
                for l in 0..2u32 {
                    let p0 = r4.class.branch_phase::<f64>(l);
                    for _ in 0..12 {
                        let ic = CanonicalState::lab(rng.range(-0.99, 0.99), p0).unwrap();
                        let ov = exact_overlap_r(&params, &ic, t);
                        assert!(ov <= -1.0 + 1e-8, "m={m} overlap {ov}");
                    }
                }
            }
        }
    }

    #[test]
    fn no_match_returns_empty() {
        let params = RotatingFieldParams::new(0.37, 0.91, 1.0, 0.0).unwrap();
        assert!(predict_regimes(&params, &IntBounds::default()).is_empty());
    }

    #[test]
    fn overlap_expressions() {
        // case 1 at the equator
        let eq = CanonicalState::lab(0.0, 1.234).unwrap();
        assert_close(overlap_expression(1, &eq, 0).unwrap(), -1.0, 1e-15);
        // the flipped convention cannot reach -1 there
        assert_close(
            overlap_expression_with(1, &eq, 0, Case1Sign::Flipped).unwrap(),
            1.0,
            1e-15,
        );

        // case 2 on p₀ = 0
        let ic = CanonicalState::lab(0.73, 0.0).unwrap();
        assert_close(overlap_expression(2, &ic, 0).unwrap(), -1.0, 1e-15);

        // case 4 on p₀ = π/2
        let ic = CanonicalState::lab(-0.4, core::f64::consts::FRAC_PI_2).unwrap();
        assert_close(overlap_expression(4, &ic, 0).unwrap(), -1.0, 1e-15);

        // the expressions match the closed-form overlap at the schedule
        // (case 3, both parities)
        let omega = 1.0;
        let params = RotatingFieldParams::new(omega, omega / 2.0, omega, 0.0).unwrap();
        let mut rng = seeded_rng(0x0e);
        for l in 0..4u32 {
            for _ in 0..10 {
                let (q0, p0) = rng.canonical_point();
                let ic = CanonicalState::lab(q0, p0).unwrap();
                let t = TNotSchedule::EpsilonPiOverTwoOmega.time(omega, 1, l);
                let want = exact_overlap_r(&params, &ic, t);
                let got = overlap_expression(3, &ic, l).unwrap();
                assert!((want - got).abs() < 1e-10, "l={l}: {want} vs {got}");
            }
        }

        assert!(overlap_expression(5, &eq, 0).is_err());
    }

    #[test]
    fn detect_not_on_rotating_case2() {
        let omega = 2.0;
        let params = RotatingFieldParams::new(omega / 2.0, omega / 2.0, omega, 0.0).unwrap();
        let spec = FieldSpec::Rotating(params);
        let pole = CanonicalState::lab(-1.0, 0.0).unwrap();
        let det = detect_not(
            &spec,
            &pole,
            4.0,
            1e-3,
            &IntegratorConfig::with_tolerances(1e-12, 1e-14),
        )
        .unwrap();
        assert!(det.achieved);
        assert_close(det.t_star, core::f64::consts::PI / omega, 1e-6);
        assert!(det.min_overlap <= -1.0 + 1e-6);
    }

    #[test]
    fn detect_not_never_achieves_on_zero_field() {
        let spec = FieldSpec::Constant(Vec3::new(0.0, 0.0, 0.0));
        let ic = CanonicalState::lab(0.3, 0.4).unwrap();
        let det = detect_not(&spec, &ic, 5.0, 1e-3, &IntegratorConfig::default()).unwrap();
        assert!(!det.achieved);
        assert_close(det.min_overlap, 1.0, 1e-12);
    }

    #[test]
    fn mean_not_time_examples() {
        assert_close(mean_not_time(0.2).unwrap(), 7.853981633974483, 1e-12);
        let t1 = mean_not_time(0.4).unwrap();
        assert_close(t1 * 2.0, mean_not_time(0.2).unwrap(), 1e-12);
        assert!(mean_not_time(0.0).is_err());
        assert!(mean_not_time(-1.0).is_err());
    }

    #[test]
    fn resonance_search_reduces_to_case1_for_rotating_analogue() {
        // with γ ≡ ω the relation becomes ω² = B₀² + Ω², root B₀ = √(ω²-Ω²)
        let omega = 1.3_f64;
        let b3 = 0.9_f64;
        let om = b3 - omega / 2.0;
        let root = (omega * omega - om * om).sqrt();
        let g = |b0: f64| omega * omega - b0 * b0 - om * om;
        assert!(g(root).abs() < 1e-12);
        assert!(g(root - 0.1) > 0.0 && g(root + 0.1) < 0.0);
    }

    #[test]
    fn resonance_search_rejects_empty_bracket() {
        let cfg = IntegratorConfig::default();
        let r = nr_resonance_search(
            1.0,
            1.5,
            (0.01, 0.02),
            &ResonanceSearchSettings {
                n_periods: 20,
                ..Default::default()
            },
            &cfg,
        );
        assert!(matches!(r, Err(Error::NoBracket(_))));
    }

    #[test]
    fn detection_csv_shape() {
        let spec = FieldSpec::Constant(Vec3::new(-1.0, 0.0, 0.0));
        let ic = CanonicalState::lab(0.0, 0.0).unwrap();
        let det = detect_not(&spec, &ic, 1.0, 1e-3, &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        det.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,overlap\n"));
        assert!(text.lines().count() > 100);
    }
}
