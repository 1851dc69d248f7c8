//! Stroboscopic maps and their analytic contour curves.
//!
//! Sampling a drive-period-periodic system at `t_k = k·2π/ω` turns the
//! conserved rotating-frame energy into a level function on `(q, p)`: every
//! strobe orbit lies on one contour. The nonrotating drive obeys the same
//! structure with the fitted slope γ standing in for ω.

use std::io::Write;

use crate::dynamics::{integrate_bloch, IntegratorConfig};
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, NonrotatingFieldParams, RotatingFieldParams};
use crate::io::write_float;
use crate::real::Real;
use crate::state::{bloch_from_canonical, CanonicalState};

/// One stroboscopic sample.
#[derive(Clone, Copy, Debug)]
pub struct StrobeSample<F> {
    pub k: usize,
    pub t: F,
    pub q: F,
    pub p: F,
    pub h: F,
}

/// Strobe orbit of one initial condition.
#[derive(Clone, Debug)]
pub struct StrobeOrbit<F> {
    pub initial: CanonicalState<F>,
    pub samples: Vec<StrobeSample<F>>,
}

/// Stroboscopic map of one or more initial conditions under a periodic
/// drive.
#[derive(Clone, Debug)]
pub struct StroboscopicMap<F> {
    pub spec: FieldSpec<F>,
    pub n_periods: usize,
    pub orbits: Vec<StrobeOrbit<F>>,
}

impl<F: Real> StroboscopicMap<F> {
    /// Writes the `ic_index,k,t,q,p,H` CSV form.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "ic_index,k,t,q,p,H")?;
        for (idx, orbit) in self.orbits.iter().enumerate() {
            for s in &orbit.samples {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    idx,
                    s.k,
                    write_float(s.t),
                    write_float(s.q),
                    write_float(s.p),
                    write_float(s.h),
                )?;
            }
        }
        Ok(())
    }
}

/// Integrates each initial condition for `n_periods` drive periods and
/// samples at `t_k = k·T`, each strobe time formed by one multiplication so
/// the phase error stays O(1) out to large `k`.
pub fn stroboscopic_map<F: Real>(
    spec: &FieldSpec<F>,
    initials: &[CanonicalState<F>],
    n_periods: usize,
    cfg: &IntegratorConfig<F>,
) -> Result<StroboscopicMap<F>> {
    let period = spec.period()?;
    let t_grid: Vec<F> = (0..=n_periods).map(|k| F::of_usize(k) * period).collect();
    let mut orbits = Vec::with_capacity(initials.len());
    for initial in initials {
        let s0 = bloch_from_canonical(initial);
        let traj = integrate_bloch(spec, &s0, &t_grid, cfg)?;
        let samples = (0..traj.len())
            .map(|k| StrobeSample {
                k,
                t: traj.times[k],
                q: traj.canonical[k].q(),
                p: traj.canonical[k].p(),
                h: traj.energies[k],
            })
            .collect();
        orbits.push(StrobeOrbit {
            initial: *initial,
            samples,
        });
    }
    Ok(StroboscopicMap {
        spec: *spec,
        n_periods,
        orbits,
    })
}

/// What kind of level curve a [`ContourCurve`] is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourKind {
    RMap,
    NrMap,
    Separatrix,
}

/// A level curve of the stroboscopic-map energy.
#[derive(Clone, Debug)]
pub struct ContourCurve<F> {
    pub level: F,
    pub kind: ContourKind,
    /// `(q, p)` points satisfying the defining equation.
    pub points: Vec<(F, F)>,
    /// Set on the resonant separatrix, which degenerates to the vertical
    /// lines `p = π/2, 3π/2`.
    pub degenerate: bool,
}

impl<F: Real> ContourCurve<F> {
    /// Writes the `level,q,p` CSV form.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "level,q,p")?;
        for &(q, p) in &self.points {
            writeln!(
                w,
                "{},{},{}",
                write_float(self.level),
                write_float(q),
                write_float(p)
            )?;
        }
        Ok(())
    }
}

/// Level function of the rotating map at phase φ:
/// `2B₀√(1-q²)cos(p-φ) - 2Ωq`.
pub fn r_map_level<F: Real>(params: &RotatingFieldParams<F>, q: F, p: F) -> F {
    let two = F::lit(2.0);
    let root = (F::one() - q * q).max(F::zero()).sqrt();
    two * params.b0 * root * (p - params.phi).cos() - two * params.detuning() * q
}

/// Level function of the nonrotating map with fitted slope γ:
/// `2B₀√(1-q²)cos p - 2(B₃-γ/2)q`.
pub fn nr_map_level<F: Real>(params: &NonrotatingFieldParams<F>, gamma: F, q: F, p: F) -> F {
    let two = F::lit(2.0);
    let root = (F::one() - q * q).max(F::zero()).sqrt();
    two * params.b0 * root * p.cos() - two * (params.b3 - gamma / two) * q
}

/// Solves `a·u·√(1-q²) - c·q = level` for q at fixed `u = cos(p - φ)`,
/// treating the radical by squaring and filtering roots against the
/// unsquared equation.
fn solve_level_for_q<F: Real>(a: F, c: F, u: F, level: F, out: &mut Vec<F>) {
    let tol = F::lit(1e-9);
    let au = a * u;
    let tiny = F::lit(1e-14) * (a.abs() + c.abs() + level.abs() + F::one());
    if au.abs() < tiny {
        // transverse term gone: -c q = level
        if c.abs() < tiny {
            if level.abs() < tol {
                // whole vertical line solves the equation
                let n = 21usize;
                for i in 0..n {
                    let q = -F::one() + F::lit(2.0) * F::of_usize(i) / F::of_usize(n - 1);
                    out.push(q);
                }
            }
            return;
        }
        let q = -level / c;
        if q.abs() <= F::one() {
            out.push(q);
        }
        return;
    }
    // (a²u² + c²) q² + 2·level·c q + level² - a²u² = 0
    let aa = au * au + c * c;
    let bb = F::lit(2.0) * level * c;
    let cc = level * level - au * au;
    let disc = bb * bb - F::lit(4.0) * aa * cc;
    if disc < F::zero() {
        return;
    }
    let sq = disc.sqrt();
    for root in [
        (-bb + sq) / (F::lit(2.0) * aa),
        (-bb - sq) / (F::lit(2.0) * aa),
    ] {
        if root.abs() > F::one() + F::lit(1e-12) {
            continue;
        }
        let q = root.min(F::one()).max(-F::one());
        let resid = au * (F::one() - q * q).max(F::zero()).sqrt() - c * q - level;
        if resid.abs() <= tol {
            out.push(q);
        }
    }
}

fn sweep_contour<F: Real>(
    a: F,
    c: F,
    phase: F,
    level: F,
    n_points: usize,
    kind: ContourKind,
) -> Result<ContourCurve<F>> {
    let n = n_points.max(8);
    let mut points = Vec::new();
    let mut qs = Vec::new();
    for i in 0..n {
        let p = F::TAU() * F::of_usize(i) / F::of_usize(n);
        qs.clear();
        solve_level_for_q(a, c, (p - phase).cos(), level, &mut qs);
        for &q in &qs {
            points.push((q, p));
        }
    }
    if points.is_empty() {
        return Err(Error::Degenerate(format!(
            "no real points on contour at level {level}"
        )));
    }
    Ok(ContourCurve {
        level,
        kind,
        points,
        degenerate: false,
    })
}

/// Contour of the rotating map through `initial`.
pub fn contour_r<F: Real>(
    params: &RotatingFieldParams<F>,
    initial: &CanonicalState<F>,
    n_points: usize,
) -> Result<ContourCurve<F>> {
    let level = r_map_level(params, initial.q(), initial.p());
    let two = F::lit(2.0);
    sweep_contour(
        two * params.b0,
        two * params.detuning(),
        params.phi,
        level,
        n_points,
        ContourKind::RMap,
    )
}

/// Contour of the nonrotating map through `initial`, at fitted slope γ.
pub fn contour_nr<F: Real>(
    params: &NonrotatingFieldParams<F>,
    gamma: F,
    initial: &CanonicalState<F>,
    n_points: usize,
) -> Result<ContourCurve<F>> {
    let level = nr_map_level(params, gamma, initial.q(), initial.p());
    let two = F::lit(2.0);
    sweep_contour(
        two * params.b0,
        two * (params.b3 - gamma / two),
        F::zero(),
        level,
        n_points,
        ContourKind::NrMap,
    )
}

/// How a frame-amplitude/drive-frequency ratio classifies.
#[derive(Clone, Debug, PartialEq)]
pub enum Commensurability {
    /// `B/ω` is within `tol` of `numerator/denominator`.
    Rational { numerator: u64, denominator: u64 },
    /// No rational approximation with denominator ≤ cap comes within `tol`.
    IrrationalWithinTolerance,
}

/// Commensurability report for a rotating drive.
#[derive(Clone, Debug)]
pub struct CommensurabilityReport<F> {
    /// `B/ω` with `B = 2√(B₀² + Ω²)`.
    pub ratio: F,
    /// Best continued-fraction convergent with denominator ≤ the cap.
    pub best_numerator: u64,
    pub best_denominator: u64,
    pub best_error: F,
    pub classification: Commensurability,
}

/// Continued-fraction classification of `B/ω`.
pub fn classify_commensurability<F: Real>(
    params: &RotatingFieldParams<F>,
    tol: F,
    max_denominator: u64,
) -> CommensurabilityReport<F> {
    let ratio = params.frame_amplitude() / params.omega;
    let x = ratio.to_f64().unwrap_or(0.0);
    let (num, den) = best_rational_approximation(x, max_denominator);
    let err = (ratio - F::lit(num as f64) / F::lit(den as f64)).abs();
    let classification = if err < tol {
        Commensurability::Rational {
            numerator: num,
            denominator: den,
        }
    } else {
        Commensurability::IrrationalWithinTolerance
    };
    CommensurabilityReport {
        ratio,
        best_numerator: num,
        best_denominator: den,
        best_error: err,
        classification,
    }
}

/// Best rational approximation to `x ≥ 0` among continued-fraction
/// convergents with denominator ≤ `max_den`.
pub fn best_rational_approximation(x: f64, max_den: u64) -> (u64, u64) {
    assert!(x >= 0.0 && x.is_finite());
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (x.floor() as u64, 1u64);
    let mut frac = x - x.floor();
    // convergents of the continued fraction until the denominator cap
    for _ in 0..64 {
        if frac.abs() < 1e-18 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as u64;
        let p_next = match a.checked_mul(p).and_then(|v| v.checked_add(p_prev)) {
            Some(v) => v,
            None => break,
        };
        let q_next = match a.checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        if q_next > max_den {
            // a reduced final partial quotient can still improve the bound,
            // classic semiconvergent step
            let a_max = (max_den - q_prev) / q;
            if a_max > 0 {
                let p_semi = a_max * p + p_prev;
                let q_semi = a_max * q + q_prev;
                let err_best = (x - p as f64 / q as f64).abs();
                let err_semi = (x - p_semi as f64 / q_semi as f64).abs();
                if err_semi < err_best {
                    return (p_semi, q_semi);
                }
            }
            break;
        }
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
    (p, q.max(1))
}

/// The two separatrix branches of the rotating map: contours at level
/// `K = ±2Ω`, passing through `q = ∓1` respectively.
pub fn separatrix_r<F: Real>(
    params: &RotatingFieldParams<F>,
    n_points: usize,
) -> Result<[ContourCurve<F>; 2]> {
    let om = params.detuning();
    if om == F::zero() && params.b0 == F::zero() {
        return Err(Error::Degenerate("no field: Ω = 0 and B₀ = 0".into()));
    }
    let two = F::lit(2.0);
    if om == F::zero() {
        // resonant degeneracy: the separatrix collapses onto the vertical
        // lines p = π/2 and p = 3π/2
        let n = n_points.max(8);
        let make_line = |p: F| {
            let points: Vec<(F, F)> = (0..n)
                .map(|i| {
                    let q = -F::one() + two * F::of_usize(i) / F::of_usize(n - 1);
                    (q, p)
                })
                .collect();
            ContourCurve {
                level: F::zero(),
                kind: ContourKind::Separatrix,
                points,
                degenerate: true,
            }
        };
        return Ok([
            make_line(F::FRAC_PI_2()),
            make_line(F::PI() + F::FRAC_PI_2()),
        ]);
    }
    let mut upper = sweep_contour(
        two * params.b0,
        two * om,
        params.phi,
        two * om,
        n_points,
        ContourKind::Separatrix,
    )?;
    let mut lower = sweep_contour(
        two * params.b0,
        two * om,
        params.phi,
        -(two * om),
        n_points,
        ContourKind::Separatrix,
    )?;
    // the pole lines solve the equation identically; make the endpoints
    // explicit so the branches always contain them
    upper.points.push((-F::one(), F::FRAC_PI_2()));
    lower.points.push((F::one(), F::FRAC_PI_2()));
    Ok([upper, lower])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, seeded_rng, RandExt};

    fn default_cfg() -> IntegratorConfig<f64> {
        IntegratorConfig::with_tolerances(1e-12, 1e-14)
    }

    #[test]
    fn strobe_k0_is_initial_condition() {
        let params = RotatingFieldParams::new(1.0, 0.5, 2.0, 0.0).unwrap();
        let spec = FieldSpec::Rotating(params);
        let ic = CanonicalState::lab(0.3, 1.4).unwrap();
        let map = stroboscopic_map(&spec, &[ic], 5, &default_cfg()).unwrap();
        let s0 = &map.orbits[0].samples[0];
        assert_close(s0.q, 0.3, 1e-14);
        assert_close(s0.p, 1.4, 1e-14);
        let h0 = crate::fields::hamiltonian_value(&spec, &ic, 0.0);
        assert_close(s0.h, h0, 1e-12);
    }

    #[test]
    fn strobe_fixed_point_stays_put() {
        let params = RotatingFieldParams::new(1.0, 1.3, 1.2, 0.0).unwrap();
        let fps = crate::exact::fixed_points(&params).unwrap();
        let ic = CanonicalState::lab(fps.plus.q_bar, fps.plus.p_bar).unwrap();
        let spec = FieldSpec::Rotating(params);
        let map = stroboscopic_map(&spec, &[ic], 50, &default_cfg()).unwrap();
        for s in &map.orbits[0].samples {
            assert!((s.q - ic.q()).abs() < 1e-8);
            assert!(crate::real::angle_diff(s.p, ic.p()).abs() < 1e-7);
        }
    }

    #[test]
    fn strobe_points_lie_on_their_contour() {
        let mut rng = seeded_rng(0x5706e);
        for _ in 0..5 {
            let params = rng.rotating_params();
            let (q0, p0) = rng.canonical_point();
            let ic = CanonicalState::lab(q0, p0).unwrap();
            let spec = FieldSpec::Rotating(params);
            let map = stroboscopic_map(&spec, &[ic], 60, &default_cfg()).unwrap();
            let level = r_map_level(&params, q0, p0);
            for s in &map.orbits[0].samples {
                let resid = (r_map_level(&params, s.q, s.p) - level).abs();
                assert!(resid < 1e-7, "torus residual {resid}");
            }
        }
    }

    #[test]
    fn contour_passes_through_its_strobe_points() {
        let params = RotatingFieldParams::<f64>::new(1.0, 0.25, 0.5, 0.0).unwrap();
        let ic = CanonicalState::lab(0.2, 0.9).unwrap();
        let curve = contour_r(&params, &ic, 720).unwrap();
        // every generated point satisfies the defining equation
        for &(q, p) in &curve.points {
            let resid = (r_map_level(&params, q, p) - curve.level).abs();
            assert!(resid < 1e-9);
        }
    }

    #[test]
    fn contour_degenerates_to_point_at_extremum() {
        let params = RotatingFieldParams::<f64>::new(1.0, 1.3, 1.2, 0.0).unwrap();
        let fps = crate::exact::fixed_points(&params).unwrap();
        let ic = CanonicalState::lab(fps.plus.q_bar, fps.plus.p_bar).unwrap();
        let curve = contour_r(&params, &ic, 360).unwrap();
        // all surviving points cluster at the fixed point
        for &(q, p) in &curve.points {
            assert!((q - fps.plus.q_bar).abs() < 2e-4, "stray q {q}");
            assert!(
                crate::real::angle_diff(p, fps.plus.p_bar).abs() < 2e-2,
                "stray p {p}"
            );
        }
    }

    #[test]
    fn resonant_zero_level_contains_vertical_lines() {
        let params = RotatingFieldParams::new(1.0, 1.0, 2.0, 0.0).unwrap(); // Ω = 0
        let ic = CanonicalState::lab(0.5, core::f64::consts::FRAC_PI_2).unwrap();
        assert_close(r_map_level(&params, ic.q(), ic.p()), 0.0, 1e-15);
        let curve = contour_r(&params, &ic, 720).unwrap();
        // points with p = π/2 must span q
        let on_line: Vec<f64> = curve
            .points
            .iter()
            .filter(|&&(_, p)| (p - core::f64::consts::FRAC_PI_2).abs() < 1e-9)
            .map(|&(q, _)| q)
            .collect();
        assert!(on_line.len() >= 10);
        let min = on_line.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = on_line.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(min < -0.9 && max > 0.9);
    }

    #[test]
    fn nr_level_reductions() {
        let params = NonrotatingFieldParams::<f64>::new(0.8, 1.3, 2.0).unwrap();
        // γ = 2B₃ removes the axial term: level = 2B₀√(1-q₀²)cos p₀
        let gamma = 2.0 * params.b3;
        let (q0, p0) = (0.37_f64, 0.9_f64);
        let want = 2.0 * params.b0 * (1.0 - q0 * q0).sqrt() * p0.cos();
        assert_close(nr_map_level(&params, gamma, q0, p0), want, 1e-14);
        // q₀ = 0, p₀ = π/2 sits on the zero level for any γ
        assert_close(
            nr_map_level(&params, 4.9559, 0.0, core::f64::consts::FRAC_PI_2),
            0.0,
            1e-15,
        );
    }

    #[test]
    fn no_crossings_between_distinct_levels() {
        let params = RotatingFieldParams::<f64>::new(1.0, 0.7, 1.3, 0.0).unwrap();
        let a = contour_r(&params, &CanonicalState::lab(0.1, 0.3).unwrap(), 400).unwrap();
        let b = contour_r(&params, &CanonicalState::lab(0.6, 2.1).unwrap(), 400).unwrap();
        assert!((a.level - b.level).abs() > 1e-3);
        for &(qa, pa) in &a.points {
            for &(qb, pb) in &b.points {
                let same = (qa - qb).abs() < 1e-9 && crate::real::angle_diff(pa, pb).abs() < 1e-9;
                assert!(!same, "curves at distinct levels share a point");
            }
        }
    }

    #[test]
    fn commensurability_examples() {
        // B/ω = √5
        let params = RotatingFieldParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let rep = classify_commensurability(&params, 1e-9, 10_000);
        assert_close(rep.ratio, 5.0_f64.sqrt(), 1e-13);
        assert_eq!(
            rep.classification,
            Commensurability::IrrationalWithinTolerance
        );

        // B/ω = 2/89
        let params = RotatingFieldParams::new(1.0, 89.0 / 2.0, 89.0, 0.0).unwrap();
        let rep = classify_commensurability(&params, 1e-9, 10_000);
        match rep.classification {
            Commensurability::Rational {
                numerator,
                denominator,
            } => {
                assert_eq!((numerator, denominator), (2, 89));
            }
            other => panic!("expected rational, got {other:?}"),
        }

        // B₀ = 0, B₃ = ω ⇒ B/ω = 1
        let params = RotatingFieldParams::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let rep = classify_commensurability(&params, 1e-9, 10_000);
        assert_eq!(
            rep.classification,
            Commensurability::Rational {
                numerator: 1,
                denominator: 1
            }
        );
    }

    #[test]
    fn separatrix_contains_hyperbolic_points_and_satisfies_equation() {
        let params = RotatingFieldParams::new(1.0, 0.9, 1.0, 0.0).unwrap();
        let om = params.detuning();
        let [upper, lower] = separatrix_r(&params, 400).unwrap();
        assert_close(upper.level, 2.0 * om, 1e-15);
        assert_close(lower.level, -2.0 * om, 1e-15);
        for (curve, pole_q) in [(&upper, -1.0), (&lower, 1.0)] {
            // B₀√(1-q²)cos p = (∓1 + q)·Ω at level ±2Ω: check the level form
            for &(q, p) in &curve.points {
                let resid = (r_map_level(&params, q, p) - curve.level).abs();
                assert!(resid < 1e-10);
            }
            assert!(curve.points.iter().any(|&(q, p)| (q - pole_q).abs() < 1e-12
                && (p - core::f64::consts::FRAC_PI_2).abs() < 1e-12));
        }
    }

    #[test]
    fn separatrix_degenerate_at_resonance() {
        let params = RotatingFieldParams::new(1.0, 1.0, 2.0, 0.0).unwrap(); // Ω = 0
        let [a, b] = separatrix_r(&params, 100).unwrap();
        assert!(a.degenerate && b.degenerate);
        assert!(a
            .points
            .iter()
            .all(|&(_, p)| (p - core::f64::consts::FRAC_PI_2).abs() < 1e-14));
        assert!(b
            .points
            .iter()
            .all(|&(_, p)| (p - 3.0 * core::f64::consts::FRAC_PI_2).abs() < 1e-14));
        // both-zero degenerate error
        let params = RotatingFieldParams::new(0.0, 0.5, 1.0, 0.0).unwrap();
        assert!(separatrix_r(&params, 10).is_err());
    }

    #[test]
    fn map_csv_shape() {
        let spec = FieldSpec::rotating(1.0, 0.5, 2.0, 0.0).unwrap();
        let ics = [
            CanonicalState::lab(0.1, 0.3).unwrap(),
            CanonicalState::lab(0.5, 2.0).unwrap(),
        ];
        let map = stroboscopic_map(&spec, &ics, 3, &default_cfg()).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ic_index,k,t,q,p,H");
        assert_eq!(lines.len(), 1 + 2 * 4);
        assert!(lines[1].starts_with("0,0,"));
        assert!(lines[5].starts_with("1,0,"));
    }
}
