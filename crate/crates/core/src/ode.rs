//! Adaptive Dormand–Prince 5(4) integration with continuous (dense) output.
//!
//! The solver stores the interpolation coefficients of every accepted step,
//! so solutions can be evaluated at arbitrary times afterwards — stroboscopic
//! sampling hits `t_k = k·2π/ω` exactly instead of snapping to step
//! endpoints, and minimum searches can evaluate anywhere in the span.

use crate::error::{Error, Result};
use crate::real::Real;

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// b5 - b4, for the embedded error estimate
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Tolerances and limits for one integration run.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<F> {
    pub rel_tol: F,
    pub abs_tol: F,
    pub max_step: Option<F>,
    pub max_steps: usize,
}

impl<F: Real> Default for OdeOptions<F> {
    fn default() -> Self {
        Self {
            rel_tol: F::lit(1e-10),
            abs_tol: F::lit(1e-12),
            max_step: None,
            max_steps: 100_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

struct Segment<F, const N: usize> {
    t0: F,
    h: F,
    rcont: [[F; N]; 5],
}

/// Piecewise-polynomial representation of a solution over `[t0, t_end]`.
pub struct DenseOutput<F, const N: usize> {
    t_start: F,
    t_end: F,
    y_end: [F; N],
    segments: Vec<Segment<F, N>>,
    pub stats: OdeStats,
}

impl<F: Real, const N: usize> DenseOutput<F, N> {
    pub fn t_start(&self) -> F {
        self.t_start
    }

    pub fn t_end(&self) -> F {
        self.t_end
    }

    pub fn y_end(&self) -> [F; N] {
        self.y_end
    }

    /// Evaluates the interpolant at `t ∈ [t_start, t_end]` (clamped just
    /// outside by rounding slack).
    pub fn eval(&self, t: F) -> [F; N] {
        if self.segments.is_empty() {
            return self.y_end;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let t = t.max(self.t_start);
        // binary search for the segment containing t
        let mut lo = 0usize;
        let mut hi = self.segments.len() - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.segments[mid].t0 <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let seg = &self.segments[lo];
        let theta = ((t - seg.t0) / seg.h).max(F::zero()).min(F::one());
        let om = F::one() - theta;
        let r = &seg.rcont;
        let mut out = [F::zero(); N];
        for i in 0..N {
            out[i] =
                r[0][i] + theta * (r[1][i] + om * (r[2][i] + theta * (r[3][i] + om * r[4][i])));
        }
        out
    }
}

fn axpy<F: Real, const N: usize>(y: &[F; N], h: F, ks: &[[F; N]], coeffs: &[f64]) -> [F; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            let cf = F::lit(c);
            for i in 0..N {
                out[i] += h * cf * k[i];
            }
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end ≥ t0`, returning the dense
/// solution. `post_accept` runs after every accepted step and may adjust the
/// state (e.g. renormalize it) or abort the run with an error.
pub fn solve_dense<F: Real, const N: usize>(
    mut f: impl FnMut(F, &[F; N]) -> [F; N],
    t0: F,
    y0: [F; N],
    t_end: F,
    opts: &OdeOptions<F>,
    mut post_accept: impl FnMut(F, &mut [F; N]) -> Result<()>,
) -> Result<DenseOutput<F, N>> {
    if !(t_end >= t0) {
        return Err(Error::Integration("t_end must be >= t0".into()));
    }
    let mut stats = OdeStats::default();
    let mut y = y0;
    post_accept(t0, &mut y)?;
    if t_end == t0 {
        return Ok(DenseOutput {
            t_start: t0,
            t_end,
            y_end: y,
            segments: Vec::new(),
            stats,
        });
    }

    let span = t_end - t0;
    let h_cap = opts.max_step.unwrap_or(span).min(span);
    let mut t = t0;
    let mut h = initial_step(&mut f, t0, &y, opts, h_cap, &mut stats);
    let mut segments: Vec<Segment<F, N>> = Vec::new();
    let mut rejected_last = false;

    let fac_min = F::lit(0.2);
    let safety = F::lit(0.9);
    let order_exp = F::lit(0.2);

    while t < t_end {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        h = h.min(t_end - t).min(h_cap);
        let tiny = F::lit(16.0) * F::epsilon() * t.abs().max(F::one());
        if h < tiny {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t}"
            )));
        }

        let mut k = [[F::zero(); N]; 7];
        k[0] = f(t, &y);
        for s in 0..6 {
            let ts = t + F::lit(C[s]) * h;
            let ys = axpy(&y, h, &k[..=s], &A[s][..=s]);
            k[s + 1] = f(ts, &ys);
        }
        stats.rhs_evals += 7;
        // k[6] is f at (t+h, y1) since the last stage equals the 5th-order result
        let y1 = axpy(&y, h, &k[..6], &A[5]);

        // scaled RMS error
        let mut err_sq = F::zero();
        for i in 0..N {
            let mut e = F::zero();
            for (s, ks) in k.iter().enumerate() {
                if E[s] != 0.0 {
                    e += F::lit(E[s]) * ks[i];
                }
            }
            e *= h;
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / F::of_usize(N)).sqrt();

        if err <= F::one() || h <= tiny * F::lit(2.0) {
            // accept
            let mut rcont = [[F::zero(); N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                let mut acc = F::zero();
                for (s, ks) in k.iter().enumerate() {
                    if D[s] != 0.0 {
                        acc += F::lit(D[s]) * ks[i];
                    }
                }
                rcont[4][i] = h * acc;
            }
            segments.push(Segment { t0: t, h, rcont });
            t += h;
            y = y1;
            post_accept(t, &mut y)?;
            stats.steps += 1;

            let fac_max = if rejected_last {
                F::one()
            } else {
                F::lit(10.0)
            };
            let scale = if err == F::zero() {
                fac_max
            } else {
                (safety * err.powf(-order_exp)).max(fac_min).min(fac_max)
            };
            h *= scale;
            rejected_last = false;
        } else {
            stats.rejected += 1;
            let scale = (safety * err.powf(-order_exp)).max(fac_min).min(F::one());
            h *= scale;
            rejected_last = true;
        }
    }

    Ok(DenseOutput {
        t_start: t0,
        t_end,
        y_end: y,
        segments,
        stats,
    })
}

/// Crude version of the classical starting-step heuristic.
fn initial_step<F: Real, const N: usize>(
    f: &mut impl FnMut(F, &[F; N]) -> [F; N],
    t0: F,
    y0: &[F; N],
    opts: &OdeOptions<F>,
    h_cap: F,
    stats: &mut OdeStats,
) -> F {
    let f0 = f(t0, y0);
    stats.rhs_evals += 1;
    let mut d0 = F::zero();
    let mut d1 = F::zero();
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    let n = F::of_usize(N);
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let h0 = if d0 < F::lit(1e-5) || d1 < F::lit(1e-5) {
        F::lit(1e-6)
    } else {
        F::lit(0.01) * d0 / d1
    };
    h0.min(h_cap).max(F::lit(1e-12) * h_cap)
}

/// Convenience wrapper: integrate and sample the dense solution on a grid.
pub fn solve_at<F: Real, const N: usize>(
    f: impl FnMut(F, &[F; N]) -> [F; N],
    t0: F,
    y0: [F; N],
    t_grid: &[F],
    opts: &OdeOptions<F>,
    post_accept: impl FnMut(F, &mut [F; N]) -> Result<()>,
) -> Result<Vec<[F; N]>> {
    let t_end = *t_grid.last().unwrap_or(&t0);
    let dense = solve_dense(f, t0, y0, t_end, opts, post_accept)?;
    Ok(t_grid.iter().map(|&t| dense.eval(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::assert_close;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let opts = OdeOptions::default();
        let dense = solve_dense(
            |_t, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            5.0,
            &opts,
            |_, _| Ok(()),
        )
        .unwrap();
        for i in 0..=50 {
            let t = i as f64 * 0.1;
            assert_close(dense.eval(t)[0], (-t).exp(), 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let opts = OdeOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let t_end = 100.0 * core::f64::consts::TAU;
        let dense = solve_dense(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            t_end,
            &opts,
            |_, _| Ok(()),
        )
        .unwrap();
        // dense output accuracy at an awkward interior point
        let t = 77.7;
        assert_close(dense.eval(t)[0], t.cos(), 5e-10);
        assert_close(dense.y_end()[0], 1.0, 5e-10);
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let dense = solve_dense(
            |_t, y: &[f64; 1]| [y[0]],
            1.0,
            [3.0],
            1.0,
            &OdeOptions::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert_eq!(dense.eval(1.0), [3.0]);
    }

    #[test]
    fn post_accept_can_abort() {
        let r = solve_dense(
            |_t, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            10.0,
            &OdeOptions::default(),
            |_t, y| {
                if y[0] > 10.0 {
                    Err(Error::Integration("grew too large".into()))
                } else {
                    Ok(())
                }
            },
        );
        assert!(r.is_err());
    }
}
