//! Subcommand definitions and execution.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qg_core::analysis::{
    expansion_terms, gamma_for_nr, gamma_prediction, lyapunov_estimate, rwa_error, strong_coupling,
    weighted_average_series, weighted_average_window, GammaSweepRow,
};
use qg_core::dynamics::integrate_bloch;
use qg_core::exact::exact_overlap_r;
use qg_core::geometry::{
    frame_overlap_transfer, not_rule, precession_data, separatrix_precession_check,
};
use qg_core::io::write_float;
use qg_core::linalg::Vec3;
use qg_core::notgate::{
    detect_not, mean_not_time, nr_resonance_search, predict_regimes, InitialClass, IntBounds,
    ResonanceSearchSettings, TNotSchedule,
};
use qg_core::qoracle::{rabi_frequency, RwaParams};
use qg_core::state::bloch_from_canonical;
use qg_core::strobe::{
    classify_commensurability, contour_nr, contour_r, separatrix_r, stroboscopic_map,
    Commensurability,
};
use qg_core::{
    CanonicalState, FieldSpec, IntegratorConfig, NonrotatingFieldParams, RotatingFieldParams,
};

const PI: f64 = std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Error handling: exit 1 for bad input, 2 for numerical failure
// ---------------------------------------------------------------------------

pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn args(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<qg_core::Error> for CliError {
    fn from(e: qg_core::Error) -> Self {
        use qg_core::Error as E;
        match e {
            E::Domain(_) | E::NotApplicable(_) | E::Serialization(_) => Self::args(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::args(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<(), CliError>;

// ---------------------------------------------------------------------------
// Argument groups
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "qg",
    version,
    about = "Driven two-level systems as classical gyromagnets: trajectories, stroboscopic maps, averaging analysis and NOT-gate search",
    args_override_self = true
)]
pub struct Cli {
    /// JSON file whose keys mirror the long flags of the subcommand;
    /// explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate a trajectory and write t,s1,s2,s3,q,p,H rows
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Stroboscopic map of one or more initial conditions
    #[command(allow_negative_numbers = true)]
    Strobe(StrobeArgs),
    /// Analytic contour curve of the stroboscopic map
    #[command(allow_negative_numbers = true)]
    Contour(ContourArgs),
    /// Fit the strobe-energy slope gamma of a nonrotating drive
    #[command(allow_negative_numbers = true)]
    FitGamma(FitGammaArgs),
    /// Fit gamma across drive frequencies and compare with the prediction
    #[command(allow_negative_numbers = true)]
    GammaSweep(GammaSweepArgs),
    /// Separation history of nearby trajectories and the Lyapunov estimate
    #[command(allow_negative_numbers = true)]
    Lyapunov(LyapunovArgs),
    /// Per-period potential-weighted drive averages
    #[command(allow_negative_numbers = true)]
    Avg(AvgArgs),
    /// Rotating-wave approximation error on the resonant nonrotating drive
    #[command(allow_negative_numbers = true)]
    Rwa(RwaArgs),
    /// Strong-coupling average and dynamical localization
    #[command(allow_negative_numbers = true)]
    Localize(LocalizeArgs),
    /// NOT-gate prediction, detection and resonance search
    #[command(subcommand)]
    Not(NotCommand),
    /// Precession geometry checks
    #[command(subcommand)]
    Geometry(GeometryCommand),
}

#[derive(Args)]
pub struct FieldArgs {
    /// Field variant: r | nr | constant | mean
    #[arg(long)]
    field: String,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    b3: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// Phase of the rotating field
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// x component of a constant field
    #[arg(long)]
    bx: Option<f64>,
    #[arg(long)]
    by: Option<f64>,
    #[arg(long)]
    bz: Option<f64>,
}

impl FieldArgs {
    fn build(&self) -> Result<FieldSpec, CliError> {
        let need = |x: Option<f64>, name: &str| {
            x.ok_or_else(|| {
                CliError::args(format!("--{name} is required for --field {}", self.field))
            })
        };
        match self.field.as_str() {
            "r" | "rotating" => Ok(FieldSpec::rotating(
                need(self.b0, "b0")?,
                need(self.b3, "b3")?,
                need(self.omega, "omega")?,
                self.phi,
            )?),
            "nr" | "nonrotating" => Ok(FieldSpec::nonrotating(
                need(self.b0, "b0")?,
                need(self.b3, "b3")?,
                need(self.omega, "omega")?,
            )?),
            "constant" => Ok(FieldSpec::Constant(Vec3::new(
                need(self.bx, "bx")?,
                need(self.by, "by")?,
                need(self.bz, "bz")?,
            ))),
            "mean" | "mean-of-nr" | "mean_of_nr" => {
                Ok(FieldSpec::MeanOfNr(NonrotatingFieldParams::new(
                    need(self.b0, "b0")?,
                    need(self.b3, "b3")?,
                    need(self.omega, "omega")?,
                )?))
            }
            other => Err(CliError::args(format!(
                "unknown field variant `{other}` (expected r, nr, constant or mean)"
            ))),
        }
    }
}

#[derive(Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
}

impl TolArgs {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig::with_tolerances(self.rel_tol, self.abs_tol)
    }
}

fn ic(q0: f64, p0: f64) -> Result<CanonicalState, CliError> {
    Ok(CanonicalState::lab(q0, p0)?)
}

enum Sink {
    Stdout,
    File(BufWriter<File>),
}

impl Sink {
    fn open(path: &Option<PathBuf>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::Stdout),
            Some(p) => Ok(Self::File(BufWriter::new(File::create(p)?))),
        }
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self {
            Self::Stdout => std::io::stdout().write(buf),
            Self::File(f) => f.write(buf),
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self {
            Self::Stdout => std::io::stdout().flush(),
            Self::File(f) => f.flush(),
        }
    }
}

fn emit_json(value: &serde_json::Value) {
    println!("{value}");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    q0: f64,
    #[arg(long)]
    p0: f64,
    /// Duration in drive periods (periodic fields)
    #[arg(long, conflicts_with = "t_max")]
    periods: Option<f64>,
    /// Duration in time units (any field)
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    samples_per_period: usize,
    /// Total sample count override
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a machine-readable summary to stdout
    #[arg(long)]
    json: bool,
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let spec = a.field.build()?;
    let initial = ic(a.q0, a.p0)?;
    let (t_end, n_samples) = match (a.periods, a.t_max) {
        (Some(p), None) => {
            let period = spec.period()?;
            (
                p * period,
                a.samples
                    .unwrap_or((a.samples_per_period as f64 * p).ceil() as usize),
            )
        }
        (None, Some(t)) => (t, a.samples.unwrap_or(2000)),
        (None, None) => return Err(CliError::args("one of --periods or --t-max is required")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if !(t_end > 0.0) || n_samples == 0 {
        return Err(CliError::args("duration and sample count must be positive"));
    }
    let grid: Vec<f64> = (0..=n_samples)
        .map(|i| t_end * i as f64 / n_samples as f64)
        .collect();
    let s0 = bloch_from_canonical(&initial);
    let mut sink = Sink::open(&a.out)?;
    let traj = integrate_bloch(&spec, &s0, &grid, &a.tol.config())?;
    traj.write_csv(&mut sink)?;
    sink.flush()?;
    if a.json {
        emit_json(&json!({
            "samples": traj.times.len(),
            "t_end": t_end,
            "max_norm_drift": traj.meta.max_norm_drift,
            "field": serde_json::from_str::<serde_json::Value>(&spec.to_json()).unwrap(),
        }));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// strobe
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct StrobeArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Initial condition as `q,p` (repeatable)
    #[arg(long = "ic", value_name = "Q,P", allow_hyphen_values = true)]
    ics: Vec<String>,
    #[arg(long)]
    q0: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long, default_value_t = 200)]
    periods: usize,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn parse_ic(text: &str) -> Result<CanonicalState, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::args(format!(
            "--ic `{text}` is not of the form q,p"
        )));
    }
    let q: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::args(format!("bad q in --ic `{text}`")))?;
    let p: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::args(format!("bad p in --ic `{text}`")))?;
    ic(q, p)
}

fn cmd_strobe(a: StrobeArgs) -> CmdResult {
    let spec = a.field.build()?;
    let mut initials = Vec::new();
    match (a.q0, a.p0) {
        (Some(q0), Some(p0)) => initials.push(ic(q0, p0)?),
        (None, None) => {}
        _ => return Err(CliError::args("--q0 and --p0 must be given together")),
    }
    for text in &a.ics {
        initials.push(parse_ic(text)?);
    }
    if initials.is_empty() {
        return Err(CliError::args("provide --q0/--p0 or at least one --ic"));
    }
    let mut sink = Sink::open(&a.out)?;
    let map = stroboscopic_map(&spec, &initials, a.periods, &a.tol.config())?;
    map.write_csv(&mut sink)?;
    sink.flush()?;
    if a.json {
        let mut summary = json!({
            "n_initial_conditions": initials.len(),
            "n_periods": a.periods,
        });
        if let FieldSpec::Rotating(params) = &spec {
            let rep = classify_commensurability(params, 1e-9, 10_000);
            summary["commensurability"] = json!({
                "ratio": rep.ratio,
                "best_numerator": rep.best_numerator,
                "best_denominator": rep.best_denominator,
                "best_error": rep.best_error,
                "rational": matches!(rep.classification, Commensurability::Rational { .. }),
            });
        }
        emit_json(&summary);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// contour
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ContourArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Fitted slope for the nonrotating contour
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    q0: f64,
    #[arg(long)]
    p0: f64,
    #[arg(long, default_value_t = 720)]
    n_points: usize,
    /// Emit the two separatrix branches instead of the contour through the
    /// initial condition (rotating field only)
    #[arg(long)]
    separatrix: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn cmd_contour(a: ContourArgs) -> CmdResult {
    let spec = a.field.build()?;
    let initial = ic(a.q0, a.p0)?;
    let mut sink = Sink::open(&a.out)?;
    let summary = match (&spec, a.separatrix) {
        (FieldSpec::Rotating(params), true) => {
            let [upper, lower] = separatrix_r(params, a.n_points)?;
            writeln!(sink, "level,q,p")?;
            for curve in [&upper, &lower] {
                for &(q, p) in &curve.points {
                    writeln!(
                        sink,
                        "{},{},{}",
                        write_float(curve.level),
                        write_float(q),
                        write_float(p)
                    )?;
                }
            }
            json!({
                "levels": [upper.level, lower.level],
                "degenerate": upper.degenerate,
                "points": upper.points.len() + lower.points.len(),
            })
        }
        (FieldSpec::Rotating(params), false) => {
            let curve = contour_r(params, &initial, a.n_points)?;
            curve.write_csv(&mut sink)?;
            json!({ "level": curve.level, "points": curve.points.len() })
        }
        (FieldSpec::Nonrotating(params), false) => {
            let gamma = a
                .gamma
                .ok_or_else(|| CliError::args("--gamma is required for nonrotating contours"))?;
            let curve = contour_nr(params, gamma, &initial, a.n_points)?;
            curve.write_csv(&mut sink)?;
            json!({ "level": curve.level, "points": curve.points.len(), "gamma": gamma })
        }
        _ => {
            return Err(CliError::args(
                "contours are defined for rotating and nonrotating fields",
            ))
        }
    };
    sink.flush()?;
    if a.json {
        emit_json(&summary);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// fit-gamma / gamma-sweep
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct FitGammaArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 0.5)]
    q0: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    #[arg(long, default_value_t = 200)]
    periods: usize,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    json: bool,
}

fn cmd_fit_gamma(a: FitGammaArgs) -> CmdResult {
    let params = NonrotatingFieldParams::new(a.b0, a.b3, a.omega)?;
    let fit = gamma_for_nr(&params, &ic(a.q0, a.p0)?, a.periods, &a.tol.config())?;
    if a.json {
        emit_json(&json!({
            "gamma": fit.gamma,
            "intercept": fit.intercept,
            "max_residual": fit.max_residual,
            "n_points": fit.n_points,
        }));
    } else {
        println!(
            "gamma = {:.6}  intercept = {:.6}  max residual = {:.3e}  ({} strobe points)",
            fit.gamma, fit.intercept, fit.max_residual, fit.n_points
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct GammaSweepArgs {
    /// Comma-separated drive frequencies
    #[arg(long, value_delimiter = ',')]
    omegas: Vec<f64>,
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long, default_value_t = 0.5)]
    q0: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    #[arg(long, default_value_t = 200)]
    periods: usize,
    /// Worker threads (defaults to QG_JOBS, then 1); assembly is ordered
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn cmd_gamma_sweep(a: GammaSweepArgs) -> CmdResult {
    if a.omegas.is_empty() {
        return Err(CliError::args("--omegas must list at least one frequency"));
    }
    let jobs = a
        .jobs
        .or_else(|| std::env::var("QG_JOBS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1);
    let initial = ic(a.q0, a.p0)?;
    let cfg = a.tol.config();
    let work = |&omega: &f64| -> Result<GammaSweepRow<f64>, qg_core::Error> {
        let params = NonrotatingFieldParams::new(a.b0, a.b3, omega)?;
        let fit = gamma_for_nr(&params, &initial, a.periods, &cfg)?;
        let pred = gamma_prediction(&params);
        Ok(GammaSweepRow {
            omega,
            gamma_fit: fit.gamma,
            gamma_pred: pred,
            rel_err: (fit.gamma - pred).abs() / fit.gamma,
        })
    };
    let mut sink = Sink::open(&a.out)?;
    let rows: Vec<GammaSweepRow<f64>> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::args(e.to_string()))?;
        pool.install(|| a.omegas.par_iter().map(work).collect::<Result<Vec<_>, _>>())?
    } else {
        a.omegas.iter().map(work).collect::<Result<Vec<_>, _>>()?
    };
    qg_core::analysis::write_sweep_csv(&rows, &mut sink)?;
    sink.flush()?;
    if a.json {
        let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
        emit_json(&json!({ "rows": rows.len(), "max_rel_err": worst }));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lyapunov
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    q0: f64,
    #[arg(long)]
    p0: f64,
    #[arg(long, default_value_t = 1e-8)]
    delta0: f64,
    #[arg(long, default_value_t = 1000)]
    periods: usize,
    #[command(flatten)]
    tol: TolArgs,
    /// Write the k,t,d series to this path
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn cmd_lyapunov(a: LyapunovArgs) -> CmdResult {
    let spec = a.field.build()?;
    let s0 = bloch_from_canonical(&ic(a.q0, a.p0)?);
    let mut sink = a
        .out
        .as_ref()
        .map(|p| Sink::open(&Some(p.clone())))
        .transpose()?;
    let rep = lyapunov_estimate(&spec, &s0, a.delta0, a.periods, &a.tol.config())?;
    if let Some(sink) = sink.as_mut() {
        writeln!(sink, "k,t,d")?;
        for (k, &(t, d)) in rep.d_series.iter().enumerate() {
            writeln!(sink, "{},{},{}", k, write_float(t), write_float(d))?;
        }
        sink.flush()?;
    }
    let ratios: Vec<f64> = rep.d_series.iter().map(|&(_, d)| d / rep.d0).collect();
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if a.json {
        emit_json(&json!({
            "lambda": rep.lambda,
            "d0": rep.d0,
            "min_ratio": min_ratio,
            "max_ratio": max_ratio,
            "n_periods": a.periods,
        }));
    } else {
        println!(
            "lambda = {:.3e}  D/D0 in [{:.9}, {:.9}] over {} periods",
            rep.lambda, min_ratio, max_ratio, a.periods
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// avg
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct AvgArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 0.5)]
    q0: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    #[arg(long, default_value_t = 50)]
    periods: usize,
    /// Also compute the aggregate over [0, t-window] (defaults to 1/B0)
    #[arg(long)]
    window: Option<f64>,
    /// Include the A_n/B_n expansion coefficients up to this order in the
    /// JSON summary
    #[arg(long)]
    expansion: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn cmd_avg(a: AvgArgs) -> CmdResult {
    let params = NonrotatingFieldParams::new(a.b0, a.b3, a.omega)?;
    let initial = ic(a.q0, a.p0)?;
    let cfg = a.tol.config();
    let mut sink = Sink::open(&a.out)?;
    let series = weighted_average_series(&params, &initial, a.periods, &cfg)?;
    series.write_csv(&mut sink)?;
    sink.flush()?;
    let window = a
        .window
        .unwrap_or(if a.b0 > 0.0 { 1.0 / a.b0 } else { 0.0 });
    let aggregate_window = if window > 0.0 {
        let (value, flagged) = weighted_average_window(&params, &initial, window, &cfg)?;
        Some((window, value, flagged))
    } else {
        None
    };
    if a.json {
        let mut summary = json!({
            "aggregate": series.aggregate,
            "aggregate_flagged": series.aggregate_flagged,
            "flagged_count": series.flagged_count,
            "periods": a.periods,
            "high_freq_prediction": qg_core::analysis::high_freq_average(&params),
        });
        if let Some((w, v, fl)) = aggregate_window {
            summary["window"] = json!({ "t_max": w, "value": v, "flagged": fl });
        }
        if let Some(n_max) = a.expansion {
            let terms = expansion_terms(a.omega, n_max)?;
            summary["expansion"] = json!({ "a": terms.a, "b": terms.b });
        }
        emit_json(&summary);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// rwa
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct RwaArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    omega: f64,
    /// Initial state (defaults to the |+⟩ pole)
    #[arg(long, default_value_t = -1.0)]
    q0: f64,
    #[arg(long, default_value_t = 0.0)]
    p0: f64,
    #[arg(long)]
    json: bool,
}

fn cmd_rwa(a: RwaArgs) -> CmdResult {
    let params = RwaParams::new(a.b0, a.b3, a.omega)?;
    let psi0 = qg_core::state::qubit_from_canonical(&ic(a.q0, a.p0)?);
    let err = rwa_error(&params, &psi0)?;
    let summary = json!({
        "max_error": err,
        "coupling_ratio": params.coupling_ratio(),
        "rabi_frequency": rabi_frequency(&params),
        "window_t_max": if a.b3 != 0.0 { a.omega / a.b3.abs() } else { 10.0 * std::f64::consts::TAU / a.omega },
    });
    if a.json {
        emit_json(&summary);
    } else {
        println!(
            "max ||psi - psi_RWA|| = {err:.6} over the averaging window (B3/omega = {})",
            params.coupling_ratio()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// localize
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    omega: f64,
    /// Verify by strobing from this initial condition up to t = 1/B0
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 0.5)]
    q0: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    json: bool,
}

fn cmd_localize(a: LocalizeArgs) -> CmdResult {
    let params = NonrotatingFieldParams::new(a.b0, a.b3, a.omega)?;
    let sc = strong_coupling(&params);
    let mut summary = json!({
        "omega0": sc.omega0,
        "bessel_argument": sc.bessel_argument,
        "bessel_j0": qg_core::bessel::bessel_j0(sc.bessel_argument),
        "localized": sc.localized,
        "validity_b0_times_period": a.b0 * params.period(),
    });
    if a.verify {
        if !(a.b0 > 0.0) {
            return Err(CliError::args("--verify requires b0 > 0"));
        }
        let n = ((1.0 / a.b0) / params.period()).floor() as usize;
        let initial = ic(a.q0, a.p0)?;
        let map = stroboscopic_map(
            &FieldSpec::Nonrotating(params),
            &[initial],
            n.max(1),
            &a.tol.config(),
        )?;
        let worst = map.orbits[0]
            .samples
            .iter()
            .map(|s| (s.q - a.q0).abs())
            .fold(0.0, f64::max);
        summary["max_strobe_q_excursion"] = json!(worst);
        summary["n_strobes"] = json!(n.max(1));
    }
    if a.json {
        emit_json(&summary);
    } else {
        println!(
            "omega0 = {:.6e} (J0 argument {:.6}), localized: {}",
            sc.omega0, sc.bessel_argument, sc.localized
        );
        if let Some(w) = summary.get("max_strobe_q_excursion") {
            println!("max strobe |q_k - q0| = {w}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// not
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum NotCommand {
    /// Match the rotating-drive resonance cases and report schedules
    #[command(allow_negative_numbers = true)]
    Predict(NotPredictArgs),
    /// Track S(t)·S(0) and report overlap minima
    #[command(allow_negative_numbers = true)]
    Detect(NotDetectArgs),
    /// Bisect the nonrotating resonance condition on gamma
    #[command(allow_negative_numbers = true)]
    Resonance(NotResonanceArgs),
    /// NOT instant of the period-averaged nonrotating field
    #[command(allow_negative_numbers = true)]
    MeanTime(MeanTimeArgs),
}

#[derive(Args)]
pub struct NotPredictArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, default_value_t = 16)]
    max_m: u32,
    #[arg(long)]
    json: bool,
}

fn class_name(class: InitialClass) -> &'static str {
    match class {
        InitialClass::Equator => "equator",
        InitialClass::Poles => "poles",
        InitialClass::RealLines => "p0 = l*pi",
        InitialClass::QuarterLines => "p0 = (2l+3)*pi/4",
        InitialClass::HalfPiLines => "p0 = (l+1/2)*pi",
    }
}

/// `t_not(n, l) = slope·n + offset(l parity)`.
fn schedule_coefficients(schedule: &TNotSchedule, omega: f64) -> serde_json::Value {
    let (slope, off_even, off_odd) = match schedule {
        TNotSchedule::OddPiOverOmega => (2.0 * PI / omega, PI / omega, PI / omega),
        TNotSchedule::OddPiOverTwoOmega => (PI / omega, PI / (2.0 * omega), PI / (2.0 * omega)),
        TNotSchedule::EpsilonPiOverTwoOmega => (
            2.0 * PI / omega,
            PI / (2.0 * omega),
            3.0 * PI / (2.0 * omega),
        ),
        TNotSchedule::PeriodMultiples { m } => {
            let m = f64::from(*m);
            (
                4.0 * PI * m / omega,
                2.0 * PI * m / omega,
                2.0 * PI * m / omega,
            )
        }
    };
    json!({ "slope": slope, "offset_even_l": off_even, "offset_odd_l": off_odd })
}

fn cmd_not_predict(a: NotPredictArgs) -> CmdResult {
    let params = RotatingFieldParams::new(a.b0, a.b3, a.omega, a.phi)?;
    let regimes = predict_regimes(&params, &IntBounds { max_m: a.max_m });
    let mut entries = Vec::new();
    for regime in &regimes {
        // verify the closed-form overlap on a few in-class states
        let mut verified = true;
        for l in 0..2u32 {
            let t_not = regime.t_not(&params, 0, l);
            let states: Vec<CanonicalState> = match regime.class {
                InitialClass::Equator => vec![
                    CanonicalState::lab(0.0, 0.4).unwrap(),
                    CanonicalState::lab(0.0, 2.9).unwrap(),
                ],
                InitialClass::Poles => vec![
                    CanonicalState::lab(1.0, 0.0).unwrap(),
                    CanonicalState::lab(-1.0, 0.0).unwrap(),
                ],
                class => {
                    let p0 = class.branch_phase::<f64>(l);
                    vec![
                        CanonicalState::lab(0.35, p0).unwrap(),
                        CanonicalState::lab(-0.8, p0).unwrap(),
                    ]
                }
            };
            for st in states {
                if exact_overlap_r(&params, &st, t_not) > -1.0 + 1e-8 {
                    verified = false;
                }
            }
        }
        entries.push(json!({
            "case": regime.case_id,
            "m": regime.m,
            "class": class_name(regime.class),
            "constraints": { "relative_residual": regime.constraint_residual },
            "t_not_formula": schedule_coefficients(&regime.schedule, a.omega),
            "t_not_first": regime.t_not(&params, 0, 0),
            "verified": verified,
        }));
    }
    let summary = json!({ "matched": entries.len(), "regimes": entries });
    if a.json {
        emit_json(&summary);
    } else if regimes.is_empty() {
        println!("no NOT regime matches these parameters");
    } else {
        for e in summary["regimes"].as_array().unwrap() {
            println!(
                "case {} class {}: first t_not = {}, verified = {}",
                e["case"], e["class"], e["t_not_first"], e["verified"]
            );
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct NotDetectArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    q0: f64,
    #[arg(long)]
    p0: f64,
    #[arg(long)]
    t_max: f64,
    /// Detection tolerance: achieved when min overlap <= -1 + tol
    #[arg(long, default_value_t = 1e-3)]
    tol_not: f64,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn cmd_not_detect(a: NotDetectArgs) -> CmdResult {
    let spec = a.field.build()?;
    let initial = ic(a.q0, a.p0)?;
    let mut sink = a
        .out
        .as_ref()
        .map(|p| Sink::open(&Some(p.clone())))
        .transpose()?;
    let det = detect_not(&spec, &initial, a.t_max, a.tol_not, &a.tol.config())?;
    if let Some(sink) = sink.as_mut() {
        det.write_csv(sink)?;
        sink.flush()?;
    }
    let summary = json!({
        "t_star": det.t_star,
        "min_overlap": det.min_overlap,
        "achieved": det.achieved,
        "minima": det.minima.iter().map(|&(t, v)| json!({ "t": t, "overlap": v })).collect::<Vec<_>>(),
    });
    if a.json {
        emit_json(&summary);
    } else {
        println!(
            "min overlap {:.6} at t = {:.6} (achieved: {})",
            det.min_overlap, det.t_star, det.achieved
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct NotResonanceArgs {
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    b0_min: f64,
    #[arg(long)]
    b0_max: f64,
    #[arg(long, default_value_t = 200)]
    periods: usize,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    json: bool,
}

fn cmd_not_resonance(a: NotResonanceArgs) -> CmdResult {
    let settings = ResonanceSearchSettings {
        n_periods: a.periods,
        ..Default::default()
    };
    let res = nr_resonance_search(
        a.omega,
        a.b3,
        (a.b0_min, a.b0_max),
        &settings,
        &a.tol.config(),
    )?;
    let summary = json!({
        "b0_star": res.b0_star,
        "gamma_star": res.gamma_star,
        "residual": res.residual,
        "iterations": res.iterations,
    });
    if a.json {
        emit_json(&summary);
    } else {
        println!(
            "b0* = {:.6}  gamma* = {:.6}  (residual {:.3e}, {} iterations)",
            res.b0_star, res.gamma_star, res.residual, res.iterations
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct MeanTimeArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    json: bool,
}

fn cmd_mean_time(a: MeanTimeArgs) -> CmdResult {
    let t = mean_not_time(a.b0)?;
    if a.json {
        emit_json(&json!({ "t_not": t, "class": "p0 = (l+1/2)*pi" }));
    } else {
        println!("t_not = {t:.6} on the class p0 = (l+1/2)*pi");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum GeometryCommand {
    /// Precession kinematics of a state in a constant field
    #[command(allow_negative_numbers = true)]
    Precession(GeoStateArgs),
    /// The cos ψ = S₁(0)·sin Θ rule on its two branches
    #[command(allow_negative_numbers = true)]
    NotRule(GeoStateArgs),
    /// Pole passage on the chart-separatrix levels
    #[command(allow_negative_numbers = true)]
    SeparatrixCheck(GeoSeparatrixArgs),
    /// Overlap transfer between rotating and lab frames
    #[command(allow_negative_numbers = true)]
    FrameOverlap(GeoFrameArgs),
}

#[derive(Args)]
pub struct GeoStateArgs {
    #[arg(long)]
    bx: f64,
    #[arg(long)]
    by: f64,
    #[arg(long)]
    bz: f64,
    #[arg(long)]
    q0: f64,
    #[arg(long)]
    p0: f64,
    #[arg(long)]
    json: bool,
}

fn cmd_geometry_precession(a: GeoStateArgs) -> CmdResult {
    let s = bloch_from_canonical(&ic(a.q0, a.p0)?);
    let d = precession_data(&Vec3::new(a.bx, a.by, a.bz), &s)?;
    let summary = json!({
        "psi": d.psi,
        "speed": d.speed,
        "accel": d.accel,
        "angular_rate": d.angular_rate,
        "period": d.period,
        "energy": d.energy,
    });
    if a.json {
        emit_json(&summary);
    } else {
        println!(
            "psi = {:.6} rad, speed = {:.6}, accel = {:.6}, rate = {:.6}, period = {:.6}, K = {:.6}",
            d.psi, d.speed, d.accel, d.angular_rate, d.period, d.energy
        );
    }
    Ok(())
}

fn cmd_geometry_not_rule(a: GeoStateArgs) -> CmdResult {
    let rep = not_rule(&ic(a.q0, a.p0)?, &Vec3::new(a.bx, a.by, a.bz))?;
    let summary = json!({
        "cos_psi": rep.cos_psi,
        "rhs": rep.rhs,
        "theta": rep.theta,
        "satisfied": rep.satisfied,
    });
    if a.json {
        emit_json(&summary);
    } else {
        println!(
            "cos psi = {:.9}, S1(0) sin theta = {:.9}, satisfied: {}",
            rep.cos_psi, rep.rhs, rep.satisfied
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct GeoSeparatrixArgs {
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    b3: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long)]
    json: bool,
}

fn cmd_geometry_separatrix(a: GeoSeparatrixArgs) -> CmdResult {
    let params = RotatingFieldParams::new(a.b0, a.b3, a.omega, a.phi)?;
    let reports = separatrix_precession_check(&params)?;
    let entries: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            json!({
                "pole_reached": r.pole_reached,
                "max_abs_s3": r.max_abs_s3,
                "period": r.period,
                "tau_alt": if r.tau_alt.is_finite() { json!(r.tau_alt) } else { json!(null) },
            })
        })
        .collect();
    if a.json {
        emit_json(&json!({ "levels": entries }));
    } else {
        for (i, r) in reports.iter().enumerate() {
            println!(
                "level {}: pole reached = {} (max |S3| = {:.12}), period = {:.6}",
                i, r.pole_reached, r.max_abs_s3, r.period
            );
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct GeoFrameArgs {
    /// Rotating-frame state at time t, as q,p
    #[arg(long)]
    q: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q0: f64,
    #[arg(long)]
    p0: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    json: bool,
}

fn cmd_geometry_frame_overlap(a: GeoFrameArgs) -> CmdResult {
    let s_t = bloch_from_canonical(&ic(a.q, a.p)?);
    let s_0 = bloch_from_canonical(&ic(a.q0, a.p0)?);
    let ov = frame_overlap_transfer(&s_t, &s_0, a.t, a.omega);
    let summary = json!({ "rotating": ov.rotating, "lab": ov.lab });
    if a.json {
        emit_json(&summary);
    } else {
        println!("overlap rotating = {:.9}, lab = {:.9}", ov.rotating, ov.lab);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

pub fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Strobe(a) => cmd_strobe(a),
        Command::Contour(a) => cmd_contour(a),
        Command::FitGamma(a) => cmd_fit_gamma(a),
        Command::GammaSweep(a) => cmd_gamma_sweep(a),
        Command::Lyapunov(a) => cmd_lyapunov(a),
        Command::Avg(a) => cmd_avg(a),
        Command::Rwa(a) => cmd_rwa(a),
        Command::Localize(a) => cmd_localize(a),
        Command::Not(NotCommand::Predict(a)) => cmd_not_predict(a),
        Command::Not(NotCommand::Detect(a)) => cmd_not_detect(a),
        Command::Not(NotCommand::Resonance(a)) => cmd_not_resonance(a),
        Command::Not(NotCommand::MeanTime(a)) => cmd_mean_time(a),
        Command::Geometry(GeometryCommand::Precession(a)) => cmd_geometry_precession(a),
        Command::Geometry(GeometryCommand::NotRule(a)) => cmd_geometry_not_rule(a),
        Command::Geometry(GeometryCommand::SeparatrixCheck(a)) => cmd_geometry_separatrix(a),
        Command::Geometry(GeometryCommand::FrameOverlap(a)) => cmd_geometry_frame_overlap(a),
    }
}
