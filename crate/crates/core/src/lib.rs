//! Classical-gyromagnet simulation of driven two-level systems.
//!
//! A pure qubit driven by a time-dependent field is equivalent to a unit
//! vector precessing on the Bloch sphere, `dS/dt = S×B(t)`, with canonical
//! coordinates `q = -cos θ`, `p = φ` and energy `H = -B·S`. This crate
//! implements that picture end to end:
//!
//! - exact state conversions between qubits, density matrices, Bloch
//!   vectors and canonical pairs ([`state`]);
//! - rotating and nonrotating drive definitions ([`fields`]);
//! - a Schrödinger-side oracle used to validate every classical result
//!   ([`qoracle`]);
//! - closed-form rotating-drive solutions, the co-rotating frame and its
//!   fixed points ([`exact`]);
//! - adaptive trajectory integration ([`dynamics`]) and stroboscopic maps
//!   with analytic contour curves ([`strobe`]);
//! - slope fitting, potential-weighted drive averages, high-frequency and
//!   strong-coupling (Bessel) predictions, Lyapunov and rotating-wave error
//!   measurements ([`analysis`]);
//! - prediction and numerical detection of unitary NOT operations
//!   ([`notgate`]) and the supporting precession geometry ([`geometry`]).
//!
//! Everything numerical is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the aliases at the crate root fix `f64`, which all
//! tolerances are calibrated for.

pub mod analysis;
pub mod bessel;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod linalg;
mod mat2;
pub mod notgate;
pub mod ode;
pub mod qoracle;
pub mod quad;
pub mod real;
pub mod state;
pub mod strobe;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` aliases of the main types.
pub type Vec3 = linalg::Vec3<f64>;
pub type BlochVector = state::BlochVector<f64>;
pub type CanonicalState = state::CanonicalState<f64>;
pub type QubitState = state::QubitState<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type FieldSpec = fields::FieldSpec<f64>;
pub type RotatingFieldParams = fields::RotatingFieldParams<f64>;
pub type NonrotatingFieldParams = fields::NonrotatingFieldParams<f64>;
pub type IntegratorConfig = dynamics::IntegratorConfig<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type Propagator = qoracle::Propagator<f64>;
pub type RwaParams = qoracle::RwaParams<f64>;
pub type RotatingFrameState = exact::RotatingFrameState<f64>;
pub type FixedPointSet = exact::FixedPointSet<f64>;
pub type StroboscopicMap = strobe::StroboscopicMap<f64>;
pub type ContourCurve = strobe::ContourCurve<f64>;
pub type GammaFit = analysis::GammaFit<f64>;
pub type AverageSeries = analysis::AverageSeries<f64>;
pub type ExpansionTerms = analysis::ExpansionTerms<f64>;
pub type StrongCouplingResult = analysis::StrongCouplingResult<f64>;
pub type LyapunovReport = analysis::LyapunovReport<f64>;
pub type NotRegime = notgate::NotRegime<f64>;
pub type NotDetection = notgate::NotDetection<f64>;
pub type NrResonance = notgate::NrResonance<f64>;
pub type PrecessionData = geometry::PrecessionData<f64>;
pub type FrameRotation = geometry::FrameRotation<f64>;
