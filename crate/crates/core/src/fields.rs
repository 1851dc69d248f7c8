//! Driving-field definitions and instantaneous Hamiltonian evaluation.
//!
//! Two drives are treated throughout: the rotating field
//! `B_R(t) = -2(B₀cos(ωt+φ), B₀sin(ωt+φ), B₃)` and the nonrotating field
//! `B_NR(t) = -2(B₀, 0, B₃cos ωt)`, plus a constant field and the period
//! average of the nonrotating one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::real::Real;
use crate::state::{bloch_from_canonical, CanonicalState};

/// Parameters of the rotating drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatingFieldParams<F> {
    pub b0: F,
    pub b3: F,
    pub omega: F,
    pub phi: F,
}

impl<F: Real> RotatingFieldParams<F> {
    pub fn new(b0: F, b3: F, omega: F, phi: F) -> Result<Self> {
        if !(omega > F::zero()) {
            return Err(Error::Domain("omega must be positive".into()));
        }
        if b0 < F::zero() {
            return Err(Error::Domain("b0 must be nonnegative".into()));
        }
        Ok(Self { b0, b3, omega, phi })
    }

    /// Detuning `Ω = B₃ - ω/2`.
    pub fn detuning(&self) -> F {
        self.b3 - self.omega / F::lit(2.0)
    }

    /// Rotating-frame field amplitude `B = 2√(B₀² + Ω²)`.
    pub fn frame_amplitude(&self) -> F {
        let om = self.detuning();
        F::lit(2.0) * (self.b0 * self.b0 + om * om).sqrt()
    }

    pub fn period(&self) -> F {
        F::TAU() / self.omega
    }

    /// The constant field seen in the co-rotating frame, `-2(B₀, 0, Ω)`.
    pub fn rotating_frame_field(&self) -> Vec3<F> {
        let m2 = F::lit(-2.0);
        Vec3::new(m2 * self.b0, F::zero(), m2 * self.detuning())
    }
}

/// Parameters of the nonrotating drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonrotatingFieldParams<F> {
    pub b0: F,
    pub b3: F,
    pub omega: F,
}

impl<F: Real> NonrotatingFieldParams<F> {
    pub fn new(b0: F, b3: F, omega: F) -> Result<Self> {
        if !(omega > F::zero()) {
            return Err(Error::Domain("omega must be positive".into()));
        }
        Ok(Self { b0, b3, omega })
    }

    pub fn period(&self) -> F {
        F::TAU() / self.omega
    }
}

/// A driving field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldSpec<F> {
    Rotating(RotatingFieldParams<F>),
    Nonrotating(NonrotatingFieldParams<F>),
    Constant(Vec3<F>),
    /// Period average of a nonrotating field: the constant `(-2B₀, 0, 0)`.
    MeanOfNr(NonrotatingFieldParams<F>),
}

impl<F: Real> FieldSpec<F> {
    pub fn rotating(b0: F, b3: F, omega: F, phi: F) -> Result<Self> {
        Ok(Self::Rotating(RotatingFieldParams::new(
            b0, b3, omega, phi,
        )?))
    }

    pub fn nonrotating(b0: F, b3: F, omega: F) -> Result<Self> {
        Ok(Self::Nonrotating(NonrotatingFieldParams::new(
            b0, b3, omega,
        )?))
    }

    /// The field vector at time `t`.
    ///
    /// For periodic variants the time argument is reduced mod `T` before any
    /// trigonometry, so the evaluation stays accurate over long runs.
    pub fn field_at(&self, t: F) -> Vec3<F> {
        let m2 = F::lit(-2.0);
        match self {
            Self::Rotating(p) => {
                let phase = p.omega * reduce_mod_period(t, p.period()) + p.phi;
                let (s, c) = phase.sin_cos();
                Vec3::new(m2 * p.b0 * c, m2 * p.b0 * s, m2 * p.b3)
            }
            Self::Nonrotating(p) => {
                let phase = p.omega * reduce_mod_period(t, p.period());
                Vec3::new(m2 * p.b0, F::zero(), m2 * p.b3 * phase.cos())
            }
            Self::Constant(v) => *v,
            Self::MeanOfNr(p) => Vec3::new(m2 * p.b0, F::zero(), F::zero()),
        }
    }

    /// Drive period `T = 2π/ω`; errors for the aperiodic variants.
    pub fn period(&self) -> Result<F> {
        match self {
            Self::Rotating(p) => Ok(p.period()),
            Self::Nonrotating(p) => Ok(p.period()),
            Self::Constant(_) | Self::MeanOfNr(_) => Err(Error::NotApplicable(
                "constant and mean fields have no drive period".into(),
            )),
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Self::Rotating(_) | Self::Nonrotating(_))
    }
}

fn reduce_mod_period<F: Real>(t: F, period: F) -> F {
    let k = (t / period).floor();
    t - k * period
}

/// Classical energy `H = -B(t)·S` evaluated at a canonical state.
///
/// In chart form `H = -[B₁cos p + B₂sin p]√(1-q²) + B₃ᶠ q`; the two
/// expressions agree identically and the vector form is used.
pub fn hamiltonian_value<F: Real>(spec: &FieldSpec<F>, state: &CanonicalState<F>, t: F) -> F {
    let b = spec.field_at(t);
    let s = bloch_from_canonical(state);
    -b.dot(s.as_vec())
}

/// Same energy from a Bloch vector directly.
pub fn hamiltonian_value_bloch<F: Real>(
    spec: &FieldSpec<F>,
    s: &crate::state::BlochVector<F>,
    t: F,
) -> F {
    -spec.field_at(t).dot(s.as_vec())
}

// ---------------------------------------------------------------------------
// JSON form
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FieldSpecJson<F> {
    variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    b0: Option<F>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b3: Option<F>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<F>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<F>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<[F; 3]>,
}

impl<F: Real> FieldSpec<F> {
    /// Serializes to the canonical JSON object
    /// `{"variant": ..., "b0": ..., "b3": ..., "omega": ..., "phi": ..., "vector": [..]}`.
    pub fn to_json(&self) -> String {
        let j = match self {
            Self::Rotating(p) => FieldSpecJson {
                variant: "rotating".into(),
                b0: Some(p.b0),
                b3: Some(p.b3),
                omega: Some(p.omega),
                phi: Some(p.phi),
                vector: None,
            },
            Self::Nonrotating(p) => FieldSpecJson {
                variant: "nonrotating".into(),
                b0: Some(p.b0),
                b3: Some(p.b3),
                omega: Some(p.omega),
                phi: None,
                vector: None,
            },
            Self::Constant(v) => FieldSpecJson {
                variant: "constant".into(),
                b0: None,
                b3: None,
                omega: None,
                phi: None,
                vector: Some(v.to_array()),
            },
            Self::MeanOfNr(p) => FieldSpecJson {
                variant: "mean_of_nr".into(),
                b0: Some(p.b0),
                b3: Some(p.b3),
                omega: Some(p.omega),
                phi: None,
                vector: None,
            },
        };
        serde_json::to_string(&j).expect("field spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: FieldSpecJson<F> =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let need = |x: Option<F>, name: &str| {
            x.ok_or_else(|| Error::Serialization(format!("missing field `{name}`")))
        };
        match j.variant.as_str() {
            "rotating" => Self::rotating(
                need(j.b0, "b0")?,
                need(j.b3, "b3")?,
                need(j.omega, "omega")?,
                j.phi.unwrap_or_else(F::zero),
            ),
            "nonrotating" => Self::nonrotating(
                need(j.b0, "b0")?,
                need(j.b3, "b3")?,
                need(j.omega, "omega")?,
            ),
            "constant" => {
                let v = j
                    .vector
                    .ok_or_else(|| Error::Serialization("missing field `vector`".into()))?;
                Ok(Self::Constant(Vec3::from_array(v)))
            }
            "mean_of_nr" => Ok(Self::MeanOfNr(NonrotatingFieldParams::new(
                need(j.b0, "b0")?,
                need(j.b3, "b3")?,
                need(j.omega, "omega")?,
            )?)),
            other => Err(Error::Serialization(format!("unknown variant `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_kronrod;
    use crate::testutil::assert_close;

    #[test]
    fn field_at_examples() {
        let r = FieldSpec::rotating(1.0, 0.0, 1.0, 0.0).unwrap();
        let b = r.field_at(0.0);
        assert_close(b.x, -2.0, 1e-15);
        assert_close(b.y, 0.0, 1e-15);
        assert_close(b.z, 0.0, 1e-15);

        let nr = FieldSpec::nonrotating(1.0, 1.5, 3.0).unwrap();
        let t = nr.period().unwrap() / 4.0;
        let b = nr.field_at(t);
        assert_close(b.x, -2.0, 1e-15);
        assert!(b.z.abs() < 1e-14);

        let m = FieldSpec::MeanOfNr(NonrotatingFieldParams::new(0.2, 7.0, 3.0).unwrap());
        let b = m.field_at(123.0);
        assert_close(b.x, -0.4, 1e-15);
        assert_close(b.y, 0.0, 1e-15);
        assert_close(b.z, 0.0, 1e-15);
    }

    #[test]
    fn rotating_norm_is_time_independent() {
        let r = FieldSpec::rotating(1.3, 0.7, 2.0, 0.4).unwrap();
        let expect = 2.0 * (1.3_f64.powi(2) + 0.7_f64.powi(2)).sqrt();
        for i in 0..50 {
            let t = i as f64 * 0.37;
            assert_close(r.field_at(t).norm(), expect, 1e-13);
        }
    }

    #[test]
    fn periodicity_is_exact_after_argument_reduction() {
        let specs = [
            FieldSpec::rotating(1.0, 0.5, 2.0, 0.3).unwrap(),
            FieldSpec::nonrotating(1.0, 1.5, 3.0).unwrap(),
        ];
        for spec in specs {
            let period = spec.period().unwrap();
            for i in 1..2000 {
                let t = i as f64 * 0.911;
                let a = spec.field_at(t);
                let b = spec.field_at(t + period);
                // reduction happens in floating point; the residual scale
                // is eps·ω·t, far below any physical tolerance here
                assert!((a.x - b.x).abs() < 5e-12);
                assert!((a.y - b.y).abs() < 5e-12);
                assert!((a.z - b.z).abs() < 5e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let r = FieldSpec::rotating(1.0, 0.0, 1.0, 0.0).unwrap();
        let state = CanonicalState::lab(0.0, 0.0).unwrap();
        assert_close(hamiltonian_value(&r, &state, 0.0), 2.0, 1e-15);

        // at the poles only the axial term contributes
        let nr = FieldSpec::nonrotating(0.8, 1.1, 2.0).unwrap();
        let pole = CanonicalState::lab(1.0, 0.4).unwrap();
        let h = hamiltonian_value(&nr, &pole, 0.3);
        let bz = nr.field_at(0.3).z;
        assert_close(h, -bz * (-1.0), 1e-14);
    }

    #[test]
    fn chart_form_agrees_with_vector_form() {
        // -[B₁cos p + B₂sin p]√(1-q²) + B₃ᶠq, the chart expression that
        // Hamilton's equations (7) derive from, against -B·S
        use crate::testutil::{seeded_rng, RandExt};
        use rand::Rng;
        let mut rng = seeded_rng(0xf1e1d);
        for _ in 0..100 {
            let spec = match rng.gen_range(0..3) {
                0 => FieldSpec::Rotating(rng.rotating_params()),
                1 => FieldSpec::nonrotating(
                    rng.range(0.1, 2.0),
                    rng.range(-1.0, 2.0),
                    rng.range(0.5, 3.0),
                )
                .unwrap(),
                _ => FieldSpec::Constant(Vec3::new(
                    rng.range(-2.0, 2.0),
                    rng.range(-2.0, 2.0),
                    rng.range(-2.0, 2.0),
                )),
            };
            let (q, p) = rng.canonical_point();
            let t = rng.range(0.0, 20.0);
            let state = CanonicalState::lab(q, p).unwrap();
            let b = spec.field_at(t);
            let chart = -(b.x * p.cos() + b.y * p.sin()) * (1.0 - q * q).sqrt() + b.z * q;
            assert!(
                (hamiltonian_value(&spec, &state, t) - chart).abs() < 1e-13,
                "chart/vector mismatch for {spec:?}"
            );
        }
    }

    #[test]
    fn period_examples() {
        let r = FieldSpec::rotating(1.0, 0.0, 1.0, 0.0).unwrap();
        assert_close(r.period().unwrap(), core::f64::consts::TAU, 1e-15);
        let nr = FieldSpec::nonrotating(1.0, 1.5, 3.0).unwrap();
        assert_close(nr.period().unwrap(), core::f64::consts::TAU / 3.0, 1e-15);
        assert!(FieldSpec::Constant(Vec3::new(1.0, 0.0, 0.0))
            .period()
            .is_err());
    }

    #[test]
    fn mean_of_nr_matches_period_average() {
        let p = NonrotatingFieldParams::<f64>::new(0.7, 1.9, 2.5).unwrap();
        let nr = FieldSpec::Nonrotating(p);
        let period = p.period();
        for (pick, want) in [(0usize, -2.0 * 0.7), (1, 0.0), (2, 0.0)] {
            let integral = gauss_kronrod(
                &mut |t| {
                    let b = nr.field_at(t);
                    [b.x, b.y, b.z][pick]
                },
                0.0,
                period,
                1e-12,
                1e-14,
                40,
            )
            .unwrap();
            assert!((integral / period - want).abs() < 1e-10);
        }
    }

    #[test]
    fn json_round_trip() {
        let specs = [
            FieldSpec::rotating(1.0, 0.5, 2.0, 0.25).unwrap(),
            FieldSpec::nonrotating(1.0, 1.5, 3.0).unwrap(),
            FieldSpec::Constant(Vec3::new(-0.4, 0.0, 0.0)),
            FieldSpec::MeanOfNr(NonrotatingFieldParams::new(0.2, 0.2, 10.0).unwrap()),
        ];
        for s in specs {
            let j = s.to_json();
            let back = FieldSpec::<f64>::from_json(&j).unwrap();
            assert_eq!(s, back);
        }
        assert!(FieldSpec::<f64>::from_json("{\"variant\":\"sawtooth\"}").is_err());
        assert!(FieldSpec::<f64>::from_json("{\"variant\":\"rotating\",\"b0\":1.0}").is_err());
    }
}
