//! Geometric picture of the precession: the angle between `S` and the field,
//! speed and centripetal acceleration, the frame-rotation matrix and the
//! initial-condition rule obeyed by every NOT regime.

use crate::error::{Error, Result};
use crate::fields::RotatingFieldParams;
use crate::linalg::{Mat3, Vec3};
use crate::real::Real;
use crate::state::{bloch_from_canonical, BlochVector, CanonicalState};

/// Kinematics of precession about a constant field.
#[derive(Clone, Copy, Debug)]
pub struct PrecessionData<F> {
    /// Angle between `S` and `B`, in `[0, π]`; `cos ψ = -K/B`.
    pub psi: F,
    /// `‖S×B‖ = B·sin ψ = √(B² - K²)`.
    pub speed: F,
    /// `‖(S×B)×B‖ = B²·sin ψ`, centripetal.
    pub accel: F,
    /// Precession rate `‖B‖`.
    pub angular_rate: F,
    /// `2π/‖B‖`.
    pub period: F,
    /// Energy `K = -B·S`.
    pub energy: F,
}

/// Evaluates the constant-field precession kinematics at a state.
pub fn precession_data<F: Real>(b_vec: &Vec3<F>, s: &BlochVector<F>) -> Result<PrecessionData<F>> {
    let b = b_vec.norm();
    if b == F::zero() {
        return Err(Error::Degenerate("zero field has no precession".into()));
    }
    let energy = -b_vec.dot(s.as_vec());
    let cos_psi = (-energy / b).max(-F::one()).min(F::one());
    let v = s.as_vec().cross(b_vec);
    let a = v.cross(b_vec);
    Ok(PrecessionData {
        psi: cos_psi.acos(),
        speed: v.norm(),
        accel: a.norm(),
        angular_rate: b,
        period: F::TAU() / b,
        energy,
    })
}

/// Rotation relating rotating-frame and lab-frame Bloch components,
/// `S_R(t) = G(t)·S_r(t)` with `G(t)` a rotation by `-ωt` about axis 3.
#[derive(Clone, Copy, Debug)]
pub struct FrameRotation<F> {
    pub angle: F,
    pub matrix: Mat3<F>,
}

impl<F: Real> FrameRotation<F> {
    pub fn new(omega: F, t: F) -> Self {
        let angle = omega * t;
        Self {
            angle,
            matrix: Mat3::rotation_z(-angle),
        }
    }

    pub fn apply(&self, v: &Vec3<F>) -> Vec3<F> {
        self.matrix.apply(v)
    }
}

/// Overlap of a trajectory with its initial state, in both frames.
#[derive(Clone, Copy, Debug)]
pub struct FrameOverlap<F> {
    pub rotating: F,
    pub lab: F,
}

/// Transfers a rotating-frame overlap to the lab frame:
/// `S_rᵀ(t)·S_r(0) = S_Rᵀ(t)·G(t)·S_R(0)`.
pub fn frame_overlap_transfer<F: Real>(
    s_rot_t: &BlochVector<F>,
    s0: &BlochVector<F>,
    t: F,
    omega: F,
) -> FrameOverlap<F> {
    let g = FrameRotation::new(omega, t);
    FrameOverlap {
        rotating: s_rot_t.dot(s0),
        lab: s_rot_t.as_vec().dot(&g.apply(s0.as_vec())),
    }
}

/// Evaluation of the single relation all NOT regimes satisfy,
/// `cos ψ = S₁(0)·sin Θ` with `Θ` the field's polar angle in the `xz`
/// plane (`(Bₓ, B_z) = B(sin Θ, cos Θ)`).
#[derive(Clone, Copy, Debug)]
pub struct NotRuleReport<F> {
    pub cos_psi: F,
    pub rhs: F,
    pub theta: F,
    pub satisfied: bool,
}

const NOT_RULE_TOL: f64 = 1e-10;

/// Checks the rule on its two branches of validity: `S₃(0) = 0` (equator)
/// or `B_z = 0` (axis resonance). The field must lie in the `xz` plane.
pub fn not_rule<F: Real>(initial: &CanonicalState<F>, b_vec: &Vec3<F>) -> Result<NotRuleReport<F>> {
    let b = b_vec.norm();
    if b == F::zero() {
        return Err(Error::Degenerate("zero field".into()));
    }
    if b_vec.y.abs() > F::lit(NOT_RULE_TOL) * b {
        return Err(Error::NotApplicable(
            "rule requires the field in the xz plane".into(),
        ));
    }
    let s0 = bloch_from_canonical(initial);
    let on_equator = s0.s3().abs() <= F::lit(NOT_RULE_TOL);
    let axis_resonant = b_vec.z.abs() <= F::lit(NOT_RULE_TOL) * b;
    if !on_equator && !axis_resonant {
        return Err(Error::NotApplicable(
            "rule covers S₃(0) = 0 or B_z = 0 only".into(),
        ));
    }
    let theta = b_vec.x.atan2(b_vec.z);
    let cos_psi = b_vec.dot(s0.as_vec()) / b;
    let rhs = s0.s1() * theta.sin();
    Ok(NotRuleReport {
        cos_psi,
        rhs,
        theta,
        satisfied: (cos_psi - rhs).abs() <= F::lit(NOT_RULE_TOL),
    })
}

/// Report of the pole-passage check on a separatrix-level trajectory.
#[derive(Clone, Copy, Debug)]
pub struct SeparatrixPrecessionReport<F> {
    /// Largest `|S₃|` along one precession period.
    pub max_abs_s3: F,
    pub pole_reached: bool,
    /// Geometric precession period `2π/B`, always finite.
    pub period: F,
    /// Alternative value `π/(2B₀²)` carried for comparison; it is not
    /// dimensionally a time and nothing asserts it.
    pub tau_alt: F,
}

/// On the chart the level `K = ±B_z` looks like a separatrix; on the sphere
/// it is an ordinary precession cone through a pole. This check starts from
/// the cone point diametrically opposite the pole and verifies the pole is
/// reached within one finite period `2π/B`.
pub fn separatrix_precession_check<F: Real>(
    params: &RotatingFieldParams<F>,
) -> Result<[SeparatrixPrecessionReport<F>; 2]> {
    let b_vec = params.rotating_frame_field();
    let b = b_vec.norm();
    if b == F::zero() {
        return Err(Error::Degenerate("zero rotating-frame field".into()));
    }
    let axis = b_vec / b;
    let period = F::TAU() / b;
    let tau_alt = if params.b0 == F::zero() {
        F::infinity()
    } else {
        F::PI() / (F::lit(2.0) * params.b0 * params.b0)
    };
    let mut out = Vec::with_capacity(2);
    for pole_sign in [F::one(), -F::one()] {
        // the level K = -B·S through the pole (0, 0, pole_sign)
        let pole = Vec3::new(F::zero(), F::zero(), pole_sign);
        // start diametrically opposite on the precession circle: reflect
        // the pole through the field axis
        let start = axis * (F::lit(2.0) * axis.dot(&pole)) - pole;
        let n = 4096usize;
        let mut max_abs_s3 = F::zero();
        for i in 0..=n {
            let angle = -b * period * F::of_usize(i) / F::of_usize(n);
            let s = Mat3::rotation_axis(&axis, angle).apply(&start);
            max_abs_s3 = max_abs_s3.max(s.z.abs());
        }
        out.push(SeparatrixPrecessionReport {
            max_abs_s3,
            pole_reached: max_abs_s3 > F::one() - F::lit(1e-8),
            period,
            tau_alt,
        });
    }
    Ok([out[0], out[1]])
}
