//! Time-varying desired velocity field.
//!
//! The manipulator part is a sliding surface around a joint reference `Q`
//! whose rate is the task reference velocity mapped through `J⁺(q)`. The
//! flywheel part absorbs whatever is left of the energy budget `Eᵃ`, so the
//! augmented field always carries exactly `Eᵃ` of kinetic energy.

use nalgebra::{DVector, Matrix2, Vector2};

use crate::dynamics::{jacobian, mass_matrix, pseudoinverse, RobotParams};
use crate::error::{Error, Result};
use crate::human::IntentSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    /// Position feedback gain of the sliding surface (1/s).
    pub k1: Matrix2<f64>,
    /// Kinetic energy carried by the augmented field (J).
    pub ea: f64,
    /// Central-difference step used for the field derivative.
    pub h_fd: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            k1: Matrix2::identity() * 100.0,
            ea: 3000.0,
            h_fd: 1e-5,
        }
    }
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.symmetric_eigenvalues().min() > 0.0) {
            return Err(Error::invalid("field.k1", "must be positive definite"));
        }
        if !(self.ea.is_finite() && self.ea > 0.0) {
            return Err(Error::invalid("pvfc.ea", "must be > 0"));
        }
        if !(self.h_fd.is_finite() && self.h_fd > 0.0) {
            return Err(Error::invalid("field.h_fd", "must be > 0"));
        }
        Ok(())
    }
}

/// Joint reference `Q` and its rate `Q̇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceState {
    pub q_ref: Vector2<f64>,
    pub qd_ref: Vector2<f64>,
}

/// Joint reference position plus the task-space motion that drives its rate.
///
/// Unlike [`ReferenceState`], `Q̇` is not frozen here: it is `J⁺(q)ẋ` at
/// whatever configuration the field is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskReference {
    pub q_ref: Vector2<f64>,
    pub xd: Vector2<f64>,
    pub xdd: Vector2<f64>,
}

impl TaskReference {
    /// Reference driven straight by the estimated intention, as in O-PVFC.
    pub fn from_intent(q_ref: Vector2<f64>, intent: &IntentSample) -> Self {
        Self {
            q_ref,
            xd: intent.vel,
            xdd: intent.acc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub v: Vector2<f64>,
    pub vf: f64,
    /// `(V, V_f)`.
    pub va: DVector<f64>,
    /// `½VᵀM(q)V`, the part of the budget used by the arm.
    pub manip_energy: f64,
    /// Set when `J⁺` needed damping.
    pub singular: bool,
}

/// Rate of the joint reference together with the singularity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRate {
    pub qd_ref: Vector2<f64>,
    pub singular: bool,
}

/// `Q̇ = J⁺(q)ẋ_a`.
pub fn reference_rate(q: &Vector2<f64>, xda: &Vector2<f64>, p: &RobotParams) -> ReferenceRate {
    let pinv = pseudoinverse(&jacobian(q, p));
    ReferenceRate {
        qd_ref: pinv.matrix * xda,
        singular: pinv.singular,
    }
}

/// `V = Q̇ − K1(q − Q)`.
pub fn manipulator_field(q: &Vector2<f64>, r: &ReferenceState, k1: &Matrix2<f64>) -> Vector2<f64> {
    r.qd_ref - k1 * (q - r.q_ref)
}

/// Flywheel field on the positive square-root branch.
pub fn flywheel_field(v: &Vector2<f64>, q: &Vector2<f64>, fp: &FieldParams, p: &RobotParams) -> Result<f64> {
    let manip = 0.5 * v.dot(&(mass_matrix(q, p) * v));
    flywheel_from_energy(manip, fp.ea, p.mf)
}

fn flywheel_from_energy(manip_energy: f64, ea: f64, mf: f64) -> Result<f64> {
    if !(manip_energy <= ea) {
        return Err(Error::FieldEnergyExceeded {
            field_energy: manip_energy,
            budget: ea,
        });
    }
    Ok((2.0 / mf * (ea - manip_energy)).sqrt())
}

/// Augmented field for a frozen reference.
pub fn augmented_field(q: &Vector2<f64>, r: &ReferenceState, fp: &FieldParams, p: &RobotParams) -> Result<FieldSample> {
    let v = manipulator_field(q, r, &fp.k1);
    let manip_energy = 0.5 * v.dot(&(mass_matrix(q, p) * v));
    let vf = flywheel_from_energy(manip_energy, fp.ea, p.mf)?;
    Ok(FieldSample {
        v,
        vf,
        va: DVector::from_column_slice(&[v[0], v[1], vf]),
        manip_energy,
        singular: false,
    })
}

/// Augmented field at `q` with `Q̇` recomputed from the task reference.
pub fn field_at(q: &Vector2<f64>, r: &TaskReference, fp: &FieldParams, p: &RobotParams) -> Result<FieldSample> {
    let rate = reference_rate(q, &r.xd, p);
    let frozen = ReferenceState {
        q_ref: r.q_ref,
        qd_ref: rate.qd_ref,
    };
    let mut sample = augmented_field(q, &frozen, fp, p)?;
    sample.singular = rate.singular;
    Ok(sample)
}

/// O-PVFC field: the estimated intention drives the reference directly.
pub fn opvfc_field(
    q: &Vector2<f64>,
    q_ref: &Vector2<f64>,
    intent: &IntentSample,
    fp: &FieldParams,
    p: &RobotParams,
) -> Result<FieldSample> {
    field_at(q, &TaskReference::from_intent(*q_ref, intent), fp, p)
}

/// Total time derivative `V̇ᵃ = (∂Vᵃ/∂q)q̇ + ∂Vᵃ/∂t` by central differences.
///
/// The time partial advances the reference by `±h`: `Q` moves along its
/// rate at the current configuration and the task velocity along `ẍ`.
/// The field does not depend on the flywheel angle, so its column is zero.
pub fn field_time_derivative(
    q: &Vector2<f64>,
    qd: &Vector2<f64>,
    r: &TaskReference,
    fp: &FieldParams,
    p: &RobotParams,
) -> Result<DVector<f64>> {
    let h = fp.h_fd;
    let mut vadot = DVector::zeros(3);
    for j in 0..2 {
        if qd[j] == 0.0 {
            continue;
        }
        let mut dq = Vector2::zeros();
        dq[j] = h;
        let plus = field_at(&(q + dq), r, fp, p)?;
        let minus = field_at(&(q - dq), r, fp, p)?;
        vadot += (plus.va - minus.va) * (qd[j] / (2.0 * h));
    }
    let qd_ref = reference_rate(q, &r.xd, p).qd_ref;
    let shifted = |sign: f64| TaskReference {
        q_ref: r.q_ref + qd_ref * (sign * h),
        xd: r.xd + r.xdd * (sign * h),
        xdd: r.xdd,
    };
    let plus = field_at(q, &shifted(1.0), fp, p)?;
    let minus = field_at(q, &shifted(-1.0), fp, p)?;
    vadot += (plus.va - minus.va) / (2.0 * h);
    Ok(vadot)
}
