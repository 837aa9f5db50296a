//! Comparison controllers: admittance + task-space PID, and plain PVFC.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::admittance::AdmittanceState;
use crate::error::{Error, Result};
use crate::field::FieldSample;
use crate::pvfc::{self, PvfcGains, PvfcOutput};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: Matrix2<f64>,
    pub ki: Matrix2<f64>,
    pub kd: Matrix2<f64>,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: Matrix2::identity() * 300.0,
            ki: Matrix2::identity() * 10.0,
            kd: Matrix2::identity() * 400.0,
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        for (name, m) in [("pid.kp", &self.kp), ("pid.ki", &self.ki), ("pid.kd", &self.kd)] {
            if m.iter().any(|v| !v.is_finite()) || m.symmetric_eigenvalues().min() < 0.0 {
                return Err(Error::invalid(name, "must be positive semi-definite"));
            }
        }
        Ok(())
    }
}

/// Accumulated position error `∫(x_a − x)dt`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: Vector2<f64>,
}

/// `f = Kp e + Ki ∫e + Kd ė` with `e = x_a − x`.
///
/// The integral is advanced by the rectangle rule after the force is
/// formed, so the first call sees the history only.
pub fn pid_task_force(
    x: &Vector2<f64>,
    xd: &Vector2<f64>,
    s: &AdmittanceState,
    dt: f64,
    g: &PidGains,
    state: &mut PidState,
) -> Result<Vector2<f64>> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let e = s.xa - x;
    let f = pid_force(&e, &(s.xda - xd), &state.integral, g);
    state.integral += e * dt;
    Ok(f)
}

/// PID law for a given error, error rate, and integral.
pub fn pid_force(e: &Vector2<f64>, ed: &Vector2<f64>, integral: &Vector2<f64>, g: &PidGains) -> Vector2<f64> {
    g.kp * e + g.ki * integral + g.kd * ed
}

/// `τ = Jᵀf`.
pub fn torque_from_task_force(j: &Matrix2<f64>, f: &Vector2<f64>) -> Vector2<f64> {
    j.transpose() * f
}

/// Plain PVFC: the skew terms only, no energy compensation.
pub fn opvfc_torque(
    ma: &DMatrix<f64>,
    ca: &DMatrix<f64>,
    field: &FieldSample,
    vadot: &DVector<f64>,
    qda: &DVector<f64>,
    g: &PvfcGains,
) -> PvfcOutput {
    pvfc::evaluate(ma, ca, &field.va, vadot, qda, g, false)
}
