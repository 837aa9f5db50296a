//! Reference-trajectory generators driven by the measured interaction force.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::human::IntentSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittanceParams {
    pub md: Matrix2<f64>,
    pub dd: Matrix2<f64>,
    /// Spring term, used only by the MDK variant.
    pub kd: Matrix2<f64>,
}

impl Default for AdmittanceParams {
    fn default() -> Self {
        Self {
            md: Matrix2::identity(),
            dd: Matrix2::identity() * 14.0,
            kd: Matrix2::identity() * 100.0,
        }
    }
}

impl AdmittanceParams {
    pub fn validate(&self) -> Result<()> {
        let pd = |m: &Matrix2<f64>| m.symmetric_eigenvalues().min() > 0.0 && (m - m.transpose()).amax() == 0.0;
        if !pd(&self.md) {
            return Err(Error::invalid("admittance.md", "must be symmetric positive definite"));
        }
        if !pd(&self.dd) {
            return Err(Error::invalid("admittance.dd", "must be symmetric positive definite"));
        }
        if self.kd.symmetric_eigenvalues().min() < 0.0 || (self.kd - self.kd.transpose()).amax() != 0.0 {
            return Err(Error::invalid("admittance.kd", "must be symmetric positive semi-definite"));
        }
        Ok(())
    }

    fn md_inverse(&self) -> Matrix2<f64> {
        self.md.try_inverse().unwrap_or_else(|| Matrix2::from_element(f64::NAN))
    }
}

/// Reference position and velocity in task space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittanceState {
    pub xa: Vector2<f64>,
    pub xda: Vector2<f64>,
}

impl AdmittanceState {
    /// Starts on the noiseless estimate.
    pub fn from_intent(intent: &IntentSample) -> Self {
        Self {
            xa: intent.pos,
            xda: intent.vel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmittanceKind {
    MassDamper,
    MassDamperSpring,
    Trigger,
}

impl AdmittanceKind {
    pub fn accel(
        self,
        s: &AdmittanceState,
        intent: &IntentSample,
        f_ext: &Vector2<f64>,
        p: &AdmittanceParams,
    ) -> Vector2<f64> {
        match self {
            AdmittanceKind::MassDamper => md_accel(s, intent, f_ext, p),
            AdmittanceKind::MassDamperSpring => mdk_accel(s, intent, f_ext, p),
            AdmittanceKind::Trigger => trigger_accel(s, f_ext, p),
        }
    }
}

/// `ẍ_a = ẍ̂_h + Md⁻¹(f_ext − Dd(ẋ_a − ẋ̂_h))`
pub fn md_accel(s: &AdmittanceState, intent: &IntentSample, f_ext: &Vector2<f64>, p: &AdmittanceParams) -> Vector2<f64> {
    intent.acc + p.md_inverse() * (f_ext - p.dd * (s.xda - intent.vel))
}

/// Mass-damper-spring variant; with a zero spring it reduces to [`md_accel`].
pub fn mdk_accel(s: &AdmittanceState, intent: &IntentSample, f_ext: &Vector2<f64>, p: &AdmittanceParams) -> Vector2<f64> {
    intent.acc + p.md_inverse() * (f_ext - p.dd * (s.xda - intent.vel) - p.kd * (s.xa - intent.pos))
}

/// Force-triggered model with no intention feed-forward.
pub fn trigger_accel(s: &AdmittanceState, f_ext: &Vector2<f64>, p: &AdmittanceParams) -> Vector2<f64> {
    p.md_inverse() * (f_ext - p.dd * s.xda)
}
