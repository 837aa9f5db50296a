//! Kinetic energy, power flow, Lyapunov monitors, and settling bounds.

use nalgebra::{DMatrix, DVector, Vector2};

use crate::dynamics::{mass_matrix, RobotParams};
use crate::error::{Error, Result};
use crate::field::FieldSample;
use crate::pvfc::{frac_pow, PvfcGains};

/// Energy quantities logged alongside each trace row.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub ka: f64,
    pub k_robot: f64,
    pub k_flywheel: f64,
    pub alpha: f64,
    pub p_r2h: f64,
    pub v1: f64,
    pub v2: f64,
    pub passivity_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettlingBound {
    pub t1_bound: f64,
    pub t2_bound: f64,
    pub t_bound: f64,
    pub psi: f64,
}

/// `(kᵃ, k_robot, k_flywheel)`. The total is the sum of the split so the
/// two always agree exactly.
pub fn kinetic_energy(ma: &DMatrix<f64>, qda: &DVector<f64>) -> (f64, f64, f64) {
    let n = qda.len() - 1;
    let qd = qda.rows(0, n);
    let k_robot = 0.5 * qd.dot(&(ma.view((0, 0), (n, n)) * qd));
    let k_flywheel = 0.5 * ma[(n, n)] * qda[n] * qda[n];
    (k_robot + k_flywheel, k_robot, k_flywheel)
}

/// `P_r2h = −q̇ᵃᵀτᵃ_ext`; positive when the robot does work on the human.
pub fn power_flow(qda: &DVector<f64>, tau_ext_a: &DVector<f64>) -> f64 {
    -qda.dot(tau_ext_a)
}

/// Power removed or injected by the compensation term,
/// `s·q̇ᵃᵀK2[q̇ᵃ]^(r1/r2)`.
pub fn compensation_power(qda: &DVector<f64>, s_val: f64, g: &PvfcGains) -> f64 {
    if s_val == 0.0 {
        return 0.0;
    }
    s_val * qda.dot(&g.k2.component_mul(&frac_pow(qda, g.r1, g.r2)))
}

/// Right-hand side of the energy balance: `τ_extᵀq̇ᵃ − s·q̇ᵃᵀK2[q̇ᵃ]^(r1/r2)`.
pub fn port_power(qda: &DVector<f64>, tau_ext_a: &DVector<f64>, s_val: f64, g: &PvfcGains) -> f64 {
    qda.dot(tau_ext_a) - compensation_power(qda, s_val, g)
}

/// Backward-difference energy rate minus the instantaneous port power.
#[allow(clippy::too_many_arguments)]
pub fn passivity_residual(
    ka_prev: f64,
    ka_curr: f64,
    dt: f64,
    qda: &DVector<f64>,
    tau_ext_a: &DVector<f64>,
    s_val: f64,
    g: &PvfcGains,
) -> f64 {
    (ka_curr - ka_prev) / dt - port_power(qda, tau_ext_a, s_val, g)
}

/// Energy rate over one step minus an already averaged port power.
pub fn passivity_residual_from_power(ka_prev: f64, ka_curr: f64, dt: f64, mean_power: f64) -> f64 {
    (ka_curr - ka_prev) / dt - mean_power
}

/// `½(kᵃ − kᵃ_d)²`.
pub fn lyapunov_v1(ka: f64, kd_a: f64) -> f64 {
    0.5 * (ka - kd_a).powi(2)
}

/// `½e_qᵀe_q + ½e_vᵀMᵃe_v` with `e_q = q − Q`, `e_v = q̇ᵃ − αVᵃ`.
pub fn lyapunov_v2(
    q: &Vector2<f64>,
    q_ref: &Vector2<f64>,
    qda: &DVector<f64>,
    field: &FieldSample,
    ma: &DMatrix<f64>,
    alpha: f64,
) -> f64 {
    let eq = q - q_ref;
    let ev = qda - &field.va * alpha;
    0.5 * eq.norm_squared() + 0.5 * ev.dot(&(ma * &ev))
}

/// Largest eigenvalue of `Mᵃ` over a grid of elbow angles.
pub fn max_inertia_eigenvalue(p: &RobotParams) -> f64 {
    const STEPS: usize = 720;
    let mut best = p.mf;
    for i in 0..=STEPS {
        let q2 = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / STEPS as f64;
        let m = mass_matrix(&Vector2::new(0.0, q2), p);
        best = best.max(m.symmetric_eigenvalues().max());
    }
    best
}

/// Finite-time bounds on reaching `kᵃ_d` from `V1(0) = v1_0` with no
/// external force. `λ_min(s)` is taken on the saturation plateau.
pub fn settling_bounds(g: &PvfcGains, ma_max_eig: f64, v1_0: f64) -> Result<SettlingBound> {
    g.validate()?;
    if !(v1_0 >= 0.0) {
        return Err(Error::invalid("v1_0", "must be >= 0"));
    }
    if !(ma_max_eig > 0.0) {
        return Err(Error::invalid("ma_max_eig", "must be > 0"));
    }
    let (r1, r2) = (f64::from(g.r1), f64::from(g.r2));
    let a = (r1 + r2) / (2.0 * r2);
    let b = (r2 - r1) / (2.0 * r2);
    let lambda_s = g.eta_min.abs().min(g.eta_max);
    let lambda_k2 = g.k2.min();
    let psi = 2f64.powf(a) * lambda_s * lambda_k2 / ma_max_eig.powf(a);
    let e0 = (2.0 * v1_0).sqrt();
    let kd = g.kd_a;
    let t1 = ((e0 + kd).powf(b) - kd.powf(b)) / (psi * b);
    let base = kd - e0;
    if base < 0.0 {
        return Err(Error::Domain(format!(
            "kd_a - sqrt(2 V1(0)) = {base} is negative"
        )));
    }
    let t2 = (kd.powf(b) - base.powf(b)) / (psi * b);
    Ok(SettlingBound {
        t1_bound: t1,
        t2_bound: t2,
        t_bound: t1.max(t2),
        psi,
    })
}

/// Tracks the energy balance along a run.
///
/// The per-step residual compares the energy change with the mean port
/// power of the integrator stages. The integral form accumulates
/// `∫τ_extᵀq̇ᵃ` and checks `kᵃ(t) − kᵃ(t₀) ≤ W_ext(t) − W_ext(t₀)` on every
/// maximal stretch of steps with `kᵃ ≥ kᵃ_d`.
#[derive(Debug, Clone)]
pub struct PassivityMonitor {
    kd_a: f64,
    tol: f64,
    ext_work: f64,
    segment: Option<(f64, f64)>,
    pub max_abs_residual: f64,
    pub max_integral_violation: f64,
    pub segments: usize,
}

impl PassivityMonitor {
    pub fn new(kd_a: f64, tol: f64) -> Self {
        Self {
            kd_a,
            tol,
            ext_work: 0.0,
            segment: None,
            max_abs_residual: 0.0,
            max_integral_violation: f64::NEG_INFINITY,
            segments: 0,
        }
    }

    /// Feeds one integrator step and returns its residual.
    pub fn step(&mut self, ka_prev: f64, ka_curr: f64, dt: f64, mean_port_power: f64, mean_ext_power: f64) -> f64 {
        let residual = passivity_residual_from_power(ka_prev, ka_curr, dt, mean_port_power);
        self.max_abs_residual = self.max_abs_residual.max(residual.abs());
        let work_prev = self.ext_work;
        self.ext_work += mean_ext_power * dt;
        if ka_prev >= self.kd_a && ka_curr >= self.kd_a {
            let (k0, w0) = *self.segment.get_or_insert_with(|| {
                self.segments += 1;
                (ka_prev, work_prev)
            });
            let violation = (ka_curr - k0) - (self.ext_work - w0);
            self.max_integral_violation = self.max_integral_violation.max(violation);
        } else {
            self.segment = None;
        }
        residual
    }

    /// `true` when no segment gained more energy than was supplied.
    pub fn integral_form_holds(&self) -> bool {
        self.segments == 0 || self.max_integral_violation <= self.tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynMatrices;
    use crate::dynamics::jacobian;
    use approx::assert_abs_diff_eq;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn kinetic_energy_values() {
        let p = RobotParams::default();
        let dm = DynMatrices::evaluate(&Vector2::new(0.3, 0.2), &Vector2::zeros(), &p);
        assert_eq!(kinetic_energy(&dm.ma, &DVector::zeros(3)), (0.0, 0.0, 0.0));
        assert_eq!(kinetic_energy(&dm.ma, &dv(&[0.0, 0.0, 1.0])).0, 5.0);

        let dm = DynMatrices::evaluate(&Vector2::new(-0.785, 1.57), &Vector2::zeros(), &p);
        let (ka, kr, kf) = kinetic_energy(&dm.ma, &dv(&[0.01, 0.01, 1.0]));
        assert_eq!(ka, kr + kf);
        assert_abs_diff_eq!(ka, 5.0, epsilon = 1e-3);
    }

    #[test]
    fn power_flow_sign_and_task_space_identity() {
        let p = RobotParams::default();
        let q = Vector2::new(-0.6, 1.4);
        let qd = Vector2::new(0.2, -0.1);
        assert_eq!(power_flow(&dv(&[0.2, -0.1, 3.0]), &DVector::zeros(3)), 0.0);

        let j = jacobian(&q, &p);
        let xd = j * qd;
        let f = Vector2::new(1.5, -0.4);
        let tau = j.transpose() * f;
        let pw = power_flow(&dv(&[qd[0], qd[1], 3.0]), &dv(&[tau[0], tau[1], 0.0]));
        assert_abs_diff_eq!(pw, -xd.dot(&f), epsilon = 1e-10);

        let f = xd * 4.0;
        let tau = j.transpose() * f;
        assert!(power_flow(&dv(&[qd[0], qd[1], 0.0]), &dv(&[tau[0], tau[1], 0.0])) < 0.0);
    }

    #[test]
    fn lyapunov_v1_values() {
        assert_eq!(lyapunov_v1(30.0, 30.0), 0.0);
        assert_eq!(lyapunov_v1(35.0, 30.0), 12.5);
        assert_eq!(lyapunov_v1(30.0 + 1.7, 30.0), lyapunov_v1(30.0 - 1.7, 30.0));
    }

    #[test]
    fn lyapunov_v2_zero_on_solution() {
        let p = RobotParams::default();
        let q = Vector2::new(-0.7, 1.5);
        let dm = DynMatrices::evaluate(&q, &Vector2::zeros(), &p);
        let va = dv(&[0.3, -0.2, 24.0]);
        let field = FieldSample {
            v: Vector2::new(0.3, -0.2),
            vf: 24.0,
            va: va.clone(),
            manip_energy: 0.0,
            singular: false,
        };
        assert_eq!(lyapunov_v2(&q, &q, &(&va * 0.1), &field, &dm.ma, 0.1), 0.0);
        assert!(lyapunov_v2(&q, &(q * 0.9), &dv(&[1.0, 2.0, 3.0]), &field, &dm.ma, 0.1) > 0.0);
    }

    #[test]
    fn residual_vanishes_for_consistent_inputs() {
        let g = PvfcGains::default();
        let qda = dv(&[0.1, -0.3, 2.0]);
        let tau = dv(&[0.5, 0.2, 0.0]);
        let pw = port_power(&qda, &tau, 1.0, &g);
        let dt = 1e-3;
        let r = passivity_residual(10.0, 10.0 + pw * dt, dt, &qda, &tau, 1.0, &g);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn max_eigenvalue_is_the_flywheel_or_stretched_arm() {
        let p = RobotParams::default();
        let m0 = mass_matrix(&Vector2::zeros(), &p).symmetric_eigenvalues().max();
        assert_eq!(max_inertia_eigenvalue(&p), m0.max(p.mf));
    }

    #[test]
    fn settling_bounds_values() {
        let g = PvfcGains::default();
        let b = settling_bounds(&g, 10.0, 0.0).unwrap();
        assert_eq!((b.t1_bound, b.t2_bound, b.t_bound), (0.0, 0.0, 0.0));

        // Direct substitution with e(0) = −25.
        let b = settling_bounds(&g, 10.0, 312.5).unwrap();
        let psi = 2f64.powf(0.8) * 5.0 / 10f64.powf(0.8);
        assert_abs_diff_eq!(b.psi, psi, epsilon = 1e-12);
        let t2 = (30f64.powf(0.2) - 5f64.powf(0.2)) / (psi * 0.2);
        let t1 = (55f64.powf(0.2) - 30f64.powf(0.2)) / (psi * 0.2);
        assert_abs_diff_eq!(b.t2_bound, t2, epsilon = 1e-12);
        assert_abs_diff_eq!(b.t1_bound, t1, epsilon = 1e-12);
        assert_eq!(b.t_bound, t1.max(t2));

        assert!(matches!(settling_bounds(&g, 10.0, 800.0), Err(Error::Domain(_))));
        let same = PvfcGains { r1: 5, ..g };
        assert!(settling_bounds(&same, 10.0, 1.0).is_err());
    }

    #[test]
    fn monitor_integral_form() {
        let mut m = PassivityMonitor::new(30.0, 1e-6);
        // Energy falls while no external work is done: holds.
        let mut k = 31.0;
        for _ in 0..10 {
            let next = k - 0.05;
            m.step(k, next, 1e-3, (next - k) / 1e-3, 0.0);
            k = next;
        }
        assert!(m.integral_form_holds());
        assert_eq!(m.segments, 1);
        // Energy rises without supplied work: violated.
        m.step(k, k + 1.0, 1e-3, 0.0, 0.0);
        assert!(!m.integral_form_holds());
        assert!(m.max_abs_residual > 99.0);
    }
}
