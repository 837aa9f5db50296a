//! Time-varying passive velocity field control with a fractional-exponent
//! energy compensation term.
//!
//! The torque is `τᵃ = (G + R)q̇ᵃ − S[q̇ᵃ]^(r1/r2)`. `G` and `R` are skew, so
//! they only redirect kinetic energy; `S` is the sole term that injects or
//! removes it, and it is driven by how far `kᵃ` is from the target `kᵃ_d`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PvfcGains {
    /// Field energy budget (J).
    pub ea: f64,
    /// Target kinetic energy of the augmented system (J).
    pub kd_a: f64,
    pub r1: u32,
    pub r2: u32,
    pub kappa: f64,
    /// Diagonal of `K2`, one entry per augmented coordinate.
    pub k2: DVector<f64>,
    pub delta1: f64,
    pub delta2: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Default for PvfcGains {
    fn default() -> Self {
        Self {
            ea: 3000.0,
            kd_a: 30.0,
            r1: 3,
            r2: 5,
            kappa: 2.0,
            k2: DVector::from_element(3, 5.0),
            delta1: -0.01,
            delta2: 0.01,
            eta_min: -1.0,
            eta_max: 1.0,
        }
    }
}

impl PvfcGains {
    pub fn validate(&self) -> Result<()> {
        if self.r1 == 0 || self.r1 % 2 == 0 {
            return Err(Error::invalid("pvfc.r1", "must be a positive odd integer"));
        }
        if self.r2 == 0 || self.r2 % 2 == 0 {
            return Err(Error::invalid("pvfc.r2", "must be a positive odd integer"));
        }
        if self.r1 >= self.r2 {
            return Err(Error::invalid("pvfc.r1", "must be smaller than r2"));
        }
        if !(self.ea.is_finite() && self.ea > 0.0) {
            return Err(Error::invalid("pvfc.ea", "must be > 0"));
        }
        if !(self.kd_a.is_finite() && self.kd_a > 0.0) {
            return Err(Error::invalid("pvfc.kd_a", "must be > 0"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::invalid("pvfc.kappa", "must be > 0"));
        }
        if self.k2.is_empty() || self.k2.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("pvfc.k2", "diagonal entries must be > 0"));
        }
        if !(self.delta1 < 0.0 && self.delta2 > 0.0) {
            return Err(Error::invalid("pvfc.delta1/delta2", "require delta1 < 0 < delta2"));
        }
        if !(self.eta_min < 0.0 && self.eta_max > 0.0) {
            return Err(Error::invalid("pvfc.eta_min/eta_max", "require eta_min < 0 < eta_max"));
        }
        Ok(())
    }

    pub fn exponent(&self) -> f64 {
        f64::from(self.r1) / f64::from(self.r2)
    }
}

/// Everything the torque law is built from, kept for logging and checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PvfcIntermediates {
    /// Inverse dynamics of the field, `MᵃV̇ᵃ + CᵃVᵃ`.
    pub w: DVector<f64>,
    /// Desired momentum `MᵃVᵃ`.
    pub big_p: DVector<f64>,
    /// Actual momentum `Mᵃq̇ᵃ`.
    pub p: DVector<f64>,
    pub g: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

pub fn momenta(
    ma: &DMatrix<f64>,
    ca: &DMatrix<f64>,
    va: &DVector<f64>,
    vadot: &DVector<f64>,
    qda: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let w = ma * vadot + ca * va;
    (w, ma * va, ma * qda)
}

/// `G = (wPᵀ − Pwᵀ)/(2Eᵃ)` and `R = κ(Ppᵀ − pPᵀ)`.
pub fn coupling_matrices(
    w: &DVector<f64>,
    big_p: &DVector<f64>,
    p: &DVector<f64>,
    g: &PvfcGains,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let wp = w * big_p.transpose();
    let gm = (&wp - wp.transpose()) / (2.0 * g.ea);
    let pp = big_p * p.transpose();
    let rm = (&pp - pp.transpose()) * g.kappa;
    (gm, rm)
}

/// Cosine-smoothed step between the two plateaus, zero at `e = 0`.
pub fn saturation(e: f64, g: &PvfcGains) -> f64 {
    use std::f64::consts::PI;
    if e < g.delta1 {
        g.eta_min
    } else if e < 0.0 {
        0.5 * g.eta_min * (1.0 - (PI / g.delta1 * e).cos())
    } else if e == 0.0 {
        0.0
    } else if e <= g.delta2 {
        0.5 * g.eta_max * (1.0 - (PI / g.delta2 * e).cos())
    } else {
        g.eta_max
    }
}

/// Component-wise `sgn(v)|v|^(r1/r2)`.
pub fn frac_pow(v: &DVector<f64>, r1: u32, r2: u32) -> DVector<f64> {
    let exp = f64::from(r1) / f64::from(r2);
    v.map(|x| {
        if x == 0.0 {
            0.0
        } else {
            x.signum() * (exp * x.abs().ln()).exp()
        }
    })
}

/// `S = s(kᵃ − kᵃ_d)K2`.
pub fn energy_matrix(ka: f64, g: &PvfcGains) -> DMatrix<f64> {
    DMatrix::from_diagonal(&(&g.k2 * saturation(ka - g.kd_a, g)))
}

pub fn control_torque(
    gm: &DMatrix<f64>,
    rm: &DMatrix<f64>,
    s: &DMatrix<f64>,
    qda: &DVector<f64>,
    g: &PvfcGains,
) -> DVector<f64> {
    (gm + rm) * qda - s * frac_pow(qda, g.r1, g.r2)
}

/// `α = √(kᵃ/Eᵃ)`; the ratio between actual and field speed once aligned.
pub fn alpha(ka: f64, ea: f64) -> f64 {
    (ka.max(0.0) / ea).sqrt()
}

/// Torque and intermediates of one controller evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PvfcOutput {
    pub tau: DVector<f64>,
    pub inter: PvfcIntermediates,
    /// Saturation value `s(kᵃ − kᵃ_d)` actually applied (0 without compensation).
    pub s_val: f64,
    pub ka: f64,
}

/// Full torque law. With `compensate = false` the `S` term is dropped,
/// which is the plain PVFC used as a baseline.
pub fn evaluate(
    ma: &DMatrix<f64>,
    ca: &DMatrix<f64>,
    va: &DVector<f64>,
    vadot: &DVector<f64>,
    qda: &DVector<f64>,
    g: &PvfcGains,
    compensate: bool,
) -> PvfcOutput {
    let (w, big_p, p) = momenta(ma, ca, va, vadot, qda);
    let (gm, rm) = coupling_matrices(&w, &big_p, &p, g);
    let ka = 0.5 * qda.dot(&p);
    let (s_val, s) = if compensate {
        (saturation(ka - g.kd_a, g), energy_matrix(ka, g))
    } else {
        (0.0, DMatrix::zeros(qda.len(), qda.len()))
    };
    let tau = control_torque(&gm, &rm, &s, qda, g);
    PvfcOutput {
        tau,
        inter: PvfcIntermediates { w, big_p, p, g: gm, r: rm, s },
        s_val,
        ka,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn momenta_basics() {
        let ma = DMatrix::from_diagonal(&dv(&[1.3, 0.4, 10.0]));
        let ca = DMatrix::zeros(3, 3);
        let va = dv(&[0.1, -0.2, 24.0]);
        let (w, big_p, p) = momenta(&ma, &ca, &va, &DVector::zeros(3), &va);
        assert_eq!(big_p, p);
        assert_eq!(w, DVector::zeros(3));
    }

    #[test]
    fn coupling_vanishes_for_parallel_vectors() {
        let g = PvfcGains::default();
        let big_p = dv(&[0.3, -1.0, 240.0]);
        let (gm, rm) = coupling_matrices(&(&big_p * 2.5), &big_p, &(&big_p * 0.1), &g);
        assert_abs_diff_eq!(gm.norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rm.norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn saturation_values() {
        let g = PvfcGains::default();
        assert_eq!(saturation(0.0, &g), 0.0);
        assert_eq!(saturation(-0.02, &g), -1.0);
        assert_eq!(saturation(0.02, &g), 1.0);
        assert_abs_diff_eq!(saturation(0.005, &g), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(saturation(-0.005, &g), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn saturation_is_continuous_at_the_joints() {
        let g = PvfcGains::default();
        let eps = 1e-15;
        for edge in [g.delta1, 0.0, g.delta2] {
            let (lo, mid, hi) = (saturation(edge - eps, &g), saturation(edge, &g), saturation(edge + eps, &g));
            assert!((lo - mid).abs() <= 1e-12 && (hi - mid).abs() <= 1e-12, "{edge}");
        }
    }

    #[test]
    fn frac_pow_values() {
        assert_eq!(frac_pow(&dv(&[1.0, -1.0, 0.0]), 3, 5), dv(&[1.0, -1.0, 0.0]));
        let out = frac_pow(&dv(&[32.0, 0.0, 0.0]), 3, 5);
        assert_abs_diff_eq!(out[0], 8.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_matrix_regions() {
        let g = PvfcGains::default();
        assert_eq!(energy_matrix(30.0, &g), DMatrix::zeros(3, 3));
        assert_eq!(energy_matrix(30.02, &g), DMatrix::identity(3, 3) * 5.0);
        assert_eq!(energy_matrix(29.98, &g), DMatrix::identity(3, 3) * -5.0);
    }

    #[test]
    fn torque_structure() {
        let g = PvfcGains::default();
        let ma = DMatrix::from_row_slice(3, 3, &[0.9, 0.2, 0.0, 0.2, 0.16, 0.0, 0.0, 0.0, 10.0]);
        let ca = DMatrix::from_row_slice(3, 3, &[-0.01, -0.02, 0.0, 0.015, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let va = dv(&[0.2, -0.1, 24.4]);
        let vadot = dv(&[0.5, 0.3, -0.01]);
        let ka_field = 0.5 * va.dot(&(&ma * &va));
        // On the field at the target energy: only G acts.
        let scale = (g.kd_a / ka_field).sqrt();
        let qda = &va * scale;
        let out = evaluate(&ma, &ca, &va, &vadot, &qda, &g, true);
        assert_abs_diff_eq!(out.ka, g.kd_a, epsilon = 1e-12);
        assert_eq!(out.s_val, 0.0);
        assert_abs_diff_eq!(out.inter.r.norm(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.tau, &out.inter.g * &qda, epsilon = 1e-9);

        let still = evaluate(&ma, &ca, &va, &vadot, &DVector::zeros(3), &g, true);
        assert_eq!(still.tau, DVector::zeros(3));
    }

    /// Scalar re-derivation of the torque law at one pinned state,
    /// written without any matrix library.
    #[test]
    fn torque_matches_hand_evaluation() {
        let g = PvfcGains::default();
        let ma = [[0.9, 0.2, 0.0], [0.2, 0.16, 0.0], [0.0, 0.0, 10.0]];
        let ca = [[-0.01, -0.02, 0.0], [0.015, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let va = [0.2, -0.1, 24.4];
        let vadot = [0.5, 0.3, -0.01];
        let qd = [0.05, -0.02, 1.7];

        let mv = |m: &[[f64; 3]; 3], v: &[f64; 3]| {
            let mut o = [0.0; 3];
            for i in 0..3 {
                for j in 0..3 {
                    o[i] += m[i][j] * v[j];
                }
            }
            o
        };
        let madot = mv(&ma, &vadot);
        let cav = mv(&ca, &va);
        let w: Vec<f64> = (0..3).map(|i| madot[i] + cav[i]).collect();
        let big_p = mv(&ma, &va);
        let p = mv(&ma, &qd);
        let ka: f64 = 0.5 * (0..3).map(|i| qd[i] * p[i]).sum::<f64>();
        let e = ka - 30.0;
        let s = if e < -0.01 { -1.0 } else if e > 0.01 { 1.0 } else { unreachable!() };
        let mut tau = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                let gij = (w[i] * big_p[j] - big_p[i] * w[j]) / 6000.0;
                let rij = 2.0 * (big_p[i] * p[j] - p[i] * big_p[j]);
                tau[i] += (gij + rij) * qd[j];
            }
            tau[i] -= s * 5.0 * qd[i].signum() * qd[i].abs().powf(0.6);
        }

        let out = evaluate(
            &DMatrix::from_fn(3, 3, |i, j| ma[i][j]),
            &DMatrix::from_fn(3, 3, |i, j| ca[i][j]),
            &dv(&va),
            &dv(&vadot),
            &dv(&qd),
            &g,
            true,
        );
        for i in 0..3 {
            assert_abs_diff_eq!(out.tau[i], tau[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(3000.0, 3000.0), 1.0);
        assert_abs_diff_eq!(alpha(30.0, 3000.0), 0.1, epsilon = 1e-15);
        assert_eq!(alpha(0.0, 3000.0), 0.0);
    }

    #[test]
    fn gains_validation() {
        assert!(PvfcGains::default().validate().is_ok());
        let even = PvfcGains { r1: 2, ..PvfcGains::default() };
        let err = even.validate().unwrap_err().to_string();
        assert!(err.contains("odd"), "{err}");
        assert!(PvfcGains { r1: 5, r2: 5, ..PvfcGains::default() }.validate().is_err());
        assert!(PvfcGains { delta1: 0.01, ..PvfcGains::default() }.validate().is_err());
    }

    fn vec3() -> impl Strategy<Value = DVector<f64>> {
        prop::array::uniform3(-50.0f64..50.0).prop_map(|a| dv(&a))
    }

    proptest! {
        #[test]
        fn coupling_matrices_are_skew(w in vec3(), big_p in vec3(), p in vec3()) {
            let (gm, rm) = coupling_matrices(&w, &big_p, &p, &PvfcGains::default());
            prop_assert!((&gm + gm.transpose()).amax() <= 1e-12);
            prop_assert!((&rm + rm.transpose()).amax() <= 1e-12);
        }

        #[test]
        fn skew_terms_do_no_work(w in vec3(), big_p in vec3(), qd in vec3()) {
            let g = PvfcGains::default();
            let p = &big_p * 0.3 + &qd;
            let (gm, rm) = coupling_matrices(&w, &big_p, &p, &g);
            let power = qd.dot(&((gm + rm) * &qd));
            let scale = 1.0 + qd.norm_squared() * (w.norm() * big_p.norm() / 6000.0 + 2.0 * big_p.norm() * p.norm());
            prop_assert!(power.abs() <= 1e-12 * scale);
        }

        #[test]
        fn frac_pow_is_odd(v in vec3()) {
            let neg = frac_pow(&(-&v), 3, 5);
            let pos = frac_pow(&v, 3, 5);
            prop_assert_eq!(neg, -pos);
        }
    }
}
