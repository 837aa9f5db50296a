//! Structural checks that need no scenario run.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{coriolis_matrix, forward_kinematics, jacobian, mass_matrix, DynMatrices, RobotParams};
use crate::field::{augmented_field, FieldParams, ReferenceState};
use crate::pvfc::{coupling_matrices, frac_pow, saturation, PvfcGains};
use crate::sim::rk4_step;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value next to its tolerance.
    pub detail: String,
}

impl CheckResult {
    fn bound(name: &'static str, worst: f64, tol: f64) -> Self {
        Self {
            name,
            passed: worst <= tol,
            detail: format!("worst {worst:.3e} <= {tol:.0e}"),
        }
    }
}

const SAMPLES: usize = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vec_in(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.random_range(lo..hi))
}

pub fn skew_coupling(seed: u64) -> CheckResult {
    let g = PvfcGains::default();
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let w = vec_in(&mut r, 3, -100.0, 100.0);
        let big_p = vec_in(&mut r, 3, -300.0, 300.0);
        let p = vec_in(&mut r, 3, -30.0, 30.0);
        let (gm, rm) = coupling_matrices(&w, &big_p, &p, &g);
        worst = worst.max((&gm + gm.transpose()).amax()).max((&rm + rm.transpose()).amax());
    }
    CheckResult::bound("G and R skew-symmetric", worst, 1e-12)
}

pub fn field_energy(seed: u64) -> CheckResult {
    let p = RobotParams::default();
    let fp = FieldParams::default();
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let q = Vector2::new(r.random_range(-PI..PI), r.random_range(-PI..PI));
        let reference = ReferenceState {
            q_ref: q + Vector2::new(r.random_range(-0.2..0.2), r.random_range(-0.2..0.2)),
            qd_ref: Vector2::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)),
        };
        let Ok(s) = augmented_field(&q, &reference, &fp, &p) else { continue };
        let dm = DynMatrices::evaluate(&q, &Vector2::zeros(), &p);
        let e = 0.5 * s.va.dot(&(&dm.ma * &s.va));
        worst = worst.max(((e - fp.ea) / fp.ea).abs());
    }
    CheckResult::bound("field energy equals budget (relative)", worst, 1e-9)
}

pub fn frac_pow_oddness(seed: u64) -> CheckResult {
    let mut r = rng(seed);
    let mut mismatches = 0usize;
    for _ in 0..SAMPLES {
        let v = vec_in(&mut r, 3, -50.0, 50.0);
        if frac_pow(&(-&v), 3, 5) != -frac_pow(&v, 3, 5) {
            mismatches += 1;
        }
    }
    CheckResult {
        name: "frac_pow odd (exact)",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in {SAMPLES}"),
    }
}

pub fn saturation_continuity() -> CheckResult {
    let g = PvfcGains::default();
    let mut worst = 0.0f64;
    for edge in [g.delta1, 0.0, g.delta2] {
        let mid = saturation(edge, &g);
        for side in [edge.next_down(), edge.next_up()] {
            worst = worst.max((saturation(side, &g) - mid).abs());
        }
    }
    CheckResult::bound("saturation continuous at delta1, 0, delta2", worst, 1e-12)
}

pub fn coriolis_skew(seed: u64) -> CheckResult {
    let p = RobotParams::default();
    let mut r = rng(seed);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let q = Vector2::new(r.random_range(-PI..PI), r.random_range(-PI..PI));
        let qd = Vector2::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let mdot: Matrix2<f64> = (mass_matrix(&(q + qd * h), &p) - mass_matrix(&(q - qd * h), &p)) / (2.0 * h);
        let n = mdot - 2.0 * coriolis_matrix(&q, &qd, &p);
        worst = worst.max(qd.dot(&(n * qd)).abs());
    }
    CheckResult::bound("qd'(Mdot - 2C)qd vanishes", worst, 1e-8)
}

pub fn jacobian_fd(seed: u64) -> CheckResult {
    let p = RobotParams::default();
    let mut r = rng(seed);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let q = Vector2::new(r.random_range(-PI..PI), r.random_range(-PI..PI));
        let j = jacobian(&q, &p);
        for col in 0..2 {
            let mut dq = Vector2::zeros();
            dq[col] = h;
            let fd = (forward_kinematics(&(q + dq), &p) - forward_kinematics(&(q - dq), &p)) / (2.0 * h);
            worst = worst.max((fd - j.column(col)).amax());
        }
    }
    CheckResult::bound("Jacobian matches finite differences", worst, 1e-6)
}

/// Global error ratio on `ẏ = −y` over one second when the step halves.
pub fn rk4_order() -> CheckResult {
    let run = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let mut y = [1.0];
        for i in 0..n {
            y = rk4_step(&y, i as f64 * dt, dt, |_, y| Ok::<_, ()>([-y[0]])).expect("infallible");
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    let ratio = run(0.1) / run(0.05);
    CheckResult {
        name: "RK4 fourth-order convergence",
        passed: (ratio - 16.0).abs() <= 1.6,
        detail: format!("error ratio {ratio:.3} (expect 16)"),
    }
}

/// All checks with a fixed seed.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        skew_coupling(seed),
        field_energy(seed.wrapping_add(1)),
        frac_pow_oddness(seed.wrapping_add(2)),
        saturation_continuity(),
        coriolis_skew(seed.wrapping_add(3)),
        jacobian_fd(seed.wrapping_add(4)),
        rk4_order(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all(7) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
