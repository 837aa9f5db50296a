//! With no human force, the energy compensation term drives the augmented
//! kinetic energy to its desired level before the analytic bound.

use nalgebra::Vector2;

use copvfc::energy::{lyapunov_v1, max_inertia_eigenvalue, settling_bounds};
use copvfc::{run_scenario, ScenarioConfig};

fn main() -> copvfc::Result<()> {
    let mut cfg = ScenarioConfig::default();
    cfg.human.k1h = Vector2::zeros();
    cfg.human.k2h = Vector2::zeros();
    cfg.t_end = 5.0;

    let (trace, _) = run_scenario(&cfg)?;
    let k0 = trace.rows[0].energy.ka;
    let bound = settling_bounds(
        &cfg.pvfc,
        max_inertia_eigenvalue(&cfg.robot),
        lyapunov_v1(k0, cfg.pvfc.kd_a),
    )?;
    println!("settling bound T = {:.3} s (T1 {:.3}, T2 {:.3})", bound.t_bound, bound.t1_bound, bound.t2_bound);

    for r in trace.rows.iter().step_by(25) {
        println!("t {:>5.2}  k^a {:>8.4} J  alpha {:.4}  V1 {:.4}", r.t, r.energy.ka, r.energy.alpha, r.energy.v1);
    }
    let p = trace.passivity;
    println!("passivity: max step residual {:.2e} J/s, integral form holds: {}", p.max_abs_residual, p.integral_form_holds);
    Ok(())
}
