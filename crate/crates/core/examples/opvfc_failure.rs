//! Original PVFC with a fixed-energy field: the field energy the arm needs
//! is tracked against the budget, and the run stops if it is exceeded.

use copvfc::{run_scenario, ScenarioConfig, Strategy};

fn main() -> copvfc::Result<()> {
    let base = ScenarioConfig::default().with_strategy(Strategy::Opvfc);
    for (k1, ea) in [(100.0, 3000.0), (10.0, 3000.0), (100.0, 10.0)] {
        let mut cfg = base.with_k1(k1);
        cfg.field.ea = ea;
        cfg.pvfc.ea = ea;
        let (trace, metrics) = run_scenario(&cfg)?;
        let peak = trace.rows.iter().map(|r| r.field_energy).fold(0.0, f64::max);
        match trace.abort {
            Some(a) => println!(
                "K1 = {k1:>5}, Ea = {ea:>6}: aborted at {:.3} s, field energy {:.3} J > {} J",
                a.t, a.field_energy, a.budget
            ),
            None => println!(
                "K1 = {k1:>5}, Ea = {ea:>6}: completed, peak field energy {peak:.1} J, avg |f| ({:.2}, {:.2}) N",
                metrics.avg_fx, metrics.avg_fy
            ),
        }
    }
    Ok(())
}
