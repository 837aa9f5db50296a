//! The five-row comparison of average interaction force and power flow.

use copvfc::sim::comparison_configs;
use copvfc::{compare_table, ScenarioConfig};

fn main() -> copvfc::Result<()> {
    let rows = compare_table(&comparison_configs(&ScenarioConfig::default()))?;
    println!("{:<14} {:>10} {:>10} {:>10}", "strategy", "|fx| N", "|fy| N", "|P| W");
    for r in rows {
        let m = r.metrics;
        match m.aborted_at {
            Some(t) => println!("{:<14} aborted at {t:.3} s", r.label),
            None => println!("{:<14} {:>10.4} {:>10.4} {:>10.5}", r.label, m.avg_fx, m.avg_fy, m.avg_power),
        }
    }
    Ok(())
}
