//! Load a scenario from TOML text, run it, and write the trace as CSV.

use std::path::Path;

use copvfc::config::parse_config_str;
use copvfc::output::emit_csv;
use copvfc::run_scenario;

const SCENARIO: &str = r#"
strategy = "mdk_pid"
seed = 7

[sim]
t_end = 8.0

[human]
noise_std = 0.0

[pid]
kp = [300.0, 300.0]
"#;

fn main() -> copvfc::Result<()> {
    let cfg = parse_config_str(SCENARIO, Path::new("inline"))?;
    let (trace, metrics) = run_scenario(&cfg)?;
    println!("{} over {} s: {metrics:?}", cfg.label(), cfg.t_end);

    let path = std::env::temp_dir().join(format!("{}.csv", cfg.label()));
    emit_csv(&trace, &path)?;
    println!("wrote {} rows to {}", trace.rows.len(), path.display());

    if let Err(e) = parse_config_str("[pvfc]\nr1 = 4\n", Path::new("inline")) {
        println!("rejected: {e}");
    }
    Ok(())
}
