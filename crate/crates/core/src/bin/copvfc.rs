use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use copvfc::output::{emit_csv, emit_summary, RunManifest};
use copvfc::sim::{comparison_configs, run_table, TableRow};
use copvfc::{parse_config, render_config, verify, Result, ScenarioConfig, Strategy};

#[derive(Parser)]
#[command(name = "copvfc", version, about = "Co-carrying PVFC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its trace.
    Run {
        #[command(flatten)]
        common: Common,
        /// Overrides the strategy in the config file.
        #[arg(long)]
        strategy: Option<Strategy>,
    },
    /// Run the five comparison rows and write the summary table.
    Table {
        #[command(flatten)]
        common: Common,
    },
    /// Check the structural invariants.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "COPVFC_OUT", default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Integrator step in seconds.
    #[arg(long)]
    dt: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => parse_config(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(dt) = self.dt {
            cfg.dt_sim = dt;
        }
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| copvfc::Error::Io {
            path: self.out.clone(),
            source: e,
        })?;
        Ok(&self.out)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| copvfc::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_table(rows: &[TableRow]) {
    println!("{:<14} {:>12} {:>12} {:>12}  aborted_at", "strategy", "avg_fx (N)", "avg_fy (N)", "power (W)");
    for r in rows {
        let m = &r.metrics;
        match m.aborted_at {
            Some(t) => println!("{:<14} {:>12} {:>12} {:>12}  {t:.3}", r.label, "-", "-", "-"),
            None => println!("{:<14} {:>12.4} {:>12.4} {:>12.5}", r.label, m.avg_fx, m.avg_fy, m.avg_power),
        }
    }
}

fn run(cfgs: Vec<ScenarioConfig>, base: &ScenarioConfig, common: &Common, summary_name: &str) -> Result<()> {
    for cfg in &cfgs {
        cfg.validate()?;
    }
    let dir = common.out_dir()?;
    let mut manifest = RunManifest::new(common.config.clone(), dir.to_path_buf(), base.seed);
    write_text(&dir.join("config.toml"), &render_config(base))?;
    manifest.record("config.toml");

    let results = run_table(&cfgs)?;
    let mut rows = Vec::with_capacity(cfgs.len());
    for (cfg, (trace, metrics)) in cfgs.iter().zip(&results) {
        let name = format!("{}.csv", cfg.label());
        emit_csv(trace, &dir.join(&name))?;
        manifest.record(name);
        rows.push(TableRow {
            label: cfg.label(),
            metrics: *metrics,
        });
    }
    emit_summary(&rows, &dir.join(summary_name))?;
    manifest.record(summary_name);
    print_table(&rows);
    manifest.write()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common, strategy } => common.load().and_then(|mut cfg| {
            if let Some(s) = strategy {
                cfg.strategy = *s;
            }
            run(vec![cfg.clone()], &cfg, common, "summary.csv")
        }),
        Command::Table { common } => common
            .load()
            .and_then(|cfg| run(comparison_configs(&cfg), &cfg, common, "table.csv")),
        Command::Verify { seed } => {
            let checks = verify::run_all(*seed);
            for c in &checks {
                println!("{} {:<42} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::from(1);
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
