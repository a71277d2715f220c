//! `rvp`: scenario runner for the relativistic Vlasov–Poisson laboratory.

mod config;
mod plot;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Scenario, ScenarioConfig};
use scenarios::{output_dir, Runner};

const EXIT_CONFIG: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(version, about = "Runs constants tables, trial-family sweeps, evolutions, blow-up sweeps and bound audits")]
struct Cli {
    /// TOML scenario file; defaults apply to every missing key
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots
    #[arg(long)]
    plot: bool,
    /// Sampling seed (overrides `seed` in the file)
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario to run (overrides `scenario` in the file)
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match ScenarioConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("invalid config: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.scenario {
        cfg.scenario = Some(s);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("invalid config: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let scenario = cfg.scenario.expect("validated");
    let out = output_dir(cli.out.as_deref(), &cfg, scenario);
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("cannot create {}: {e}", out.display());
        return ExitCode::from(EXIT_RUNTIME);
    }

    let mut runner = Runner::new(&cfg, scenario, out.clone(), cli.plot);
    let result = runner.run(scenario);
    let mut report = runner.report;
    let code = match result {
        Ok(()) => report.finish(),
        Err(e) => {
            eprintln!("{} failed: {e:#}", scenario.name());
            report.status = "error";
            report.error = Some(format!("{e:#}"));
            EXIT_RUNTIME
        }
    };
    let path = out.join("report.json");
    let written = std::fs::File::create(&path)
        .map_err(anyhow::Error::from)
        .and_then(|f| serde_json::to_writer_pretty(f, &report).map_err(anyhow::Error::from));
    if let Err(e) = written {
        eprintln!("cannot write {}: {e:#}", path.display());
        return ExitCode::from(EXIT_RUNTIME);
    }
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    if !report.flags.is_empty() {
        println!("flags: {}", report.flags.join(", "));
    }
    println!("{}: {} ({})", scenario.name(), report.status, out.display());
    ExitCode::from(code)
}
