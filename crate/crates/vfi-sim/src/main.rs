//! Command-line batch runner for the twin-arm constraint scenarios.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use vfi_core::sim::{self, ScenarioDef, SimConfig};

#[derive(Parser)]
#[command(name = "vfi-sim", version, about = "Run active-constraint scenarios and log results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios: one CSV per scenario plus summary.txt in the output
    /// directory. Exits non-zero when a scenario misses its expected
    /// violation pattern.
    Run {
        /// Scenario configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Scenario name, or `all`.
        #[arg(long, default_value = "all")]
        scenario: String,
        /// Override the control period (seconds).
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory for CSV logs and the summary.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Abort a run on singular constraint rows instead of omitting them.
        #[arg(long)]
        strict_singular: bool,
    },
    /// Validate a configuration without running it.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(ok) => {
            if ok {
                0
            } else {
                1
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            scenario,
            dt,
            out,
            strict_singular,
        } => {
            let mut cfg = SimConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(dt) = dt {
                if !(dt > 0.0) {
                    bail!("--dt must be positive");
                }
                cfg.control.dt = dt;
            }
            if strict_singular {
                cfg.control.strict_singular = true;
            }
            let selected: Vec<ScenarioDef> = if scenario == "all" {
                cfg.scenarios.clone()
            } else {
                vec![cfg.scenario(&scenario)?.clone()]
            };

            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            let mut summaries = Vec::new();
            for scen in &selected {
                let result = sim::run_scenario(&cfg, scen)
                    .with_context(|| format!("running {}", scen.name))?;
                let csv_path = out.join(format!("{}.csv", scen.name));
                sim::write_log_file(&result.records, cfg.moving_arm.dof(), &csv_path)?;
                println!(
                    "{}: {} ticks -> {}",
                    scen.name,
                    result.records.len(),
                    csv_path.display()
                );
                summaries.push(result.summary);
            }
            let report = sim::summary_report(&summaries);
            std::fs::write(out.join("summary.txt"), &report)?;
            print!("{report}");
            let all_match = summaries.iter().all(|s| s.matches_expected);
            if !all_match {
                eprintln!("one or more scenarios missed their expected violation pattern");
            }
            Ok(all_match)
        }
        Command::Check { config } => {
            let cfg = SimConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            // Exercise the geometry the runner will need.
            cfg.build_zones()?;
            cfg.moving_arm
                .fkm(&cfg.moving_q0, vfi_core::kinematics::Frame::End)?;
            cfg.static_arm
                .fkm(&cfg.static_q, vfi_core::kinematics::Frame::End)?;
            cfg.trajectory.sample(0.0)?;
            cfg.trajectory.sample(cfg.trajectory.total_duration())?;
            println!(
                "ok: {} scenarios, {}-DOF moving arm, {:.0} ms period, {:.1} s horizon",
                cfg.scenarios.len(),
                cfg.moving_arm.dof(),
                cfg.control.dt * 1e3,
                cfg.control.duration
            );
            Ok(true)
        }
    }
}
