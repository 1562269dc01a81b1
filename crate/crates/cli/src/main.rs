//! Command-line front end for the glider simulator.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 simulation abort.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glider_core::batch::run_controllers;
use glider_core::export::{sample_envelopes, write_ftpf_csv, DEFAULT_FTPF_SAMPLES};
use glider_core::gains::check_gains;
use glider_core::report::comparison_table;
use glider_core::sim::{ControllerKind, ScenarioConfig};
use glider_core::GliderError;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;

const SCHEMA_HINT: &str = "a scenario file is TOML with optional tables [scenario], [uncertainty], \
[glider], [bounds], [envelope.depth|pitch|heading], [fxtppc], [smc], [ppc], [observer], \
[guidance], [initial]; see configs/case1.toml";

#[derive(Parser)]
#[command(name = "glider-sim", version, about = "Underwater glider closed-loop simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario configuration file.
    config: PathBuf,
    /// Override a config field, e.g. `--set dt=0.005` or `--set fxtppc.k1=[0.002,0.01,0.001]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario with one or more controllers.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Controllers to run (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "smc,ppc,fxtppc")]
        controllers: Vec<ControllerKind>,
        /// Output directory.
        #[arg(long, env = "GLIDER_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Check observer, sliding-surface and envelope gain rules.
    ValidateGains {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Sample the envelope families on [0, T] for each channel.
    ExportFtpf {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = DEFAULT_FTPF_SAMPLES)]
        samples: usize,
        #[arg(long, env = "GLIDER_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: format!("configuration error: {e}\nhint: {SCHEMA_HINT}"),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("i/o error: {e}"),
        }
    }

    fn from_core(e: GliderError) -> Self {
        match e {
            GliderError::Config(_) | GliderError::InvalidParameter { .. } => Self::config(e),
            GliderError::Io(_) => Self::io(e),
            other => Self {
                code: EXIT_ABORT,
                message: format!("simulation aborted: {other}"),
            },
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn cmd_run(args: &ConfigArgs, controllers: &[ControllerKind], out: &Path) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(&args.config, &args.overrides).map_err(Failure::from_core)?;
    if controllers.is_empty() {
        return Err(Failure::config("no controllers requested"));
    }
    std::fs::create_dir_all(out).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    let mut runs = Vec::new();
    let mut by_controller = serde_json::Map::new();
    let mut aborted = Vec::new();
    for result in run_controllers(&cfg, controllers) {
        let sim = result.map_err(Failure::from_core)?;
        let path = out.join(format!("{}_log.csv", sim.controller));
        sim.log.write_csv(create(&path)?).map_err(Failure::from_core)?;
        let controller = sim.controller;
        if let Some(abort) = &sim.abort {
            // Keep going so the other controllers still get compared.
            eprintln!(
                "{controller}: simulation aborted at t = {:.2} s: {}",
                abort.t, abort.error
            );
            aborted.push(controller);
            let entry = serde_json::json!({
                "aborted": { "t": abort.t, "message": abort.error.to_string() },
                "samples": sim.log.records.len(),
            });
            by_controller.insert(controller.name().to_string(), entry);
            continue;
        }
        let run = sim.finish(&cfg.fxtppc).map_err(Failure::from_core)?;
        by_controller.insert(
            controller.name().to_string(),
            serde_json::to_value(&run.metrics).map_err(Failure::io)?,
        );
        runs.push((controller, run.metrics));
    }
    let doc = serde_json::json!({
        "scenario": cfg.scenario.kind,
        "dt": cfg.scenario.dt,
        "horizon": cfg.scenario.horizon,
        "runs": by_controller,
    });
    let path = out.join("metrics.json");
    serde_json::to_writer_pretty(create(&path)?, &doc).map_err(Failure::io)?;
    print!("{}", comparison_table(&runs));
    for (c, m) in &runs {
        if m.waypoints_reached > 0 {
            let done = m
                .completion_time
                .map_or("not completed".to_string(), |t| format!("{t:.2} s"));
            println!("{c}: {} waypoints reached, path {done}", m.waypoints_reached);
        }
    }
    println!("wrote {}", out.display());
    if !aborted.is_empty() {
        let names: Vec<_> = aborted.iter().map(|c| c.name()).collect();
        return Err(Failure {
            code: EXIT_ABORT,
            message: format!("simulation aborted for: {}", names.join(", ")),
        });
    }
    Ok(())
}

fn cmd_validate_gains(args: &ConfigArgs) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load_unvalidated(&args.config, &args.overrides).map_err(Failure::from_core)?;
    for check in check_gains(&cfg) {
        println!(
            "{} {:<20} {:<12} {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.rule.name(),
            check.subject,
            check.detail
        );
    }
    Ok(())
}

fn cmd_export_ftpf(args: &ConfigArgs, samples: usize, out: &Path) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(&args.config, &args.overrides).map_err(Failure::from_core)?;
    let rows = sample_envelopes(&cfg.envelope, samples).map_err(Failure::config)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    let path = out.join("ftpf.csv");
    write_ftpf_csv(&rows, create(&path)?).map_err(Failure::from_core)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            controllers,
            out,
        } => cmd_run(config, controllers, out),
        Command::ValidateGains { config } => cmd_validate_gains(config),
        Command::ExportFtpf { config, samples, out } => cmd_export_ftpf(config, *samples, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
