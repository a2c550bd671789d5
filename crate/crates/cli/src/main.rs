use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quench_cli::config::{self, RunConfig};
use quench_cli::runner;
use quench_core::oracle;

#[derive(Parser)]
#[command(name = "quench", about = "Trapped boson-pair-plus-impurity quench engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Key-value config file (see crates/cli/src/config.rs for the schema)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset shipped with the repository
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the config's out_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent sweep points (overrides the config's workers)
    #[arg(long)]
    workers: Option<usize>,
    /// Repeatable key=value override applied after the config
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a sweep and write the output tree
    Run(ConfigArgs),
    /// Resolve and check a config without running it
    Validate(ConfigArgs),
    /// List the available presets
    Presets,
    /// Oracle maintenance
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Subcommand)]
enum OracleAction {
    /// Recompute the frozen two-boson fixture file
    Regenerate {
        /// Fixture path
        #[arg(long, default_value = "fixtures/two_boson_energies.txt")]
        out: PathBuf,
    },
}

fn load(args: &ConfigArgs) -> Result<RunConfig, String> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            let mut cfg = RunConfig::default();
            cfg.apply_text(&text).map_err(|e| format!("config {}: {e}", path.display()))?;
            cfg
        }
        (None, Some(name)) => config::preset(name)?,
        (None, None) => RunConfig::default(),
        (Some(_), Some(_)) => unreachable!("clap conflict rule"),
    };
    for ov in &args.overrides {
        let (key, value) = ov
            .split_once('=')
            .ok_or_else(|| format!("override {ov}: expected key=value"))?;
        cfg.apply(key.trim(), value)?;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.resolve();
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = match load(&args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("invalid-config {e}");
                    return ExitCode::from(2);
                }
            };
            match runner::run(&cfg) {
                Ok(outcome) => {
                    println!(
                        "completed {} point(s), {} failed, outputs in {}",
                        outcome.points_ok,
                        outcome.points_failed,
                        outcome.out_dir.display()
                    );
                    if outcome.points_failed > 0 {
                        ExitCode::from(4)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Validate(args) => {
            let cfg = match load(&args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("invalid-config {e}");
                    return ExitCode::from(2);
                }
            };
            let (errors, warnings) = cfg.validate();
            for w in &warnings {
                println!("warning {w}");
            }
            if errors.is_empty() {
                print!("{}", cfg.echo());
                ExitCode::SUCCESS
            } else {
                for e in &errors {
                    eprintln!("error {e}");
                }
                ExitCode::from(2)
            }
        }
        Command::Presets => {
            for (name, _, description) in config::PRESETS {
                println!("{name:8} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Oracle { action } => match action {
            OracleAction::Regenerate { out } => {
                let gs = [0.0, 1.0, 5.0, 25.0];
                let mut entries = Vec::new();
                for g in gs {
                    match oracle::two_boson_relative_energy(g) {
                        Ok(r) => {
                            println!("g = {g}: E_rel = {:.11e} (order {:.2})", r.energy, r.order);
                            entries.push(oracle::FixtureEntry { g, energy: r.energy });
                        }
                        Err(e) => {
                            eprintln!("oracle failed at g = {g}: {e}");
                            return ExitCode::from(3);
                        }
                    }
                }
                if let Err(e) = oracle::write_fixture(&out, &entries) {
                    eprintln!("fixture {}: {e}", out.display());
                    return ExitCode::from(3);
                }
                println!("wrote {}", out.display());
                ExitCode::SUCCESS
            }
        },
    }
}
