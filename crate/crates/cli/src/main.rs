use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qie_cli::args::{parse_grid, parse_tau_fb_list};
use qie_cli::commands::{emit, optimize_csv, run_csv, sweep_csv, SweepOptions};
use qie_cli::config::ScenarioConfig;
use qie_cli::validate::{run_validation, Fault};
use qie_cli::CliError;

#[derive(Parser)]
#[command(name = "qie", version, about = "Finite-time qubit information engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suites of every module
    Validate {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Energy ledger of one cycle
    Run { config: PathBuf },
    /// Maximum-power operating point, closed form and brute force
    Optimize { config: PathBuf },
    /// Reduced power and efficiency along the hot-isotherm duration
    Sweep {
        config: PathBuf,
        /// Comma-separated tau_fb/tau_circ values
        #[arg(long)]
        tau_fb_list: Option<String>,
        /// tau_h/tau_circ grid as lo:hi:n
        #[arg(long)]
        grid: Option<String>,
        /// Output CSV path (default: the config's `output`, else stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { inject_fault } => {
            let report = run_validation(inject_fault);
            emit(&report.render(), None)?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "failing suites: {}",
                    report.failed_suites().join(", ")
                )))
            }
        }
        Command::Run { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            emit(&run_csv(&cfg)?, cfg.output.as_deref())
        }
        Command::Optimize { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            emit(&optimize_csv(&cfg)?, cfg.output.as_deref())
        }
        Command::Sweep {
            config,
            tau_fb_list,
            grid,
            out,
        } => {
            let mut opts = SweepOptions::default();
            if let Some(list) = tau_fb_list {
                opts.tau_fb_ratios = parse_tau_fb_list(&list)?;
            }
            if let Some(grid) = grid {
                opts.grid = parse_grid(&grid)?;
            }
            let cfg = ScenarioConfig::load(&config)?;
            let text = sweep_csv(&cfg, &opts)?;
            emit(&text, out.as_deref().or(cfg.output.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qie: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
