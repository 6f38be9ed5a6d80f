//! Scenario-driven CLI: every subcommand reads a scenario file, evaluates
//! one analysis, and writes CSV to the scenario's output path (or --out,
//! or stdout with `--out -`). Exit codes: 0 success, 2 scenario/usage
//! problems, 3 numerical failures, 4 failed validation gate.

use std::io::Write;
use std::path::PathBuf;

use altilink::commands::{
    cmd_config_space, cmd_fit_alpha, cmd_optimal_altitude, cmd_outage_curve, cmd_power_sweep,
    cmd_validate, DiskRadius, McOverrides,
};
use altilink::error::{exit_code, Error};
use altilink::scenario::Scenario;
use altilink::Strategy;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "altilink",
    version,
    about = "UAV link outage, coverage and power allocation with ground relays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (see scenarios/ for the format)
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path; overrides the scenario's [output] path. `-` writes
    /// to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_disk(s: &str) -> Result<DiskRadius, String> {
    if s == "auto" {
        return Ok(DiskRadius::Auto);
    }
    match s.parse::<f64>() {
        Ok(r) if r > 0.0 => Ok(DiskRadius::Fixed(r)),
        _ => Err(format!("expected a positive radius in meters or `auto`, got `{s}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability vs altitude at the sweep's fixed ground distance
    OutageCurve {
        #[command(flatten)]
        io: ScenarioArgs,
        /// Strategy used when sizing the relay disk in `auto` mode
        #[arg(long, default_value = "cc")]
        strategy: Strategy,
        /// Relay disk radius in meters, or `auto` for the per-altitude
        /// coverage fixed point
        #[arg(long, value_parser = parse_disk)]
        disk_radius: Option<DiskRadius>,
    },
    /// Optimal elevation angle and altitude vs ground distance (direct link)
    OptimalAltitude {
        #[command(flatten)]
        io: ScenarioArgs,
    },
    /// (coverage radius, altitude) boundary at the outage target, for ξ and 10ξ
    ConfigSpace {
        #[command(flatten)]
        io: ScenarioArgs,
        #[arg(long, default_value = "dc")]
        strategy: Strategy,
        /// Use the closed-form piecewise inverse instead of root-finding
        #[arg(long)]
        approx_inverse: bool,
    },
    /// Coverage radius over altitude × power-share grid, optimum appended
    PowerSweep {
        #[command(flatten)]
        io: ScenarioArgs,
        #[arg(long, default_value = "cc")]
        strategy: Strategy,
    },
    /// Analytic-vs-Monte-Carlo gate over the [validate] grid
    Validate {
        #[command(flatten)]
        io: ScenarioArgs,
        /// Override [mc] trials
        #[arg(long)]
        trials: Option<u64>,
        /// Override [mc] seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override [relays] disk_radius (meters)
        #[arg(long, value_parser = parse_disk)]
        disk_radius: Option<DiskRadius>,
    },
    /// Fit the angle-dependent path-loss slope from excess-loss parameters
    FitAlpha {
        /// Carrier frequency in Hz
        #[arg(long)]
        freq_hz: f64,
        /// Excess loss on line-of-sight links (dB)
        #[arg(long)]
        sigma_los_db: f64,
        /// Excess loss on non-line-of-sight links (dB)
        #[arg(long)]
        sigma_nlos_db: f64,
        /// Aggregate link-budget constant the fit is anchored to (dB)
        #[arg(long)]
        a_db: f64,
        /// Smallest fitting distance (m, must exceed 1)
        #[arg(long, default_value_t = 100.0)]
        d_min: f64,
        /// Largest fitting distance (m)
        #[arg(long, default_value_t = 10_000.0)]
        d_max: f64,
        /// Number of fitting distances
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Output CSV path; stdout by default
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(csv: &str, out: Option<&PathBuf>, fallback: Option<&str>) -> Result<(), Error> {
    let target = match out {
        Some(p) => p.clone(),
        None => match fallback {
            Some(p) => PathBuf::from(p),
            None => PathBuf::from("-"),
        },
    };
    if target.as_os_str() == "-" {
        std::io::stdout().write_all(csv.as_bytes())?;
    } else {
        std::fs::write(&target, csv)?;
        eprintln!("wrote {}", target.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::OutageCurve { io, strategy, disk_radius } => {
            let sc = Scenario::parse_file(&io.scenario)?;
            let csv = cmd_outage_curve(&sc, strategy, disk_radius.unwrap_or(DiskRadius::Scenario))?;
            write_output(&csv, io.out.as_ref(), Some(&sc.output.path))
        }
        Command::OptimalAltitude { io } => {
            let sc = Scenario::parse_file(&io.scenario)?;
            let csv = cmd_optimal_altitude(&sc)?;
            write_output(&csv, io.out.as_ref(), Some(&sc.output.path))
        }
        Command::ConfigSpace { io, strategy, approx_inverse } => {
            let sc = Scenario::parse_file(&io.scenario)?;
            let csv = cmd_config_space(&sc, strategy, approx_inverse)?;
            write_output(&csv, io.out.as_ref(), Some(&sc.output.path))
        }
        Command::PowerSweep { io, strategy } => {
            let sc = Scenario::parse_file(&io.scenario)?;
            let csv = cmd_power_sweep(&sc, strategy)?;
            write_output(&csv, io.out.as_ref(), Some(&sc.output.path))
        }
        Command::Validate { io, trials, seed, disk_radius } => {
            let sc = Scenario::parse_file(&io.scenario)?;
            let run = cmd_validate(
                &sc,
                McOverrides { trials, seed },
                disk_radius.unwrap_or(DiskRadius::Scenario),
            )?;
            write_output(&run.csv, io.out.as_ref(), Some(&sc.output.path))?;
            if run.gate_passed {
                eprintln!("validation passed: max |z| = {:.3}", run.max_abs_z);
                Ok(())
            } else {
                Err(Error::ValidationGate(format!(
                    "max |z| = {:.3} exceeds {}",
                    run.max_abs_z,
                    altilink::commands::Z_GATE
                )))
            }
        }
        Command::FitAlpha {
            freq_hz,
            sigma_los_db,
            sigma_nlos_db,
            a_db,
            d_min,
            d_max,
            points,
            out,
        } => {
            let csv = cmd_fit_alpha(freq_hz, sigma_los_db, sigma_nlos_db, a_db, d_min, d_max, points)?;
            write_output(&csv, out.as_ref(), None)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
