use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eph::commands::{self, RelaxArgs, SweepArgs, WaveArgs};
use eph::config::Config;
use eph::error::AppError;
use eph::experiments::{self, DEFAULT_SEED};
use eph::output::OutputDir;
use eph_core::lattice::Regime;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "eph",
    version,
    about = "Electron-phonon packet collisions and resistivity laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    High,
    Low,
}

#[derive(Subcommand)]
enum Command {
    /// Chain potential, mode coefficients and packet envelope.
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = commands::default_points_per_cell())]
        points_per_cell: usize,
    },
    /// Analytic against Newton collision outcomes on a velocity grid.
    Collide {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Monte Carlo relaxation of an electron ladder.
    Relax {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        levels: usize,
        #[arg(long, default_value_t = 50)]
        electrons: usize,
        #[arg(long, default_value_t = 10_000_000)]
        steps: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Bath temperature in K; default puts k_B T at a tenth of the Fermi energy.
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Forward-scattering rate against temperature.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long, default_value_t = 12)]
        points: usize,
        /// Drop the small-angle and low-temperature ceiling guards.
        #[arg(long)]
        allow_large_angle: bool,
    },
    /// Free or uniform-field wavepacket propagation.
    Wavepacket {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e10)]
        k0: f64,
        #[arg(long, default_value_t = 5e8)]
        delta_k: f64,
        /// Uniform field in V/m.
        #[arg(long, default_value_t = 0.0)]
        field: f64,
        /// Seconds; default travels a quarter of the box.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 2048)]
        grid_points: usize,
        #[arg(long, default_value_t = 8e-8)]
        grid_length: f64,
        /// Split-operator steps for the direct check; 0 skips it.
        #[arg(long, default_value_t = 400)]
        direct_steps: usize,
    },
    /// Every acceptance experiment plus a summary table.
    ReproduceAll {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn load(common: &Common) -> Result<Config, AppError> {
    match &common.config {
        Some(path) => Ok(Config::from_path(path)?),
        None => Ok(Config::default()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Potential {
            common,
            points_per_cell,
        } => {
            let config = load(&common)?;
            let mut out = OutputDir::create(&common.out)?;
            let summary = commands::potential(&config, points_per_cell, &mut out)?;
            out.write_json("potential.json", &summary)?;
            out.finish(
                "potential",
                &config,
                json!({ "points_per_cell": points_per_cell }),
                None,
            )?;
        }
        Command::Collide { common, grid } => {
            let config = load(&common)?;
            let mut out = OutputDir::create(&common.out)?;
            let s = commands::collide(&config, grid, &mut out)?;
            out.finish("collide", &config, json!({ "grid": grid }), None)?;
            if s.disagreements > 0 {
                return Err(AppError::Numeric(format!(
                    "{} of {} collisions disagree with the Newton integration",
                    s.disagreements, s.cases
                )));
            }
        }
        Command::Relax {
            common,
            levels,
            electrons,
            steps,
            seed,
            temperature,
            trials,
        } => {
            let config = load(&common)?;
            let args = RelaxArgs {
                levels,
                electrons,
                steps,
                temperature,
                trials,
                seed,
            };
            let mut out = OutputDir::create(&common.out)?;
            let s = commands::relax(&config, &args, &mut out)?;
            out.finish("relax", &config, to_json(&args), Some(seed))?;
            println!(
                "mu {:.6e} J  T_fit {:.4} K  bath {:.4} K",
                s.mu, s.t_fit, s.bath_temperature_k
            );
        }
        Command::Sweep {
            common,
            regime,
            tmin,
            tmax,
            points,
            allow_large_angle,
        } => {
            let config = load(&common)?;
            let regime = match regime {
                RegimeArg::High => Regime::HighTemperature,
                RegimeArg::Low => Regime::LowTemperature,
            };
            let defaults = SweepArgs::default_for(regime);
            let args = SweepArgs {
                tmin: tmin.unwrap_or(defaults.tmin),
                tmax: tmax.unwrap_or(defaults.tmax),
                points,
                asymptotic: !allow_large_angle,
                ..defaults
            };
            let mut out = OutputDir::create(&common.out)?;
            let r = commands::sweep(&config, &args, &mut out)?;
            out.finish("sweep", &config, to_json(&args), None)?;
            println!("{} regime slope {:.5}", r.regime, r.slope);
        }
        Command::Wavepacket {
            common,
            k0,
            delta_k,
            field,
            duration,
            samples,
            grid_points,
            grid_length,
            direct_steps,
        } => {
            let config = load(&common)?;
            let args = WaveArgs {
                k0,
                delta_k,
                field,
                duration,
                samples,
                grid_points,
                grid_length,
                direct_steps,
            };
            let mut out = OutputDir::create(&common.out)?;
            let r = commands::wavepacket(&args, &mut out)?;
            out.finish("wavepacket", &config, to_json(&args), None)?;
            println!(
                "velocity {:.6e} m/s  acceleration {:.6e} m/s^2",
                r.fitted_velocity_mps, r.fitted_acceleration_mps2
            );
        }
        Command::ReproduceAll { common, seed } => {
            let config = load(&common)?;
            let mut out = OutputDir::create(&common.out)?;
            let criteria = experiments::run_all(&config, seed, Some(&mut out));
            for c in &criteria {
                println!("{}", c.line());
            }
            out.write_csv("summary.csv", &criteria)?;
            out.finish("reproduce-all", &config, json!({}), Some(seed))?;
            let failed: Vec<String> = criteria
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} {}", c.id, c.name))
                .collect();
            if !failed.is_empty() {
                return Err(AppError::Acceptance(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
