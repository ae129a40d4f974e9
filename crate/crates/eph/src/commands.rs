//! Subcommand bodies. Each computes its rows, writes them through an
//! [`OutputDir`] and returns a small summary.

use eph_core::collision::{brute_force_transit, collide_1d, suggested_timestep, Electron, Geometry, OutcomeKind};
use eph_core::ensemble::{relax as relax_ensemble, EnsembleState, LevelLadder, RelaxConfig, RelaxReport};
use eph_core::fit::{linear_fit, quadratic_fit};
use eph_core::lattice::{
    build_potential, fourier_a0, fourier_a0_quadrature, packet_from_modes, BathSpec, PhononMode, PhononPacket, Regime,
    DEFAULT_POINTS_PER_CELL,
};
use eph_core::qwave::{
    build_packet, phase_aligned_distance, propagate_free, propagate_uniform_field, propagate_uniform_field_direct,
    Grid, Propagation, WavepacketSpec,
};
use eph_core::transport::{
    fit_sweep, log_spaced, sweep_point, validate_temperatures, SweepOptions, SweepResult, TransportSpec,
};
use eph_core::units::{BOLTZMANN, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::AppError;
use crate::output::OutputDir;

#[derive(Debug, Serialize)]
struct PotentialRow {
    x_m: f64,
    potential_v: f64,
}

#[derive(Debug, Serialize)]
struct ModeRow {
    m: usize,
    wavenumber_per_m: f64,
    a0_im_v_per_m: f64,
    a0_quadrature_im_v_per_m: f64,
    amplitude_m: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EnvelopeRow {
    x_m: f64,
    envelope_v: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialSummary {
    pub regime: &'static str,
    pub vbar0_v: Option<f64>,
    pub envelope_peak_v: Option<f64>,
}

/// Chain potential, mode coefficients and the packet envelope.
pub fn potential(config: &Config, points_per_cell: usize, out: &mut OutputDir) -> Result<PotentialSummary, AppError> {
    let lattice = config.lattice();
    let bath = config.bath();
    let sampled = build_potential(&lattice, points_per_cell)?;
    let rows: Vec<PotentialRow> = sampled
        .x
        .iter()
        .zip(&sampled.values)
        .map(|(&x_m, &potential_v)| PotentialRow { x_m, potential_v })
        .collect();
    out.write_csv("potential.csv", &rows)?;

    let modes = (1..=lattice.sites() / 2)
        .map(|m| {
            Ok(ModeRow {
                m,
                wavenumber_per_m: lattice.wavenumber(m),
                a0_im_v_per_m: fourier_a0(&lattice, m)?.im,
                a0_quadrature_im_v_per_m: fourier_a0_quadrature(&lattice, m)?.im,
                amplitude_m: PhononMode::new(&lattice, &bath, m).ok().map(|p| p.amplitude),
            })
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    out.write_csv("modes.csv", &modes)?;

    let regime = Regime::for_bath(&bath);
    let packet = (bath.temperature() > 0.0)
        .then(|| packet_from_modes(&lattice, &bath, regime))
        .transpose()?;
    if let Some(p) = &packet {
        let span = 40.0 * std::f64::consts::PI / p.cutoff;
        let n = 2000;
        let rows: Vec<EnvelopeRow> = (0..=n)
            .map(|i| {
                let x_m = -span + 2.0 * span * i as f64 / n as f64;
                EnvelopeRow {
                    x_m,
                    envelope_v: p.envelope(x_m, 0.0),
                }
            })
            .collect();
        out.write_csv("envelope.csv", &rows)?;
    }
    Ok(PotentialSummary {
        regime: regime.as_str(),
        vbar0_v: packet.map(|p| p.vbar0),
        envelope_peak_v: packet.map(|p| p.peak()),
    })
}

pub fn default_points_per_cell() -> usize {
    DEFAULT_POINTS_PER_CELL
}

/// Packet of the configured bath, in the regime its temperature implies.
pub fn config_packet(config: &Config) -> Result<PhononPacket, AppError> {
    let bath = config.bath();
    Ok(packet_from_modes(&config.lattice(), &bath, Regime::for_bath(&bath))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct CollisionRow {
    pub electron_velocity_mps: f64,
    pub packet_velocity_mps: f64,
    pub geometry: &'static str,
    pub kinetic_over_barrier: f64,
    pub analytic: &'static str,
    pub newton: &'static str,
    pub in_boundary_band: bool,
    pub agree: bool,
    pub velocity_out_analytic_mps: f64,
    pub velocity_out_newton_mps: f64,
    pub delta_e_electron_j: f64,
    pub delta_e_phonon_j: f64,
    pub energy_drift: f64,
}

/// Half-width of the excluded band around the threshold, relative to the barrier.
pub const BOUNDARY_BAND: f64 = 0.005;

/// Analytic against Newton classification on a `grid × grid` lattice of
/// electron speeds `0.5 .. 1.5` and packet speeds `0 .. 0.25` times the
/// threshold speed `sqrt(2 barrier / m)`, both geometries.
pub fn collision_grid(packet: &PhononPacket, grid: usize) -> Result<Vec<CollisionRow>, AppError> {
    if grid < 2 {
        return Err(AppError::Input(format!(
            "collision grid needs at least 2 points per axis, got {grid}"
        )));
    }
    let barrier = packet.barrier_energy(ELEMENTARY_CHARGE);
    let v_th = (2.0 * barrier / ELECTRON_MASS).sqrt();
    let cells: Vec<(f64, f64, Geometry)> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .flat_map(|(i, j)| {
            let v = v_th * (0.5 + i as f64 / (grid - 1) as f64);
            let speed = 0.25 * v_th * j as f64 / (grid - 1) as f64;
            [(v, speed, Geometry::HeadOn), (v, speed, Geometry::CoMoving)]
        })
        .filter(|&(v, speed, g)| g == Geometry::HeadOn || v > speed)
        .collect();
    cells
        .par_iter()
        .map(|&(v, speed, geometry)| {
            let p = packet.with_velocity(speed);
            let e = Electron::new(v);
            let analytic = collide_1d(&e, &p, geometry)?;
            let newton = brute_force_transit(&e, &p, geometry, suggested_timestep(&e, &p, geometry))?;
            let ratio = 0.5 * e.mass * analytic.relative_speed * analytic.relative_speed / barrier;
            let in_band = (ratio - 1.0).abs() <= BOUNDARY_BAND;
            let same_kind = analytic.kind == newton.outcome.kind;
            let same_velocity = (newton.outcome.velocity_out - analytic.velocity_out).abs() <= 1e-6 * v;
            let bookkeeping = analytic.delta_e_electron + analytic.delta_e_phonon == 0.0;
            Ok(CollisionRow {
                electron_velocity_mps: v,
                packet_velocity_mps: speed,
                geometry: geometry.as_str(),
                kinetic_over_barrier: ratio,
                analytic: analytic.kind.as_str(),
                newton: newton.outcome.kind.as_str(),
                in_boundary_band: in_band,
                agree: in_band || (same_kind && same_velocity && bookkeeping),
                velocity_out_analytic_mps: analytic.velocity_out,
                velocity_out_newton_mps: newton.outcome.velocity_out,
                delta_e_electron_j: analytic.delta_e_electron,
                delta_e_phonon_j: analytic.delta_e_phonon,
                energy_drift: newton.energy_drift,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CollideSummary {
    pub barrier_j: f64,
    pub cases: usize,
    pub in_band: usize,
    pub disagreements: usize,
    pub rebounds: usize,
    pub max_energy_drift: f64,
}

pub fn collide(config: &Config, grid: usize, out: &mut OutputDir) -> Result<CollideSummary, AppError> {
    let packet = config_packet(config)?;
    let rows = collision_grid(&packet, grid)?;
    out.write_csv("collisions.csv", &rows)?;
    let summary = CollideSummary {
        barrier_j: packet.barrier_energy(ELEMENTARY_CHARGE),
        cases: rows.len(),
        in_band: rows.iter().filter(|r| r.in_boundary_band).count(),
        disagreements: rows.iter().filter(|r| !r.agree).count(),
        rebounds: rows
            .iter()
            .filter(|r| r.analytic == OutcomeKind::Rebounded.as_str())
            .count(),
        max_energy_drift: rows.iter().map(|r| r.energy_drift).fold(0.0, f64::max),
    };
    out.write_json("collide.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RelaxArgs {
    pub levels: usize,
    pub electrons: usize,
    pub steps: u64,
    /// Bath temperature; `None` puts `k_B T` at a tenth of the Fermi energy.
    pub temperature: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl RelaxArgs {
    pub fn acceptance(seed: u64) -> Self {
        Self {
            levels: 200,
            electrons: 50,
            steps: 10_000_000,
            temperature: None,
            trials: 1,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialFit {
    pub trial: usize,
    pub mu_j: f64,
    pub t_fit_k: f64,
    pub residual: f64,
    pub occupancy_at_mu: f64,
    pub detailed_balance_deviation: f64,
    pub pairs_checked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxSummary {
    pub bath_temperature_k: f64,
    pub fermi_energy_j: f64,
    pub regime: &'static str,
    pub mu: f64,
    pub t_fit: f64,
    pub residual: f64,
    pub occupancy_at_mu: f64,
    pub detailed_balance_deviation: f64,
    pub trials: Vec<TrialFit>,
}

#[derive(Debug, Serialize)]
struct OccupancyRow {
    level: usize,
    energy_j: f64,
    occupancy: f64,
}

#[derive(Debug, Serialize)]
struct BalanceRow {
    trial: usize,
    lower: usize,
    energy_gap_j: f64,
    ups: u64,
    downs: u64,
    measured_ratio: f64,
    expected_ratio: f64,
}

#[derive(Debug, Serialize)]
struct EntropyRow {
    trial: usize,
    window: usize,
    entropy: f64,
}

/// Fermi energy of the ladder: the top of the filled ground state.
pub fn ladder_fermi_energy(ladder: &LevelLadder, electrons: usize) -> f64 {
    ladder.energy(electrons.saturating_sub(1) / 2)
}

/// Runs independent trials on disjoint random streams of one seed.
pub fn relax_trials(config: &Config, args: &RelaxArgs) -> Result<(BathSpec, Vec<RelaxReport>), AppError> {
    let ladder = LevelLadder::electrons(args.levels, config.sound_velocity)?;
    let fermi = ladder_fermi_energy(&ladder, args.electrons);
    let temperature = args.temperature.unwrap_or(0.1 * fermi / BOLTZMANN);
    let bath = BathSpec::new(temperature, config.omega_d, config.sound_velocity)?;
    let packet = packet_from_modes(&config.lattice(), &bath, Regime::for_bath(&bath))?;
    let base = EnsembleState::ground_state(ladder, args.electrons, args.seed)?;
    let reports = (0..args.trials.max(1))
        .into_par_iter()
        .map(|trial| {
            let mut state = base.clone().with_stream(trial as u64);
            relax_ensemble(&mut state, &bath, &packet, &RelaxConfig::new(args.steps))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((bath, reports))
}

pub fn relax(config: &Config, args: &RelaxArgs, out: &mut OutputDir) -> Result<RelaxSummary, AppError> {
    let (bath, reports) = relax_trials(config, args)?;
    let ladder = LevelLadder::electrons(args.levels, config.sound_velocity)?;
    let n = reports.len() as f64;
    let energies = reports[0].energies.clone();
    let occupancy: Vec<f64> = (0..energies.len())
        .map(|j| reports.iter().map(|r| r.occupancy[j]).sum::<f64>() / n)
        .collect();
    let rows: Vec<OccupancyRow> = energies
        .iter()
        .zip(&occupancy)
        .enumerate()
        .map(|(level, (&energy_j, &occupancy))| OccupancyRow {
            level,
            energy_j,
            occupancy,
        })
        .collect();
    out.write_csv("occupancy.csv", &rows)?;

    let mut balance = Vec::new();
    let mut entropy = Vec::new();
    for (trial, r) in reports.iter().enumerate() {
        balance.extend(r.pairs.iter().filter(|p| p.ups + p.downs > 0).map(|p| BalanceRow {
            trial,
            lower: p.lower,
            energy_gap_j: p.energy_gap,
            ups: p.ups,
            downs: p.downs,
            measured_ratio: p.measured_ratio,
            expected_ratio: p.expected_ratio,
        }));
        entropy.extend(
            r.window_entropy
                .iter()
                .enumerate()
                .map(|(window, &entropy)| EntropyRow { trial, window, entropy }),
        );
    }
    out.write_csv("detailed_balance.csv", &balance)?;
    out.write_csv("entropy.csv", &entropy)?;

    let mu0 = reports.iter().map(|r| r.fit.mu).sum::<f64>() / n;
    let kt0 = reports.iter().map(|r| r.fit.kt).sum::<f64>() / n;
    let pooled = eph_core::fit::fit_fermi_dirac(&energies, &occupancy, mu0, kt0)?;
    let trials: Vec<TrialFit> = reports
        .iter()
        .enumerate()
        .map(|(trial, r)| TrialFit {
            trial,
            mu_j: r.fit.mu,
            t_fit_k: r.fitted_temperature,
            residual: r.fit.residual,
            occupancy_at_mu: r.occupancy_at_mu,
            detailed_balance_deviation: r.detailed_balance_deviation,
            pairs_checked: r.pairs_checked,
        })
        .collect();
    let summary = RelaxSummary {
        bath_temperature_k: bath.temperature(),
        fermi_energy_j: ladder_fermi_energy(&ladder, args.electrons),
        regime: Regime::for_bath(&bath).as_str(),
        mu: pooled.mu,
        t_fit: pooled.kt / BOLTZMANN,
        residual: pooled.residual,
        occupancy_at_mu: interpolate(&energies, &occupancy, pooled.mu),
        detailed_balance_deviation: trials
            .iter()
            .map(|t| t.detailed_balance_deviation)
            .fold(f64::NAN, f64::max),
        trials,
    };
    out.write_json("relax.json", &summary)?;
    Ok(summary)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v < x);
    if i == 0 {
        return ys[0];
    }
    if i == xs.len() {
        return ys[ys.len() - 1];
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepArgs {
    #[serde(serialize_with = "regime_name")]
    pub regime: Regime,
    pub tmin: f64,
    pub tmax: f64,
    pub points: usize,
    /// Keep `θ0 < 0.3` and low temperatures below `Θ_d / 10`.
    pub asymptotic: bool,
}

fn regime_name<S: serde::Serializer>(r: &Regime, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(r.as_str())
}

impl SweepArgs {
    pub fn default_for(regime: Regime) -> Self {
        let (tmin, tmax) = match regime {
            Regime::HighTemperature => (100.0, 1000.0),
            Regime::LowTemperature => (0.5, 5.0),
        };
        Self {
            regime,
            tmin,
            tmax,
            points: 12,
            asymptotic: true,
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepRow {
    temperature_k: f64,
    theta0_rad: f64,
    rate_au: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub regime: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub r_squared: f64,
    pub max_theta0_rad: f64,
    pub fermi_velocity_mps: f64,
    pub debye_temperature_k: f64,
}

/// Sweep points evaluated in parallel, fitted in temperature order.
pub fn run_sweep(config: &Config, args: &SweepArgs) -> Result<SweepResult, AppError> {
    let options = if args.asymptotic {
        SweepOptions::asymptotic()
    } else {
        SweepOptions::default()
    };
    let temperatures = log_spaced(args.tmin, args.tmax, args.points);
    validate_temperatures(&temperatures, &options)?;
    let bath = config.bath().at_temperature(args.tmin)?;
    let template = TransportSpec::new(config.lattice(), bath, config.fermi_velocity, args.regime)?;
    let points = temperatures
        .par_iter()
        .map(|&t| sweep_point(&template, t, &options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_sweep(args.regime, points)?)
}

pub fn sweep(config: &Config, args: &SweepArgs, out: &mut OutputDir) -> Result<SweepReport, AppError> {
    let result = run_sweep(config, args)?;
    let name = args.regime.as_str();
    let rows: Vec<SweepRow> = result
        .points
        .iter()
        .map(|p| SweepRow {
            temperature_k: p.temperature,
            theta0_rad: p.theta0,
            rate_au: p.rate,
        })
        .collect();
    out.write_csv(&format!("sweep_{name}.csv"), &rows)?;
    let report = SweepReport {
        regime: name,
        slope: result.fit.slope,
        intercept: result.fit.intercept,
        residual: result.fit.residual,
        r_squared: result.fit.r_squared,
        max_theta0_rad: result.points.iter().map(|p| p.theta0).fold(0.0, f64::max),
        fermi_velocity_mps: config.fermi_velocity,
        debye_temperature_k: config.bath().debye_temperature(),
    };
    out.write_json(&format!("sweep_{name}.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveArgs {
    pub k0: f64,
    pub delta_k: f64,
    /// Uniform field in V/m; zero for free propagation.
    pub field: f64,
    /// Seconds; `None` lets the packet travel a quarter of the box.
    pub duration: Option<f64>,
    pub samples: usize,
    pub grid_points: usize,
    pub grid_length: f64,
    /// Split-operator steps for the direct cross-check; 0 skips it.
    pub direct_steps: usize,
}

impl Default for WaveArgs {
    fn default() -> Self {
        Self {
            k0: 1e10,
            delta_k: 5e8,
            field: 0.0,
            duration: None,
            samples: 40,
            grid_points: 2048,
            grid_length: 8e-8,
            direct_steps: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveReport {
    pub group_velocity_mps: f64,
    pub fitted_velocity_mps: f64,
    pub expected_acceleration_mps2: f64,
    pub fitted_acceleration_mps2: f64,
    pub gauge_direct_l2: Option<f64>,
    pub max_norm_error: f64,
    pub duration_s: f64,
}

#[derive(Debug, Serialize)]
struct TrajectoryRow {
    t_s: f64,
    centroid_m: f64,
    velocity_mps: f64,
}

#[derive(Debug, Serialize)]
struct DensityRow {
    x_m: f64,
    probability_density_per_m: f64,
}

pub struct WaveRun {
    pub report: WaveReport,
    pub gauge: Propagation,
}

pub fn run_wavepacket(args: &WaveArgs) -> Result<WaveRun, AppError> {
    let grid = Grid::new(args.grid_length, args.grid_points)?;
    let spec = WavepacketSpec::electron(args.k0, args.delta_k, grid);
    let v_g = spec.group_velocity();
    let packet = build_packet(&spec)?;
    let duration = args.duration.unwrap_or(0.25 * args.grid_length / v_g);
    let gauge = if args.field == 0.0 {
        propagate_free(&packet, duration, args.samples)?
    } else {
        propagate_uniform_field(&packet, args.field, duration, args.samples)?
    };
    let times = gauge.times();
    let centroids = gauge.centroids();
    let fitted_velocity = linear_fit(&times, &centroids)?.slope;
    let [_, c1, c2] = quadratic_fit(&times, &centroids)?;
    let gauge_direct_l2 = if args.direct_steps > 0 {
        let steps = args.direct_steps.div_ceil(args.samples.max(1)) * args.samples.max(1);
        let direct = propagate_uniform_field_direct(&packet, args.field, duration, steps, args.samples)?;
        Some(phase_aligned_distance(&gauge.final_state, &direct.final_state))
    } else {
        None
    };
    let report = WaveReport {
        group_velocity_mps: v_g,
        fitted_velocity_mps: if args.field == 0.0 { fitted_velocity } else { c1 },
        expected_acceleration_mps2: -ELEMENTARY_CHARGE * args.field / ELECTRON_MASS,
        fitted_acceleration_mps2: 2.0 * c2,
        gauge_direct_l2,
        max_norm_error: gauge
            .trajectory
            .iter()
            .map(|p| (p.norm - 1.0).abs())
            .fold(0.0, f64::max),
        duration_s: duration,
    };
    Ok(WaveRun { report, gauge })
}

pub fn wavepacket(args: &WaveArgs, out: &mut OutputDir) -> Result<WaveReport, AppError> {
    let run = run_wavepacket(args)?;
    write_wave(&run, "", out)?;
    Ok(run.report)
}

/// Trajectory, final density and report, with file names prefixed by `tag_`
/// when `tag` is not empty.
pub fn write_wave(run: &WaveRun, tag: &str, out: &mut OutputDir) -> Result<(), AppError> {
    let prefix = if tag.is_empty() {
        String::new()
    } else {
        format!("{tag}_")
    };
    let rows: Vec<TrajectoryRow> = run
        .gauge
        .trajectory
        .iter()
        .map(|p| TrajectoryRow {
            t_s: p.t,
            centroid_m: p.centroid,
            velocity_mps: p.velocity,
        })
        .collect();
    out.write_csv(&format!("{prefix}trajectory.csv"), &rows)?;
    let state = &run.gauge.final_state;
    let density: Vec<DensityRow> = state
        .grid
        .positions()
        .iter()
        .zip(state.density())
        .map(|(&x_m, p)| DensityRow {
            x_m,
            probability_density_per_m: p,
        })
        .collect();
    out.write_csv(&format!("{prefix}density.csv"), &density)?;
    out.write_json(&format!("{prefix}wavepacket.json"), &run.report)
}

/// `ħ k / m` for an electron.
pub fn electron_group_velocity(k: f64) -> f64 {
    HBAR * k / ELECTRON_MASS
}
