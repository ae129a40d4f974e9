//! Free-electron wavepackets on a periodic grid.
//!
//! Three propagators:
//!
//! - free evolution, exact in momentum space with `ω(k) = ħk²/2m`;
//! - a uniform field, exact in the gauge where the field is a vector
//!   potential: each component `e^{ikx}` of `χ` evolves with the energy
//!   `ħ²(k - q̇t)²/2m` and `ψ = e^{-iq̇tx} χ`, `q̇ = U'/ħ`;
//! - a Strang split-operator scheme for arbitrary potentials, used both for
//!   piecewise-linear cells and as an independent check of the gauge route.
//!
//! Positions run over `[-L/2, L/2)`. The grid is periodic; every propagator
//! watches the probability in guard bands at both ends and fails once it
//! exceeds [`LEAKAGE_LIMIT`].
//!
//! The particle has signed charge `q`; a field `E` gives potential energy
//! `U(x) = -qEx` and an electric potential `V(x)` gives `U = qV`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
// unused whenever std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fft::Fft;
use crate::units::{ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR};

/// Largest tolerated probability inside the guard bands.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Fraction of the box at each end treated as guard band.
pub const GUARD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QwaveError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("grid size {0} is not a power of two")]
    GridSize(usize),
    #[error("grid resolves {density:.3e} points/m, needs more than {required:.3e}")]
    Resolution { density: f64, required: f64 },
    #[error("flat spectrum needs at least one mode")]
    NoModes,
    #[error("probability {leaked:.3e} reached the guard bands at t = {time:.3e} s")]
    BoundaryContact { time: f64, leaked: f64 },
    #[error(
        "packet width {width:.3e} m exceeds a quarter of cell {cell} ({cell_width:.3e} m) at t = {time:.3e} s, centroid {centroid:.3e} m"
    )]
    Confinement {
        time: f64,
        cell: usize,
        centroid: f64,
        width: f64,
        cell_width: f64,
    },
    #[error("piecewise-linear field needs at least 2 strictly increasing nodes")]
    BadNodes,
    #[error("step count must be a positive multiple of the sample count")]
    BadSteps,
}

fn positive(name: &'static str, value: f64) -> Result<f64, QwaveError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(QwaveError::NonPositive { name, value })
    }
}

/// Periodic grid of `points` samples over `[-L/2, L/2)`.
#[derive(Debug, Clone)]
pub struct Grid {
    length: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    fft: Fft,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self, QwaveError> {
        let length = positive("grid length", length)?;
        let fft = Fft::new(points)
            .filter(|_| points >= 2)
            .ok_or(QwaveError::GridSize(points))?;
        let dx = length / points as f64;
        let dk = 2.0 * PI / length;
        let x = (0..points).map(|j| -0.5 * length + j as f64 * dx).collect();
        let k = (0..points)
            .map(|i| {
                let signed = if i < points / 2 {
                    i as f64
                } else {
                    i as f64 - points as f64
                };
                signed * dk
            })
            .collect();
        Ok(Self { length, x, k, fft })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.x.len()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.x.len() as f64
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }
}

/// Shape of the spectral weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralProfile {
    /// Amplitude `exp(-(k - k0)² / 4δk²)` on every grid mode, so `δk` is the
    /// rms spread of `|ψ̂|²`.
    Gaussian,
    /// `n_modes` equal weights spread over `[k0 - δk, k0 + δk]`, snapped to
    /// grid wavenumbers.
    Flat { n_modes: usize },
}

#[derive(Debug, Clone)]
pub struct WavepacketSpec {
    pub k0: f64,
    pub delta_k: f64,
    pub profile: SpectralProfile,
    pub grid: Grid,
    pub mass: f64,
    /// Signed charge, `-e` for an electron.
    pub charge: f64,
}

impl WavepacketSpec {
    pub fn electron(k0: f64, delta_k: f64, grid: Grid) -> Self {
        Self {
            k0,
            delta_k,
            profile: SpectralProfile::Gaussian,
            grid,
            mass: ELECTRON_MASS,
            charge: -ELEMENTARY_CHARGE,
        }
    }

    pub fn group_velocity(&self) -> f64 {
        HBAR * self.k0 / self.mass
    }
}

/// Sampled wavefunction, normalized so that `Σ |ψ|² dx = 1`.
#[derive(Debug, Clone)]
pub struct Wavepacket {
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub mass: f64,
    pub charge: f64,
}

/// Builds the packet centred at the origin.
pub fn build_packet(spec: &WavepacketSpec) -> Result<Wavepacket, QwaveError> {
    let k0 = positive("k0", spec.k0)?;
    positive("mass", spec.mass)?;
    let grid = &spec.grid;
    let delta_k = match spec.profile {
        SpectralProfile::Gaussian => positive("delta_k", spec.delta_k)?,
        SpectralProfile::Flat { .. } => spec.delta_k.max(0.0),
    };
    let density = grid.points() as f64 / grid.length;
    let required = 4.0 * (k0 + delta_k) / (2.0 * PI);
    if !(density > required) {
        return Err(QwaveError::Resolution { density, required });
    }
    let m = grid.points();
    let mut spectrum = vec![Complex64::new(0.0, 0.0); m];
    match spec.profile {
        SpectralProfile::Gaussian => {
            for (c, &k) in spectrum.iter_mut().zip(&grid.k) {
                let d = (k - k0) / delta_k;
                c.re = (-0.25 * d * d).exp();
            }
        }
        SpectralProfile::Flat { n_modes } => {
            if n_modes == 0 {
                return Err(QwaveError::NoModes);
            }
            let dk = 2.0 * PI / grid.length;
            let centre = (k0 / dk).round() as i64;
            let stride = if n_modes > 1 {
                ((2.0 * delta_k / dk) / (n_modes - 1) as f64).round().max(1.0) as i64
            } else {
                1
            };
            for j in 0..n_modes as i64 {
                let offset = 2 * j - (n_modes as i64 - 1);
                // offsets are odd for even counts; halve after scaling
                let index = centre + (offset * stride).div_euclid(2);
                spectrum[index.rem_euclid(m as i64) as usize].re = 1.0;
            }
        }
    }
    // e^{ik x_j} = e^{ik(x_j + L/2)} (-1)^i on this grid
    for (i, c) in spectrum.iter_mut().enumerate() {
        if i % 2 == 1 {
            *c = -*c;
        }
    }
    grid.fft.inverse(&mut spectrum);
    let mut packet = Wavepacket {
        grid: grid.clone(),
        psi: spectrum,
        mass: spec.mass,
        charge: spec.charge,
    };
    let norm = packet.norm().sqrt();
    for z in packet.psi.iter_mut() {
        *z /= norm;
    }
    Ok(packet)
}

impl Wavepacket {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn centroid(&self) -> f64 {
        let (num, den) = self
            .psi
            .iter()
            .zip(&self.grid.x)
            .fold((0.0, 0.0), |(n, d), (z, &x)| (n + x * z.norm_sqr(), d + z.norm_sqr()));
        num / den
    }

    /// Root-mean-square spread of `|ψ|²` about the centroid.
    pub fn rms_width(&self) -> f64 {
        let c = self.centroid();
        let (num, den) = self.psi.iter().zip(&self.grid.x).fold((0.0, 0.0), |(n, d), (z, &x)| {
            let p = z.norm_sqr();
            (n + (x - c) * (x - c) * p, d + p)
        });
        (num / den).sqrt()
    }

    /// Full width at half maximum of `|ψ|²`, linearly interpolated.
    pub fn fwhm(&self) -> f64 {
        let rho = self.density();
        let (peak, max) = rho.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );
        let half = 0.5 * max;
        let m = rho.len();
        let dx = self.grid.spacing();
        let mut right = peak;
        while right + 1 < m && rho[right + 1] >= half {
            right += 1;
        }
        let mut left = peak;
        while left > 0 && rho[left - 1] >= half {
            left -= 1;
        }
        let frac = |inside: f64, outside: f64| (inside - half) / (inside - outside);
        let r = if right + 1 < m {
            right as f64 + frac(rho[right], rho[right + 1])
        } else {
            right as f64
        };
        let l = if left > 0 {
            left as f64 - frac(rho[left], rho[left - 1])
        } else {
            left as f64
        };
        (r - l) * dx
    }

    /// `ħ⟨k⟩/m`.
    pub fn mean_velocity(&self) -> f64 {
        let mut s = self.psi.clone();
        self.grid.fft.forward(&mut s);
        let (num, den) = s
            .iter()
            .zip(&self.grid.k)
            .fold((0.0, 0.0), |(n, d), (z, &k)| (n + k * z.norm_sqr(), d + z.norm_sqr()));
        HBAR * num / (den * self.mass)
    }

    /// Probability within [`GUARD_FRACTION`] of either end of the box.
    pub fn guard_probability(&self) -> f64 {
        let band = GUARD_FRACTION * self.grid.length;
        let lo = -0.5 * self.grid.length + band;
        let hi = 0.5 * self.grid.length - band;
        self.psi
            .iter()
            .zip(&self.grid.x)
            .filter(|(_, &x)| x < lo || x >= hi)
            .map(|(z, _)| z.norm_sqr())
            .sum::<f64>()
            * self.grid.spacing()
    }

    fn check_boundary(&self, time: f64) -> Result<(), QwaveError> {
        let leaked = self.guard_probability();
        if leaked > LEAKAGE_LIMIT {
            Err(QwaveError::BoundaryContact { time, leaked })
        } else {
            Ok(())
        }
    }

    fn sample(&self, t: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            t,
            centroid: self.centroid(),
            velocity: self.mean_velocity(),
            width: self.rms_width(),
            norm: self.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub centroid: f64,
    pub velocity: f64,
    pub width: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub trajectory: Vec<TrajectoryPoint>,
    pub final_state: Wavepacket,
}

impl Propagation {
    pub fn times(&self) -> Vec<f64> {
        self.trajectory.iter().map(|p| p.t).collect()
    }

    pub fn centroids(&self) -> Vec<f64> {
        self.trajectory.iter().map(|p| p.centroid).collect()
    }
}

fn sample_times(duration: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(1);
    (0..=n).map(|i| duration * i as f64 / n as f64).collect()
}

/// Exact evolution in the gauge picture with `q̇ = U'/ħ`; `q̇ = 0` is free.
fn gauge_state(packet: &Wavepacket, spectrum: &[Complex64], t: f64, qdot: f64) -> Wavepacket {
    let c = HBAR / (2.0 * packet.mass);
    let grid = &packet.grid;
    let mut s: Vec<Complex64> = spectrum
        .iter()
        .zip(&grid.k)
        .map(|(z, &k)| {
            let phase = c * (k * k * t - k * qdot * t * t + qdot * qdot * t * t * t / 3.0);
            z * Complex64::from_polar(1.0, -phase)
        })
        .collect();
    grid.fft.inverse(&mut s);
    if qdot != 0.0 {
        for (z, &x) in s.iter_mut().zip(&grid.x) {
            *z *= Complex64::from_polar(1.0, -qdot * t * x);
        }
    }
    Wavepacket {
        grid: grid.clone(),
        psi: s,
        mass: packet.mass,
        charge: packet.charge,
    }
}

fn propagate_gauge(packet: &Wavepacket, qdot: f64, duration: f64, samples: usize) -> Result<Propagation, QwaveError> {
    let mut spectrum = packet.psi.clone();
    packet.grid.fft.forward(&mut spectrum);
    let mut trajectory = Vec::with_capacity(samples + 1);
    let mut last = packet.clone();
    for t in sample_times(duration, samples) {
        let state = gauge_state(packet, &spectrum, t, qdot);
        state.check_boundary(t)?;
        trajectory.push(state.sample(t));
        last = state;
    }
    Ok(Propagation {
        trajectory,
        final_state: last,
    })
}

/// Free evolution sampled at `samples + 1` evenly spaced times.
pub fn propagate_free(packet: &Wavepacket, duration: f64, samples: usize) -> Result<Propagation, QwaveError> {
    propagate_gauge(packet, 0.0, duration, samples)
}

/// Uniform field `E` (V/m) through the gauge construction.
pub fn propagate_uniform_field(
    packet: &Wavepacket,
    field: f64,
    duration: f64,
    samples: usize,
) -> Result<Propagation, QwaveError> {
    propagate_gauge(packet, -packet.charge * field / HBAR, duration, samples)
}

/// Uniform field `E` by split-operator evolution with `U = -qEx` on the grid.
pub fn propagate_uniform_field_direct(
    packet: &Wavepacket,
    field: f64,
    duration: f64,
    steps: usize,
    samples: usize,
) -> Result<Propagation, QwaveError> {
    let potential: Vec<f64> = packet.grid.x.iter().map(|&x| -packet.charge * field * x).collect();
    let mut log = |_: &Wavepacket, _: f64| Ok(());
    split_operator(packet, &potential, duration, steps, samples, &mut log)
}

/// Strang splitting: half potential kick, exact kinetic drift, half kick.
fn split_operator<F>(
    packet: &Wavepacket,
    potential: &[f64],
    duration: f64,
    steps: usize,
    samples: usize,
    monitor: &mut F,
) -> Result<Propagation, QwaveError>
where
    F: FnMut(&Wavepacket, f64) -> Result<(), QwaveError>,
{
    let samples = samples.max(1);
    if steps == 0 || steps % samples != 0 {
        return Err(QwaveError::BadSteps);
    }
    let dt = duration / steps as f64;
    let grid = &packet.grid;
    let half_kick: Vec<Complex64> = potential
        .iter()
        .map(|&u| Complex64::from_polar(1.0, -0.5 * u * dt / HBAR))
        .collect();
    let drift: Vec<Complex64> = grid
        .k
        .iter()
        .map(|&k| Complex64::from_polar(1.0, -HBAR * k * k * dt / (2.0 * packet.mass)))
        .collect();
    let mut state = packet.clone();
    state.check_boundary(0.0)?;
    monitor(&state, 0.0)?;
    let mut trajectory = Vec::with_capacity(samples + 1);
    trajectory.push(state.sample(0.0));
    let every = steps / samples;
    for n in 1..=steps {
        for (z, w) in state.psi.iter_mut().zip(&half_kick) {
            *z *= w;
        }
        grid.fft.forward(&mut state.psi);
        for (z, w) in state.psi.iter_mut().zip(&drift) {
            *z *= w;
        }
        grid.fft.inverse(&mut state.psi);
        for (z, w) in state.psi.iter_mut().zip(&half_kick) {
            *z *= w;
        }
        let t = n as f64 * dt;
        monitor(&state, t)?;
        if n % every == 0 {
            state.check_boundary(t)?;
            trajectory.push(state.sample(t));
        }
    }
    Ok(Propagation {
        trajectory,
        final_state: state,
    })
}

/// `‖a - e^{iφ} b‖` with the global phase `φ` chosen to minimize it.
pub fn phase_aligned_distance(a: &Wavepacket, b: &Wavepacket) -> f64 {
    let overlap: Complex64 = a.psi.iter().zip(&b.psi).map(|(x, y)| x.conj() * y).sum();
    let align = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let sq: f64 = a.psi.iter().zip(&b.psi).map(|(x, y)| (x - y * align).norm_sqr()).sum();
    (sq * a.grid.spacing()).sqrt()
}

/// Relative L² distance between `|ψ(x, t)|` and `|ψ(x - shift, 0)|`.
pub fn shape_deviation(initial: &Wavepacket, evolved: &Wavepacket, shift: f64) -> f64 {
    let grid = &initial.grid;
    let mut s = initial.psi.clone();
    grid.fft.forward(&mut s);
    for (z, &k) in s.iter_mut().zip(&grid.k) {
        *z *= Complex64::from_polar(1.0, -k * shift);
    }
    grid.fft.inverse(&mut s);
    let (num, den) = s.iter().zip(&evolved.psi).fold((0.0, 0.0), |(n, d), (f, p)| {
        let diff = p.norm() - f.norm();
        (n + diff * diff, d + f.norm_sqr())
    });
    (num / den).sqrt()
}

/// Continuous electric potential through `(x_i, V_i)`, extended linearly
/// past the end nodes. Segment `i` is cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    nodes: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self, QwaveError> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1].0 > w[0].0)) || nodes.iter().any(|n| !n.1.is_finite()) {
            return Err(QwaveError::BadNodes);
        }
        Ok(Self { nodes })
    }

    /// Single cell of constant slope `dV/dx` through the origin.
    pub fn uniform(slope: f64, half_width: f64) -> Result<Self, QwaveError> {
        Self::new(vec![
            (-half_width, -slope * half_width),
            (half_width, slope * half_width),
        ])
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let upper = self.nodes.partition_point(|n| n.0 <= x);
        upper.clamp(1, self.nodes.len() - 1) - 1
    }

    pub fn cell_width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1].0 - self.nodes[cell].0
    }

    pub fn slope(&self, cell: usize) -> f64 {
        let (a, b) = (self.nodes[cell], self.nodes[cell + 1]);
        (b.1 - a.1) / (b.0 - a.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        let c = self.cell_of(x);
        self.nodes[c].1 + self.slope(c) * (x - self.nodes[c].0)
    }
}

/// What to do when the packet outgrows its cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfinementPolicy {
    Abort,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub t: f64,
    pub cell: usize,
    pub centroid: f64,
    pub width: f64,
    pub cell_width: f64,
}

#[derive(Debug, Clone)]
pub struct CellPropagation {
    pub propagation: Propagation,
    /// One record per trajectory sample.
    pub log: Vec<CellRecord>,
    /// Steps at which the rms width exceeded a quarter of the cell width.
    pub violations: Vec<CellRecord>,
}

/// Split-operator evolution in the potential energy `U = qV(x)`.
pub fn propagate_cells(
    packet: &Wavepacket,
    field: &PiecewiseLinear,
    duration: f64,
    steps: usize,
    samples: usize,
    policy: ConfinementPolicy,
) -> Result<CellPropagation, QwaveError> {
    let potential: Vec<f64> = packet.grid.x.iter().map(|&x| packet.charge * field.value(x)).collect();
    let mut violations = Vec::new();
    let mut monitor = |state: &Wavepacket, t: f64| {
        let centroid = state.centroid();
        let cell = field.cell_of(centroid);
        let record = CellRecord {
            t,
            cell,
            centroid,
            width: state.rms_width(),
            cell_width: field.cell_width(cell),
        };
        if record.width > 0.25 * record.cell_width {
            match policy {
                ConfinementPolicy::Abort => {
                    return Err(QwaveError::Confinement {
                        time: t,
                        cell,
                        centroid,
                        width: record.width,
                        cell_width: record.cell_width,
                    })
                }
                ConfinementPolicy::Log => violations.push(record),
            }
        }
        Ok(())
    };
    let propagation = split_operator(packet, &potential, duration, steps, samples, &mut monitor)?;
    let log = propagation
        .trajectory
        .iter()
        .map(|p| {
            let cell = field.cell_of(p.centroid);
            CellRecord {
                t: p.t,
                cell,
                centroid: p.centroid,
                width: p.width,
                cell_width: field.cell_width(cell),
            }
        })
        .collect();
    Ok(CellPropagation {
        propagation,
        log,
        violations,
    })
}

/// Smallest `τ > 0` with `A τ² + B τ + C = 0`, if any.
fn first_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if c == 0.0 {
        // one root at zero; the other at -B/A
        return (a != 0.0).then(|| -b / a).filter(|&t| t > 0.0);
    }
    if a == 0.0 {
        return (b != 0.0).then(|| -c / b).filter(|&t| t > 0.0);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots
        .into_iter()
        .filter(|&t| t > 0.0)
        .fold(None, |m, t| Some(m.map_or(t, |m: f64| m.min(t))))
}

/// Exact classical motion in the same piecewise-linear potential.
///
/// Returns `(x, v)` at each of `times`, which must be non-decreasing.
pub fn classical_trajectory(
    field: &PiecewiseLinear,
    mass: f64,
    charge: f64,
    x0: f64,
    v0: f64,
    times: &[f64],
) -> Vec<(f64, f64)> {
    let cells = field.cells();
    let mut x = x0;
    let mut v = v0;
    let mut t = 0.0;
    let mut cell = field.cell_of(x0);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        loop {
            let acc = -charge * field.slope(cell) / mass;
            let remaining = target - t;
            let lo = (cell > 0).then(|| field.nodes[cell].0);
            let hi = (cell + 1 < cells).then(|| field.nodes[cell + 1].0);
            let exit_lo = lo.and_then(|b| first_positive_root(0.5 * acc, v, x - b));
            let exit_hi = hi.and_then(|b| first_positive_root(0.5 * acc, v, x - b));
            let exit = match (exit_lo, exit_hi) {
                (Some(a), Some(b)) if a <= b => Some((a, false)),
                (Some(a), None) => Some((a, false)),
                (_, Some(b)) => Some((b, true)),
                (None, None) => None,
            };
            match exit {
                Some((tau, upward)) if tau <= remaining => {
                    v += acc * tau;
                    t += tau;
                    if upward {
                        x = hi.unwrap();
                        cell += 1;
                    } else {
                        x = lo.unwrap();
                        cell -= 1;
                    }
                }
                _ => {
                    x += v * remaining + 0.5 * acc * remaining * remaining;
                    v += acc * remaining;
                    t = target;
                    break;
                }
            }
        }
        out.push((x, v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(8e-8, 2048).unwrap()
    }

    #[test]
    fn plane_wave_is_flat() {
        let spec = WavepacketSpec {
            profile: SpectralProfile::Flat { n_modes: 1 },
            ..WavepacketSpec::electron(1e10, 0.0, grid())
        };
        let p = build_packet(&spec).unwrap();
        let rho = p.density();
        let max = rho.iter().copied().fold(0.0, f64::max);
        let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max / min - 1.0 < 1e-10);
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_starts_at_origin() {
        let p = build_packet(&WavepacketSpec::electron(1e10, 5e8, grid())).unwrap();
        assert!(p.centroid().abs() < p.grid.spacing());
        // |ψ|² has standard deviation 1/(2δk)
        assert!((p.rms_width() * 2.0 * 5e8 - 1.0).abs() < 1e-6);
        assert!((p.mean_velocity() / (HBAR * 1e10 / ELECTRON_MASS) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_coarse_grid() {
        let coarse = Grid::new(8e-8, 256).unwrap();
        assert!(matches!(
            build_packet(&WavepacketSpec::electron(1e10, 5e8, coarse)),
            Err(QwaveError::Resolution { .. })
        ));
        assert!(matches!(Grid::new(1.0, 1000), Err(QwaveError::GridSize(1000))));
    }

    #[test]
    fn cells_cover_the_line() {
        let f = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]).unwrap();
        assert_eq!(f.cell_of(-5.0), 0);
        assert_eq!(f.cell_of(0.5), 0);
        assert_eq!(f.cell_of(1.0), 1);
        assert_eq!(f.cell_of(9.0), 1);
        assert_eq!(f.value(2.0), 1.0);
        assert_eq!(f.value(-1.0), -2.0);
        assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn classical_turns_around_in_a_ramp() {
        // unit mass and charge: U = V, acceleration -V'
        let f = PiecewiseLinear::new(vec![(-1.0, 0.0), (0.0, 0.0), (10.0, 10.0)]).unwrap();
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let traj = classical_trajectory(&f, 1.0, 1.0, -0.5, 2.0, &times);
        let top = traj.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        // enters at t = 0.25 with v = 2, decelerates at 1: turns at x = 2
        assert!((top - 2.0).abs() < 1e-4);
        assert!((traj[400].0 - (2.0 - 0.5 * (4.0 - 2.25) * (4.0 - 2.25))).abs() < 1e-12);
    }

    #[test]
    fn root_finder_edge_cases() {
        assert_eq!(first_positive_root(0.0, 1.0, -2.0), Some(2.0));
        assert_eq!(first_positive_root(-0.5, 1.0, 0.0), Some(2.0));
        assert_eq!(first_positive_root(1.0, 0.0, 1.0), None);
        assert_eq!(first_positive_root(1.0, 0.0, -4.0), Some(2.0));
    }
}
