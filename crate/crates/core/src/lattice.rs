//! Periodic lattice potentials, phonon perturbations and deformation-potential
//! packets.
//!
//! Each site carries `V(x) = V0 cos²(πx/a)` on `|x| < a/2` and nothing
//! outside. A phonon mode `m` displaces site `l` by `A_k e^{ik·la}/√n` with
//! `k = 2πm/(na)`; the intraband part of the resulting potential change is
//! governed by the cell average `a0` of the periodic factor `p(x)`.
//!
//! Conventions:
//!
//! - Lengths, masses and times are SI. Constructors taking ångström say so.
//! - The perturbation kernel is `-V0 (2π/a) sin(2πx/a)`. This is twice the
//!   slope of `V0 cos²(πx/a)`; it is the kernel for which `a0` takes the
//!   closed form `i (2V0/a) sin(mπ/n) / (1 - (m/n)²)`.
//! - [`PhononPacket::vbar0`] is stored per packet, without the `1/√n` factor
//!   of a single delocalized mode.
//! - The packet envelope `V̄0 sin²u/u` peaks at `u ≈ 1.1656` with value
//!   [`ENVELOPE_PEAK`]` · V̄0`; collision barriers use that height.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
// unused whenever std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fit::golden_section_max;
use crate::quadrature::GaussLegendre;
use crate::units::{BOLTZMANN, HBAR};

/// Maximum of `sin²u/u`, attained where `tan u = 2u`.
pub const ENVELOPE_PEAK: f64 = 0.724_611_353_776_708_5;

/// The `u > 0` abscissa of [`ENVELOPE_PEAK`].
pub const ENVELOPE_PEAK_ARG: f64 = 1.165_561_185_207_211_4;

/// Default sampling density for [`build_potential`].
pub const DEFAULT_POINTS_PER_CELL: usize = 64;

/// Below this `|u|` the envelope uses its Taylor series.
const SERIES_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("a chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("grid resolution {0} is below 16 points per lattice constant")]
    Resolution(usize),
    #[error("mode index {m} outside the allowed range {lo}..={hi}")]
    ModeOutOfRange { m: usize, lo: usize, hi: usize },
    #[error("mode index 0 has zero frequency, its equipartition amplitude is undefined")]
    DegenerateMode,
    #[error("temperature must be positive here, got {0} K")]
    ZeroTemperature(f64),
    #[error("low-temperature regime needs T < Θ_d, got T = {temperature} K with Θ_d = {debye_temperature} K")]
    RegimeViolation { temperature: f64, debye_temperature: f64 },
    #[error("phonon cutoff k0 = {k0:e} 1/m lies beyond the zone boundary π/a = {zone:e} 1/m")]
    CutoffBeyondZone { k0: f64, zone: f64 },
    #[error("no phonon mode lies below the cutoff (m0 = {0})")]
    NoModesBelowCutoff(f64),
}

fn positive(name: &'static str, value: f64) -> Result<f64, LatticeError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(LatticeError::NonPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, LatticeError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(LatticeError::Negative { name, value })
    }
}

/// A one-dimensional chain of `n` sites with spacing `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    lattice_constant: f64,
    sites: usize,
    amplitude: f64,
    ion_mass: f64,
}

impl LatticeSpec {
    /// `lattice_constant` in metres, `amplitude` (V0) in volts, `ion_mass` in kg.
    pub fn new(lattice_constant: f64, sites: usize, amplitude: f64, ion_mass: f64) -> Result<Self, LatticeError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites));
        }
        Ok(Self {
            lattice_constant: positive("lattice constant", lattice_constant)?,
            sites,
            amplitude: positive("potential amplitude", amplitude)?,
            ion_mass: positive("ion mass", ion_mass)?,
        })
    }

    pub fn from_angstrom(a_angstrom: f64, sites: usize, amplitude: f64, ion_mass: f64) -> Result<Self, LatticeError> {
        Self::new(a_angstrom * crate::units::ANGSTROM, sites, amplitude, ion_mass)
    }

    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn ion_mass(&self) -> f64 {
        self.ion_mass
    }

    /// Potential of a single site at `offset` from its centre.
    pub fn site_potential(&self, offset: f64) -> f64 {
        site_profile(self.amplitude, self.lattice_constant, offset)
    }

    /// The perturbation kernel `-V0 (2π/a) sin(2πx/a)` on the site support.
    pub fn perturbation_kernel(&self, offset: f64) -> f64 {
        let a = self.lattice_constant;
        if offset.abs() >= 0.5 * a {
            0.0
        } else {
            -self.amplitude * (2.0 * PI / a) * (2.0 * PI * offset / a).sin()
        }
    }

    /// Chain potential `U(x) = Σ_l V(x - la)`, sites at `0, a, …, (n-1)a`.
    pub fn potential(&self, x: f64) -> f64 {
        let a = self.lattice_constant;
        let nearest = (x / a).round().clamp(0.0, (self.sites - 1) as f64);
        self.site_potential(x - nearest * a)
    }

    /// Wavenumber of mode `m`: `2πm / (na)`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / (self.sites as f64 * self.lattice_constant)
    }
}

fn site_profile(amplitude: f64, a: f64, offset: f64) -> f64 {
    if offset.abs() >= 0.5 * a {
        0.0
    } else {
        let c = (PI * offset / a).cos();
        amplitude * c * c
    }
}

/// Phonon bath: temperature, Debye frequency and sound velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    temperature: f64,
    debye_frequency: f64,
    sound_velocity: f64,
}

impl BathSpec {
    /// `temperature` in K, `debye_frequency` in rad/s, `sound_velocity` in m/s.
    pub fn new(temperature: f64, debye_frequency: f64, sound_velocity: f64) -> Result<Self, LatticeError> {
        Ok(Self {
            temperature: non_negative("temperature", temperature)?,
            debye_frequency: positive("Debye frequency", debye_frequency)?,
            sound_velocity: positive("sound velocity", sound_velocity)?,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn debye_frequency(&self) -> f64 {
        self.debye_frequency
    }

    pub fn sound_velocity(&self) -> f64 {
        self.sound_velocity
    }

    /// `Θ_d = ħ ω_d / k_B`.
    pub fn debye_temperature(&self) -> f64 {
        HBAR * self.debye_frequency / BOLTZMANN
    }

    pub fn thermal_energy(&self) -> f64 {
        BOLTZMANN * self.temperature
    }

    /// Same bath at a different temperature.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self, LatticeError> {
        Self::new(temperature, self.debye_frequency, self.sound_velocity)
    }
}

/// Uniformly sampled chain potential.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    pub spacing: f64,
    pub points_per_cell: usize,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples `U(x)` over `[0, (n-1)a]` with `points_per_cell` points per
/// lattice constant.
///
/// Sample offsets from the nearest site are computed from the integer grid
/// index, so samples one lattice constant apart are bit-identical.
pub fn build_potential(spec: &LatticeSpec, points_per_cell: usize) -> Result<SampledPotential, LatticeError> {
    if points_per_cell < 16 {
        return Err(LatticeError::Resolution(points_per_cell));
    }
    let a = spec.lattice_constant;
    let h = a / points_per_cell as f64;
    let count = (spec.sites - 1) * points_per_cell + 1;
    let mut x = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let r = i % points_per_cell;
        let offset = if 2 * r <= points_per_cell {
            r as f64 * h
        } else {
            -((points_per_cell - r) as f64) * h
        };
        x.push(i as f64 * h);
        values.push(spec.site_potential(offset));
    }
    Ok(SampledPotential {
        spacing: h,
        points_per_cell,
        x,
        values,
    })
}

/// Closed-form zeroth Fourier coefficient of `p(x)` for mode `m`:
/// `a0 = i (2V0/a) sin(mπ/n) / (1 - (m/n)²)`, valid for `0 ≤ m < n`.
pub fn fourier_a0(spec: &LatticeSpec, m: usize) -> Result<Complex64, LatticeError> {
    let n = spec.sites;
    if m >= n {
        return Err(LatticeError::ModeOutOfRange { m, lo: 0, hi: n - 1 });
    }
    let r = m as f64 / n as f64;
    let value = 2.0 * spec.amplitude / spec.lattice_constant * (PI * r).sin() / (1.0 - r * r);
    Ok(Complex64::new(0.0, value))
}

/// `a0` from its defining integral `(1/a) ∫ K(x) e^{-ikx} dx` over one site,
/// evaluated by composite Gauss–Legendre quadrature.
pub fn fourier_a0_quadrature(spec: &LatticeSpec, m: usize) -> Result<Complex64, LatticeError> {
    let n = spec.sites;
    if m >= n {
        return Err(LatticeError::ModeOutOfRange { m, lo: 0, hi: n - 1 });
    }
    let a = spec.lattice_constant;
    let k = spec.wavenumber(m);
    let gl = GaussLegendre::new(24);
    let re = gl.integrate(|x| spec.perturbation_kernel(x) * (k * x).cos(), -0.5 * a, 0.5 * a, 8);
    let im = gl.integrate(|x| -spec.perturbation_kernel(x) * (k * x).sin(), -0.5 * a, 0.5 * a, 8);
    Ok(Complex64::new(re, im) / a)
}

/// A single phonon mode with its equipartition amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononMode {
    pub index: usize,
    pub wavenumber: f64,
    /// `ω_d sin(πm/n)`.
    pub frequency: f64,
    /// `sqrt(k_B T / M) / ω_k`, metres.
    pub amplitude: f64,
}

impl PhononMode {
    /// Mode `m` with `1 ≤ m ≤ n/2` at bath temperature `T > 0`.
    pub fn new(spec: &LatticeSpec, bath: &BathSpec, m: usize) -> Result<Self, LatticeError> {
        if m == 0 {
            return Err(LatticeError::DegenerateMode);
        }
        let hi = spec.sites / 2;
        if m > hi {
            return Err(LatticeError::ModeOutOfRange { m, lo: 1, hi });
        }
        let scale = displacement_scale(spec, bath)?;
        let s = (PI * m as f64 / spec.sites as f64).sin();
        let frequency = bath.debye_frequency * s;
        Ok(Self {
            index: m,
            wavenumber: spec.wavenumber(m),
            frequency,
            amplitude: scale / s,
        })
    }
}

/// Root-mean-square displacement scale `sqrt(k_B T / M) / ω_d`.
pub fn displacement_scale(spec: &LatticeSpec, bath: &BathSpec) -> Result<f64, LatticeError> {
    if bath.temperature <= 0.0 {
        return Err(LatticeError::ZeroTemperature(bath.temperature));
    }
    Ok((bath.thermal_energy() / spec.ion_mass).sqrt() / bath.debye_frequency)
}

/// Equipartition amplitude `A_k = sqrt(k_B T / M) / (ω_d sin(πm/n))`.
pub fn equipartition_amplitude(spec: &LatticeSpec, bath: &BathSpec, m: usize) -> Result<f64, LatticeError> {
    PhononMode::new(spec, bath, m).map(|mode| mode.amplitude)
}

/// High-temperature packet amplitude `V̄0 = (2V0/a) sqrt(k_B T / M) / ω_d`.
pub fn vbar0(spec: &LatticeSpec, bath: &BathSpec) -> Result<f64, LatticeError> {
    Ok(2.0 * spec.amplitude / spec.lattice_constant * displacement_scale(spec, bath)?)
}

/// Which phonons build the packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `T ≫ Θ_d`: every mode up to the zone boundary is excited.
    HighTemperature,
    /// `T ≪ Θ_d`: only modes with `ħυk < k_B T` are excited.
    LowTemperature,
}

impl Regime {
    /// High above `Θ_d`, low below.
    pub fn for_bath(bath: &BathSpec) -> Self {
        if bath.temperature >= bath.debye_temperature() {
            Regime::HighTemperature
        } else {
            Regime::LowTemperature
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::HighTemperature => "high",
            Regime::LowTemperature => "low",
        }
    }
}

/// A rigid deformation-potential packet moving at the sound velocity.
///
/// Its profile is `V̄0 sin²u / u` with `u = k_max (x - υt) / 2`; for the
/// high-temperature packet `k_max = π/a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononPacket {
    /// Amplitude `V̄0`, volts.
    pub vbar0: f64,
    /// Propagation speed `υ`, m/s.
    pub velocity: f64,
    pub lattice_constant: f64,
    /// Largest contributing wavenumber, 1/m.
    pub cutoff: f64,
    pub regime: Regime,
}

impl PhononPacket {
    /// High-temperature-shaped packet with explicit amplitude and speed.
    pub fn new(vbar0: f64, velocity: f64, lattice_constant: f64) -> Self {
        Self {
            vbar0,
            velocity,
            lattice_constant,
            cutoff: PI / lattice_constant,
            regime: Regime::HighTemperature,
        }
    }

    pub fn with_velocity(mut self, velocity: f64) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_vbar0(mut self, vbar0: f64) -> Self {
        self.vbar0 = vbar0;
        self
    }

    /// Envelope phase `u` at `(x, t)`.
    pub fn phase(&self, x: f64, t: f64) -> f64 {
        0.5 * self.cutoff * (x - self.velocity * t)
    }

    /// Traveling deformation potential in volts.
    pub fn envelope(&self, x: f64, t: f64) -> f64 {
        self.vbar0 * envelope_shape(self.phase(x, t))
    }

    /// Largest value of the envelope, `ENVELOPE_PEAK · V̄0`.
    pub fn peak(&self) -> f64 {
        ENVELOPE_PEAK * self.vbar0
    }

    /// Potential-energy barrier seen by a particle of charge `charge`.
    pub fn barrier_energy(&self, charge: f64) -> f64 {
        charge * self.peak()
    }
}

/// `sin²u / u`, with the removable singularity at `u = 0` taken as 0.
pub fn envelope_shape(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        // sin²u/u = u - u³/3 + O(u⁵)
        u - u * u * u / 3.0
    } else {
        let s = u.sin();
        s * s / u
    }
}

/// `d/du (sin²u / u)`.
pub fn envelope_shape_derivative(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        1.0 - u * u
    } else {
        let (s, c) = u.sin_cos();
        s * (2.0 * u * c - s) / (u * u)
    }
}

/// Builds the packet for `regime` from the lattice and bath.
///
/// High temperature: `V̄0 ∝ √T`, cutoff `π/a`. Low temperature: modes up to
/// `k0 = k_B T / (ħυ)` with the `1/√(n m0)` normalization, which in the
/// continuum limit gives `V̄0 = 2 V̄0_high √(k0 a / 2π) ∝ T` and cutoff `k0`.
pub fn packet_from_modes(spec: &LatticeSpec, bath: &BathSpec, regime: Regime) -> Result<PhononPacket, LatticeError> {
    let high = vbar0(spec, bath)?;
    let a = spec.lattice_constant;
    match regime {
        Regime::HighTemperature => Ok(PhononPacket::new(high, bath.sound_velocity, a)),
        Regime::LowTemperature => {
            let k0 = low_temperature_cutoff(spec, bath)?;
            Ok(PhononPacket {
                vbar0: 2.0 * high * (k0 * a / (2.0 * PI)).sqrt(),
                velocity: bath.sound_velocity,
                lattice_constant: a,
                cutoff: k0,
                regime,
            })
        }
    }
}

/// `k0 = k_B T / (ħυ)`, checked against `T < Θ_d` and the zone boundary.
pub fn low_temperature_cutoff(spec: &LatticeSpec, bath: &BathSpec) -> Result<f64, LatticeError> {
    if bath.temperature <= 0.0 {
        return Err(LatticeError::ZeroTemperature(bath.temperature));
    }
    let theta_d = bath.debye_temperature();
    if bath.temperature >= theta_d {
        return Err(LatticeError::RegimeViolation {
            temperature: bath.temperature,
            debye_temperature: theta_d,
        });
    }
    let k0 = bath.thermal_energy() / (HBAR * bath.sound_velocity);
    let zone = PI / spec.lattice_constant;
    if k0 > zone {
        return Err(LatticeError::CutoffBeyondZone { k0, zone });
    }
    Ok(k0)
}

/// Explicit superposition of phonon-mode deformation potentials,
/// `ΔU(x) = Σ_m c_m sin(k_m x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSum {
    /// `(k_m, c_m)` pairs.
    pub terms: Vec<(f64, f64)>,
    /// Cutoff wavenumber used to pick the modes.
    pub cutoff: f64,
}

/// Sums `a0(m) · A_k(m) · norm · e^{ik_m x} + c.c.` over the modes of `regime`,
/// with exact sine dispersion and exact `a0`.
pub fn synthesize_packet(spec: &LatticeSpec, bath: &BathSpec, regime: Regime) -> Result<ModeSum, LatticeError> {
    let n = spec.sites as f64;
    let (count, norm, cutoff) = match regime {
        Regime::HighTemperature => (spec.sites / 2, 1.0 / n, PI / spec.lattice_constant),
        Regime::LowTemperature => {
            let k0 = low_temperature_cutoff(spec, bath)?;
            let m0 = k0 * n * spec.lattice_constant / (2.0 * PI);
            let count = m0.floor() as usize;
            if count == 0 {
                return Err(LatticeError::NoModesBelowCutoff(m0));
            }
            (count, 1.0 / (n * m0).sqrt(), k0)
        }
    };
    let mut terms = Vec::with_capacity(count);
    for m in 1..=count {
        let a0 = fourier_a0(spec, m)?;
        let mode = PhononMode::new(spec, bath, m)?;
        // a0 = iα: iα e^{ikx} + c.c. = -2α sin(kx)
        terms.push((mode.wavenumber, -2.0 * norm * a0.im * mode.amplitude));
    }
    Ok(ModeSum { terms, cutoff })
}

impl ModeSum {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms.iter().map(|(k, c)| c * (k * x).sin()).sum()
    }

    /// Location and value of the largest `|ΔU|` for `x > 0`.
    pub fn peak_magnitude(&self) -> (f64, f64) {
        let span = 20.0 / self.cutoff;
        let samples = 4000;
        let mut best = (0.0, 0.0);
        for i in 1..=samples {
            let x = span * i as f64 / samples as f64;
            let v = self.evaluate(x).abs();
            if v > best.1 {
                best = (x, v);
            }
        }
        let h = span / samples as f64;
        golden_section_max(|x| self.evaluate(x).abs(), (best.0 - h).max(0.0), best.0 + h, h * 1e-9)
    }
}

/// Square lattice with the separable site potential `V0 cos²(πx/a) cos²(πy/a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLattice {
    lattice_constant: f64,
    sites: usize,
    amplitude: f64,
}

impl SquareLattice {
    /// Unlike [`LatticeSpec`], a zero amplitude is accepted here.
    pub fn new(lattice_constant: f64, sites: usize, amplitude: f64) -> Result<Self, LatticeError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites));
        }
        Ok(Self {
            lattice_constant: positive("lattice constant", lattice_constant)?,
            sites,
            amplitude: non_negative("potential amplitude", amplitude)?,
        })
    }

    pub fn from_chain(spec: &LatticeSpec) -> Self {
        Self {
            lattice_constant: spec.lattice_constant,
            sites: spec.sites,
            amplitude: spec.amplitude,
        }
    }

    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn site_potential(&self, x: f64, y: f64) -> f64 {
        let a = self.lattice_constant;
        site_profile(1.0, a, x) * site_profile(self.amplitude, a, y)
    }

    /// Perturbation kernel for displacements along `polarization`, for a
    /// phonon traveling along `x`.
    pub fn perturbation_kernel(&self, polarization: Polarization, x: f64, y: f64) -> f64 {
        let a = self.lattice_constant;
        if x.abs() >= 0.5 * a || y.abs() >= 0.5 * a {
            return 0.0;
        }
        let (along, across) = match polarization {
            Polarization::Longitudinal => (x, y),
            Polarization::Transverse => (y, x),
        };
        let c = (PI * across / a).cos();
        -self.amplitude * (2.0 * PI / a) * (2.0 * PI * along / a).sin() * c * c
    }
}

/// Displacement direction relative to an `x`-propagating phonon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Longitudinal,
    Transverse,
}

/// Cell average of `p(x, y)` for mode `m` of an `x`-propagating phonon,
/// by tensor-product Gauss–Legendre quadrature over one site.
pub fn cell_average_2d(spec: &SquareLattice, m: usize, polarization: Polarization) -> Result<Complex64, LatticeError> {
    let n = spec.sites;
    if m >= n {
        return Err(LatticeError::ModeOutOfRange { m, lo: 0, hi: n - 1 });
    }
    let a = spec.lattice_constant;
    let k = 2.0 * PI * m as f64 / (n as f64 * a);
    let gl = GaussLegendre::new(24);
    let h = 0.5 * a;
    let re = gl.integrate_2d(
        |x, y| spec.perturbation_kernel(polarization, x, y) * (k * x).cos(),
        (-h, h),
        (-h, h),
        4,
    );
    let im = gl.integrate_2d(
        |x, y| -spec.perturbation_kernel(polarization, x, y) * (k * x).sin(),
        (-h, h),
        (-h, h),
        4,
    );
    Ok(Complex64::new(re, im) / (a * a))
}

/// Transverse-phonon coefficient; vanishes because `sin(2πy/a)` averages to zero.
pub fn transverse_2d_a0(spec: &SquareLattice, m: usize) -> Result<Complex64, LatticeError> {
    cell_average_2d(spec, m, Polarization::Transverse)
}
