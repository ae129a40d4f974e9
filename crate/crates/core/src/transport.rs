//! Critical scattering angle, forward-scattering rate and temperature sweeps.
//!
//! An electron at the Fermi velocity meets tides from all directions. Only
//! the velocity component normal to a tide counts against the barrier, so
//! scattering happens for incidence angles below `θ0` with
//! `½ m v_F² sin²θ0 = barrier`. Each scattering event reverses the normal
//! component, changing the forward velocity by the factor `1 - cos 2θ`.
//! Weighting by the number of modes on a sphere of radius `R` gives
//!
//! ```text
//! rate = ∫_0^θ0 (1 - cos 2θ) 2π R³ sin θ dθ = 4π R³ (2/3 - cos θ0 + cos³θ0 / 3)
//! ```
//!
//! High above `Θ_d` the barrier grows as `√T` at fixed `R = π/a`, so the rate
//! is linear in `T`. Far below it both the barrier and `R = k0` grow as `T`,
//! giving `T⁵`. Rates are in arbitrary units (`R` in 1/m, cubed).

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::f64::consts::PI;
// unused whenever std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fit::{power_law_fit, FitError, LinearFit};
use crate::lattice::{packet_from_modes, BathSpec, LatticeError, LatticeSpec, PhononPacket, Regime};
use crate::units::{ELECTRON_MASS, ELEMENTARY_CHARGE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("Fermi velocity must be positive, got {0}")]
    NonPositiveVelocity(f64),
    #[error("T = {temperature} K is outside the {regime} regime (Θ_d = {debye_temperature} K, limit {limit} K)")]
    RegimeViolation {
        regime: &'static str,
        temperature: f64,
        debye_temperature: f64,
        limit: f64,
    },
    #[error("every angle scatters at T = {0} K (θ0 saturated at π/2)")]
    Saturated(f64),
    #[error("θ0 = {theta0} rad at T = {temperature} K exceeds the small-angle limit {limit} rad")]
    LargeAngle { temperature: f64, theta0: f64, limit: f64 },
    #[error("sweep needs at least {required} temperatures, got {got}")]
    TooFewPoints { required: usize, got: usize },
    #[error("sweep spans {decades} decades, at least {required} required")]
    NarrowRange { decades: f64, required: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Electron at the Fermi surface facing the packet of one bath temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportSpec {
    fermi_velocity: f64,
    mass: f64,
    charge: f64,
    lattice: LatticeSpec,
    bath: BathSpec,
    regime: Regime,
    packet: PhononPacket,
}

impl TransportSpec {
    /// Checks that `bath` lies in `regime`: above `Θ_d` for high, below for low.
    pub fn new(
        lattice: LatticeSpec,
        bath: BathSpec,
        fermi_velocity: f64,
        regime: Regime,
    ) -> Result<Self, TransportError> {
        if !(fermi_velocity > 0.0) {
            return Err(TransportError::NonPositiveVelocity(fermi_velocity));
        }
        let theta_d = bath.debye_temperature();
        let t = bath.temperature();
        let ok = match regime {
            Regime::HighTemperature => t > theta_d,
            Regime::LowTemperature => t < theta_d,
        };
        if !ok {
            return Err(TransportError::RegimeViolation {
                regime: regime.as_str(),
                temperature: t,
                debye_temperature: theta_d,
                limit: theta_d,
            });
        }
        let packet = packet_from_modes(&lattice, &bath, regime)?;
        Ok(Self {
            fermi_velocity,
            mass: ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
            lattice,
            bath,
            regime,
            packet,
        })
    }

    /// Same electron and lattice at another temperature.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self, TransportError> {
        let bath = self.bath.at_temperature(temperature)?;
        Self::new(self.lattice, bath, self.fermi_velocity, self.regime)
    }

    pub fn fermi_velocity(&self) -> f64 {
        self.fermi_velocity
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn packet(&self) -> &PhononPacket {
        &self.packet
    }

    /// Mode-sphere radius: `π/a` high, `k0` low.
    pub fn radius(&self) -> f64 {
        self.packet.cutoff
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.fermi_velocity * self.fermi_velocity
    }

    pub fn barrier_energy(&self) -> f64 {
        self.packet.barrier_energy(self.charge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta0 {
    pub angle: f64,
    /// The barrier is at least the full kinetic energy; every angle scatters.
    pub saturated: bool,
}

/// `θ0 = arcsin √(barrier / kinetic)`, clamped at `π/2`.
pub fn theta0_from_energies(barrier: f64, kinetic: f64) -> Theta0 {
    let ratio = barrier / kinetic;
    if ratio >= 1.0 {
        Theta0 {
            angle: FRAC_PI_2,
            saturated: ratio > 1.0,
        }
    } else {
        Theta0 {
            angle: ratio.max(0.0).sqrt().asin(),
            saturated: false,
        }
    }
}

pub fn theta0(spec: &TransportSpec) -> Theta0 {
    theta0_from_energies(spec.barrier_energy(), spec.kinetic_energy())
}

/// Integrand of the forward-scattering rate, `(1 - cos 2θ) 2π R³ sin θ`.
pub fn forward_rate_integrand(theta: f64, radius: f64) -> f64 {
    (1.0 - (2.0 * theta).cos()) * 2.0 * PI * radius.powi(3) * theta.sin()
}

/// Closed form of the integral of [`forward_rate_integrand`] over `[0, θ0]`.
pub fn forward_rate(theta0: f64, radius: f64) -> f64 {
    // 2/3 - c + c³/3 = (1 - c)²(2 + c)/3, with 1 - c = 2 sin²(θ0/2) to keep
    // the θ0⁴ behaviour free of cancellation
    let s = (0.5 * theta0).sin();
    let one_minus_c = 2.0 * s * s;
    let c = theta0.cos();
    4.0 * PI * radius.powi(3) * one_minus_c * one_minus_c * (2.0 + c) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub temperature: f64,
    pub theta0: f64,
    pub saturated: bool,
    pub rate: f64,
    pub radius: f64,
    pub vbar0: f64,
}

pub fn evaluate(spec: &TransportSpec) -> RateResult {
    let t0 = theta0(spec);
    let radius = spec.radius();
    RateResult {
        temperature: spec.bath.temperature(),
        theta0: t0.angle,
        saturated: t0.saturated,
        rate: forward_rate(t0.angle, radius),
        radius,
        vbar0: spec.packet.vbar0,
    }
}

/// Guards applied to a temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub min_points: usize,
    pub min_decades: f64,
    /// Reject points with `θ0` above this angle.
    pub max_theta0: Option<f64>,
    /// Low-regime temperatures must stay below this fraction of `Θ_d`.
    pub low_ceiling: f64,
}

impl SweepOptions {
    /// Bounds used when the fitted exponent is to be compared with its
    /// asymptotic value.
    pub fn asymptotic() -> Self {
        Self {
            min_points: 8,
            min_decades: 1.0,
            max_theta0: Some(0.3),
            low_ceiling: 0.1,
        }
    }
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            min_points: 8,
            min_decades: 1.0,
            max_theta0: None,
            low_ceiling: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub regime: Regime,
    pub points: Vec<RateResult>,
    /// Fit of `ln rate` against `ln T`; the slope is the exponent.
    pub fit: LinearFit,
}

/// Checks point count and span of a temperature list.
pub fn validate_temperatures(temperatures: &[f64], options: &SweepOptions) -> Result<(), TransportError> {
    if temperatures.len() < options.min_points {
        return Err(TransportError::TooFewPoints {
            required: options.min_points,
            got: temperatures.len(),
        });
    }
    let lo = temperatures.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = temperatures.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decades = if lo > 0.0 { (hi / lo).log10() } else { 0.0 };
    if !(decades >= options.min_decades * (1.0 - 1e-12)) {
        return Err(TransportError::NarrowRange {
            decades,
            required: options.min_decades,
        });
    }
    Ok(())
}

/// Evaluates one sweep temperature under the guards of `options`.
pub fn sweep_point(
    template: &TransportSpec,
    temperature: f64,
    options: &SweepOptions,
) -> Result<RateResult, TransportError> {
    let spec = template.at_temperature(temperature)?;
    if spec.regime == Regime::LowTemperature {
        let limit = options.low_ceiling * spec.bath.debye_temperature();
        if !(temperature < limit) {
            return Err(TransportError::RegimeViolation {
                regime: spec.regime.as_str(),
                temperature,
                debye_temperature: spec.bath.debye_temperature(),
                limit,
            });
        }
    }
    let point = evaluate(&spec);
    if point.saturated || point.theta0 >= FRAC_PI_2 {
        return Err(TransportError::Saturated(temperature));
    }
    if let Some(limit) = options.max_theta0 {
        if point.theta0 >= limit {
            return Err(TransportError::LargeAngle {
                temperature,
                theta0: point.theta0,
                limit,
            });
        }
    }
    Ok(point)
}

/// Sorts points by temperature and fits the power law.
pub fn fit_sweep(regime: Regime, mut points: Vec<RateResult>) -> Result<SweepResult, TransportError> {
    points.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    let ts: Vec<f64> = points.iter().map(|p| p.temperature).collect();
    let rates: Vec<f64> = points.iter().map(|p| p.rate).collect();
    let fit = power_law_fit(&ts, &rates)?;
    Ok(SweepResult { regime, points, fit })
}

/// Rate at every temperature in `temperatures` plus the fitted exponent.
pub fn resistivity_sweep(
    template: &TransportSpec,
    temperatures: &[f64],
    options: &SweepOptions,
) -> Result<SweepResult, TransportError> {
    validate_temperatures(temperatures, options)?;
    let points = temperatures
        .iter()
        .map(|&t| sweep_point(template, t, options))
        .collect::<Result<Vec<_>, _>>()?;
    fit_sweep(template.regime, points)
}

/// `count` temperatures spaced evenly in `ln T` over `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return alloc::vec![lo; count];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lattice() -> LatticeSpec {
        LatticeSpec::from_angstrom(3.0, 64, 10.0, 4.602_163_3e-26).unwrap()
    }

    fn spec(t: f64, regime: Regime) -> TransportSpec {
        TransportSpec::new(lattice(), BathSpec::new(t, 1e13, 1500.0).unwrap(), 6e6, regime).unwrap()
    }

    #[test]
    fn trivial_angles() {
        assert_eq!(theta0_from_energies(0.0, 1.0).angle, 0.0);
        let full = theta0_from_energies(2.0, 2.0);
        assert_eq!(full.angle, FRAC_PI_2);
        assert!(!full.saturated);
        assert!(theta0_from_energies(3.0, 2.0).saturated);
        assert_eq!(forward_rate(0.0, 5.0), 0.0);
    }

    #[test]
    fn quarter_turn_rate() {
        assert_relative_eq!(forward_rate(FRAC_PI_2, 1.0), 8.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn rate_scales_as_radius_cubed() {
        let r1 = forward_rate(0.4, 1.0);
        assert_relative_eq!(forward_rate(0.4, 3.0), 27.0 * r1, max_relative = 1e-14);
    }

    #[test]
    fn small_angle_ratio_is_sixteen() {
        let ratio = forward_rate(2e-3, 1.0) / forward_rate(1e-3, 1.0);
        assert!((ratio - 16.0).abs() < 1e-4, "{ratio}");
    }

    #[test]
    fn high_t_barrier_scales_as_root_t() {
        let x = |t: f64| {
            let s = theta0(&spec(t, Regime::HighTemperature)).angle.sin();
            s * s / t.sqrt()
        };
        assert_relative_eq!(x(400.0), x(800.0), max_relative = 1e-10);
        assert_relative_eq!(x(400.0), x(1600.0), max_relative = 1e-10);
    }

    #[test]
    fn regime_is_checked() {
        let bath = BathSpec::new(10.0, 1e13, 1500.0).unwrap();
        assert!(matches!(
            TransportSpec::new(lattice(), bath, 6e6, Regime::HighTemperature),
            Err(TransportError::RegimeViolation { .. })
        ));
        assert!(matches!(
            TransportSpec::new(lattice(), bath, -1.0, Regime::LowTemperature),
            Err(TransportError::NonPositiveVelocity(_))
        ));
    }

    #[test]
    fn single_temperature_is_rejected() {
        let s = spec(500.0, Regime::HighTemperature);
        assert!(matches!(
            resistivity_sweep(&s, &[500.0], &SweepOptions::default()),
            Err(TransportError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn log_spacing_hits_endpoints() {
        let t = log_spaced(1.0, 10.0, 5);
        assert_eq!(t[0], 1.0);
        assert_eq!(t[4], 10.0);
        assert_relative_eq!(t[2], 10f64.sqrt(), max_relative = 1e-14);
    }
}
