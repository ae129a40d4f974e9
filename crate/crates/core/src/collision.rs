//! Classical collisions between an electron and a rigid phonon packet.
//!
//! Sign convention: the lab-frame positive axis points along the incident
//! electron's motion, so incident velocities are positive. In a head-on
//! collision the packet moves at `-υ`; in a co-moving one at `+υ`.
//!
//! In the packet frame the electron meets a static hill of height
//! `e · ENVELOPE_PEAK · V̄0`. With enough kinetic energy it crosses and keeps
//! its velocity; otherwise it reflects with the same packet-frame speed.
//! Kinetic energy exactly equal to the barrier counts as crossing.

use core::f64::consts::FRAC_PI_2;
// unused whenever std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::lattice::{envelope_shape, envelope_shape_derivative, PhononPacket};
use crate::units::{ELECTRON_MASS, ELEMENTARY_CHARGE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollisionError {
    #[error("incident velocity must be positive and finite, got {0}")]
    NonPositiveVelocity(f64),
    #[error("packet speed must be non-negative and finite, got {0}")]
    NegativePacketSpeed(f64),
    #[error("co-moving electron at {velocity} never reaches a packet moving at {packet_velocity}")]
    NoCollision { velocity: f64, packet_velocity: f64 },
    #[error("incidence angle {0} outside [0, π/2]")]
    AngleOutOfRange(f64),
    #[error("time step must be positive and finite, got {0}")]
    BadTimestep(f64),
    #[error("orbit still inside the packet after {steps} steps (x = {position:e}, v = {velocity:e})")]
    Trapped { steps: usize, position: f64, velocity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Electron and packet approach each other.
    HeadOn,
    /// Packet moves along with the electron, which overtakes it.
    CoMoving,
}

impl Geometry {
    /// Lab-frame velocity of a packet moving at speed `speed`.
    pub fn packet_velocity(self, speed: f64) -> f64 {
        match self {
            Geometry::HeadOn => -speed,
            Geometry::CoMoving => speed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Geometry::HeadOn => "head_on",
            Geometry::CoMoving => "co_moving",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Passed,
    Rebounded,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Passed => "passed",
            OutcomeKind::Rebounded => "rebounded",
        }
    }
}

/// A classical electron moving along the collision axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Electron {
    /// Signed lab velocity, m/s.
    pub velocity: f64,
    pub mass: f64,
    /// Magnitude of the charge; the barrier is `charge · peak potential`.
    pub charge: f64,
}

impl Electron {
    /// A free electron with SI mass and charge.
    pub fn new(velocity: f64) -> Self {
        Self {
            velocity,
            mass: ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity * self.velocity
    }
}

/// Result of a 1D collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionOutcome {
    pub kind: OutcomeKind,
    /// Outgoing lab-frame velocity.
    pub velocity_out: f64,
    /// Incident speed in the packet frame.
    pub relative_speed: f64,
    pub delta_e_electron: f64,
    pub delta_e_phonon: f64,
}

impl CollisionOutcome {
    fn new(kind: OutcomeKind, e: &Electron, velocity_out: f64, relative_speed: f64) -> Self {
        let delta = if kind == OutcomeKind::Passed && velocity_out == e.velocity {
            0.0
        } else {
            0.5 * e.mass * (velocity_out * velocity_out - e.velocity * e.velocity)
        };
        Self {
            kind,
            velocity_out,
            relative_speed,
            delta_e_electron: delta,
            delta_e_phonon: -delta,
        }
    }
}

fn check_inputs(e: &Electron, packet: &PhononPacket, geometry: Geometry) -> Result<f64, CollisionError> {
    if !(e.velocity > 0.0 && e.velocity.is_finite()) {
        return Err(CollisionError::NonPositiveVelocity(e.velocity));
    }
    if !(packet.velocity >= 0.0 && packet.velocity.is_finite()) {
        return Err(CollisionError::NegativePacketSpeed(packet.velocity));
    }
    let w = e.velocity - geometry.packet_velocity(packet.velocity);
    if w <= 0.0 {
        return Err(CollisionError::NoCollision {
            velocity: e.velocity,
            packet_velocity: packet.velocity,
        });
    }
    Ok(w)
}

/// Analytic 1D collision.
///
/// Head-on rebounds leave at `-(v + 2υ)` and gain energy; co-moving rebounds
/// leave at `2υ - v` and lose energy. Crossings keep `v`.
pub fn collide_1d(e: &Electron, packet: &PhononPacket, geometry: Geometry) -> Result<CollisionOutcome, CollisionError> {
    let w = check_inputs(e, packet, geometry)?;
    let frame = geometry.packet_velocity(packet.velocity);
    let kinetic = 0.5 * e.mass * w * w;
    if kinetic >= packet.barrier_energy(e.charge) {
        Ok(CollisionOutcome::new(OutcomeKind::Passed, e, e.velocity, w))
    } else {
        Ok(CollisionOutcome::new(OutcomeKind::Rebounded, e, -w + frame, w))
    }
}

/// Electron meeting a 2D tide at angle `θ` between its velocity and the tide
/// front: `θ = 0` grazes along the front, `θ = π/2` is head-on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TideElectron {
    pub speed: f64,
    pub angle: f64,
    pub mass: f64,
    pub charge: f64,
}

impl TideElectron {
    pub fn new(speed: f64, angle: f64) -> Self {
        Self {
            speed,
            angle,
            mass: ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
        }
    }

    pub fn velocity(&self) -> TideVelocity {
        let (s, c) = self.angle.sin_cos();
        TideVelocity {
            parallel: self.speed * c,
            perpendicular: self.speed * s,
        }
    }
}

/// Velocity split along and across the tide front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TideVelocity {
    pub parallel: f64,
    pub perpendicular: f64,
}

impl TideVelocity {
    pub fn speed(&self) -> f64 {
        self.parallel.hypot(self.perpendicular)
    }

    pub fn dot(&self, other: &TideVelocity) -> f64 {
        self.parallel * other.parallel + self.perpendicular * other.perpendicular
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObliqueOutcome {
    pub kind: OutcomeKind,
    pub incident: TideVelocity,
    pub outgoing: TideVelocity,
    /// Loss of forward velocity as a fraction of the incident speed.
    pub forward_change_factor: f64,
    /// The tide was treated as static (`υ ≪ v`).
    pub stationary_tide: bool,
    pub delta_e_electron: f64,
    pub delta_e_phonon: f64,
}

/// Oblique collision with a stationary tide: the perpendicular component
/// reflects if `½ m (v sin θ)² <` barrier, the parallel one is untouched.
pub fn collide_oblique(e: &TideElectron, packet: &PhononPacket) -> Result<ObliqueOutcome, CollisionError> {
    if !(0.0..=FRAC_PI_2).contains(&e.angle) {
        return Err(CollisionError::AngleOutOfRange(e.angle));
    }
    if !(e.speed > 0.0 && e.speed.is_finite()) {
        return Err(CollisionError::NonPositiveVelocity(e.speed));
    }
    let incident = e.velocity();
    let normal_energy = 0.5 * e.mass * incident.perpendicular * incident.perpendicular;
    let (kind, outgoing) = if normal_energy >= packet.barrier_energy(e.charge) {
        (OutcomeKind::Passed, incident)
    } else {
        (
            OutcomeKind::Rebounded,
            TideVelocity {
                parallel: incident.parallel,
                perpendicular: -incident.perpendicular,
            },
        )
    };
    let forward_change_factor = 1.0 - outgoing.dot(&incident) / incident.dot(&incident);
    Ok(ObliqueOutcome {
        kind,
        incident,
        outgoing,
        forward_change_factor,
        stationary_tide: true,
        delta_e_electron: 0.0,
        delta_e_phonon: 0.0,
    })
}

/// Number of envelope lobes on each side of the packet centre where the
/// Newton integration starts and stops. Both ends sit on zeros of `sin u`.
pub const TRANSIT_LOBES: u32 = 24;

/// Hard cap on integration steps for [`brute_force_transit`].
pub const TRANSIT_MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitReport {
    pub outcome: CollisionOutcome,
    /// `|E_end - E_start|` relative to the incident kinetic energy.
    pub energy_drift: f64,
    pub steps: usize,
    /// Signed asymptotic packet-frame velocity.
    pub packet_frame_velocity: f64,
}

/// Time step resolving the envelope scale `2/k_max` with 64 steps at the
/// larger of the relative speed and the barrier-top speed.
pub fn suggested_timestep(e: &Electron, packet: &PhononPacket, geometry: Geometry) -> f64 {
    let w = (e.velocity - geometry.packet_velocity(packet.velocity)).abs();
    let barrier = packet.barrier_energy(e.charge).max(0.0);
    let speed = w.max((2.0 * barrier / e.mass).sqrt());
    2.0 / packet.cutoff / speed / 64.0
}

/// Integrates `m ẍ = -q ∂(ΔU)/∂x` through the full envelope in the packet
/// frame with a fourth-order symplectic (Yoshida) scheme and classifies the
/// outcome by the sign of the asymptotic velocity.
pub fn brute_force_transit(
    e: &Electron,
    packet: &PhononPacket,
    geometry: Geometry,
    dt: f64,
) -> Result<TransitReport, CollisionError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CollisionError::BadTimestep(dt));
    }
    let w = check_inputs(e, packet, geometry)?;
    let frame = geometry.packet_velocity(packet.velocity);
    let half_k = 0.5 * packet.cutoff;
    let qv = e.charge * packet.vbar0;
    let potential = |x: f64| qv * envelope_shape(half_k * x);
    let accel = |x: f64| -qv * envelope_shape_derivative(half_k * x) * half_k / e.mass;

    let edge = TRANSIT_LOBES as f64 * core::f64::consts::PI / half_k;
    let mut x = -edge;
    let mut v = w;
    let kinetic0 = 0.5 * e.mass * w * w;
    let energy0 = kinetic0 + potential(x);

    let cbrt2 = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 * w1;
    let c = [0.5 * w1, 0.5 * (w0 + w1), 0.5 * (w0 + w1), 0.5 * w1];
    let d = [w1, w0, w1];

    let mut steps = 0;
    loop {
        x += c[0] * v * dt;
        v += d[0] * accel(x) * dt;
        x += c[1] * v * dt;
        v += d[1] * accel(x) * dt;
        x += c[2] * v * dt;
        v += d[2] * accel(x) * dt;
        x += c[3] * v * dt;
        steps += 1;
        if x >= edge || x <= -edge {
            break;
        }
        if steps >= TRANSIT_MAX_STEPS {
            return Err(CollisionError::Trapped {
                steps,
                position: x,
                velocity: v,
            });
        }
    }

    let pe = potential(x);
    let energy = 0.5 * e.mass * v * v + pe;
    let asymptotic = v.signum() * (v * v + 2.0 * pe / e.mass).max(0.0).sqrt();
    let kind = if asymptotic > 0.0 {
        OutcomeKind::Passed
    } else {
        OutcomeKind::Rebounded
    };
    let velocity_out = match kind {
        OutcomeKind::Passed => e.velocity,
        OutcomeKind::Rebounded => asymptotic + frame,
    };
    let mut outcome = CollisionOutcome::new(kind, e, velocity_out, w);
    if kind == OutcomeKind::Passed {
        // report the integrated speed rather than snapping to v
        outcome.velocity_out = asymptotic + frame;
    }
    Ok(TransitReport {
        outcome,
        energy_drift: (energy - energy0).abs() / kinetic0,
        steps,
        packet_frame_velocity: asymptotic,
    })
}
