//! Electron–phonon collision physics on a one- and two-dimensional lattice.
//!
//! The crate models phonons as traveling deformation-potential packets and
//! electrons as classical particles that either climb over such a packet or
//! rebound off it. From those collision rules it builds:
//!
//! - [`lattice`]: periodic site potentials, the zeroth Fourier coefficient of
//!   the phonon perturbation, equipartition amplitudes and packet envelopes;
//! - [`collision`]: pass/rebound kinematics in 1D and for oblique tides, plus
//!   a Newton-integration oracle;
//! - [`ensemble`]: a Pauli-blocked Monte Carlo chain that relaxes a discrete
//!   speed ladder to Fermi–Dirac occupancy;
//! - [`transport`]: the critical scattering angle, the forward-scattering
//!   rate and temperature sweeps with power-law fits;
//! - [`qwave`]: spectral and split-operator wavepacket propagation used to
//!   check that the classical picture holds.
//!
//! Everything is `no_std` with `alloc`; IO, configuration and parallel
//! drivers live in the `eph` crate.
#![no_std]
#![forbid(unsafe_code)]
// Negated comparisons reject NaN inputs along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod collision;
pub mod ensemble;
pub mod fft;
pub mod fit;
pub mod lattice;
pub mod quadrature;
pub mod qwave;
pub mod transport;
pub mod units;

pub use collision::{CollisionOutcome, Electron, Geometry, OutcomeKind};
pub use ensemble::{EnsembleState, LevelLadder};
pub use lattice::{BathSpec, LatticeSpec, PhononPacket, Regime};
pub use transport::TransportSpec;
