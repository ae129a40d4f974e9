//! Physical constants (SI, CODATA 2018 exact or recommended values).

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Metres per ångström.
pub const ANGSTROM: f64 = 1e-10;

/// Joules per electron-volt.
pub const ELECTRON_VOLT: f64 = ELEMENTARY_CHARGE;
