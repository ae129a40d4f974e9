//! Flat `key = value` configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys and units:
//!
//! | key              | unit   | default          |
//! |------------------|--------|------------------|
//! | `temperature_k`  | K      | required         |
//! | `a_angstrom`     | Å      | 3                |
//! | `n_sites`        | count  | 64               |
//! | `v0_volts`       | V      | 10               |
//! | `ion_mass_kg`    | kg     | 4.6021633e-26    |
//! | `omega_d`        | rad/s  | 1e13             |
//! | `sound_velocity` | m/s    | 1500             |
//! | `fermi_velocity` | m/s    | 6e6              |

use std::fmt;
use std::path::Path;

use eph_core::lattice::{BathSpec, LatticeSpec};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` set twice (first on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: `{key}` = `{value}` is not a number")]
    BadValue { line: usize, key: String, value: String },
    #[error("line {line}: `{key}` = {value} violates {constraint}")]
    Constraint {
        line: usize,
        key: String,
        value: String,
        constraint: &'static str,
    },
    #[error("line {line}: required key `{key}` is missing")]
    Missing { line: usize, key: &'static str },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

/// Resolved configuration in SI-friendly units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Config {
    pub a_angstrom: f64,
    pub n_sites: usize,
    pub v0_volts: f64,
    pub ion_mass_kg: f64,
    pub temperature_k: f64,
    pub omega_d: f64,
    pub sound_velocity: f64,
    pub fermi_velocity: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            a_angstrom: 3.0,
            n_sites: 64,
            v0_volts: 10.0,
            ion_mass_kg: 4.602_163_3e-26,
            temperature_k: 300.0,
            omega_d: 1e13,
            sound_velocity: 1500.0,
            fermi_velocity: 6e6,
        }
    }
}

const KEYS: [&str; 8] = [
    "a_angstrom",
    "n_sites",
    "v0_volts",
    "ion_mass_kg",
    "temperature_k",
    "omega_d",
    "sound_velocity",
    "fermi_velocity",
];

impl Config {
    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::from_angstrom(self.a_angstrom, self.n_sites, self.v0_volts, self.ion_mass_kg)
            .expect("validated at parse time")
    }

    pub fn bath(&self) -> BathSpec {
        BathSpec::new(self.temperature_k, self.omega_d, self.sound_velocity).expect("validated at parse time")
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    fn set(&mut self, line: usize, key: &str, raw: &str) -> Result<(), ConfigError> {
        let constraint = |constraint| ConfigError::Constraint {
            line,
            key: key.to_string(),
            value: raw.to_string(),
            constraint,
        };
        if key == "n_sites" {
            let n: usize = raw.parse().map_err(|_| ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: raw.to_string(),
            })?;
            if n < 2 {
                return Err(constraint("n_sites >= 2"));
            }
            self.n_sites = n;
            return Ok(());
        }
        let v: f64 = raw.parse().map_err(|_| ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: raw.to_string(),
        })?;
        if !v.is_finite() {
            return Err(constraint("a finite value"));
        }
        let (slot, ok, rule) = match key {
            "a_angstrom" => (&mut self.a_angstrom, v > 0.0, "a_angstrom > 0"),
            "v0_volts" => (&mut self.v0_volts, v > 0.0, "v0_volts > 0"),
            "ion_mass_kg" => (&mut self.ion_mass_kg, v > 0.0, "ion_mass_kg > 0"),
            "temperature_k" => (&mut self.temperature_k, v >= 0.0, "temperature_k >= 0"),
            "omega_d" => (&mut self.omega_d, v > 0.0, "omega_d > 0"),
            "sound_velocity" => (&mut self.sound_velocity, v > 0.0, "sound_velocity > 0"),
            "fermi_velocity" => (&mut self.fermi_velocity, v > 0.0, "fermi_velocity > 0"),
            _ => unreachable!("keys are checked before values"),
        };
        if !ok {
            return Err(constraint(rule));
        }
        *slot = v;
        Ok(())
    }
}

impl std::str::FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        let mut seen: [Option<usize>; KEYS.len()] = [None; KEYS.len()];
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(index) = KEYS.iter().position(|k| *k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if let Some(first) = seen[index] {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                    first,
                });
            }
            seen[index] = Some(line);
            config.set(line, key, value)?;
        }
        let temperature = KEYS.iter().position(|k| *k == "temperature_k").unwrap();
        if seen[temperature].is_none() {
            return Err(ConfigError::Missing {
                line: last_line + 1,
                key: "temperature_k",
            });
        }
        Ok(config)
    }
}

/// Writes every key, so the output parses back to the same value.
impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a_angstrom = {}", self.a_angstrom)?;
        writeln!(f, "n_sites = {}", self.n_sites)?;
        writeln!(f, "v0_volts = {}", self.v0_volts)?;
        writeln!(f, "ion_mass_kg = {}", self.ion_mass_kg)?;
        writeln!(f, "temperature_k = {}", self.temperature_k)?;
        writeln!(f, "omega_d = {}", self.omega_d)?;
        writeln!(f, "sound_velocity = {}", self.sound_velocity)?;
        writeln!(f, "fermi_velocity = {}", self.fermi_velocity)
    }
}
