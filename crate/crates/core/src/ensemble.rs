//! Pauli-blocked Monte Carlo relaxation of electrons against a phonon bath.
//!
//! Electrons occupy a ladder of speed levels `v_j = (2j + 1) υ`, two spin
//! states per level. The spacing `2υ` is exactly the speed change of a
//! rebound off a packet moving at `υ`, so every rebound lands on a level.
//!
//! One step picks a random electron and a random geometry (head-on or
//! co-moving, equal odds) and applies [`collide_1d`]. A rebound is then
//! filtered twice:
//!
//! - the bath supplies energy `ΔE > 0` with probability `exp(-ΔE / k_B T)`
//!   (the bath is a reservoir at `T`); losses are always absorbed;
//! - the outcome state, a level and a spin drawn at random, must be free.
//!
//! Drawing the spin makes the two states of a level interchangeable
//! outcomes. The stationary state is then the canonical ensemble of all
//! electrons over all `2L` states; with spin conserved it would be two
//! separate canonical ensembles of half the size, whose occupancy is
//! visibly sharper than Fermi–Dirac at the sizes used here.
//!
//! The head-on relative speed from level `j` equals the co-moving relative
//! speed from level `j + 1`, so the barrier test treats both directions of
//! every transition alike and the chain obeys detailed balance with respect
//! to the Fermi–Dirac distribution at `T`.
//!
//! Random numbers come from a ChaCha8 stream keyed by `(seed, stream)`;
//! step `s` always consumes words `8s .. 8s + 8`, so a step's draws are a
//! function of the seed and the step index alone.

use alloc::vec;
use alloc::vec::Vec;
// unused whenever std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::collision::{collide_1d, CollisionError, Electron, Geometry, OutcomeKind};
use crate::fit::{fit_fermi_dirac, FermiFit, FitError};
use crate::lattice::{BathSpec, PhononPacket};
use crate::units::{BOLTZMANN, ELECTRON_MASS, ELEMENTARY_CHARGE};

const WORDS_PER_STEP: u128 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("ensemble holds no electrons")]
    Empty,
    #[error("{electrons} electrons exceed the ladder capacity of {capacity} states")]
    OverCapacity { electrons: usize, capacity: usize },
    #[error("ladder needs at least 2 levels and a positive sound velocity and mass")]
    InvalidLadder,
    #[error("slot (level {level}, spin {spin}) is out of range or doubly occupied")]
    InvalidSlot { level: usize, spin: u8 },
    #[error("relaxation needs at least {required} steps, got {got}")]
    TooFewSteps { required: u64, got: u64 },
    #[error("Fermi-Dirac fit failed: {0}")]
    Fit(#[from] FitError),
    #[error(transparent)]
    Collision(#[from] CollisionError),
}

/// Uniform speed ladder `v_j = (2j + 1) υ`, `j = 0 .. levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelLadder {
    levels: usize,
    sound_velocity: f64,
    mass: f64,
    charge: f64,
}

impl LevelLadder {
    pub fn new(levels: usize, sound_velocity: f64, mass: f64, charge: f64) -> Result<Self, EnsembleError> {
        if levels < 2 || !(sound_velocity > 0.0) || !(mass > 0.0) || !(charge >= 0.0) {
            return Err(EnsembleError::InvalidLadder);
        }
        Ok(Self {
            levels,
            sound_velocity,
            mass,
            charge,
        })
    }

    /// Ladder for free electrons (SI mass and charge).
    pub fn electrons(levels: usize, sound_velocity: f64) -> Result<Self, EnsembleError> {
        Self::new(levels, sound_velocity, ELECTRON_MASS, ELEMENTARY_CHARGE)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn sound_velocity(&self) -> f64 {
        self.sound_velocity
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn speed(&self, level: usize) -> f64 {
        (2 * level + 1) as f64 * self.sound_velocity
    }

    pub fn energy(&self, level: usize) -> f64 {
        let v = self.speed(level);
        0.5 * self.mass * v * v
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.levels).map(|j| self.energy(j)).collect()
    }

    /// Nearest level to speed `|v|`, or `None` above the top of the ladder.
    pub fn level_of_speed(&self, v: f64) -> Option<usize> {
        let j = ((v.abs() / self.sound_velocity - 1.0) * 0.5).round().max(0.0) as usize;
        (j < self.levels).then_some(j)
    }
}

/// One electron: its level and spin state (0 or 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub level: u32,
    pub spin: u8,
}

#[derive(Debug, Clone)]
pub struct EnsembleState {
    ladder: LevelLadder,
    occupied: Vec<[bool; 2]>,
    electrons: Vec<Slot>,
    seed: u64,
    stream: u64,
    step_count: u64,
    rng: ChaCha8Rng,
}

impl EnsembleState {
    /// Lowest levels filled, both spins, in level order.
    pub fn ground_state(ladder: LevelLadder, n_electrons: usize, seed: u64) -> Result<Self, EnsembleError> {
        let slots: Vec<Slot> = (0..n_electrons)
            .map(|i| Slot {
                level: (i / 2) as u32,
                spin: (i % 2) as u8,
            })
            .collect();
        Self::from_slots(ladder, &slots, seed)
    }

    pub fn from_slots(ladder: LevelLadder, slots: &[Slot], seed: u64) -> Result<Self, EnsembleError> {
        let capacity = 2 * ladder.levels;
        if slots.len() > capacity {
            return Err(EnsembleError::OverCapacity {
                electrons: slots.len(),
                capacity,
            });
        }
        let mut occupied = vec![[false; 2]; ladder.levels];
        for s in slots {
            let level = s.level as usize;
            if level >= ladder.levels || s.spin > 1 || occupied[level][s.spin as usize] {
                return Err(EnsembleError::InvalidSlot { level, spin: s.spin });
            }
            occupied[level][s.spin as usize] = true;
        }
        Ok(Self {
            ladder,
            occupied,
            electrons: slots.to_vec(),
            seed,
            stream: 0,
            step_count: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Selects an independent random stream for the same seed.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self.rng.set_stream(stream);
        self.rng.set_word_pos(self.step_count as u128 * WORDS_PER_STEP);
        self
    }

    pub fn ladder(&self) -> &LevelLadder {
        &self.ladder
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn n_electrons(&self) -> usize {
        self.electrons.len()
    }

    pub fn electrons(&self) -> &[Slot] {
        &self.electrons
    }

    pub fn is_occupied(&self, level: usize, spin: u8) -> bool {
        self.occupied[level][spin as usize]
    }

    /// Electrons on `level`, 0 to 2.
    pub fn level_count(&self, level: usize) -> u8 {
        let [a, b] = self.occupied[level];
        a as u8 + b as u8
    }

    pub fn total_energy(&self) -> f64 {
        self.electrons
            .iter()
            .map(|s| self.ladder.energy(s.level as usize))
            .sum()
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Why a step did or did not move an electron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventReason {
    /// Electron crossed the packet, no energy exchanged.
    PassNoExchange,
    /// Target state already occupied.
    PauliBlocked,
    /// Rebound accepted; electron moved.
    ReboundExchanged,
    /// Co-moving packet is not slower than the electron.
    NoCollision,
    /// Bath did not supply the energy for an upward rebound.
    BathDeclined,
    /// Rebound would leave the top of the ladder.
    LadderEdge,
}

impl EventReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EventReason::PassNoExchange => "pass_no_exchange",
            EventReason::PauliBlocked => "pauli_blocked",
            EventReason::ReboundExchanged => "rebound_exchanged",
            EventReason::NoCollision => "no_collision",
            EventReason::BathDeclined => "bath_declined",
            EventReason::LadderEdge => "ladder_edge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    pub step: u64,
    pub level_in: usize,
    /// Level the rebound points to, when there is one on the ladder.
    pub level_out: Option<usize>,
    pub spin: u8,
    /// Spin of the outcome state; equals `spin` unless a rebound was tried.
    pub spin_out: u8,
    pub geometry: Geometry,
    pub accepted: bool,
    pub reason: EventReason,
    pub delta_e: f64,
}

/// Advances the ensemble by one collision attempt.
pub fn step(
    state: &mut EnsembleState,
    bath: &BathSpec,
    packet: &PhononPacket,
) -> Result<CollisionEvent, EnsembleError> {
    let n = state.electrons.len();
    if n == 0 {
        return Err(EnsembleError::Empty);
    }
    let r_pick = state.rng.next_u64();
    let r_geometry = state.rng.next_u64();
    let u_bath = state.uniform();
    let r_spin = state.rng.next_u64();

    let step_index = state.step_count;
    state.step_count += 1;

    let index = ((r_pick as u128 * n as u128) >> 64) as usize;
    let geometry = if r_geometry >> 63 == 0 {
        Geometry::HeadOn
    } else {
        Geometry::CoMoving
    };
    let spin_out = (r_spin >> 63) as u8;
    let slot = state.electrons[index];
    let level_in = slot.level as usize;
    let ladder = state.ladder;
    let electron = Electron {
        velocity: ladder.speed(level_in),
        mass: ladder.mass,
        charge: ladder.charge,
    };

    let mut event = CollisionEvent {
        step: step_index,
        level_in,
        level_out: None,
        spin: slot.spin,
        spin_out: slot.spin,
        geometry,
        accepted: false,
        reason: EventReason::PassNoExchange,
        delta_e: 0.0,
    };

    let outcome = match collide_1d(&electron, packet, geometry) {
        Ok(o) => o,
        Err(CollisionError::NoCollision { .. }) => {
            event.reason = EventReason::NoCollision;
            return Ok(event);
        }
        Err(e) => return Err(e.into()),
    };
    if outcome.kind == OutcomeKind::Passed {
        return Ok(event);
    }
    let Some(target) = ladder.level_of_speed(outcome.velocity_out) else {
        event.reason = EventReason::LadderEdge;
        return Ok(event);
    };
    event.level_out = Some(target);
    event.delta_e = outcome.delta_e_electron;

    event.spin_out = spin_out;
    if state.occupied[target][spin_out as usize] {
        event.reason = EventReason::PauliBlocked;
        return Ok(event);
    }
    if outcome.delta_e_electron > 0.0 {
        let kt = bath.thermal_energy();
        let p = if kt > 0.0 {
            (-outcome.delta_e_electron / kt).exp()
        } else {
            0.0
        };
        if u_bath >= p {
            event.reason = EventReason::BathDeclined;
            return Ok(event);
        }
    }
    state.occupied[level_in][slot.spin as usize] = false;
    state.occupied[target][spin_out as usize] = true;
    state.electrons[index] = Slot {
        level: target as u32,
        spin: spin_out,
    };
    event.accepted = true;
    event.reason = EventReason::ReboundExchanged;
    Ok(event)
}

/// Runs `n_steps` steps and returns the event log.
pub fn run(
    state: &mut EnsembleState,
    bath: &BathSpec,
    packet: &PhononPacket,
    n_steps: u64,
) -> Result<Vec<CollisionEvent>, EnsembleError> {
    (0..n_steps).map(|_| step(state, bath, packet)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    pub steps: u64,
    /// Number of averaging windows; the final half of them feeds the
    /// occupancy average and the detailed-balance tallies.
    pub windows: usize,
    /// Pairs with fewer accepted transitions either way are left out of the
    /// detailed-balance summary.
    pub min_pair_events: u64,
}

impl RelaxConfig {
    pub fn new(steps: u64) -> Self {
        Self {
            steps,
            windows: 20,
            min_pair_events: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventCounters {
    pub pass_no_exchange: u64,
    pub pauli_blocked: u64,
    pub rebound_exchanged: u64,
    pub no_collision: u64,
    pub bath_declined: u64,
    pub ladder_edge: u64,
}

impl EventCounters {
    fn record(&mut self, reason: EventReason) {
        match reason {
            EventReason::PassNoExchange => self.pass_no_exchange += 1,
            EventReason::PauliBlocked => self.pauli_blocked += 1,
            EventReason::ReboundExchanged => self.rebound_exchanged += 1,
            EventReason::NoCollision => self.no_collision += 1,
            EventReason::BathDeclined => self.bath_declined += 1,
            EventReason::LadderEdge => self.ladder_edge += 1,
        }
    }
}

/// Transition statistics between levels `lower` and `lower + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBalance {
    pub lower: usize,
    pub energy_gap: f64,
    pub ups: u64,
    pub downs: u64,
    /// Step-weighted count of (electron on `lower`, free state on
    /// `lower + 1`) pairs.
    pub up_exposure: u64,
    /// The same for electrons on `lower + 1` and free states on `lower`.
    pub down_exposure: u64,
    /// Per-available-pair up rate over down rate; NaN without data.
    pub measured_ratio: f64,
    /// `exp(-gap / k_B T)`.
    pub expected_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxReport {
    pub energies: Vec<f64>,
    /// Time-averaged occupancy per spin state, final half of the run.
    pub occupancy: Vec<f64>,
    pub fit: FermiFit,
    pub fitted_temperature: f64,
    /// Averaged occupancy interpolated at the fitted `mu`.
    pub occupancy_at_mu: f64,
    pub counters: EventCounters,
    pub pairs: Vec<PairBalance>,
    /// Largest `|measured/expected - 1|` over pairs with enough events.
    pub detailed_balance_deviation: f64,
    pub pairs_checked: usize,
    /// Shannon entropy of each window's level histogram `p_j = ⟨n_j⟩ / N`.
    pub window_entropy: Vec<f64>,
}

/// Step-weighted sums of slowly changing integer quantities.
struct LazySums {
    current: Vec<u64>,
    since: Vec<u64>,
    sums: Vec<u64>,
}

impl LazySums {
    fn new(current: Vec<u64>) -> Self {
        let n = current.len();
        Self {
            current,
            since: vec![0; n],
            sums: vec![0; n],
        }
    }

    /// Credits the current value for samples up to (not including) `until`.
    fn flush(&mut self, i: usize, until: u64) {
        self.sums[i] += self.current[i] * (until - self.since[i]);
        self.since[i] = until;
    }

    fn set(&mut self, i: usize, value: u64, from: u64) {
        self.flush(i, from);
        self.current[i] = value;
    }

    /// Closes a window ending at `until` and returns its sums.
    fn take(&mut self, until: u64) -> Vec<u64> {
        for i in 0..self.current.len() {
            self.flush(i, until);
        }
        core::mem::replace(&mut self.sums, vec![0; self.current.len()])
    }
}

/// (electron on `lower`, free state on `lower + 1`) pairs and the reverse.
fn pair_counts(state: &EnsembleState, lower: usize) -> (u64, u64) {
    let lo = state.level_count(lower) as u64;
    let hi = state.level_count(lower + 1) as u64;
    (lo * (2 - hi), hi * (2 - lo))
}

/// Relaxes the ensemble for `config.steps` steps and fits the final-half
/// occupancy to Fermi–Dirac.
pub fn relax(
    state: &mut EnsembleState,
    bath: &BathSpec,
    packet: &PhononPacket,
    config: &RelaxConfig,
) -> Result<RelaxReport, EnsembleError> {
    relax_with(state, bath, packet, config, |_| {})
}

/// [`relax`] that also hands every event to `sink`.
pub fn relax_with<F: FnMut(&CollisionEvent)>(
    state: &mut EnsembleState,
    bath: &BathSpec,
    packet: &PhononPacket,
    config: &RelaxConfig,
    mut sink: F,
) -> Result<RelaxReport, EnsembleError> {
    if state.electrons.is_empty() {
        return Err(EnsembleError::Empty);
    }
    let windows = config.windows.max(2) & !1;
    if config.steps < windows as u64 {
        return Err(EnsembleError::TooFewSteps {
            required: windows as u64,
            got: config.steps,
        });
    }
    let levels = state.ladder.levels;
    let pairs = levels - 1;
    let mut occ = LazySums::new((0..levels).map(|j| state.level_count(j) as u64).collect());
    let (ups0, downs0): (Vec<u64>, Vec<u64>) = (0..pairs).map(|j| pair_counts(state, j)).unzip();
    let mut up_exp = LazySums::new(ups0);
    let mut down_exp = LazySums::new(downs0);

    let mut counters = EventCounters::default();
    let mut ups = vec![0u64; pairs];
    let mut downs = vec![0u64; pairs];
    let mut occ_final = vec![0u64; levels];
    let mut up_final = vec![0u64; pairs];
    let mut down_final = vec![0u64; pairs];
    let mut window_entropy = Vec::with_capacity(windows);

    let boundary = |w: usize| config.steps * w as u64 / windows as u64;
    let mut window = 0;
    let mut next_boundary = boundary(1);
    let mut final_samples = 0u64;

    for s in 0..config.steps {
        let event = step(state, bath, packet)?;
        counters.record(event.reason);
        sink(&event);
        if event.accepted {
            let target = event.level_out.expect("accepted events have a target");
            if window >= windows / 2 {
                if target == event.level_in + 1 {
                    ups[event.level_in] += 1;
                } else if target + 1 == event.level_in {
                    downs[target] += 1;
                }
            }
            for level in [event.level_in, target] {
                occ.set(level, state.level_count(level) as u64, s + 1);
                for pair in [level.wrapping_sub(1), level] {
                    if pair < pairs {
                        let (u, d) = pair_counts(state, pair);
                        up_exp.set(pair, u, s + 1);
                        down_exp.set(pair, d, s + 1);
                    }
                }
            }
        }
        if s + 1 == next_boundary {
            let start = boundary(window);
            let len = (next_boundary - start) as f64;
            let occ_sums = occ.take(next_boundary);
            let up_sums = up_exp.take(next_boundary);
            let down_sums = down_exp.take(next_boundary);
            let norm = len * state.electrons.len() as f64;
            let entropy = occ_sums
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / norm;
                    -p * p.ln()
                })
                .sum();
            window_entropy.push(entropy);
            if window >= windows / 2 {
                final_samples += next_boundary - start;
                for (acc, v) in occ_final.iter_mut().zip(&occ_sums) {
                    *acc += v;
                }
                for (acc, v) in up_final.iter_mut().zip(&up_sums) {
                    *acc += v;
                }
                for (acc, v) in down_final.iter_mut().zip(&down_sums) {
                    *acc += v;
                }
            }
            window += 1;
            if window < windows {
                next_boundary = boundary(window + 1);
            }
        }
    }

    let ladder = state.ladder;
    let energies = ladder.energies();
    let occupancy: Vec<f64> = occ_final
        .iter()
        .map(|&c| c as f64 / (2.0 * final_samples as f64))
        .collect();

    let kt_bath = bath.thermal_energy();
    let mut level_energies: Vec<f64> = state
        .electrons
        .iter()
        .map(|s| ladder.energy(s.level as usize))
        .collect();
    level_energies.sort_by(f64::total_cmp);
    let mu0 = level_energies[level_energies.len() / 2];
    let kt0 = if kt_bath > 0.0 {
        kt_bath
    } else {
        ladder.energy(1) - ladder.energy(0)
    };
    let fit = fit_fermi_dirac(&energies, &occupancy, mu0, kt0)?;

    let mut pair_stats = Vec::with_capacity(pairs);
    let mut deviation: f64 = 0.0;
    let mut checked = 0;
    for j in 0..pairs {
        let gap = energies[j + 1] - energies[j];
        let expected = if kt_bath > 0.0 { (-gap / kt_bath).exp() } else { 0.0 };
        let measured = if up_final[j] > 0 && down_final[j] > 0 && downs[j] > 0 {
            (ups[j] as f64 / up_final[j] as f64) / (downs[j] as f64 / down_final[j] as f64)
        } else {
            f64::NAN
        };
        if ups[j] >= config.min_pair_events && downs[j] >= config.min_pair_events {
            deviation = deviation.max((measured / expected - 1.0).abs());
            checked += 1;
        }
        pair_stats.push(PairBalance {
            lower: j,
            energy_gap: gap,
            ups: ups[j],
            downs: downs[j],
            up_exposure: up_final[j],
            down_exposure: down_final[j],
            measured_ratio: measured,
            expected_ratio: expected,
        });
    }

    Ok(RelaxReport {
        occupancy_at_mu: interpolate(&energies, &occupancy, fit.mu),
        fitted_temperature: fit.kt / BOLTZMANN,
        energies,
        occupancy,
        fit,
        counters,
        pairs: pair_stats,
        detailed_balance_deviation: if checked > 0 { deviation } else { f64::NAN },
        pairs_checked: checked,
        window_entropy,
    })
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    for i in 1..xs.len() {
        if x <= xs[i] {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + t * (ys[i] - ys[i - 1]);
        }
    }
    ys[ys.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ENVELOPE_PEAK;

    fn unit_ladder(levels: usize) -> LevelLadder {
        LevelLadder::new(levels, 1.0, 1.0, 1.0).unwrap()
    }

    fn bath(t: f64) -> BathSpec {
        BathSpec::new(t, 1e13, 1.0).unwrap()
    }

    #[test]
    fn ladder_maps_rebounds_onto_levels() {
        let l = unit_ladder(10);
        assert_eq!(l.speed(0), 1.0);
        assert_eq!(l.speed(3), 7.0);
        assert_eq!(l.level_of_speed(7.0 + 2.0), Some(4));
        assert_eq!(l.level_of_speed(-(7.0 - 2.0)), Some(2));
        assert_eq!(l.level_of_speed(21.0), None);
    }

    #[test]
    fn flat_packet_never_exchanges() {
        let mut st = EnsembleState::ground_state(unit_ladder(20), 10, 7).unwrap();
        let before: Vec<Slot> = st.electrons().to_vec();
        let p = PhononPacket::new(0.0, 1.0, 1.0);
        for ev in run(&mut st, &bath(0.0), &p, 2000).unwrap() {
            assert!(matches!(
                ev.reason,
                EventReason::PassNoExchange | EventReason::NoCollision
            ));
        }
        assert_eq!(st.electrons(), &before[..]);
    }

    #[test]
    fn single_electron_head_on_gain() {
        let ladder = unit_ladder(50);
        let p = PhononPacket::new(1e6 / ENVELOPE_PEAK, 1.0, 1.0);
        let mut st = EnsembleState::from_slots(ladder, &[Slot { level: 5, spin: 0 }], 3).unwrap();
        // infinite-temperature bath accepts every gain
        let hot = bath(f64::MAX / 1e30);
        loop {
            let e0 = st.total_energy();
            let v = ladder.speed(st.electrons()[0].level as usize);
            let ev = step(&mut st, &hot, &p).unwrap();
            if ev.geometry == Geometry::HeadOn && ev.accepted {
                let expected = 0.5 * ((v + 2.0) * (v + 2.0) - v * v);
                assert_eq!(st.total_energy() - e0, expected);
                break;
            }
        }
    }

    #[test]
    fn occupied_target_is_blocked() {
        let ladder = unit_ladder(10);
        let p = PhononPacket::new(1e6, 1.0, 1.0);
        let slots = [
            Slot { level: 3, spin: 0 },
            Slot { level: 4, spin: 0 },
            Slot { level: 2, spin: 0 },
        ];
        let mut st = EnsembleState::from_slots(ladder, &slots, 11).unwrap();
        let hot = bath(f64::MAX / 1e30);
        let mut seen = false;
        for _ in 0..200 {
            let before = st.electrons().to_vec();
            let ev = step(&mut st, &hot, &p).unwrap();
            if ev.reason == EventReason::PauliBlocked {
                assert_eq!(st.electrons(), &before[..]);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn rejects_invalid_states() {
        let ladder = unit_ladder(3);
        assert!(matches!(
            EnsembleState::ground_state(ladder, 7, 0),
            Err(EnsembleError::OverCapacity { .. })
        ));
        let dup = [Slot { level: 1, spin: 1 }, Slot { level: 1, spin: 1 }];
        assert!(matches!(
            EnsembleState::from_slots(ladder, &dup, 0),
            Err(EnsembleError::InvalidSlot { .. })
        ));
        let mut empty = EnsembleState::from_slots(ladder, &[], 0).unwrap();
        assert_eq!(
            step(&mut empty, &bath(1.0), &PhononPacket::new(1.0, 1.0, 1.0)),
            Err(EnsembleError::Empty)
        );
    }

    #[test]
    fn lazy_sums_weight_by_duration() {
        let mut s = LazySums::new(vec![2]);
        s.set(0, 1, 3); // value 2 for samples 0..3
        s.set(0, 0, 5); // value 1 for samples 3..5
        assert_eq!(s.take(10), vec![2 * 3 + 2]);
    }
}
