use eph_core::ensemble::{relax, relax_with, run, EnsembleState, EventReason, LevelLadder, RelaxConfig};
use eph_core::lattice::{packet_from_modes, BathSpec, LatticeSpec, PhononPacket, Regime};
use eph_core::units::BOLTZMANN;

const SOUND: f64 = 1500.0;

fn ladder() -> LevelLadder {
    LevelLadder::electrons(200, SOUND).unwrap()
}

/// Bath at `kT = 0.1 ε_F` for 50 electrons, with its low-temperature packet.
fn setting() -> (BathSpec, PhononPacket) {
    let l = ladder();
    let fermi = l.energy(24);
    let t = 0.1 * fermi / BOLTZMANN;
    let bath = BathSpec::new(t, 1e13, SOUND).unwrap();
    let lattice = LatticeSpec::from_angstrom(3.0, 64, 10.0, 4.602_163_3e-26).unwrap();
    let packet = packet_from_modes(&lattice, &bath, Regime::LowTemperature).unwrap();
    (bath, packet)
}

#[test]
fn identical_inputs_give_identical_logs() {
    let (bath, packet) = setting();
    let mut a = EnsembleState::ground_state(ladder(), 50, 42).unwrap();
    let mut b = a.clone();
    let la = run(&mut a, &bath, &packet, 20_000).unwrap();
    let lb = run(&mut b, &bath, &packet, 20_000).unwrap();
    assert_eq!(la, lb);
    let mut c = EnsembleState::ground_state(ladder(), 50, 43).unwrap();
    assert_ne!(la, run(&mut c, &bath, &packet, 20_000).unwrap());
}

#[test]
fn streams_are_independent_and_resumable() {
    let (bath, packet) = setting();
    let base = EnsembleState::ground_state(ladder(), 50, 42).unwrap();
    let mut s0 = base.clone();
    let mut s1 = base.clone().with_stream(1);
    assert_ne!(
        run(&mut s0, &bath, &packet, 5000).unwrap(),
        run(&mut s1, &bath, &packet, 5000).unwrap()
    );
    // splitting a run in two gives the same log as running it at once
    let mut whole = base.clone();
    let full = run(&mut whole, &bath, &packet, 4000).unwrap();
    let mut split = base;
    let mut halves = run(&mut split, &bath, &packet, 1500).unwrap();
    halves.extend(run(&mut split, &bath, &packet, 2500).unwrap());
    assert_eq!(full, halves);
}

#[test]
fn conservation_and_exclusion() {
    let (bath, packet) = setting();
    let mut st = EnsembleState::ground_state(ladder(), 50, 5).unwrap();
    let mut energy = st.total_energy();
    let mut reasons = std::collections::HashSet::new();
    for _ in 0..50_000 {
        let ev = eph_core::ensemble::step(&mut st, &bath, &packet).unwrap();
        reasons.insert(ev.reason);
        let e = st.total_energy();
        if ev.accepted {
            assert!(((e - energy) - ev.delta_e).abs() <= 1e-9 * e);
        } else {
            assert_eq!(e, energy);
        }
        energy = e;
    }
    assert_eq!(st.n_electrons(), 50);
    let mut seen = std::collections::HashSet::new();
    for s in st.electrons() {
        assert!(seen.insert(*s), "two electrons share {s:?}");
        assert!(st.is_occupied(s.level as usize, s.spin));
    }
    for r in [
        EventReason::PauliBlocked,
        EventReason::ReboundExchanged,
        EventReason::NoCollision,
    ] {
        assert!(reasons.contains(&r), "{r:?} never happened");
    }
}

#[test]
fn relaxes_toward_fermi_dirac_with_rising_entropy() {
    let (bath, packet) = setting();
    let mut st = EnsembleState::ground_state(ladder(), 50, 2024).unwrap();
    let mut count = 0u64;
    let report = relax_with(&mut st, &bath, &packet, &RelaxConfig::new(400_000), |_| count += 1).unwrap();
    assert_eq!(count, 400_000);
    let c = report.counters;
    assert_eq!(
        c.pass_no_exchange + c.pauli_blocked + c.rebound_exchanged + c.no_collision + c.bath_declined + c.ladder_edge,
        400_000
    );
    let total: f64 = report.occupancy.iter().sum::<f64>() * 2.0;
    assert!((total - 50.0).abs() < 1e-9);
    assert!((report.fitted_temperature / bath.temperature() - 1.0).abs() < 0.15);
    assert!((report.occupancy_at_mu - 0.5).abs() < 0.05);
    // ground state: 50 electrons spread evenly over 25 levels
    let mut best = 25f64.ln();
    for &x in &report.window_entropy {
        assert!(x >= 0.95 * best, "entropy fell from {best} to {x}");
        best = best.max(x);
    }
    assert!(report.window_entropy[0] > 25f64.ln());
}

/// Exact canonical occupancy of `n` fermions over `weights.len()` states,
/// from elementary symmetric polynomials of the Boltzmann weights.
fn canonical_occupancy(weights: &[f64], n: usize) -> Vec<f64> {
    let esp = |skip: Option<usize>| {
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        for (i, &x) in weights.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            for k in (1..=n).rev() {
                e[k] += x * e[k - 1];
            }
        }
        e
    };
    let z = esp(None)[n];
    (0..weights.len())
        .map(|i| weights[i] * esp(Some(i))[n - 1] / z)
        .collect()
}

#[test]
fn occupancy_matches_exact_canonical_ensemble() {
    let (bath, packet) = setting();
    let l = ladder();
    let kt = bath.thermal_energy();
    let reference = l.energy(24);
    // both spin states of every level
    let weights: Vec<f64> = (0..2 * l.levels())
        .map(|i| (-(l.energy(i / 2) - reference) / kt).exp())
        .collect();
    let exact = canonical_occupancy(&weights, 50);
    let mut st = EnsembleState::ground_state(l, 50, 77).unwrap();
    let report = relax(&mut st, &bath, &packet, &RelaxConfig::new(4_000_000)).unwrap();
    for (j, f) in report.occupancy.iter().enumerate() {
        assert!((f - exact[2 * j]).abs() < 0.02, "level {j}: {f} vs {}", exact[2 * j]);
    }
    assert!(report.detailed_balance_deviation < 0.1);
    assert!(report.pairs_checked >= 3);
}

#[test]
fn zero_temperature_bath_never_heats() {
    let (bath, packet) = setting();
    let cold = bath.at_temperature(0.0).unwrap();
    let mut st = EnsembleState::ground_state(ladder(), 50, 9).unwrap();
    let e0 = st.total_energy();
    let log = run(&mut st, &cold, &packet, 10_000).unwrap();
    assert!(log.iter().all(|e| !e.accepted || e.delta_e <= 0.0));
    assert_eq!(st.total_energy(), e0);
    let err = relax(&mut st, &cold, &packet, &RelaxConfig::new(10));
    assert!(err.is_err());
}
