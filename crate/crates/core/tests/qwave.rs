use eph_core::fit::{linear_fit, quadratic_fit};
use eph_core::qwave::{
    build_packet, classical_trajectory, phase_aligned_distance, propagate_cells, propagate_free,
    propagate_uniform_field, propagate_uniform_field_direct, shape_deviation, ConfinementPolicy, Grid, PiecewiseLinear,
    QwaveError, SpectralProfile, WavepacketSpec,
};
use eph_core::units::{ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR};

const K0: f64 = 1e10;

fn spec(ratio: f64) -> WavepacketSpec {
    WavepacketSpec::electron(K0, ratio * K0, Grid::new(8e-8, 2048).unwrap())
}

fn v_g() -> f64 {
    HBAR * K0 / ELECTRON_MASS
}

/// Time over which the rms width grows by √2.
fn spreading_time(delta_k: f64) -> f64 {
    let sigma = 0.5 / delta_k;
    2.0 * ELECTRON_MASS * sigma * sigma / HBAR
}

#[test]
fn uncertainty_scale_of_built_packet() {
    for ratio in [0.1, 0.05, 0.025] {
        let p = build_packet(&spec(ratio)).unwrap();
        let product = p.fwhm() * ratio * K0;
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((two_pi / 8.0..=two_pi / 2.0).contains(&product), "{product}");
    }
}

#[test]
fn flat_profile_builds_requested_modes() {
    // neighbouring grid modes, so |ψ|² repeats only once per box length
    let dk = 2.0 * std::f64::consts::PI / 8e-8;
    let s = WavepacketSpec {
        profile: SpectralProfile::Flat { n_modes: 9 },
        delta_k: 4.0 * dk,
        ..spec(0.05)
    };
    let p = build_packet(&s).unwrap();
    assert!((p.norm() - 1.0).abs() < 1e-12);
    assert!(p.centroid().abs() < p.grid.spacing());
}

#[test]
fn free_packet_moves_at_group_velocity_and_keeps_norm() {
    let p = build_packet(&spec(0.05)).unwrap();
    let run = propagate_free(&p, 2e-8 / v_g(), 40).unwrap();
    for point in &run.trajectory {
        assert!((point.norm - 1.0).abs() < 1e-12);
        assert!((point.velocity / v_g() - 1.0).abs() < 1e-6);
    }
    let fit = linear_fit(&run.times(), &run.centroids()).unwrap();
    assert!((fit.slope / v_g() - 1.0).abs() < 0.01, "{}", fit.slope / v_g());
}

#[test]
fn shape_is_preserved_while_dispersion_is_small() {
    let p = build_packet(&spec(0.05)).unwrap();
    let t = 0.1 * spreading_time(0.05 * K0);
    let run = propagate_free(&p, t, 1).unwrap();
    let dev = shape_deviation(&p, &run.final_state, v_g() * t);
    assert!(dev < 0.02, "{dev}");
}

#[test]
fn narrower_spectra_keep_their_shape_longer() {
    let distance = 1e-8;
    let mut last = f64::INFINITY;
    for ratio in [0.1, 0.05, 0.025] {
        let p = build_packet(&spec(ratio)).unwrap();
        let t = distance / v_g();
        let run = propagate_free(&p, t, 20).unwrap();
        let fit = linear_fit(&run.times(), &run.centroids()).unwrap();
        assert!((fit.slope / v_g() - 1.0).abs() < 0.01);
        let dev = shape_deviation(&p, &run.final_state, distance);
        assert!(dev < last, "ratio {ratio}: {dev} after {last}");
        last = dev;
    }
}

#[test]
fn uniform_field_accelerates_at_e_e_over_m() {
    let p = build_packet(&spec(0.05)).unwrap();
    let field = 5e8;
    let duration = 2e-14;
    let gauge = propagate_uniform_field(&p, field, duration, 40).unwrap();
    let [_, _, c2] = quadratic_fit(&gauge.times(), &gauge.centroids()).unwrap();
    let expected = -ELEMENTARY_CHARGE * field / ELECTRON_MASS;
    assert!((2.0 * c2 / expected - 1.0).abs() < 0.01, "{}", 2.0 * c2 / expected);
    for point in &gauge.trajectory {
        assert!((point.norm - 1.0).abs() < 1e-12);
    }

    let direct = propagate_uniform_field_direct(&p, field, duration, 400, 40).unwrap();
    let l2 = phase_aligned_distance(&gauge.final_state, &direct.final_state);
    assert!(l2 < 1e-6, "{l2}");
    for point in &direct.trajectory {
        assert!((point.norm - 1.0).abs() < 1e-10);
    }
}

#[test]
fn zero_field_is_free_evolution() {
    let p = build_packet(&spec(0.05)).unwrap();
    let a = propagate_uniform_field(&p, 0.0, 1e-14, 5).unwrap();
    let b = propagate_free(&p, 1e-14, 5).unwrap();
    assert_eq!(a.final_state.psi, b.final_state.psi);
    assert_eq!(a.trajectory, b.trajectory);
}

#[test]
fn leaving_the_box_is_detected() {
    let p = build_packet(&spec(0.05)).unwrap();
    let err = propagate_free(&p, 4e-8 / v_g(), 40).unwrap_err();
    assert!(matches!(err, QwaveError::BoundaryContact { .. }));
}

#[test]
fn single_cell_matches_uniform_field() {
    let p = build_packet(&spec(0.05)).unwrap();
    let slope = -5e8;
    let cell = PiecewiseLinear::uniform(slope, 1e-6).unwrap();
    let cells = propagate_cells(&p, &cell, 2e-14, 400, 4, ConfinementPolicy::Abort).unwrap();
    let uniform = propagate_uniform_field(&p, -slope, 2e-14, 4).unwrap();
    let l2 = phase_aligned_distance(&cells.propagation.final_state, &uniform.final_state);
    assert!(l2 < 1e-6, "{l2}");
    assert!(cells.violations.is_empty());
}

fn ramp() -> PiecewiseLinear {
    // gentle downhill for the electron, then a steep climb it cannot finish
    PiecewiseLinear::new(vec![(-3e-8, -1.75), (5e-9, 0.0), (3e-8, -6.25)]).unwrap()
}

#[test]
fn turning_point_matches_classical_oracle() {
    let p = build_packet(&spec(0.05)).unwrap();
    let field = ramp();
    let run = propagate_cells(&p, &field, 5e-14, 5000, 500, ConfinementPolicy::Abort).unwrap();
    let (i_top, top) = run
        .propagation
        .trajectory
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, q)| {
            if q.centroid > b.1 {
                (i, q.centroid)
            } else {
                b
            }
        });
    assert!(
        i_top > 0 && i_top < run.propagation.trajectory.len() - 1,
        "no turning point"
    );
    let times: Vec<f64> = (0..=20_000).map(|i| 5e-14 * i as f64 / 20_000.0).collect();
    let classical = classical_trajectory(&field, ELECTRON_MASS, -ELEMENTARY_CHARGE, 0.0, v_g(), &times);
    let classical_top = classical.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let width = run.propagation.trajectory[i_top].width;
    assert!(
        (top - classical_top).abs() < 2.0 * width,
        "{top} vs {classical_top} (width {width})"
    );
    assert!(run.log.iter().any(|r| r.cell == 1));
}

#[test]
fn gently_curved_potential_follows_classical_path() {
    let p = build_packet(&spec(0.05)).unwrap();
    // V = -(s x + c x²/2) on nodes 8 nm apart, |V'' Δx / V'| ≤ 0.04
    let (s, c, dx) = (1e8, 4e14, 8e-9);
    let nodes: Vec<(f64, f64)> = (-5..=5)
        .map(|i| {
            let x = i as f64 * dx;
            (x, -(s * x + 0.5 * c * x * x))
        })
        .collect();
    let field = PiecewiseLinear::new(nodes).unwrap();
    for cell in 1..field.cells() {
        let ratio = (field.slope(cell) - field.slope(cell - 1)).abs() / field.slope(cell - 1).abs();
        assert!(ratio < 0.05, "{ratio}");
    }
    let duration = 1.5e-14;
    let run = propagate_cells(&p, &field, duration, 1500, 150, ConfinementPolicy::Log).unwrap();
    let times = run.propagation.times();
    let classical = classical_trajectory(&field, ELECTRON_MASS, -ELEMENTARY_CHARGE, 0.0, v_g(), &times);
    let travel = classical.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
    let worst = run
        .propagation
        .trajectory
        .iter()
        .zip(&classical)
        .map(|(q, c)| (q.centroid - c.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.01 * travel, "{worst} vs travel {travel}");
}

#[test]
fn narrow_cells_abort_with_diagnostics() {
    let p = build_packet(&spec(0.05)).unwrap();
    let nodes = (-40..=40).map(|i| (i as f64 * 1e-9, 0.01 * i as f64)).collect();
    let field = PiecewiseLinear::new(nodes).unwrap();
    let err = propagate_cells(&p, &field, 1e-15, 10, 1, ConfinementPolicy::Abort).unwrap_err();
    assert!(matches!(err, QwaveError::Confinement { cell: 39 | 40, .. }), "{err:?}");
    let logged = propagate_cells(&p, &field, 1e-15, 10, 1, ConfinementPolicy::Log).unwrap();
    assert_eq!(logged.violations.len(), 11);
}
