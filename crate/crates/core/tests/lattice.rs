use approx::assert_relative_eq;
use eph_core::lattice::{
    cell_average_2d, fourier_a0, fourier_a0_quadrature, packet_from_modes, synthesize_packet, transverse_2d_a0,
    BathSpec, LatticeSpec, Polarization, Regime, SquareLattice, ENVELOPE_PEAK, ENVELOPE_PEAK_ARG,
};
use std::f64::consts::PI;

const ION_MASS: f64 = 4.602_163_3e-26;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `(1/a) ∫ -V0 (2π/a) sin(2πx/a) e^{-ikx} dx` over one site, imaginary part.
fn a0_oracle(a: f64, v0: f64, n: usize, m: usize) -> f64 {
    let k = 2.0 * PI * m as f64 / (n as f64 * a);
    let kernel = |x: f64| -v0 * (2.0 * PI / a) * (2.0 * PI * x / a).sin();
    simpson(|x| -kernel(x) * (k * x).sin(), -0.5 * a, 0.5 * a, 2000) / a
}

#[test]
fn closed_form_a0_matches_simpson() {
    for n in [4usize, 8, 16, 64] {
        let spec = LatticeSpec::from_angstrom(3.0, n, 10.0, ION_MASS).unwrap();
        for m in 1..n.div_ceil(2) {
            let closed = fourier_a0(&spec, m).unwrap();
            let oracle = a0_oracle(spec.lattice_constant(), 10.0, n, m);
            assert_eq!(closed.re, 0.0);
            assert!((closed.im / oracle - 1.0).abs() < 1e-8, "n={n} m={m}");
            let gl = fourier_a0_quadrature(&spec, m).unwrap();
            assert!((gl.im / oracle - 1.0).abs() < 1e-8, "n={n} m={m}");
            assert!(gl.re.abs() < 1e-8 * oracle.abs());
        }
    }
}

#[test]
fn a0_is_odd_in_lattice_amplitude_and_linear() {
    let s1 = LatticeSpec::from_angstrom(3.0, 16, 1.0, ION_MASS).unwrap();
    let s3 = LatticeSpec::from_angstrom(3.0, 16, 3.0, ION_MASS).unwrap();
    for m in 1..8 {
        assert_relative_eq!(
            fourier_a0(&s3, m).unwrap().im,
            3.0 * fourier_a0(&s1, m).unwrap().im,
            max_relative = 1e-14
        );
    }
}

fn simpson_2d(f: impl Fn(f64, f64) -> f64, h: f64, panels: usize) -> f64 {
    simpson(|y| simpson(|x| f(x, y), -h, h, panels), -h, h, panels)
}

#[test]
fn transverse_null_and_longitudinal_half() {
    let spec = LatticeSpec::from_angstrom(3.0, 64, 10.0, ION_MASS).unwrap();
    let sq = SquareLattice::from_chain(&spec);
    let a = sq.lattice_constant();
    let scale = 2.0 * 10.0 / a;
    for m in 1..=10 {
        let t = transverse_2d_a0(&sq, m).unwrap();
        assert!(t.norm() / scale < 1e-10, "m={m}: {}", t.norm() / scale);

        let k = 2.0 * PI * m as f64 / (64.0 * a);
        let oracle = simpson_2d(
            |x, y| -sq.perturbation_kernel(Polarization::Longitudinal, x, y) * (k * x).sin(),
            0.5 * a,
            400,
        ) / (a * a);
        let l = cell_average_2d(&sq, m, Polarization::Longitudinal).unwrap();
        assert!((l.im / oracle - 1.0).abs() < 1e-8);
        assert!((l.im / fourier_a0(&spec, m).unwrap().im - 0.5).abs() < 1e-8);
    }
}

#[test]
fn chain_potential_is_periodic() {
    let spec = LatticeSpec::from_angstrom(3.0, 16, 10.0, ION_MASS).unwrap();
    let a = spec.lattice_constant();
    // direct sum over all sites
    let direct = |x: f64| -> f64 {
        (0..16)
            .map(|l| {
                let d = x - l as f64 * a;
                if d.abs() < 0.5 * a {
                    10.0 * (PI * d / a).cos().powi(2)
                } else {
                    0.0
                }
            })
            .sum()
    };
    for i in 0..200 {
        let x = a * (1.0 + 13.0 * i as f64 / 200.0);
        assert!((spec.potential(x) - direct(x)).abs() < 1e-12);
        assert!((spec.potential(x) - spec.potential(x + a)).abs() < 1e-9);
    }
}

#[test]
fn envelope_peak_by_independent_search() {
    // ternary search on sin²u/u over (0.5, 2)
    let f = |u: f64| u.sin().powi(2) / u;
    let (mut lo, mut hi) = (0.5f64, 2.0f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let u = 0.5 * (lo + hi);
    assert!((u - ENVELOPE_PEAK_ARG).abs() < 1e-7);
    assert!((f(u) - ENVELOPE_PEAK).abs() < 1e-14);
    // the packet maximum sits 2.48% above V̄0/√2
    assert!((ENVELOPE_PEAK * 2f64.sqrt() - 1.0247).abs() < 1e-4);
}

#[test]
fn low_temperature_mode_sum_matches_packet() {
    let spec = LatticeSpec::from_angstrom(3.0, 65_536, 10.0, ION_MASS).unwrap();
    let reference = BathSpec::new(1.0, 1e13, 1500.0).unwrap();
    let theta_d = reference.debye_temperature();
    for frac in [0.01, 0.02, 0.04] {
        let bath = reference.at_temperature(frac * theta_d).unwrap();
        let packet = packet_from_modes(&spec, &bath, Regime::LowTemperature).unwrap();
        let sum = synthesize_packet(&spec, &bath, Regime::LowTemperature).unwrap();
        let (_, peak) = sum.peak_magnitude();
        let rel = peak / packet.peak() - 1.0;
        assert!(
            rel.abs() < 0.05,
            "T = {frac} Θ_d: mode sum {peak}, packet {}",
            packet.peak()
        );
    }
}
