use eph_core::lattice::{BathSpec, LatticeSpec, Regime};
use eph_core::transport::{
    forward_rate, forward_rate_integrand, log_spaced, resistivity_sweep, SweepOptions, TransportError, TransportSpec,
};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

/// Adaptive Simpson with Richardson correction.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn closed_form_matches_quadrature(theta in 1e-3f64..FRAC_PI_2) {
        let closed = forward_rate(theta, 1.0);
        let quad = adaptive(&|t| forward_rate_integrand(t, 1.0), 0.0, theta, closed * 1e-13);
        prop_assert!((closed / quad - 1.0).abs() < 1e-10, "θ0 = {}: {} vs {}", theta, closed, quad);
    }
}

#[test]
fn rate_is_strictly_increasing() {
    let mut last = 0.0;
    for i in 1..=1000 {
        let r = forward_rate(FRAC_PI_2 * i as f64 / 1000.0, 2.0);
        assert!(r > last);
        last = r;
    }
}

fn template(t: f64, regime: Regime) -> TransportSpec {
    let lattice = LatticeSpec::from_angstrom(3.0, 64, 10.0, 4.602_163_3e-26).unwrap();
    TransportSpec::new(lattice, BathSpec::new(t, 1e13, 1500.0).unwrap(), 6e6, regime).unwrap()
}

#[test]
fn high_and_low_exponents() {
    let high = resistivity_sweep(
        &template(200.0, Regime::HighTemperature),
        &log_spaced(100.0, 1000.0, 12),
        &SweepOptions::asymptotic(),
    )
    .unwrap();
    assert!((high.fit.slope - 1.0).abs() < 0.02, "{}", high.fit.slope);
    let low = resistivity_sweep(
        &template(1.0, Regime::LowTemperature),
        &log_spaced(0.5, 5.0, 12),
        &SweepOptions::asymptotic(),
    )
    .unwrap();
    assert!((low.fit.slope - 5.0).abs() < 0.05, "{}", low.fit.slope);
    assert!(low.points.windows(2).all(|w| w[0].temperature < w[1].temperature));
}

#[test]
fn sweep_guards() {
    let t = template(200.0, Regime::HighTemperature);
    assert!(matches!(
        resistivity_sweep(&t, &log_spaced(100.0, 500.0, 12), &SweepOptions::asymptotic()),
        Err(TransportError::NarrowRange { .. })
    ));
    assert!(matches!(
        resistivity_sweep(&t, &log_spaced(10.0, 1000.0, 12), &SweepOptions::asymptotic()),
        Err(TransportError::RegimeViolation { .. })
    ));
    let low = template(1.0, Regime::LowTemperature);
    assert!(matches!(
        resistivity_sweep(&low, &log_spaced(1.0, 10.0, 12), &SweepOptions::asymptotic()),
        Err(TransportError::RegimeViolation { .. })
    ));
    let slow = TransportSpec::new(*t.lattice(), *t.bath(), 1e5, Regime::HighTemperature).unwrap();
    assert!(matches!(
        resistivity_sweep(&slow, &log_spaced(100.0, 1000.0, 12), &SweepOptions::default()),
        Err(TransportError::Saturated(_))
    ));
}
