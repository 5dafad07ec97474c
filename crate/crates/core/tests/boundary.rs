use std::f64::consts::PI;

use pelab::boundary::{
    boundary_flux, boundary_term, budget_integrand, check_slip, corner_strip_measure, corner_sweep,
    cylinder_samples, global_budget_limit, nearest_boundary, psi_gradient_sup, CornerSingular,
    HolderWallFlow, InteriorVortex, RadialLeak, Scaled, SmoothedCylinder, Swirl,
};
use pelab::fit::ScalingFit;
use pelab::Error;
use proptest::prelude::*;

const ETAS: [f64; 4] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tau_is_a_monotone_bridge(eta in 0.005..0.124f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let sc = SmoothedCylinder::new(eta).unwrap();
        prop_assert!((sc.tau(0.0) - eta).abs() <= 1e-15);
        prop_assert!((sc.tau(eta) - 2.0 * eta).abs() <= 1e-15);
        let (s, t) = (a.min(b) * eta, a.max(b) * eta);
        if t > s {
            prop_assert!(sc.tau(t) > sc.tau(s));
        }
        let v = sc.tau(s);
        prop_assert!((sc.tau_inverse(v) - s).abs() <= 1e-10 * eta);
    }

    #[test]
    fn cutoff_stays_in_the_unit_interval(eta in 0.01..0.124f64, r in 0.0..1.0f64, th in 0.0..(2.0 * PI), z in 0.0..1.0f64) {
        let sc = SmoothedCylinder::new(eta).unwrap();
        let x = [r * th.cos(), r * th.sin(), z];
        let p = sc.psi(x);
        prop_assert!((0.0..=1.0).contains(&p));
        let d = sc.d_eta(x);
        if d > 0.5 * eta {
            prop_assert_eq!(p, 1.0);
        }
        if d < 0.25 * eta {
            prop_assert_eq!(p, 0.0);
        }
        let g = sc.grad_psi(x);
        prop_assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() * eta <= 10.0);
    }

    #[test]
    fn flux_is_cubic_in_the_flow(c in 0.2..3.0f64) {
        let eta = 1.0 / 16.0;
        let base = boundary_flux(&HolderWallFlow::default(), eta).unwrap();
        let scaled = boundary_flux(&Scaled { inner: HolderWallFlow::default(), c }, eta).unwrap();
        let c3 = c * c * c;
        prop_assert!((scaled.side - c3 * base.side).abs() <= 1e-10 * c3 * base.side);
        prop_assert!((scaled.vertical - c3 * base.vertical).abs() <= 1e-10 * c3 * base.vertical);
    }
}

#[test]
fn tau_flatness_at_both_ends() {
    for eta in ETAS {
        let sc = SmoothedCylinder::new(eta).unwrap();
        assert!(sc.tau_slope(1e-4 * eta).abs() <= 1e-6);
        assert!(sc.tau_inverse_slope(2.0 * eta - 1e-4 * eta).abs() <= 1e-2);
    }
}

#[test]
fn nearest_boundary_cases() {
    let mid = nearest_boundary([0.5, 0.0, 0.5]).unwrap();
    assert!(mid.tie);
    assert_eq!(mid.point, [1.0, 0.0, 0.5]);
    assert_eq!(mid.normal, [1.0, 0.0, 0.0]);
    assert!((mid.distance - 0.5).abs() < 1e-15);
    let low = nearest_boundary([0.0, 0.0, 0.1]).unwrap();
    assert_eq!(low.point, [0.0, 0.0, 0.0]);
    assert_eq!(low.normal, [0.0, 0.0, -1.0]);
    assert!((low.distance - 0.1).abs() < 1e-15);
    let side = nearest_boundary([0.9, 0.0, 0.5]).unwrap();
    assert!((side.distance - 0.1).abs() < 1e-15);
    assert_eq!(side.normal, [1.0, 0.0, 0.0]);
    assert!(nearest_boundary([1.1, 0.0, 0.5]).is_err());
}

#[test]
fn membership_of_the_smoothed_domain() {
    let eta = 1.0 / 16.0;
    let sc = SmoothedCylinder::new(eta).unwrap();
    assert!(sc.contains([0.0, 0.0, 0.5]));
    // Junction of the deep and transition rules.
    assert!(sc.contains([1.0 - 2.0 * eta, 0.0, 1.5 * eta]));
    assert!(sc.contains([1.0 - eta * (1.0 + 1e-9), 0.0, 0.5]));
    assert!(!sc.contains([1.0 - 0.99 * eta, 0.0, 0.5]));
    // tau leaves 2 eta like a cube root: 1e-9 below eta gives 2 eta - 1.4e-3 eta.
    let w = sc.omega1(eta * (1.0 + 1e-9)).unwrap();
    assert!((w - 2.0 * eta).abs() <= 2e-3 * eta, "{}", w / eta);
}

#[test]
fn cutoff_plateau_and_collar_on_the_axis() {
    let eta = 1.0 / 32.0;
    let sc = SmoothedCylinder::new(eta).unwrap();
    // On the axis the nearest part of the smoothed boundary is the lid z = eta.
    let inner = [0.0, 0.0, eta + 0.6 * eta];
    let outer = [0.0, 0.0, eta + 0.2 * eta];
    assert!((sc.d_eta(inner) - 0.6 * eta).abs() < 1e-12);
    assert_eq!(sc.psi(inner), 1.0);
    assert_eq!(sc.grad_psi(inner), [0.0; 3]);
    assert_eq!(sc.psi(outer), 0.0);
    assert_eq!(sc.grad_psi(outer), [0.0; 3]);
}

#[test]
fn gradient_sup_of_the_cutoff() {
    let pts = cylinder_samples(1_000_000);
    for eta in ETAS {
        let s = psi_gradient_sup(&SmoothedCylinder::new(eta).unwrap(), &pts);
        assert!((7.0..=10.0).contains(&s), "eta {eta}: {s}");
    }
}

#[test]
fn strip_measure_matches_the_torus_volume() {
    for eta in ETAS {
        let ratio = corner_strip_measure(eta) / (eta * eta);
        assert!((ratio / (PI * PI) - 1.0).abs() <= 0.1, "{ratio}");
    }
}

#[test]
fn wall_vanishing_flux_decays() {
    let flow = HolderWallFlow::default();
    let f: Vec<_> = ETAS
        .iter()
        .map(|&e| (e, boundary_flux(&flow, e).unwrap()))
        .collect();
    for w in f.windows(2) {
        assert!(w[1].1.side < w[0].1.side && w[1].1.vertical < w[0].1.vertical);
    }
    let side = ScalingFit::new(f.iter().map(|(e, v)| (*e, v.side)).collect()).unwrap();
    let vert = ScalingFit::new(f.iter().map(|(e, v)| (*e, v.vertical)).collect()).unwrap();
    assert!(side.slope >= 2.0 / 3.0 - 0.1, "{}", side.slope);
    assert!(vert.slope >= 2.0 / 3.0 - 0.1, "{}", vert.slope);
}

#[test]
fn interior_and_leaking_flows() {
    for eta in ETAS {
        let f = boundary_flux(&InteriorVortex, eta).unwrap();
        assert_eq!((f.side, f.vertical), (0.0, 0.0));
    }
    let leak: Vec<f64> = ETAS
        .iter()
        .map(|&e| boundary_flux(&RadialLeak, e).unwrap().side)
        .collect();
    assert!(leak.iter().all(|v| *v > 0.5), "{leak:?}");
}

#[test]
fn corner_exponents() {
    let bounded = corner_sweep(&CornerSingular { exponent: 0.0 }, &ETAS).unwrap();
    assert!(bounded.mu1.slope >= 4.0 / 3.0 - 0.1 && bounded.mu2.slope >= 2.0 / 3.0 - 0.1);
    assert!(bounded.satisfied());
    let wall = corner_sweep(&HolderWallFlow::default(), &ETAS).unwrap();
    assert!(wall.satisfied());
    let singular = corner_sweep(&CornerSingular { exponent: 0.6 }, &ETAS).unwrap();
    assert!(singular.mu2.slope.abs() <= 0.15, "{}", singular.mu2.slope);
    assert!(!singular.satisfied());
}

#[test]
fn budget_needs_slip() {
    assert!(matches!(
        check_slip(&RadialLeak, 0.0),
        Err(Error::SlipViolation { .. })
    ));
    assert!(matches!(
        global_budget_limit(&RadialLeak, &ETAS, (0.0, 1.0)),
        Err(Error::SlipViolation { .. })
    ));
    check_slip(&Swirl, 0.0).unwrap();
    check_slip(&HolderWallFlow::default(), 0.3).unwrap();
}

#[test]
fn tangential_and_interior_budgets_vanish() {
    let sc = SmoothedCylinder::new(1.0 / 16.0).unwrap();
    for x in cylinder_samples(20_000) {
        assert!(budget_integrand(&sc, &Swirl, 0.0, x).abs() <= 1e-10);
    }
    for eta in [1.0 / 16.0, 1.0 / 32.0] {
        assert_eq!(
            boundary_term(&InteriorVortex, eta, (0.0, 1.0)).unwrap(),
            0.0
        );
    }
}

#[test]
fn wall_vanishing_budget_tends_to_zero() {
    let sweep = global_budget_limit(&HolderWallFlow::default(), &ETAS, (0.0, 1.0)).unwrap();
    let mags: Vec<f64> = sweep.values.iter().map(|(_, v)| v.abs()).collect();
    assert!(mags.windows(2).all(|w| w[1] < w[0]), "{mags:?}");
    let fit = sweep.fit.unwrap();
    assert!(fit.slope >= 2.0 / 3.0 - 0.15, "{}", fit.slope);
}
