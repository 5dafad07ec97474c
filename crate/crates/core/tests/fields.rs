use std::f64::consts::PI;

use pelab::quad::integrate;
use pelab::synth::{make_weierstrass, taylor_green, SyntheticSpec};
use pelab::{DomainMode, Grid3, SField};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_spacings(nx in 1usize..64, ny in 1usize..64, nz in 1usize..64) {
        let g = Grid3::channel(nx, ny, nz).unwrap();
        prop_assert!(g.hx > 0.0 && g.hy > 0.0 && g.hz > 0.0);
        prop_assert_eq!(g.hz, 1.0 / nz as f64);
        prop_assert_eq!(g.mode, DomainMode::PeriodicChannel);
    }

    #[test]
    fn disk_samples_stay_in_the_disk(n in 2usize..48, nz in 1usize..8) {
        let g = Grid3::disk(n, nz).unwrap();
        prop_assert!(g.n_columns() > 0);
        for c in 0..g.n_columns() {
            let (x, y) = g.column_xy(c);
            prop_assert!(x * x + y * y <= 1.0, "({x}, {y})");
        }
    }

    #[test]
    fn midpoint_rule_is_exact_for_trig_polynomials(
        n in 4usize..40,
        p in 0usize..20,
        q in 0usize..20,
        phase in 0.0..(2.0 * PI),
        c in -3.0..3.0f64,
    ) {
        let (p, q) = (p.min(n / 2), q.min(n / 2));
        let g = Grid3::channel(n, n, 4).unwrap();
        let f = SField::from_fn(&g, |x, y, _| c + (p as f64 * x + phase).cos() * (q as f64 * y).cos());
        // Every nonconstant mode up to Nyquist sums to zero on the lattice.
        let want = if p == 0 && q == 0 { (c + phase.cos()) * 4.0 * PI * PI } else { c * 4.0 * PI * PI };
        let got = integrate(&f);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
    }

    #[test]
    fn weierstrass_is_bitwise_reproducible(
        alpha in 0.2..1.8f64,
        beta in 0.1..0.95f64,
        seed in any::<u64>(),
    ) {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let spec = SyntheticSpec::new(alpha, beta, 3).seed(seed);
        let a = make_weierstrass(&spec, &g).unwrap();
        let b = make_weierstrass(&spec, &g).unwrap();
        prop_assert!(a.comp(0).iter().zip(b.comp(0)).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.comp(1).iter().zip(b.comp(1)).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn truncation_tail_bound(alpha in 0.3..0.95f64, beta in 0.3..0.95f64, seed in 0u64..1000) {
        let g = Grid3::channel(64, 64, 64).unwrap();
        let low = make_weierstrass(&SyntheticSpec::new(alpha, beta, 2).seed(seed), &g).unwrap();
        let high = make_weierstrass(&SyntheticSpec::new(alpha, beta, 4).seed(seed), &g).unwrap();
        let sup = |c: &[f64]| c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Two horizontal cosines and one vertical cosine per octave.
        let tail: f64 = (3..=4)
            .map(|k| 2.0 * 2f64.powf(-alpha * k as f64) + 2f64.powf(-beta * k as f64))
            .sum();
        for i in 0..2 {
            let change = (sup(high.comp(i)) - sup(low.comp(i))).abs();
            prop_assert!(change <= tail, "component {i}: {change} vs {tail}");
        }
    }
}

#[test]
fn zero_phase_sum_at_origin() {
    let g = Grid3::channel(8, 8, 8).unwrap();
    let u = make_weierstrass(&SyntheticSpec::new(0.7, 0.7, 1), &g).unwrap();
    let want = 3.0 * (1.0 + 2f64.powf(-0.7));
    assert!((u.get(0)[0] - want).abs() < 1e-12);
    assert!((want - 4.847).abs() < 1e-3);
}

#[test]
fn taylor_green_is_z_independent() {
    let g = Grid3::channel(16, 16, 8).unwrap();
    let u = taylor_green(&g).unwrap();
    for n in 0..g.n_nodes() {
        let [x, y, _] = g.position(n);
        let v = u.get(n);
        assert!((v[0] - x.sin() * y.cos()).abs() < 1e-15);
        assert!((v[1] + x.cos() * y.sin()).abs() < 1e-15);
    }
}

#[test]
fn taylor_green_refuses_the_disk() {
    let g = Grid3::disk(16, 4).unwrap();
    assert!(taylor_green(&g).is_err());
}
