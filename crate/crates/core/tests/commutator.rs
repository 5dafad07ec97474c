use pelab::commutator::{
    cet_decompose, commutator_sweep, horizontal_functional, predicted_exponents,
};
use pelab::fit::{dyadic, ScalingFit};
use pelab::hydrostatics::reconstruct_w;
use pelab::mollify::{mollify, Mollifier};
use pelab::synth::{make_weierstrass, taylor_green, SyntheticSpec};
use pelab::weights::{horizontal_bump, plateau_1d};
use pelab::{Grid3, HField, SField};
use proptest::prelude::*;

fn scalar(u: &HField, i: usize) -> SField {
    SField::new(u.grid.clone(), u.comp(i).to_vec()).unwrap()
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    ScalingFit::new(pts.to_vec()).unwrap().slope
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn cet_identity_on_random_pairs(
        a1 in 0.3..0.95f64, b1 in 0.3..0.95f64, s1 in any::<u64>(),
        a2 in 0.3..0.95f64, b2 in 0.3..0.95f64, s2 in any::<u64>(),
        eps in 0.13..0.3f64,
        radial in any::<bool>(),
    ) {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let u = make_weierstrass(&SyntheticSpec::new(a1, b1, 3).seed(s1), &g).unwrap();
        let w = make_weierstrass(&SyntheticSpec::new(a2, b2, 3).seed(s2), &g).unwrap();
        let mut m = Mollifier::new(eps).domain_scaled();
        if radial {
            m = m.radial();
        }
        let t = cet_decompose(&scalar(&u, 0), &scalar(&w, 1), &m).unwrap();
        prop_assert!(t.defect <= 1e-10 * t.scale, "{} vs {}", t.defect, t.scale);
    }

    #[test]
    fn mollified_square_never_exceeds_mollified_of_square(seed in any::<u64>(), eps in 0.13..0.3f64) {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let f = scalar(&make_weierstrass(&SyntheticSpec::new(0.5, 0.5, 3).seed(seed), &g).unwrap(), 0);
        let m = Mollifier::new(eps).domain_scaled().periodic_z();
        let fe = mollify(&f, &m).unwrap();
        let sq = SField::new(g.clone(), f.values.iter().map(|v| v * v).collect()).unwrap();
        let sqe = mollify(&sq, &m).unwrap();
        for n in 0..fe.values.len() {
            prop_assert!(fe.values[n] * fe.values[n] - sqe.values[n] <= 1e-13 * sqe.values[n].abs().max(1.0));
        }
    }

    #[test]
    fn horizontal_functional_is_cubic(seed in 0u64..1000) {
        let g = Grid3::channel(32, 32, 32).unwrap();
        let u = make_weierstrass(&SyntheticSpec::new(0.7, 0.7, 3).seed(seed).column_balanced(), &g).unwrap();
        let m = Mollifier::new(0.125).domain_scaled().periodic_z();
        let psi = horizontal_bump(&g);
        let one = horizontal_functional(&u, &m, 1.0, &psi).unwrap();
        let two = horizontal_functional(&u.scaled(2.0), &m, 1.0, &psi).unwrap();
        prop_assert!(two <= 8.0 * one * (1.0 + 1e-10));
        prop_assert!((two - 8.0 * one).abs() <= 1e-10 * 8.0 * one);
    }
}

#[test]
fn predicted_exponent_arithmetic() {
    let p = predicted_exponents(0.7, 0.7).unwrap();
    assert!((p.e1 - 1.1).abs() < 1e-12 && (p.e2 - 0.1).abs() < 1e-12 && (p.ew + 0.3).abs() < 1e-12);
    let q = predicted_exponents(0.9, 0.6).unwrap();
    assert!((q.e1 - 1.1).abs() < 1e-12 && (q.e2 - 0.1).abs() < 1e-12);
    assert!(predicted_exponents(0.4, 0.4).is_err());
}

#[test]
fn constants_have_no_commutator() {
    let g = Grid3::channel(16, 16, 16).unwrap();
    let m = Mollifier::new(0.2).domain_scaled();
    let t = cet_decompose(&SField::constant(&g, 2.5), &SField::constant(&g, -1.5), &m).unwrap();
    // Near the lids the cutoff stencil loses mass; only the valid band is exact.
    let (k0, k1) = m.valid_z(&g).unwrap();
    let nzp = g.nzp();
    for n in (0..g.n_nodes()).filter(|n| (k0..=k1).contains(&(n % nzp))) {
        for v in [t.a.values[n], t.b.values[n], t.c.values[n]] {
            assert!(v.abs() <= 1e-13, "{v} at {n}");
        }
    }
    let u = HField::from_fn(&g, |_, _, _| [1.0, -2.0]);
    let psi = horizontal_bump(&g);
    let f = horizontal_functional(&u, &m.clone().periodic_z(), 1.0, &psi).unwrap();
    assert!(f <= 1e-13, "{f}");
}

#[test]
fn taylor_green_functional_decays_quadratically() {
    let g = Grid3::channel(256, 256, 48).unwrap();
    let u = taylor_green(&g).unwrap();
    // Off-centre: a bump centred on a symmetry point of the vortex array cancels exactly.
    let psi = SField::from_fn(&g, |x, y, _| {
        plateau_1d(x, 1.3, 2.4, 0.8) * plateau_1d(y, 2.2, 3.1, 0.8)
    });
    let base = Mollifier::new(1.0).periodic_z();
    let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&e| {
            (
                e,
                horizontal_functional(&u, &base.with_eps(e), 1.0, &psi).unwrap(),
            )
        })
        .collect();
    let s = log_slope(&pts);
    assert!(s >= 1.8, "slope {s} from {pts:?}");
}

#[test]
fn smooth_fields_fit_steeper_than_rough_fields() {
    let g = Grid3::channel(64, 64, 64).unwrap();
    let psi = horizontal_bump(&g);
    let m = Mollifier::new(1.0).domain_scaled().periodic_z();
    let eps = dyadic(0.25, 4);
    let sweep = |k: u32| {
        let u = make_weierstrass(
            &SyntheticSpec::new(0.7, 0.7, k).seed(3).column_balanced(),
            &g,
        )
        .unwrap();
        let w = reconstruct_w(&u).unwrap();
        commutator_sweep(&u, Some(&w), &m, &eps, 1.0, &psi, None).unwrap()
    };
    let (smooth, rough) = (sweep(1), sweep(5));
    assert!(
        smooth.fit_t1.slope > rough.fit_t1.slope,
        "{} vs {}",
        smooth.fit_t1.slope,
        rough.fit_t1.slope
    );
}
