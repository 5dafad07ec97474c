use pelab::holder::{admissible, estimate_exponents, increments, seminorm_aniso, Regime, ZWindow};
use pelab::synth::{make_weierstrass, SyntheticSpec};
use pelab::{Grid3, HField, SField};
use proptest::prelude::*;

fn field(alpha: f64, beta: f64, k: u32, seed: u64, n: usize) -> HField {
    let g = Grid3::channel(n, n, n).unwrap();
    make_weierstrass(&SyntheticSpec::new(alpha, beta, k).seed(seed), &g).unwrap()
}

/// Brute-force max increment of a scalar field along one lattice axis.
fn max_increment(f: &[f64], g: &Grid3, axis: usize, m: usize) -> f64 {
    let nzp = g.nzp();
    let mut best = 0.0f64;
    for i in 0..g.nx {
        for j in 0..g.ny {
            for k in 0..nzp {
                let (i2, j2, k2) = match axis {
                    0 => ((i + m) % g.nx, j, k),
                    1 => (i, (j + m) % g.ny, k),
                    _ if k + m < nzp => (i, j, k + m),
                    _ => continue,
                };
                let a = f[g.node(g.column(i, j), k)];
                let b = f[g.node(g.column(i2, j2), k2)];
                best = best.max((a - b).abs());
            }
        }
    }
    best
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn seminorm_scales_with_the_field(seed in 0u64..1000, c in -5.0..5.0f64, p in -3i32..4) {
        let u = field(0.6, 0.5, 3, seed, 32);
        let s = seminorm_aniso(&u, 0.6, 0.5).unwrap();
        let scaled = seminorm_aniso(&u.scaled(c), 0.6, 0.5).unwrap();
        prop_assert!((scaled - c.abs() * s).abs() <= 1e-13 * (c.abs() * s));
        let two = 2f64.powi(p);
        prop_assert_eq!(seminorm_aniso(&u.scaled(two), 0.6, 0.5).unwrap(), two * s);
    }

    #[test]
    fn dropping_offsets_never_raises_the_seminorm(seed in 0u64..1000, keep in 1usize..4) {
        let u = field(0.7, 0.6, 3, seed, 32);
        let full = increments(&u, ZWindow::default()).unwrap();
        prop_assert!(full.vertical.len() >= 4 && full.axis_levels.len() >= 4);
        prop_assert!(full.horizontal.iter().all(|(_, v)| *v >= 0.0));
        prop_assert!(full.vertical.iter().all(|(_, v)| *v >= 0.0));
        let mut part = full.clone();
        part.horizontal.truncate(keep);
        part.vertical.truncate(keep);
        prop_assert!(part.seminorm(0.7, 0.6) <= full.seminorm(0.7, 0.6));
    }

    #[test]
    fn axis_increments_match_brute_force(seed in 0u64..1000) {
        let u = field(0.7, 0.6, 3, seed, 16);
        let g = u.grid.clone();
        let s = SField::new(g.clone(), u.comp(0).to_vec()).unwrap();
        let inc = increments(&s, ZWindow::default()).unwrap();
        for (off, v) in &inc.horizontal {
            if off.dj == 0 && off.di > 0 {
                let want = max_increment(&s.values, &g, 0, off.di as usize);
                prop_assert_eq!(*v, want);
            }
        }
        for (d, v) in &inc.vertical {
            let m = (d / g.hz).round() as usize;
            prop_assert_eq!(*v, max_increment(&s.values, &g, 2, m));
        }
    }

    #[test]
    fn regime_classification(alpha in 0.01..1.99f64, beta in 0.01..0.99f64) {
        let r = admissible(alpha, beta).unwrap();
        let (lo, hi) = (alpha.min(beta), alpha.max(beta));
        let interior = alpha > 0.5 && alpha < 1.0 && beta > 0.5 && 2.0 * lo + hi > 2.0;
        let smooth = alpha > 1.0 && beta < 0.5 && alpha + 2.0 * beta > 2.0;
        let want = if interior { Regime::Interior } else if smooth { Regime::SmoothHorizontal } else { Regime::Inadmissible };
        prop_assert_eq!(r, want);
    }
}

#[test]
fn estimator_matches_the_structure_function_oracle() {
    let u = field(0.7, 0.5, 5, 11, 64);
    let g = u.grid.clone();
    let rep = estimate_exponents(&u).unwrap();
    // Oracle: Euclidean max increments along x and y, then along z, over the reported offsets.
    let norm_inc = |axis: usize, m: usize| -> f64 {
        let nzp = g.nzp();
        let mut best = 0.0f64;
        for i in 0..g.nx {
            for j in 0..g.ny {
                for k in 0..nzp {
                    let (i2, j2, k2) = match axis {
                        0 => ((i + m) % g.nx, j, k),
                        1 => (i, (j + m) % g.ny, k),
                        _ if k + m < nzp => (i, j, k + m),
                        _ => continue,
                    };
                    let (a, b) = (g.node(g.column(i, j), k), g.node(g.column(i2, j2), k2));
                    let d0 = u.comp(0)[a] - u.comp(0)[b];
                    let d1 = u.comp(1)[a] - u.comp(1)[b];
                    best = best.max((d0 * d0 + d1 * d1).sqrt());
                }
            }
        }
        best
    };
    let h: Vec<(f64, f64)> = rep
        .offsets_h
        .iter()
        .map(|&d| {
            let m = (d / g.hx).round() as usize;
            (d, norm_inc(0, m).max(norm_inc(1, m)))
        })
        .collect();
    let z: Vec<(f64, f64)> = rep
        .offsets_z
        .iter()
        .map(|&d| (d, norm_inc(2, (d / g.hz).round() as usize)))
        .collect();
    for (i, (_, v)) in h.iter().enumerate() {
        assert!((rep.max_inc_h[i] - v).abs() <= 1e-12 * v, "h level {i}");
    }
    for (i, (_, v)) in z.iter().enumerate() {
        assert!((rep.max_inc_z[i] - v).abs() <= 1e-12 * v, "z level {i}");
    }
    assert!((rep.alpha_hat - ls_slope(&h)).abs() < 1e-10);
    assert!((rep.beta_hat - ls_slope(&z)).abs() < 1e-10);
}

#[test]
fn single_octave_field_looks_smooth() {
    let u = field(0.7, 0.5, 0, 4, 64);
    let rep = estimate_exponents(&u).unwrap();
    assert!(rep.alpha_hat >= 0.95, "{}", rep.alpha_hat);
    assert!(rep.beta_hat >= 0.95, "{}", rep.beta_hat);
}

#[test]
fn rougher_fields_estimate_rougher() {
    let a = estimate_exponents(&field(0.4, 0.4, 5, 2, 64)).unwrap();
    let b = estimate_exponents(&field(0.8, 0.8, 5, 2, 64)).unwrap();
    assert!(a.alpha_hat < b.alpha_hat);
    assert!(a.beta_hat < b.beta_hat);
}
