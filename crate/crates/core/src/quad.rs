//! Grid quadrature with order-independent summation, plus adaptive
//! Gauss-Kronrod for the analytic boundary integrals.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::field::SField;
use crate::grid::Grid3;

/// Pairwise (cascade) summation; result depends only on the slice contents.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if v.len() <= BLOCK {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Integral over the grid domain of `f(node)`: horizontal midpoint/lattice
/// rule times the vertical trapezoid rule.
pub fn integrate_with(grid: &Grid3, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let nzp = grid.nzp();
    let nz = grid.nz;
    let cols = crate::par::map(grid.n_columns(), |c| {
        let base = c * nzp;
        let mut s = 0.5 * (f(base) + f(base + nz));
        for k in 1..nz {
            s += f(base + k);
        }
        s
    });
    pairwise_sum(&cols) * grid.hx * grid.hy * grid.hz
}

pub fn integrate_values(grid: &Grid3, values: &[f64]) -> f64 {
    integrate_with(grid, |n| values[n])
}

pub fn integrate(f: &SField) -> f64 {
    integrate_values(&f.grid, &f.values)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (estimate, error).
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[7] * fc;
    let mut rg = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Nodes and weights of the 15-point Kronrod rule on `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[7] * h); 15];
    for j in 0..7 {
        out[2 * j] = (c - h * XGK[j], WGK[j] * h);
        out[2 * j + 1] = (c + h * XGK[j], WGK[j] * h);
    }
    out
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss-Kronrod over `[a, b]` started from `pieces` equal
/// panels. Stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    pieces: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const MAX_PANELS: usize = 4000;
    let pieces = pieces.max(1);
    let mut heap = BinaryHeap::new();
    let w = (b - a) / pieces as f64;
    for i in 0..pieces {
        let pa = a + i as f64 * w;
        let pb = if i + 1 == pieces { b } else { pa + w };
        let (val, err) = gk15(&mut f, pa, pb);
        heap.push(Panel {
            a: pa,
            b: pb,
            val,
            err,
        });
    }
    let mut total: f64 = heap.iter().map(|p| p.val).sum();
    let mut err: f64 = heap.iter().map(|p| p.err).sum();
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(heap.iter().map(|p| p.val).sum());
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "error {err:.3e} above tolerance after {MAX_PANELS} panels on [{a}, {b}]"
            )));
        }
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::Quadrature(format!("panel collapsed near {m}")));
        }
        total -= p.val;
        err -= p.err;
        for (pa, pb) in [(p.a, m), (m, p.b)] {
            let (val, e) = gk15(&mut f, pa, pb);
            total += val;
            err += e;
            heap.push(Panel {
                a: pa,
                b: pb,
                val,
                err: e,
            });
        }
        if err < 0.0 {
            err = heap.iter().map(|p| p.err).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pairwise_matches_naive_on_small() {
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 45.0);
        let w: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = w.iter().sum();
        assert!((pairwise_sum(&w) - naive).abs() < 1e-12);
    }

    #[test]
    fn channel_volume_and_trig() {
        let g = Grid3::channel(16, 12, 8).unwrap();
        let one = SField::constant(&g, 1.0);
        assert!((integrate(&one) - 4.0 * PI * PI).abs() < 1e-12);
        let s = SField::from_fn(&g, |x, _, _| x.sin());
        assert!(integrate(&s).abs() < 1e-12);
        let c2 = SField::from_fn(&g, |x, _, _| x.cos().powi(2));
        assert!((integrate(&c2) - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_in_z_is_second_order() {
        let g = Grid3::channel(4, 4, 64).unwrap();
        let f = SField::from_fn(&g, |_, _, z| z * z);
        let exact = 4.0 * PI * PI / 3.0;
        let err = (integrate(&f) - exact).abs() / exact;
        assert!(err < 2e-4 && err > 1e-6);
    }

    #[test]
    fn kronrod_polynomial_exact() {
        let (v, _) = gk15(&mut |x: f64| x.powi(20), -1.0, 1.0);
        assert!((v - 2.0 / 21.0).abs() < 1e-14);
        let (_, e) = gk15(&mut |x: f64| x.powi(12), -1.0, 1.0);
        assert!(e < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, 1, 1e-10, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
        let s = adaptive(|x: f64| x.sin(), 0.0, PI, 4, 1e-12, 0.0).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(|x: f64| 1.0 / x, 0.0, 1.0, 1, 1e-12, 0.0);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
