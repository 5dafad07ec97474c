//! Manufactured velocity fields.
//!
//! The Weierstrass field is a horizontal lacunary sum plus a vertical one:
//!
//! `u_i = sum_k l^(-a k) [cos(l^k x + phi) + cos(l^k y + chi)] * c(z) + sum_k l^(-b k) cos(2 pi l^k z + theta)`
//!
//! with `c(z) = 1`, or `c(z) = cos(2 pi z)` for the column-balanced variant
//! whose column mean is constant, so the vertical velocity is well defined.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::HField;
use crate::grid::Grid3;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub alpha: f64,
    pub beta: f64,
    pub octaves: u32,
    pub lambda: f64,
    /// `None` sets every phase to zero.
    pub seed: Option<u64>,
    /// Subtract the column mean of the vertical part.
    pub zero_z_mean: bool,
    /// Modulate the horizontal part by `cos(2 pi z)`.
    pub column_balanced: bool,
}

impl SyntheticSpec {
    pub fn new(alpha: f64, beta: f64, octaves: u32) -> Self {
        SyntheticSpec {
            alpha,
            beta,
            octaves,
            lambda: 2.0,
            seed: None,
            zero_z_mean: false,
            column_balanced: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn column_balanced(mut self) -> Self {
        self.column_balanced = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::OutOfRange(format!(
                "alpha = {} not in (0, 2)",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::OutOfRange(format!(
                "beta = {} not in (0, 1)",
                self.beta
            )));
        }
        if !(self.lambda > 1.0) || self.lambda.fract() != 0.0 {
            return Err(Error::OutOfRange(format!(
                "base {} must be an integer > 1 so every octave is periodic",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Largest octave frequency `lambda^K`.
    pub fn top_frequency(&self) -> f64 {
        self.lambda.powi(self.octaves as i32)
    }

    /// Largest octave count whose top frequency a grid still resolves.
    pub fn max_resolvable_octaves(grid: &Grid3, lambda: f64) -> u32 {
        let mut k = 0;
        while resolves(grid, lambda.powi(k as i32 + 1)) {
            k += 1;
        }
        k
    }

    /// Phases `[component][octave][phi, chi, theta]`. Each component draws
    /// from its own stream, so raising `octaves` keeps the lower phases.
    pub fn phases(&self) -> Vec<Vec<[f64; 3]>> {
        let n = self.octaves as usize + 1;
        match self.seed {
            None => vec![vec![[0.0; 3]; n]; 2],
            Some(s) => (0..2u64)
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(s);
                    rng.set_stream(c);
                    (0..n)
                        .map(|_| {
                            let mut p = [0.0; 3];
                            for v in &mut p {
                                *v = 2.0 * PI * rng.gen::<f64>();
                            }
                            p
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Frequency `f` along x/y and `2 pi f` along z both sit below Nyquist.
fn resolves(grid: &Grid3, f: f64) -> bool {
    let horiz = grid.nx as f64 / 2.0;
    let horiz = if grid.ny > 1 {
        horiz.min(grid.ny as f64 / 2.0)
    } else {
        horiz
    };
    f <= horiz && f <= grid.nz as f64 / 2.0
}

pub fn make_weierstrass(spec: &SyntheticSpec, grid: &Grid3) -> Result<HField> {
    spec.validate()?;
    grid.require_channel()?;
    let top = spec.top_frequency();
    if !resolves(grid, top) {
        return Err(Error::Resolution(format!(
            "top octave frequency {top} exceeds half the points per period on {}x{}x{}",
            grid.nx, grid.ny, grid.nz
        )));
    }
    let phases = spec.phases();
    let nzp = grid.nzp();
    let lam = spec.lambda;
    let mut comps = Vec::with_capacity(2);
    for ph in &phases {
        let mut xs = vec![0.0; grid.nx];
        let mut ys = vec![0.0; grid.ny];
        let mut zs = vec![0.0; nzp];
        for (k, p) in ph.iter().enumerate() {
            let f = lam.powi(k as i32);
            let ah = lam.powf(-spec.alpha * k as f64);
            let av = lam.powf(-spec.beta * k as f64);
            for (i, v) in xs.iter_mut().enumerate() {
                *v += ah * (f * i as f64 * grid.hx + p[0]).cos();
            }
            for (j, v) in ys.iter_mut().enumerate() {
                *v += ah * (f * j as f64 * grid.hy + p[1]).cos();
            }
            for (kz, v) in zs.iter_mut().enumerate() {
                *v += av * (2.0 * PI * f * grid.z(kz) + p[2]).cos();
            }
        }
        if spec.zero_z_mean {
            let mean = trapezoid_mean(&zs);
            zs.iter_mut().for_each(|v| *v -= mean);
        }
        let modulation: Vec<f64> = (0..nzp)
            .map(|k| {
                if spec.column_balanced {
                    (2.0 * PI * grid.z(k)).cos()
                } else {
                    1.0
                }
            })
            .collect();
        let mut vals = vec![0.0; grid.n_nodes()];
        crate::par::for_chunks(&mut vals, nzp, |col, out| {
            let (i, j) = grid.column_ij(col);
            let h = xs[i] + ys[j];
            for k in 0..nzp {
                out[k] = h * modulation[k] + zs[k];
            }
        });
        comps.push(vals);
    }
    let u2 = comps.pop().unwrap();
    let u1 = comps.pop().unwrap();
    Ok(HField {
        grid: grid.clone(),
        u1,
        u2,
    })
}

fn trapezoid_mean(v: &[f64]) -> f64 {
    let n = v.len() - 1;
    let inner: f64 = v[1..n].iter().sum();
    (inner + 0.5 * (v[0] + v[n])) / n as f64
}

/// Steady Euler flow `(sin x cos y, -cos x sin y)`, constant in z.
pub fn taylor_green(grid: &Grid3) -> Result<HField> {
    grid.require_channel()?;
    Ok(HField::from_fn(grid, |x, y, _| {
        [x.sin() * y.cos(), -x.cos() * y.sin()]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_sum_at_origin() {
        let g = Grid3::channel(8, 8, 8).unwrap();
        let u = make_weierstrass(&SyntheticSpec::new(0.7, 0.7, 1), &g).unwrap();
        let expect = 3.0 * (1.0 + 2f64.powf(-0.7));
        assert!((u.u1[0] - expect).abs() < 1e-12);
        assert!((u.u2[0] - expect).abs() < 1e-12);
        assert!((expect - 4.847).abs() < 1e-3);
    }

    #[test]
    fn rejects_unresolved_octave() {
        let g = Grid3::channel(16, 16, 16).unwrap();
        assert!(make_weierstrass(&SyntheticSpec::new(0.7, 0.7, 3), &g).is_ok());
        assert!(matches!(
            make_weierstrass(&SyntheticSpec::new(0.7, 0.7, 4), &g),
            Err(Error::Resolution(_))
        ));
        assert_eq!(SyntheticSpec::max_resolvable_octaves(&g, 2.0), 3);
    }

    #[test]
    fn rejects_bad_exponents_and_base() {
        let g = Grid3::channel(8, 8, 8).unwrap();
        assert!(make_weierstrass(&SyntheticSpec::new(2.0, 0.5, 1), &g).is_err());
        assert!(make_weierstrass(&SyntheticSpec::new(0.5, 1.0, 1), &g).is_err());
        let mut s = SyntheticSpec::new(0.5, 0.5, 1);
        s.lambda = 2.5;
        assert!(make_weierstrass(&s, &g).is_err());
    }

    #[test]
    fn seeded_fields_are_reproducible() {
        let g = Grid3::channel(16, 8, 16).unwrap();
        let s = SyntheticSpec::new(0.6, 0.4, 2).seed(11);
        let a = make_weierstrass(&s, &g).unwrap();
        let b = make_weierstrass(&s, &g).unwrap();
        assert_eq!(a, b);
        let c = make_weierstrass(&s.clone().seed(12), &g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn vertical_part_already_has_zero_mean() {
        // Integer bases give whole periods in z, so the flag is a no-op up to rounding.
        let g = Grid3::channel(8, 8, 32).unwrap();
        let mut s = SyntheticSpec::new(0.7, 0.3, 2).seed(3);
        let plain = make_weierstrass(&s, &g).unwrap();
        s.zero_z_mean = true;
        let zeroed = make_weierstrass(&s, &g).unwrap();
        for (a, b) in plain.u1.iter().zip(&zeroed.u1) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn column_balanced_mean_is_constant() {
        let g = Grid3::channel(16, 16, 32).unwrap();
        let u = make_weierstrass(
            &SyntheticSpec::new(0.7, 0.7, 3).seed(5).column_balanced(),
            &g,
        )
        .unwrap();
        let nzp = g.nzp();
        let means: Vec<f64> = (0..g.n_columns())
            .map(|c| trapezoid_mean(&u.u1[c * nzp..(c + 1) * nzp]))
            .collect();
        for m in &means {
            assert!((m - means[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn taylor_green_values() {
        let g = Grid3::channel(8, 8, 2).unwrap();
        let u = taylor_green(&g).unwrap();
        let n = g.node(g.column(2, 0), 1);
        assert!((u.u1[n] - 1.0).abs() < 1e-15);
        assert!(u.u2[n].abs() < 1e-15);
        assert!(taylor_green(&Grid3::disk(8, 2).unwrap()).is_err());
    }
}
