//! FFT line transforms on `[i][j][k]` arrays (k fastest) and finite
//! differences in z.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid3;

/// Array shape: `nx * ny` columns of `nzp` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nzp: usize,
}

impl Dims {
    pub fn of(grid: &Grid3) -> Self {
        Dims {
            nx: grid.nx,
            ny: grid.ny,
            nzp: grid.nzp(),
        }
    }

    pub fn horizontal(nx: usize, ny: usize) -> Self {
        Dims { nx, ny, nzp: 1 }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nzp
    }
}

/// Signed wavenumber of FFT bin `m` for length `n`.
#[inline]
pub fn wavenumber(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Multiplier for d/dx on a `2 pi` period; the Nyquist bin is dropped.
#[inline]
pub fn ik(m: usize, n: usize) -> Complex64 {
    if n.is_multiple_of(2) && m == n / 2 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, wavenumber(m, n))
    }
}

struct Plan {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Plan {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Plan {
            fwd: p.plan_fft_forward(n),
            inv: p.plan_fft_inverse(n),
            n,
        }
    }

    /// Forward, multiply bin `m` by `mult(m)`, inverse, normalise.
    fn filter(
        &self,
        line: &mut [Complex64],
        scratch: &mut [Complex64],
        mult: &(impl Fn(usize) -> Complex64 + ?Sized),
    ) {
        self.fwd.process_with_scratch(line, scratch);
        let s = 1.0 / self.n as f64;
        for (m, c) in line.iter_mut().enumerate() {
            *c *= mult(m) * s;
        }
        self.inv.process_with_scratch(line, scratch);
    }

    fn scratch(&self) -> Vec<Complex64> {
        let n = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); n]
    }
}

/// Applies a Fourier multiplier along x to every x-line.
pub fn filter_x(values: &[f64], d: Dims, mult: impl Fn(usize) -> Complex64 + Sync) -> Vec<f64> {
    assert_eq!(values.len(), d.len());
    let plan = Plan::new(d.nx);
    let stride = d.ny * d.nzp;
    const BLOCK: usize = 64;
    let nblocks = stride.div_ceil(BLOCK);
    let blocks = crate::par::map(nblocks, |b| {
        let o0 = b * BLOCK;
        let width = BLOCK.min(stride - o0);
        let mut out = vec![0.0; width * d.nx];
        let mut line = vec![Complex64::new(0.0, 0.0); d.nx];
        let mut scratch = plan.scratch();
        for w in 0..width {
            for (i, c) in line.iter_mut().enumerate() {
                *c = Complex64::new(values[i * stride + o0 + w], 0.0);
            }
            plan.filter(&mut line, &mut scratch, &mult);
            for i in 0..d.nx {
                out[i * width + w] = line[i].re;
            }
        }
        out
    });
    let mut out = vec![0.0; values.len()];
    for (b, blk) in blocks.iter().enumerate() {
        let o0 = b * BLOCK;
        let width = BLOCK.min(stride - o0);
        for i in 0..d.nx {
            out[i * stride + o0..i * stride + o0 + width]
                .copy_from_slice(&blk[i * width..(i + 1) * width]);
        }
    }
    out
}

/// Applies a Fourier multiplier along y to every y-line.
pub fn filter_y(values: &[f64], d: Dims, mult: impl Fn(usize) -> Complex64 + Sync) -> Vec<f64> {
    assert_eq!(values.len(), d.len());
    let plan = Plan::new(d.ny);
    let slab = d.ny * d.nzp;
    let mut out = vec![0.0; values.len()];
    crate::par::for_chunks(&mut out, slab, |i, dst| {
        let src = &values[i * slab..(i + 1) * slab];
        let mut line = vec![Complex64::new(0.0, 0.0); d.ny];
        let mut scratch = plan.scratch();
        for k in 0..d.nzp {
            for (j, c) in line.iter_mut().enumerate() {
                *c = Complex64::new(src[j * d.nzp + k], 0.0);
            }
            plan.filter(&mut line, &mut scratch, &mult);
            for j in 0..d.ny {
                dst[j * d.nzp + k] = line[j].re;
            }
        }
    });
    out
}

/// Multiplier along z for fields periodic with period 1; node `nz` mirrors node 0.
pub fn filter_z_periodic(
    values: &[f64],
    d: Dims,
    mult: impl Fn(usize) -> Complex64 + Sync,
) -> Vec<f64> {
    assert_eq!(values.len(), d.len());
    let nz = d.nzp - 1;
    let plan = Plan::new(nz);
    let mut out = vec![0.0; values.len()];
    crate::par::for_chunks(&mut out, d.nzp, |c, dst| {
        let src = &values[c * d.nzp..(c + 1) * d.nzp];
        let mut line: Vec<Complex64> = src[..nz].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut scratch = plan.scratch();
        plan.filter(&mut line, &mut scratch, &mult);
        for k in 0..nz {
            dst[k] = line[k].re;
        }
        dst[nz] = dst[0];
    });
    out
}

pub fn ddx(values: &[f64], d: Dims) -> Vec<f64> {
    let n = d.nx;
    filter_x(values, d, |m| ik(m, n))
}

pub fn ddy(values: &[f64], d: Dims) -> Vec<f64> {
    if d.ny == 1 {
        return vec![0.0; values.len()];
    }
    let n = d.ny;
    filter_y(values, d, |m| ik(m, n))
}

/// Spectral d/dz for 1-periodic columns.
pub fn ddz_periodic(values: &[f64], d: Dims) -> Vec<f64> {
    let n = d.nzp - 1;
    filter_z_periodic(values, d, |m| ik(m, n) * (2.0 * PI))
}

/// Second-order d/dz: centred inside, one-sided at the lids.
pub fn ddz_fd(values: &[f64], nzp: usize, hz: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let nz = nzp - 1;
    crate::par::for_chunks(&mut out, nzp, |c, dst| {
        let f = &values[c * nzp..(c + 1) * nzp];
        if nz == 1 {
            let s = (f[1] - f[0]) / hz;
            dst[0] = s;
            dst[1] = s;
            return;
        }
        dst[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * hz);
        for k in 1..nz {
            dst[k] = (f[k + 1] - f[k - 1]) / (2.0 * hz);
        }
        dst[nz] = (3.0 * f[nz] - 4.0 * f[nz - 1] + f[nz - 2]) / (2.0 * hz);
    });
    out
}

/// Solves `-lap p = f` on the `2 pi` torus for an `nx * ny` array, zero mean.
/// Returns `p` and the mean of `f` (which the solve discards).
pub fn poisson_torus(f: &[f64], nx: usize, ny: usize) -> (Vec<f64>, f64) {
    let d = Dims::horizontal(nx, ny);
    let mean = crate::quad::pairwise_sum(f) / f.len() as f64;
    let mut spec: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut spec, d, false);
    for i in 0..nx {
        let kx = wavenumber(i, nx);
        for j in 0..ny {
            let ky = wavenumber(j, ny);
            let k2 = kx * kx + ky * ky;
            let c = &mut spec[i * ny + j];
            *c = if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                *c / k2
            };
        }
    }
    fft2(&mut spec, d, true);
    let s = 1.0 / (nx * ny) as f64;
    (spec.iter().map(|c| c.re * s).collect(), mean)
}

/// In-place unnormalised 2-D FFT of an `nx * ny` complex array (y fastest).
pub fn fft2(data: &mut [Complex64], d: Dims, inverse: bool) {
    let mut p = FftPlanner::new();
    let (px, py) = if inverse {
        (p.plan_fft_inverse(d.nx), p.plan_fft_inverse(d.ny))
    } else {
        (p.plan_fft_forward(d.nx), p.plan_fft_forward(d.ny))
    };
    for row in data.chunks_mut(d.ny) {
        py.process(row);
    }
    let mut line = vec![Complex64::new(0.0, 0.0); d.nx];
    for j in 0..d.ny {
        for i in 0..d.nx {
            line[i] = data[i * d.ny + j];
        }
        px.process(&mut line);
        for i in 0..d.nx {
            data[i * d.ny + j] = line[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(d: Dims, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
        let hx = 2.0 * PI / d.nx as f64;
        let hy = 2.0 * PI / d.ny as f64;
        let hz = 1.0 / (d.nzp - 1).max(1) as f64;
        let mut v = Vec::with_capacity(d.len());
        for i in 0..d.nx {
            for j in 0..d.ny {
                for k in 0..d.nzp {
                    v.push(f(i as f64 * hx, j as f64 * hy, k as f64 * hz));
                }
            }
        }
        v
    }

    #[test]
    fn derivatives_of_trig_are_exact() {
        let d = Dims {
            nx: 16,
            ny: 12,
            nzp: 9,
        };
        let f = field(d, |x, y, z| {
            (2.0 * x).sin() * (3.0 * y).cos() + (2.0 * PI * z).sin()
        });
        let fx = ddx(&f, d);
        let fy = ddy(&f, d);
        let fz = ddz_periodic(&f, d);
        let ex = field(d, |x, y, _| 2.0 * (2.0 * x).cos() * (3.0 * y).cos());
        let ey = field(d, |x, y, _| -3.0 * (2.0 * x).sin() * (3.0 * y).sin());
        let ez = field(d, |_, _, z| 2.0 * PI * (2.0 * PI * z).cos());
        for n in 0..d.len() {
            assert!((fx[n] - ex[n]).abs() < 1e-12);
            assert!((fy[n] - ey[n]).abs() < 1e-12);
            assert!((fz[n] - ez[n]).abs() < 1e-11);
        }
    }

    #[test]
    fn fd_dz_exact_for_quadratics() {
        let nzp = 9;
        let hz = 1.0 / 8.0;
        let f: Vec<f64> = (0..nzp).map(|k| (k as f64 * hz).powi(2)).collect();
        let d = ddz_fd(&f, nzp, hz);
        for k in 0..nzp {
            assert!((d[k] - 2.0 * k as f64 * hz).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_inverts_laplacian() {
        let (nx, ny) = (16, 8);
        let d = Dims::horizontal(nx, ny);
        let f = field(d, |x, y, _| 5.0 * (x + 2.0 * y).cos() + 0.25);
        let (p, mean) = poisson_torus(&f, nx, ny);
        let e = field(d, |x, y, _| (x + 2.0 * y).cos());
        assert!((mean - 0.25).abs() < 1e-14);
        for n in 0..p.len() {
            assert!((p[n] - e[n]).abs() < 1e-13);
        }
    }
}
