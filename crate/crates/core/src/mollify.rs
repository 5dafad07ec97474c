//! Compactly supported even mollifiers, discrete convolution, and the
//! plateau cutoff used to extend interior fields to the whole space.

use crate::error::{Error, Result};
use crate::field::{same_grid, HField, SField};
use crate::grid::Grid3;
use crate::quad::integrate_values;

/// Standard bump `exp(-1/(1-r^2))` on `|r| < 1`.
pub fn bump(r: f64) -> f64 {
    let s = 1.0 - r * r;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelShape {
    /// `rho(|Y|/eps)`, supported in the ball (ellipsoid when scaled).
    Radial,
    /// Product of 1-D bumps, supported in the box; applied as three passes.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerticalMode {
    /// Field extended by zero outside `[0, 1]`; only nodes whose stencil
    /// stays inside the column are meaningful.
    Cutoff,
    /// Columns treated as 1-periodic.
    Periodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mollifier {
    pub eps: f64,
    pub kappa: Option<f64>,
    pub shape: KernelShape,
    /// Per-axis stretch: the kernel radius along axis `a` is `eps * scale[a]`.
    pub scale: [f64; 3],
    pub vertical: VerticalMode,
}

impl Mollifier {
    pub fn new(eps: f64) -> Self {
        Mollifier {
            eps,
            kappa: None,
            shape: KernelShape::Product,
            scale: [1.0; 3],
            vertical: VerticalMode::Cutoff,
        }
    }

    pub fn radial(mut self) -> Self {
        self.shape = KernelShape::Radial;
        self
    }

    pub fn periodic_z(mut self) -> Self {
        self.vertical = VerticalMode::Periodic;
        self
    }

    /// Radius measured in domain-normalised coordinates `(x/2pi, y/2pi, z)`.
    pub fn domain_scaled(mut self) -> Self {
        self.scale = [2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 1.0];
        self
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Mollifier {
            eps,
            ..self.clone()
        }
    }

    pub fn radii(&self) -> [f64; 3] {
        [
            self.eps * self.scale[0],
            self.eps * self.scale[1],
            self.eps * self.scale[2],
        ]
    }

    pub fn max_radius(&self) -> f64 {
        let r = self.radii();
        r[0].max(r[1]).max(r[2])
    }

    /// Every active axis needs at least two cells per radius.
    pub fn check(&self, grid: &Grid3) -> Result<()> {
        if !(self.eps > 0.0) || self.eps.is_infinite() {
            return Err(Error::OutOfRange(format!("eps = {}", self.eps)));
        }
        let r = self.radii();
        let axes = [
            ('x', r[0], grid.hx, true),
            ('y', r[1], grid.hy, grid.ny > 1),
            ('z', r[2], grid.hz, true),
        ];
        for (axis, radius, spacing, active) in axes {
            if active && radius < 2.0 * spacing * (1.0 - 1e-12) {
                return Err(Error::UnderResolvedKernel {
                    axis,
                    radius,
                    spacing,
                });
            }
        }
        Ok(())
    }

    pub fn kernel(&self, grid: &Grid3) -> Result<Kernel> {
        grid.require_channel()?;
        self.check(grid)?;
        let r = self.radii();
        let hs = [grid.hx, grid.hy, grid.hz];
        let half = |a: usize| -> usize {
            if a == 1 && grid.ny == 1 {
                0
            } else {
                let m = (r[a] / hs[a]).floor() as usize;
                if (m as f64 * hs[a]) >= r[a] {
                    m - 1
                } else {
                    m
                }
            }
        };
        let halves = [half(0), half(1), half(2)];
        match self.shape {
            KernelShape::Product => {
                let axis = |a: usize| -> Vec<f64> {
                    let m = halves[a] as isize;
                    if m == 0 {
                        return vec![1.0];
                    }
                    let w: Vec<f64> = (-m..=m).map(|t| bump(t as f64 * hs[a] / r[a])).collect();
                    let s: f64 = w.iter().sum();
                    w.iter().map(|v| v / s).collect()
                };
                Ok(Kernel::Product {
                    wx: axis(0),
                    wy: axis(1),
                    wz: axis(2),
                })
            }
            KernelShape::Radial => {
                let mut taps = Vec::new();
                let (mx, my, mz) = (halves[0] as isize, halves[1] as isize, halves[2] as isize);
                for a in -mx..=mx {
                    for b in -my..=my {
                        for c in -mz..=mz {
                            let qx = a as f64 * hs[0] / r[0];
                            let qy = if grid.ny == 1 {
                                0.0
                            } else {
                                b as f64 * hs[1] / r[1]
                            };
                            let qz = c as f64 * hs[2] / r[2];
                            let w = bump((qx * qx + qy * qy + qz * qz).sqrt());
                            if w > 0.0 {
                                taps.push(Tap {
                                    dx: a,
                                    dy: b,
                                    dz: c,
                                    w,
                                });
                            }
                        }
                    }
                }
                let s = crate::quad::pairwise_sum(&taps.iter().map(|t| t.w).collect::<Vec<_>>());
                for t in &mut taps {
                    t.w /= s;
                }
                Ok(Kernel::Radial { taps, halves })
            }
        }
    }

    /// Inclusive node range along z where the stencil stays in `[0, 1]`.
    pub fn valid_z(&self, grid: &Grid3) -> Result<(usize, usize)> {
        let k = self.kernel(grid)?;
        Ok(match self.vertical {
            VerticalMode::Periodic => (0, grid.nz),
            VerticalMode::Cutoff => {
                let m = k.half_width(2);
                if 2 * m > grid.nz {
                    (1, 0)
                } else {
                    (m, grid.nz - m)
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub dx: isize,
    pub dy: isize,
    pub dz: isize,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    Product {
        wx: Vec<f64>,
        wy: Vec<f64>,
        wz: Vec<f64>,
    },
    Radial {
        taps: Vec<Tap>,
        halves: [usize; 3],
    },
}

impl Kernel {
    pub fn half_width(&self, axis: usize) -> usize {
        match self {
            Kernel::Product { wx, wy, wz } => ([wx, wy, wz][axis].len() - 1) / 2,
            Kernel::Radial { halves, .. } => halves[axis],
        }
    }

    /// Full list of 3-D taps.
    pub fn taps(&self) -> Vec<Tap> {
        match self {
            Kernel::Radial { taps, .. } => taps.clone(),
            Kernel::Product { wx, wy, wz } => {
                let (mx, my, mz) = (
                    self.half_width(0) as isize,
                    self.half_width(1) as isize,
                    self.half_width(2) as isize,
                );
                let mut out = Vec::with_capacity(wx.len() * wy.len() * wz.len());
                for a in -mx..=mx {
                    for b in -my..=my {
                        for c in -mz..=mz {
                            let w = wx[(a + mx) as usize]
                                * wy[(b + my) as usize]
                                * wz[(c + mz) as usize];
                            if w > 0.0 {
                                out.push(Tap {
                                    dx: a,
                                    dy: b,
                                    dz: c,
                                    w,
                                });
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Kernel::Product { wx, wy, wz } => {
                wx.iter().sum::<f64>() * wy.iter().sum::<f64>() * wz.iter().sum::<f64>()
            }
            Kernel::Radial { taps, .. } => {
                crate::quad::pairwise_sum(&taps.iter().map(|t| t.w).collect::<Vec<_>>())
            }
        }
    }
}

/// Convolves node values with the kernel of `m`.
pub fn convolve(values: &[f64], grid: &Grid3, m: &Mollifier) -> Result<Vec<f64>> {
    let k = m.kernel(grid)?;
    Ok(convolve_with(values, grid, &k, m.vertical))
}

pub fn convolve_with(values: &[f64], grid: &Grid3, k: &Kernel, vertical: VerticalMode) -> Vec<f64> {
    match k {
        Kernel::Product { wx, wy, wz } => {
            let a = pass_z(values, grid, wz, vertical);
            let b = pass_y(&a, grid, wy);
            pass_x(&b, grid, wx)
        }
        Kernel::Radial { taps, .. } => {
            let taps = taps.clone();
            stencil_map(
                grid,
                vertical,
                |center, shifted| {
                    let mut s = 0.0;
                    for (t, n) in taps.iter().zip(shifted) {
                        let _ = center;
                        if let Some(n) = n {
                            s += t.w * values[*n];
                        }
                    }
                    s
                },
                k,
            )
        }
    }
}

/// Evaluates `f(center, neighbours)` at every node, where `neighbours[t]` is
/// the node at `center - tap_t` (or `None` outside the column under cutoff).
pub fn stencil_map(
    grid: &Grid3,
    vertical: VerticalMode,
    f: impl Fn(usize, &[Option<usize>]) -> f64 + Sync + Send,
    k: &Kernel,
) -> Vec<f64> {
    let taps = k.taps();
    let (nx, ny, nz, nzp) = (
        grid.nx as isize,
        grid.ny as isize,
        grid.nz as isize,
        grid.nzp(),
    );
    let mut out = vec![0.0; grid.n_nodes()];
    crate::par::for_chunks(&mut out, nzp, |col, dst| {
        let (i, j) = grid.column_ij(col);
        let mut nb: Vec<Option<usize>> = vec![None; taps.len()];
        for (kk, d) in dst.iter_mut().enumerate() {
            for (slot, t) in nb.iter_mut().zip(&taps) {
                let ii = (i as isize - t.dx).rem_euclid(nx) as usize;
                let jj = (j as isize - t.dy).rem_euclid(ny) as usize;
                let z = kk as isize - t.dz;
                let z = match vertical {
                    VerticalMode::Periodic => Some(z.rem_euclid(nz) as usize),
                    VerticalMode::Cutoff => (0..=nz).contains(&z).then_some(z as usize),
                };
                *slot = z.map(|z| grid.node(grid.column(ii, jj), z));
            }
            *d = f(col * nzp + kk, &nb);
        }
    });
    out
}

fn pass_z(src: &[f64], grid: &Grid3, w: &[f64], vertical: VerticalMode) -> Vec<f64> {
    let nzp = grid.nzp();
    let nz = grid.nz as isize;
    let m = ((w.len() - 1) / 2) as isize;
    let mut out = vec![0.0; src.len()];
    crate::par::for_chunks(&mut out, nzp, |c, dst| {
        let f = &src[c * nzp..(c + 1) * nzp];
        match vertical {
            VerticalMode::Periodic => {
                for k in 0..nz {
                    let mut s = 0.0;
                    for t in -m..=m {
                        s += w[(t + m) as usize] * f[(k + t).rem_euclid(nz) as usize];
                    }
                    dst[k as usize] = s;
                }
                dst[nz as usize] = dst[0];
            }
            VerticalMode::Cutoff => {
                for k in 0..=nz {
                    let mut s = 0.0;
                    for t in -m..=m {
                        let z = k + t;
                        if (0..=nz).contains(&z) {
                            s += w[(t + m) as usize] * f[z as usize];
                        }
                    }
                    dst[k as usize] = s;
                }
            }
        }
    });
    out
}

fn pass_y(src: &[f64], grid: &Grid3, w: &[f64]) -> Vec<f64> {
    if w.len() == 1 {
        return src.to_vec();
    }
    let nzp = grid.nzp();
    let ny = grid.ny as isize;
    let slab = grid.ny * nzp;
    let m = ((w.len() - 1) / 2) as isize;
    let mut out = vec![0.0; src.len()];
    crate::par::for_chunks(&mut out, slab, |i, dst| {
        let s = &src[i * slab..(i + 1) * slab];
        for j in 0..ny {
            let row = &mut dst[j as usize * nzp..(j as usize + 1) * nzp];
            for t in -m..=m {
                let jj = (j + t).rem_euclid(ny) as usize;
                let wt = w[(t + m) as usize];
                for (d, v) in row.iter_mut().zip(&s[jj * nzp..(jj + 1) * nzp]) {
                    *d += wt * v;
                }
            }
        }
    });
    out
}

fn pass_x(src: &[f64], grid: &Grid3, w: &[f64]) -> Vec<f64> {
    if w.len() == 1 {
        return src.to_vec();
    }
    let slab = grid.ny * grid.nzp();
    let nx = grid.nx as isize;
    let m = ((w.len() - 1) / 2) as isize;
    let mut out = vec![0.0; src.len()];
    crate::par::for_chunks(&mut out, slab, |i, dst| {
        for t in -m..=m {
            let ii = (i as isize + t).rem_euclid(nx) as usize;
            let wt = w[(t + m) as usize];
            for (d, v) in dst.iter_mut().zip(&src[ii * slab..(ii + 1) * slab]) {
                *d += wt * v;
            }
        }
    });
    out
}

pub trait Mollify: Sized {
    fn mollify(&self, m: &Mollifier) -> Result<Self>;
}

impl Mollify for SField {
    fn mollify(&self, m: &Mollifier) -> Result<Self> {
        Ok(SField {
            grid: self.grid.clone(),
            values: convolve(&self.values, &self.grid, m)?,
        })
    }
}

impl Mollify for HField {
    fn mollify(&self, m: &Mollifier) -> Result<Self> {
        let k = m.kernel(&self.grid)?;
        Ok(HField {
            grid: self.grid.clone(),
            u1: convolve_with(&self.u1, &self.grid, &k, m.vertical),
            u2: convolve_with(&self.u2, &self.grid, &k, m.vertical),
        })
    }
}

pub fn mollify<F: Mollify>(f: &F, m: &Mollifier) -> Result<F> {
    f.mollify(m)
}

/// Temporal pass over equally spaced snapshots; returns the snapshots whose
/// time stencil is complete (indices `m..len-m`).
pub fn mollify_time(snaps: &[SField], dt: f64, kappa: f64) -> Result<Vec<SField>> {
    if !(kappa >= 2.0 * dt) {
        return Err(Error::UnderResolvedKernel {
            axis: 't',
            radius: kappa,
            spacing: dt,
        });
    }
    let m = {
        let q = (kappa / dt).floor() as usize;
        if q as f64 * dt >= kappa {
            q - 1
        } else {
            q
        }
    };
    let w: Vec<f64> = (-(m as isize)..=m as isize)
        .map(|t| bump(t as f64 * dt / kappa))
        .collect();
    let s: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|v| v / s).collect();
    if snaps.len() < 2 * m + 1 {
        return Ok(Vec::new());
    }
    for s in snaps {
        same_grid(&s.grid, &snaps[0].grid)?;
    }
    Ok((m..snaps.len() - m)
        .map(|c| {
            let mut v = vec![0.0; snaps[0].values.len()];
            for (t, wt) in w.iter().enumerate() {
                for (d, x) in v.iter_mut().zip(&snaps[c + t - m].values) {
                    *d += wt * x;
                }
            }
            SField {
                grid: snaps[0].grid.clone(),
                values: v,
            }
        })
        .collect())
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Aabb {
    pub fn inflate(&self, d: f64) -> Aabb {
        Aabb {
            lo: self.lo.map(|v| v - d),
            hi: self.hi.map(|v| v + d),
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance(&self, p: [f64; 3]) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let d = (self.lo[a] - p[a]).max(p[a] - self.hi[a]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }
}

/// Quintic smoothstep on `[0, 1]`.
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

pub fn smoothstep_slope(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

/// Nested boxes `Q1 > Q2 > Q3` and the plateau `I2` (1 on `Q2`, 0 off `Q1`).
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffExtension {
    pub q1: Aabb,
    pub q2: Aabb,
    pub q3: Aabb,
    pub eta: f64,
}

impl CutoffExtension {
    /// `Q2` is `Q3` grown by `eta`; `Q1` is `Q2` grown by `2 eta`.
    pub fn new(q3: Aabb, eta: f64) -> Self {
        let q2 = q3.inflate(eta);
        CutoffExtension {
            q1: q2.inflate(2.0 * eta),
            q2,
            q3,
            eta,
        }
    }

    pub fn plateau(&self, p: [f64; 3]) -> f64 {
        if !self.q1.contains(p) {
            return 0.0;
        }
        1.0 - smoothstep(self.q2.distance(p) / (2.0 * self.eta))
    }

    fn check_region(&self, grid: &Grid3) -> Result<()> {
        grid.require_channel()?;
        let ext = [2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 1.0];
        for a in 0..3 {
            if self.q1.lo[a] < 0.0 || self.q1.hi[a] > ext[a] {
                return Err(Error::RegionMismatch(format!(
                    "outer box [{}, {}] leaves the sampled range [0, {}] along axis {a}",
                    self.q1.lo[a], self.q1.hi[a], ext[a]
                )));
            }
        }
        Ok(())
    }

    pub fn plateau_field(&self, grid: &Grid3) -> Result<SField> {
        self.check_region(grid)?;
        Ok(SField::from_fn(grid, |x, y, z| self.plateau([x, y, z])))
    }
}

pub fn extend(f: &SField, c: &CutoffExtension) -> Result<SField> {
    let p = c.plateau_field(&f.grid)?;
    Ok(SField {
        grid: f.grid.clone(),
        values: f.values.iter().zip(&p.values).map(|(a, b)| a * b).collect(),
    })
}

pub fn extend_h(u: &HField, c: &CutoffExtension) -> Result<HField> {
    let p = c.plateau_field(&u.grid)?;
    let mul = |v: &[f64]| v.iter().zip(&p.values).map(|(a, b)| a * b).collect();
    Ok(HField {
        grid: u.grid.clone(),
        u1: mul(&u.u1),
        u2: mul(&u.u2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonlinearity {
    /// `|h|^2`
    Square,
    /// `h1 h2`
    Product,
    /// `h1^3 + h2^3`
    Cube,
}

impl Nonlinearity {
    pub fn apply(self, h: [f64; 2]) -> f64 {
        match self {
            Nonlinearity::Square => h[0] * h[0] + h[1] * h[1],
            Nonlinearity::Product => h[0] * h[1],
            Nonlinearity::Cube => h[0] * h[0] * h[0] + h[1] * h[1] * h[1],
        }
    }
}

/// Defects of the two extension identities: the pointwise one
/// `<I2 f(h), Psi> = <f(I2 h), Psi>` and the mollified one
/// `<rho * (I2 f(h)), Psi> = <rho * f(I2 h), Psi>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtensionDefects {
    pub pointwise: f64,
    pub mollified: f64,
}

impl ExtensionDefects {
    pub fn max(&self) -> f64 {
        self.pointwise.max(self.mollified)
    }
}

pub fn extension_defect(
    h: &HField,
    f: Nonlinearity,
    psi: &SField,
    c: &CutoffExtension,
    m: &Mollifier,
) -> Result<ExtensionDefects> {
    same_grid(&h.grid, &psi.grid)?;
    let grid = &h.grid;
    for (n, v) in psi.values.iter().enumerate() {
        if *v != 0.0 && !c.q3.contains(grid.position(n)) {
            return Err(Error::SupportViolation(format!(
                "test function nonzero at {:?}, outside Q3",
                grid.position(n)
            )));
        }
    }
    if m.max_radius() >= 0.5 * c.eta {
        return Err(Error::OutOfRange(format!(
            "mollifier radius {} must stay below eta/2 = {}",
            m.max_radius(),
            0.5 * c.eta
        )));
    }
    let plateau = c.plateau_field(grid)?;
    let n = grid.n_nodes();
    let ext_of_f: Vec<f64> = (0..n)
        .map(|i| plateau.values[i] * f.apply(h.get(i)))
        .collect();
    let f_of_ext: Vec<f64> = (0..n)
        .map(|i| {
            let p = plateau.values[i];
            let hv = h.get(i);
            f.apply([p * hv[0], p * hv[1]])
        })
        .collect();
    let pair = |v: &[f64]| {
        integrate_values(
            grid,
            &v.iter()
                .zip(&psi.values)
                .map(|(a, b)| a * b)
                .collect::<Vec<_>>(),
        )
    };
    let pointwise = (pair(&ext_of_f) - pair(&f_of_ext)).abs();
    let k = m.kernel(grid)?;
    let a = convolve_with(&ext_of_f, grid, &k, m.vertical);
    let b = convolve_with(&f_of_ext, grid, &k, m.vertical);
    let mollified = (pair(&a) - pair(&b)).abs();
    Ok(ExtensionDefects {
        pointwise,
        mollified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid3 {
        Grid3::channel(32, 32, 32).unwrap()
    }

    #[test]
    fn kernels_are_normalised_even_and_nonnegative() {
        let g = grid();
        for m in [
            Mollifier::new(0.5),
            Mollifier::new(0.5).radial(),
            Mollifier::new(0.1).domain_scaled(),
        ] {
            let k = m.kernel(&g).unwrap();
            assert!((k.mass() - 1.0).abs() < 1e-14);
            let taps = k.taps();
            let first: [f64; 3] = taps.iter().fold([0.0; 3], |acc, t| {
                [
                    acc[0] + t.w * t.dx as f64,
                    acc[1] + t.w * t.dy as f64,
                    acc[2] + t.w * t.dz as f64,
                ]
            });
            assert!(first.iter().all(|v| v.abs() < 1e-14));
            assert!(taps.iter().all(|t| t.w >= 0.0));
            for t in &taps {
                let mirror = taps
                    .iter()
                    .find(|s| s.dx == -t.dx && s.dy == -t.dy && s.dz == -t.dz)
                    .unwrap();
                assert_eq!(mirror.w, t.w);
            }
        }
    }

    #[test]
    fn support_inside_radius() {
        let g = grid();
        let m = Mollifier::new(0.5).radial();
        for t in m.kernel(&g).unwrap().taps() {
            let d = ((t.dx as f64 * g.hx).powi(2)
                + (t.dy as f64 * g.hy).powi(2)
                + (t.dz as f64 * g.hz).powi(2))
            .sqrt();
            assert!(d < 0.5);
        }
    }

    #[test]
    fn rejects_under_resolved() {
        let g = grid();
        assert!(matches!(
            Mollifier::new(0.1).kernel(&g),
            Err(Error::UnderResolvedKernel { axis: 'x', .. })
        ));
    }

    #[test]
    fn constants_preserved() {
        let g = grid();
        let f = SField::constant(&g, 2.5);
        for m in [
            Mollifier::new(0.5).periodic_z(),
            Mollifier::new(0.5).radial().periodic_z(),
        ] {
            let fe = mollify(&f, &m).unwrap();
            assert!(fe.values.iter().all(|v| (v - 2.5).abs() < 1e-14));
        }
        let m = Mollifier::new(0.5);
        let (lo, hi) = m.valid_z(&g).unwrap();
        let fe = mollify(&f, &m).unwrap();
        for c in 0..g.n_columns() {
            for k in lo..=hi {
                assert!((fe.values[g.node(c, k)] - 2.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn product_passes_match_direct_stencil() {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let f = SField::from_fn(&g, |x, y, z| (x + 2.0 * y).sin() + z * z * x.cos());
        for vm in [VerticalMode::Cutoff, VerticalMode::Periodic] {
            let m = Mollifier {
                vertical: vm,
                ..Mollifier::new(1.0)
            };
            let k = m.kernel(&g).unwrap();
            let fast = convolve_with(&f.values, &g, &k, vm);
            let taps = k.taps();
            let slow = stencil_map(
                &g,
                vm,
                |_, nb| {
                    taps.iter()
                        .zip(nb)
                        .map(|(t, n)| n.map_or(0.0, |n| t.w * f.values[n]))
                        .sum()
                },
                &k,
            );
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn slice_grids_skip_y() {
        let g = Grid3::channel(32, 1, 32).unwrap();
        let m = Mollifier::new(0.5).periodic_z();
        let f = SField::from_fn(&g, |x, _, _| x.sin());
        let fe = mollify(&f, &m).unwrap();
        assert!(fe
            .values
            .iter()
            .zip(&f.values)
            .all(|(a, b)| (a - b).abs() < 0.05));
    }

    #[test]
    fn plateau_profile() {
        let c = CutoffExtension::new(
            Aabb {
                lo: [2.0, 2.0, 0.4],
                hi: [3.0, 3.0, 0.6],
            },
            0.05,
        );
        assert_eq!(c.plateau([2.5, 2.5, 0.5]), 1.0);
        assert_eq!(c.plateau([2.5, 2.5, 0.36]), 1.0);
        assert_eq!(c.plateau([2.5, 2.5, 0.2]), 0.0);
        let mid = c.plateau([2.5, 2.5, 0.3]);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let z = 0.35 - 0.001 * i as f64;
            let v = c.plateau([2.5, 2.5, z]);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn time_pass_preserves_constants() {
        let g = Grid3::channel(4, 4, 4).unwrap();
        let snaps: Vec<SField> = (0..9).map(|_| SField::constant(&g, 3.0)).collect();
        let out = mollify_time(&snaps, 0.1, 0.35).unwrap();
        assert_eq!(out.len(), 9 - 2 * 3);
        assert!(out[0].values.iter().all(|v| (v - 3.0).abs() < 1e-14));
    }
}
