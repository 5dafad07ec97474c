//! Anisotropic Hölder seminorm over dyadic lattice offsets and exponent
//! estimation from max-increment growth.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::FieldData;
use crate::fit::{loglog_fit, LineFit};
use crate::grid::Grid3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Interior,
    SmoothHorizontal,
    Inadmissible,
}

/// Classifies an exponent pair.
pub fn admissible(alpha: f64, beta: f64) -> Result<Regime> {
    if !(alpha > 0.0 && alpha < 2.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::OutOfRange(format!(
            "(alpha, beta) = ({alpha}, {beta})"
        )));
    }
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    let open_half = |v: f64| v > 0.5 && v < 1.0;
    if open_half(alpha) && open_half(beta) && 2.0 * lo + hi > 2.0 {
        Ok(Regime::Interior)
    } else if alpha > 1.0 && beta < 0.5 && alpha + 2.0 * beta > 2.0 {
        Ok(Regime::SmoothHorizontal)
    } else {
        Ok(Regime::Inadmissible)
    }
}

/// A horizontal lattice displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HOffset {
    pub di: isize,
    pub dj: isize,
    pub length: f64,
}

/// Maximum increments per sampled offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Increments {
    pub horizontal: Vec<(HOffset, f64)>,
    /// `(offset length, max increment)` along z.
    pub vertical: Vec<(f64, f64)>,
    /// Dyadic levels used for fitting: `(offset, max over the axis directions)`.
    pub axis_levels: Vec<(f64, f64)>,
}

/// Nodes whose z lies in `[z_min, z_max]` take part (both ends of an increment).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZWindow {
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for ZWindow {
    fn default() -> Self {
        ZWindow {
            z_min: 0.0,
            z_max: 1.0,
        }
    }
}

fn dyadic_cells(h: f64, limit: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = 1usize;
    while m as f64 * h <= limit * (1.0 + 1e-12) {
        out.push(m);
        m *= 2;
    }
    out
}

fn node_norm(comps: &[&[f64]], a: usize, b: usize) -> f64 {
    if comps.len() == 1 {
        (comps[0][a] - comps[0][b]).abs()
    } else {
        comps
            .iter()
            .map(|c| (c[a] - c[b]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn k_range(grid: &Grid3, w: ZWindow) -> (usize, usize) {
    let lo = (w.z_min / grid.hz - 1e-9).ceil().max(0.0) as usize;
    let hi = ((w.z_max / grid.hz + 1e-9).floor() as usize).min(grid.nz);
    (lo, hi)
}

pub fn increments(u: &dyn FieldData, window: ZWindow) -> Result<Increments> {
    let grid = u.grid();
    grid.require_channel()?;
    let comps = u.components();
    let (klo, khi) = k_range(grid, window);
    if klo > khi {
        return Err(Error::OutOfRange("empty z window".into()));
    }
    let quarter = PI / 2.0;
    let xs = dyadic_cells(grid.hx, quarter);
    let ys = if grid.ny > 1 {
        dyadic_cells(grid.hy, quarter)
    } else {
        Vec::new()
    };
    let mut offsets = Vec::new();
    for &m in &xs {
        offsets.push(HOffset {
            di: m as isize,
            dj: 0,
            length: m as f64 * grid.hx,
        });
    }
    for &m in &ys {
        offsets.push(HOffset {
            di: 0,
            dj: m as isize,
            length: m as f64 * grid.hy,
        });
    }
    for &m in xs.iter().filter(|m| ys.contains(m)) {
        let length = m as f64 * grid.hx.hypot(grid.hy);
        offsets.push(HOffset {
            di: m as isize,
            dj: m as isize,
            length,
        });
        offsets.push(HOffset {
            di: m as isize,
            dj: -(m as isize),
            length,
        });
    }
    let nzp = grid.nzp();
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let horizontal: Vec<(HOffset, f64)> = offsets
        .iter()
        .map(|off| {
            let per_col = crate::par::map(grid.n_columns(), |c| {
                let (i, j) = grid.column_ij(c);
                let i2 = (i as isize + off.di).rem_euclid(nx) as usize;
                let j2 = (j as isize + off.dj).rem_euclid(ny) as usize;
                let c2 = grid.column(i2, j2);
                (klo..=khi).fold(0.0f64, |m, k| {
                    m.max(node_norm(&comps, c * nzp + k, c2 * nzp + k))
                })
            });
            (*off, per_col.into_iter().fold(0.0, f64::max))
        })
        .collect();
    let span = grid.z(khi) - grid.z(klo);
    let vertical: Vec<(f64, f64)> = dyadic_cells(grid.hz, 0.25f64.min(span))
        .into_iter()
        .map(|m| {
            let per_col = crate::par::map(grid.n_columns(), |c| {
                (klo..=khi.saturating_sub(m)).fold(0.0f64, |acc, k| {
                    acc.max(node_norm(&comps, c * nzp + k, c * nzp + k + m))
                })
            });
            (m as f64 * grid.hz, per_col.into_iter().fold(0.0, f64::max))
        })
        .collect();
    let use_y = grid.ny > 1 && grid.nx == grid.ny;
    let axis_levels = xs
        .iter()
        .map(|&m| {
            let fx = horizontal
                .iter()
                .find(|(o, _)| o.di == m as isize && o.dj == 0)
                .unwrap()
                .1;
            let fy = if use_y {
                horizontal
                    .iter()
                    .find(|(o, _)| o.di == 0 && o.dj == m as isize)
                    .map_or(0.0, |p| p.1)
            } else {
                0.0
            };
            (m as f64 * grid.hx, fx.max(fy))
        })
        .collect();
    Ok(Increments {
        horizontal,
        vertical,
        axis_levels,
    })
}

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::OutOfRange(format!(
            "seminorm exponents ({alpha}, {beta}) must lie in (0, 1)"
        )));
    }
    Ok(())
}

impl Increments {
    pub fn seminorm(&self, alpha: f64, beta: f64) -> f64 {
        let v = self
            .vertical
            .iter()
            .fold(0.0f64, |m, (d, inc)| m.max(inc / d.powf(beta)));
        let h = self
            .horizontal
            .iter()
            .fold(0.0f64, |m, (o, inc)| m.max(inc / o.length.powf(alpha)));
        v + h
    }
}

pub fn seminorm_aniso(u: &dyn FieldData, alpha: f64, beta: f64) -> Result<f64> {
    seminorm_aniso_in(u, alpha, beta, ZWindow::default())
}

pub fn seminorm_aniso_in(u: &dyn FieldData, alpha: f64, beta: f64, window: ZWindow) -> Result<f64> {
    check_exponents(alpha, beta)?;
    Ok(increments(u, window)?.seminorm(alpha, beta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub offsets_h: Vec<f64>,
    pub max_inc_h: Vec<f64>,
    pub offsets_z: Vec<f64>,
    pub max_inc_z: Vec<f64>,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub fit_h: Option<LineFit>,
    pub fit_z: Option<LineFit>,
    pub degenerate_h: bool,
    pub degenerate_z: bool,
    increments: Increments,
}

impl HolderReport {
    pub fn seminorm(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_exponents(alpha, beta)?;
        Ok(self.increments.seminorm(alpha, beta))
    }

    /// Rows `level,offset_h,max_inc_h,offset_z,max_inc_z` and a summary line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,offset_h,max_inc_h,offset_z,max_inc_z\n");
        let n = self.offsets_h.len().max(self.offsets_z.len());
        let cell = |v: &[f64], i: usize| v.get(i).map_or(String::new(), |x| x.to_string());
        for i in 0..n {
            let _ = writeln!(
                s,
                "{i},{},{},{},{}",
                cell(&self.offsets_h, i),
                cell(&self.max_inc_h, i),
                cell(&self.offsets_z, i),
                cell(&self.max_inc_z, i)
            );
        }
        let _ = writeln!(
            s,
            "# alpha_hat={} beta_hat={} degenerate_h={} degenerate_z={}",
            self.alpha_hat, self.beta_hat, self.degenerate_h, self.degenerate_z
        );
        s
    }
}

const CEILING: f64 = 1.5;

fn exponent(xs: &[f64], ys: &[f64], scale: f64) -> (f64, Option<LineFit>, bool) {
    let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
    if scale == 0.0 || ys.iter().all(|v| *v <= floor) {
        return (CEILING, None, true);
    }
    match loglog_fit(xs, ys) {
        Some(f) => (f.slope.clamp(0.0, CEILING), Some(f), false),
        None => (CEILING, None, true),
    }
}

/// Fits max-increment growth per direction. Needs five dyadic offsets each way.
pub fn estimate_exponents(u: &dyn FieldData) -> Result<HolderReport> {
    let inc = increments(u, ZWindow::default())?;
    if inc.axis_levels.len() < 5 || inc.vertical.len() < 5 {
        return Err(Error::Resolution(format!(
            "need 5 dyadic offsets per direction, have {} horizontal and {} vertical",
            inc.axis_levels.len(),
            inc.vertical.len()
        )));
    }
    let scale = u
        .components()
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let offsets_h: Vec<f64> = inc.axis_levels.iter().map(|p| p.0).collect();
    let max_inc_h: Vec<f64> = inc.axis_levels.iter().map(|p| p.1).collect();
    let offsets_z: Vec<f64> = inc.vertical.iter().map(|p| p.0).collect();
    let max_inc_z: Vec<f64> = inc.vertical.iter().map(|p| p.1).collect();
    let (alpha_hat, fit_h, degenerate_h) = exponent(&offsets_h, &max_inc_h, scale);
    let (beta_hat, fit_z, degenerate_z) = exponent(&offsets_z, &max_inc_z, scale);
    Ok(HolderReport {
        offsets_h,
        max_inc_h,
        offsets_z,
        max_inc_z,
        alpha_hat,
        beta_hat,
        fit_h,
        fit_z,
        degenerate_h,
        degenerate_z,
        increments: inc,
    })
}
