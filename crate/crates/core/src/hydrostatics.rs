//! Vertical velocity from incompressibility and the z-independent pressure.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{HField, SField};
use crate::grid::Grid3;
use crate::holder::seminorm_aniso;
use crate::spectral::{ddx, ddy, poisson_torus, Dims};

/// Horizontal divergence, spectral in x and y.
pub fn divergence_h(u: &HField) -> Vec<f64> {
    let d = Dims::of(&u.grid);
    let mut div = ddx(&u.u1, d);
    for (a, b) in div.iter_mut().zip(ddy(&u.u2, d)) {
        *a += b;
    }
    div
}

/// Largest `|int_0^1 div_x u dz|` over the columns (trapezoid in z).
pub fn column_defect(u: &HField) -> Result<f64> {
    u.grid.require_channel()?;
    let div = divergence_h(u);
    let g = &u.grid;
    let nzp = g.nzp();
    Ok(div
        .chunks(nzp)
        .map(|c| {
            column_integral(c, g.hz)
                .last()
                .copied()
                .unwrap_or(0.0)
                .abs()
        })
        .fold(0.0, f64::max))
}

fn column_integral(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..f.len() {
        acc += 0.5 * h * (f[k - 1] + f[k]);
        out.push(acc);
    }
    out
}

/// `w(x, z) = -int_0^z div_x u(x, s) ds`, cumulative trapezoid in z.
pub fn reconstruct_w(u: &HField) -> Result<SField> {
    reconstruct_w_tol(u, 1e-8)
}

/// As [`reconstruct_w`] with a custom column-constraint tolerance (relative
/// to `max(1, |u|_inf)`).
pub fn reconstruct_w_tol(u: &HField, tol: f64) -> Result<SField> {
    u.grid.require_channel()?;
    let g = &u.grid;
    let nzp = g.nzp();
    let div = divergence_h(u);
    let mut w = vec![0.0; div.len()];
    let mut worst = 0.0f64;
    for (src, dst) in div.chunks(nzp).zip(w.chunks_mut(nzp)) {
        let c = column_integral(src, g.hz);
        for (d, v) in dst.iter_mut().zip(&c) {
            *d = -v;
        }
        worst = worst.max(c[nzp - 1].abs());
    }
    if worst > tol * u.max_abs().max(1.0) {
        return Err(Error::ColumnConstraint { magnitude: worst });
    }
    Ok(SField {
        grid: g.clone(),
        values: w,
    })
}

/// Hydrostatic pressure: one horizontal array, zero mean.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureField {
    pub grid: Grid3,
    /// `nx * ny` values, column order.
    pub values: Vec<f64>,
}

impl PressureField {
    pub fn at_column(&self, col: usize) -> f64 {
        self.values[col]
    }

    /// Replicated along every column.
    pub fn to_sfield(&self) -> SField {
        let nzp = self.grid.nzp();
        let mut v = Vec::with_capacity(self.grid.n_nodes());
        for p in &self.values {
            v.extend(std::iter::repeat_n(*p, nzp));
        }
        SField {
            grid: self.grid.clone(),
            values: v,
        }
    }

    pub fn mean(&self) -> f64 {
        crate::quad::pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Solves `-lap_x p = div_x div_x int_0^1 u (x) u dz` on the torus.
pub fn pressure_solve(u: &HField) -> Result<PressureField> {
    let g = &u.grid;
    g.require_channel()?;
    let nzp = g.nzp();
    let nc = g.n_columns();
    let mut m = [vec![0.0; nc], vec![0.0; nc], vec![0.0; nc]];
    for c in 0..nc {
        let b = c * nzp;
        let mut s = [0.0; 3];
        for k in 0..nzp {
            let wk = if k == 0 || k == g.nz { 0.5 } else { 1.0 };
            let (a, bb) = (u.u1[b + k], u.u2[b + k]);
            s[0] += wk * a * a;
            s[1] += wk * a * bb;
            s[2] += wk * bb * bb;
        }
        for i in 0..3 {
            m[i][c] = s[i] * g.hz;
        }
    }
    let d = Dims::horizontal(g.nx, g.ny);
    let xx = ddx(&ddx(&m[0], d), d);
    let xy = ddx(&ddy(&m[1], d), d);
    let yy = ddy(&ddy(&m[2], d), d);
    let f: Vec<f64> = (0..nc).map(|c| xx[c] + 2.0 * xy[c] + yy[c]).collect();
    let (p, mean) = poisson_torus(&f, g.nx, g.ny);
    let scale = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if mean.abs() > 1e-10 * scale {
        return Err(Error::InconsistentData(format!("source mean {mean:e}")));
    }
    Ok(PressureField {
        grid: g.clone(),
        values: p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityRow {
    pub nx: usize,
    pub seminorm_u: f64,
    pub seminorm_p: f64,
    pub ratio: f64,
}

/// `[p]/(1 + [u]^2)` at each refinement level, seminorms with `(alpha, beta)`.
pub fn pressure_regularity_report(
    levels: &[HField],
    alpha: f64,
    beta: f64,
) -> Result<Vec<RegularityRow>> {
    levels
        .iter()
        .map(|u| {
            let p = pressure_solve(u)?.to_sfield();
            let su = seminorm_aniso(u, alpha, beta)?;
            let sp = seminorm_aniso(&p, alpha, beta)?;
            Ok(RegularityRow {
                nx: u.grid.nx,
                seminorm_u: su,
                seminorm_p: sp,
                ratio: sp / (1.0 + su * su),
            })
        })
        .collect()
}

pub fn regularity_csv(rows: &[RegularityRow]) -> String {
    let mut s = String::from("level,seminorm_u,seminorm_p,ratio\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.nx, r.seminorm_u, r.seminorm_p, r.ratio);
    }
    s
}
