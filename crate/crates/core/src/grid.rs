//! Sampling grids for the periodic channel and the disk cylinder.
//!
//! Nodes are stored column by column with z varying fastest. A column holds
//! `nz + 1` nodes at `z = k / nz`, so both lids are sampled.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainMode {
    /// Horizontal torus `[0, 2pi)^2`, `z` in `[0, 1]`.
    PeriodicChannel,
    /// Unit disk cross-section, `z` in `[0, 1]`; sample points only.
    DiskCylinder,
}

impl DomainMode {
    pub fn code(self) -> u32 {
        match self {
            DomainMode::PeriodicChannel => 0,
            DomainMode::DiskCylinder => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(DomainMode::PeriodicChannel),
            1 => Some(DomainMode::DiskCylinder),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid3 {
    pub mode: DomainMode,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
    /// Lattice columns `(i, j)` kept inside the disk; empty for the channel.
    disk_columns: Vec<(u32, u32)>,
}

impl Grid3 {
    /// Channel grid. `ny = 1` gives an x-z slice.
    pub fn channel(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::Resolution(format!(
                "counts must be positive, got {nx}x{ny}x{nz}"
            )));
        }
        Ok(Grid3 {
            mode: DomainMode::PeriodicChannel,
            nx,
            ny,
            nz,
            hx: 2.0 * PI / nx as f64,
            hy: 2.0 * PI / ny as f64,
            hz: 1.0 / nz as f64,
            disk_columns: Vec::new(),
        })
    }

    /// Cell-centred `n x n` lattice over `[-1, 1]^2`, keeping columns with `r <= 1`.
    pub fn disk(n: usize, nz: usize) -> Result<Self> {
        if n == 0 || nz == 0 {
            return Err(Error::Resolution(format!(
                "counts must be positive, got {n}x{nz}"
            )));
        }
        let h = 2.0 / n as f64;
        let mut cols = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = -1.0 + (i as f64 + 0.5) * h;
                let y = -1.0 + (j as f64 + 0.5) * h;
                if x * x + y * y <= 1.0 {
                    cols.push((i as u32, j as u32));
                }
            }
        }
        Ok(Grid3 {
            mode: DomainMode::DiskCylinder,
            nx: n,
            ny: n,
            nz,
            hx: h,
            hy: h,
            hz: 1.0 / nz as f64,
            disk_columns: cols,
        })
    }

    pub fn from_parts(mode: DomainMode, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        match mode {
            DomainMode::PeriodicChannel => Grid3::channel(nx, ny, nz),
            DomainMode::DiskCylinder => {
                if nx != ny {
                    return Err(Error::Format(format!(
                        "disk grid needs nx = ny, got {nx}, {ny}"
                    )));
                }
                Grid3::disk(nx, nz)
            }
        }
    }

    /// Nodes per column.
    #[inline]
    pub fn nzp(&self) -> usize {
        self.nz + 1
    }

    pub fn n_columns(&self) -> usize {
        match self.mode {
            DomainMode::PeriodicChannel => self.nx * self.ny,
            DomainMode::DiskCylinder => self.disk_columns.len(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_columns() * self.nzp()
    }

    #[inline]
    pub fn node(&self, col: usize, k: usize) -> usize {
        col * self.nzp() + k
    }

    /// Column index of lattice point `(i, j)` in channel mode.
    #[inline]
    pub fn column(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Lattice indices of a column.
    pub fn column_ij(&self, col: usize) -> (usize, usize) {
        match self.mode {
            DomainMode::PeriodicChannel => (col / self.ny, col % self.ny),
            DomainMode::DiskCylinder => {
                let (i, j) = self.disk_columns[col];
                (i as usize, j as usize)
            }
        }
    }

    pub fn column_xy(&self, col: usize) -> (f64, f64) {
        let (i, j) = self.column_ij(col);
        match self.mode {
            DomainMode::PeriodicChannel => (i as f64 * self.hx, j as f64 * self.hy),
            DomainMode::DiskCylinder => (
                -1.0 + (i as f64 + 0.5) * self.hx,
                -1.0 + (j as f64 + 0.5) * self.hy,
            ),
        }
    }

    #[inline]
    pub fn z(&self, k: usize) -> f64 {
        k as f64 * self.hz
    }

    pub fn position(&self, node: usize) -> [f64; 3] {
        let (x, y) = self.column_xy(node / self.nzp());
        [x, y, self.z(node % self.nzp())]
    }

    pub fn max_spacing(&self) -> f64 {
        let h = self.hx.max(self.hz);
        if self.ny > 1 {
            h.max(self.hy)
        } else {
            h
        }
    }

    /// Horizontal area element times the trapezoid weight of level `k`.
    pub fn cell_weight(&self, k: usize) -> f64 {
        let area = self.hx * self.hy;
        if k == 0 || k == self.nz {
            0.5 * area * self.hz
        } else {
            area * self.hz
        }
    }

    pub fn require_channel(&self) -> Result<()> {
        if self.mode != DomainMode::PeriodicChannel {
            return Err(Error::ModeMismatch {
                expected: "PeriodicChannel",
            });
        }
        Ok(())
    }
}
