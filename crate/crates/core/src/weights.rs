//! Test functions: tensor products of quintic-smoothstep plateaus.

use std::f64::consts::PI;

use crate::field::SField;
use crate::grid::Grid3;
use crate::mollify::smoothstep;

/// 1 on `[a, b]`, 0 outside `[a - r, b + r]`, smoothstep ramps between.
pub fn plateau_1d(s: f64, a: f64, b: f64, ramp: f64) -> f64 {
    if s < a {
        smoothstep((s - (a - ramp)) / ramp)
    } else if s > b {
        smoothstep(((b + ramp) - s) / ramp)
    } else {
        1.0
    }
}

/// Plateau on the central half of each axis with ramps of an eighth.
pub fn central_bump(grid: &Grid3) -> SField {
    let (lx, ly) = (2.0 * PI, 2.0 * PI);
    let slice = grid.ny == 1;
    SField::from_fn(grid, |x, y, z| {
        let fy = if slice {
            1.0
        } else {
            plateau_1d(y / ly, 0.25, 0.75, 0.125)
        };
        plateau_1d(x / lx, 0.25, 0.75, 0.125) * fy * plateau_1d(z, 0.25, 0.75, 0.125)
    })
}

/// Same bump with the z factor dropped (for z-periodic fields).
pub fn horizontal_bump(grid: &Grid3) -> SField {
    let slice = grid.ny == 1;
    SField::from_fn(grid, |x, y, _| {
        let fy = if slice {
            1.0
        } else {
            plateau_1d(y / (2.0 * PI), 0.25, 0.75, 0.125)
        };
        plateau_1d(x / (2.0 * PI), 0.25, 0.75, 0.125) * fy
    })
}

/// Largest distance from the lids at which `psi` is still nonzero.
pub fn lid_clearance(psi: &SField) -> f64 {
    let g = &psi.grid;
    let mut clear = 0.5f64;
    for (n, v) in psi.values.iter().enumerate() {
        if *v != 0.0 {
            let z = g.z(n % g.nzp());
            clear = clear.min(z.min(1.0 - z));
        }
    }
    clear
}
