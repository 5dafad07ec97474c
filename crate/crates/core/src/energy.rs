//! Kinetic energy, tested energy fluxes and the mollified balance.

use std::fmt::Write as _;

use crate::commutator::{horizontal_pairing, vertical_pairing};
use crate::error::{Error, Result};
use crate::field::{same_grid, HField, SField};
use crate::grid::Grid3;
use crate::hydrostatics::{pressure_solve, reconstruct_w};
use crate::mollify::{convolve_with, Mollifier, VerticalMode};
use crate::quad::{integrate_values, integrate_with};
use crate::spectral::{ddx, ddy, ddz_fd, ddz_periodic, Dims};

/// `1/2 int |u|^2`.
pub fn global_energy(u: &HField) -> f64 {
    0.5 * integrate_with(&u.grid, |n| u.u1[n] * u.u1[n] + u.u2[n] * u.u2[n])
}

/// Velocity, vertical velocity and pressure at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub u: HField,
    pub w: SField,
    pub p: SField,
}

impl Snapshot {
    pub fn new(u: HField, w: SField, p: SField) -> Result<Self> {
        same_grid(&u.grid, &w.grid)?;
        same_grid(&u.grid, &p.grid)?;
        Ok(Snapshot { u, w, p })
    }

    /// Completes `u` with the reconstructed `w` and the hydrostatic pressure.
    pub fn hydrostatic(u: HField) -> Result<Self> {
        let w = reconstruct_w(&u)?;
        let p = pressure_solve(&u)?.to_sfield();
        Ok(Snapshot { u, w, p })
    }
}

/// Tested flux pairings at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxTerms {
    /// `<(|u|^2/2 + p) u, grad_x psi>`
    pub horizontal: f64,
    /// `<(|u|^2/2 + p) w, dz psi>`
    pub vertical: f64,
    /// Integral of the absolute integrands.
    pub scale: f64,
}

fn require_lid_support(psi: &SField) -> Result<()> {
    let g = &psi.grid;
    let nzp = g.nzp();
    for c in 0..g.n_columns() {
        if psi.values[c * nzp] != 0.0 || psi.values[c * nzp + g.nz] != 0.0 {
            return Err(Error::SupportViolation(
                "test function is nonzero on a lid".into(),
            ));
        }
    }
    Ok(())
}

struct PsiGrad {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

fn psi_grad(psi: &SField, vertical: VerticalMode) -> PsiGrad {
    let d = Dims::of(&psi.grid);
    let z = match vertical {
        VerticalMode::Periodic => ddz_periodic(&psi.values, d),
        VerticalMode::Cutoff => ddz_fd(&psi.values, d.nzp, psi.grid.hz),
    };
    PsiGrad {
        x: ddx(&psi.values, d),
        y: ddy(&psi.values, d),
        z,
    }
}

pub fn flux_terms(s: &Snapshot, psi: &SField) -> Result<FluxTerms> {
    same_grid(&s.u.grid, &psi.grid)?;
    require_lid_support(psi)?;
    Ok(flux_with(s, &psi_grad(psi, VerticalMode::Cutoff)))
}

fn flux_with(s: &Snapshot, gp: &PsiGrad) -> FluxTerms {
    let g = &s.u.grid;
    let (u1, u2, w, p) = (&s.u.u1, &s.u.u2, &s.w.values, &s.p.values);
    let head = |n: usize| 0.5 * (u1[n] * u1[n] + u2[n] * u2[n]) + p[n];
    let horizontal = integrate_with(g, |n| head(n) * (u1[n] * gp.x[n] + u2[n] * gp.y[n]));
    let vertical = integrate_with(g, |n| head(n) * w[n] * gp.z[n]);
    let scale = integrate_with(g, |n| {
        head(n).abs() * ((u1[n] * gp.x[n]).abs() + (u2[n] * gp.y[n]).abs() + (w[n] * gp.z[n]).abs())
    });
    FluxTerms {
        horizontal,
        vertical,
        scale,
    }
}

/// `int |u|^2/2 psi`.
pub fn weighted_energy(u: &HField, psi: &SField) -> f64 {
    0.5 * integrate_with(&u.grid, |n| {
        (u.u1[n] * u.u1[n] + u.u2[n] * u.u2[n]) * psi.values[n]
    })
}

/// `chi [ (E_psi(t1) - E_psi(t0)) / dt - (P(t0) + P(t1)) / 2 ]` where
/// `E_psi = int psi |u|^2/2` and `P` is the total tested flux.
pub fn local_residual(
    pair: (&Snapshot, &Snapshot),
    dt: f64,
    psi: &SField,
    chi: f64,
) -> Result<f64> {
    let (a, b) = pair;
    same_grid(&a.u.grid, &b.u.grid)?;
    let f0 = flux_terms(a, psi)?;
    let f1 = flux_terms(b, psi)?;
    let de = (weighted_energy(&b.u, psi) - weighted_energy(&a.u, psi)) / dt;
    Ok(chi * (de - 0.5 * (f0.horizontal + f0.vertical + f1.horizontal + f1.vertical)))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub time: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub flux_h: Vec<f64>,
    pub flux_v: Vec<f64>,
    /// Residual over the interval ending at each instant; 0 at the first.
    pub residual: Vec<f64>,
}

impl EnergyLedger {
    pub fn from_snapshots(
        snaps: &[Snapshot],
        times: &[f64],
        psi: &SField,
        chi: f64,
    ) -> Result<Self> {
        if snaps.len() != times.len() {
            return Err(Error::InconsistentData(format!(
                "{} snapshots, {} times",
                snaps.len(),
                times.len()
            )));
        }
        let mut led = EnergyLedger::default();
        for (i, s) in snaps.iter().enumerate() {
            let f = flux_terms(s, psi)?;
            led.time.push(times[i]);
            led.kinetic.push(global_energy(&s.u));
            led.flux_h.push(f.horizontal);
            led.flux_v.push(f.vertical);
            led.residual.push(if i == 0 {
                0.0
            } else {
                local_residual((&snaps[i - 1], s), times[i] - times[i - 1], psi, chi)?
            });
        }
        Ok(led)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,kinetic,fluxH,fluxV,residual\n");
        for i in 0..self.time.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                self.time[i], self.kinetic[i], self.flux_h[i], self.flux_v[i], self.residual[i]
            );
        }
        s
    }
}

/// Both sides of the mollified local balance for a steady snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Balance {
    /// `<N^e, psi u^e> + int (|u^e|^2/2 + p^e)(u^e . grad_x psi + w^e dz psi)`
    /// with `N^e = div_x (u (x) u)^e + dz (u w)^e + grad_x p^e`.
    pub left: f64,
    /// `-int [(u (x) u)^e - u^e (x) u^e] : grad_x(psi u^e)`
    pub rhs1: f64,
    /// `-int [(u w)^e - u^e w^e] . dz(psi u^e)`
    pub rhs2: f64,
}

impl Balance {
    pub fn defect(&self) -> f64 {
        (self.left - self.rhs1 - self.rhs2).abs()
    }

    pub fn relative_defect(&self) -> f64 {
        self.defect() / self.left.abs().max(1e-12)
    }
}

pub fn mollified_balance(s: &Snapshot, m: &Mollifier, psi: &SField, chi: f64) -> Result<Balance> {
    let g: &Grid3 = &s.u.grid;
    same_grid(g, &psi.grid)?;
    let rhs1 = -chi * horizontal_pairing(&s.u, m, psi)?;
    let rhs2 = -chi * vertical_pairing(&s.u, &s.w, m, psi)?;
    let k = m.kernel(g)?;
    let mode = m.vertical;
    let d = Dims::of(g);
    let conv = |v: &[f64]| convolve_with(v, g, &k, mode);
    let dz = |v: &[f64]| match mode {
        VerticalMode::Periodic => ddz_periodic(v, d),
        VerticalMode::Cutoff => ddz_fd(v, d.nzp, g.hz),
    };
    let mul = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<f64>>();
    let (u1, u2, w) = (&s.u.u1, &s.u.u2, &s.w.values);
    let ue = [conv(u1), conv(u2)];
    let we = conv(w);
    let pe = conv(&s.p.values);
    let m11 = conv(&mul(u1, u1));
    let m12 = conv(&mul(u1, u2));
    let m22 = conv(&mul(u2, u2));
    let v1 = conv(&mul(u1, w));
    let v2 = conv(&mul(u2, w));
    let (px, py) = (ddx(&pe, d), ddy(&pe, d));
    let n1: Vec<f64> = {
        let (a, b, c) = (ddx(&m11, d), ddy(&m12, d), dz(&v1));
        (0..a.len()).map(|n| a[n] + b[n] + c[n] + px[n]).collect()
    };
    let n2: Vec<f64> = {
        let (a, b, c) = (ddx(&m12, d), ddy(&m22, d), dz(&v2));
        (0..a.len()).map(|n| a[n] + b[n] + c[n] + py[n]).collect()
    };
    let gp = psi_grad(psi, mode);
    let ps = &psi.values;
    let integrand: Vec<f64> = (0..n1.len())
        .map(|n| {
            let head = 0.5 * (ue[0][n] * ue[0][n] + ue[1][n] * ue[1][n]) + pe[n];
            ps[n] * (n1[n] * ue[0][n] + n2[n] * ue[1][n])
                + head * (ue[0][n] * gp.x[n] + ue[1][n] * gp.y[n] + we[n] * gp.z[n])
        })
        .collect();
    let left = chi * integrate_values(g, &integrand);
    Ok(Balance { left, rhs1, rhs2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::taylor_green;
    use crate::weights::central_bump;

    #[test]
    fn taylor_green_energy() {
        let g = Grid3::channel(32, 32, 4).unwrap();
        let e = global_energy(&taylor_green(&g).unwrap());
        assert!((e - std::f64::consts::PI.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn zero_test_function_gives_zero() {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let s = Snapshot::hydrostatic(taylor_green(&g).unwrap()).unwrap();
        let psi = SField::zeros(&g);
        assert_eq!(local_residual((&s, &s), 0.1, &psi, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn lid_support_required() {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let s = Snapshot::hydrostatic(taylor_green(&g).unwrap()).unwrap();
        assert!(flux_terms(&s, &SField::constant(&g, 1.0)).is_err());
        assert!(flux_terms(&s, &central_bump(&g)).is_ok());
    }
}
