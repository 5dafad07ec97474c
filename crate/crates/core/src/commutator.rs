//! Mollification commutators, their tested pairings, and dyadic sweeps.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{same_grid, HField, SField};
use crate::fit::ScalingFit;
use crate::grid::Grid3;
use crate::holder::{admissible, Regime};
use crate::mollify::{convolve_with, stencil_map, Kernel, Mollifier, VerticalMode};
use crate::quad::integrate_values;
use crate::spectral::{ddx, ddy, ddz_fd, ddz_periodic, Dims};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Predicted {
    pub regime: Regime,
    /// Horizontal pairing exponent.
    pub e1: f64,
    /// Vertical pairing exponent.
    pub e2: f64,
    /// Vertical-velocity deficit exponent.
    pub ew: f64,
}

pub fn predicted_exponents(alpha: f64, beta: f64) -> Result<Predicted> {
    let regime = admissible(alpha, beta)?;
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    match regime {
        Regime::Interior => Ok(Predicted {
            regime,
            e1: (3.0 * alpha - 1.0).min(alpha + 2.0 * beta - 1.0),
            e2: 2.0 * lo + hi - 2.0,
            ew: alpha - 1.0,
        }),
        Regime::SmoothHorizontal => {
            let a = alpha.min(1.0);
            Ok(Predicted {
                regime,
                e1: (3.0 * a - 1.0).min(alpha + 2.0 * beta - 1.0),
                e2: alpha + 2.0 * beta - 2.0,
                ew: alpha - 1.0,
            })
        }
        Regime::Inadmissible => Err(Error::Inadmissible { alpha, beta }),
    }
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn dz(values: &[f64], grid: &Grid3, mode: VerticalMode) -> Vec<f64> {
    match mode {
        VerticalMode::Periodic => ddz_periodic(values, Dims::of(grid)),
        VerticalMode::Cutoff => ddz_fd(values, grid.nzp(), grid.hz),
    }
}

/// The three terms of the commutator identity for scalar fields.
#[derive(Clone, Debug)]
pub struct CetTerms {
    /// `u^e w^e - (uw)^e`
    pub a: SField,
    /// `(u - u^e)(w - w^e)`
    pub b: SField,
    /// `sum_Y rho(Y) (u(X-Y) - u(X)) (w(X-Y) - w(X))`
    pub c: SField,
    /// `max |A - B + C|`
    pub defect: f64,
    /// `max |A|`
    pub scale: f64,
}

pub fn cet_decompose(u: &SField, w: &SField, m: &Mollifier) -> Result<CetTerms> {
    same_grid(&u.grid, &w.grid)?;
    let g = &u.grid;
    let k = m.kernel(g)?;
    let ue = convolve_with(&u.values, g, &k, m.vertical);
    let we = convolve_with(&w.values, g, &k, m.vertical);
    let uwe = convolve_with(&mul(&u.values, &w.values), g, &k, m.vertical);
    let a: Vec<f64> = (0..ue.len()).map(|n| ue[n] * we[n] - uwe[n]).collect();
    let b: Vec<f64> = (0..ue.len())
        .map(|n| (u.values[n] - ue[n]) * (w.values[n] - we[n]))
        .collect();
    let taps = k.taps();
    let (uv, wv) = (&u.values, &w.values);
    let c = stencil_map(
        g,
        m.vertical,
        |center, nb| {
            let (u0, w0) = (uv[center], wv[center]);
            let mut s = 0.0;
            for (t, n) in taps.iter().zip(nb) {
                let (us, ws) = n.map_or((0.0, 0.0), |n| (uv[n], wv[n]));
                s += t.w * (us - u0) * (ws - w0);
            }
            s
        },
        &k,
    );
    let defect = (0..a.len()).fold(0.0f64, |acc, n| acc.max((a[n] - b[n] + c[n]).abs()));
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let wrap = |values| SField {
        grid: g.clone(),
        values,
    };
    Ok(CetTerms {
        a: wrap(a),
        b: wrap(b),
        c: wrap(c),
        defect,
        scale,
    })
}

/// Checks that `psi` vanishes within `2 r_z` of the lids when the vertical
/// direction is cut off.
fn check_margin(psi: &SField, m: &Mollifier) -> Result<()> {
    if m.vertical == VerticalMode::Periodic {
        return Ok(());
    }
    let need = 2.0 * m.radii()[2];
    let clear = crate::weights::lid_clearance(psi);
    if clear < need {
        return Err(Error::SupportViolation(format!(
            "test function reaches within {clear:.4} of a lid; margin {need:.4} required"
        )));
    }
    Ok(())
}

/// Mollified quantities for one width, shared by all pairings.
struct Mollified {
    ue: [Vec<f64>; 2],
    /// `(u_i u_j)^e - u_i^e u_j^e` for `(1,1), (1,2), (2,2)`.
    ch: [Vec<f64>; 3],
    we: Option<Vec<f64>>,
    /// `(u_i w)^e - u_i^e w^e`.
    cv: Option<[Vec<f64>; 2]>,
}

fn mollified(u: &HField, w: Option<&SField>, k: &Kernel, mode: VerticalMode) -> Mollified {
    let g = &u.grid;
    let conv = |v: &[f64]| convolve_with(v, g, k, mode);
    let ue = [conv(&u.u1), conv(&u.u2)];
    let comm = |a: &[f64], b: &[f64], ae: &[f64], be: &[f64]| -> Vec<f64> {
        let mut out = conv(&mul(a, b));
        for n in 0..out.len() {
            out[n] -= ae[n] * be[n];
        }
        out
    };
    let ch = [
        comm(&u.u1, &u.u1, &ue[0], &ue[0]),
        comm(&u.u1, &u.u2, &ue[0], &ue[1]),
        comm(&u.u2, &u.u2, &ue[1], &ue[1]),
    ];
    let (we, cv) = match w {
        Some(w) => {
            let we = conv(&w.values);
            let cv = [
                comm(&u.u1, &w.values, &ue[0], &we),
                comm(&u.u2, &w.values, &ue[1], &we),
            ];
            (Some(we), Some(cv))
        }
        None => (None, None),
    };
    Mollified { ue, ch, we, cv }
}

impl Mollified {
    /// `int C_h : grad_x(psi u^e)`, unsigned weight excluded.
    fn horizontal_pairing(&self, g: &Grid3, psi: &[f64]) -> f64 {
        let d = Dims::of(g);
        let mut total = vec![0.0; psi.len()];
        for i in 0..2 {
            let gi = mul(psi, &self.ue[i]);
            let (cx, cy) = if i == 0 {
                (&self.ch[0], &self.ch[1])
            } else {
                (&self.ch[1], &self.ch[2])
            };
            let gx = ddx(&gi, d);
            let gy = ddy(&gi, d);
            for n in 0..total.len() {
                total[n] += cx[n] * gx[n] + cy[n] * gy[n];
            }
        }
        integrate_values(g, &total)
    }

    /// `int C_v . dz(psi u^e)`.
    fn vertical_pairing(&self, g: &Grid3, psi: &[f64], mode: VerticalMode) -> Option<f64> {
        let cv = self.cv.as_ref()?;
        let mut total = vec![0.0; psi.len()];
        for i in 0..2 {
            let gz = dz(&mul(psi, &self.ue[i]), g, mode);
            for n in 0..total.len() {
                total[n] += cv[i][n] * gz[n];
            }
        }
        Some(integrate_values(g, &total))
    }

    fn dz_psi_u_sup(&self, g: &Grid3, psi: &[f64], mode: VerticalMode) -> f64 {
        let a = dz(&mul(psi, &self.ue[0]), g, mode);
        let b = dz(&mul(psi, &self.ue[1]), g, mode);
        a.iter()
            .zip(&b)
            .fold(0.0f64, |m, (x, y)| m.max(x.hypot(*y)))
    }
}

fn max_dev_in(g: &Grid3, a: &[f64], b: &[f64], (lo, hi): (usize, usize)) -> f64 {
    let nzp = g.nzp();
    let mut m = 0.0f64;
    for c in 0..g.n_columns() {
        for k in lo..=hi {
            let n = c * nzp + k;
            m = m.max((a[n] - b[n]).abs());
        }
    }
    m
}

/// Signed `int [(u (x) u)^e - u^e (x) u^e] : grad_x(psi u^e)`.
pub fn horizontal_pairing(u: &HField, m: &Mollifier, psi: &SField) -> Result<f64> {
    same_grid(&u.grid, &psi.grid)?;
    check_margin(psi, m)?;
    let k = m.kernel(&u.grid)?;
    Ok(mollified(u, None, &k, m.vertical).horizontal_pairing(&u.grid, &psi.values))
}

/// Signed `int [(u w)^e - u^e w^e] . dz(psi u^e)`.
pub fn vertical_pairing(u: &HField, w: &SField, m: &Mollifier, psi: &SField) -> Result<f64> {
    same_grid(&u.grid, &psi.grid)?;
    same_grid(&u.grid, &w.grid)?;
    check_margin(psi, m)?;
    let k = m.kernel(&u.grid)?;
    Ok(mollified(u, Some(w), &k, m.vertical)
        .vertical_pairing(&u.grid, &psi.values, m.vertical)
        .unwrap())
}

pub fn horizontal_functional(u: &HField, m: &Mollifier, chi: f64, psi: &SField) -> Result<f64> {
    Ok((chi * horizontal_pairing(u, m, psi)?).abs())
}

pub fn vertical_functional(
    u: &HField,
    w: &SField,
    m: &Mollifier,
    chi: f64,
    psi: &SField,
) -> Result<f64> {
    Ok((chi * vertical_pairing(u, w, m, psi)?).abs())
}

pub fn dz_psi_u_sup(u: &HField, m: &Mollifier, psi: &SField) -> Result<f64> {
    same_grid(&u.grid, &psi.grid)?;
    check_margin(psi, m)?;
    let k = m.kernel(&u.grid)?;
    let mode = m.vertical;
    let g = &u.grid;
    let conv = |v: &[f64]| convolve_with(v, g, &k, mode);
    let a = dz(&mul(&psi.values, &conv(&u.u1)), g, mode);
    let b = dz(&mul(&psi.values, &conv(&u.u2)), g, mode);
    Ok(a.iter()
        .zip(&b)
        .fold(0.0f64, |acc, (x, y)| acc.max(x.hypot(*y))))
}

/// `||w - w^e||_inf` over the valid nodes for each width, with `w`
/// reconstructed from `u`.
pub fn w_deficit(u: &HField, m: &Mollifier, eps_list: &[f64]) -> Result<ScalingFit> {
    let w = crate::hydrostatics::reconstruct_w(u)?;
    let g = &u.grid;
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let me = m.with_eps(eps);
        let k = me.kernel(g)?;
        let we = convolve_with(&w.values, g, &k, me.vertical);
        points.push((eps, max_dev_in(g, &w.values, &we, me.valid_z(g)?)));
    }
    ScalingFit::with_floor(points, 1e-12 * u.max_abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    pub eps: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub w_deficit: Vec<f64>,
    pub u_deficit: Vec<f64>,
    pub dz_psi_u_sup: Vec<f64>,
    pub predicted: Option<Predicted>,
    pub fit_t1: ScalingFit,
    pub fit_t2: Option<ScalingFit>,
    pub fit_w: Option<ScalingFit>,
    pub fit_dz: ScalingFit,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("nan".to_string(), |x| x.to_string())
}

impl CommutatorReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,T1,T2,wDeficit,dzPsiU_sup\n");
        for i in 0..self.eps.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                self.eps[i],
                self.t1[i],
                fmt_opt(self.t2.get(i).copied()),
                fmt_opt(self.w_deficit.get(i).copied()),
                self.dz_psi_u_sup[i]
            );
        }
        s
    }

    /// Flat `key=value` record of fitted against predicted exponents.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let slope = |f: Option<&ScalingFit>| fmt_opt(f.filter(|f| !f.degenerate).map(|f| f.slope));
        let _ = writeln!(s, "fit_t1={}", slope(Some(&self.fit_t1)));
        let _ = writeln!(s, "fit_t2={}", slope(self.fit_t2.as_ref()));
        let _ = writeln!(s, "fit_w_deficit={}", slope(self.fit_w.as_ref()));
        let _ = writeln!(s, "fit_dz_psi_u={}", slope(Some(&self.fit_dz)));
        if let Some(p) = &self.predicted {
            let _ = writeln!(
                s,
                "predicted_e1={}\npredicted_e2={}\npredicted_ew={}",
                p.e1, p.e2, p.ew
            );
        }
        s
    }
}

/// Full dyadic sweep: horizontal and vertical pairings (with weight `chi`),
/// deficits and the `dz(psi u^e)` sup norm, one mollification per width.
pub fn commutator_sweep(
    u: &HField,
    w: Option<&SField>,
    m: &Mollifier,
    eps_list: &[f64],
    chi: f64,
    psi: &SField,
    exponents: Option<(f64, f64)>,
) -> Result<CommutatorReport> {
    same_grid(&u.grid, &psi.grid)?;
    if let Some(w) = w {
        same_grid(&u.grid, &w.grid)?;
    }
    let g = &u.grid;
    let predicted = exponents
        .map(|(a, b)| predicted_exponents(a, b))
        .transpose()?;
    let mut rep = CommutatorReport {
        eps: Vec::new(),
        t1: Vec::new(),
        t2: Vec::new(),
        w_deficit: Vec::new(),
        u_deficit: Vec::new(),
        dz_psi_u_sup: Vec::new(),
        predicted,
        fit_t1: ScalingFit {
            points: vec![],
            slope: f64::NAN,
            intercept: f64::NAN,
            r2: f64::NAN,
            degenerate: true,
        },
        fit_t2: None,
        fit_w: None,
        fit_dz: ScalingFit {
            points: vec![],
            slope: f64::NAN,
            intercept: f64::NAN,
            r2: f64::NAN,
            degenerate: true,
        },
    };
    for &eps in eps_list {
        let me = m.with_eps(eps);
        check_margin(psi, &me)?;
        let k = me.kernel(g)?;
        let valid = me.valid_z(g)?;
        let mo = mollified(u, w, &k, me.vertical);
        rep.eps.push(eps);
        rep.t1
            .push((chi * mo.horizontal_pairing(g, &psi.values)).abs());
        if let Some(v) = mo.vertical_pairing(g, &psi.values, me.vertical) {
            rep.t2.push((chi * v).abs());
        }
        if let (Some(w), Some(we)) = (w, &mo.we) {
            rep.w_deficit.push(max_dev_in(g, &w.values, we, valid));
        }
        rep.u_deficit.push(
            max_dev_in(g, &u.u1, &mo.ue[0], valid).max(max_dev_in(g, &u.u2, &mo.ue[1], valid)),
        );
        rep.dz_psi_u_sup
            .push(mo.dz_psi_u_sup(g, &psi.values, me.vertical));
    }
    let pts = |v: &[f64]| {
        rep.eps
            .iter()
            .copied()
            .zip(v.iter().copied())
            .collect::<Vec<_>>()
    };
    if eps_list.len() >= 4 {
        let floor = 1e-14 * u.max_abs().powi(3).max(f64::MIN_POSITIVE);
        rep.fit_t1 = ScalingFit::with_floor(pts(&rep.t1), floor)?;
        rep.fit_dz = ScalingFit::new(pts(&rep.dz_psi_u_sup))?;
        if w.is_some() {
            rep.fit_t2 = Some(ScalingFit::with_floor(pts(&rep.t2), floor)?);
            rep.fit_w = Some(ScalingFit::with_floor(
                pts(&rep.w_deficit),
                1e-12 * u.max_abs(),
            )?);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_values() {
        let p = predicted_exponents(0.7, 0.7).unwrap();
        assert!(
            (p.e1 - 1.1).abs() < 1e-12 && (p.e2 - 0.1).abs() < 1e-12 && (p.ew + 0.3).abs() < 1e-12
        );
        let q = predicted_exponents(0.9, 0.6).unwrap();
        assert!((q.e1 - 1.1).abs() < 1e-12 && (q.e2 - 0.1).abs() < 1e-12);
        let r = predicted_exponents(1.2, 0.45).unwrap();
        assert_eq!(r.regime, Regime::SmoothHorizontal);
        assert!((r.e2 - 0.1).abs() < 1e-12);
        assert!((r.e1 - 1.1).abs() < 1e-12);
        assert!(matches!(
            predicted_exponents(0.6, 0.7),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn constants_commute() {
        let g = Grid3::channel(16, 16, 16).unwrap();
        let u = SField::constant(&g, 2.0);
        let w = SField::constant(&g, -3.0);
        let t = cet_decompose(&u, &w, &Mollifier::new(1.0).periodic_z()).unwrap();
        for f in [&t.a, &t.b, &t.c] {
            assert!(f.max_abs() < 1e-13);
        }
    }

    #[test]
    fn margin_enforced_under_cutoff() {
        let g = Grid3::channel(16, 16, 64).unwrap();
        let u = HField::zeros(&g);
        let psi = SField::constant(&g, 1.0);
        let m = Mollifier::new(1.0);
        assert!(matches!(
            horizontal_functional(&u, &m, 1.0, &psi),
            Err(Error::SupportViolation(_))
        ));
        let psi = crate::weights::central_bump(&g);
        assert!(
            horizontal_functional(&u, &Mollifier::new(1.0).with_eps(1.0), 1.0, &psi)
                .map(|_| ())
                .is_err()
        );
    }
}
