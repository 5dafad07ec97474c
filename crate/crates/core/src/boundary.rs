//! Geometry of the unit disk-cylinder and its smoothed interior domain,
//! with boundary-flux, corner-strip and global-budget integrals for analytic
//! flows.
//!
//! Everything is axisymmetric, so distances are computed in the meridional
//! half-plane `(r, z)`. The smoothed domain `Omega_eta` is the rounded
//! rectangle bounded by `z = eta`, `z = 1 - eta`, `r = 1 - eta` and two
//! corner arcs. With `tau(s) = eta + eta (1 - (1 - (s/eta)^3)^(1/3))` the
//! corner arcs are the Lamé curves `X^3 + Y^3 = 1` of radius `eta` centred
//! at `(1 - 2 eta, 2 eta)` and `(1 - 2 eta, 1 - 2 eta)`.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fit::ScalingFit;
use crate::mollify::{smoothstep, smoothstep_slope};
use crate::quad::{adaptive, kronrod_nodes};

/// Velocity `U = (u1, u2, w)` and pressure as closures of `(t, X)`.
pub trait Flow: Sync {
    fn velocity(&self, t: f64, x: [f64; 3]) -> [f64; 3];
    fn pressure(&self, t: f64, x: [f64; 3]) -> f64;
}

/// Normal velocity vanishing like `d^e` at the sidewall and `[z(1-z)]^e` at
/// the lids; bounded pressure; slow time modulation.
#[derive(Clone, Copy, Debug)]
pub struct HolderWallFlow {
    pub exponent: f64,
}

impl Default for HolderWallFlow {
    fn default() -> Self {
        HolderWallFlow {
            exponent: 2.0 / 3.0,
        }
    }
}

impl Flow for HolderWallFlow {
    fn velocity(&self, t: f64, [x, y, z]: [f64; 3]) -> [f64; 3] {
        let a = 1.0 + 0.25 * t.sin();
        let radial = (1.0 - x * x - y * y).max(0.0).powf(self.exponent) * (1.0 + 0.5 * z);
        let swirl = 0.5 * (PI * z).cos();
        let w = (z * (1.0 - z)).max(0.0).powf(self.exponent) * (1.0 + 0.5 * x);
        [
            a * (radial * x - swirl * y),
            a * (radial * y + swirl * x),
            a * w,
        ]
    }

    fn pressure(&self, t: f64, [x, y, z]: [f64; 3]) -> f64 {
        let a = 1.0 + 0.25 * t.sin();
        a * a * (1.0 + 0.25 * x * y + 0.1 * (PI * z).cos())
    }
}

/// `u = x_h`: crosses the sidewall with unit normal speed.
#[derive(Clone, Copy, Debug, Default)]
pub struct RadialLeak;

impl Flow for RadialLeak {
    fn velocity(&self, _: f64, [x, y, _]: [f64; 3]) -> [f64; 3] {
        [x, y, 0.0]
    }

    fn pressure(&self, _: f64, _: [f64; 3]) -> f64 {
        0.0
    }
}

/// Rigid rotation with constant pressure: tangential everywhere.
#[derive(Clone, Copy, Debug, Default)]
pub struct Swirl;

impl Flow for Swirl {
    fn velocity(&self, _: f64, [x, y, _]: [f64; 3]) -> [f64; 3] {
        [-y, x, 0.0]
    }

    fn pressure(&self, _: f64, _: [f64; 3]) -> f64 {
        1.0
    }
}

/// Vortex supported in `r < 1/2`, `|z - 1/2| < 1/4`.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorVortex;

impl InteriorVortex {
    fn envelope(x: [f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        crate::mollify::bump(r / 0.5) * crate::mollify::bump((x[2] - 0.5) / 0.25)
    }
}

impl Flow for InteriorVortex {
    fn velocity(&self, _: f64, x: [f64; 3]) -> [f64; 3] {
        let e = Self::envelope(x);
        [-e * x[1], e * x[0], e * x[0] * x[1]]
    }

    fn pressure(&self, _: f64, x: [f64; 3]) -> f64 {
        Self::envelope(x)
    }
}

/// `|U| = rho^(-exponent)` in the direction `e_1`, `rho` the distance to the
/// nearer corner circle; unit pressure. `exponent = 0` is bounded.
#[derive(Clone, Copy, Debug)]
pub struct CornerSingular {
    pub exponent: f64,
}

impl Flow for CornerSingular {
    fn velocity(&self, _: f64, [x, y, z]: [f64; 3]) -> [f64; 3] {
        let d = 1.0 - (x * x + y * y).sqrt();
        let rho = d.hypot(z.min(1.0 - z));
        [rho.powf(-self.exponent), 0.0, 0.0]
    }

    fn pressure(&self, _: f64, _: [f64; 3]) -> f64 {
        1.0
    }
}

/// `U -> c U`, `p -> c^2 p`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<F> {
    pub inner: F,
    pub c: f64,
}

impl<F: Flow> Flow for Scaled<F> {
    fn velocity(&self, t: f64, x: [f64; 3]) -> [f64; 3] {
        self.inner.velocity(t, x).map(|v| self.c * v)
    }

    fn pressure(&self, t: f64, x: [f64; 3]) -> f64 {
        self.c * self.c * self.inner.pressure(t, x)
    }
}

fn energy_head(f: &dyn Flow, t: f64, x: [f64; 3]) -> (f64, [f64; 3]) {
    let u = f.velocity(t, x);
    (0.5 * (u[0] * u[0] + u[1] * u[1]) + f.pressure(t, x), u)
}

/// Closest point of the cylinder boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestPoint {
    pub point: [f64; 3],
    pub distance: f64,
    /// Outward unit normal at `point`.
    pub normal: [f64; 3],
    /// Another boundary part lies within `1e-12` of the same distance.
    pub tie: bool,
}

/// Candidates are the sidewall, bottom and top; ties go to the sidewall,
/// then the bottom.
pub fn nearest_boundary(x: [f64; 3]) -> Result<NearestPoint> {
    let r = x[0].hypot(x[1]);
    if r > 1.0 || !(0.0..=1.0).contains(&x[2]) {
        return Err(Error::OutOfRange(format!("{x:?} is outside the cylinder")));
    }
    let mut cands: Vec<NearestPoint> = Vec::with_capacity(3);
    if r > 1e-6 {
        let n = [x[0] / r, x[1] / r, 0.0];
        cands.push(NearestPoint {
            point: [n[0], n[1], x[2]],
            distance: 1.0 - r,
            normal: n,
            tie: false,
        });
    }
    cands.push(NearestPoint {
        point: [x[0], x[1], 0.0],
        distance: x[2],
        normal: [0.0, 0.0, -1.0],
        tie: false,
    });
    cands.push(NearestPoint {
        point: [x[0], x[1], 1.0],
        distance: 1.0 - x[2],
        normal: [0.0, 0.0, 1.0],
        tie: false,
    });
    let best = cands
        .iter()
        .map(|c| c.distance)
        .fold(f64::INFINITY, f64::min);
    let close: Vec<&NearestPoint> = cands
        .iter()
        .filter(|c| c.distance <= best + 1e-12)
        .collect();
    let mut out = *close[0];
    out.tie = close.len() > 1;
    Ok(out)
}

/// Foot point on the boundary of `Omega_eta` in the meridional plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    /// Distance to the boundary, positive inside `Omega_eta`.
    pub distance: f64,
    pub foot: [f64; 2],
    /// Outward unit normal `(n_r, n_z)` at the foot.
    pub normal: [f64; 2],
    /// Distance from the foot to the nearest junction of arc and segment.
    pub junction_gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedCylinder {
    pub eta: f64,
}

/// `phi(s)`: 0 below 1/4, 1 above 1/2, quintic smoothstep between.
pub fn cutoff_profile(s: f64) -> f64 {
    smoothstep(4.0 * (s - 0.25))
}

pub fn cutoff_profile_slope(s: f64) -> f64 {
    4.0 * smoothstep_slope(4.0 * (s - 0.25))
}

impl SmoothedCylinder {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.125) {
            return Err(Error::OutOfRange(format!("eta = {eta} not in (0, 1/8)")));
        }
        Ok(SmoothedCylinder { eta })
    }

    pub fn tau(&self, s: f64) -> f64 {
        let q = (s / self.eta).clamp(0.0, 1.0);
        self.eta * (2.0 - (1.0 - q * q * q).cbrt())
    }

    pub fn tau_slope(&self, s: f64) -> f64 {
        let q = (s / self.eta).clamp(0.0, 1.0);
        q * q * (1.0 - q * q * q).powf(-2.0 / 3.0)
    }

    pub fn tau_inverse(&self, v: f64) -> f64 {
        let b = ((v - self.eta) / self.eta).clamp(0.0, 1.0);
        self.eta * (1.0 - (1.0 - b).powi(3)).cbrt()
    }

    pub fn tau_inverse_slope(&self, v: f64) -> f64 {
        let b = ((v - self.eta) / self.eta).clamp(0.0, 1.0);
        let c = 1.0 - b;
        c * c * (1.0 - c * c * c).powf(-2.0 / 3.0)
    }

    /// Lower boundary height `omega_1` over a point at sidewall distance
    /// `wall`; `None` where the column is excluded (`wall <= eta`).
    pub fn omega1(&self, wall: f64) -> Option<f64> {
        let e = self.eta;
        if wall <= e {
            None
        } else if wall >= 2.0 * e {
            Some(e)
        } else {
            Some(self.tau(2.0 * e - wall))
        }
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        let wall = 1.0 - x[0].hypot(x[1]);
        match self.omega1(wall) {
            Some(w1) => x[2] > w1 && x[2] < 1.0 - w1,
            None => false,
        }
    }

    fn corner_point(&self, theta: f64, top: bool) -> [f64; 2] {
        let e = self.eta;
        let (c, s) = (theta.cos().max(0.0), theta.sin().max(0.0));
        let (cx, cy) = (c.powf(2.0 / 3.0), s.powf(2.0 / 3.0));
        let r = 1.0 - 2.0 * e + e * cx;
        let z = if top {
            1.0 - 2.0 * e + e * cy
        } else {
            2.0 * e - e * cy
        };
        [r, z]
    }

    /// Nearest point on one corner arc: 64 samples, then bisection on the
    /// orthogonality condition `(p - q) . tangent = 0`. Golden section on the
    /// squared distance stalls at `sqrt(machine eps)` and leaves the normal noisy.
    fn nearest_on_corner(&self, p: [f64; 2], top: bool) -> (f64, [f64; 2]) {
        let d2 = |th: f64| {
            let q = self.corner_point(th, top);
            (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
        };
        let slope = |th: f64| {
            let q = self.corner_point(th, top);
            let n = Self::corner_normal(th, top);
            (p[0] - q[0]) * n[1] - (p[1] - q[1]) * n[0]
        };
        const N: usize = 64;
        let step = FRAC_PI_2 / N as f64;
        let mut best = 0;
        let mut bv = f64::INFINITY;
        for i in 0..=N {
            let v = d2(i as f64 * step);
            if v < bv {
                bv = v;
                best = i;
            }
        }
        let lo = (best as f64 - 1.0).max(0.0) * step;
        let hi = ((best + 1) as f64 * step).min(FRAC_PI_2);
        let th = match [lo, best as f64 * step, hi]
            .windows(2)
            .find(|w| slope(w[0]).signum() != slope(w[1]).signum())
        {
            Some(w) => {
                let (mut a, mut b) = (w[0], w[1]);
                let sa = slope(a).signum();
                for _ in 0..64 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if slope(m).signum() == sa {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
            None => best as f64 * step,
        };
        (th, self.corner_point(th, top))
    }

    fn corner_normal(theta: f64, top: bool) -> [f64; 2] {
        // Gradient of X^3 + Y^3 is (X^2, Y^2); X = cos^(2/3), Y = sin^(2/3).
        let (c, s) = (theta.cos().max(0.0), theta.sin().max(0.0));
        let (nx, ny) = (c.powf(4.0 / 3.0), s.powf(4.0 / 3.0));
        let l = nx.hypot(ny);
        [nx / l, if top { ny / l } else { -ny / l }]
    }

    fn junctions(&self) -> [[f64; 2]; 4] {
        let e = self.eta;
        [
            [1.0 - 2.0 * e, e],
            [1.0 - e, 2.0 * e],
            [1.0 - e, 1.0 - 2.0 * e],
            [1.0 - 2.0 * e, 1.0 - e],
        ]
    }

    /// Signed distance to the boundary of `Omega_eta` in the `(r, z)` plane.
    pub fn profile_point(&self, r: f64, z: f64) -> ProfilePoint {
        let e = self.eta;
        let rc = 1.0 - 2.0 * e;
        let mut cands: Vec<([f64; 2], [f64; 2])> = vec![
            ([r.clamp(0.0, rc), e], [0.0, -1.0]),
            ([r.clamp(0.0, rc), 1.0 - e], [0.0, 1.0]),
            ([1.0 - e, z.clamp(2.0 * e, 1.0 - 2.0 * e)], [1.0, 0.0]),
        ];
        for top in [false, true] {
            let (th, q) = self.nearest_on_corner([r, z], top);
            cands.push((q, Self::corner_normal(th, top)));
        }
        let dist = |q: [f64; 2]| (q[0] - r).hypot(q[1] - z);
        let (foot, normal) = cands
            .into_iter()
            .min_by(|a, b| dist(a.0).total_cmp(&dist(b.0)))
            .unwrap();
        let d = dist(foot);
        let inside = self.contains([r, 0.0, z]);
        let junction_gap = self
            .junctions()
            .iter()
            .map(|j| (j[0] - foot[0]).hypot(j[1] - foot[1]))
            .fold(f64::INFINITY, f64::min);
        ProfilePoint {
            distance: if inside { d } else { -d },
            foot,
            normal,
            junction_gap,
        }
    }

    pub fn d_eta(&self, x: [f64; 3]) -> f64 {
        self.profile_point(x[0].hypot(x[1]), x[2]).distance
    }

    /// `psi_eta = phi(d_eta / eta)`.
    pub fn psi(&self, x: [f64; 3]) -> f64 {
        cutoff_profile(self.d_eta(x) / self.eta)
    }

    /// `-(1/eta) phi'(d_eta/eta) N`, with centred differences when the foot
    /// point is within `2e-3 eta` of an arc/segment junction.
    pub fn grad_psi(&self, x: [f64; 3]) -> [f64; 3] {
        let r = x[0].hypot(x[1]);
        let pp = self.profile_point(r, x[2]);
        let slope = cutoff_profile_slope(pp.distance / self.eta);
        if slope == 0.0 {
            return [0.0; 3];
        }
        if pp.junction_gap < 2e-3 * self.eta {
            let h = 1e-5 * self.eta;
            let mut g = [0.0; 3];
            for (a, ga) in g.iter_mut().enumerate() {
                let (mut p, mut m) = (x, x);
                p[a] += h;
                m[a] -= h;
                *ga = (self.psi(p) - self.psi(m)) / (2.0 * h);
            }
            return g;
        }
        let n = normal_3d(pp.normal, x, r);
        let s = -slope / self.eta;
        [s * n[0], s * n[1], s * n[2]]
    }
}

fn normal_3d(n: [f64; 2], x: [f64; 3], r: f64) -> [f64; 3] {
    if r > 0.0 {
        [n[0] * x[0] / r, n[0] * x[1] / r, n[1]]
    } else {
        [0.0, 0.0, n[1]]
    }
}

/// Radical-inverse (Halton) point in the unit cube.
fn halton(i: u64, base: u64) -> f64 {
    let (mut f, mut r, mut n) = (1.0, 0.0, i);
    while n > 0 {
        f /= base as f64;
        r += f * (n % base) as f64;
        n /= base;
    }
    r
}

/// Quasi-random points of the cylinder (Halton in the bounding box, points
/// with `r > 1` skipped).
pub fn cylinder_samples(n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n {
        let p = [
            2.0 * halton(i, 2) - 1.0,
            2.0 * halton(i, 3) - 1.0,
            halton(i, 5),
        ];
        i += 1;
        if p[0].hypot(p[1]) <= 1.0 {
            out.push(p);
        }
    }
    out
}

/// `eta * max |grad psi_eta|` over the sample points.
pub fn psi_gradient_sup(sc: &SmoothedCylinder, points: &[[f64; 3]]) -> f64 {
    let vals = crate::par::map(points.len(), |i| {
        let g = sc.grad_psi(points[i]);
        (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
    });
    sc.eta * vals.into_iter().fold(0.0, f64::max)
}

const N_THETA: usize = 64;
const REL_TOL: f64 = 1e-6;
/// Absolute floor; rows that barely touch a band would otherwise chase rounding noise.
const ABS_TOL: f64 = 1e-12;

/// `int_0^{2 pi} g(r cos th, r sin th, z) dth` by the periodic trapezoid rule.
fn around(r: f64, z: f64, g: impl Fn([f64; 3]) -> f64) -> f64 {
    let h = 2.0 * PI / N_THETA as f64;
    (0..N_THETA)
        .map(|j| {
            let th = j as f64 * h;
            g([r * th.cos(), r * th.sin(), z])
        })
        .sum::<f64>()
        * h
}

/// Nested adaptive integral over the rectangle `[a0, a1] x [b0, b1]`.
fn rect(f: impl Fn(f64, f64) -> f64, (a0, a1): (f64, f64), (b0, b1): (f64, f64)) -> Result<f64> {
    let failure: Cell<Option<Error>> = Cell::new(None);
    let outer = adaptive(
        |a| match adaptive(|b| f(a, b), b0, b1, 2, 0.1 * REL_TOL, 0.1 * ABS_TOL) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        a0,
        a1,
        2,
        REL_TOL,
        ABS_TOL,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// Side and lid flux densities of the decay condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxPair {
    /// `(1/eta) int_{5eta/4 < d_wall < 3eta/2} |(|u|^2/2 + p) u.n|`
    pub side: f64,
    /// `(1/eta) int_{S x I_eta} |(|u|^2/2 + p) w|`, `I_eta = (eta, 2eta) u (1-2eta, 1-eta)`
    pub vertical: f64,
}

pub fn boundary_flux(flow: &dyn Flow, eta: f64) -> Result<FluxPair> {
    SmoothedCylinder::new(eta)?;
    let side = rect(
        |r, z| {
            r * around(r, z, |x| {
                let (h, u) = energy_head(flow, 0.0, x);
                (h * (u[0] * x[0] + u[1] * x[1]) / r).abs()
            })
        },
        (1.0 - 1.5 * eta, 1.0 - 1.25 * eta),
        (0.0, 1.0),
    )?;
    let lid = |z0: f64, z1: f64| {
        rect(
            |r, z| {
                r * around(r, z, |x| {
                    let (h, u) = energy_head(flow, 0.0, x);
                    (h * u[2]).abs()
                })
            },
            (0.0, 1.0),
            (z0, z1),
        )
    };
    let vertical = lid(eta, 2.0 * eta)? + lid(1.0 - 2.0 * eta, 1.0 - eta)?;
    Ok(FluxPair {
        side: side / eta,
        vertical: vertical / eta,
    })
}

/// Norms over the corner strip `Gamma_eta` (points within `eta` of the two
/// corner circles).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerNorms {
    pub eta: f64,
    /// `||p||_{L^{3/2}(Gamma_eta)}`
    pub p_norm: f64,
    /// `||U||_{L^3(Gamma_eta)}`
    pub u_norm: f64,
    /// `|Gamma_eta|`
    pub measure: f64,
}

impl CornerNorms {
    pub fn measure_ratio(&self) -> f64 {
        self.measure / (self.eta * self.eta)
    }
}

/// Exact `|Gamma_eta| = pi^2 eta^2 - (4 pi / 3) eta^3` (two quarter tori).
pub fn corner_strip_measure(eta: f64) -> f64 {
    PI * PI * eta * eta - 4.0 * PI / 3.0 * eta.powi(3)
}

/// Integrates `g` over `Gamma_eta` in corner polar coordinates
/// `r = 1 - rho cos a`, `z = rho sin a` (mirrored at the top), with
/// `rho = eta s^5` to absorb power singularities at the corner.
///
/// Cartesian sample points cannot resolve `rho` below ~1e-9 (the wall
/// distance `1 - |x_h|` is lost to rounding), so `[0, S0]` is replaced by
/// `S0` times the inner integral at `S0`. That is exact when `|U|^3 ~ rho^-1.8`
/// and below 1e-12 relative for bounded integrands.
fn over_corners(eta: f64, g: impl Fn([f64; 3]) -> f64) -> Result<f64> {
    const S0: f64 = 0.05;
    let mut total = 0.0;
    for top in [false, true] {
        let f = |s: f64, a: f64| {
            let rho = eta * s.powi(5);
            let jac = 5.0 * eta * s.powi(4) * rho;
            let r = 1.0 - rho * a.cos();
            let z = rho * a.sin();
            let z = if top { 1.0 - z } else { z };
            jac * r * around(r, z, &g)
        };
        total += rect(f, (S0, 1.0), (0.0, FRAC_PI_2))?;
        total += S0 * adaptive(|a| f(S0, a), 0.0, FRAC_PI_2, 2, 0.1 * REL_TOL, 1e-300)?;
    }
    Ok(total)
}

pub fn corner_strip_norms(flow: &dyn Flow, eta: f64) -> Result<CornerNorms> {
    SmoothedCylinder::new(eta)?;
    let p = over_corners(eta, |x| flow.pressure(0.0, x).abs().powf(1.5))?;
    let u = over_corners(eta, |x| {
        let v = flow.velocity(0.0, x);
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).powf(1.5)
    })?;
    let measure = over_corners(eta, |_| 1.0)?;
    Ok(CornerNorms {
        eta,
        p_norm: p.powf(2.0 / 3.0),
        u_norm: u.cbrt(),
        measure,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerSweep {
    pub rows: Vec<CornerNorms>,
    /// Slope of `||p||` against `eta`.
    pub mu1: ScalingFit,
    /// Slope of `||U||` against `eta`.
    pub mu2: ScalingFit,
}

impl CornerSweep {
    /// `mu1 + mu2 > 1` and `mu2 > 1/3`.
    pub fn satisfied(&self) -> bool {
        !self.mu1.degenerate
            && !self.mu2.degenerate
            && self.mu1.slope + self.mu2.slope > 1.0
            && self.mu2.slope > 1.0 / 3.0
    }
}

pub fn corner_sweep(flow: &dyn Flow, etas: &[f64]) -> Result<CornerSweep> {
    let rows = etas
        .iter()
        .map(|&e| corner_strip_norms(flow, e))
        .collect::<Result<Vec<_>>>()?;
    let mu1 = ScalingFit::new(rows.iter().map(|r| (r.eta, r.p_norm)).collect())?;
    let mu2 = ScalingFit::new(rows.iter().map(|r| (r.eta, r.u_norm)).collect())?;
    Ok(CornerSweep { rows, mu1, mu2 })
}

/// Checks `|U.N| <= 1e-10` on a lattice of sidewall and lid points.
pub fn check_slip(flow: &dyn Flow, t: f64) -> Result<()> {
    let mut pts: Vec<([f64; 3], [f64; 3])> = Vec::new();
    for i in 0..32 {
        let th = 2.0 * PI * i as f64 / 32.0;
        let (c, s) = (th.cos(), th.sin());
        for k in 0..=16 {
            pts.push(([c, s, k as f64 / 16.0], [c, s, 0.0]));
        }
        for k in 0..8 {
            let r = k as f64 / 8.0;
            pts.push(([r * c, r * s, 0.0], [0.0, 0.0, -1.0]));
            pts.push(([r * c, r * s, 1.0], [0.0, 0.0, 1.0]));
        }
    }
    for (x, n) in pts {
        let u = flow.velocity(t, x);
        let un = u[0] * n[0] + u[1] * n[1] + u[2] * n[2];
        if un.abs() > 1e-10 {
            return Err(Error::SlipViolation {
                magnitude: un.abs(),
                point: x,
            });
        }
    }
    Ok(())
}

/// Integrand of the boundary term at `(t, X)`:
/// `(|u|^2/2 + p) U.N (1/eta) phi'(d_eta/eta)`.
pub fn budget_integrand(sc: &SmoothedCylinder, flow: &dyn Flow, t: f64, x: [f64; 3]) -> f64 {
    let r = x[0].hypot(x[1]);
    budget_density(sc, &sc.profile_point(r, x[2]), flow, t, x, r)
}

fn budget_density(
    sc: &SmoothedCylinder,
    pp: &ProfilePoint,
    flow: &dyn Flow,
    t: f64,
    x: [f64; 3],
    r: f64,
) -> f64 {
    let slope = cutoff_profile_slope(pp.distance / sc.eta);
    if slope == 0.0 {
        return 0.0;
    }
    let n = normal_3d(pp.normal, x, r);
    let (h, u) = energy_head(flow, t, x);
    h * (u[0] * n[0] + u[1] * n[1] + u[2] * n[2]) * slope / sc.eta
}

/// `-int_{t1}^{t2} int budget_integrand dX dt`, over the collar
/// `eta/4 < d_eta < eta/2` split into two flat bands, two corner boxes and
/// the side band. Time by one 15-point Kronrod panel.
pub fn boundary_term(flow: &dyn Flow, eta: f64, (t1, t2): (f64, f64)) -> Result<f64> {
    let sc = SmoothedCylinder::new(eta)?;
    let e = eta;
    let rc = 1.0 - 2.0 * e;
    let times = kronrod_nodes(t1, t2);
    let f = |r: f64, z: f64| {
        let pp = sc.profile_point(r, z);
        if cutoff_profile_slope(pp.distance / e) == 0.0 {
            return 0.0;
        }
        r * times
            .iter()
            .map(|&(t, wt)| wt * around(r, z, |x| budget_density(&sc, &pp, flow, t, x, r)))
            .sum::<f64>()
    };
    let pieces = [
        ((0.0, rc), (1.25 * e, 1.5 * e)),
        ((rc, 1.0 - e), (e, 2.0 * e)),
        ((1.0 - 1.5 * e, 1.0 - 1.25 * e), (2.0 * e, 1.0 - 2.0 * e)),
        ((rc, 1.0 - e), (1.0 - 2.0 * e, 1.0 - e)),
        ((0.0, rc), (1.0 - 1.5 * e, 1.0 - 1.25 * e)),
    ];
    let mut total = 0.0;
    for (ra, za) in pieces {
        total += rect(f, ra, za)?;
    }
    Ok(-total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetSweep {
    pub values: Vec<(f64, f64)>,
    /// Fit of `|value|` against `eta`; `None` with fewer than 4 widths.
    pub fit: Option<ScalingFit>,
}

/// Boundary term for each width after checking the slip condition at both
/// ends and the middle of the time window.
pub fn global_budget_limit(
    flow: &dyn Flow,
    etas: &[f64],
    window: (f64, f64),
) -> Result<BudgetSweep> {
    for t in [window.0, 0.5 * (window.0 + window.1), window.1] {
        check_slip(flow, t)?;
    }
    let values = etas
        .iter()
        .map(|&e| Ok((e, boundary_term(flow, e, window)?)))
        .collect::<Result<Vec<_>>>()?;
    let fit = if values.len() >= 4 {
        Some(ScalingFit::with_floor(
            values.iter().map(|&(e, v)| (e, v.abs())).collect(),
            1e-14,
        )?)
    } else {
        None
    };
    Ok(BudgetSweep { values, fit })
}

/// One row per width: `eta,sideFlux,verticalFlux,pNorm,UNorm,stripMeasure,psiGradSup`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryRow {
    pub eta: f64,
    pub flux: FluxPair,
    pub corner: CornerNorms,
    pub psi_grad_sup: f64,
}

pub fn boundary_csv(rows: &[BoundaryRow]) -> String {
    let mut s = String::from("eta,sideFlux,verticalFlux,pNorm,UNorm,stripMeasure,psiGradSup\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.eta,
            r.flux.side,
            r.flux.vertical,
            r.corner.p_norm,
            r.corner.u_norm,
            r.corner.measure,
            r.psi_grad_sup
        );
    }
    s
}
