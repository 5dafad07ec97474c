//! Viscous hydrostatic solver on a periodic x-z slice.
//!
//! Unknown: horizontal velocity `u(x, z)` with `u = 0` at `z = 0` and
//! `dz u = 0` at `z = 1`. The barotropic pressure keeps the column integral
//! of `u` independent of `x`, so `w = -int_0^z dx u` vanishes at both lids.
//!
//! One step: SSP-RK3 on the skew-symmetric advection term, each stage
//! projected onto the column constraint, then Crank-Nicolson diffusion with
//! the pressure fixed by an influence vector per Fourier mode. The discrete
//! diffusion and pressure steps satisfy the energy identity exactly, so the
//! ledger defect only measures the advection error.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::SField;
use crate::fit::{loglog_fit, LineFit};
use crate::grid::Grid3;
use crate::holder::{seminorm_aniso_in, ZWindow};
use crate::spectral::{ddx, ik, Dims};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialField {
    Zero,
    /// `sin(pi z / 2)`, uniform in x.
    Eigenmode,
    /// A few seeded x-modes times vertical eigenfunctions plus a mean shear.
    Smooth,
}

impl InitialField {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(InitialField::Zero),
            "eigenmode" => Some(InitialField::Eigenmode),
            "smooth" => Some(InitialField::Smooth),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitialField::Zero => "zero",
            InitialField::Eigenmode => "eigenmode",
            InitialField::Smooth => "smooth",
        }
    }
}

/// Run parameters. Bottom is no-slip, top is stress-free.
#[derive(Clone, Debug, PartialEq)]
pub struct ViscRunConfig {
    pub nu: f64,
    pub nx: usize,
    pub nz: usize,
    pub dt: f64,
    pub t_end: f64,
    pub initial: InitialField,
    pub seed: u64,
    /// `false` gives pure diffusion.
    pub advection: bool,
    /// Keep every n-th state for the regularity monitor; 0 keeps none.
    pub snapshot_every: usize,
}

impl Default for ViscRunConfig {
    fn default() -> Self {
        ViscRunConfig {
            nu: 0.1,
            nx: 32,
            nz: 32,
            dt: 2e-3,
            t_end: 1.0,
            initial: InitialField::Smooth,
            seed: 1,
            advection: true,
            snapshot_every: 0,
        }
    }
}

impl ViscRunConfig {
    pub fn grid(&self) -> Result<Grid3> {
        Grid3::channel(self.nx, 1, self.nz)
    }

    /// `0.25 min(hx, hz)^2 / nu`; infinite when `nu = 0`.
    pub fn diffusive_limit(&self) -> f64 {
        let h = (2.0 * std::f64::consts::PI / self.nx as f64).min(1.0 / self.nz as f64);
        if self.nu > 0.0 {
            0.25 * h * h / self.nu
        } else {
            f64::INFINITY
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if self.nx < 4 || !self.nx.is_multiple_of(2) {
            return Err(Error::Resolution(format!(
                "nx must be even and >= 4, got {}",
                self.nx
            )));
        }
        if self.nz < 4 {
            return Err(Error::Resolution(format!(
                "nz must be >= 4, got {}",
                self.nz
            )));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::OutOfRange(format!("nu = {}", self.nu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end >= 0.0 && self.t_end.is_finite())
        {
            return Err(Error::OutOfRange(format!(
                "dt = {}, tEnd = {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }
}

/// Velocity at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct ViscState {
    pub t: f64,
    pub step: usize,
    pub u: SField,
}

impl ViscState {
    pub fn initial(config: &ViscRunConfig) -> Result<Self> {
        config.validate_shape()?;
        let g = config.grid()?;
        let mut u = match config.initial {
            InitialField::Zero => SField::zeros(&g),
            InitialField::Eigenmode => {
                SField::from_fn(&g, |_, _, z| (0.5 * std::f64::consts::PI * z).sin())
            }
            InitialField::Smooth => smooth_field(&g, config.seed),
        };
        let nzp = g.nzp();
        for c in 0..g.nx {
            u.values[c * nzp] = 0.0;
        }
        project_columns(&mut u.values, &g);
        Ok(ViscState { t: 0.0, step: 0, u })
    }

    pub fn w(&self) -> SField {
        vertical_velocity(&self.u)
    }

    pub fn energy(&self) -> f64 {
        kinetic_energy(&self.u)
    }
}

fn smooth_field(g: &Grid3, seed: u64) -> SField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_pi = 0.5 * std::f64::consts::PI;
    let mut modes = Vec::new();
    for m in 1..=3 {
        for j in 0..2 {
            let a: f64 = rng.gen_range(-1.0..1.0) / (m * (2 * j + 1)) as f64;
            let ph: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            modes.push((m as f64, (2 * j + 1) as f64, a, ph));
        }
    }
    SField::from_fn(g, move |x, _, z| {
        let mut v = (half_pi * z).sin();
        for &(m, j, a, ph) in &modes {
            v += a * (m * x + ph).cos() * (j * half_pi * z).sin();
        }
        v
    })
}

fn trap_weight(k: usize, nz: usize, hz: f64) -> f64 {
    if k == 0 || k == nz {
        0.5 * hz
    } else {
        hz
    }
}

fn column_integrals(values: &[f64], g: &Grid3) -> Vec<f64> {
    let nzp = g.nzp();
    values
        .chunks(nzp)
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(k, v)| trap_weight(k, g.nz, g.hz) * v)
                .sum()
        })
        .collect()
}

/// Removes the x-varying part of the column integrals by a z-uniform shift
/// above the bottom node.
fn project_columns(values: &mut [f64], g: &Grid3) {
    let nzp = g.nzp();
    let ints = column_integrals(values, g);
    let mean = ints.iter().sum::<f64>() / ints.len() as f64;
    let height = 1.0 - 0.5 * g.hz;
    for (c, col) in values.chunks_mut(nzp).enumerate() {
        let shift = (ints[c] - mean) / height;
        for v in &mut col[1..] {
            *v -= shift;
        }
    }
}

/// `1/2 int u^2` with the trapezoid rule in z.
pub fn kinetic_energy(u: &SField) -> f64 {
    let g = &u.grid;
    let nzp = g.nzp();
    let mut s = 0.0;
    for col in u.values.chunks(nzp) {
        for (k, v) in col.iter().enumerate() {
            s += trap_weight(k, g.nz, g.hz) * v * v;
        }
    }
    0.5 * g.hx * g.hy * s
}

/// `int |dx u|^2 + |dz u|^2`: spectral in x, edge differences in z. This is
/// exactly `-<u, L u>` for the discrete operator used in the implicit step.
pub fn dirichlet_form(u: &SField) -> f64 {
    let g = &u.grid;
    let nzp = g.nzp();
    let dx = ddx(&u.values, Dims::of(g));
    let mut sx = 0.0;
    let mut sz = 0.0;
    for (c, col) in u.values.chunks(nzp).enumerate() {
        for k in 0..nzp {
            let d = dx[c * nzp + k];
            sx += trap_weight(k, g.nz, g.hz) * d * d;
        }
        for k in 0..g.nz {
            let d = col[k + 1] - col[k];
            sz += d * d / g.hz;
        }
    }
    g.hx * g.hy * (sx + sz)
}

/// `w = -int_0^z dx u`, cumulative trapezoid.
pub fn vertical_velocity(u: &SField) -> SField {
    let g = &u.grid;
    let nzp = g.nzp();
    let dx = ddx(&u.values, Dims::of(g));
    let mut w = vec![0.0; dx.len()];
    for (src, dst) in dx.chunks(nzp).zip(w.chunks_mut(nzp)) {
        let mut acc = 0.0;
        for k in 1..nzp {
            acc += 0.5 * g.hz * (src[k - 1] + src[k]);
            dst[k] = -acc;
        }
    }
    SField {
        grid: g.clone(),
        values: w,
    }
}

/// `max_x |dx int_0^1 u dz|`.
pub fn barotropic_defect(u: &SField) -> f64 {
    let g = &u.grid;
    let ints = column_integrals(&u.values, g);
    ddx(&ints, Dims::horizontal(g.nx, g.ny))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `-(1/2)[dx(u u) + u dx u] - (1/2)[dz(u w) + w dz u]`, projected. The
/// vertical difference is centred inside and one-sided at the top, which
/// makes the pairing with `u` vanish exactly when `u(0) = 0` and `w(1) = 0`.
fn advection_tendency(u: &[f64], g: &Grid3) -> Vec<f64> {
    let d = Dims::of(g);
    let nzp = g.nzp();
    let nz = g.nz;
    let field = SField {
        grid: g.clone(),
        values: u.to_vec(),
    };
    let w = vertical_velocity(&field).values;
    let uu: Vec<f64> = u.iter().map(|v| v * v).collect();
    let dx_uu = ddx(&uu, d);
    let dx_u = ddx(u, d);
    let uw: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a * b).collect();
    let mut t = vec![0.0; u.len()];
    let h = g.hz;
    for c in 0..g.nx {
        let b = c * nzp;
        for k in 1..=nz {
            let n = b + k;
            let (dz_uw, dz_u) = if k < nz {
                (
                    (uw[n + 1] - uw[n - 1]) / (2.0 * h),
                    (u[n + 1] - u[n - 1]) / (2.0 * h),
                )
            } else {
                ((uw[n] - uw[n - 1]) / h, (u[n] - u[n - 1]) / h)
            };
            t[n] = -0.5 * (dx_uu[n] + u[n] * dx_u[n]) - 0.5 * (dz_uw + w[n] * dz_u);
        }
    }
    project_columns(&mut t, g);
    t
}

/// Per-mode tridiagonal data for the implicit step.
struct ModeSolver {
    /// Thomas forward-elimination factors.
    cprime: Vec<f64>,
    denom: Vec<f64>,
    /// Operator coefficients: sub, diag, super for `A`, and `q` for `B`.
    s: f64,
    q: f64,
    /// `A^{-1} e` with `e = 1` above the bottom node, and its column integral.
    influence: Vec<f64>,
    influence_int: f64,
}

impl ModeSolver {
    fn new(s: f64, q: f64, nz: usize, hz: f64) -> Self {
        let nzp = nz + 1;
        let mut sub = vec![-s; nzp];
        let mut diag = vec![1.0 + 2.0 * s + q; nzp];
        let mut sup = vec![-s; nzp];
        diag[0] = 1.0;
        sup[0] = 0.0;
        sub[0] = 0.0;
        sub[nz] = -2.0 * s;
        sup[nz] = 0.0;
        let mut cprime = vec![0.0; nzp];
        let mut denom = vec![0.0; nzp];
        denom[0] = diag[0];
        cprime[0] = sup[0] / denom[0];
        for k in 1..nzp {
            denom[k] = diag[k] - sub[k] * cprime[k - 1];
            cprime[k] = sup[k] / denom[k];
        }
        let mut ms = ModeSolver {
            cprime,
            denom,
            s,
            q,
            influence: Vec::new(),
            influence_int: 0.0,
        };
        let mut e: Vec<Complex64> = (0..nzp)
            .map(|k| Complex64::new(if k == 0 { 0.0 } else { 1.0 }, 0.0))
            .collect();
        ms.solve(&mut e);
        ms.influence = e.iter().map(|c| c.re).collect();
        ms.influence_int = ms
            .influence
            .iter()
            .enumerate()
            .map(|(k, v)| trap_weight(k, nz, hz) * v)
            .sum();
        ms
    }

    fn sub(&self, k: usize, nz: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k == nz => -2.0 * self.s,
            _ => -self.s,
        }
    }

    fn solve(&self, r: &mut [Complex64]) {
        let n = r.len();
        let nz = n - 1;
        r[0] /= self.denom[0];
        for k in 1..n {
            let prev = r[k - 1];
            r[k] = (r[k] - prev * self.sub(k, nz)) / self.denom[k];
        }
        for k in (0..n - 1).rev() {
            let next = r[k + 1];
            r[k] -= next * self.cprime[k];
        }
    }

    /// `B v` with `B = 2 I - A` restricted to the rows above the bottom.
    fn explicit_half(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let nz = n - 1;
        let (s, q) = (self.s, self.q);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..nz {
            out[k] = v[k] * (1.0 - 2.0 * s - q) + (v[k - 1] + v[k + 1]) * s;
        }
        out[nz] = v[nz] * (1.0 - 2.0 * s - q) + v[nz - 1] * (2.0 * s);
        out
    }
}

/// Prepared stepper for one configuration.
pub struct Stepper {
    config: ViscRunConfig,
    grid: Grid3,
    modes: Vec<ModeSolver>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    step_dt: f64,
}

impl Stepper {
    pub fn new(config: &ViscRunConfig) -> Result<Self> {
        config.validate_shape()?;
        let grid = config.grid()?;
        if config.dt > config.diffusive_limit() * (1.0 + 1e-12) {
            return Err(Error::Stability {
                step: 0,
                detail: format!(
                    "dt = {} above diffusive limit {}",
                    config.dt,
                    config.diffusive_limit()
                ),
            });
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(config.nx);
        let inv = planner.plan_fft_inverse(config.nx);
        let mut st = Stepper {
            config: config.clone(),
            grid,
            modes: Vec::new(),
            fwd,
            inv,
            step_dt: f64::NAN,
        };
        st.prepare(config.dt);
        Ok(st)
    }

    fn prepare(&mut self, dt: f64) {
        if dt == self.step_dt {
            return;
        }
        let (nx, nz, hz, nu) = (self.config.nx, self.config.nz, self.grid.hz, self.config.nu);
        let s = 0.5 * dt * nu / (hz * hz);
        self.modes = (0..nx)
            .map(|m| {
                let kappa = ik(m, nx).im;
                ModeSolver::new(s, 0.5 * dt * nu * kappa * kappa, nz, hz)
            })
            .collect();
        self.step_dt = dt;
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    /// Advective CFL check: `dt <= 0.5 hx / max|u|` and `dt <= 0.5 hz / max|w|`.
    pub fn check_cfl(&self, state: &ViscState, dt: f64) -> Result<()> {
        if !self.config.advection {
            return Ok(());
        }
        let umax = state.u.max_abs();
        let wmax = state.w().max_abs();
        let limit = (0.5 * self.grid.hx / umax).min(0.5 * self.grid.hz / wmax);
        if dt > limit {
            return Err(Error::Stability {
                step: state.step,
                detail: format!("dt = {dt} above advective limit {limit}"),
            });
        }
        Ok(())
    }

    fn advect(&self, u: &[f64], dt: f64) -> Vec<f64> {
        let g = &self.grid;
        let axpy = |base: &[f64], t: &[f64], a: f64| {
            base.iter()
                .zip(t)
                .map(|(b, v)| b + a * v)
                .collect::<Vec<f64>>()
        };
        let t0 = advection_tendency(u, g);
        let u1 = axpy(u, &t0, dt);
        let t1 = advection_tendency(&u1, g);
        let u2: Vec<f64> = (0..u.len())
            .map(|n| 0.75 * u[n] + 0.25 * (u1[n] + dt * t1[n]))
            .collect();
        let t2 = advection_tendency(&u2, g);
        (0..u.len())
            .map(|n| u[n] / 3.0 + 2.0 / 3.0 * (u2[n] + dt * t2[n]))
            .collect()
    }

    fn diffuse(&self, u: &[f64]) -> Vec<f64> {
        let (nx, nzp) = (self.config.nx, self.grid.nzp());
        let mut spec = vec![Complex64::new(0.0, 0.0); nx * nzp];
        let mut line = vec![Complex64::new(0.0, 0.0); nx];
        for k in 0..nzp {
            for i in 0..nx {
                line[i] = Complex64::new(u[i * nzp + k], 0.0);
            }
            self.fwd.process(&mut line);
            for m in 0..nx {
                spec[m * nzp + k] = line[m];
            }
        }
        for (m, ms) in self.modes.iter().enumerate() {
            let col = &mut spec[m * nzp..(m + 1) * nzp];
            let mut r = ms.explicit_half(col);
            ms.solve(&mut r);
            if m != 0 {
                let nz = nzp - 1;
                let int: Complex64 = r
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * trap_weight(k, nz, self.grid.hz))
                    .sum();
                let p = int / ms.influence_int;
                for (v, b) in r.iter_mut().zip(&ms.influence) {
                    *v -= p * *b;
                }
            }
            col.copy_from_slice(&r);
        }
        let mut out = vec![0.0; u.len()];
        let scale = 1.0 / nx as f64;
        for k in 0..nzp {
            for m in 0..nx {
                line[m] = spec[m * nzp + k];
            }
            self.inv.process(&mut line);
            for i in 0..nx {
                out[i * nzp + k] = line[i].re * scale;
            }
        }
        out
    }

    /// Advances by `dt`; returns the new state and the dissipation rate
    /// `nu int |grad u_mid|^2` of the diffusion half.
    pub fn step_by(&mut self, state: &ViscState, dt: f64) -> Result<(ViscState, f64)> {
        if dt > self.config.diffusive_limit() * (1.0 + 1e-12) {
            return Err(Error::Stability {
                step: state.step,
                detail: format!("dt = {dt} above diffusive limit"),
            });
        }
        self.check_cfl(state, dt)?;
        self.prepare(dt);
        let ustar = if self.config.advection {
            self.advect(&state.u.values, dt)
        } else {
            state.u.values.clone()
        };
        let (unew, rate) = if self.config.nu > 0.0 {
            let unew = self.diffuse(&ustar);
            let mid: Vec<f64> = ustar
                .iter()
                .zip(&unew)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let rate = self.config.nu
                * dirichlet_form(&SField {
                    grid: self.grid.clone(),
                    values: mid,
                });
            (unew, rate)
        } else {
            (ustar, 0.0)
        };
        if unew.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: state.step + 1,
            });
        }
        let next = ViscState {
            t: state.t + dt,
            step: state.step + 1,
            u: SField {
                grid: self.grid.clone(),
                values: unew,
            },
        };
        Ok((next, rate))
    }
}

/// One step of length `config.dt`.
pub fn step(state: &ViscState, config: &ViscRunConfig) -> Result<ViscState> {
    Ok(Stepper::new(config)?.step_by(state, config.dt)?.0)
}

/// Per-step energy record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DissipationLedger {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissip_rate: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// `E(0) - E(t) - cumulative`.
    pub defect: Vec<f64>,
}

impl DissipationLedger {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,E,dissipRate,cumDissip,defect\n");
        for i in 0..self.t.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                self.t[i], self.energy[i], self.dissip_rate[i], self.cumulative[i], self.defect[i]
            );
        }
        s
    }

    pub fn max_abs_defect(&self) -> f64 {
        self.defect.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn total_dissipation(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub ledger: DissipationLedger,
    pub state: ViscState,
    /// Every `snapshot_every`-th state including the first and last.
    pub snapshots: Vec<ViscState>,
}

/// Relative per-step tolerance on the discrete energy inequality.
pub const ENERGY_STEP_TOL: f64 = 1e-6;

pub fn run(config: &ViscRunConfig) -> Result<RunOutput> {
    let mut stepper = Stepper::new(config)?;
    let mut state = ViscState::initial(config)?;
    stepper.check_cfl(&state, config.dt)?;
    let e0 = state.energy();
    let tol = ENERGY_STEP_TOL * e0;
    let mut led = DissipationLedger::default();
    let push = |led: &mut DissipationLedger, t: f64, e: f64, rate: f64, cum: f64| {
        led.t.push(t);
        led.energy.push(e);
        led.dissip_rate.push(rate);
        led.cumulative.push(cum);
        led.defect.push(e0 - e - cum);
    };
    push(&mut led, 0.0, e0, config.nu * dirichlet_form(&state.u), 0.0);
    let mut snaps = Vec::new();
    if config.snapshot_every > 0 {
        snaps.push(state.clone());
    }
    let mut cum = 0.0;
    let mut e_prev = e0;
    let n_steps = (config.t_end / config.dt - 1e-9).ceil().max(0.0) as usize;
    for n in 0..n_steps {
        let dt = if n + 1 == n_steps {
            config.t_end - state.t
        } else {
            config.dt
        };
        if dt <= 0.0 {
            break;
        }
        let (next, rate) = stepper.step_by(&state, dt)?;
        state = next;
        let e = state.energy();
        let excess = e + dt * rate - e_prev;
        if excess > tol || e > e0 * (1.0 + ENERGY_STEP_TOL) {
            return Err(Error::EnergyInequality {
                step: state.step,
                excess,
            });
        }
        cum += dt * rate;
        push(&mut led, state.t, e, rate, cum);
        e_prev = e;
        if config.snapshot_every > 0
            && (state.step % config.snapshot_every == 0 || n + 1 == n_steps)
        {
            snaps.push(state.clone());
        }
    }
    Ok(RunOutput {
        ledger: led,
        state,
        snapshots: snaps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub nu: f64,
    pub dissipation: f64,
    pub final_energy: f64,
    pub initial_energy: f64,
    /// Largest `|E(0) - E(t) - cumulative|` over the run.
    pub max_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViscositySweep {
    pub rows: Vec<SweepRow>,
    /// Log-log slope of dissipation against `nu`; `None` when any entry is 0.
    pub trend: Option<LineFit>,
    /// Full output of each run, in `rows` order.
    pub runs: Vec<RunOutput>,
}

impl ViscositySweep {
    /// Dissipation strictly decreases along the (decreasing) `nu` list.
    pub fn monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].dissipation < w[0].dissipation)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("nu,dissipation,finalEnergy,maxDefect\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.nu, r.dissipation, r.final_energy, r.max_defect
            );
        }
        s
    }
}

/// Boundary-layer width `sqrt(nu tEnd)` must be at least `4 hz`.
pub fn check_layer(config: &ViscRunConfig) -> Result<()> {
    let layer = (config.nu * config.t_end).sqrt();
    let limit = 4.0 / config.nz as f64;
    if layer < limit {
        return Err(Error::UnresolvedBoundaryLayer { layer, limit });
    }
    Ok(())
}

pub fn viscosity_sweep(base: &ViscRunConfig, nus: &[f64]) -> Result<ViscositySweep> {
    if nus.len() < 4 {
        return Err(Error::OutOfRange(format!(
            "need at least 4 viscosities, got {}",
            nus.len()
        )));
    }
    if nus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::OutOfRange(
            "viscosities must be strictly decreasing".into(),
        ));
    }
    let configs: Vec<ViscRunConfig> = nus
        .iter()
        .map(|&nu| ViscRunConfig { nu, ..base.clone() })
        .collect();
    for c in &configs {
        check_layer(c)?;
    }
    let runs = crate::par::map(configs.len(), |i| run(&configs[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = runs
        .iter()
        .zip(&configs)
        .map(|(out, c)| SweepRow {
            nu: c.nu,
            dissipation: out.ledger.total_dissipation(),
            final_energy: out.state.energy(),
            initial_energy: out.ledger.energy[0],
            max_defect: out.ledger.max_abs_defect(),
        })
        .collect();
    let trend = if rows.iter().all(|r| r.dissipation > 0.0) {
        loglog_fit(
            &rows.iter().map(|r| r.nu).collect::<Vec<_>>(),
            &rows.iter().map(|r| r.dissipation).collect::<Vec<_>>(),
        )
    } else {
        None
    };
    Ok(ViscositySweep { rows, trend, runs })
}

/// Interior seminorm per snapshot and `int seminorm^3 dt` (trapezoid).
#[derive(Clone, Debug, PartialEq)]
pub struct RegularitySeries {
    pub t: Vec<f64>,
    pub seminorm: Vec<f64>,
    pub aggregate: f64,
}

pub fn regularity_monitor(
    states: &[ViscState],
    alpha: f64,
    beta: f64,
    window: ZWindow,
) -> Result<RegularitySeries> {
    let mut t = Vec::with_capacity(states.len());
    let mut s = Vec::with_capacity(states.len());
    for st in states {
        t.push(st.t);
        s.push(seminorm_aniso_in(&st.u, alpha, beta, window)?);
    }
    let aggregate = (1..t.len())
        .map(|i| 0.5 * (t[i] - t[i - 1]) * (s[i].powi(3) + s[i - 1].powi(3)))
        .sum();
    Ok(RegularitySeries {
        t,
        seminorm: s,
        aggregate,
    })
}
