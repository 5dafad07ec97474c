//! One function per scenario: build inputs, run the library, judge the rules.

use std::f64::consts::PI;

use pelab::boundary::{
    boundary_csv, boundary_flux, check_slip, corner_strip_norms, corner_sweep, cylinder_samples,
    global_budget_limit, psi_gradient_sup, BoundaryRow, CornerSingular, Flow, HolderWallFlow,
    InteriorVortex, RadialLeak, SmoothedCylinder, Swirl,
};
use pelab::commutator::{commutator_sweep, Predicted};
use pelab::energy::{flux_terms, mollified_balance, EnergyLedger, Snapshot};
use pelab::fit::{dyadic, ScalingFit};
use pelab::holder::{estimate_exponents, ZWindow};
use pelab::hydrostatics::{
    pressure_regularity_report, pressure_solve, reconstruct_w, regularity_csv,
};
use pelab::mollify::{extension_defect, Aabb, CutoffExtension, Mollifier, Nonlinearity};
use pelab::synth::{make_weierstrass, taylor_green, SyntheticSpec};
use pelab::visc::{regularity_monitor, viscosity_sweep, InitialField, ViscRunConfig};
use pelab::weights::{central_bump, horizontal_bump, plateau_1d};
use pelab::{Grid3, HField, SField};

use crate::config::{ConfigError, Scenario, ScenarioConfig};
use crate::report::Outcome;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Library(pelab::Error),
    Io(std::io::Error),
}

impl RunError {
    /// 2 for bad input, 3 for a numerical guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Library(e) if e.is_numerical_guard() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Library(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "writing outputs: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<pelab::Error> for RunError {
    fn from(e: pelab::Error) -> Self {
        RunError::Library(e)
    }
}

type Res<T> = Result<T, RunError>;

pub fn run(cfg: &ScenarioConfig) -> Res<Outcome> {
    match cfg.scenario {
        Scenario::CommutatorSweep => commutator(cfg),
        Scenario::PressureSolve => pressure(cfg),
        Scenario::EnergyBudget => energy(cfg),
        Scenario::BoundarySweep => boundary(cfg),
        Scenario::CornerNorms => corners(cfg),
        Scenario::ViscositySweep => viscosity(cfg),
        Scenario::HolderEstimate => holder(cfg),
        Scenario::ExtensionCheck => extension(cfg),
    }
}

/// Runs the scenario and writes its files; returns the process exit code.
pub fn run_and_write(cfg: &ScenarioConfig) -> Res<(Outcome, i32)> {
    let out = run(cfg)?;
    out.write(cfg, &cfg.out_dir()).map_err(RunError::Io)?;
    let code = if out.passed() { 0 } else { 1 };
    Ok((out, code))
}

fn slope(f: &ScalingFit) -> f64 {
    if f.degenerate {
        f64::NAN
    } else {
        f.slope
    }
}

fn weierstrass(cfg: &ScenarioConfig, octaves: u32, balanced: bool, g: &Grid3) -> Res<HField> {
    let mut spec =
        SyntheticSpec::new(cfg.f64("alpha")?, cfg.f64("beta")?, octaves).seed(cfg.u64("seed")?);
    if balanced {
        spec = spec.column_balanced();
    }
    Ok(make_weierstrass(&spec, g)?)
}

fn predicted_lines(out: &mut Outcome, p: &Predicted, beta: f64) {
    out.measure("regime", format!("{:?}", p.regime));
    out.predict("e1", p.e1, "horizontal commutator: min(3a-1, a+2b-1)");
    out.predict("e2", p.e2, "vertical commutator: 2 min(a,b) + max(a,b) - 2");
    out.predict("ew", p.ew, "vertical velocity deficit: a - 1");
    out.predict("edz", beta - 1.0, "sup of dz(psi u^eps): b - 1");
}

fn commutator(cfg: &ScenarioConfig) -> Res<Outcome> {
    let smooth = cfg.choice("field", &["weierstrass", "smooth"])? == "smooth";
    let g = Grid3::channel(cfg.usize("nx")?, cfg.usize("ny")?, cfg.usize("nz")?)?;
    let (alpha, beta) = (cfg.f64("alpha")?, cfg.f64("beta")?);
    let octaves = if smooth { 1 } else { cfg.usize("K")? as u32 };
    let mut spec = SyntheticSpec::new(alpha, beta, octaves)
        .seed(cfg.u64("seed")?)
        .column_balanced();
    spec.lambda = cfg.f64("lambda")?;
    let u = make_weierstrass(&spec, &g)?;
    let w = reconstruct_w(&u)?;
    let psi = horizontal_bump(&g);
    let m = Mollifier::new(1.0).domain_scaled().periodic_z();
    let eps = dyadic(cfg.f64("eps_start")?, cfg.usize("eps_count")?);
    let exps = if smooth { None } else { Some((alpha, beta)) };
    let rep = commutator_sweep(&u, Some(&w), &m, &eps, cfg.f64("chi")?, &psi, exps)?;
    let mut out = Outcome::default();
    let fit_w = rep.fit_w.as_ref().map_or(f64::NAN, slope);
    let fit_t2 = rep.fit_t2.as_ref().map_or(f64::NAN, slope);
    out.measure("slope_horizontal", slope(&rep.fit_t1));
    out.measure("slope_vertical", fit_t2);
    out.measure("slope_w_deficit", fit_w);
    out.measure("slope_dz_psi_u", slope(&rep.fit_dz));
    if let Some(p) = &rep.predicted {
        predicted_lines(&mut out, p, beta);
        out.at_least(
            "horizontal_slope",
            slope(&rep.fit_t1),
            p.e1 - cfg.f64("tol_horizontal")?,
        );
        out.at_least("vertical_slope", fit_t2, p.e2 - cfg.f64("tol_vertical")?);
        out.at_least("w_deficit_slope", fit_w, p.ew - cfg.f64("tol_w")?);
        out.at_least(
            "dz_psi_u_slope",
            slope(&rep.fit_dz),
            beta - 1.0 - cfg.f64("tol_dz")?,
        );
    } else {
        out.predict(
            "ew",
            2.0,
            "vertical velocity deficit of a smooth field: even kernel, second order",
        );
        out.at_least("w_deficit_slope", fit_w, cfg.f64("smooth_w_min")?);
    }
    out.csv("commutator.csv", rep.to_csv());
    Ok(out)
}

fn pressure(cfg: &ScenarioConfig) -> Res<Outcome> {
    let field = cfg.choice("field", &["taylor-green", "weierstrass"])?;
    let (nx, ny, nz) = (cfg.usize("nx")?, cfg.usize("ny")?, cfg.usize("nz")?);
    let octaves = cfg.usize("K")? as u32;
    let build = |g: &Grid3| -> Res<HField> {
        if field == "taylor-green" {
            Ok(taylor_green(g)?)
        } else {
            weierstrass(cfg, octaves, false, g)
        }
    };
    let g = Grid3::channel(nx, ny, nz)?;
    let u = build(&g)?;
    let p = pressure_solve(&u)?;
    let mut out = Outcome::default();
    out.measure("mean", p.mean());
    out.measure("max_abs", p.max_abs());
    if field == "taylor-green" {
        let err = (0..g.n_columns())
            .map(|c| {
                let (x, y) = g.column_xy(c);
                (p.at_column(c) - ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0).abs()
            })
            .fold(0.0, f64::max);
        out.measure("oracle_error", err);
        out.at_most("matches_closed_form", err, cfg.f64("tol_oracle")?);
    }
    let c = cfg.f64("scale")?;
    let pc = pressure_solve(&u.scaled(c))?;
    let hom = pc
        .values
        .iter()
        .zip(&p.values)
        .map(|(a, b)| (a - c * c * b).abs())
        .fold(0.0, f64::max)
        / (c * c * p.max_abs()).max(f64::MIN_POSITIVE);
    out.measure("homogeneity_defect", hom);
    out.at_most("quadratic_homogeneity", hom, cfg.f64("tol_homogeneity")?);
    let ps = p.to_sfield();
    let nzp = g.nzp();
    let flat = ps
        .values
        .chunks(nzp)
        .all(|col| col.iter().all(|v| *v == col[0]));
    out.rule("z_independent", "every column constant".into(), flat);
    let levels = cfg.usize("levels")?;
    let mut fields = Vec::new();
    for l in (0..levels).rev() {
        let gl = Grid3::channel((nx >> l).max(1), (ny >> l).max(1), (nz >> l).max(1))?;
        fields.push(build(&gl)?);
    }
    let rows = pressure_regularity_report(&fields, cfg.f64("alpha")?, cfg.f64("beta")?)?;
    out.csv("pressure_regularity.csv", regularity_csv(&rows));
    out.blobs
        .push(("pressure.fld".into(), pelab::io::encode(&ps)));
    Ok(out)
}

fn energy(cfg: &ScenarioConfig) -> Res<Outcome> {
    let mut out = Outcome::default();
    let gt = Grid3::channel(
        cfg.usize("tg_nx")?,
        cfg.usize("tg_nx")?,
        cfg.usize("tg_nz")?,
    )?;
    let s = Snapshot::hydrostatic(taylor_green(&gt)?)?;
    let psi = central_bump(&gt);
    let snaps = [s.clone(), s.clone(), s.clone()];
    let led = EnergyLedger::from_snapshots(&snaps, &[0.0, 0.5, 1.0], &psi, 1.0)?;
    let scale = flux_terms(&s, &psi)?.scale;
    let res = led.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    out.measure("steady_residual", res);
    out.measure("flux_scale", scale);
    out.at_most("steady_residual", res, cfg.f64("tol_residual")? * scale);
    out.csv("energy_ledger.csv", led.to_csv());

    let (nx, nz) = (cfg.usize("nx")?, cfg.usize("nz")?);
    let octaves = cfg.usize("K")? as u32;
    let m = Mollifier::new(cfg.f64("eps")?).domain_scaled().periodic_z();
    let mut csv = String::from("nx,nz,left,rhs1,rhs2,relDefect\n");
    let mut rel = Vec::new();
    for (gx, gz) in [(nx, nz), (2 * nx, 2 * nz)] {
        let g = Grid3::channel(gx, gx, gz)?;
        let snap = Snapshot::hydrostatic(weierstrass(cfg, octaves, true, &g)?)?;
        let b = mollified_balance(&snap, &m, &horizontal_bump(&g), 1.0)?;
        csv.push_str(&format!(
            "{gx},{gz},{},{},{},{}\n",
            b.left,
            b.rhs1,
            b.rhs2,
            b.relative_defect()
        ));
        rel.push(b.relative_defect());
    }
    out.measure("balance_defect_coarse", rel[0]);
    out.measure("balance_defect_fine", rel[1]);
    let tol = cfg.f64("tol_balance")?;
    out.at_most("balance_defect_coarse", rel[0], tol);
    out.at_most("balance_defect_fine", rel[1], tol);
    out.at_most(
        "balance_refinement_ratio",
        rel[1] / rel[0],
        cfg.f64("max_refinement_ratio")?,
    );
    out.csv("balance.csv", csv);
    Ok(out)
}

fn flow_named(name: &str, exponent: f64) -> Box<dyn Flow> {
    match name {
        "holder-wall" => Box::new(HolderWallFlow::default()),
        "radial-leak" => Box::new(RadialLeak),
        "swirl" => Box::new(Swirl),
        "interior-vortex" => Box::new(InteriorVortex),
        "bounded" => Box::new(CornerSingular { exponent: 0.0 }),
        _ => Box::new(CornerSingular { exponent }),
    }
}

fn geometry_rules(out: &mut Outcome, cfg: &ScenarioConfig, etas: &[f64]) -> Res<()> {
    for &e in etas {
        let sc = SmoothedCylinder::new(e)?;
        let ends = (sc.tau(0.0) - e).abs() + (sc.tau(e) - 2.0 * e).abs();
        let flat0 = sc.tau_slope(1e-4 * e).abs();
        let flat1 = sc.tau_inverse_slope(2.0 * e - 1e-4 * e).abs();
        out.rule(
            &format!("tau_profile_{e}"),
            format!("endpoint error {ends}, tau'(1e-4 eta) = {flat0}, (tau^-1)'(2 eta - 1e-4 eta) = {flat1}"),
            ends <= 1e-15 && flat0 <= 1e-6 && flat1 <= 1e-2,
        );
    }
    let _ = cfg;
    Ok(())
}

fn boundary(cfg: &ScenarioConfig) -> Res<Outcome> {
    let name = cfg.choice(
        "flow",
        &["holder-wall", "radial-leak", "swirl", "interior-vortex"],
    )?;
    let flow = flow_named(name, 0.0);
    let etas = cfg.list("eta_list")?;
    let samples = cylinder_samples(cfg.usize("samples")?);
    let mut out = Outcome::default();
    geometry_rules(&mut out, cfg, &etas)?;
    let mut rows = Vec::new();
    for &e in &etas {
        let sc = SmoothedCylinder::new(e)?;
        rows.push(BoundaryRow {
            eta: e,
            flux: boundary_flux(flow.as_ref(), e)?,
            corner: corner_strip_norms(flow.as_ref(), e)?,
            psi_grad_sup: psi_gradient_sup(&sc, &samples),
        });
    }
    let (gmin, gmax) = (cfg.f64("grad_min")?, cfg.f64("grad_max")?);
    let tol_m = cfg.f64("tol_measure")?;
    for r in &rows {
        out.rule(
            &format!("psi_gradient_{}", r.eta),
            format!("eta sup|grad psi| = {} in [{gmin}, {gmax}]", r.psi_grad_sup),
            r.psi_grad_sup >= gmin && r.psi_grad_sup <= gmax,
        );
        let dev = (r.corner.measure_ratio() / (PI * PI) - 1.0).abs();
        out.rule(
            &format!("strip_measure_{}", r.eta),
            format!(
                "|Gamma|/eta^2 = {}, relative deviation from pi^2 {dev} <= {tol_m}",
                r.corner.measure_ratio()
            ),
            dev <= tol_m,
        );
    }
    let zero = cfg.f64("zero_tol")?;
    let side = ScalingFit::with_floor(rows.iter().map(|r| (r.eta, r.flux.side)).collect(), zero)?;
    let vert = ScalingFit::with_floor(
        rows.iter().map(|r| (r.eta, r.flux.vertical)).collect(),
        zero,
    )?;
    let bound = 2.0 / 3.0 - cfg.f64("tol_flux")?;
    let vanishes = |f: &ScalingFit, vals: Vec<f64>| {
        if f.degenerate {
            vals.iter().all(|v| *v <= zero)
        } else {
            f.slope >= bound
        }
    };
    let decays = vanishes(&side, rows.iter().map(|r| r.flux.side).collect())
        && vanishes(&vert, rows.iter().map(|r| r.flux.vertical).collect());
    out.predict(
        "flux_slope",
        2.0 / 3.0,
        "flux density of a Hölder-2/3 wall-vanishing field",
    );
    out.measure("side_flux_slope", slope(&side));
    out.measure("vertical_flux_slope", slope(&vert));
    out.measure("decay_condition", if decays { "holds" } else { "violated" });
    let expect = name != "radial-leak";
    out.rule(
        "decay_verdict",
        format!("flux slopes >= {bound} (or identically zero): {decays}, expected {expect}"),
        decays == expect,
    );
    if name == "holder-wall" {
        out.at_least("side_flux_slope", slope(&side), bound);
        out.at_least("vertical_flux_slope", slope(&vert), bound);
    }
    out.csv("boundary.csv", boundary_csv(&rows));

    if cfg.bool("budget")? {
        let window = (cfg.f64("t_start")?, cfg.f64("t_end")?);
        match check_slip(flow.as_ref(), window.0) {
            Err(pelab::Error::SlipViolation { magnitude, point }) => {
                out.measure(
                    "slip",
                    format!("violated, |U.N| = {magnitude} at {point:?}"),
                );
                out.rule(
                    "slip_detected",
                    "boundary term needs U.N = 0".into(),
                    !expect,
                );
            }
            Err(e) => return Err(e.into()),
            Ok(()) => {
                let sweep = global_budget_limit(flow.as_ref(), &etas, window)?;
                let mut csv = String::from("eta,boundaryTerm\n");
                for (e, v) in &sweep.values {
                    csv.push_str(&format!("{e},{v}\n"));
                }
                out.csv("budget.csv", csv);
                if name == "holder-wall" {
                    let s = sweep.fit.as_ref().map_or(f64::NAN, slope);
                    out.measure("budget_slope", s);
                    out.at_least("budget_slope", s, 2.0 / 3.0 - cfg.f64("tol_budget")?);
                } else {
                    let worst = sweep.values.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
                    out.measure("budget_max_abs", worst);
                    out.at_most("budget_vanishes", worst, zero);
                }
            }
        }
    }
    Ok(out)
}

fn corners(cfg: &ScenarioConfig) -> Res<Outcome> {
    let name = cfg.choice("flow", &["holder-wall", "bounded", "corner-singular"])?;
    let exponent = cfg.f64("exponent")?;
    let flow = flow_named(name, exponent);
    let etas = cfg.list("eta_list")?;
    let sweep = corner_sweep(flow.as_ref(), &etas)?;
    let mut out = Outcome::default();
    out.predict("mu1", 4.0 / 3.0, "bounded pressure: |Gamma|^(2/3)");
    let mu2 = if name == "corner-singular" {
        2.0 / 3.0 - exponent
    } else {
        2.0 / 3.0
    };
    out.predict("mu2", mu2, "|Gamma|^(1/3) times the corner growth of U");
    out.measure("mu1", slope(&sweep.mu1));
    out.measure("mu2", slope(&sweep.mu2));
    let ok = sweep.satisfied();
    out.measure(
        "corner_condition",
        if ok { "satisfied" } else { "violated" },
    );
    let expect = match cfg.choice("expect", &["auto", "satisfied", "violated"])? {
        "auto" => mu2 > 1.0 / 3.0,
        v => v == "satisfied",
    };
    out.rule(
        "corner_verdict",
        format!("mu1 + mu2 > 1 and mu2 > 1/3: {ok}, expected {expect}"),
        ok == expect,
    );
    let mut csv = String::from("eta,pNorm,UNorm,stripMeasure,measureRatio\n");
    for r in &sweep.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.eta,
            r.p_norm,
            r.u_norm,
            r.measure,
            r.measure_ratio()
        ));
    }
    out.csv("corner.csv", csv);
    Ok(out)
}

fn viscosity(cfg: &ScenarioConfig) -> Res<Outcome> {
    let initial = InitialField::parse(cfg.choice("initial", &["zero", "eigenmode", "smooth"])?)
        .expect("checked");
    let base = ViscRunConfig {
        nu: 0.0,
        nx: cfg.usize("nx")?,
        nz: cfg.usize("nz")?,
        dt: cfg.f64("dt")?,
        t_end: cfg.f64("t_end")?,
        initial,
        seed: cfg.u64("seed")?,
        advection: cfg.bool("advection")?,
        snapshot_every: cfg.usize("snapshot_every")?,
    };
    let nus = cfg.list("nu_list")?;
    let sweep = viscosity_sweep(&base, &nus)?;
    let mut out = Outcome::default();
    let tol = cfg.f64("tol_closure")?;
    for r in &sweep.rows {
        out.at_most(
            &format!("budget_closure_nu_{}", r.nu),
            r.max_defect,
            tol * r.initial_energy,
        );
    }
    let all_zero = sweep.rows.iter().all(|r| r.dissipation == 0.0);
    out.rule(
        "dissipation_monotone",
        format!(
            "dissipation decreasing along nu (or all zero): {}",
            sweep.monotone() || all_zero
        ),
        sweep.monotone() || all_zero,
    );
    if let Some(t) = &sweep.trend {
        out.measure("dissipation_nu_slope", t.slope);
    }
    out.csv("viscosity.csv", sweep.to_csv());
    let margin = cfg.f64("margin")?;
    let window = ZWindow {
        z_min: margin,
        z_max: 1.0 - margin,
    };
    let (a, b) = (cfg.f64("alpha")?, cfg.f64("beta")?);
    let mut reg = String::from("nu,aggregate\n");
    for (i, run) in sweep.runs.iter().enumerate() {
        out.csv(&format!("ledger_{i}.csv"), run.ledger.to_csv());
        out.blobs
            .push((format!("final_{i}.fld"), pelab::io::encode(&run.state.u)));
        if run.snapshots.len() >= 2 {
            let series = regularity_monitor(&run.snapshots, a, b, window)?;
            reg.push_str(&format!("{},{}\n", sweep.rows[i].nu, series.aggregate));
        }
    }
    out.csv("regularity.csv", reg);
    Ok(out)
}

fn holder(cfg: &ScenarioConfig) -> Res<Outcome> {
    let g = Grid3::channel(cfg.usize("nx")?, cfg.usize("ny")?, cfg.usize("nz")?)?;
    let u = weierstrass(cfg, cfg.usize("K")? as u32, false, &g)?;
    let rep = estimate_exponents(&u)?;
    let (a, b) = (cfg.f64("alpha")?, cfg.f64("beta")?);
    let tol = cfg.f64("tol")?;
    let mut out = Outcome::default();
    out.predict("alpha", a, "horizontal exponent of the synthetic field");
    out.predict("beta", b, "vertical exponent of the synthetic field");
    out.measure("alpha_hat", rep.alpha_hat);
    out.measure("beta_hat", rep.beta_hat);
    out.at_most("alpha_recovery", (rep.alpha_hat - a).abs(), tol);
    out.at_most("beta_recovery", (rep.beta_hat - b).abs(), tol);
    out.note("max-increment slopes of a truncated lacunary sum are biased low; the bias shrinks slowly with K");
    out.csv("holder.csv", rep.to_csv());
    Ok(out)
}

fn extension(cfg: &ScenarioConfig) -> Res<Outcome> {
    let g = Grid3::channel(cfg.usize("nx")?, cfg.usize("ny")?, cfg.usize("nz")?)?;
    let b = cfg.list("box")?;
    if b.len() != 6 {
        return Err(ConfigError {
            key: "box".into(),
            message: "needs xlo,xhi,ylo,yhi,zlo,zhi".into(),
        }
        .into());
    }
    let q3 = Aabb {
        lo: [b[0], b[2], b[4]],
        hi: [b[1], b[3], b[5]],
    };
    let c = CutoffExtension::new(q3, cfg.f64("eta")?);
    let m = Mollifier::new(cfg.f64("eps")?);
    let h = HField::from_fn(&g, |x, y, z| {
        [
            x.sin() * y.cos() + 0.3 * (2.0 * PI * z).cos(),
            -x.cos() * y.sin() + 0.2 * (x + 2.0 * PI * z).sin(),
        ]
    });
    let psi = SField::from_fn(&g, |x, y, z| {
        let p = [x, y, z];
        (0..3)
            .map(|a| {
                let r = 0.25 * (q3.hi[a] - q3.lo[a]);
                plateau_1d(p[a], q3.lo[a] + r, q3.hi[a] - r, r)
            })
            .product()
    });
    let which = cfg.choice("nonlinearity", &["all", "square", "product", "cube"])?;
    let list = [
        ("square", Nonlinearity::Square),
        ("product", Nonlinearity::Product),
        ("cube", Nonlinearity::Cube),
    ];
    let tol = cfg.f64("tol")?;
    let mut out = Outcome::default();
    let mut csv = String::from("nonlinearity,pointwise,mollified\n");
    for (n, f) in list
        .into_iter()
        .filter(|(n, _)| which == "all" || which == *n)
    {
        let d = extension_defect(&h, f, &psi, &c, &m)?;
        csv.push_str(&format!("{n},{},{}\n", d.pointwise, d.mollified));
        out.at_most(&format!("extension_{n}"), d.max(), tol);
    }
    out.csv("extension.csv", csv);
    Ok(out)
}
