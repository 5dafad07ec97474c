//! Flat `key = value` scenario configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    CommutatorSweep,
    PressureSolve,
    EnergyBudget,
    BoundarySweep,
    CornerNorms,
    ViscositySweep,
    HolderEstimate,
    ExtensionCheck,
}

pub const ALL: [Scenario; 8] = [
    Scenario::CommutatorSweep,
    Scenario::PressureSolve,
    Scenario::EnergyBudget,
    Scenario::BoundarySweep,
    Scenario::CornerNorms,
    Scenario::ViscositySweep,
    Scenario::HolderEstimate,
    Scenario::ExtensionCheck,
];

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::CommutatorSweep => "commutator-sweep",
            Scenario::PressureSolve => "pressure-solve",
            Scenario::EnergyBudget => "energy-budget",
            Scenario::BoundarySweep => "boundary-sweep",
            Scenario::CornerNorms => "corner-norms",
            Scenario::ViscositySweep => "viscosity-sweep",
            Scenario::HolderEstimate => "holder-estimate",
            Scenario::ExtensionCheck => "extension-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ALL.into_iter().find(|sc| sc.name() == s)
    }

    /// Complete default parameter set; every accepted key appears here.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Scenario::CommutatorSweep => &[
                ("field", "weierstrass"),
                ("alpha", "0.7"),
                ("beta", "0.7"),
                ("K", "6"),
                ("lambda", "2"),
                ("seed", "7"),
                ("nx", "256"),
                ("ny", "256"),
                ("nz", "128"),
                ("eps_start", "0.25"),
                ("eps_count", "5"),
                ("chi", "1"),
                ("tol_horizontal", "0.15"),
                ("tol_vertical", "0.15"),
                ("tol_w", "0.15"),
                ("tol_dz", "0.1"),
                ("smooth_w_min", "1.8"),
                ("out", "out/commutator-sweep"),
            ],
            Scenario::PressureSolve => &[
                ("field", "taylor-green"),
                ("alpha", "0.7"),
                ("beta", "0.7"),
                ("K", "4"),
                ("seed", "1"),
                ("nx", "64"),
                ("ny", "64"),
                ("nz", "32"),
                ("levels", "3"),
                ("scale", "2.5"),
                ("tol_oracle", "1e-8"),
                ("tol_homogeneity", "1e-12"),
                ("out", "out/pressure-solve"),
            ],
            Scenario::EnergyBudget => &[
                ("alpha", "0.7"),
                ("beta", "0.7"),
                ("K", "4"),
                ("seed", "1"),
                ("nx", "64"),
                ("nz", "32"),
                ("eps", "0.125"),
                ("tg_nx", "32"),
                ("tg_nz", "32"),
                ("tol_residual", "1e-8"),
                ("tol_balance", "5e-3"),
                ("max_refinement_ratio", "0.5"),
                ("out", "out/energy-budget"),
            ],
            Scenario::BoundarySweep => &[
                ("flow", "holder-wall"),
                ("eta_list", "0.0625,0.03125,0.015625,0.0078125"),
                ("samples", "100000"),
                ("budget", "true"),
                ("t_start", "0"),
                ("t_end", "1"),
                ("tol_flux", "0.1"),
                ("tol_budget", "0.15"),
                ("grad_min", "7"),
                ("grad_max", "10"),
                ("tol_measure", "0.1"),
                ("zero_tol", "1e-12"),
                ("out", "out/boundary-sweep"),
            ],
            Scenario::CornerNorms => &[
                ("flow", "holder-wall"),
                ("exponent", "0.6"),
                ("eta_list", "0.0625,0.03125,0.015625,0.0078125"),
                ("expect", "auto"),
                ("out", "out/corner-norms"),
            ],
            Scenario::ViscositySweep => &[
                ("nu_list", "0.2,0.1,0.05,0.025"),
                ("nx", "32"),
                ("nz", "64"),
                ("dt", "2.5e-4"),
                ("t_end", "0.5"),
                ("initial", "smooth"),
                ("seed", "1"),
                ("advection", "true"),
                ("alpha", "0.7"),
                ("beta", "0.7"),
                ("snapshot_every", "200"),
                ("margin", "0.25"),
                ("tol_closure", "1e-4"),
                ("out", "out/viscosity-sweep"),
            ],
            Scenario::HolderEstimate => &[
                ("alpha", "0.7"),
                ("beta", "0.5"),
                ("K", "6"),
                ("seed", "1"),
                ("nx", "128"),
                ("ny", "128"),
                ("nz", "128"),
                ("tol", "0.1"),
                ("out", "out/holder-estimate"),
            ],
            Scenario::ExtensionCheck => &[
                ("nx", "192"),
                ("ny", "192"),
                ("nz", "64"),
                ("eps", "0.07"),
                ("eta", "0.15"),
                ("box", "2.6,3.6,2.6,3.6,0.46,0.54"),
                ("nonlinearity", "all"),
                ("tol", "1e-10"),
                ("out", "out/extension-check"),
            ],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key '{}': {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(line, format!("line {} is not 'key = value'", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    params: BTreeMap<String, String>,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        let params = scenario
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        ScenarioConfig { scenario, params }
    }

    /// Scenario from the argument or the file's `scenario` key, then file
    /// values, then `key=value` overrides.
    pub fn load(
        scenario: Option<&str>,
        file: Option<&Path>,
        overrides: &[String],
    ) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        if let Some(p) = file {
            let text = std::fs::read_to_string(p)
                .map_err(|e| err("config", format!("{}: {e}", p.display())))?;
            pairs = parse_pairs(&text)?;
        }
        let from_file = pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .map(|(_, v)| v.clone());
        let name = scenario
            .map(str::to_string)
            .or(from_file)
            .ok_or_else(|| err("scenario", "no scenario given"))?;
        let sc = Scenario::parse(&name)
            .ok_or_else(|| err("scenario", format!("unknown scenario '{name}'")))?;
        let mut cfg = ScenarioConfig::new(sc);
        for (k, v) in pairs.into_iter().filter(|(k, _)| k != "scenario") {
            cfg.set(&k, &v)?;
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| err(o, "override must be key=value"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match self.params.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(err(
                key,
                format!("unknown key for scenario {}", self.scenario),
            )),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn str(&self, key: &str) -> &str {
        self.params
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("no default for '{key}'"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.str(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err(key, format!("'{v}' is not a finite number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.str(key);
        v.parse()
            .map_err(|_| err(key, format!("'{v}' is not a non-negative integer")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.str(key);
        v.parse()
            .map_err(|_| err(key, format!("'{v}' is not a non-negative integer")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.str(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(err(key, format!("'{v}' is not a boolean"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.str(key);
        v.split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| err(key, format!("'{v}' is not a comma-separated number list")))
    }

    pub fn choice<'a>(&'a self, key: &str, allowed: &[&str]) -> Result<&'a str, ConfigError> {
        let v = self.str(key);
        if allowed.contains(&v) {
            Ok(v)
        } else {
            Err(err(
                key,
                format!("'{v}' is not one of {}", allowed.join(", ")),
            ))
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.str("out"))
    }

    /// Config text that reproduces this run.
    pub fn to_text(&self) -> String {
        let mut s = format!("scenario = {}\n", self.scenario);
        for (k, v) in &self.params {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        std::fs::write(
            &p,
            "# sweep\nscenario = commutator-sweep\nalpha = 0.9 # rough\nbeta=0.6\n",
        )
        .unwrap();
        let c = ScenarioConfig::load(None, Some(&p), &["beta=0.65".into()]).unwrap();
        assert_eq!(c.scenario, Scenario::CommutatorSweep);
        assert_eq!(c.f64("alpha").unwrap(), 0.9);
        assert_eq!(c.f64("beta").unwrap(), 0.65);
        assert_eq!(c.usize("K").unwrap(), 6);
    }

    #[test]
    fn unknown_key_is_named() {
        let e =
            ScenarioConfig::load(Some("pressure-solve"), None, &["gamma=1".into()]).unwrap_err();
        assert_eq!(e.key, "gamma");
    }

    #[test]
    fn unknown_scenario() {
        let e = ScenarioConfig::load(Some("prop21-check"), None, &[]).unwrap_err();
        assert_eq!(e.key, "scenario");
    }

    #[test]
    fn typed_getters_reject_garbage() {
        let mut c = ScenarioConfig::new(Scenario::BoundarySweep);
        c.set("eta_list", "0.1,x").unwrap();
        assert_eq!(c.list("eta_list").unwrap_err().key, "eta_list");
        c.set("budget", "maybe").unwrap();
        assert!(c.bool("budget").is_err());
    }

    #[test]
    fn round_trip_text() {
        let c = ScenarioConfig::new(Scenario::ViscositySweep);
        let pairs = parse_pairs(&c.to_text()).unwrap();
        assert_eq!(pairs.len(), Scenario::ViscositySweep.defaults().len() + 1);
    }
}
