//! Scenario results and the files written for them.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::ScenarioConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// Everything a scenario produces. Insertion order is output order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    /// `(name, value, meaning)`.
    pub predicted: Vec<(String, f64, String)>,
    pub measured: Vec<(String, String)>,
    pub rules: Vec<Rule>,
    pub csvs: Vec<(String, String)>,
    pub blobs: Vec<(String, Vec<u8>)>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn predict(&mut self, name: &str, value: f64, meaning: &str) {
        self.predicted.push((name.into(), value, meaning.into()));
    }

    pub fn measure(&mut self, name: &str, value: impl ToString) {
        self.measured.push((name.into(), value.to_string()));
    }

    /// `value >= bound`; NaN fails.
    pub fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.rule(name, format!("{value} >= {bound}"), value >= bound);
    }

    /// `value <= bound`; NaN fails.
    pub fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.rule(name, format!("{value} <= {bound}"), value <= bound);
    }

    pub fn rule(&mut self, name: &str, detail: String, pass: bool) {
        self.rules.push(Rule {
            name: name.into(),
            detail,
            pass,
        });
    }

    pub fn csv(&mut self, name: &str, body: String) {
        self.csvs.push((name.into(), body));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.rules.iter().all(|r| r.pass)
    }

    pub fn report_text(&self, cfg: &ScenarioConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", cfg.scenario);
        let _ = writeln!(s, "\nparameters:");
        for (k, v) in cfg.entries() {
            let _ = writeln!(s, "  {k} = {v}");
        }
        if !self.predicted.is_empty() {
            let _ = writeln!(s, "\npredicted:");
            for (k, v, m) in &self.predicted {
                let _ = writeln!(s, "  {k} = {v}  ({m})");
            }
        }
        if !self.measured.is_empty() {
            let _ = writeln!(s, "\nmeasured:");
            for (k, v) in &self.measured {
                let _ = writeln!(s, "  {k} = {v}");
            }
        }
        let _ = writeln!(s, "\nrules:");
        for r in &self.rules {
            let _ = writeln!(
                s,
                "  [{}] {}: {}",
                if r.pass { "pass" } else { "FAIL" },
                r.name,
                r.detail
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "\nnote: {n}");
        }
        let _ = writeln!(
            s,
            "\nresult: {}",
            if self.passed() { "pass" } else { "fail" }
        );
        s
    }

    pub fn summary_text(&self, cfg: &ScenarioConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario={}", cfg.scenario);
        for (k, v, _) in &self.predicted {
            let _ = writeln!(s, "predicted.{k}={v}");
        }
        for (k, v) in &self.measured {
            let _ = writeln!(s, "measured.{k}={v}");
        }
        for r in &self.rules {
            let _ = writeln!(
                s,
                "rule.{}={}",
                r.name,
                if r.pass { "pass" } else { "fail" }
            );
        }
        let _ = writeln!(s, "pass={}", self.passed());
        s
    }

    pub fn write(&self, cfg: &ScenarioConfig, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.txt"), self.report_text(cfg))?;
        std::fs::write(dir.join("summary.txt"), self.summary_text(cfg))?;
        std::fs::write(dir.join("config.txt"), cfg.to_text())?;
        for (name, body) in &self.csvs {
            std::fs::write(dir.join(name), body)?;
        }
        for (name, bytes) in &self.blobs {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;

    #[test]
    fn nan_fails_both_directions() {
        let mut o = Outcome::default();
        o.at_least("a", f64::NAN, 0.0);
        o.at_most("b", f64::NAN, 0.0);
        assert!(o.rules.iter().all(|r| !r.pass));
    }

    #[test]
    fn summary_lines() {
        let mut o = Outcome::default();
        o.predict("e1", 1.1, "horizontal");
        o.at_least("t1", 1.4, 0.95);
        let s = o.summary_text(&ScenarioConfig::new(Scenario::CommutatorSweep));
        assert!(s.contains("predicted.e1=1.1\n"));
        assert!(s.contains("rule.t1=pass\n"));
        assert!(s.ends_with("pass=true\n"));
    }
}
