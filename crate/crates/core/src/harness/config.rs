//! JSON experiment configuration. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineConfig;
use crate::error::{Error, Result};
use crate::polycd::SolveConfig;
use crate::problems::{KdeSpec, LassoSpec, LogisticSpec, QuadraticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Lasso,
    Logistic,
    Kde,
    CustomSimplexQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Polycd,
    Polycdwa,
    Fw,
    Afw,
    Fista,
    Twocd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Polycd => "polycd",
            Method::Polycdwa => "polycdwa",
            Method::Fw => "fw",
            Method::Afw => "afw",
            Method::Fista => "fista",
            Method::Twocd => "twocd",
        }
    }

    pub fn is_coordinate(self) -> bool {
        matches!(self, Method::Polycd | Method::Polycdwa)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidConfig(format!("unknown solver {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub method: Method,
    /// Name used in output files; defaults to the method name.
    #[serde(default)]
    pub label: Option<String>,
    /// For the two coordinate methods.
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    /// For the baselines.
    #[serde(default)]
    pub baseline: Option<BaselineConfig>,
}

impl SolverSpec {
    pub fn new(method: Method) -> Self {
        SolverSpec { method, label: None, solve: None, baseline: None }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.name().to_string())
    }

    fn validate(&self) -> Result<()> {
        if self.method.is_coordinate() && self.baseline.is_some() {
            return Err(Error::InvalidConfig(format!("{} takes a \"solve\" block", self.method.name())));
        }
        if !self.method.is_coordinate() && self.solve.is_some() {
            return Err(Error::InvalidConfig(format!("{} takes a \"baseline\" block", self.method.name())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    #[serde(default)]
    pub lasso: Option<LassoSpec>,
    #[serde(default)]
    pub logistic: Option<LogisticSpec>,
    #[serde(default)]
    pub kde: Option<KdeSpec>,
    #[serde(default)]
    pub quadratic: Option<QuadraticSpec>,
    /// ℓ1 radius override for the regression presets (default ‖x*‖₁).
    #[serde(default)]
    pub radius: Option<f64>,
    /// Smoothness override; estimated when absent.
    #[serde(default)]
    pub smoothness: Option<f64>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Per-repetition data seeds; defaults to the spec seed plus the
    /// repetition index.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_repetitions() -> usize {
    5
}

impl ExperimentConfig {
    pub fn new(preset: Preset, solvers: Vec<SolverSpec>) -> Self {
        ExperimentConfig {
            preset,
            lasso: None,
            logistic: None,
            kde: None,
            quadratic: None,
            radius: None,
            smoothness: None,
            solvers,
            output_dir: default_output_dir(),
            repetitions: default_repetitions(),
            seeds: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig("at least one solver is required".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.repetitions {
                return Err(Error::InvalidConfig(format!(
                    "{} seeds given for {} repetitions",
                    seeds.len(),
                    self.repetitions
                )));
            }
        }
        let mut labels: Vec<String> = self.solvers.iter().map(SolverSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("solver labels must be unique".into()));
        }
        for s in &self.solvers {
            s.validate()?;
        }
        Ok(())
    }

    pub fn seed_for(&self, rep: usize) -> u64 {
        if let Some(seeds) = &self.seeds {
            return seeds[rep];
        }
        let base = match self.preset {
            Preset::Lasso => self.lasso.as_ref().map_or(0, |s| s.seed),
            Preset::Logistic => self.logistic.as_ref().map_or(0, |s| s.seed),
            Preset::Kde => self.kde.as_ref().map_or(0, |s| s.seed),
            Preset::CustomSimplexQuadratic => self.quadratic.as_ref().map_or(0, |s| s.seed),
        };
        base.wrapping_add(rep as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"preset": "lasso", "solvers": [{"method": "fw"}], "bogus": 1}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{"preset": "lasso", "solvers": [{"method": "fw", "baseline": {"max_iters": 3}}]}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{
            "preset": "lasso",
            "lasso": {"n": 50, "d": 40, "r": 4, "snr": 1.0, "rho": 0.1, "seed": 3},
            "solvers": [
                {"method": "polycdwa", "solve": {"step_rule": "line-search", "max_outer": 20}},
                {"method": "fista", "baseline": {"max_iter": 100}}
            ],
            "repetitions": 2
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.solvers[0].solve.as_ref().unwrap().max_outer, 20);
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.seed_for(1), 4);
    }

    #[test]
    fn misplaced_block_is_rejected() {
        let text = r#"{"preset": "lasso", "solvers": [{"method": "fw", "solve": {}}]}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("twocd".parse::<Method>().unwrap(), Method::Twocd);
        assert!("simplex".parse::<Method>().is_err());
    }
}
