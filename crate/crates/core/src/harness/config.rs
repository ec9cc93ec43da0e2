//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "oracle":     { "kind": "synthetic", "n": 10, "mup": [0.5, 1], "di": 2 },
//!   "pricing":    { "kind": ["uniform", "random"], "tcod": [0.5, 1, 1.5], "seed": 0 },
//!   "volumes":    { "kind": "uniform" },
//!   "strategies": [ { "kind": "optimal" }, { "kind": "a_tbyb" }, { "kind": "s_tbyb" } ],
//!   "grid":       { "lambda": [0.1], "repetitions": 50, "base_seed": 42 },
//!   "output":     { "dir": "results" }
//! }
//! ```
//!
//! Scalars are accepted wherever a list is. A table oracle reads
//! `{ "kind": "table", "path": "acc.csv", "catalog": "catalog.csv" }`, with
//! paths relative to the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::{PricingKind, VolumeGenerator};
use crate::strategies::{StrategyConfig, StrategyKind, DEFAULT_LAMBDA};
use crate::value::ValueFunction;
use crate::{MAX_CATALOG_N, MAX_EXHAUSTIVE_N, MAX_TABLE_N};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleConfig {
    Synthetic {
        #[serde(default = "default_n")]
        n: usize,
        mup: OneOrMany<f64>,
        di: OneOrMany<f64>,
    },
    Table {
        path: PathBuf,
        catalog: PathBuf,
    },
}

fn default_n() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingConfig {
    pub kind: OneOrMany<PricingKind>,
    pub tcod: OneOrMany<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shapley_samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolumesConfig {
    Uniform,
    Importance {
        sigma: f64,
    },
    /// Volumes from the table oracle's catalog file.
    Catalog,
}

impl VolumesConfig {
    pub fn generator(self) -> Option<VolumeGenerator> {
        match self {
            VolumesConfig::Uniform => Some(VolumeGenerator::Uniform),
            VolumesConfig::Importance { sigma } => Some(VolumeGenerator::Importance { sigma }),
            VolumesConfig::Catalog => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub kind: StrategyKind,
    /// Pins this strategy's risk parameter instead of sweeping `grid.lambda`.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub a_star: Option<f64>,
    #[serde(default)]
    pub query_budget: Option<u64>,
    /// Extra salt for the strategy's random stream.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub label: Option<String>,
}

impl StrategyEntry {
    pub fn new(kind: StrategyKind) -> Self {
        StrategyEntry {
            kind,
            lambda: None,
            a_star: None,
            query_budget: None,
            seed: 0,
            label: None,
        }
    }

    /// Name used in result files.
    pub fn label(&self) -> String {
        match (&self.label, self.lambda) {
            (Some(l), _) => l.clone(),
            (None, Some(lambda)) => format!("{}(lambda={lambda})", self.kind),
            (None, None) => self.kind.to_string(),
        }
    }

    pub fn config(&self, cell_lambda: f64, seed: u64) -> StrategyConfig {
        StrategyConfig {
            kind: self.kind,
            lambda: self.lambda.unwrap_or(cell_lambda),
            a_star_override: self.a_star,
            query_budget: self.query_budget,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_lambda")]
    pub lambda: OneOrMany<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_lambda() -> OneOrMany<f64> {
    OneOrMany::One(DEFAULT_LAMBDA)
}

fn default_repetitions() -> usize {
    50
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lambda: default_lambda(),
            repetitions: default_repetitions(),
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_experiment")]
    pub experiment: String,
    #[serde(default = "default_sequence")]
    pub sequence: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_experiment() -> String {
    "experiment.csv".into()
}
fn default_sequence() -> String {
    "sequence.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            experiment: default_experiment(),
            sequence: default_sequence(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub oracle: OracleConfig,
    #[serde(default)]
    pub value: ValueFunction,
    pub pricing: PricingConfig,
    #[serde(default)]
    pub volumes: Option<VolumesConfig>,
    pub strategies: Vec<StrategyEntry>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative paths are resolved against; set by [`Self::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text =
            std::str::from_utf8(&bytes).map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
        let mut cfg =
            ExperimentConfig::from_json(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, bytes))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn volumes(&self) -> VolumesConfig {
        self.volumes.unwrap_or(match self.oracle {
            OracleConfig::Synthetic { .. } => VolumesConfig::Uniform,
            OracleConfig::Table { .. } => VolumesConfig::Catalog,
        })
    }

    /// Checks everything that can be checked without reading data files,
    /// except the catalog size of a table oracle.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let OracleConfig::Synthetic { n, mup, di } = &self.oracle {
            if *n == 0 {
                return bad("oracle.n must be >= 1".into());
            }
            if *n > MAX_CATALOG_N {
                return Err(Error::SizeLimit {
                    what: "synthetic catalog",
                    n: *n,
                    limit: MAX_CATALOG_N,
                });
            }
            let (mup, di) = (mup.to_vec(), di.to_vec());
            if mup.is_empty() || di.is_empty() {
                return bad("oracle.mup and oracle.di must be non-empty".into());
            }
            if let Some(m) = mup.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
                return bad(format!("oracle.mup values must be > 0, got {m}"));
            }
            if let Some(d) = di.iter().find(|d| !(**d >= 1.0 && d.is_finite())) {
                return bad(format!("oracle.di values must be >= 1, got {d}"));
            }
            if self.volumes() == VolumesConfig::Catalog {
                return bad("volumes.kind = \"catalog\" needs a table oracle".into());
            }
            self.check_size(*n)?;
        }
        if let Some(VolumesConfig::Importance { sigma }) = self.volumes {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return bad(format!("volumes.sigma must be >= 0, got {sigma}"));
            }
            if matches!(self.oracle, OracleConfig::Table { .. }) {
                return bad("importance volumes need a synthetic oracle".into());
            }
        }
        self.value.validate().map_err(|e| Error::Config(e.to_string()))?;
        let kinds = self.pricing.kind.to_vec();
        let tcods = self.pricing.tcod.to_vec();
        if kinds.is_empty() || tcods.is_empty() {
            return bad("pricing.kind and pricing.tcod must be non-empty".into());
        }
        if let Some(t) = tcods.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return bad(format!("pricing.tcod values must be > 0, got {t}"));
        }
        if self.pricing.shapley_samples == Some(0) {
            return bad("pricing.shapley_samples must be >= 1".into());
        }
        if self.strategies.is_empty() {
            return bad("strategies must be non-empty".into());
        }
        let lambdas = self.grid.lambda.to_vec();
        if lambdas.is_empty() {
            return bad("grid.lambda must be non-empty".into());
        }
        for l in lambdas
            .iter()
            .chain(self.strategies.iter().filter_map(|s| s.lambda.as_ref()))
        {
            if !(*l >= 0.0 && l.is_finite()) {
                return bad(format!("lambda values must be >= 0, got {l}"));
            }
        }
        for s in &self.strategies {
            if let Some(a) = s.a_star {
                if !(a > 0.0 && a <= 1.0) {
                    return bad(format!("strategy a_star must lie in (0, 1], got {a}"));
                }
            }
        }
        let mut labels: Vec<String> = self.strategies.iter().map(StrategyEntry::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("strategy labels must be unique".into());
        }
        if self.grid.repetitions == 0 {
            return bad("grid.repetitions must be >= 1".into());
        }
        Ok(())
    }

    /// Size limits that depend on the catalog size.
    pub fn check_size(&self, n: usize) -> Result<()> {
        if n > MAX_EXHAUSTIVE_N && self.strategies.iter().any(|s| s.kind == StrategyKind::Optimal) {
            return Err(Error::SizeLimit {
                what: "optimal purchase (exhaustive search)",
                n,
                limit: MAX_EXHAUSTIVE_N,
            });
        }
        if n > MAX_TABLE_N
            && self.pricing.shapley_samples.is_none()
            && self.pricing.kind.to_vec().contains(&PricingKind::Shapley)
        {
            return Err(Error::SizeLimit {
                what: "exact Shapley pricing (set pricing.shapley_samples)",
                n,
                limit: MAX_TABLE_N,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "oracle": {"kind": "synthetic", "n": 10, "mup": 1, "di": [2]},
        "pricing": {"kind": "uniform", "tcod": 1.5},
        "strategies": [{"kind": "optimal"}, {"kind": "s_tbyb", "lambda": 0.3}]
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid.repetitions, 50);
        assert_eq!(c.grid.lambda.to_vec(), vec![0.1]);
        assert_eq!(c.volumes(), VolumesConfig::Uniform);
        assert_eq!(c.value, ValueFunction::Identity);
        assert_eq!(c.output.experiment, "experiment.csv");
        assert_eq!(c.strategies[1].label(), "s_tbyb(lambda=0.3)");
        assert_eq!(c.strategies[1].config(0.1, 0).lambda, 0.3);
        assert_eq!(c.strategies[0].config(0.1, 0).lambda, 0.1);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let typo = MINIMAL.replace("\"tcod\"", "\"tcodd\"");
        assert!(matches!(ExperimentConfig::from_json(&typo), Err(Error::Config(_))));
        for (from, to) in [
            ("\"mup\": 1", "\"mup\": 0"),
            ("\"di\": [2]", "\"di\": [0.5]"),
            ("\"tcod\": 1.5", "\"tcod\": []"),
            ("\"lambda\": 0.3", "\"lambda\": -1"),
        ] {
            let c = ExperimentConfig::from_json(&MINIMAL.replace(from, to)).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{to}");
        }
    }

    #[test]
    fn size_limits_name_the_limit() {
        let c = ExperimentConfig::from_json(&MINIMAL.replace("\"n\": 10", "\"n\": 30")).unwrap();
        let err = c.validate().unwrap_err();
        assert!(matches!(err, Error::SizeLimit { limit: 24, .. }));
        assert!(err.to_string().contains("24"));
        let no_opt = MINIMAL
            .replace("\"n\": 10", "\"n\": 30")
            .replace("{\"kind\": \"optimal\"}, ", "");
        ExperimentConfig::from_json(&no_opt).unwrap().validate().unwrap();
    }
}
