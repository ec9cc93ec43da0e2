//! Price assignment scaled to a target total cost of data, and volume
//! generation for synthetic catalogs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::shapley::{self, ShapleyMethod};
use crate::value::ValueFunction;
use crate::MAX_TABLE_N;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingKind {
    Uniform,
    Random,
    Shapley,
    Volume,
}

impl PricingKind {
    pub const ALL: [PricingKind; 4] = [
        PricingKind::Uniform,
        PricingKind::Random,
        PricingKind::Shapley,
        PricingKind::Volume,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PricingKind::Uniform => "uniform",
            PricingKind::Random => "random",
            PricingKind::Shapley => "shapley",
            PricingKind::Volume => "volume",
        }
    }

    /// Whether prices depend on the scheme's seed.
    pub fn is_random(self) -> bool {
        matches!(self, PricingKind::Random)
    }
}

impl std::str::FromStr for PricingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PricingKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown pricing scheme {s:?}")))
    }
}

impl std::fmt::Display for PricingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingScheme {
    pub kind: PricingKind,
    pub tcod: f64,
    pub seed: u64,
    /// Permutation samples for Shapley pricing of catalogs too large for
    /// exact enumeration.
    pub shapley_samples: Option<usize>,
}

impl PricingScheme {
    pub fn new(kind: PricingKind, tcod: f64) -> Self {
        PricingScheme {
            kind,
            tcod,
            seed: 0,
            shapley_samples: None,
        }
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Scales nonnegative `shares` so they sum to `tcod`.
pub fn proportional_prices(shares: &[f64], tcod: f64) -> Result<Vec<f64>> {
    let total: f64 = shares.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegeneratePricing(format!(
            "price shares sum to {total}, cannot scale to TCOD"
        )));
    }
    Ok(shares.iter().map(|s| s / total * tcod).collect())
}

/// Shapley-proportional prices; negative estimates are clamped to zero.
pub fn shapley_prices(values: &[f64], tcod: f64) -> Result<Vec<f64>> {
    let shares: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    proportional_prices(&shares, tcod).map_err(|_| Error::DegeneratePricing("all Shapley shares are zero".into()))
}

pub fn uniform_prices(n: usize, tcod: f64) -> Vec<f64> {
    vec![tcod / n as f64; n]
}

pub fn random_prices(n: usize, tcod: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    proportional_prices(&draws, tcod)
}

pub fn volume_prices(volumes: &[f64], tcod: f64) -> Result<Vec<f64>> {
    proportional_prices(volumes, tcod).map_err(|_| Error::DegeneratePricing("all volumes are zero".into()))
}

/// Reprices `catalog` under `scheme`. The oracle and value function are only
/// consulted by Shapley pricing.
pub fn apply_pricing(
    catalog: &Catalog,
    scheme: &PricingScheme,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
) -> Result<Catalog> {
    if !(scheme.tcod > 0.0 && scheme.tcod.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "TCOD must be > 0, got {}",
            scheme.tcod
        )));
    }
    let n = catalog.len();
    let prices = match scheme.kind {
        PricingKind::Uniform => uniform_prices(n, scheme.tcod),
        PricingKind::Random => random_prices(n, scheme.tcod, scheme.seed)?,
        PricingKind::Volume => volume_prices(&catalog.volumes(), scheme.tcod)?,
        PricingKind::Shapley => {
            if oracle.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "oracle covers {} datasets, catalog has {n}",
                    oracle.len()
                )));
            }
            let method = match (n <= MAX_TABLE_N, scheme.shapley_samples) {
                (true, _) => ShapleyMethod::Exact,
                (false, Some(samples)) => ShapleyMethod::MonteCarlo {
                    samples,
                    seed: scheme.seed,
                },
                (false, None) => {
                    return Err(Error::SizeLimit {
                        what: "exact Shapley pricing (configure Monte Carlo samples)",
                        n,
                        limit: MAX_TABLE_N,
                    })
                }
            };
            shapley_prices(&shapley::shapley(oracle, vf, method)?.values, scheme.tcod)?
        }
    };
    catalog.repriced(&prices)
}

/// How volumes of a synthetic catalog are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeGenerator {
    /// Independent uniform draws on (0, 1], unrelated to value.
    #[default]
    Uniform,
    /// Volume proportional to the dataset's synthetic weight `DI^(k+1)`
    /// times a lognormal factor with log-scale `sigma`.
    Importance { sigma: f64 },
}

impl VolumeGenerator {
    pub fn generate(&self, n: usize, di: f64, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            VolumeGenerator::Uniform => Ok((0..n).map(|_| 1.0 - rng.random::<f64>()).collect()),
            VolumeGenerator::Importance { sigma } => {
                let noise = LogNormal::new(0.0, sigma)
                    .map_err(|e| Error::InvalidParameter(format!("volume sigma {sigma}: {e}")))?;
                Ok((1..=n as i32).map(|i| di.powi(i) * noise.sample(&mut rng)).collect())
            }
        }
    }
}
