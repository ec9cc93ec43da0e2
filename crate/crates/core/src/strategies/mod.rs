//! Purchase strategies. Each one runs against a priced catalog, an accuracy
//! oracle and the buyer's value function and returns a [`PurchaseTrace`].

mod heuristics;
mod optimal;
mod tbyb;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, DatasetId};
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::trace::PurchaseTrace;
use crate::value::ValueFunction;

pub use heuristics::{run_price_heuristic, run_volume_heuristic};
pub use optimal::{best_subset, run_optimal};
pub use tbyb::{run_a_tbyb, run_s_tbyb, EstimatorState};

/// Risk parameter used when none is configured.
pub const DEFAULT_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Optimal,
    STbyb,
    ATbyb,
    VolumeHeuristic,
    PriceHeuristic,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Optimal,
        StrategyKind::ATbyb,
        StrategyKind::STbyb,
        StrategyKind::VolumeHeuristic,
        StrategyKind::PriceHeuristic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Optimal => "optimal",
            StrategyKind::STbyb => "s_tbyb",
            StrategyKind::ATbyb => "a_tbyb",
            StrategyKind::VolumeHeuristic => "volume_heuristic",
            StrategyKind::PriceHeuristic => "price_heuristic",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Maximum relative admissible loss per purchase.
    pub lambda: f64,
    /// Buyer's guess of the best attainable accuracy, used instead of the
    /// oracle's when set.
    pub a_star_override: Option<f64>,
    /// Maximum number of oracle queries for the assisted strategy.
    pub query_budget: Option<u64>,
    /// Randomness for the price heuristic.
    pub seed: u64,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        StrategyConfig {
            kind,
            lambda: DEFAULT_LAMBDA,
            a_star_override: None,
            query_budget: None,
            seed: 0,
        }
    }

    #[must_use]
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if let Some(a) = self.a_star_override {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "a* override must lie in (0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }

    fn a_star(&self, oracle: &dyn AccuracyOracle) -> f64 {
        self.a_star_override.unwrap_or_else(|| oracle.max_accuracy())
    }
}

/// Runs the configured strategy.
pub fn run(
    catalog: &Catalog,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    cfg: &StrategyConfig,
) -> Result<PurchaseTrace> {
    cfg.validate()?;
    if oracle.len() != catalog.len() {
        return Err(Error::InvalidParameter(format!(
            "oracle covers {} datasets, catalog has {}",
            oracle.len(),
            catalog.len()
        )));
    }
    match cfg.kind {
        StrategyKind::Optimal => run_optimal(catalog, oracle, vf),
        StrategyKind::STbyb => Ok(run_s_tbyb(catalog, oracle, vf, cfg)),
        StrategyKind::ATbyb => Ok(run_a_tbyb(catalog, oracle, vf, cfg)),
        StrategyKind::VolumeHeuristic => Ok(run_volume_heuristic(catalog, oracle, vf, cfg)),
        StrategyKind::PriceHeuristic => Ok(run_price_heuristic(catalog, oracle, vf, cfg)),
    }
}

/// Highest score wins; ties go to the lower price, then the lower id.
fn pick_best(candidates: impl Iterator<Item = (DatasetId, f64, f64)>) -> Option<(DatasetId, f64)> {
    let mut best: Option<(DatasetId, f64, f64)> = None;
    for (id, score, price) in candidates {
        let better = match best {
            None => true,
            Some((bid, bscore, bprice)) => {
                score > bscore || (score == bscore && (price < bprice || (price == bprice && id < bid)))
            }
        };
        if better {
            best = Some((id, score, price));
        }
    }
    best.map(|(id, score, _)| (id, score))
}
