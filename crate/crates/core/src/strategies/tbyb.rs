//! Try-before-you-buy strategies.
//!
//! The stand-alone variant (S-TBYB) only sees each dataset's individual
//! accuracy and predicts the gain of the next purchase from how much the last
//! purchase diluted. The assisted variant (A-TBYB) asks the oracle every
//! round for the exact accuracy of the holding extended by each candidate.

use crate::catalog::{Catalog, DatasetId};
use crate::oracle::AccuracyOracle;
use crate::trace::{PurchaseTrace, Recorder, StopReason};
use crate::value::ValueFunction;

use super::{pick_best, StrategyConfig};

/// Below this a singleton accuracy is treated as zero when estimating the
/// dilution ratio.
const RHO_GUARD: f64 = 1e-12;

/// Dilution ratio of the last purchase: the accuracy it actually added
/// relative to its individual accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorState {
    pub rho: f64,
    pub last_single_accuracy: f64,
}

impl EstimatorState {
    /// Before the first purchase, `rho = 1`.
    pub fn new() -> Self {
        EstimatorState {
            rho: 1.0,
            last_single_accuracy: 0.0,
        }
    }

    /// Records a purchase whose individual accuracy is `single` and which
    /// moved the holding from `before` to `after`.
    pub fn update(&mut self, single: f64, before: f64, after: f64) {
        self.last_single_accuracy = single;
        self.rho = if single < RHO_GUARD {
            1.0
        } else {
            (after - before) / single
        };
    }

    /// Predicted holding accuracy after adding a dataset with individual
    /// accuracy `single`: `a_n + rho * single * (a* - a_n)`, kept within
    /// `[a_n, a*]`.
    pub fn predict(&self, single: f64, accuracy_now: f64, a_star: f64) -> f64 {
        let gain = self.rho * single * (a_star - accuracy_now);
        (accuracy_now + gain).min(a_star).max(accuracy_now)
    }
}

impl Default for EstimatorState {
    fn default() -> Self {
        Self::new()
    }
}

pub fn run_s_tbyb(
    catalog: &Catalog,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    cfg: &StrategyConfig,
) -> PurchaseTrace {
    let mut rec = Recorder::new(catalog, oracle, vf);
    let singles: Vec<f64> = catalog
        .ids()
        .map(|id| rec.oracle.accuracy(crate::Coalition::singleton(id)))
        .collect();
    let a_star = cfg.a_star(oracle);
    let v_star = vf.eval(a_star);
    let mut est = EstimatorState::new();

    loop {
        if rec.state.remaining.is_empty() {
            return rec.finish(StopReason::CatalogExhausted);
        }
        rec.evaluated_rounds += 1;
        let st = &rec.state;
        let (pick, _) = pick_best(st.remaining.iter().map(|id| {
            let p = catalog.price(id);
            (id, vf.eval(singles[id.index()]) - p, p)
        }))
        .expect("remaining is non-empty");
        let price = catalog.price(pick);
        let single = singles[pick.index()];
        let predicted = if st.owned.is_empty() {
            single
        } else {
            est.predict(single, st.accuracy_now, a_star)
        };
        let expected_gain = vf.eval(predicted) - st.value_now - price;
        if expected_gain < -cfg.lambda * (v_star - st.value_now) {
            return rec.finish(StopReason::ConditionFailed);
        }
        let before = st.accuracy_now;
        rec.buy(pick);
        est.update(single, before, rec.state.accuracy_now);
    }
}

pub fn run_a_tbyb(
    catalog: &Catalog,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    cfg: &StrategyConfig,
) -> PurchaseTrace {
    let mut rec = Recorder::new(catalog, oracle, vf);
    let v_star = vf.eval(cfg.a_star(oracle));

    loop {
        let remaining = rec.state.remaining;
        if remaining.is_empty() {
            return rec.finish(StopReason::CatalogExhausted);
        }
        if let Some(budget) = cfg.query_budget {
            if rec.oracle.queries() + remaining.len() as u64 > budget {
                return rec.finish(StopReason::QueryBudgetExhausted);
            }
        }
        rec.evaluated_rounds += 1;
        let owned = rec.state.owned;
        let trials: Vec<(DatasetId, f64)> = remaining
            .iter()
            .map(|id| (id, rec.oracle.accuracy(owned.with(id))))
            .collect();
        let (pick, _) = pick_best(trials.iter().map(|&(id, acc)| {
            let p = catalog.price(id);
            (id, vf.eval(acc) - p, p)
        }))
        .expect("remaining is non-empty");
        let acc = trials.iter().find(|t| t.0 == pick).map(|t| t.1).unwrap();
        let st = &rec.state;
        let gain = vf.eval(acc) - st.value_now - catalog.price(pick);
        if gain < -cfg.lambda * (v_star - st.value_now) {
            return rec.finish(StopReason::ConditionFailed);
        }
        rec.buy_known(pick, acc);
    }
}
