//! Purchase state and the per-round record a strategy leaves behind.

use serde::Serialize;

use crate::catalog::{Catalog, DatasetId};
use crate::coalition::Coalition;
use crate::oracle::{AccuracyOracle, QueryCounter};
use crate::value::ValueFunction;

/// Buyer state at the start of round `round`.
#[derive(Debug, Clone, PartialEq)]
pub struct PurchaseState {
    pub owned: Coalition,
    pub remaining: Coalition,
    pub accuracy_now: f64,
    pub value_now: f64,
    pub spent: f64,
    pub round: usize,
}

impl PurchaseState {
    /// Nothing owned: accuracy 0, value `v(0)`.
    pub fn initial(catalog: &Catalog, vf: &ValueFunction) -> Self {
        PurchaseState {
            owned: Coalition::EMPTY,
            remaining: catalog.full(),
            accuracy_now: 0.0,
            value_now: vf.eval(0.0),
            spent: 0.0,
            round: 0,
        }
    }

    pub fn profit(&self, vf: &ValueFunction) -> f64 {
        vf.eval(self.accuracy_now) - self.spent
    }

    fn buy(&mut self, id: DatasetId, price: f64, accuracy: f64, vf: &ValueFunction) {
        debug_assert!(self.remaining.contains(id));
        self.owned = self.owned.with(id);
        self.remaining = self.remaining.without(id);
        self.spent += price;
        self.accuracy_now = accuracy;
        self.value_now = vf.eval(accuracy);
        self.round += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No remaining dataset was eligible (price heuristic: empty affordable set).
    NoCandidate,
    /// The best candidate failed the buy condition.
    ConditionFailed,
    /// Every dataset was bought, or the strategy's selection is complete.
    CatalogExhausted,
    /// The next round would exceed the oracle query budget.
    QueryBudgetExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::NoCandidate => "no_candidate",
            StopReason::ConditionFailed => "condition_failed",
            StopReason::CatalogExhausted => "catalog_exhausted",
            StopReason::QueryBudgetExhausted => "query_budget_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    /// 1-based round index.
    pub round: usize,
    pub dataset: DatasetId,
    pub price: f64,
    pub accuracy: f64,
    pub cum_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurchaseTrace {
    pub rounds: Vec<Round>,
    /// Profit before any purchase, `v(0)`.
    pub initial_profit: f64,
    pub final_profit: f64,
    pub stop_reason: StopReason,
    /// Accuracy queries issued to the oracle during the run.
    pub queries: u64,
    /// Rounds in which candidates were evaluated, including a final round
    /// that ended in a refusal.
    pub evaluated_rounds: usize,
}

impl PurchaseTrace {
    pub fn purchased(&self) -> impl Iterator<Item = DatasetId> + '_ {
        self.rounds.iter().map(|r| r.dataset)
    }

    pub fn owned(&self) -> Coalition {
        self.purchased().collect()
    }

    pub fn final_accuracy(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.accuracy)
    }

    /// Cumulative profit after `k` purchases, holding the final value once
    /// the trace has stopped.
    pub fn profit_after(&self, k: usize) -> f64 {
        match k.min(self.rounds.len()) {
            0 => self.initial_profit,
            k => self.rounds[k - 1].cum_profit,
        }
    }

    /// Re-buys the recorded datasets against `oracle` and checks that every
    /// price, accuracy and profit matches bit for bit.
    pub fn replay(
        &self,
        catalog: &Catalog,
        oracle: &dyn AccuracyOracle,
        vf: &ValueFunction,
    ) -> std::result::Result<(), String> {
        let mut state = PurchaseState::initial(catalog, vf);
        if state.profit(vf) != self.initial_profit {
            return Err("initial profit mismatch".into());
        }
        for r in &self.rounds {
            if !state.remaining.contains(r.dataset) {
                return Err(format!("round {}: dataset {} bought twice", r.round, r.dataset));
            }
            let price = catalog.price(r.dataset);
            if price != r.price {
                return Err(format!("round {}: price {} != {}", r.round, r.price, price));
            }
            let acc = oracle.accuracy(state.owned.with(r.dataset));
            state.buy(r.dataset, price, acc, vf);
            if acc != r.accuracy {
                return Err(format!("round {}: accuracy {} != {}", r.round, r.accuracy, acc));
            }
            if state.round != r.round {
                return Err(format!("round index {} != {}", r.round, state.round));
            }
            let p = state.profit(vf);
            if p != r.cum_profit {
                return Err(format!("round {}: profit {} != {}", r.round, r.cum_profit, p));
            }
        }
        if state.profit(vf) != self.final_profit {
            return Err("final profit mismatch".into());
        }
        Ok(())
    }
}

/// Accumulates a [`PurchaseTrace`] while a strategy runs.
pub(crate) struct Recorder<'a> {
    pub catalog: &'a Catalog,
    pub oracle: QueryCounter<'a>,
    pub vf: &'a ValueFunction,
    pub state: PurchaseState,
    rounds: Vec<Round>,
    initial_profit: f64,
    pub evaluated_rounds: usize,
}

impl<'a> Recorder<'a> {
    pub fn new(catalog: &'a Catalog, oracle: &'a dyn AccuracyOracle, vf: &'a ValueFunction) -> Self {
        let state = PurchaseState::initial(catalog, vf);
        let initial_profit = state.profit(vf);
        Recorder {
            catalog,
            oracle: QueryCounter::new(oracle),
            vf,
            state,
            rounds: Vec::new(),
            initial_profit,
            evaluated_rounds: 0,
        }
    }

    /// Buys `id`, querying the oracle for the new holding's accuracy.
    pub fn buy(&mut self, id: DatasetId) {
        let acc = self.oracle.accuracy(self.state.owned.with(id));
        self.buy_known(id, acc);
    }

    /// Buys `id` when the accuracy of the new holding is already known.
    pub fn buy_known(&mut self, id: DatasetId, accuracy: f64) {
        let price = self.catalog.price(id);
        self.state.buy(id, price, accuracy, self.vf);
        self.rounds.push(Round {
            round: self.state.round,
            dataset: id,
            price,
            accuracy,
            cum_profit: self.state.profit(self.vf),
        });
    }

    pub fn finish(self, stop_reason: StopReason) -> PurchaseTrace {
        PurchaseTrace {
            final_profit: self.state.profit(self.vf),
            rounds: self.rounds,
            initial_profit: self.initial_profit,
            stop_reason,
            queries: self.oracle.queries(),
            evaluated_rounds: self.evaluated_rounds,
        }
    }
}
