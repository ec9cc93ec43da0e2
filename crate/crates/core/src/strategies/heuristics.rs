//! Value-agnostic heuristics. Neither looks at accuracies before buying; both
//! only buy a dataset whose price stays within the admissible loss
//! `lambda * (v(a*) - v_n)`, the worst case being a purchase that adds no
//! accuracy at all.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{Catalog, DatasetId};
use crate::oracle::AccuracyOracle;
use crate::trace::{PurchaseTrace, Recorder, StopReason};
use crate::value::ValueFunction;

use super::StrategyConfig;

/// Orders by volume per unit price; free datasets rank above all priced
/// ones, then larger volume, then lower id.
fn volume_rank(catalog: &Catalog, a: DatasetId, b: DatasetId) -> Ordering {
    let (pa, pb) = (catalog.price(a), catalog.price(b));
    let (va, vb) = (catalog.volume(a), catalog.volume(b));
    let ratio = |v: f64, p: f64| if p == 0.0 { f64::INFINITY } else { v / p };
    ratio(va, pa)
        .total_cmp(&ratio(vb, pb))
        .then(va.total_cmp(&vb))
        .then(b.cmp(&a))
}

/// Buys the remaining dataset with the highest `volume / price` each round
/// while its price fits the admissible loss.
pub fn run_volume_heuristic(
    catalog: &Catalog,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    cfg: &StrategyConfig,
) -> PurchaseTrace {
    let mut rec = Recorder::new(catalog, oracle, vf);
    let v_star = vf.eval(cfg.a_star(oracle));
    loop {
        let st = &rec.state;
        let Some(pick) = st.remaining.iter().max_by(|&a, &b| volume_rank(catalog, a, b)) else {
            return rec.finish(StopReason::CatalogExhausted);
        };
        let budget = cfg.lambda * (v_star - st.value_now);
        rec.evaluated_rounds += 1;
        if catalog.price(pick) > budget {
            return rec.finish(StopReason::ConditionFailed);
        }
        rec.buy(pick);
    }
}

/// Buys a uniformly random affordable dataset each round until none is
/// affordable.
pub fn run_price_heuristic(
    catalog: &Catalog,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    cfg: &StrategyConfig,
) -> PurchaseTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new(catalog, oracle, vf);
    let v_star = vf.eval(cfg.a_star(oracle));
    loop {
        let st = &rec.state;
        if st.remaining.is_empty() {
            return rec.finish(StopReason::CatalogExhausted);
        }
        let budget = cfg.lambda * (v_star - st.value_now);
        let affordable: Vec<DatasetId> = st.remaining.iter().filter(|&id| catalog.price(id) <= budget).collect();
        rec.evaluated_rounds += 1;
        if affordable.is_empty() {
            return rec.finish(StopReason::NoCandidate);
        }
        let pick = affordable[rng.random_range(0..affordable.len())];
        rec.buy(pick);
    }
}
