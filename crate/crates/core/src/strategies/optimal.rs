use rayon::prelude::*;

use crate::catalog::Catalog;
use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::trace::{PurchaseTrace, Recorder, StopReason};
use crate::value::ValueFunction;
use crate::MAX_EXHAUSTIVE_N;

/// Profit-maximizing subset over all `2^n` coalitions, with its profit.
///
/// The empty coalition is a candidate, so the returned profit is never below
/// `v(0)`. Ties go to fewer datasets, then to the smaller bitmask.
pub fn best_subset(catalog: &Catalog, oracle: &dyn AccuracyOracle, vf: &ValueFunction) -> Result<(Coalition, f64)> {
    let n = catalog.len();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::SizeLimit {
            what: "optimal purchase (exhaustive search)",
            n,
            limit: MAX_EXHAUSTIVE_N,
        });
    }
    // cost(mask) = low[mask & low_mask] + high[mask >> split]
    let split = n / 2;
    let prices = catalog.prices();
    let subset_costs = |ps: &[f64]| -> Vec<f64> {
        let mut t = vec![0.0; 1 << ps.len()];
        for m in 1..t.len() {
            let low = m.trailing_zeros() as usize;
            t[m] = t[m & (m - 1)] + ps[low];
        }
        t
    };
    let low = subset_costs(&prices[..split]);
    let high = subset_costs(&prices[split..]);
    let low_mask = (1u64 << split) - 1;

    let key = |m: u64| {
        let cost = low[(m & low_mask) as usize] + high[(m >> split) as usize];
        let profit = vf.eval(oracle.accuracy(Coalition::from_bits(m))) - cost;
        (profit, m)
    };
    // total order: higher profit, then fewer members, then smaller mask
    let better = |a: (f64, u64), b: (f64, u64)| {
        if a.0 != b.0 {
            a.0 > b.0
        } else if a.1.count_ones() != b.1.count_ones() {
            a.1.count_ones() < b.1.count_ones()
        } else {
            a.1 < b.1
        }
    };
    let (profit, mask) = (0..1u64 << n).into_par_iter().map(key).reduce(
        || (f64::NEG_INFINITY, u64::MAX),
        |a, b| if better(a, b) { a } else { b },
    );
    Ok((Coalition::from_bits(mask), profit))
}

/// Full-information purchase: buys the profit-maximizing subset, recorded in
/// ascending id order.
pub fn run_optimal(catalog: &Catalog, oracle: &dyn AccuracyOracle, vf: &ValueFunction) -> Result<PurchaseTrace> {
    let (best, _) = best_subset(catalog, oracle, vf)?;
    let mut rec = Recorder::new(catalog, oracle, vf);
    for id in best.iter() {
        rec.buy(id);
    }
    rec.evaluated_rounds = best.len();
    let mut trace = rec.finish(StopReason::CatalogExhausted);
    trace.queries += 1u64 << catalog.len();
    Ok(trace)
}
