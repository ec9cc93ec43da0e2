//! Purchase sequences: cumulative profit after each round.

use serde::Serialize;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::strategies::{self, StrategyConfig, StrategyKind};
use crate::trace::PurchaseTrace;
use crate::value::ValueFunction;

use super::config::ExperimentConfig;
use super::grid::{build_instance, strategy_seed, Cell, OracleSlot};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceRow {
    pub round: usize,
    pub strategy: String,
    pub cum_profit: f64,
}

/// Turns traces into sequence rows. Sequential strategies get one row per
/// round from 0 up to the longest trace, holding their final profit after
/// they stop; the optimal strategy is a single point at its subset size.
pub fn sequence_rows(traces: &[(String, StrategyKind, PurchaseTrace)]) -> Vec<SequenceRow> {
    average_sequences(
        &traces
            .iter()
            .map(|(l, k, t)| (l.clone(), *k, vec![t]))
            .collect::<Vec<_>>(),
    )
}

/// Same as [`sequence_rows`] with each strategy's profit averaged over
/// several traces. The optimal point sits at the rounded mean subset size.
pub fn average_sequences(groups: &[(String, StrategyKind, Vec<&PurchaseTrace>)]) -> Vec<SequenceRow> {
    let longest = groups
        .iter()
        .flat_map(|(_, _, ts)| ts.iter().map(|t| t.rounds.len()))
        .max()
        .unwrap_or(0);
    let mut rows = Vec::new();
    for (label, kind, traces) in groups {
        let reps = traces.len() as f64;
        if *kind == StrategyKind::Optimal {
            let size = traces.iter().map(|t| t.rounds.len() as f64).sum::<f64>() / reps;
            rows.push(SequenceRow {
                round: size.round() as usize,
                strategy: label.clone(),
                cum_profit: traces.iter().map(|t| t.final_profit).sum::<f64>() / reps,
            });
            continue;
        }
        for k in 0..=longest {
            rows.push(SequenceRow {
                round: k,
                strategy: label.clone(),
                cum_profit: traces.iter().map(|t| t.profit_after(k)).sum::<f64>() / reps,
            });
        }
    }
    rows
}

/// Runs `strategies` on one fully specified instance.
pub fn run_sequence(
    catalog: &Catalog,
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    strategies: &[(String, StrategyConfig)],
) -> Result<Vec<SequenceRow>> {
    let traces = strategies
        .iter()
        .map(|(label, sc)| Ok((label.clone(), sc.kind, strategies::run(catalog, oracle, vf, sc)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(sequence_rows(&traces))
}

/// Sequences for one grid cell averaged over repetitions `0..reps`, using the
/// same instances and strategy seeds as the sweep.
pub fn cell_sequence(cfg: &ExperimentConfig, slot: &OracleSlot, cell: &Cell, reps: usize) -> Result<Vec<SequenceRow>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("sequence needs at least one repetition".into()));
    }
    let mut per_strategy: Vec<Vec<PurchaseTrace>> = vec![Vec::new(); cfg.strategies.len()];
    for rep in 0..reps {
        let catalog = build_instance(cfg, slot, cell, rep)?;
        for (k, entry) in cfg.strategies.iter().enumerate() {
            let sc = entry.config(cell.lambda, strategy_seed(cell, cfg.grid.base_seed, rep, entry));
            per_strategy[k].push(strategies::run(&catalog, slot.oracle.as_ref(), &cfg.value, &sc)?);
        }
    }
    let groups: Vec<(String, StrategyKind, Vec<&PurchaseTrace>)> = cfg
        .strategies
        .iter()
        .zip(&per_strategy)
        .map(|(e, ts)| (e.label(), e.kind, ts.iter().collect()))
        .collect();
    Ok(average_sequences(&groups))
}

pub fn write_sequence_csv<W: std::io::Write>(rows: &[SequenceRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["round", "strategy", "cum_profit"])?;
    for r in rows {
        w.write_record([r.round.to_string(), r.strategy.clone(), r.cum_profit.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<sequence>", e))?;
    Ok(())
}
