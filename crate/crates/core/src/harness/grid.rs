use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::pricing::{self, PricingKind, PricingScheme};
use crate::seed::{label_hash, mix, mix_all};
use crate::shapley::{self, ShapleyMethod};
use crate::strategies::{self, best_subset, StrategyKind};
use crate::synthetic::SyntheticModel;
use crate::table::CoalitionTable;
use crate::trace::PurchaseTrace;
use crate::value::ValueFunction;
use crate::{MAX_EXHAUSTIVE_N, MAX_TABLE_N};

use super::config::{ExperimentConfig, OracleConfig, StrategyEntry, VolumesConfig};

const VOLUME_STREAM: u64 = 1;
const PRICE_STREAM: u64 = 2;
const STRATEGY_STREAM: u64 = 3;

/// Optimal profits at or below this leave relative profit undefined.
pub const RELATIVE_FLOOR: f64 = 1e-9;

/// One point of the sweep. `mup`/`di` are absent for table oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub tcod: f64,
    pub mup: Option<f64>,
    pub di: Option<f64>,
    pub pricing: PricingKind,
    pub lambda: f64,
}

impl Cell {
    /// Seed of repetition `rep`. Lambda is left out so every risk level sees
    /// the same priced instances.
    pub fn run_seed(&self, base_seed: u64, rep: usize) -> u64 {
        mix_all(
            base_seed,
            [
                self.tcod.to_bits(),
                self.mup.map_or(u64::MAX, f64::to_bits),
                self.di.map_or(u64::MAX, f64::to_bits),
                label_hash(self.pricing.as_str()),
                rep as u64,
            ],
        )
    }
}

/// Accuracy oracle of one `(mup, di)` slice of the grid, plus what pricing
/// needs from it.
pub struct OracleSlot {
    pub mup: Option<f64>,
    pub di: Option<f64>,
    pub oracle: Arc<dyn AccuracyOracle>,
    /// Volumes fixed by a catalog file, if any.
    pub fixed_volumes: Option<Vec<f64>>,
    shapley: std::sync::OnceLock<std::result::Result<Vec<f64>, String>>,
}

impl OracleSlot {
    fn new(
        mup: Option<f64>,
        di: Option<f64>,
        oracle: Arc<dyn AccuracyOracle>,
        fixed_volumes: Option<Vec<f64>>,
    ) -> Self {
        OracleSlot {
            mup,
            di,
            oracle,
            fixed_volumes,
            shapley: std::sync::OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.oracle.len()
    }

    fn shapley_values(&self, vf: &ValueFunction, samples: Option<usize>, seed: u64) -> Result<&[f64]> {
        let r = self.shapley.get_or_init(|| {
            let method = match (self.n() <= MAX_TABLE_N, samples) {
                (true, _) => ShapleyMethod::Exact,
                (false, Some(samples)) => ShapleyMethod::MonteCarlo { samples, seed },
                (false, None) => {
                    return Err(Error::SizeLimit {
                        what: "exact Shapley pricing (set pricing.shapley_samples)",
                        n: self.n(),
                        limit: MAX_TABLE_N,
                    }
                    .to_string())
                }
            };
            shapley::shapley(self.oracle.as_ref(), vf, method)
                .map(|r| r.values)
                .map_err(|e| e.to_string())
        });
        r.as_deref().map_err(|e| Error::InvalidParameter(e.clone()))
    }
}

/// Builds the oracles named by the config, one per `(mup, di)` pair.
pub fn build_oracles(cfg: &ExperimentConfig) -> Result<Vec<OracleSlot>> {
    match &cfg.oracle {
        OracleConfig::Synthetic { n, mup, di } => {
            let mut slots = Vec::new();
            for &m in &mup.to_vec() {
                for &d in &di.to_vec() {
                    let model = SyntheticModel::new(*n, m, d)?;
                    slots.push(OracleSlot::new(Some(m), Some(d), Arc::new(model), None));
                }
            }
            Ok(slots)
        }
        OracleConfig::Table { path, catalog } => {
            let catalog = Catalog::load(&cfg.resolve(catalog))?;
            cfg.check_size(catalog.len())?;
            let table = CoalitionTable::load(&cfg.resolve(path), catalog.len())?;
            Ok(vec![OracleSlot::new(
                None,
                None,
                Arc::new(table),
                Some(catalog.volumes()),
            )])
        }
    }
}

/// Priced catalog for one repetition of one cell. Every strategy of that
/// repetition runs on this same catalog.
pub fn build_instance(cfg: &ExperimentConfig, slot: &OracleSlot, cell: &Cell, rep: usize) -> Result<Catalog> {
    let seed = cell.run_seed(cfg.grid.base_seed, rep);
    let n = slot.n();
    let volumes = match (&slot.fixed_volumes, cfg.volumes()) {
        (Some(v), _) => v.clone(),
        (None, VolumesConfig::Catalog) => {
            return Err(Error::Config("volumes.kind = \"catalog\" needs a table oracle".into()))
        }
        (None, v) => v.generator().expect("non-catalog volumes have a generator").generate(
            n,
            slot.di.unwrap_or(1.0),
            mix(seed, VOLUME_STREAM),
        )?,
    };
    let catalog = Catalog::with_volumes(&volumes)?;
    let scheme = PricingScheme {
        kind: cell.pricing,
        tcod: cell.tcod,
        seed: mix(seed, PRICE_STREAM ^ cfg.pricing.seed.rotate_left(8)),
        shapley_samples: cfg.pricing.shapley_samples,
    };
    if scheme.kind == PricingKind::Shapley {
        let values = slot.shapley_values(&cfg.value, scheme.shapley_samples, cfg.pricing.seed)?;
        catalog.repriced(&pricing::shapley_prices(values, scheme.tcod)?)
    } else {
        pricing::apply_pricing(&catalog, &scheme, slot.oracle.as_ref(), &cfg.value)
    }
}

pub fn strategy_seed(cell: &Cell, base_seed: u64, rep: usize, entry: &StrategyEntry) -> u64 {
    mix_all(
        cell.run_seed(base_seed, rep),
        [STRATEGY_STREAM, label_hash(entry.kind.as_str()), entry.seed],
    )
}

/// Runs every configured strategy on one instance. Also returns the optimal
/// profit when the catalog is small enough to compute it.
pub fn run_instance(
    cfg: &ExperimentConfig,
    slot: &OracleSlot,
    cell: &Cell,
    rep: usize,
) -> Result<(Catalog, Vec<PurchaseTrace>, Option<f64>)> {
    let catalog = build_instance(cfg, slot, cell, rep)?;
    let oracle = slot.oracle.as_ref();
    let mut traces = Vec::with_capacity(cfg.strategies.len());
    for entry in &cfg.strategies {
        let sc = entry.config(cell.lambda, strategy_seed(cell, cfg.grid.base_seed, rep, entry));
        traces.push(strategies::run(&catalog, oracle, &cfg.value, &sc)?);
    }
    let optimal = match cfg.strategies.iter().position(|s| s.kind == StrategyKind::Optimal) {
        Some(i) => Some(traces[i].final_profit),
        None if catalog.len() <= MAX_EXHAUSTIVE_N => Some(best_subset(&catalog, oracle, &cfg.value)?.1),
        None => None,
    };
    Ok((catalog, traces, optimal))
}

/// Aggregated outcome of one strategy over the repetitions of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub oracle: &'static str,
    pub n: usize,
    #[serde(flatten)]
    pub cell: Cell,
    pub strategy: String,
    pub n_runs: usize,
    pub mean_profit: f64,
    pub std_profit: f64,
    /// Mean of per-run `profit / optimal profit`; absent unless the optimal
    /// profit exceeds [`RELATIVE_FLOOR`] on every run.
    pub mean_relative_profit: Option<f64>,
    pub mean_rounds: f64,
    pub mean_queries: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub cell: Cell,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridOutcome {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<CellError>,
}

impl GridOutcome {
    pub fn row(&self, cell_matches: impl Fn(&Cell) -> bool, strategy: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy && cell_matches(&r.cell))
    }
}

/// Grid cells in output order: mup, di, pricing, tcod, lambda.
pub fn cells(cfg: &ExperimentConfig, slots: &[OracleSlot]) -> Vec<(usize, Cell)> {
    let mut out = Vec::new();
    for (si, slot) in slots.iter().enumerate() {
        for pricing in cfg.pricing.kind.to_vec() {
            for tcod in cfg.pricing.tcod.to_vec() {
                for lambda in cfg.grid.lambda.to_vec() {
                    out.push((
                        si,
                        Cell {
                            tcod,
                            mup: slot.mup,
                            di: slot.di,
                            pricing,
                            lambda,
                        },
                    ));
                }
            }
        }
    }
    out
}

struct RunRecord {
    profits: Vec<f64>,
    rounds: Vec<usize>,
    queries: Vec<u64>,
    optimal: Option<f64>,
}

/// Runs the whole sweep. Cells and repetitions run in parallel on the
/// current rayon pool; results are merged in grid order, so the output does
/// not depend on the number of workers. A cell that fails is reported in
/// [`GridOutcome::errors`] and the others still run.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let slots = build_oracles(cfg)?;
    run_grid_with(cfg, &slots)
}

pub fn run_grid_with(cfg: &ExperimentConfig, slots: &[OracleSlot]) -> Result<GridOutcome> {
    let cells = cells(cfg, slots);
    let reps = cfg.grid.repetitions;
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..reps).map(move |r| (c, r))).collect();
    let records: Vec<Result<RunRecord>> = jobs
        .par_iter()
        .map(|&(c, rep)| {
            let (si, cell) = &cells[c];
            let (_, traces, optimal) = run_instance(cfg, &slots[*si], cell, rep)?;
            Ok(RunRecord {
                profits: traces.iter().map(|t| t.final_profit).collect(),
                rounds: traces.iter().map(|t| t.rounds.len()).collect(),
                queries: traces.iter().map(|t| t.queries).collect(),
                optimal,
            })
        })
        .collect();

    let oracle_name = match cfg.oracle {
        OracleConfig::Synthetic { .. } => "synthetic",
        OracleConfig::Table { .. } => "table",
    };
    let mut outcome = GridOutcome::default();
    let mut records = records.into_iter();
    for (si, cell) in &cells {
        let runs: Vec<Result<RunRecord>> = records.by_ref().take(reps).collect();
        let runs: Vec<RunRecord> = match runs.into_iter().collect::<Result<_>>() {
            Ok(r) => r,
            Err(e) => {
                outcome.errors.push(CellError {
                    cell: *cell,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let optimal: Option<Vec<f64>> = runs.iter().map(|r| r.optimal.filter(|&p| p > RELATIVE_FLOOR)).collect();
        for (k, entry) in cfg.strategies.iter().enumerate() {
            let profits: Vec<f64> = runs.iter().map(|r| r.profits[k]).collect();
            let (mean_profit, std_profit) = mean_std(&profits);
            let mean_relative_profit = optimal.as_ref().map(|opt| {
                let rel: Vec<f64> = profits.iter().zip(opt).map(|(p, o)| p / o).collect();
                mean_std(&rel).0
            });
            outcome.rows.push(ResultRow {
                oracle: oracle_name,
                n: slots[*si].n(),
                cell: *cell,
                strategy: entry.label(),
                n_runs: runs.len(),
                mean_profit,
                std_profit,
                mean_relative_profit,
                mean_rounds: runs.iter().map(|r| r.rounds[k] as f64).sum::<f64>() / runs.len() as f64,
                mean_queries: runs.iter().map(|r| r.queries[k] as f64).sum::<f64>() / runs.len() as f64,
            });
        }
    }
    Ok(outcome)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const EXPERIMENT_HEADER: [&str; 14] = [
    "oracle",
    "n",
    "tcod",
    "mup",
    "di",
    "pricing",
    "lambda",
    "strategy",
    "n_runs",
    "mean_profit",
    "std_profit",
    "mean_relative_profit",
    "mean_rounds",
    "mean_queries",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_experiment_csv<W: std::io::Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EXPERIMENT_HEADER)?;
    for r in rows {
        w.write_record([
            r.oracle.to_string(),
            r.n.to_string(),
            r.cell.tcod.to_string(),
            opt(r.cell.mup),
            opt(r.cell.di),
            r.cell.pricing.to_string(),
            r.cell.lambda.to_string(),
            r.strategy.clone(),
            r.n_runs.to_string(),
            r.mean_profit.to_string(),
            r.std_profit.to_string(),
            opt(r.mean_relative_profit),
            r.mean_rounds.to_string(),
            r.mean_queries.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<experiment>", e))?;
    Ok(())
}

/// Groups rows by cell, preserving grid order.
pub fn rows_by_cell(rows: &[ResultRow]) -> Vec<(Cell, HashMap<String, &ResultRow>)> {
    let mut out: Vec<(Cell, HashMap<String, &ResultRow>)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((c, m)) if *c == r.cell => {
                m.insert(r.strategy.clone(), r);
            }
            _ => out.push((r.cell, HashMap::from([(r.strategy.clone(), r)]))),
        }
    }
    out
}
