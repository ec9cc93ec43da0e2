//! Shapley values of datasets for the game `φ(S) = v(a(S))`.
//!
//! Exact values enumerate all `2^n` coalitions once and weight each marginal
//! contribution by `|S|!(n-|S|-1)!/n!`. The Monte Carlo estimator averages
//! marginal contributions along uniformly random orderings; sample `i` draws
//! its ordering from its own generator seeded by `(seed, i)`, and samples are
//! folded in index order, so the estimate does not depend on how many worker
//! threads computed it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::DatasetId;
use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::seed::mix;
use crate::value::ValueFunction;
use crate::{MAX_CATALOG_N, MAX_TABLE_N};

const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapleyMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapleyResult {
    pub values: Vec<f64>,
    pub method: ShapleyMethod,
    /// Per-player standard error of the mean; Monte Carlo only, NaN with a
    /// single sample.
    pub std_error: Option<Vec<f64>>,
}

impl ShapleyResult {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `id,shapley,std_error` CSV; the last column is empty for exact values.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "shapley", "std_error"])?;
        for (i, v) in self.values.iter().enumerate() {
            let se = match &self.std_error {
                Some(se) => se[i].to_string(),
                None => String::new(),
            };
            w.write_record([i.to_string(), v.to_string(), se])?;
        }
        w.flush().map_err(|e| Error::io("<shapley>", e))?;
        Ok(())
    }
}

/// Exact Shapley values for an arbitrary characteristic function over `n`
/// players.
pub fn exact<F>(n: usize, phi: F) -> Result<ShapleyResult>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    if n > MAX_TABLE_N {
        return Err(Error::SizeLimit {
            what: "exact Shapley enumeration (use Monte Carlo sampling instead)",
            n,
            limit: MAX_TABLE_N,
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("Shapley values need n >= 1".into()));
    }
    let table: Vec<f64> = (0..1u64 << n)
        .into_par_iter()
        .map(|m| phi(Coalition::from_bits(m)))
        .collect();

    // weight[k] = k!(n-k-1)!/n! = 1 / (n * C(n-1, k))
    let mut weight = Vec::with_capacity(n);
    let mut binom = 1.0f64;
    for k in 0..n {
        weight.push(1.0 / (n as f64 * binom));
        binom = binom * (n - 1 - k) as f64 / (k + 1) as f64;
    }

    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let bit = 1usize << i;
            let mut acc = 0.0;
            for s in 0..table.len() {
                if s & bit == 0 {
                    let k = s.count_ones() as usize;
                    acc += weight[k] * (table[s | bit] - table[s]);
                }
            }
            acc
        })
        .collect();

    Ok(ShapleyResult {
        values,
        method: ShapleyMethod::Exact,
        std_error: None,
    })
}

/// Marginal contribution of each player when joining in `order`. The
/// contributions telescope to `φ(all) - φ(∅)`.
pub fn ordering_contributions<F>(n: usize, phi: &F, order: &[usize]) -> Vec<f64>
where
    F: Fn(Coalition) -> f64,
{
    let mut out = vec![0.0; n];
    let mut s = Coalition::EMPTY;
    let mut prev = phi(s);
    for &p in order {
        s = s.with(DatasetId::new(p));
        let cur = phi(s);
        out[p] = cur - prev;
        prev = cur;
    }
    out
}

/// The ordering used by Monte Carlo sample `index` under `seed`.
pub fn sample_ordering(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, index));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Permutation-sampling estimate of the Shapley values.
pub fn monte_carlo<F>(n: usize, phi: F, samples: usize, seed: u64) -> Result<ShapleyResult>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("Monte Carlo Shapley needs samples >= 1".into()));
    }
    if n == 0 || n > MAX_CATALOG_N {
        return Err(Error::SizeLimit {
            what: "Monte Carlo Shapley",
            n,
            limit: MAX_CATALOG_N,
        });
    }
    // Welford accumulators, updated strictly in sample order.
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut seen = 0u64;
    let mut start = 0usize;
    while start < samples {
        let end = (start + MC_CHUNK).min(samples);
        let chunk: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|i| ordering_contributions(n, &phi, &sample_ordering(n, seed, i as u64)))
            .collect();
        for contrib in chunk {
            seen += 1;
            for (j, x) in contrib.into_iter().enumerate() {
                let delta = x - mean[j];
                mean[j] += delta / seen as f64;
                m2[j] += delta * (x - mean[j]);
            }
        }
        start = end;
    }
    let std_error = m2
        .iter()
        .map(|&m| {
            if samples < 2 {
                f64::NAN
            } else {
                (m / (samples - 1) as f64 / samples as f64).sqrt()
            }
        })
        .collect();
    Ok(ShapleyResult {
        values: mean,
        method: ShapleyMethod::MonteCarlo { samples, seed },
        std_error: Some(std_error),
    })
}

/// Exact Shapley values of the datasets behind `oracle`, valued through `vf`.
pub fn shapley_exact(oracle: &dyn AccuracyOracle, vf: &ValueFunction) -> Result<ShapleyResult> {
    exact(oracle.len(), |s| vf.eval(oracle.accuracy(s)))
}

pub fn shapley_monte_carlo(
    oracle: &dyn AccuracyOracle,
    vf: &ValueFunction,
    samples: usize,
    seed: u64,
) -> Result<ShapleyResult> {
    monte_carlo(oracle.len(), |s| vf.eval(oracle.accuracy(s)), samples, seed)
}

pub fn shapley(oracle: &dyn AccuracyOracle, vf: &ValueFunction, method: ShapleyMethod) -> Result<ShapleyResult> {
    match method {
        ShapleyMethod::Exact => shapley_exact(oracle, vf),
        ShapleyMethod::MonteCarlo { samples, seed } => shapley_monte_carlo(oracle, vf, samples, seed),
    }
}
