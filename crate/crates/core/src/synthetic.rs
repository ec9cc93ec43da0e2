//! Parametric accuracy model driven by a marginal utility profile (MUP) and a
//! data interchangeability ratio (DI).
//!
//! Dataset `k` carries weight `DI^(k+1)`; a coalition's accuracy is its share
//! of the total weight raised to `MUP`. `MUP < 1` gives diminishing returns,
//! `MUP > 1` increasing ones, and `DI = 1` makes all datasets interchangeable.

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::MAX_CATALOG_N;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModel {
    mup: f64,
    di: f64,
    weights: Vec<f64>,
    weight_total: f64,
}

impl SyntheticModel {
    pub fn new(n: usize, mup: f64, di: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("synthetic model needs n >= 1".into()));
        }
        if n > MAX_CATALOG_N {
            return Err(Error::SizeLimit {
                what: "synthetic model",
                n,
                limit: MAX_CATALOG_N,
            });
        }
        if !(mup > 0.0 && mup.is_finite()) {
            return Err(Error::InvalidParameter(format!("MUP must be > 0, got {mup}")));
        }
        if !(di >= 1.0 && di.is_finite()) {
            return Err(Error::InvalidParameter(format!("DI must be >= 1, got {di}")));
        }
        let weights: Vec<f64> = (1..=n as i32).map(|i| di.powi(i)).collect();
        let weight_total: f64 = weights.iter().sum();
        if !weight_total.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "DI = {di} overflows the weights of an n = {n} catalog"
            )));
        }
        Ok(SyntheticModel {
            mup,
            di,
            weights,
            weight_total,
        })
    }

    pub fn mup(&self) -> f64 {
        self.mup
    }

    pub fn di(&self) -> f64 {
        self.di
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Share of total weight held by `s`.
    pub fn weight_fraction(&self, s: Coalition) -> f64 {
        let w: f64 = s.iter().map(|id| self.weights[id.index()]).sum();
        w / self.weight_total
    }
}

impl AccuracyOracle for SyntheticModel {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn accuracy(&self, s: Coalition) -> f64 {
        debug_assert!(s.is_subset_of(Coalition::full(self.weights.len())));
        if s.is_empty() {
            return 0.0;
        }
        self.weight_fraction(s).powf(self.mup)
    }

    fn max_accuracy(&self) -> f64 {
        1.0
    }
}
