use std::cell::Cell;

use crate::coalition::Coalition;

/// Maps a coalition of datasets to the accuracy the buyer's task reaches on
/// their aggregated data.
///
/// Implementations guarantee `accuracy(∅) = 0`, `accuracy(S) <= max_accuracy()`
/// and monotonicity under set inclusion. They hold no mutable state, so one
/// oracle can be shared by concurrent runs; query accounting lives in
/// [`QueryCounter`], which each run owns.
pub trait AccuracyOracle: Send + Sync {
    /// Number of datasets the oracle covers.
    fn len(&self) -> usize;

    fn accuracy(&self, s: Coalition) -> f64;

    /// Best attainable accuracy `a*`, reached by the grand coalition.
    fn max_accuracy(&self) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<O: AccuracyOracle + ?Sized> AccuracyOracle for &O {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn accuracy(&self, s: Coalition) -> f64 {
        (**self).accuracy(s)
    }
    fn max_accuracy(&self) -> f64 {
        (**self).max_accuracy()
    }
}

/// Run-local view of an oracle that counts every accuracy query.
pub struct QueryCounter<'a> {
    oracle: &'a dyn AccuracyOracle,
    queries: Cell<u64>,
}

impl<'a> QueryCounter<'a> {
    pub fn new(oracle: &'a dyn AccuracyOracle) -> Self {
        QueryCounter {
            oracle,
            queries: Cell::new(0),
        }
    }

    pub fn accuracy(&self, s: Coalition) -> f64 {
        self.queries.set(self.queries.get() + 1);
        self.oracle.accuracy(s)
    }

    pub fn max_accuracy(&self) -> f64 {
        self.oracle.max_accuracy()
    }

    pub fn len(&self) -> usize {
        self.oracle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oracle.is_empty()
    }

    pub fn queries(&self) -> u64 {
        self.queries.get()
    }
}
