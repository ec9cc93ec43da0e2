use std::fmt;

use crate::catalog::DatasetId;

/// A subset of a catalog, stored as a bitset: bit `i` is set iff dataset `i`
/// is a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub const fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The grand coalition of an `n`-dataset catalog.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 64);
        if n == 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn singleton(id: DatasetId) -> Self {
        Coalition(1u64 << id.index())
    }

    pub fn contains(self, id: DatasetId) -> bool {
        self.0 >> id.index() & 1 == 1
    }

    #[must_use]
    pub fn with(self, id: DatasetId) -> Self {
        Coalition(self.0 | 1u64 << id.index())
    }

    #[must_use]
    pub fn without(self, id: DatasetId) -> Self {
        Coalition(self.0 & !(1u64 << id.index()))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    #[must_use]
    pub fn union(self, other: Coalition) -> Self {
        Coalition(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: Coalition) -> Self {
        Coalition(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: Coalition) -> Self {
        Coalition(self.0 & !other.0)
    }

    /// Members in ascending id order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }
}

impl FromIterator<DatasetId> for Coalition {
    fn from_iter<I: IntoIterator<Item = DatasetId>>(iter: I) -> Self {
        iter.into_iter().fold(Coalition::EMPTY, Coalition::with)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|id| id.index())).finish()
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = DatasetId;

    fn next(&mut self) -> Option<DatasetId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(DatasetId::new(i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Members {}
