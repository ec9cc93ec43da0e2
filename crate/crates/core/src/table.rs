//! File-backed coalition accuracy table.
//!
//! Rows give measured accuracies for some coalitions; any coalition without a
//! row is taken as accuracy 0. Because a buyer holding `S` can always train on
//! any subset of `S`, the served accuracy is the best raw accuracy over all
//! subsets, which makes the oracle monotone. Partial tables (for example only
//! singletons and the grand coalition) therefore load fine but understate
//! mid-size coalitions.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::oracle::AccuracyOracle;
use crate::MAX_TABLE_N;

#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionTable {
    n: usize,
    raw: HashMap<u64, f64>,
    monotone: Vec<f64>,
    a_star: f64,
}

impl CoalitionTable {
    /// Builds a table from `(bitmask, accuracy)` entries.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        check_size(n)?;
        let mut raw = HashMap::new();
        for (mask, acc) in entries {
            validate_entry(n, mask, acc).map_err(Error::InvalidParameter)?;
            if raw.insert(mask, acc).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate coalition {mask}")));
            }
        }
        CoalitionTable::finish(n, raw).map_err(Error::InvalidParameter)
    }

    /// Dense table: `values[mask]` is the raw accuracy of coalition `mask`.
    pub fn from_dense(n: usize, values: &[f64]) -> Result<Self> {
        check_size(n)?;
        if values.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "dense table for n = {n} needs {} values, got {}",
                1u64 << n,
                values.len()
            )));
        }
        CoalitionTable::from_entries(n, values.iter().enumerate().map(|(m, &a)| (m as u64, a)))
    }

    pub fn read_csv<R: Read>(reader: R, n: usize, origin: &Path) -> Result<Self> {
        check_size(n)?;
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["coalition", "accuracy"] {
            return Err(Error::load(origin, 1, "expected header `coalition,accuracy`"));
        }
        let mut raw = HashMap::new();
        for (k, record) in rdr.records().enumerate() {
            let line = k as u64 + 2;
            let record = record.map_err(|e| Error::load(origin, line, e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::load(origin, line, "expected 2 fields"));
            }
            let mask: u64 = record[0]
                .parse()
                .map_err(|_| Error::load(origin, line, format!("bad coalition mask {:?}", &record[0])))?;
            let acc: f64 = record[1]
                .parse()
                .map_err(|_| Error::load(origin, line, format!("bad accuracy {:?}", &record[1])))?;
            validate_entry(n, mask, acc).map_err(|m| Error::load(origin, line, m))?;
            if raw.insert(mask, acc).is_some() {
                return Err(Error::load(origin, line, format!("duplicate coalition {mask}")));
            }
        }
        CoalitionTable::finish(n, raw).map_err(|m| Error::load(origin, 0, m))
    }

    pub fn load(path: &Path, n: usize) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        CoalitionTable::read_csv(file, n, path)
    }

    fn finish(n: usize, raw: HashMap<u64, f64>) -> std::result::Result<Self, String> {
        let size = 1usize << n;
        let mut monotone = vec![0.0; size];
        for (&mask, &acc) in &raw {
            monotone[mask as usize] = acc;
        }
        monotonize(&mut monotone);
        let a_star = monotone[size - 1];
        if a_star <= 0.0 {
            return Err("table has no coalition with positive accuracy".into());
        }
        Ok(CoalitionTable {
            n,
            raw,
            monotone,
            a_star,
        })
    }

    /// Measured accuracy of `s` as loaded, before monotonization.
    pub fn raw(&self, s: Coalition) -> Option<f64> {
        self.raw.get(&s.bits()).copied()
    }

    /// Dense monotonized accuracies indexed by bitmask.
    pub fn monotone(&self) -> &[f64] {
        &self.monotone
    }
}

/// In-place subset-max closure over a dense table indexed by bitmask:
/// `t[S] = max(t[S], max_i t[S \ {i}])`, visiting masks in increasing order so
/// every proper subset is final before its supersets.
pub fn monotonize(t: &mut [f64]) {
    debug_assert!(t.len().is_power_of_two());
    for mask in 1..t.len() {
        let mut best = t[mask];
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            best = best.max(t[mask ^ bit]);
            rest ^= bit;
        }
        t[mask] = best;
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("coalition table needs n >= 1".into()));
    }
    if n > MAX_TABLE_N {
        return Err(Error::SizeLimit {
            what: "coalition table",
            n,
            limit: MAX_TABLE_N,
        });
    }
    Ok(())
}

fn validate_entry(n: usize, mask: u64, acc: f64) -> std::result::Result<(), String> {
    if mask >> n != 0 {
        return Err(format!("coalition {mask} references datasets beyond n = {n}"));
    }
    if !(0.0..=1.0).contains(&acc) {
        return Err(format!("accuracy {acc} outside [0, 1]"));
    }
    if mask == 0 && acc != 0.0 {
        return Err(format!("empty coalition must have accuracy 0, got {acc}"));
    }
    Ok(())
}

impl AccuracyOracle for CoalitionTable {
    fn len(&self) -> usize {
        self.n
    }

    fn accuracy(&self, s: Coalition) -> f64 {
        self.monotone[s.bits() as usize]
    }

    fn max_accuracy(&self) -> f64 {
        self.a_star
    }
}
