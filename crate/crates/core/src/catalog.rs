//! Sellers, datasets and catalogs.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::MAX_CATALOG_N;

/// Stable position of a dataset within its catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetId(usize);

impl DatasetId {
    pub const fn new(index: usize) -> Self {
        DatasetId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: DatasetId,
    pub price: f64,
    pub volume: f64,
}

/// Ordered, non-empty set of datasets with ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    datasets: Vec<Dataset>,
}

impl Catalog {
    pub fn new(datasets: Vec<Dataset>) -> Result<Self> {
        if datasets.is_empty() {
            return Err(Error::InvalidParameter(
                "catalog must contain at least one dataset".into(),
            ));
        }
        if datasets.len() > MAX_CATALOG_N {
            return Err(Error::SizeLimit {
                what: "catalog",
                n: datasets.len(),
                limit: MAX_CATALOG_N,
            });
        }
        for (i, d) in datasets.iter().enumerate() {
            if d.id.index() != i {
                return Err(Error::InvalidParameter(format!(
                    "dataset ids must be 0..n in order, found id {} at position {i}",
                    d.id
                )));
            }
            if !(d.price >= 0.0 && d.price.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "dataset {i} has invalid price {}",
                    d.price
                )));
            }
            if !(d.volume >= 0.0 && d.volume.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "dataset {i} has invalid volume {}",
                    d.volume
                )));
            }
        }
        Ok(Catalog { datasets })
    }

    /// Builds a catalog from parallel price and volume slices.
    pub fn from_parts(prices: &[f64], volumes: &[f64]) -> Result<Self> {
        if prices.len() != volumes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} prices but {} volumes",
                prices.len(),
                volumes.len()
            )));
        }
        Catalog::new(
            prices
                .iter()
                .zip(volumes)
                .enumerate()
                .map(|(i, (&price, &volume))| Dataset {
                    id: DatasetId::new(i),
                    price,
                    volume,
                })
                .collect(),
        )
    }

    /// Unpriced catalog of `n` datasets with the given volumes.
    pub fn with_volumes(volumes: &[f64]) -> Result<Self> {
        Catalog::from_parts(&vec![0.0; volumes.len()], volumes)
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn get(&self, id: DatasetId) -> &Dataset {
        &self.datasets[id.index()]
    }

    pub fn price(&self, id: DatasetId) -> f64 {
        self.datasets[id.index()].price
    }

    pub fn volume(&self, id: DatasetId) -> f64 {
        self.datasets[id.index()].volume
    }

    pub fn ids(&self) -> impl Iterator<Item = DatasetId> + '_ {
        self.datasets.iter().map(|d| d.id)
    }

    pub fn prices(&self) -> Vec<f64> {
        self.datasets.iter().map(|d| d.price).collect()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.datasets.iter().map(|d| d.volume).collect()
    }

    pub fn full(&self) -> Coalition {
        Coalition::full(self.len())
    }

    /// Total cost of data: the price of buying the whole catalog.
    pub fn tcod(&self) -> f64 {
        self.datasets.iter().map(|d| d.price).sum()
    }

    /// Sum of prices of the members of `s`, in ascending id order.
    pub fn cost(&self, s: Coalition) -> f64 {
        s.iter().map(|id| self.price(id)).sum()
    }

    /// Same datasets and volumes, new prices.
    pub fn repriced(&self, prices: &[f64]) -> Result<Self> {
        Catalog::from_parts(prices, &self.volumes())
    }

    pub fn read_csv<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            id: usize,
            price: f64,
            volume: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["id", "price", "volume"] {
            return Err(Error::load(origin, 1, "expected header `id,price,volume`"));
        }
        let mut datasets = Vec::new();
        for (k, row) in rdr.deserialize::<Row>().enumerate() {
            let line = k as u64 + 2;
            let row = row.map_err(|e| Error::load(origin, line, e.to_string()))?;
            if row.id != k {
                return Err(Error::load(
                    origin,
                    line,
                    format!("ids must ascend from 0, expected {k} got {}", row.id),
                ));
            }
            datasets.push(Dataset {
                id: DatasetId::new(row.id),
                price: row.price,
                volume: row.volume,
            });
        }
        Catalog::new(datasets).map_err(|e| Error::load(origin, 0, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Catalog::read_csv(file, path)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "price", "volume"])?;
        for d in &self.datasets {
            w.write_record([d.id.to_string(), d.price.to_string(), d.volume.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<catalog>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tcod_sums_prices() {
        let c = Catalog::from_parts(&[0.0; 4], &[1.0; 4]).unwrap();
        assert_eq!(c.tcod(), 0.0);
        let c = Catalog::from_parts(&[0.2, 0.3, 0.7], &[1.0; 3]).unwrap();
        assert!((c.tcod() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_negative() {
        assert!(Catalog::new(vec![]).is_err());
        assert!(Catalog::from_parts(&[-0.1], &[1.0]).is_err());
        assert!(Catalog::from_parts(&[0.1], &[-1.0]).is_err());
        assert!(Catalog::from_parts(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = Catalog::from_parts(&[0.25, 0.5, 1.0 / 3.0], &[10.0, 0.0, 2.5]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,price,volume\n0,0.25,10\n"));
        let back = Catalog::read_csv(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn csv_rejects_out_of_order_ids() {
        let text = "id,price,volume\n0,1,1\n2,1,1\n";
        let err = Catalog::read_csv(text.as_bytes(), Path::new("cat.csv")).unwrap_err();
        assert!(err.to_string().contains("cat.csv:3"), "{err}");
        let text = "idx,price,volume\n0,1,1\n";
        assert!(Catalog::read_csv(text.as_bytes(), Path::new("c")).is_err());
    }
}
