//! Data purchasing strategies for data marketplaces.
//!
//! A buyer faces a catalog of datasets, each with a price, and an accuracy
//! oracle that scores any coalition of datasets for the buyer's ML task.
//! This crate implements the full-information optimal purchase, the two
//! try-before-you-buy strategies (stand-alone and assisted), and two
//! value-agnostic heuristics (volume-based and price-based), together with
//! the synthetic MUP/DI accuracy model, a file-backed coalition table,
//! Shapley valuation, pricing schemes and a parameter-sweep harness.

pub mod catalog;
pub mod coalition;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod plot;
pub mod pricing;
pub mod seed;
pub mod shapley;
pub mod strategies;
pub mod synthetic;
pub mod table;
pub mod trace;
pub mod value;

pub use catalog::{Catalog, Dataset, DatasetId};
pub use coalition::Coalition;
pub use error::{Error, Result};
pub use oracle::{AccuracyOracle, QueryCounter};
pub use pricing::{PricingKind, PricingScheme, VolumeGenerator};
pub use shapley::{ShapleyMethod, ShapleyResult};
pub use strategies::{StrategyConfig, StrategyKind};
pub use synthetic::SyntheticModel;
pub use table::CoalitionTable;
pub use trace::{PurchaseState, PurchaseTrace, Round, StopReason};
pub use value::ValueFunction;

/// Largest catalog accepted by the exhaustive paths (optimal purchase).
pub const MAX_EXHAUSTIVE_N: usize = 24;
/// Largest catalog accepted by exact Shapley enumeration and coalition tables.
pub const MAX_TABLE_N: usize = 20;
/// Largest catalog representable by a [`Coalition`] bitset.
pub const MAX_CATALOG_N: usize = 64;
