//! The bundled 16-seller table and catalog.

use std::path::PathBuf;

use tbyb::shapley;
use tbyb::{AccuracyOracle, Catalog, Coalition, CoalitionTable, ValueFunction};

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load() -> (Catalog, CoalitionTable) {
    let catalog = Catalog::load(&path("sellers16_catalog.csv")).unwrap();
    let table = CoalitionTable::load(&path("sellers16_table.csv"), catalog.len()).unwrap();
    (catalog, table)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[test]
fn shape_and_best_accuracy() {
    let (catalog, table) = load();
    assert_eq!(catalog.len(), 16);
    assert_eq!(table.max_accuracy(), 0.896294);
    assert_eq!(table.accuracy(Coalition::EMPTY), 0.0);
    // every nonempty coalition is measured
    for mask in 1u64..(1 << 16) {
        assert!(table.raw(Coalition::from_bits(mask)).is_some());
    }
    assert!(catalog.volumes().iter().all(|&v| v >= 1.0 && v.fract() == 0.0));
    assert!((catalog.tcod() - 1.0).abs() < 1e-4);
}

#[test]
fn monotone_closure_only_smooths_noise() {
    let (_, table) = load();
    let mut lifted = 0;
    let mut worst = 0.0f64;
    for mask in 1u64..(1 << 16) {
        let s = Coalition::from_bits(mask);
        let raw = table.raw(s).unwrap();
        let served = table.accuracy(s);
        assert!(served >= raw);
        if served > raw {
            lifted += 1;
            worst = worst.max(served - raw);
        }
    }
    assert!(lifted > 0);
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn value_heterogeneity_and_volume_correlation() {
    let (catalog, table) = load();
    let phi = shapley::shapley_exact(&table, &ValueFunction::Identity).unwrap().values;
    let m = mean(&phi);
    let sd = (phi.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / phi.len() as f64).sqrt();
    assert!((sd / m - 0.76).abs() < 0.02, "cv {}", sd / m);

    let vol = catalog.volumes();
    let mv = mean(&vol);
    let cov: f64 = phi.iter().zip(&vol).map(|(a, b)| (a - m) * (b - mv)).sum();
    let vv: f64 = vol.iter().map(|b| (b - mv) * (b - mv)).sum();
    let pp: f64 = phi.iter().map(|a| (a - m) * (a - m)).sum();
    let r2 = cov * cov / (vv * pp);
    assert!((r2 - 0.544).abs() < 0.03, "r2 {r2}");
}
