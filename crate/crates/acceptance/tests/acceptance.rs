//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts it. Run with `--nocapture` to see the lines of passing tests.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tbyb::harness::{self, Cell, ExperimentConfig, GridOutcome};
use tbyb::pricing::{apply_pricing, VolumeGenerator};
use tbyb::shapley;
use tbyb::strategies::{self, StrategyConfig, StrategyKind};
use tbyb::{
    AccuracyOracle, Catalog, Coalition, CoalitionTable, PricingKind, PricingScheme, SyntheticModel, ValueFunction,
};

const SEED: u64 = 1;
const REPS: usize = 50;
const LAMBDA: f64 = 0.1;
const TCODS: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0];

const A_TBYB_FLOOR: f64 = 0.95;
const S_TBYB_FLOOR: f64 = 0.85;
const PRICE_HEURISTIC_CEILING: f64 = 0.6;
const ORDERING_SHARE: f64 = 0.9;
const GRID_BUDGET: Duration = Duration::from_secs(30);
const SHAPLEY_BUDGET: Duration = Duration::from_secs(10);
/// Largest volume-minus-price profit advantage that still counts as vanished.
const VANISHED: f64 = 0.005;

/// Goes straight to the stderr handle, which the test harness does not
/// capture, so every criterion reports even without `--nocapture`.
fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{verdict} criterion {id:>2} {name}: {detail}");
}

fn check(id: u32, name: &str, pass: bool, detail: String) {
    report(id, name, pass, &detail);
    assert!(pass, "criterion {id} {name}: {detail}");
}

struct MainGrid {
    outcome: GridOutcome,
    elapsed: Duration,
}

/// N = 10, DI = 2, lambda = 0.1, uniform and random pricing, all strategies.
fn main_grid() -> &'static MainGrid {
    static GRID: OnceLock<MainGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let cfg = ExperimentConfig::from_json(&format!(
            r#"{{
              "oracle": {{"kind": "synthetic", "n": 10, "mup": [0.5, 1, 3], "di": 2}},
              "pricing": {{"kind": ["uniform", "random"], "tcod": {TCODS:?}}},
              "strategies": [{{"kind": "optimal"}}, {{"kind": "a_tbyb"}}, {{"kind": "s_tbyb"}},
                             {{"kind": "volume_heuristic"}}, {{"kind": "price_heuristic"}}],
              "grid": {{"lambda": {LAMBDA}, "repetitions": {REPS}, "base_seed": {SEED}}}
            }}"#
        ))
        .expect("grid config parses");
        let start = Instant::now();
        let outcome = harness::run_grid(&cfg).expect("grid runs");
        let elapsed = start.elapsed();
        assert!(outcome.errors.is_empty(), "{:?}", outcome.errors);
        MainGrid { outcome, elapsed }
    })
}

fn cell_is(mup: f64, pricing: PricingKind, tcod: f64) -> impl Fn(&Cell) -> bool {
    move |c| c.mup == Some(mup) && c.pricing == pricing && c.tcod == tcod
}

fn relative_floor_check(id: u32, name: &str, strategy: &str, floor: f64, budget: Option<Duration>) {
    let grid = main_grid();
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for mup in [0.5, 1.0] {
        for pricing in [PricingKind::Uniform, PricingKind::Random] {
            for tcod in TCODS {
                let row = grid
                    .outcome
                    .row(cell_is(mup, pricing, tcod), strategy)
                    .expect("row present");
                if let Some(rel) = row.mean_relative_profit {
                    checked += 1;
                    worst = worst.min(rel);
                    if rel < floor {
                        failures.push(format!("mup={mup} {pricing} tcod={tcod}: {rel:.4}"));
                    }
                }
            }
        }
    }
    let in_time = budget.is_none_or(|b| grid.elapsed < b);
    let pass = failures.is_empty() && checked > 0 && in_time;
    let mut detail = format!(
        "{} of {checked} defined cells below {floor}; worst {worst:.4}; grid time {:.2?}",
        failures.len(),
        grid.elapsed
    );
    if !failures.is_empty() {
        detail.push_str(&format!(" [{}]", failures.join("; ")));
    }
    check(id, name, pass, detail);
}

#[test]
fn criterion_01_a_tbyb_matches_optimal() {
    relative_floor_check(1, "a_tbyb optimality", "a_tbyb", A_TBYB_FLOOR, Some(GRID_BUDGET));
}

#[test]
fn criterion_02_s_tbyb_near_optimal() {
    relative_floor_check(2, "s_tbyb near-optimality", "s_tbyb", S_TBYB_FLOOR, None);
}

#[test]
fn criterion_03_price_heuristic_collapses() {
    let grid = main_grid();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut defined = 0;
    for tcod in TCODS.into_iter().filter(|&t| t >= 2.0) {
        let row = grid
            .outcome
            .row(cell_is(1.0, PricingKind::Random, tcod), "price_heuristic")
            .expect("row present");
        match row.mean_relative_profit {
            Some(rel) => {
                defined += 1;
                pass &= rel <= PRICE_HEURISTIC_CEILING;
                parts.push(format!("tcod={tcod}: {rel:.4}"));
            }
            None => parts.push(format!("tcod={tcod}: undefined")),
        }
    }
    pass &= defined > 0;
    check(
        3,
        "price heuristic collapse",
        pass,
        format!("ceiling {PRICE_HEURISTIC_CEILING} [{}]", parts.join("; ")),
    );
}

#[test]
fn criterion_04_convex_regime_ordering() {
    let grid = main_grid();
    let mut total = 0;
    let mut ordered = 0;
    let mut misses = Vec::new();
    for pricing in [PricingKind::Uniform, PricingKind::Random] {
        for tcod in TCODS.into_iter().filter(|&t| t >= 1.0) {
            let mean = |s: &str| {
                grid.outcome
                    .row(cell_is(3.0, pricing, tcod), s)
                    .expect("row present")
                    .mean_profit
            };
            let (opt, a, s) = (mean("optimal"), mean("a_tbyb"), mean("s_tbyb"));
            let heur = mean("volume_heuristic").max(mean("price_heuristic"));
            total += 1;
            if opt >= a && a >= s && s >= heur {
                ordered += 1;
            } else {
                misses.push(format!("{pricing} tcod={tcod}: {opt:.4}/{a:.4}/{s:.4}/{heur:.4}"));
            }
        }
    }
    let share = ordered as f64 / total as f64;
    let mut detail = format!(
        "{ordered}/{total} cells ordered ({:.0}%), need {:.0}%",
        share * 100.0,
        ORDERING_SHARE * 100.0
    );
    if !misses.is_empty() {
        detail.push_str(&format!(
            " [optimal/a_tbyb/s_tbyb/best heuristic: {}]",
            misses.join("; ")
        ));
    }
    check(4, "convex regime ordering", share >= ORDERING_SHARE, detail);
}

#[test]
fn criterion_05_interchangeability_shrinks_gap() {
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{
          "oracle": {{"kind": "synthetic", "n": 10, "mup": 1, "di": [1, 3]}},
          "pricing": {{"kind": "uniform", "tcod": [2, 3, 4]}},
          "strategies": [{{"kind": "optimal"}}, {{"kind": "s_tbyb"}}, {{"kind": "price_heuristic"}}],
          "grid": {{"lambda": {LAMBDA}, "repetitions": {REPS}, "base_seed": {SEED}}}
        }}"#
    ))
    .unwrap();
    let out = harness::run_grid(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for tcod in [2.0, 3.0, 4.0] {
        let row = |di: f64, s: &str| {
            out.row(|c| c.di == Some(di) && c.tcod == tcod, s)
                .expect("row present")
                .clone()
        };
        let (s1, p1, s3, p3) = (
            row(1.0, "s_tbyb"),
            row(1.0, "price_heuristic"),
            row(3.0, "s_tbyb"),
            row(3.0, "price_heuristic"),
        );
        // Relative profit is undefined when nothing is worth buying; both
        // games have v(a*) = 1, so absolute profits share a scale.
        let (g1, g3, unit) = match (
            s1.mean_relative_profit,
            p1.mean_relative_profit,
            s3.mean_relative_profit,
            p3.mean_relative_profit,
        ) {
            (Some(a), Some(b), Some(c), Some(d)) => (a - b, c - d, "relative"),
            _ => (
                s1.mean_profit - p1.mean_profit,
                s3.mean_profit - p3.mean_profit,
                "absolute",
            ),
        };
        pass &= g1 < g3;
        parts.push(format!("tcod={tcod}: di=1 gap {g1:.4} vs di=3 gap {g3:.4} ({unit})"));
    }
    check(5, "interchangeability effect", pass, parts.join("; "));
}

/// Independent Shapley oracle: average marginal contribution over every
/// ordering, generated by Heap's algorithm.
fn brute_force_shapley(n: usize, phi: &dyn Fn(u64) -> f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut sums = vec![0.0; n];
    let mut count = 0u64;
    let mut visit = |order: &[usize]| {
        let mut mask = 0u64;
        let mut prev = phi(0);
        for &p in order {
            mask |= 1 << p;
            let cur = phi(mask);
            sums[p] += cur - prev;
            prev = cur;
        }
        count += 1;
    };
    let mut c = vec![0usize; n];
    visit(&order);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    sums.iter().map(|s| s / count as f64).collect()
}

/// Closed-form game value with the synthetic weights, written independently
/// of the library model.
fn synthetic_value(n: usize, mup: f64, di: f64) -> impl Fn(u64) -> f64 {
    let w: Vec<f64> = (1..=n as i32).map(|k| di.powi(k)).collect();
    let total: f64 = w.iter().sum();
    move |mask| {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum();
        (s / total).powf(mup)
    }
}

#[test]
fn criterion_06_shapley_axioms() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut eff, mut sym, mut dummy, mut brute) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut brute_games = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=8usize);
        let mup = rng.random_range(0.3..3.0);
        let di = rng.random_range(1.0..3.0);
        let model = SyntheticModel::new(n, mup, di).unwrap();
        let res = shapley::shapley_exact(&model, &ValueFunction::Identity).unwrap();
        eff = eff.max((res.total() - model.accuracy(Coalition::full(n))).abs());

        let flat = SyntheticModel::new(n, mup, 1.0).unwrap();
        let fv = shapley::shapley_exact(&flat, &ValueFunction::Identity).unwrap().values;
        let (lo, hi) = fv
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        sym = sym.max(hi - lo);

        if n < 8 {
            // player d contributes nothing: drop its bit and evaluate the base game
            let d = rng.random_range(0..=n);
            let base = synthetic_value(n, mup, di);
            let game = move |s: Coalition| {
                let b = s.bits();
                let low = b & ((1u64 << d) - 1);
                let high = (b >> (d + 1)) << d;
                base(low | high)
            };
            let dv = shapley::exact(n + 1, game).unwrap().values;
            dummy = dummy.max(dv[d].abs());
        }

        if n <= 5 {
            brute_games += 1;
            let f = synthetic_value(n, mup, di);
            let bf = brute_force_shapley(n, &f);
            for (a, b) in res.values.iter().zip(&bf) {
                brute = brute.max((a - b).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = eff <= 1e-9 && sym <= 1e-9 && dummy <= 1e-12 && brute <= 1e-9 && elapsed < SHAPLEY_BUDGET;
    check(
        6,
        "shapley axioms",
        pass,
        format!(
            "200 games: efficiency {eff:.2e} (<=1e-9), symmetry {sym:.2e} (<=1e-9), dummy {dummy:.2e} (<=1e-12), \
             brute force over {brute_games} games {brute:.2e} (<=1e-9), {elapsed:.2?}"
        ),
    );
}

struct Instance {
    oracle: SyntheticModel,
    catalog: Catalog,
    lambda: f64,
}

/// 500 random priced instances shared by the dominance and query checks.
fn corpus() -> &'static [Instance] {
    static CORPUS: OnceLock<Vec<Instance>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..500)
            .map(|i| {
                let n = rng.random_range(1..=10usize);
                let mup = rng.random_range(0.3..=3.0);
                let di = rng.random_range(1.0..=3.0);
                let tcod = rng.random_range(0.1..6.0);
                let kind = PricingKind::ALL[i % PricingKind::ALL.len()];
                let lambda = [0.0, 0.1, 0.5][i % 3];
                let oracle = SyntheticModel::new(n, mup, di).unwrap();
                let volumes = VolumeGenerator::Uniform.generate(n, di, rng.random()).unwrap();
                let scheme = PricingScheme::new(kind, tcod).with_seed(rng.random());
                let catalog = apply_pricing(
                    &Catalog::with_volumes(&volumes).unwrap(),
                    &scheme,
                    &oracle,
                    &ValueFunction::Identity,
                )
                .unwrap();
                Instance {
                    oracle,
                    catalog,
                    lambda,
                }
            })
            .collect()
    })
}

#[test]
fn criterion_07_dominance() {
    let vf = ValueFunction::Identity;
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (i, inst) in corpus().iter().enumerate() {
        let opt = strategies::run(
            &inst.catalog,
            &inst.oracle,
            &vf,
            &StrategyConfig::new(StrategyKind::Optimal),
        )
        .unwrap()
        .final_profit;
        for kind in StrategyKind::ALL {
            let cfg = StrategyConfig::new(kind).with_lambda(inst.lambda).with_seed(i as u64);
            let p = strategies::run(&inst.catalog, &inst.oracle, &vf, &cfg)
                .unwrap()
                .final_profit;
            worst = worst.max(p - opt);
            if p > opt + 1e-9 {
                violations.push(format!("instance {i} {kind}: {p} > {opt}"));
            }
        }
    }
    check(
        7,
        "dominance",
        violations.is_empty(),
        format!(
            "500 instances x 5 strategies; max excess over optimal {worst:.2e} (<=1e-9); {} violations",
            violations.len()
        ),
    );
}

#[test]
fn criterion_08_monotonization_matches_subset_max() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    let mut coalitions = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=8usize);
        let full = (1u64 << n) - 1;
        let mut raw: HashMap<u64, f64> = HashMap::new();
        for mask in 1..=full {
            if rng.random_bool(0.5) {
                raw.insert(mask, rng.random::<f64>());
            }
        }
        if !raw.values().any(|&a| a > 0.0) {
            raw.insert(full, 0.5);
        }
        let table = CoalitionTable::from_entries(n, raw.iter().map(|(&m, &a)| (m, a))).unwrap();
        for s in 0..=full {
            // every submask t of s, including s and the empty set
            let mut best = 0.0f64;
            let mut t = s;
            loop {
                best = best.max(raw.get(&t).copied().unwrap_or(0.0));
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            coalitions += 1;
            if table.accuracy(Coalition::from_bits(s)) != best {
                mismatches += 1;
            }
        }
    }
    check(
        8,
        "monotonization oracle",
        mismatches == 0,
        format!("100 tables, {coalitions} coalitions, {mismatches} inexact"),
    );
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

#[test]
fn criterion_09_volume_vs_price_crossover() {
    let low = [0.5, 1.0, 2.0, 3.0];
    let high = [8.0, 10.0, 12.0];
    let tcods: Vec<f64> = low.iter().chain(&high).copied().collect();
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{
          "oracle": {{"kind": "table", "path": {:?}, "catalog": {:?}}},
          "pricing": {{"kind": "random", "tcod": {tcods:?}}},
          "strategies": [{{"kind": "volume_heuristic"}}, {{"kind": "price_heuristic"}}],
          "grid": {{"lambda": {LAMBDA}, "repetitions": {REPS}, "base_seed": {SEED}}}
        }}"#,
        fixture("sellers16_table.csv"),
        fixture("sellers16_catalog.csv"),
    ))
    .unwrap();
    let out = harness::run_grid(&cfg).unwrap();
    let advantage = |tcod: f64| {
        let m = |s: &str| out.row(|c| c.tcod == tcod, s).expect("row present").mean_profit;
        m("volume_heuristic") - m("price_heuristic")
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for t in low {
        let a = advantage(t);
        pass &= a >= 0.0;
        parts.push(format!("tcod={t}: {a:+.4} (need >= 0)"));
    }
    for t in high {
        let a = advantage(t);
        pass &= a <= VANISHED;
        parts.push(format!("tcod={t}: {a:+.4} (need <= {VANISHED})"));
    }
    check(
        9,
        "volume vs price crossover",
        pass,
        format!("volume minus price mean profit: {}", parts.join("; ")),
    );
}

#[test]
fn criterion_10_determinism() {
    let text = r#"{
      "oracle": {"kind": "synthetic", "n": 8, "mup": [0.5, 3], "di": [1.5, 2]},
      "pricing": {"kind": ["uniform", "random", "shapley"], "tcod": [0.5, 2, 4]},
      "strategies": [{"kind": "optimal"}, {"kind": "a_tbyb"}, {"kind": "s_tbyb"},
                     {"kind": "volume_heuristic"}, {"kind": "price_heuristic"}],
      "grid": {"lambda": [0, 0.1], "repetitions": 10, "base_seed": 42}
    }"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut csvs = Vec::new();
    for (dir, workers) in dirs.iter().zip([1, 4]) {
        let report = harness::with_workers(Some(workers), || harness::sweep(&cfg, text.as_bytes(), dir.path()))
            .unwrap()
            .unwrap();
        csvs.push(std::fs::read(report.experiment_csv).unwrap());
    }
    let sweep_same = csvs[0] == csvs[1];

    let model = SyntheticModel::new(12, 1.7, 1.4).unwrap();
    let bits = |workers: usize| {
        let r = harness::with_workers(Some(workers), || {
            shapley::shapley_monte_carlo(&model, &ValueFunction::Identity, 5000, 9).unwrap()
        })
        .unwrap();
        let se = r.std_error.unwrap();
        r.values.iter().chain(&se).map(|v| v.to_bits()).collect::<Vec<u64>>()
    };
    let reference = bits(1);
    let mc_same = [2, 3, 8].iter().all(|&w| bits(w) == reference);
    check(
        10,
        "determinism",
        sweep_same && mc_same,
        format!(
            "sweep csv identical across runs (1 vs 4 workers): {sweep_same}; \
             Monte Carlo Shapley bit-identical for 1/2/3/8 workers: {mc_same}"
        ),
    );
}

#[test]
fn criterion_11_a_tbyb_query_bound() {
    let vf = ValueFunction::Identity;
    let mut violations = 0;
    let mut max_queries = 0;
    for inst in corpus() {
        let n = inst.catalog.len() as u64;
        let cfg = StrategyConfig::new(StrategyKind::ATbyb).with_lambda(inst.lambda);
        let t = strategies::run(&inst.catalog, &inst.oracle, &vf, &cfg).unwrap();
        let r = t.evaluated_rounds as u64;
        let bound: u64 = (0..r).map(|i| n - i).sum();
        max_queries = max_queries.max(t.queries);
        if t.queries > bound {
            violations += 1;
        }
    }
    check(
        11,
        "a_tbyb query bound",
        violations == 0,
        format!("500 runs, queries <= sum_(i<r)(N - i) with r evaluated rounds; {violations} violations; max {max_queries} queries"),
    );
}
