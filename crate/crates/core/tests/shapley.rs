use tbyb::shapley::{self, ShapleyMethod};
use tbyb::{AccuracyOracle, Coalition, SyntheticModel, ValueFunction};

#[test]
fn monte_carlo_agrees_with_exact_within_three_standard_errors() {
    let vf = ValueFunction::Identity;
    let m = SyntheticModel::new(8, 0.5, 2.0).unwrap();
    let exact = shapley::shapley_exact(&m, &vf).unwrap();
    let mc = shapley::shapley_monte_carlo(&m, &vf, 20_000, 31).unwrap();
    let se = mc.std_error.as_ref().unwrap();
    for (i, ((e, m), s)) in exact.values.iter().zip(&mc.values).zip(se).enumerate() {
        let gap = (e - m).abs();
        assert!(gap <= 3.0 * s, "player {i}: gap {gap} se {s}");
    }
    // every sampled ordering telescopes to v(N), so the sum is exact
    assert!((mc.total() - m.accuracy(Coalition::full(8))).abs() < 1e-9);
}

#[test]
fn monte_carlo_errors_are_calibrated() {
    // Across independent seeds, (estimate - exact) / std_error should look
    // standard normal for every player: no bias, honest error bars. (mup = 1
    // is additive, every marginal is exact and z is rounding noise.)
    let vf = ValueFunction::Identity;
    for (mup, di) in [(0.5, 1.3), (3.0, 1.7)] {
        let m = SyntheticModel::new(8, mup, di).unwrap();
        let exact = shapley::shapley_exact(&m, &vf).unwrap().values;
        let runs = 200;
        let mut z = vec![Vec::new(); 8];
        for seed in 0..runs as u64 {
            let mc = shapley::shapley_monte_carlo(&m, &vf, 1000, seed).unwrap();
            let se = mc.std_error.unwrap();
            for i in 0..8 {
                z[i].push((mc.values[i] - exact[i]) / se[i]);
            }
        }
        for (i, zi) in z.iter().enumerate() {
            let n = zi.len() as f64;
            let mean = zi.iter().sum::<f64>() / n;
            let sd = (zi.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            // sampling sd of the mean of 200 unit normals is about 0.07
            assert!(mean.abs() < 0.25, "mup {mup} player {i}: mean z {mean}");
            assert!((0.85..1.15).contains(&sd), "mup {mup} player {i}: sd z {sd}");
        }
    }
}

#[test]
fn standard_error_shrinks_with_samples() {
    let m = SyntheticModel::new(6, 2.0, 1.5).unwrap();
    let vf = ValueFunction::Identity;
    let small = shapley::shapley_monte_carlo(&m, &vf, 400, 2)
        .unwrap()
        .std_error
        .unwrap();
    let large = shapley::shapley_monte_carlo(&m, &vf, 40_000, 2)
        .unwrap()
        .std_error
        .unwrap();
    for (s, l) in small.iter().zip(&large) {
        // tenfold fewer standard errors for a hundredfold more samples
        let ratio = s / l;
        assert!((5.0..20.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn exact_handles_the_table_size_limit() {
    let m = SyntheticModel::new(21, 1.0, 1.1).unwrap();
    let err = shapley::shapley(&m, &ValueFunction::Identity, ShapleyMethod::Exact).unwrap_err();
    assert!(err.to_string().contains("20"), "{err}");
    let mc = shapley::shapley(
        &m,
        &ValueFunction::Identity,
        ShapleyMethod::MonteCarlo { samples: 50, seed: 1 },
    )
    .unwrap();
    assert_eq!(mc.values.len(), 21);
}

#[test]
fn increasing_importance_orders_values() {
    let m = SyntheticModel::new(7, 0.7, 2.0).unwrap();
    let v = shapley::shapley_exact(&m, &ValueFunction::Identity).unwrap().values;
    assert!(v.windows(2).all(|w| w[0] < w[1]), "{v:?}");
}
