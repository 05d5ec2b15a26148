use steercert::qstate::{physicality_check, trace_distance, werner};
use steercert::steercrit::{ConditionKind, MaximizeOptions};
use steercert::tomo::{analyze_ensemble, bootstrap_ensemble, outcome_probabilities, simulate_counts};

#[test]
fn poisson_mean_and_variance() {
    let rho = werner(0.6).unwrap();
    let n = 2000;
    let probs = outcome_probabilities(&rho).unwrap();
    let seeds = 5000;
    let mut sum = vec![[0.0f64; 4]; 9];
    let mut sum_sq = vec![[0.0f64; 4]; 9];
    for seed in 0..seeds {
        let r = simulate_counts(&rho, 1.0, n, seed).unwrap();
        for (s, cells) in r.counts.iter().enumerate() {
            for k in 0..4 {
                let c = cells[k] as f64;
                sum[s][k] += c;
                sum_sq[s][k] += c * c;
            }
        }
    }
    let m = seeds as f64;
    for s in 0..9 {
        for k in 0..4 {
            let expected = n as f64 * probs[s][k];
            let mean = sum[s][k] / m;
            let var = (sum_sq[s][k] - m * mean * mean) / (m - 1.0);
            assert!((mean - expected).abs() / expected < 0.01, "cell {s}/{k}: {mean} vs {expected}");
            assert!((var - mean).abs() / mean < 0.1, "cell {s}/{k}: variance {var} vs mean {mean}");
        }
    }
}

#[test]
fn ensemble_concentrates_at_large_counts() {
    let rho = werner(0.9).unwrap();
    let states = bootstrap_ensemble(&rho, 0.05, 20, 10_000_000, 8).unwrap();
    for s in &states {
        assert!(trace_distance(s.matrix(), rho.matrix()) < 1e-2);
        assert!(physicality_check(s.matrix(), 1e-8).pass);
    }
}

#[test]
fn spread_shrinks_with_counts() {
    let rho = werner(0.8).unwrap();
    let opts = MaximizeOptions::default();
    let spread = |n| {
        let states = bootstrap_ensemble(&rho, 0.1, 40, n, 21).unwrap();
        analyze_ensemble(&states, 0.1, ConditionKind::Projective, &opts).unwrap().std
    };
    assert!(spread(100_000) < spread(1_000));
}

#[test]
fn bootstrap_report_is_bit_identical_across_pools() {
    let rho = werner(0.85).unwrap();
    let opts = MaximizeOptions::default();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let states = bootstrap_ensemble(&rho, 0.05, 12, 5_000, 3).unwrap();
            analyze_ensemble(&states, 0.05, ConditionKind::Povm, &opts).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn projective_ensemble_converges_to_werner_objective() {
    let mu = 0.9837;
    let exact = mu + 0.014;
    let rho = werner(mu).unwrap();
    let opts = MaximizeOptions::default();
    let report = |n| {
        let states = bootstrap_ensemble(&rho, 0.028, 200, n, 1).unwrap();
        analyze_ensemble(&states, 0.028, ConditionKind::Projective, &opts).unwrap()
    };
    let coarse = report(10_000);
    let fine = report(1_000_000);
    assert_eq!(coarse.n_states, 200);
    assert!(coarse.mean >= coarse.min && coarse.mean <= coarse.max);
    // Maximizing over noisy correlations biases the estimate upwards; the
    // bias shrinks with the count level.
    assert!(coarse.mean > exact && fine.mean > exact);
    assert!(fine.mean - exact < 0.25 * (coarse.mean - exact), "{} vs {}", fine.mean, coarse.mean);
    assert!(fine.mean - exact < 3e-3);
}
