use featmatch::*;

/// Sample autocovariance at lag k about zero, with a batch-means standard error.
fn lag_product_stats(y: &[f64], k: usize) -> (f64, f64) {
    let z: Vec<f64> = (0..y.len() - k).map(|t| y[t] * y[t + k]).collect();
    let batches = 200;
    let len = z.len() / batches;
    let means: Vec<f64> = z.chunks_exact(len).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

#[test]
fn simulated_autocovariances_match_theory() {
    let specs = [
        (vec![0.5], vec![]),
        (vec![-0.7], vec![]),
        (vec![0.75, -0.5], vec![]),
        (vec![], vec![0.4]),
        (vec![], vec![0.6, -0.3]),
        (vec![0.8], vec![-0.5]),
        (vec![0.3], vec![0.5]),
        (vec![0.2, 0.3], vec![0.4]),
        (vec![0.5, -0.2, 0.1], vec![]),
        (vec![], vec![]),
    ];
    for (case, (ar, ma)) in specs.into_iter().enumerate() {
        let spec = ArmaSpecF64::new(ar, ma, 1.5).unwrap();
        let y = simulate_arma(&spec, 100_000, 77 + case as u64, 200).unwrap();
        let g = arma_acvf(&spec, 5).unwrap();
        for k in 0..=5 {
            let (mean, se) = lag_product_stats(&y, k);
            assert!(
                (mean - g.gamma()[k]).abs() < 4.0 * se,
                "case {case} lag {k}: {mean} ± {se} vs {}",
                g.gamma()[k]
            );
        }
    }
}

#[test]
fn ar1_lag_one() {
    let spec = ArmaSpecF64::new(vec![0.5], vec![], 1.0).unwrap();
    let y = simulate_arma(&spec, 50_000, 5, 200).unwrap();
    let (mean, se) = lag_product_stats(&y, 1);
    assert!((mean - 2.0 / 3.0).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn experiments_ignore_thread_count() {
    let plan = ExperimentPlan {
        truth: Truth::Tar(TarSpec {
            phi_low: vec![0.6],
            phi_high: vec![-0.4],
            threshold: 0.0,
            delay: 1,
            sigma2: 1.0,
        }),
        innovations: Innovations::StudentT { df: 5.0 },
        n: 150,
        replicates: 12,
        estimators: vec![
            Estimator::Match { p: 1, m: 1 },
            Estimator::Match { p: 2, m: 3 },
            Estimator::Ols { p: 1 },
            Estimator::Selected {
                p_max: 2,
                m: 1,
                bootstrap: 5,
            },
        ],
        base_seed: 9,
        eval_horizon: 3,
        burnin: None,
        fit_options: FitOptions::default(),
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment(&plan).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(6));
    assert_eq!(a.rows.len(), 12 * 4);
    assert_eq!(a.summary.pairwise.len(), 4 * 3);
}
