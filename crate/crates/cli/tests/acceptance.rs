//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use featmatch::*;
use featmatch::rng::stream;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_stationary(rng: &mut impl Rng, max_p: usize) -> Vec<f64> {
    let p = rng.random_range(1..=max_p);
    let r: Vec<f64> = (0..p).map(|_| rng.random_range(-0.95..0.95)).collect();
    pacf_to_ar(&PacfParamsF64::new(r).unwrap())
}

fn predictor_duality() -> Outcome {
    let mut rng = stream(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let phi = random_stationary(&mut rng, 6);
        let p = phi.len();
        let k = rng.random_range(1..=10);
        let model = ArParamsF64::new(phi, 1.0).unwrap();
        let direct = predictor_from_model(&model, k).unwrap().alpha;
        let solved = predictor_from_acvf(&ar_acvf(&model, p + k).unwrap(), p, k).unwrap().alpha;
        let scale = direct.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        for (a, b) in direct.iter().zip(&solved) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("max relative error {worst:.2e} (limit 1e-8)"),
    }
}

fn one_step_reduction() -> Outcome {
    let ar2 = ArmaSpecF64::new(vec![0.75, -0.5], vec![], 1.0).unwrap();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for seed in 0..100 {
        let y = SeriesF64::new(simulate_arma(&ar2, 300, 10_000 + seed, 200).unwrap()).unwrap();
        let ols = fit_ols(&y, 2).unwrap();
        if !ols.stationary {
            continue;
        }
        let fit = fit_match(&y, 2, 1, &FitOptions::default()).unwrap();
        for (a, b) in fit.model.phi.iter().zip(&ols.phi) {
            worst = worst.max((a - b).abs());
        }
        compared += 1;
    }
    Outcome {
        pass: worst < 1e-5,
        detail: format!("{compared} stationary datasets, max |Δφ| {worst:.2e} (limit 1e-5)"),
    }
}

fn gradient_check() -> Outcome {
    let mut rng = stream(3);
    let mut worst = 0.0f64;
    let mut coords = 0;
    for _ in 0..200 {
        let phi = random_stationary(&mut rng, 4);
        let m = rng.random_range(1..=5);
        let n = rng.random_range(40..200);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y = SeriesF64::new(y).unwrap();
        let q = |phi: &[f64]| empirical_q(&y, &ArParamsF64::new(phi.to_vec(), 1.0).unwrap(), m).unwrap();
        let grad = empirical_q_gradient(&y, &ArParamsF64::new(phi.clone(), 1.0).unwrap(), m).unwrap();
        for i in 0..phi.len() {
            let h = 1e-6 * phi[i].abs().max(1.0);
            let (mut up, mut down) = (phi.clone(), phi.clone());
            up[i] += h;
            down[i] -= h;
            if ArParamsF64::new(up.clone(), 1.0).is_err() || ArParamsF64::new(down.clone(), 1.0).is_err() {
                continue;
            }
            let fd = (q(&up) - q(&down)) / (2.0 * h);
            worst = worst.max((grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-3));
            coords += 1;
        }
    }
    Outcome {
        pass: worst < 1e-5,
        detail: format!("{coords} coordinates, max relative error {worst:.2e} (limit 1e-5)"),
    }
}

fn ideal_monotonicity() -> Outcome {
    let opts = FitOptions::default();
    let truths = [
        ("MA(1)", ArmaSpecF64::new(vec![], vec![0.5], 1.0).unwrap()),
        ("ARMA(1,1)", ArmaSpecF64::new(vec![0.8], vec![-0.5], 1.0).unwrap()),
    ];
    let mut rises = 0;
    let mut checked = 0;
    let mut worst_rel = 0.0f64;
    for (_, spec) in &truths {
        for m in 1..=5 {
            let g = arma_acvf(spec, 6 + m).unwrap();
            let q: Vec<f64> = (0..=6).map(|p| fit_ideal(&g, p, m, &opts).unwrap().q_star).collect();
            for p in 0..5 {
                if q[p + 1] > q[p] + 1e-9 {
                    rises += 1;
                }
                let lhs = q[p].ln() - q[p + 1].ln();
                let rhs = (q[p] - q[p + 1]) / q[p + 1];
                if lhs < 0.05 && lhs > 0.0 {
                    checked += 1;
                    worst_rel = worst_rel.max((lhs - rhs).abs() / lhs);
                }
            }
        }
    }
    Outcome {
        pass: rises == 0 && worst_rel <= 0.10,
        detail: format!("{rises} increases; {checked} small decreases, worst approximation error {:.2}%", 100.0 * worst_rel),
    }
}

fn headline_experiment() -> Outcome {
    let plan = ExperimentPlanF64 {
        truth: Truth::Arma(ArmaSpecF64::new(vec![0.8], vec![-0.5], 1.0).unwrap()),
        innovations: Innovations::Gaussian,
        n: 400,
        replicates: 200,
        estimators: vec![Estimator::Match { p: 1, m: 1 }, Estimator::Match { p: 1, m: 5 }],
        base_seed: 2024,
        eval_horizon: 5,
        burnin: None,
        fit_options: FitOptions::default(),
    };
    let report = run_experiment(&plan).unwrap();
    let mean = |label: &str| {
        report.summary.estimators.iter().find(|e| e.estimator == label).unwrap().mean_score
    };
    let win = report
        .summary
        .pairwise
        .iter()
        .find(|w| w.first == "match_p1_m5" && w.second == "match_p1_m1")
        .unwrap()
        .win_rate;
    let (m1, m5) = (mean("match_p1_m1"), mean("match_p1_m5"));
    Outcome {
        pass: win >= 0.70 && m5 < m1,
        detail: format!("m=5 win rate {win:.3} (need ≥ 0.70); mean loss m=5 {m5:.4} vs m=1 {m1:.4}"),
    }
}

fn selection_sanity() -> Outcome {
    let opts = FitOptions::default();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    pool.install(|| {
        let ar2 = ArmaSpecF64::new(vec![0.75, -0.5], vec![], 1.0).unwrap();
        let mut ar2_counts = [0usize; 7];
        for seed in 0..100 {
            let y = SeriesF64::new(simulate_arma(&ar2, 500, 20_000 + seed, 200).unwrap()).unwrap();
            ar2_counts[select_order(&y, 6, 1, 100, seed, &opts).unwrap().chosen_p] += 1;
        }
        let wn = ArmaSpecF64::new(vec![], vec![], 1.0).unwrap();
        let mut wn_counts = [0usize; 6];
        for seed in 0..100 {
            let y = SeriesF64::new(simulate_arma(&wn, 500, 30_000 + seed, 200).unwrap()).unwrap();
            wn_counts[select_order(&y, 5, 1, 100, seed, &opts).unwrap().chosen_p] += 1;
        }
        let modal = (0..7).max_by_key(|&p| (ar2_counts[p], std::cmp::Reverse(p))).unwrap();
        let ar2_rate = ar2_counts[2] as f64 / 100.0;
        let wn_rate = wn_counts[0] as f64 / 100.0;
        Outcome {
            pass: modal == 2 && ar2_rate >= 0.60 && wn_rate >= 0.70,
            detail: format!(
                "AR(2) choices {ar2_counts:?} (p=2 {ar2_rate:.2}, need ≥ 0.60); white-noise choices {wn_counts:?} (p=0 {wn_rate:.2}, need ≥ 0.70)"
            ),
        }
    })
}

fn bias_calibration() -> Outcome {
    let opts = FitOptions::default();
    let spec = ArmaSpecF64::new(vec![0.5], vec![], 1.0).unwrap();
    let truth = arma_acvf(&spec, 2).unwrap();
    let mut total = 0.0;
    for seed in 0..2000 {
        let y = SeriesF64::new(simulate_arma(&spec, 500, 40_000 + seed, 200).unwrap()).unwrap();
        let fit = fit_match(&y, 1, 1, &opts).unwrap();
        total += population_q(&truth, &fit.model, 1, 1).unwrap().ln() - fit.q_value.ln();
    }
    let c = total / 2000.0;
    let y = SeriesF64::new(simulate_arma(&spec, 500, 7, 200).unwrap()).unwrap();
    let estimate = bootstrap_bias(&y, 1, 1, 200, 11, &opts).unwrap().estimate;
    Outcome {
        pass: estimate > 0.3 * c && estimate < 3.0 * c,
        detail: format!("estimate {estimate:.5}, Monte-Carlo truth c = {c:.5}, band ({:.5}, {:.5})", 0.3 * c, 3.0 * c),
    }
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_featmatch")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism(dir: &Path) -> Outcome {
    let series = run_cli(&["simulate", "--model", "arma", "--ar", "0.75,-0.5", "--ma", "0.3", "--n", "400", "--seed", "21"]);
    let again = run_cli(&["simulate", "--model", "arma", "--ar", "0.75,-0.5", "--ma", "0.3", "--n", "400", "--seed", "21"]);
    let input = dir.join("series.txt");
    fs::write(&input, &series).unwrap();
    let input = input.to_str().unwrap();
    let config = dir.join("plan.ini");
    fs::write(
        &config,
        "n = 200\nreplicates = 20\nseed = 8\nhorizon = 3\n\n[truth]\nmodel = tar\nar_low = 0.6\nar_high = -0.4\n\n[estimators]\nmatch = 1,1\nmatch = 2,3\nols = 1\n\n[selection]\nmax_order = 3\nbootstrap = 10\n",
    )
    .unwrap();

    let mut mismatches = Vec::new();
    if series != again {
        mismatches.push("simulate".to_string());
    }
    let fit = ["fit", "--input", input, "--order", "2", "--steps", "4", "--center"];
    if run_cli(&fit) != run_cli(&fit) {
        mismatches.push("fit".into());
    }
    for format in ["json", "csv"] {
        let select = |jobs: &str| {
            run_cli(&[
                "select", "--input", input, "--max-order", "4", "--steps", "2", "--bootstrap", "30", "--seed", "5",
                "--jobs", jobs, "--format", format,
            ])
        };
        let base = select("1");
        if ["2", "8", "1"].iter().any(|j| select(j) != base) {
            mismatches.push(format!("select --format {format}"));
        }
    }
    let experiment = |jobs: &str| {
        let out = dir.join(format!("exp{jobs}"));
        run_cli(&["experiment", "--config", config.to_str().unwrap(), "--jobs", jobs, "--output", out.to_str().unwrap()]);
        (
            fs::read(out.join("report.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        )
    };
    if experiment("1") != experiment("8") {
        mismatches.push("experiment".into());
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "simulate, fit, select (json, csv; jobs 1/2/8) and experiment (jobs 1/8) byte-identical".into()
        } else {
            format!("outputs differ: {}", mismatches.join(", "))
        },
    }
}

fn main() {
    let dir = std::env::temp_dir().join(format!("featmatch-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();

    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 predictor duality", Duration::from_secs(5), Box::new(predictor_duality)),
        ("2 one-step reduction", Duration::from_secs(30), Box::new(one_step_reduction)),
        ("3 gradient", Duration::from_secs(10), Box::new(gradient_check)),
        ("4 ideal-world monotonicity", Duration::from_secs(10), Box::new(ideal_monotonicity)),
        ("5 multi-step advantage", Duration::from_secs(180), Box::new(headline_experiment)),
        ("6 selection sanity", Duration::from_secs(600), Box::new(selection_sanity)),
        ("7 bootstrap bias calibration", Duration::from_secs(300), Box::new(bias_calibration)),
        ("8 determinism", Duration::from_secs(60), Box::new({
            let dir = dir.clone();
            move || determinism(&dir)
        })),
    ];

    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.1}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    let _ = fs::remove_dir_all(&dir);
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
}
