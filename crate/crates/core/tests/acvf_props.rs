use featmatch::*;
use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;

fn pacf_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.95f64..0.95, 1..=6)
}

// Companion eigenvalues from an independent eigensolver.
fn nalgebra_radius(phi: &[f64]) -> f64 {
    let p = phi.len();
    let c = DMatrix::from_fn(p, p, |i, j| if i == 0 { phi[j] } else if i == j + 1 { 1.0 } else { 0.0 });
    c.complex_eigenvalues().iter().map(|z: &Complex<f64>| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pacf_round_trip(r in pacf_strategy()) {
        let phi = pacf_to_ar(&PacfParamsF64::new(r.clone()).unwrap());
        prop_assert!(nalgebra_radius(&phi) < 1.0);
        let back = ar_to_pacf(&phi).unwrap();
        for (a, b) in back.values().iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn yule_walker_recursion_holds(r in pacf_strategy(), sigma2 in 0.1f64..5.0) {
        let phi = pacf_to_ar(&PacfParamsF64::new(r).unwrap());
        let p = phi.len();
        let g = ar_acvf(&ArParamsF64::new(phi.clone(), sigma2).unwrap(), p + 10).unwrap();
        let g = g.gamma();
        for k in p + 1..=p + 10 {
            let rec: f64 = (0..p).map(|j| phi[j] * g[k - 1 - j]).sum();
            prop_assert!((g[k] - rec).abs() < 1e-10 * g[0]);
        }
    }

    #[test]
    fn levinson_recovers_the_model(r in pacf_strategy()) {
        let phi = pacf_to_ar(&PacfParamsF64::new(r.clone()).unwrap());
        let g = ar_acvf(&ArParamsF64::new(phi.clone(), 1.0).unwrap(), phi.len() + 3).unwrap();
        let sol = levinson_solve(&g, phi.len()).unwrap();
        for (a, b) in sol.phi.iter().zip(&phi) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in sol.pacf.iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn arma_without_ma_is_ar(r in pacf_strategy(), sigma2 in 0.1f64..5.0) {
        let phi = pacf_to_ar(&PacfParamsF64::new(r).unwrap());
        let ar = ar_acvf(&ArParamsF64::new(phi.clone(), sigma2).unwrap(), 12).unwrap();
        let arma = arma_acvf(&ArmaSpecF64::new(phi, vec![], sigma2).unwrap(), 12).unwrap();
        for (a, b) in ar.gamma().iter().zip(arma.gamma()) {
            prop_assert!((a - b).abs() < 1e-12 * ar.gamma()[0].max(1.0));
        }
    }
}

#[test]
fn ar2_acvf_matches_dense_yule_walker() {
    // Unknowns γ0, γ1, γ2:
    //   γ0 − φ1γ1 − φ2γ2 = σ²
    //   γ1 − φ1γ0 − φ2γ1 = 0
    //   γ2 − φ1γ1 − φ2γ0 = 0
    let (p1, p2) = (0.75, -0.5);
    let a = DMatrix::from_row_slice(3, 3, &[1.0, -p1, -p2, -p1, 1.0 - p2, 0.0, -p2, -p1, 1.0]);
    let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let x = a.lu().solve(&b).unwrap();
    let mut oracle: Vec<f64> = vec![x[0], x[1], x[2]];
    for k in 3..=4 {
        oracle.push(p1 * oracle[k - 1] + p2 * oracle[k - 2]);
    }
    let g = ar_acvf(&ArParamsF64::new(vec![p1, p2], 1.0).unwrap(), 4).unwrap();
    for (a, b) in g.gamma().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn arma11_matches_long_psi_convolution() {
    // ψ_0 = 1, ψ_j = φ^{j−1}(φ + θ); γ(k) = σ² Σ_j ψ_j ψ_{j+k}.
    let (phi, theta) = (0.8f64, -0.5f64);
    let psi: Vec<f64> = (0..10_000)
        .map(|j| if j == 0 { 1.0 } else { phi.powi(j as i32 - 1) * (phi + theta) })
        .collect();
    let g = arma_acvf(&ArmaSpecF64::new(vec![phi], vec![theta], 1.0).unwrap(), 5).unwrap();
    for k in 0..=5 {
        let oracle: f64 = (0..psi.len() - k).map(|j| psi[j] * psi[j + k]).sum();
        assert!((g.gamma()[k] - oracle).abs() < 1e-12, "lag {k}: {} vs {oracle}", g.gamma()[k]);
    }
}

#[test]
fn step_up_by_hand() {
    let phi = pacf_to_ar(&PacfParamsF64::new(vec![0.5f64, 0.2]).unwrap());
    assert!((phi[0] - 0.4).abs() < 1e-15);
    assert!((phi[1] - 0.2).abs() < 1e-15);
}

#[test]
fn ma1_acvf() {
    let g = arma_acvf(&ArmaSpecF64::new(vec![], vec![0.4f64], 1.0).unwrap(), 3).unwrap();
    let expect = [1.16, 0.4, 0.0, 0.0];
    for (a, b) in g.gamma().iter().zip(expect) {
        assert!((a - b).abs() < 1e-14);
    }
}
