//! AR estimators: multi-step prediction-error matching on a sample, its
//! population ("ideal world") counterpart, and the one-step conditional
//! least-squares baseline.
//!
//! Matching runs over the stationary region only. Coefficients are
//! parametrized as φ = step-up(tanh(s)) with s unconstrained, which maps R^p
//! smoothly onto exactly the stationary AR(p) region.

use serde::Serialize;

use crate::acvf::{ar_to_pacf, levinson_solve, pacf_to_ar_jacobian, AcvfSeq, ArParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::loss::{check_length, empirical_q_phi, QuadraticCriterion, SeriesSample};
use crate::optim::{minimize, Tolerances};
use crate::predictor::{companion_matrix, spectral_radius};
use crate::scalar::{max_abs, Scalar};

/// |s| is clamped here so tanh(s) stays strictly inside (−1, 1).
const MAX_ATANH: f64 = 15.0;
/// Target spectral radius when projecting a start into the stationary region.
const START_RADIUS: f64 = 0.99;
const SHRINK: f64 = 0.95;

/// Optimizer settings for [`fit_match`] and [`fit_ideal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// Iteration cap per start.
    pub max_iterations: usize,
    /// Converged when ‖∇‖∞ < gradient_tolerance · max(1, Q).
    pub gradient_tolerance: f64,
    /// Converged when an unshortened step moves every coordinate less than this.
    pub step_tolerance: f64,
    /// Deterministic jittered starts in addition to the least-squares start.
    pub extra_starts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            step_tolerance: 1e-10,
            extra_starts: 2,
        }
    }
}

impl FitOptions {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            max_iterations: self.max_iterations,
            gradient: self.gradient_tolerance,
            step: self.step_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics<T> {
    /// Optimizer iterations summed over all starts.
    pub iterations: usize,
    /// Starts tried.
    pub restarts: usize,
    pub converged: bool,
    /// ‖∂Q/∂φ‖∞ at the returned coefficients.
    pub gradient_norm: T,
    /// Whether the winning start needed the simplex fallback.
    pub used_simplex: bool,
}

/// Feature-matching fit θ̂_p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    /// Fitted φ̂ with σ̂² = mean squared one-step residual.
    pub model: ArParams<T>,
    /// Q_p(φ̂), recomputed directly on the series.
    pub q_value: T,
    pub m: usize,
    pub order: usize,
    pub diagnostics: FitDiagnostics<T>,
}

/// Population minimizer θ̃_p together with the attained Q*_p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealFit<T> {
    /// σ² is the one-step population mean squared error of the fitted predictor.
    pub model: ArParams<T>,
    pub q_star: T,
    pub m: usize,
    pub order: usize,
    pub diagnostics: FitDiagnostics<T>,
}

/// Conditional least-squares AR fit. Not forced into the stationary region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit<T> {
    pub phi: Vec<T>,
    /// Mean squared one-step residual over t = p..n−1.
    pub sigma2: T,
    pub stationary: bool,
}

impl<T: Scalar> OlsFit<T> {
    /// The fit as a validated model; fails when it is not stationary.
    pub fn model(&self) -> Result<ArParams<T>> {
        ArParams::new(self.phi.clone(), self.sigma2)
    }
}

/// Conditional least squares: solves Σ_t y_{t,p} y_{t,p}' φ = Σ_t y_{t,p} y_{t+1}
/// over t = p..n−1.
pub fn fit_ols<T: Scalar>(series: &SeriesSample<T>, p: usize) -> Result<OlsFit<T>> {
    let y = series.values();
    let n = y.len();
    if n < 2 * p + 1 {
        return Err(Error::TooShort {
            required: 2 * p + 1,
            actual: n,
            max_feasible_order: Some((n - 1) / 2),
        });
    }
    let mut gram = Matrix::zeros(p, p);
    let mut rhs = vec![T::zero(); p];
    // Row for time t (1-based): window y[t-1], …, y[t-p]; target y[t].
    for t in p..n {
        for i in 0..p {
            let wi = y[t - 1 - i];
            rhs[i] += wi * y[t];
            for j in 0..p {
                gram[(i, j)] += wi * y[t - 1 - j];
            }
        }
    }
    let phi = if p == 0 {
        Vec::new()
    } else {
        gram.solve_spd(&rhs).ok_or(Error::SingularDesign)?
    };
    let sse: T = (p..n)
        .map(|t| {
            let e = y[t] - (0..p).map(|j| phi[j] * y[t - 1 - j]).sum::<T>();
            e * e
        })
        .sum();
    let sigma2 = sse / T::from_count(n - p);
    let stationary = ar_to_pacf(&phi).is_ok();
    Ok(OlsFit {
        phi,
        sigma2,
        stationary,
    })
}

/// Minimizes the empirical multi-step criterion Q_p over the stationary region.
///
/// Starts from the least-squares solution (shrunk by 0.95 until its companion
/// spectral radius is below 0.99) and from `extra_starts` deterministic
/// jittered copies; the best local solution wins. Non-convergence is reported
/// through `diagnostics.converged`, never as an error.
pub fn fit_match<T: Scalar>(
    series: &SeriesSample<T>,
    p: usize,
    m: usize,
    opts: &FitOptions,
) -> Result<FitResult<T>> {
    let y = series.values();
    check_length(y.len(), p, m)?;
    if p == 0 {
        let q_value = empirical_q_phi(y, &[], m)?;
        let sigma2 = empirical_q_phi(y, &[], 1)?;
        return Ok(FitResult {
            model: ArParams::white_noise(sigma2),
            q_value,
            m,
            order: 0,
            diagnostics: FitDiagnostics {
                iterations: 0,
                restarts: 0,
                converged: true,
                gradient_norm: T::zero(),
                used_simplex: false,
            },
        });
    }
    let criterion = QuadraticCriterion::from_series(y, p, m)?;
    let start = fit_ols(series, p)
        .ok()
        .map(|ols| ols.phi)
        .filter(|phi| phi.iter().all(|v| v.is_finite()));
    let (phi, diagnostics) = optimize(&criterion, start, opts);
    let q_value = empirical_q_phi(y, &phi, m)?;
    let sigma2 = empirical_q_phi(y, &phi, 1)?;
    Ok(FitResult {
        model: ArParams { phi, sigma2 },
        q_value,
        m,
        order: p,
        diagnostics,
    })
}

/// Minimizes the population criterion Q*_p under a known autocovariance.
/// The Yule-Walker solution seeds the search.
pub fn fit_ideal<T: Scalar>(
    truth: &AcvfSeq<T>,
    p: usize,
    m: usize,
    opts: &FitOptions,
) -> Result<IdealFit<T>> {
    let criterion = QuadraticCriterion::from_acvf(truth, p, m)?;
    if p == 0 {
        let g0 = truth.at(0);
        return Ok(IdealFit {
            model: ArParams::white_noise(g0),
            q_star: g0,
            m,
            order: 0,
            diagnostics: FitDiagnostics {
                iterations: 0,
                restarts: 0,
                converged: true,
                gradient_norm: T::zero(),
                used_simplex: false,
            },
        });
    }
    let start = levinson_solve(truth, p)?.phi;
    let (phi, diagnostics) = optimize(&criterion, Some(start), opts);
    let q_star = criterion.value(&phi);
    let sigma2 = QuadraticCriterion::from_acvf(truth, p, 1)?.value(&phi);
    Ok(IdealFit {
        model: ArParams { phi, sigma2 },
        q_star,
        m,
        order: p,
        diagnostics,
    })
}

/// Shrinks φ toward zero until the companion spectral radius is below 0.99.
fn project_into_stationary<T: Scalar>(phi: &[T]) -> Vec<T> {
    let mut phi = phi.to_vec();
    for _ in 0..10_000 {
        if spectral_radius(&companion_matrix(&phi)) < T::lit(START_RADIUS) {
            break;
        }
        phi.iter_mut().for_each(|v| *v *= T::lit(SHRINK));
    }
    phi
}

fn to_unconstrained<T: Scalar>(phi: &[T]) -> Vec<T> {
    match ar_to_pacf(phi) {
        Ok(r) => r
            .values()
            .iter()
            .map(|&x| x.atanh().max(-T::lit(MAX_ATANH)).min(T::lit(MAX_ATANH)))
            .collect(),
        Err(_) => vec![T::zero(); phi.len()],
    }
}

pub(crate) fn to_phi<T: Scalar>(s: &[T]) -> Vec<T> {
    let r: Vec<T> = s.iter().map(|&v| clamp_s(v).tanh()).collect();
    pacf_to_ar_jacobian(&r).0
}

fn clamp_s<T: Scalar>(v: T) -> T {
    v.max(-T::lit(MAX_ATANH)).min(T::lit(MAX_ATANH))
}

/// Fixed jitter pattern for start `j` (1-based), coordinate `i`.
fn jitter<T: Scalar>(j: usize, i: usize) -> T {
    const PATTERN: [f64; 7] = [0.35, -0.25, 0.3, -0.4, 0.2, -0.3, 0.25];
    let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
    T::lit(sign * PATTERN[(i + 3 * j) % PATTERN.len()] * (1.0 + 0.5 * (j as f64 - 1.0)))
}

/// Multi-start minimization of a criterion in tanh-PACF coordinates.
fn optimize<T: Scalar>(
    criterion: &QuadraticCriterion<T>,
    start: Option<Vec<T>>,
    opts: &FitOptions,
) -> (Vec<T>, FitDiagnostics<T>) {
    let p = criterion.order();
    let base = match start {
        Some(phi) => to_unconstrained(&project_into_stationary(&phi)),
        None => vec![T::zero(); p],
    };
    let objective = |s: &[T]| -> (T, Vec<T>) {
        let r: Vec<T> = s.iter().map(|&v| clamp_s(v).tanh()).collect();
        let (phi, jac) = pacf_to_ar_jacobian(&r);
        let (f, g_phi) = criterion.value_and_gradient(&phi);
        // ∂Q/∂s_l = Σ_i ∂Q/∂φ_i · ∂φ_i/∂r_l · (1 − r_l²)
        let g = (0..p)
            .map(|l| {
                let inside = s[l].abs() < T::lit(MAX_ATANH);
                if !inside {
                    return T::zero();
                }
                let d: T = (0..p).map(|i| g_phi[i] * jac[(i, l)]).sum();
                d * (T::one() - r[l] * r[l])
            })
            .collect();
        (f, g)
    };
    let tol = opts.tolerances();
    let mut best: Option<crate::optim::Outcome<T>> = None;
    let mut iterations = 0;
    let starts = 1 + opts.extra_starts;
    for j in 0..starts {
        let x0: Vec<T> = if j == 0 {
            base.clone()
        } else {
            base.iter()
                .enumerate()
                .map(|(i, &v)| clamp_s(v + jitter::<T>(j, i)))
                .collect()
        };
        let out = minimize(objective, x0, tol);
        iterations += out.iterations;
        if best.as_ref().map_or(true, |b| out.value < b.value) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    let phi = to_phi(&best.x);
    let (_, g_phi) = criterion.value_and_gradient(&phi);
    let diagnostics = FitDiagnostics {
        iterations,
        restarts: starts,
        converged: best.converged,
        gradient_norm: max_abs(&g_phi),
        used_simplex: best.used_simplex,
    };
    (phi, diagnostics)
}
