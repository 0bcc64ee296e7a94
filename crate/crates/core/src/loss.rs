//! Multi-step prediction-error criteria.
//!
//! The empirical criterion averages, over horizons k = 1..m, the mean squared
//! k-step error of the model-implied predictor α_k(φ) on the observed series.
//! The population criterion replaces sample averages by expectations under a
//! known autocovariance.

use serde::Serialize;

use crate::acvf::{AcvfSeq, ArParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::predictor::{predictor_path, predictor_path_with_jacobian};
use crate::scalar::{dot, Scalar};

/// Observed series y_1..y_n, treated as mean zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSample<T> {
    values: Vec<T>,
}

impl<T: Scalar> SeriesSample<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                actual: values.len(),
                max_feasible_order: None,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "observation {} is not finite",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_count(self.len())
    }

    /// Copy with the sample mean removed, plus the mean that was subtracted.
    pub fn centered(&self) -> (Self, T) {
        let mu = self.mean();
        let values = self.values.iter().map(|&v| v - mu).collect();
        (Self { values }, mu)
    }
}

/// Checks that every horizon-k sum has at least one term: n ≥ m + p.
pub fn check_length(n: usize, p: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidInput("maximum horizon m must be at least 1".into()));
    }
    if n < m + p {
        return Err(Error::TooShort {
            required: m + p,
            actual: n,
            max_feasible_order: n.checked_sub(m),
        });
    }
    Ok(())
}

/// Q_p(φ): mean over k = 1..m of the average squared k-step error
/// Σ_{t=p}^{n−k} (y_{t+k} − y_{t,p}'α_k(φ))² / (n−k−p+1).
///
/// For p = 0 the predictor is zero and the k-th sum runs over y_k..y_n.
pub fn empirical_q<T: Scalar>(series: &SeriesSample<T>, model: &ArParams<T>, m: usize) -> Result<T> {
    empirical_q_phi(series.values(), &model.phi, m)
}

pub(crate) fn empirical_q_phi<T: Scalar>(y: &[T], phi: &[T], m: usize) -> Result<T> {
    let n = y.len();
    let p = phi.len();
    check_length(n, p, m)?;
    let path = predictor_path(phi, m);
    let mut total = T::zero();
    for (idx, alpha) in path.iter().enumerate() {
        let k = idx + 1;
        let mut sum = T::zero();
        // Paper time t (1-based) maps to y[t - 1]; window is y[t-1], …, y[t-p].
        for t in p..=n - k {
            let pred: T = (0..p).map(|j| alpha[j] * y[t - 1 - j]).sum();
            let e = y[t + k - 1] - pred;
            sum += e * e;
        }
        total += sum / T::from_count(n - k - p + 1);
    }
    Ok(total / T::from_count(m))
}

/// Analytic ∂Q_p/∂φ, differentiating α_k(φ) through the companion powers.
pub fn empirical_q_gradient<T: Scalar>(
    series: &SeriesSample<T>,
    model: &ArParams<T>,
    m: usize,
) -> Result<Vec<T>> {
    let y = series.values();
    let phi = &model.phi;
    let n = y.len();
    let p = phi.len();
    if p == 0 {
        return Err(Error::InvalidInput("gradient needs order p >= 1".into()));
    }
    check_length(n, p, m)?;
    let path = predictor_path_with_jacobian(phi, m);
    let mut grad = vec![T::zero(); p];
    let two = T::lit(2.0);
    let mut window_grad = vec![T::zero(); p];
    for (idx, (alpha, jac)) in path.iter().enumerate() {
        let k = idx + 1;
        window_grad.iter_mut().for_each(|g| *g = T::zero());
        for t in p..=n - k {
            let pred: T = (0..p).map(|j| alpha[j] * y[t - 1 - j]).sum();
            let e = y[t + k - 1] - pred;
            for j in 0..p {
                window_grad[j] -= two * e * y[t - 1 - j];
            }
        }
        let scale = T::one() / T::from_count((n - k - p + 1) * m);
        for i in 0..p {
            let g: T = (0..p).map(|j| window_grad[j] * jac[(j, i)]).sum();
            grad[i] += g * scale;
        }
    }
    Ok(grad)
}

/// Q*_p(φ): the population version of [`empirical_q`] under the true
/// autocovariance, (1/m) Σ_k [γ(0) − 2α_k'γ_{k,p} + α_k'Γ_pα_k].
pub fn population_q<T: Scalar>(truth: &AcvfSeq<T>, model: &ArParams<T>, p: usize, m: usize) -> Result<T> {
    if model.order() != p {
        return Err(Error::InvalidInput(format!(
            "model has order {} but p = {p} was requested",
            model.order()
        )));
    }
    QuadraticCriterion::from_acvf(truth, p, m).map(|c| c.value(&model.phi))
}

/// Lower bound of [`population_q`] over all order-p models: the mean over
/// horizons of the unrestricted best linear k-step prediction error,
/// (1/m) Σ_k [γ(0) − γ_{k,p}'Γ_p⁻¹γ_{k,p}].
pub fn population_floor<T: Scalar>(truth: &AcvfSeq<T>, p: usize, m: usize) -> Result<T> {
    QuadraticCriterion::from_acvf(truth, p, m)?
        .unrestricted_floor()
        .ok_or(Error::SingularToeplitz { order: p })
}

/// Per-horizon sufficient statistics of a squared-error criterion:
/// the k-th term is w_k (s0 − 2α'b + α'Gα).
#[derive(Debug, Clone)]
struct HorizonTerm<T> {
    weight: T,
    s0: T,
    b: Vec<T>,
    g: Matrix<T>,
}

/// Either criterion written through its second moments, so evaluations cost
/// O(m p²) independent of the series length.
#[derive(Debug, Clone)]
pub(crate) struct QuadraticCriterion<T> {
    order: usize,
    terms: Vec<HorizonTerm<T>>,
}

impl<T: Scalar> QuadraticCriterion<T> {
    pub(crate) fn from_series(y: &[T], p: usize, m: usize) -> Result<Self> {
        let n = y.len();
        check_length(n, p, m)?;
        let terms = (1..=m)
            .map(|k| {
                let count = n - k - p + 1;
                let mut s0 = T::zero();
                let mut b = vec![T::zero(); p];
                let mut g = Matrix::zeros(p, p);
                for t in p..=n - k {
                    let target = y[t + k - 1];
                    s0 += target * target;
                    for i in 0..p {
                        let wi = y[t - 1 - i];
                        b[i] += wi * target;
                        for j in i..p {
                            g[(i, j)] += wi * y[t - 1 - j];
                        }
                    }
                }
                for i in 0..p {
                    for j in 0..i {
                        g[(i, j)] = g[(j, i)];
                    }
                }
                HorizonTerm {
                    weight: T::one() / T::from_count(count * m),
                    s0,
                    b,
                    g,
                }
            })
            .collect();
        Ok(Self { order: p, terms })
    }

    pub(crate) fn from_acvf(truth: &AcvfSeq<T>, p: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("maximum horizon m must be at least 1".into()));
        }
        truth.require_lag(p + m - 1)?;
        let g = truth.toeplitz(p)?;
        let weight = T::one() / T::from_count(m);
        let terms = (1..=m)
            .map(|k| HorizonTerm {
                weight,
                s0: truth.at(0),
                b: (0..p).map(|i| truth.at(k + i)).collect(),
                g: g.clone(),
            })
            .collect();
        Ok(Self { order: p, terms })
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    pub(crate) fn horizons(&self) -> usize {
        self.terms.len()
    }

    fn term_value(term: &HorizonTerm<T>, alpha: &[T]) -> T {
        let ga = term.g.mul_vec(alpha);
        term.weight * (term.s0 - T::lit(2.0) * dot(alpha, &term.b) + dot(alpha, &ga))
    }

    pub(crate) fn value(&self, phi: &[T]) -> T {
        let path = predictor_path(phi, self.horizons());
        self.terms
            .iter()
            .zip(&path)
            .map(|(term, alpha)| Self::term_value(term, alpha))
            .sum()
    }

    /// Unrestricted minimum (1/m) Σ_k [s0 − b'G⁻¹b] over free predictor
    /// weights; a floor for `value` at every φ.
    pub(crate) fn unrestricted_floor(&self) -> Option<T> {
        let mut total = T::zero();
        for term in &self.terms {
            let x = if self.order == 0 {
                Vec::new()
            } else {
                term.g.solve_spd(&term.b)?
            };
            total += term.weight * (term.s0 - dot(&x, &term.b));
        }
        Some(total)
    }

    pub(crate) fn value_and_gradient(&self, phi: &[T]) -> (T, Vec<T>) {
        let p = self.order;
        let path = predictor_path_with_jacobian(phi, self.horizons());
        let mut value = T::zero();
        let mut grad = vec![T::zero(); p];
        let two = T::lit(2.0);
        for (term, (alpha, jac)) in self.terms.iter().zip(&path) {
            let ga = term.g.mul_vec(alpha);
            value += term.weight * (term.s0 - two * dot(alpha, &term.b) + dot(alpha, &ga));
            // ∂/∂α = 2(Gα − b), chained through ∂α/∂φ.
            for i in 0..p {
                let mut s = T::zero();
                for j in 0..p {
                    s += (ga[j] - term.b[j]) * jac[(j, i)];
                }
                grad[i] += two * term.weight * s;
            }
        }
        (value, grad)
    }
}
