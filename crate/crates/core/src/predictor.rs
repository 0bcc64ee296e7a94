//! Horizon-k best linear predictors on the lag window (y_t, y_{t−1}, …, y_{t−p+1}).
//!
//! Two independent routes produce the same coefficients for an AR model:
//! powers of the companion matrix, and the Toeplitz solve Γ_p⁻¹γ_{k,p} on the
//! model's autocovariances.

use serde::Serialize;

use crate::acvf::{check_stationary, AcvfSeq, ArParams, SINGULARITY_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Weights on (y_t, y_{t−1}, …, y_{t−p+1}) for predicting y_{t+k}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictorCoeffs<T> {
    pub alpha: Vec<T>,
    pub horizon: usize,
}

impl<T: Scalar> PredictorCoeffs<T> {
    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    /// Prediction of y_{t+k} from a window ordered newest first.
    pub fn predict(&self, window: &[T]) -> T {
        crate::scalar::dot(&self.alpha, window)
    }
}

/// p×p companion matrix: φ on the top row, ones on the subdiagonal.
pub fn companion_matrix<T: Scalar>(phi: &[T]) -> Matrix<T> {
    let p = phi.len();
    Matrix::from_fn(p, p, |i, j| {
        if i == 0 {
            phi[j]
        } else if i == j + 1 {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// Spectral radius by power iteration.
///
/// The iteration is run on the whole basis at once (start block = identity)
/// and accelerated by repeated squaring: after j steps the iterate is
/// A^(2^j), and ρ is read off as ‖A^(2^j)‖^(1/2^j). Iterates are renormalized
/// every step and the log-scale is tracked separately, so neither overflow
/// nor underflow occurs. Stops when successive estimates differ by < 1e-10.
pub fn spectral_radius<T: Scalar>(matrix: &Matrix<T>) -> T {
    const TOL: f64 = 1e-10;
    const MAX_SQUARINGS: usize = 200;
    if matrix.rows() == 0 {
        return T::zero();
    }
    let mut m = matrix.clone();
    let s = m.frobenius_norm();
    if s == T::zero() {
        return T::zero();
    }
    m.scale(T::one() / s);
    // ρ estimate after j squarings: exp(log_norm / 2^j).
    let mut log_norm = s.ln();
    let mut power = T::one();
    let mut estimate = s;
    for _ in 0..MAX_SQUARINGS {
        let sq = m.mul(&m);
        let s = sq.frobenius_norm();
        if s == T::zero() {
            return T::zero();
        }
        m = sq;
        m.scale(T::one() / s);
        log_norm = log_norm + log_norm + s.ln();
        power = power + power;
        let next = (log_norm / power).exp();
        if (next - estimate).abs() < T::lit(TOL) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// α_k for k = 1..=horizons, each the first row of C^k.
///
/// Right-multiplying a row vector a by C gives
/// (aC)_j = a_0 φ_j + a_{j+1} (a_p := 0), so each horizon costs O(p).
pub fn predictor_path<T: Scalar>(phi: &[T], horizons: usize) -> Vec<Vec<T>> {
    let p = phi.len();
    let mut out = Vec::with_capacity(horizons);
    if horizons == 0 {
        return out;
    }
    let mut a = phi.to_vec();
    out.push(a.clone());
    for _ in 1..horizons {
        let lead = if p > 0 { a[0] } else { T::zero() };
        let next: Vec<T> = (0..p)
            .map(|j| {
                let shifted = if j + 1 < p { a[j + 1] } else { T::zero() };
                lead * phi[j] + shifted
            })
            .collect();
        a = next;
        out.push(a.clone());
    }
    out
}

/// [`predictor_path`] together with ∂α_k/∂φ for every horizon.
///
/// Differentiating (aC)_j = a_0 φ_j + a_{j+1} applies the product rule across
/// the k companion factors:
/// D_k[j][i] = D_{k−1}[0][i] φ_j + a_{k−1,0} δ_{ij} + D_{k−1}[j+1][i].
pub(crate) fn predictor_path_with_jacobian<T: Scalar>(
    phi: &[T],
    horizons: usize,
) -> Vec<(Vec<T>, Matrix<T>)> {
    let p = phi.len();
    let mut out = Vec::with_capacity(horizons);
    if horizons == 0 {
        return out;
    }
    let mut a = phi.to_vec();
    let mut d = Matrix::identity(p);
    out.push((a.clone(), d.clone()));
    for _ in 1..horizons {
        let lead = if p > 0 { a[0] } else { T::zero() };
        let mut na = vec![T::zero(); p];
        let mut nd = Matrix::zeros(p, p);
        for j in 0..p {
            na[j] = lead * phi[j] + if j + 1 < p { a[j + 1] } else { T::zero() };
            for i in 0..p {
                let mut v = d[(0, i)] * phi[j];
                if j + 1 < p {
                    v += d[(j + 1, i)];
                }
                nd[(j, i)] = v;
            }
            nd[(j, j)] += lead;
        }
        a = na;
        d = nd;
        out.push((a.clone(), d.clone()));
    }
    out
}

/// Model-implied horizon-k predictor: first row of C(φ)^k. Empty for p = 0.
pub fn predictor_from_model<T: Scalar>(model: &ArParams<T>, k: usize) -> Result<PredictorCoeffs<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("prediction horizon must be at least 1".into()));
    }
    check_stationary(&model.phi)?;
    let alpha = predictor_path(&model.phi, k).pop().unwrap_or_default();
    Ok(PredictorCoeffs { alpha, horizon: k })
}

/// Best linear horizon-k predictor for an arbitrary stationary truth:
/// α = Γ_p⁻¹γ_{k,p} with (γ_{k,p})_i = γ(k+i−1).
pub fn predictor_from_acvf<T: Scalar>(
    truth: &AcvfSeq<T>,
    p: usize,
    k: usize,
) -> Result<PredictorCoeffs<T>> {
    if p == 0 {
        return Err(Error::InvalidInput("predictor order must be at least 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("prediction horizon must be at least 1".into()));
    }
    truth.require_lag(p + k - 1)?;
    let g = truth.gamma();
    let alpha = toeplitz_solve(&g[..p], &g[k..k + p])?;
    Ok(PredictorCoeffs { alpha, horizon: k })
}

/// Solves the symmetric Toeplitz system with first column `col` and
/// right-hand side `rhs` by the Levinson recursion for a general right-hand
/// side, growing the solution one order at a time alongside the Durbin
/// prediction coefficients.
pub(crate) fn toeplitz_solve<T: Scalar>(col: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let p = col.len();
    debug_assert_eq!(p, rhs.len());
    let floor = col[0] * T::lit(SINGULARITY_FLOOR);
    let mut v = col[0];
    if !(v > floor) {
        return Err(Error::SingularToeplitz { order: 0 });
    }
    let mut a: Vec<T> = Vec::with_capacity(p);
    let mut x = vec![rhs[0] / v];
    for j in 1..p {
        // Durbin step: order-j prediction coefficients and variance.
        let acc = col[j] - (1..j).map(|i| a[i - 1] * col[j - i]).sum::<T>();
        let kappa = acc / v;
        let prev = a.clone();
        for i in 1..j {
            a[i - 1] = prev[i - 1] - kappa * prev[j - i - 1];
        }
        a.push(kappa);
        v = v * (T::one() - kappa * kappa);
        if !(v > floor) {
            return Err(Error::SingularToeplitz { order: j });
        }
        // Extend the solution: x' = [x − μ·reverse(a); μ].
        let resid = rhs[j] - (0..j).map(|i| col[j - i] * x[i]).sum::<T>();
        let mu = resid / v;
        for i in 0..j {
            x[i] -= mu * a[j - 1 - i];
        }
        x.push(mu);
    }
    Ok(x)
}
