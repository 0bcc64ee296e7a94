//! Autocovariances of AR/ARMA processes, the Levinson-Durbin Toeplitz solver,
//! and the partial-autocorrelation parametrization of the stationary AR region.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::predictor::{companion_matrix, spectral_radius};
use crate::scalar::Scalar;

/// Relative floor on Levinson-Durbin prediction-error variances.
pub const SINGULARITY_FLOOR: f64 = 1e-12;

/// Lags checked for positive semidefiniteness when an [`AcvfSeq`] is built.
const PSD_CHECK_ORDER: usize = 12;

/// Autocovariance sequence γ(0), …, γ(K) of a stationary process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcvfSeq<T> {
    gamma: Vec<T>,
}

impl<T: Scalar> AcvfSeq<T> {
    /// Validates γ(0) > 0, |γ(k)| ≤ γ(0), and positive semidefiniteness of the
    /// leading Toeplitz blocks up to order 12.
    pub fn new(gamma: Vec<T>) -> Result<Self> {
        let g0 = *gamma
            .first()
            .ok_or_else(|| Error::InvalidInput("autocovariance sequence is empty".into()))?;
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidInput("autocovariance contains non-finite values".into()));
        }
        if !(g0 > T::zero()) {
            return Err(Error::InvalidInput("autocovariance at lag 0 must be positive".into()));
        }
        let slack = g0 * T::lit(1e-12);
        if let Some(k) = gamma.iter().position(|g| g.abs() > g0 + slack) {
            return Err(Error::InvalidInput(format!(
                "|gamma({k})| exceeds gamma(0)"
            )));
        }
        // Levinson-Durbin variances must stay nonnegative on every leading block.
        let order = (gamma.len() - 1).min(PSD_CHECK_ORDER.saturating_sub(1));
        let mut phi: Vec<T> = Vec::with_capacity(order);
        let mut v = g0;
        for j in 1..=order {
            if v <= slack {
                break;
            }
            let acc = gamma[j] - (1..j).map(|i| phi[i - 1] * gamma[j - i]).sum::<T>();
            let kappa = acc / v;
            let prev = phi.clone();
            for i in 1..j {
                phi[i - 1] = prev[i - 1] - kappa * prev[j - i - 1];
            }
            phi.push(kappa);
            v = v * (T::one() - kappa * kappa);
            if v < -slack {
                return Err(Error::InvalidInput(format!(
                    "autocovariance is not positive semidefinite at order {}",
                    j + 1
                )));
            }
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }

    /// γ(|k|); panics when the lag is outside the stored range.
    #[inline]
    pub fn at(&self, k: usize) -> T {
        self.gamma[k]
    }

    pub(crate) fn require_lag(&self, needed: usize) -> Result<()> {
        if needed > self.max_lag() {
            Err(Error::InsufficientLags {
                needed,
                available: self.max_lag(),
            })
        } else {
            Ok(())
        }
    }

    /// The p×p Toeplitz matrix Γ_p with entries γ(|j−i|).
    pub fn toeplitz(&self, p: usize) -> Result<Matrix<T>> {
        if p > 0 {
            self.require_lag(p - 1)?;
        }
        Ok(Matrix::from_fn(p, p, |i, j| self.gamma[i.abs_diff(j)]))
    }
}

/// AR(p) coefficients φ_1..φ_p and innovation variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArParams<T> {
    pub phi: Vec<T>,
    pub sigma2: T,
}

impl<T: Scalar> ArParams<T> {
    /// Builds a validated model: finite coefficients, stationary, σ² > 0.
    pub fn new(phi: Vec<T>, sigma2: T) -> Result<Self> {
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("AR coefficients must be finite".into()));
        }
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::InvalidInput("innovation variance must be positive".into()));
        }
        check_stationary(&phi)?;
        Ok(Self { phi, sigma2 })
    }

    pub fn white_noise(sigma2: T) -> Self {
        Self {
            phi: Vec::new(),
            sigma2,
        }
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn is_stationary(&self) -> bool {
        check_stationary(&self.phi).is_ok()
    }
}

/// Partial autocorrelations r_1..r_p, each strictly inside (−1, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacfParams<T> {
    r: Vec<T>,
}

impl<T: Scalar> PacfParams<T> {
    pub fn new(r: Vec<T>) -> Result<Self> {
        if let Some((j, &x)) = r.iter().enumerate().find(|(_, x)| !(x.abs() < T::one())) {
            return Err(Error::NonStationary {
                order: j + 1,
                reflection: x.as_f64(),
            });
        }
        Ok(Self { r })
    }

    pub fn values(&self) -> &[T] {
        &self.r
    }

    pub fn order(&self) -> usize {
        self.r.len()
    }
}

/// ARMA(p, q) data-generating specification with
/// y_t = Σ φ_j y_{t−j} + e_t + Σ θ_j e_{t−j}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmaSpec<T> {
    pub ar: Vec<T>,
    pub ma: Vec<T>,
    pub sigma2: T,
}

impl<T: Scalar> ArmaSpec<T> {
    pub fn new(ar: Vec<T>, ma: Vec<T>, sigma2: T) -> Result<Self> {
        let spec = Self { ar, ma, sigma2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ma.iter().chain(&self.ar).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("ARMA coefficients must be finite".into()));
        }
        if !(self.sigma2 > T::zero()) || !self.sigma2.is_finite() {
            return Err(Error::InvalidInput("innovation variance must be positive".into()));
        }
        check_stationary(&self.ar)
    }
}

impl<T: Scalar> From<ArParams<T>> for ArmaSpec<T> {
    fn from(m: ArParams<T>) -> Self {
        Self {
            ar: m.phi,
            ma: Vec::new(),
            sigma2: m.sigma2,
        }
    }
}

/// Output of [`levinson_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonSolution<T> {
    /// Solution of Γ_p φ = γ_{1,p}.
    pub phi: Vec<T>,
    /// Reflection coefficients (partial autocorrelations) of orders 1..p.
    pub pacf: Vec<T>,
    /// One-step prediction-error variances of orders 0..p.
    pub variances: Vec<T>,
}

/// Solves the order-p Yule-Walker system Γ_p φ = γ_{1,p} by the
/// Levinson-Durbin recursion.
pub fn levinson_solve<T: Scalar>(acvf: &AcvfSeq<T>, p: usize) -> Result<LevinsonSolution<T>> {
    if p == 0 {
        return Err(Error::InvalidInput("Levinson-Durbin order must be at least 1".into()));
    }
    acvf.require_lag(p)?;
    let g = acvf.gamma();
    let floor = g[0] * T::lit(SINGULARITY_FLOOR);
    let mut phi: Vec<T> = Vec::with_capacity(p);
    let mut prev: Vec<T> = Vec::with_capacity(p);
    let mut pacf = Vec::with_capacity(p);
    let mut variances = Vec::with_capacity(p + 1);
    let mut v = g[0];
    variances.push(v);
    for j in 1..=p {
        let acc = g[j] - (1..j).map(|i| phi[i - 1] * g[j - i]).sum::<T>();
        let kappa = acc / v;
        prev.clone_from(&phi);
        for i in 1..j {
            phi[i - 1] = prev[i - 1] - kappa * prev[j - i - 1];
        }
        phi.push(kappa);
        pacf.push(kappa);
        v = v * (T::one() - kappa * kappa);
        if !(v > floor) {
            return Err(Error::SingularToeplitz { order: j });
        }
        variances.push(v);
    }
    Ok(LevinsonSolution {
        phi,
        pacf,
        variances,
    })
}

/// Step-down recursion: AR coefficients to partial autocorrelations.
/// Fails with `NonStationary` as soon as a reflection coefficient leaves (−1, 1).
pub fn ar_to_pacf<T: Scalar>(phi: &[T]) -> Result<PacfParams<T>> {
    let p = phi.len();
    let mut cur = phi.to_vec();
    let mut r = vec![T::zero(); p];
    for j in (1..=p).rev() {
        let k = cur[j - 1];
        if !(k.abs() < T::one()) {
            return Err(Error::NonStationary {
                order: j,
                reflection: k.as_f64(),
            });
        }
        r[j - 1] = k;
        let denom = T::one() - k * k;
        let next: Vec<T> = (1..j)
            .map(|i| (cur[i - 1] + k * cur[j - i - 1]) / denom)
            .collect();
        cur = next;
    }
    Ok(PacfParams { r })
}

/// Step-up recursion: partial autocorrelations to (stationary) AR coefficients.
pub fn pacf_to_ar<T: Scalar>(pacf: &PacfParams<T>) -> Vec<T> {
    let mut phi: Vec<T> = Vec::with_capacity(pacf.order());
    for (j, &k) in pacf.values().iter().enumerate() {
        let prev = phi.clone();
        for i in 0..j {
            phi[i] = prev[i] - k * prev[j - 1 - i];
        }
        phi.push(k);
    }
    phi
}

/// Step-up recursion together with the Jacobian ∂φ_i/∂r_l (row i, column l).
pub(crate) fn pacf_to_ar_jacobian<T: Scalar>(r: &[T]) -> (Vec<T>, Matrix<T>) {
    let p = r.len();
    let mut phi: Vec<T> = Vec::with_capacity(p);
    let mut jac = Matrix::zeros(p, p);
    for j in 0..p {
        let k = r[j];
        let prev = phi.clone();
        let prev_jac = jac.clone();
        for i in 0..j {
            let mirror = j - 1 - i;
            phi[i] = prev[i] - k * prev[mirror];
            for l in 0..j {
                jac[(i, l)] = prev_jac[(i, l)] - k * prev_jac[(mirror, l)];
            }
            jac[(i, j)] = -prev[mirror];
        }
        phi.push(k);
        jac[(j, j)] = T::one();
    }
    (phi, jac)
}

pub(crate) fn check_stationary<T: Scalar>(phi: &[T]) -> Result<()> {
    ar_to_pacf(phi).map(|_| ())
}

/// Autocovariances γ(0..K) of a stationary AR(p) model.
///
/// γ(0..p) come from the dense (p+1)-dimensional Yule-Walker system that
/// includes the innovation variance; higher lags follow the AR recursion.
pub fn ar_acvf<T: Scalar>(model: &ArParams<T>, max_lag: usize) -> Result<AcvfSeq<T>> {
    check_stationary(&model.phi)?;
    if !(model.sigma2 > T::zero()) {
        return Err(Error::InvalidInput("innovation variance must be positive".into()));
    }
    let phi = &model.phi;
    let p = phi.len();
    // Row k: γ(k) − Σ_j φ_j γ(|k−j|) = σ² δ_{k0}.
    let mut a = Matrix::identity(p + 1);
    for k in 0..=p {
        for (j, &f) in phi.iter().enumerate() {
            let lag = k.abs_diff(j + 1);
            a[(k, lag)] -= f;
        }
    }
    let mut rhs = vec![T::zero(); p + 1];
    rhs[0] = model.sigma2;
    let head = a.solve_lu(&rhs).ok_or(Error::NonStationary {
        order: p,
        reflection: 1.0,
    })?;
    let mut gamma = head;
    gamma.truncate(max_lag + 1);
    for k in gamma.len()..=max_lag {
        let v = (1..=p).map(|j| phi[j - 1] * gamma[k - j]).sum();
        gamma.push(v);
    }
    Ok(AcvfSeq { gamma })
}

/// Autocovariances γ(0..K) of a stationary ARMA process from its MA(∞)
/// ψ-weights. Pure MA processes are exact; otherwise the expansion stops once
/// a geometric bound on the neglected tail drops below 1e-12·γ(0).
pub fn arma_acvf<T: Scalar>(spec: &ArmaSpec<T>, max_lag: usize) -> Result<AcvfSeq<T>> {
    spec.validate()?;
    let psi = psi_weights(spec, max_lag);
    let gamma = (0..=max_lag)
        .map(|k| {
            let s: T = psi.iter().zip(psi.iter().skip(k)).map(|(&a, &b)| a * b).sum();
            spec.sigma2 * s
        })
        .collect();
    Ok(AcvfSeq { gamma })
}

/// ψ-weights long enough that Σ_j ψ_j ψ_{j+k} is converged for every k ≤ max_lag.
fn psi_weights<T: Scalar>(spec: &ArmaSpec<T>, max_lag: usize) -> Vec<T> {
    const MAX_TERMS: usize = 2_000_000;
    let p = spec.ar.len();
    let q = spec.ma.len();
    let next = |psi: &[T], j: usize| -> T {
        let mut v = if j == 0 {
            T::one()
        } else if j <= q {
            spec.ma[j - 1]
        } else {
            T::zero()
        };
        for i in 1..=p.min(j) {
            v += spec.ar[i - 1] * psi[j - i];
        }
        v
    };
    let mut psi: Vec<T> = Vec::new();
    if p == 0 {
        for j in 0..=q {
            psi.push(next(&psi, j));
        }
        return psi;
    }
    // Past the MA part the ψ state evolves by the companion matrix, so its
    // squared magnitude decays like rho^(2j). The margin absorbs the
    // polynomial factors of repeated or clustered roots.
    let rho = spectral_radius(&companion_matrix(&spec.ar));
    let decay = ((T::one() + rho) / T::lit(2.0)).max(rho.sqrt());
    let tail_factor = T::one() / (T::one() - decay * decay);
    let tol = T::lit(1e-13);
    let mut energy = T::zero();
    let mut j = 0;
    loop {
        let v = next(&psi, j);
        psi.push(v);
        energy += v * v;
        j += 1;
        if j > q + p && j > max_lag {
            let state: T = psi[j - p..].iter().map(|&x| x * x).sum();
            if state * tail_factor * T::from_count(p) <= tol * energy || j >= MAX_TERMS {
                break;
            }
        }
    }
    // Extra terms so the lag-k products use the same truncation point.
    for _ in 0..max_lag {
        let v = next(&psi, j);
        psi.push(v);
        j += 1;
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn levinson_order_one() {
        let acvf = AcvfSeq::new(vec![1.0, 0.5]).unwrap();
        let sol = levinson_solve(&acvf, 1).unwrap();
        assert!(close(sol.phi[0], 0.5, 1e-15));
        assert!(close(sol.pacf[0], 0.5, 1e-15));
        assert!(close(sol.variances[0], 1.0, 1e-15));
        assert!(close(sol.variances[1], 0.75, 1e-15));
    }

    #[test]
    fn levinson_exact_ar1_sequence_has_zero_second_reflection() {
        let acvf = AcvfSeq::new(vec![1.0, 0.5, 0.25]).unwrap();
        let sol = levinson_solve(&acvf, 2).unwrap();
        assert!(close(sol.phi[0], 0.5, 1e-15));
        assert!(close(sol.phi[1], 0.0, 1e-15));
        assert!(close(sol.pacf[1], 0.0, 1e-15));
    }

    #[test]
    fn levinson_near_unit_correlation_and_singular_sequence() {
        let near = AcvfSeq::new(vec![1.0, 0.999999999999]).unwrap();
        assert!(levinson_solve(&near, 1).is_ok());
        let flat = AcvfSeq::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            levinson_solve(&flat, 2),
            Err(Error::SingularToeplitz { .. })
        ));
    }

    #[test]
    fn levinson_needs_enough_lags() {
        let acvf = AcvfSeq::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(
            levinson_solve(&acvf, 2),
            Err(Error::InsufficientLags {
                needed: 2,
                available: 1
            })
        );
    }

    #[test]
    fn ar1_acvf_closed_form() {
        let m = ArParams::new(vec![0.5], 1.0).unwrap();
        let g = ar_acvf(&m, 2).unwrap();
        for (a, b) in g.gamma().iter().zip([4.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]) {
            assert!(close(*a, b, 1e-14));
        }
    }

    #[test]
    fn white_noise_acvf() {
        let g = ar_acvf(&ArParams::white_noise(2.0), 3).unwrap();
        assert_eq!(g.gamma(), &[2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ar_acvf_rejects_unit_root() {
        let m = ArParams {
            phi: vec![0.0, -1.0],
            sigma2: 1.0,
        };
        assert!(matches!(ar_acvf(&m, 3), Err(Error::NonStationary { .. })));
    }

    #[test]
    fn ma1_acvf_is_exact() {
        let spec = ArmaSpec::new(vec![], vec![0.4], 1.0).unwrap();
        let g = arma_acvf(&spec, 3).unwrap();
        assert_eq!(g.gamma().len(), 4);
        assert!(close(g.at(0), 1.16, 1e-15));
        assert!(close(g.at(1), 0.4, 1e-15));
        assert_eq!(g.at(2), 0.0);
        assert_eq!(g.at(3), 0.0);
    }

    #[test]
    fn arma_with_no_ma_matches_ar_route() {
        let m = ArParams::new(vec![0.5], 1.0).unwrap();
        let a = ar_acvf(&m, 6).unwrap();
        let b = arma_acvf(&m.clone().into(), 6).unwrap();
        for (x, y) in a.gamma().iter().zip(b.gamma()) {
            assert!(close(*x, *y, 1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn pacf_examples() {
        let one = PacfParams::new(vec![0.5]).unwrap();
        assert_eq!(pacf_to_ar(&one), vec![0.5]);
        let two = PacfParams::new(vec![0.5, 0.2]).unwrap();
        let phi = pacf_to_ar(&two);
        assert!(close(phi[0], 0.4, 1e-15));
        assert!(close(phi[1], 0.2, 1e-15));
        let back = ar_to_pacf(&phi).unwrap();
        assert!(close(back.values()[0], 0.5, 1e-15));
        assert!(close(back.values()[1], 0.2, 1e-15));
    }

    #[test]
    fn pacf_rejects_boundary() {
        assert!(PacfParams::new(vec![0.3, 1.0]).is_err());
        assert!(matches!(
            ar_to_pacf(&[0.0, -1.0]),
            Err(Error::NonStationary { order: 2, .. })
        ));
        assert!(ar_to_pacf(&[1.2]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let r = [0.3, -0.6, 0.45, 0.1];
        let (phi, jac) = pacf_to_ar_jacobian(&r);
        assert_eq!(phi, pacf_to_ar(&PacfParams::new(r.to_vec()).unwrap()));
        let h = 1e-6;
        for l in 0..r.len() {
            let mut up = r;
            let mut dn = r;
            up[l] += h;
            dn[l] -= h;
            let fu = pacf_to_ar(&PacfParams::new(up.to_vec()).unwrap());
            let fd = pacf_to_ar(&PacfParams::new(dn.to_vec()).unwrap());
            for i in 0..r.len() {
                let fdiff = (fu[i] - fd[i]) / (2.0 * h);
                assert!(close(jac[(i, l)], fdiff, 1e-8), "({i},{l})");
            }
        }
    }

    #[test]
    fn acvf_validation() {
        assert!(AcvfSeq::<f64>::new(vec![]).is_err());
        assert!(AcvfSeq::new(vec![0.0, 0.0]).is_err());
        assert!(AcvfSeq::new(vec![1.0, 1.5]).is_err());
        // |γ(k)| ≤ γ(0) but not positive semidefinite.
        assert!(AcvfSeq::new(vec![1.0, 0.9, -0.9]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let m = ArParams::new(vec![0.5f32, 0.2], 1.0).unwrap();
        let g = ar_acvf(&m, 4).unwrap();
        let sol = levinson_solve(&g, 2).unwrap();
        assert!((sol.phi[0] - 0.5).abs() < 1e-5);
        assert!((sol.phi[1] - 0.2).abs() < 1e-5);
    }
}
