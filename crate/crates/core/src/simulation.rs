//! Seeded data generators and the replicated experiment runner.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::Serialize;

use crate::acvf::{arma_acvf, check_stationary, ArParams, ArmaSpec};
use crate::error::{Error, Result};
use crate::estimator::{fit_match, fit_ols, FitOptions};
use crate::loss::{empirical_q, population_q, SeriesSample};
use crate::rng::{mix, stream};
use crate::scalar::Scalar;
use crate::selection::select_order;

pub const ARMA_BURN_IN: usize = 200;
pub const TAR_BURN_IN: usize = 500;
/// Substream of a replicate seed used for held-out evaluation series.
const EVALUATION_STREAM: u64 = 0x45_56_41_4C;

/// Innovation law, always scaled to variance σ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Innovations {
    Gaussian,
    /// Student-t rescaled to unit variance; needs df > 2.
    StudentT { df: f64 },
}

impl Innovations {
    fn validate(&self) -> Result<()> {
        match *self {
            Innovations::StudentT { df } if !(df > 2.0) || !df.is_finite() => Err(Error::InvalidInput(
                "Student-t innovations need finite df > 2".into(),
            )),
            _ => Ok(()),
        }
    }

    fn sampler(&self, seed: u64) -> impl FnMut() -> f64 {
        let mut rng = stream(seed);
        let law = *self;
        let t = match law {
            Innovations::StudentT { df } => Some((StudentT::new(df).expect("df validated"), ((df - 2.0) / df).sqrt())),
            Innovations::Gaussian => None,
        };
        move || match &t {
            Some((dist, scale)) => dist.sample(&mut rng) * scale,
            None => rng.sample(StandardNormal),
        }
    }
}

/// Two-regime threshold AR:
/// y_t = φ_low' y_{t−1..} + e_t when y_{t−d} ≤ c, else φ_high' y_{t−1..} + e_t.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TarSpec<T> {
    pub phi_low: Vec<T>,
    pub phi_high: Vec<T>,
    pub threshold: T,
    pub delay: usize,
    pub sigma2: T,
}

impl<T: Scalar> TarSpec<T> {
    pub fn validate(&self) -> Result<()> {
        check_stationary(&self.phi_low)?;
        check_stationary(&self.phi_high)?;
        if self.delay == 0 {
            return Err(Error::InvalidInput("threshold delay must be at least 1".into()));
        }
        if !(self.sigma2 > T::zero()) || !self.threshold.is_finite() {
            return Err(Error::InvalidInput("TAR needs finite threshold and positive variance".into()));
        }
        Ok(())
    }
}

/// Simulates n observations of an ARMA process from zero initial values,
/// discarding the first `burnin + max(p, q)` steps.
pub fn simulate_arma<T: Scalar>(spec: &ArmaSpec<T>, n: usize, seed: u64, burnin: usize) -> Result<Vec<T>> {
    simulate_arma_with(spec, n, seed, burnin, Innovations::Gaussian)
}

pub fn simulate_arma_with<T: Scalar>(
    spec: &ArmaSpec<T>,
    n: usize,
    seed: u64,
    burnin: usize,
    innovations: Innovations,
) -> Result<Vec<T>> {
    spec.validate()?;
    innovations.validate()?;
    let p = spec.ar.len();
    let q = spec.ma.len();
    let warm = burnin + p.max(q);
    let total = warm + n;
    let sd = spec.sigma2.sqrt();
    let mut draw = innovations.sampler(seed);
    let mut e = Vec::with_capacity(total);
    let mut y: Vec<T> = Vec::with_capacity(total);
    for t in 0..total {
        let et = sd * T::lit(draw());
        e.push(et);
        let mut v = et;
        for j in 1..=p.min(t) {
            v += spec.ar[j - 1] * y[t - j];
        }
        for j in 1..=q.min(t) {
            v += spec.ma[j - 1] * e[t - j];
        }
        y.push(v);
    }
    Ok(y.split_off(warm))
}

/// Simulates a TAR process; the warm-up is `burnin + max(p_low, p_high)`
/// steps and lagged values before the start count as zero.
pub fn simulate_tar<T: Scalar>(spec: &TarSpec<T>, n: usize, seed: u64, burnin: usize) -> Result<Vec<T>> {
    simulate_tar_with(spec, n, seed, burnin, Innovations::Gaussian)
}

pub fn simulate_tar_with<T: Scalar>(
    spec: &TarSpec<T>,
    n: usize,
    seed: u64,
    burnin: usize,
    innovations: Innovations,
) -> Result<Vec<T>> {
    spec.validate()?;
    innovations.validate()?;
    let warm = burnin + spec.phi_low.len().max(spec.phi_high.len());
    let total = warm + n;
    let sd = spec.sigma2.sqrt();
    let mut draw = innovations.sampler(seed);
    let mut y: Vec<T> = Vec::with_capacity(total);
    for t in 0..total {
        let et = sd * T::lit(draw());
        let lagged = if t >= spec.delay { y[t - spec.delay] } else { T::zero() };
        let phi = if lagged <= spec.threshold {
            &spec.phi_low
        } else {
            &spec.phi_high
        };
        let mut v = et;
        for j in 1..=phi.len().min(t) {
            v += phi[j - 1] * y[t - j];
        }
        y.push(v);
    }
    Ok(y.split_off(warm))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Truth<T> {
    Arma(ArmaSpec<T>),
    Tar(TarSpec<T>),
}

/// A fitting procedure compared in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    /// Multi-step matching with fixed order and horizon.
    Match { p: usize, m: usize },
    /// One-step conditional least squares.
    Ols { p: usize },
    /// Bootstrap-penalized order selection followed by matching at the chosen order.
    Selected { p_max: usize, m: usize, bootstrap: usize },
}

impl Estimator {
    pub fn label(&self) -> String {
        match *self {
            Estimator::Match { p, m } => format!("match_p{p}_m{m}"),
            Estimator::Ols { p } => format!("ols_p{p}"),
            Estimator::Selected { p_max, m, bootstrap } => format!("select_pmax{p_max}_m{m}_b{bootstrap}"),
        }
    }

    fn max_order(&self) -> usize {
        match *self {
            Estimator::Match { p, .. } | Estimator::Ols { p } => p,
            Estimator::Selected { p_max, .. } => p_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentPlan<T> {
    pub truth: Truth<T>,
    pub innovations: Innovations,
    pub n: usize,
    pub replicates: usize,
    pub estimators: Vec<Estimator>,
    pub base_seed: u64,
    /// Fits are scored on the average squared error over horizons 1..=H.
    pub eval_horizon: usize,
    /// Warm-up override; defaults to 200 (ARMA) or 500 (TAR).
    pub burnin: Option<usize>,
    pub fit_options: FitOptions,
}

impl<T: Scalar> ExperimentPlan<T> {
    pub fn validate(&self) -> Result<()> {
        match &self.truth {
            Truth::Arma(spec) => spec.validate()?,
            Truth::Tar(spec) => spec.validate()?,
        }
        self.innovations.validate()?;
        if self.replicates == 0 {
            return Err(Error::InvalidInput("experiment needs at least one replicate".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidInput("experiment needs at least one estimator".into()));
        }
        if self.eval_horizon == 0 {
            return Err(Error::InvalidInput("evaluation horizon must be at least 1".into()));
        }
        for est in &self.estimators {
            let required = match *est {
                Estimator::Match { m: 0, .. } | Estimator::Selected { m: 0, .. } => {
                    return Err(Error::InvalidInput(format!("{}: horizon must be at least 1", est.label())));
                }
                Estimator::Selected { bootstrap: 0, .. } => {
                    return Err(Error::InvalidInput("selection needs at least one bootstrap replicate".into()));
                }
                Estimator::Match { p, m } => p + m,
                Estimator::Ols { p } => 2 * p + 1,
                Estimator::Selected { p_max, m, .. } => p_max + m,
            };
            if self.n < required.max(2) {
                return Err(Error::TooShort {
                    required: required.max(2),
                    actual: self.n,
                    max_feasible_order: None,
                });
            }
        }
        Ok(())
    }

    fn burnin(&self) -> usize {
        self.burnin.unwrap_or(match self.truth {
            Truth::Arma(_) => ARMA_BURN_IN,
            Truth::Tar(_) => TAR_BURN_IN,
        })
    }
}

/// One estimator on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow<T> {
    pub replicate: usize,
    pub seed: u64,
    pub estimator: String,
    pub order: usize,
    pub m: usize,
    pub phi: Vec<T>,
    pub sigma2: T,
    /// In-sample criterion of the fit (Q_p for matching, mean squared
    /// one-step residual for least squares).
    pub fit_loss: T,
    /// Population (ARMA truth) or held-out (TAR truth) loss over horizons 1..=H.
    pub score: T,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary<T> {
    pub estimator: String,
    pub mean_score: T,
    pub median_score: T,
}

/// Fraction of replicates where `first` scores strictly below `second`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseWin<T> {
    pub first: String,
    pub second: String,
    pub win_rate: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary<T> {
    pub replicates: usize,
    pub failed_replicates: Vec<usize>,
    pub scoring: String,
    pub eval_horizon: usize,
    pub estimators: Vec<EstimatorSummary<T>>,
    pub pairwise: Vec<PairwiseWin<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport<T> {
    pub rows: Vec<ReplicateRow<T>>,
    pub summary: ExperimentSummary<T>,
}

/// Runs every estimator on `replicates` independent simulated series.
///
/// Replicate r is simulated with seed `mix(base_seed, r)`. ARMA truths score
/// each fit by the population criterion under the true autocovariance; TAR
/// truths score by the empirical criterion on an independent series of
/// length 10n drawn from substream `mix(seed_r, EVALUATION_STREAM)`.
/// Replicates whose estimators fail are dropped from the report; more than
/// 10% failures abort the run.
pub fn run_experiment<T: Scalar>(plan: &ExperimentPlan<T>) -> Result<ExperimentReport<T>> {
    plan.validate()?;
    let h = plan.eval_horizon;
    let max_p = plan.estimators.iter().map(Estimator::max_order).max().unwrap_or(0);
    let true_acvf = match &plan.truth {
        Truth::Arma(spec) => Some(arma_acvf(spec, max_p + h)?),
        Truth::Tar(_) => None,
    };

    let outcomes: Vec<Result<Vec<ReplicateRow<T>>>> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = mix(plan.base_seed, r as u64);
            let values = simulate(plan, plan.n, seed)?;
            let series = SeriesSample::new(values)?;
            let holdout = match plan.truth {
                Truth::Tar(_) => Some(SeriesSample::new(simulate(
                    plan,
                    10 * plan.n,
                    mix(seed, EVALUATION_STREAM),
                )?)?),
                Truth::Arma(_) => None,
            };
            plan.estimators
                .iter()
                .map(|est| {
                    let (model, m, fit_loss, converged) = run_estimator(est, &series, seed, &plan.fit_options)?;
                    let score = match (&true_acvf, &holdout) {
                        (Some(acvf), _) => population_q(acvf, &model, model.order(), h)?,
                        (None, Some(eval)) => empirical_q(eval, &model, h)?,
                        (None, None) => unreachable!("truth provides one scoring route"),
                    };
                    Ok(ReplicateRow {
                        replicate: r,
                        seed,
                        estimator: est.label(),
                        order: model.order(),
                        m,
                        phi: model.phi,
                        sigma2: model.sigma2,
                        fit_loss,
                        score,
                        converged,
                    })
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut failed = Vec::new();
    let mut first_failure = None;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(mut rs) => rows.append(&mut rs),
            Err(e) => {
                failed.push(r);
                first_failure.get_or_insert((r, e.to_string()));
            }
        }
    }
    if failed.len() * 10 > plan.replicates {
        let (replicate, message) = first_failure.expect("failures recorded");
        return Err(Error::TooManyFailedReplicates {
            failed: failed.len(),
            total: plan.replicates,
            replicate,
            message,
        });
    }
    let summary = summarize(plan, &rows, failed);
    Ok(ExperimentReport { rows, summary })
}

fn simulate<T: Scalar>(plan: &ExperimentPlan<T>, n: usize, seed: u64) -> Result<Vec<T>> {
    match &plan.truth {
        Truth::Arma(spec) => simulate_arma_with(spec, n, seed, plan.burnin(), plan.innovations),
        Truth::Tar(spec) => simulate_tar_with(spec, n, seed, plan.burnin(), plan.innovations),
    }
}

fn run_estimator<T: Scalar>(
    est: &Estimator,
    series: &SeriesSample<T>,
    seed: u64,
    opts: &FitOptions,
) -> Result<(ArParams<T>, usize, T, bool)> {
    match *est {
        Estimator::Match { p, m } => {
            let fit = fit_match(series, p, m, opts)?;
            Ok((fit.model, m, fit.q_value, fit.diagnostics.converged))
        }
        Estimator::Ols { p } => {
            let fit = fit_ols(series, p)?;
            let model = ArParams {
                phi: fit.phi,
                sigma2: fit.sigma2,
            };
            Ok((model, 1, fit.sigma2, true))
        }
        Estimator::Selected { p_max, m, bootstrap } => {
            let sel = select_order(series, p_max, m, bootstrap, seed, opts)?;
            let fit = sel.rows.into_iter().nth(sel.chosen_p).expect("chosen row exists").fit;
            Ok((fit.model, m, fit.q_value, fit.diagnostics.converged))
        }
    }
}

fn summarize<T: Scalar>(plan: &ExperimentPlan<T>, rows: &[ReplicateRow<T>], failed: Vec<usize>) -> ExperimentSummary<T> {
    let labels: Vec<String> = plan.estimators.iter().map(Estimator::label).collect();
    let k = labels.len();
    // Rows are grouped per replicate in estimator order.
    let scores: Vec<Vec<T>> = (0..k)
        .map(|e| rows.iter().skip(e).step_by(k).map(|r| r.score).collect())
        .collect();
    let estimators = labels
        .iter()
        .zip(&scores)
        .map(|(label, s)| EstimatorSummary {
            estimator: label.clone(),
            mean_score: mean(s),
            median_score: median(s),
        })
        .collect();
    let mut pairwise = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let wins = scores[a].iter().zip(&scores[b]).filter(|(x, y)| x < y).count();
            pairwise.push(PairwiseWin {
                first: labels[a].clone(),
                second: labels[b].clone(),
                win_rate: T::from_count(wins) / T::from_count(scores[a].len().max(1)),
            });
        }
    }
    ExperimentSummary {
        replicates: plan.replicates,
        failed_replicates: failed,
        scoring: match plan.truth {
            Truth::Arma(_) => "population".into(),
            Truth::Tar(_) => "holdout".into(),
        },
        eval_horizon: plan.eval_horizon,
        estimators,
        pairwise,
    }
}

fn mean<T: Scalar>(v: &[T]) -> T {
    if v.is_empty() {
        return T::nan();
    }
    v.iter().copied().sum::<T>() / T::from_count(v.len())
}

fn median<T: Scalar>(v: &[T]) -> T {
    if v.is_empty() {
        return T::nan();
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / T::lit(2.0)
    }
}
