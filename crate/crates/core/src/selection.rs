//! Order selection by the log matching criterion plus a resampling estimate
//! of its optimism.
//!
//! L(p) = log Q_p(θ̂_p) understates the population log loss L*(p) of the
//! fitted model. The gap E{L*(p) − L(p)} is estimated by a parametric residual
//! bootstrap in which the fitted AR(p) is the truth, so L* is computable
//! exactly on every replicate. The selected order minimizes L(p) plus that
//! estimate.

use rayon::prelude::*;
use serde::Serialize;

use crate::acvf::{ar_acvf, AcvfSeq, ArParams};
use crate::error::{Error, Result};
use crate::estimator::{fit_ideal, fit_match, fit_ols, FitOptions, FitResult};
use crate::loss::{check_length, empirical_q_phi, population_q, SeriesSample};
use crate::rng::mix;
use crate::scalar::Scalar;

/// Losses at or below this are treated as exact fits.
const DEGENERATE_LOSS: f64 = 1e-300;
const BURN_IN: usize = 200;
/// Replicates used for the control-variate mean, per refitted replicate.
const CONTROL_FACTOR: usize = 10;

/// L(p) = log Q_p(θ̂_p) and the fit it came from.
pub fn log_loss<T: Scalar>(
    series: &SeriesSample<T>,
    p: usize,
    m: usize,
    opts: &FitOptions,
) -> Result<(T, FitResult<T>)> {
    let fit = fit_match(series, p, m, opts)?;
    if !(fit.q_value > T::lit(DEGENERATE_LOSS)) {
        return Err(Error::DegenerateFit);
    }
    Ok((fit.q_value.ln(), fit))
}

/// L*(p) = log Q*_p(θ̃_p) under a known autocovariance.
pub fn ideal_log_loss<T: Scalar>(truth: &AcvfSeq<T>, p: usize, m: usize, opts: &FitOptions) -> Result<T> {
    Ok(fit_ideal(truth, p, m, opts)?.q_star.ln())
}

/// Both sides of L*(p) − L*(p+1) ≈ (Q*_p − Q*_{p+1}) / Q*_{p+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecreaseApprox<T> {
    /// L*(p) − L*(p+1).
    pub log_decrease: T,
    /// (Q*_p(θ̃_p) − Q*_{p+1}(θ̃_{p+1})) / Q*_{p+1}(θ̃_{p+1}).
    pub relative_decrease: T,
}

pub fn approx_decrease<T: Scalar>(
    truth: &AcvfSeq<T>,
    p: usize,
    m: usize,
    opts: &FitOptions,
) -> Result<DecreaseApprox<T>> {
    let q0 = fit_ideal(truth, p, m, opts)?.q_star;
    let q1 = fit_ideal(truth, p + 1, m, opts)?.q_star;
    Ok(DecreaseApprox {
        log_decrease: q0.ln() - q1.ln(),
        relative_decrease: (q0 - q1) / q1,
    })
}

/// Bootstrap estimate of E{L*(p) − L(p)}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapBias<T> {
    pub estimate: T,
    /// Replicates that entered the mean.
    pub used: usize,
    /// Degenerate replicates that were dropped.
    pub skipped: usize,
}

/// Parametric residual bootstrap of the optimism E{L*(p) − L(p)}.
///
/// 1. Fit θ̂_p and collect its centered one-step residuals over t = p..n−1.
/// 2. For b = 1..B, simulate a length-n series from the fitted AR recursion
///    (burn-in 200 + p) with innovations resampled from those residuals on
///    substream `mix(seed, b)`. The substream does not depend on p, so
///    neighbouring orders see common random numbers and their bias
///    estimates differ by far less Monte-Carlo noise than independent
///    streams would give.
/// 3. Refit each replicate; L⁽ᵇ⁾ is its log criterion and L*⁽ᵇ⁾ the log
///    population criterion of the refit under the fitted model's
///    autocovariance.
/// 4. Return the mean of L*⁽ᵇ⁾ − L⁽ᵇ⁾, computed as
///    mean(L*⁽ᵇ⁾ − L⁽ᵇ⁾ − D⁽ᵇ⁾) + mean(D) with the control variate
///    D⁽ᵇ⁾ = log Q*(θ̂_p) − log Q⁽ᵇ⁾(θ̂_p). D needs no refit, so its mean is
///    taken over 10·B replicates (the first B are the refitted ones).
///
/// Degenerate replicates are skipped; more than 20% skipped is an error.
/// Replicates may run in parallel; the result does not depend on scheduling.
pub fn bootstrap_bias<T: Scalar>(
    series: &SeriesSample<T>,
    p: usize,
    m: usize,
    replicates: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<BootstrapBias<T>> {
    let fit = fit_match(series, p, m, opts)?;
    bootstrap_bias_from_fit(series, &fit, replicates, seed, opts)
}

fn bootstrap_bias_from_fit<T: Scalar>(
    series: &SeriesSample<T>,
    fit: &FitResult<T>,
    replicates: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<BootstrapBias<T>> {
    if replicates == 0 {
        return Err(Error::InvalidInput("bootstrap needs at least one replicate".into()));
    }
    let y = series.values();
    let n = y.len();
    let p = fit.order;
    let m = fit.m;
    let phi = &fit.model.phi;
    let mut residuals: Vec<T> = (p..n)
        .map(|t| y[t] - (0..p).map(|j| phi[j] * y[t - 1 - j]).sum::<T>())
        .collect();
    let mean = residuals.iter().copied().sum::<T>() / T::from_count(residuals.len());
    residuals.iter_mut().for_each(|e| *e -= mean);
    let innovation_var = residuals.iter().map(|&e| e * e).sum::<T>() / T::from_count(residuals.len());
    if !(innovation_var > T::lit(DEGENERATE_LOSS)) {
        return Err(Error::DegenerateFit);
    }
    let world = ArParams {
        phi: phi.clone(),
        sigma2: innovation_var,
    };
    let world_acvf = ar_acvf(&world, p + m)?;

    // Control variate D = log Q*(θ̂) − log Q⁽ᵇ⁾(θ̂): the world model scored on
    // the replicate. It carries most of the replicate-to-replicate noise of
    // L* − L, and its mean is cheap to estimate because it needs no refit.
    let world_q = population_q(&world_acvf, &world, p, m)?.ln();
    let control = |sample: &[T]| -> Result<T> { Ok(world_q - empirical_q_phi(sample, phi, m)?.ln()) };

    let draws: Vec<Result<(T, Option<T>)>> = (0..replicates * CONTROL_FACTOR)
        .into_par_iter()
        .map(|b| {
            let sample = resample_series(phi, &residuals, n, mix(seed, b as u64));
            let d = control(&sample)?;
            if b >= replicates {
                return Ok((d, None));
            }
            let refit = fit_match(&SeriesSample::new(sample)?, p, m, opts)?;
            if !(refit.q_value > T::lit(DEGENERATE_LOSS)) {
                return Ok((d, Some(T::nan())));
            }
            let q_star = population_q(&world_acvf, &refit.model, p, m)?;
            Ok((d, Some(q_star.ln() - refit.q_value.ln() - d)))
        })
        .collect();

    let mut control_total = T::zero();
    let mut total = T::zero();
    let mut used = 0;
    let mut skipped = 0;
    for draw in draws {
        let (d, v) = draw?;
        control_total += d;
        match v {
            Some(v) if v.is_nan() => skipped += 1,
            Some(v) => {
                total += v;
                used += 1;
            }
            None => {}
        }
    }
    if skipped * 5 > replicates || used == 0 {
        return Err(Error::TooManyDegenerateReplicates {
            skipped,
            total: replicates,
        });
    }
    let control_mean = control_total / T::from_count(replicates * CONTROL_FACTOR);
    Ok(BootstrapBias {
        estimate: total / T::from_count(used) + control_mean,
        used,
        skipped,
    })
}

/// AR recursion driven by residuals drawn with replacement.
///
/// `residuals[i]` belongs to time p + i. Each generated time slot, counted
/// back from the end of the series, draws its residual from a counter-based
/// hash of (seed, slot): candidate times are uniform on 0..n and rejected
/// until one is at least p. Replicates of different orders sharing a seed
/// therefore reuse the same innovations wherever their residual ranges overlap.
fn resample_series<T: Scalar>(phi: &[T], residuals: &[T], n: usize, seed: u64) -> Vec<T> {
    let p = phi.len();
    let total = BURN_IN + p + n;
    let mut y = vec![T::zero(); total];
    for t in 0..total {
        let slot = mix(seed, (total - 1 - t) as u64);
        let time = (0u64..)
            .map(|c| (mix(slot, c) % n as u64) as usize)
            .find(|&time| time >= p)
            .expect("n > p");
        let e = residuals[time - p];
        let ar: T = (0..p.min(t)).map(|j| phi[j] * y[t - 1 - j]).sum();
        y[t] = ar + e;
    }
    y.split_off(total - n)
}

/// One row of the selection table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRow<T> {
    pub order: usize,
    /// L(p).
    pub log_loss: T,
    pub bias: T,
    /// L(p) + bias, exactly as stored.
    pub criterion: T,
    pub fit: FitResult<T>,
    pub replicates_used: usize,
    pub replicates_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult<T> {
    pub m: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub rows: Vec<OrderRow<T>>,
    pub chosen_p: usize,
    /// Set when several orders attain the minimum; the smallest wins.
    pub tie_break: Option<String>,
}

impl<T: Scalar> SelectionResult<T> {
    pub fn chosen(&self) -> &OrderRow<T> {
        &self.rows[self.chosen_p]
    }
}

/// Chooses p ∈ 0..=p_max minimizing L(p) + bootstrap bias(p).
pub fn select_order<T: Scalar>(
    series: &SeriesSample<T>,
    p_max: usize,
    m: usize,
    replicates: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<SelectionResult<T>> {
    if replicates == 0 {
        return Err(Error::InvalidInput("bootstrap needs at least one replicate".into()));
    }
    check_length(series.len(), p_max, m)?;
    let mut rows = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let (log_loss, fit) = log_loss(series, p, m, opts)?;
        let bias = bootstrap_bias_from_fit(series, &fit, replicates, seed, opts)?;
        rows.push(OrderRow {
            order: p,
            log_loss,
            bias: bias.estimate,
            criterion: log_loss + bias.estimate,
            fit,
            replicates_used: bias.used,
            replicates_skipped: bias.skipped,
        });
    }
    let values: Vec<T> = rows.iter().map(|r| r.criterion).collect();
    let (chosen_p, tie_break) = argmin_smallest(&values);
    Ok(SelectionResult {
        m,
        bootstrap: replicates,
        seed,
        rows,
        chosen_p,
        tie_break,
    })
}

/// Index of the minimum; exact ties go to the smallest index.
fn argmin_smallest<T: Scalar>(values: &[T]) -> (usize, Option<String>) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let tied: Vec<String> = values
        .iter()
        .enumerate()
        .filter(|&(i, &v)| i != best && v == values[best])
        .map(|(i, _)| i.to_string())
        .collect();
    let note = (!tied.is_empty()).then(|| {
        format!(
            "orders {} tie with {best}; the smallest order is kept",
            tied.join(", ")
        )
    });
    (best, note)
}

/// AIC(p) = log σ̂²_p + 2p/n with σ̂²_p the least-squares residual variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AicResult<T> {
    pub values: Vec<T>,
    pub chosen_p: usize,
}

pub fn aic_baseline<T: Scalar>(series: &SeriesSample<T>, p_max: usize) -> Result<AicResult<T>> {
    let n = series.len();
    let values = (0..=p_max)
        .map(|p| {
            let fit = fit_ols(series, p)?;
            if !(fit.sigma2 > T::lit(DEGENERATE_LOSS)) {
                return Err(Error::DegenerateFit);
            }
            Ok(fit.sigma2.ln() + T::lit(2.0) * T::from_count(p) / T::from_count(n))
        })
        .collect::<Result<Vec<T>>>()?;
    let (chosen_p, _) = argmin_smallest(&values);
    Ok(AicResult { values, chosen_p })
}
