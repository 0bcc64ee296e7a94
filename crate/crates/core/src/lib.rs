//! Autoregressive fitting by multi-step prediction-error matching.
//!
//! An AR(p) model is fitted by minimizing the average of its squared
//! 1..m-step-ahead prediction errors rather than the one-step error alone.
//! The crate also evaluates fits against the population ("ideal world")
//! criterion under a known autocovariance, and selects p by minimizing the
//! log criterion plus a parametric-bootstrap estimate of its optimism.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below name the double-precision instantiations used by the
//! command-line tool.

pub mod acvf;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod loss;
mod optim;
pub mod predictor;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod simulation;

pub use acvf::{
    ar_acvf, ar_to_pacf, arma_acvf, levinson_solve, pacf_to_ar, AcvfSeq, ArParams, ArmaSpec,
    LevinsonSolution, PacfParams,
};
pub use error::{Error, Result};
pub use estimator::{fit_ideal, fit_match, fit_ols, FitDiagnostics, FitOptions, FitResult, IdealFit, OlsFit};
pub use loss::{empirical_q, empirical_q_gradient, population_floor, population_q, SeriesSample};
pub use predictor::{
    companion_matrix, predictor_from_acvf, predictor_from_model, spectral_radius, PredictorCoeffs,
};
pub use scalar::Scalar;
pub use selection::{
    aic_baseline, approx_decrease, bootstrap_bias, ideal_log_loss, log_loss, select_order, AicResult,
    BootstrapBias, DecreaseApprox, OrderRow, SelectionResult,
};
pub use simulation::{
    run_experiment, simulate_arma, simulate_arma_with, simulate_tar, simulate_tar_with, Estimator,
    ExperimentPlan, ExperimentReport, Innovations, TarSpec, Truth,
};

pub type AcvfSeqF64 = AcvfSeq<f64>;
pub type ArParamsF64 = ArParams<f64>;
pub type ArmaSpecF64 = ArmaSpec<f64>;
pub type PacfParamsF64 = PacfParams<f64>;
pub type SeriesF64 = SeriesSample<f64>;
pub type FitResultF64 = FitResult<f64>;
pub type PredictorCoeffsF64 = PredictorCoeffs<f64>;
pub type SelectionResultF64 = SelectionResult<f64>;
pub type TarSpecF64 = TarSpec<f64>;
pub type ExperimentPlanF64 = ExperimentPlan<f64>;
pub type ExperimentReportF64 = ExperimentReport<f64>;
