use thiserror::Error;

/// Errors raised by the estimation and selection routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Toeplitz matrix is numerically singular at recursion order {order}")]
    SingularToeplitz { order: usize },

    #[error("autocovariance has lags up to {available} but lag {needed} is required")]
    InsufficientLags { needed: usize, available: usize },

    #[error("AR coefficients are not stationary (reflection coefficient {reflection} at order {order})")]
    NonStationary { order: usize, reflection: f64 },

    #[error("series of length {actual} is too short: at least {required} observations are needed{}", max_order_hint(.max_feasible_order))]
    TooShort {
        required: usize,
        actual: usize,
        max_feasible_order: Option<usize>,
    },

    #[error("least-squares design matrix is singular")]
    SingularDesign,

    #[error("fitted loss is zero or numerically zero; the log loss is undefined")]
    DegenerateFit,

    #[error("{skipped} of {total} bootstrap replicates were degenerate (more than 20%)")]
    TooManyDegenerateReplicates { skipped: usize, total: usize },

    #[error("{failed} of {total} experiment replicates failed; first failure in replicate {replicate}: {message}")]
    TooManyFailedReplicates {
        failed: usize,
        total: usize,
        replicate: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn max_order_hint(max: &Option<usize>) -> String {
    match max {
        Some(p) => format!(" (largest feasible order is {p})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
