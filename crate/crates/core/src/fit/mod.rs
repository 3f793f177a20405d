//! Small-dimensional optimizers used by the analysis routines.

mod brent;
mod lm;

use thiserror::Error;

pub use brent::{minimize_scalar, BrentOptions, BrentReport};
pub use lm::{jacobian_central, jacobian_forward, levenberg_marquardt, LmOptions, LmReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("fit needs {needed} residuals, got {got}")]
    TooFewResiduals { needed: usize, got: usize },
    #[error("residuals are not finite at the starting point")]
    NonFiniteStart,
    #[error("invalid bracket [{lo}, {hi}]")]
    BadBracket { lo: f64, hi: f64 },
    #[error("objective is not finite anywhere in the bracket")]
    NonFiniteObjective,
}
