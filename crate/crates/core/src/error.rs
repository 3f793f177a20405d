use thiserror::Error;

use crate::budget::BudgetError;
use crate::cavity::CavityError;
use crate::cqed::CqedError;
use crate::dynamics::DynamicsError;
use crate::fit::FitError;
use crate::io::FormatError;
use crate::spectra::SpectrumError;

/// Crate-level error, one variant per subsystem.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    Cqed(#[from] CqedError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub type Result<T> = std::result::Result<T, Error>;
