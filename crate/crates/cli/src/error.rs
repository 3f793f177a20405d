//! Error classes and their exit statuses.

use pl_core::dynamics::DynamicsError;
use pl_core::fixtures::LoadError;
use pl_core::io::FormatError;
use pl_core::Error as CoreError;
use thiserror::Error;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FIT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Configuration, input format or validation.
    Config,
    /// Fit did not converge.
    Fit,
    /// Missing, empty, unreadable or unwritable file.
    Io,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Fit => "fit",
            Kind::Io => "io",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Config => EXIT_CONFIG,
            Kind::Fit => EXIT_FIT,
            Kind::Io => EXIT_IO,
        }
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: Kind::Config, message: message.into() }
    }

    pub fn fit(message: impl Into<String>) -> Self {
        Self { kind: Kind::Fit, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { kind: Kind::Io, message: message.into() }
    }

    /// Prefixes the message with the offending file.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        Self { kind: self.kind, message: format!("{}: {}", path.display(), self.message) }
    }
}

fn format_kind(e: &FormatError) -> Kind {
    match e {
        FormatError::Empty => Kind::Io,
        FormatError::Dynamics(DynamicsError::Fit(_)) => Kind::Fit,
        _ => Kind::Config,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::Fit(_) | CoreError::Dynamics(DynamicsError::Fit(_)) => Kind::Fit,
            CoreError::Cqed(pl_core::cqed::CqedError::Fit(_)) => Kind::Fit,
            CoreError::Format(f) => format_kind(f),
            _ => Kind::Config,
        };
        Self { kind, message: e.to_string() }
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CoreError::from(e).into()
            }
        })*
    };
}

via_core!(
    pl_core::spectra::SpectrumError,
    pl_core::cavity::CavityError,
    pl_core::cqed::CqedError,
    DynamicsError,
    pl_core::fit::FitError,
    pl_core::budget::BudgetError,
    FormatError
);

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io(m) => CliError::io(m),
            LoadError::Format(f) => f.into(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::config(format!("json: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(CliError::from(FormatError::Empty).kind, Kind::Io);
        assert_eq!(CliError::from(FormatError::NoRows).kind, Kind::Config);
        let fit = pl_core::fit::FitError::NonFiniteStart;
        assert_eq!(CliError::from(DynamicsError::Fit(fit.clone())).kind, Kind::Fit);
        assert_eq!(CliError::from(fit).kind, Kind::Fit);
        assert_eq!(CliError::from(LoadError::Io("x".into())).kind, Kind::Io);
        let codes: Vec<i32> = [Kind::Config, Kind::Fit, Kind::Io].iter().map(|k| k.exit_code()).collect();
        assert_eq!(codes, [2, 3, 4]);
    }
}
