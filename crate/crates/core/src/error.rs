use alloc::string::String;

use crate::CountryCode;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or inconsistent input data.
    Data,
    /// Caller passed an argument outside the operation's domain.
    InvalidArgument,
    /// An estimator or formula could not produce a finite answer.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid country code {0:?}: expected three ASCII letters or digits")]
    InvalidCountryCode(String),
    #[error("{country} {year}: year outside [1950, 2025]")]
    YearOutOfRange { country: CountryCode, year: i32 },
    #[error("{country} {year}: {field} must be positive, got {value}")]
    NonPositiveValue {
        country: CountryCode,
        year: i32,
        field: &'static str,
        value: f64,
    },
    #[error("duplicate observation for ({country}, {year})")]
    DuplicateObservation { country: CountryCode, year: i32 },
    #[error("{country} mapped to conflicting regions {first:?} and {second:?}")]
    ConflictingRegion {
        country: CountryCode,
        first: String,
        second: String,
    },
    #[error("{country} {year}: oil rents must be non-negative, got {value}")]
    NegativeOilRent {
        country: CountryCode,
        year: i32,
        value: f64,
    },
    #[error("invalid filter configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("panel is empty after filtering")]
    EmptyPanel,
    #[error("invalid window: t0 = {t0} must be before t1 = {t1}")]
    InvalidWindow { t0: i32, t1: i32 },
    #[error("no country has the required variables in both {t0} and {t1}")]
    EmptySample { t0: i32, t1: i32 },
    #[error("sample too small: {found} countries, need at least {required}")]
    SampleTooSmall { found: usize, required: usize },
    #[error("year {year}: {found} countries with the required variables, need at least {required}")]
    InsufficientCountries { year: i32, found: usize, required: usize },
    #[error("beta is not identified: initial log incomes have no variation")]
    UnidentifiedBeta,
    #[error("nonlinear least squares did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("half-life undefined for beta = {beta} over horizon {horizon}: no convergence")]
    UndefinedHalfLife { beta: f64, horizon: f64 },
    #[error("percentile {0} outside [0, 100]")]
    PercentileOutOfRange(f64),
    #[error("empty series")]
    EmptySeries,
    #[error("invalid percentile grid: {0}")]
    InvalidGrid(&'static str),
    #[error("percentile {0} is not a grid point")]
    NotOnGrid(f64),
    #[error("capital share {0} outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("negative investment {value} at position {index}")]
    NegativeInvestment { index: usize, value: f64 },
    #[error("year {year} outside capital path [{first}, {last}]")]
    PathYearOutOfRange { year: i32, first: i32, last: i32 },
    #[error("invalid synthetic specification: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidCountryCode(_)
            | YearOutOfRange { .. }
            | NonPositiveValue { .. }
            | DuplicateObservation { .. }
            | ConflictingRegion { .. }
            | NegativeOilRent { .. }
            | EmptyPanel
            | EmptySample { .. }
            | SampleTooSmall { .. }
            | InsufficientCountries { .. }
            | NegativeInvestment { .. } => ErrorKind::Data,
            UnidentifiedBeta | NoConvergence { .. } | UndefinedHalfLife { .. } => ErrorKind::Numerical,
            InvalidConfig(_)
            | InvalidWindow { .. }
            | PercentileOutOfRange(_)
            | EmptySeries
            | InvalidGrid(_)
            | NotOnGrid(_)
            | AlphaOutOfRange(_)
            | InvalidParameter(_)
            | PathYearOutOfRange { .. }
            | InvalidSpec(_) => ErrorKind::InvalidArgument,
        }
    }

    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidCountryCode(_)
            | YearOutOfRange { .. }
            | NonPositiveValue { .. }
            | DuplicateObservation { .. }
            | ConflictingRegion { .. }
            | NegativeOilRent { .. }
            | InvalidConfig(_)
            | EmptyPanel
            | InvalidWindow { .. }
            | EmptySample { .. } => "ingest",
            SampleTooSmall { .. } | UnidentifiedBeta | NoConvergence { .. } | UndefinedHalfLife { .. } => "convergence",
            PercentileOutOfRange(_) | EmptySeries => "stats",
            InsufficientCountries { .. } | InvalidGrid(_) | NotOnGrid(_) | AlphaOutOfRange(_) => "decomposition",
            NegativeInvestment { .. } | PathYearOutOfRange { .. } => "capital",
            InvalidParameter(_) => "core",
            InvalidSpec(_) => "oracle",
        }
    }
}
