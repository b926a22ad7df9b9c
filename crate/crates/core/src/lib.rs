//! Cross-country income convergence and growth accounting.
//!
//! The crate covers four pieces of analysis over a country-year panel:
//!
//! - [`ingest`]: sample filters and derived variables (income per capita,
//!   capital-output ratio, human capital, capital share).
//! - [`convergence`]: unconditional beta-convergence by nonlinear least
//!   squares with heteroskedasticity-robust errors, half-lives and
//!   sigma-dispersion tables.
//! - [`decomposition`]: percentile-based decomposition of log income gaps into
//!   TFP, capital-output and human-capital contributions with a capital share
//!   that varies along the income distribution, plus a variance decomposition
//!   and population-weighted regional capital-output ratios.
//! - [`capital`]: perpetual-inventory capital stocks, steady-state seeding,
//!   the undepreciated-capital diagnostic and the Mincer human-capital map.
//!
//! [`oracle`] generates synthetic panels with known ground truth and holds the
//! brute-force estimators used to cross-check the numerical routines.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the CLI live
//! in the `convergence-cli` companion crate.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capital;
pub mod convergence;
pub mod country;
pub mod decomposition;
mod error;
pub mod ingest;
mod math;
mod nlls;
pub mod oracle;
pub mod stats;

pub use country::CountryCode;
pub use error::{Error, ErrorKind, Result};
