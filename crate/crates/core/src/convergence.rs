//! Unconditional beta-convergence and sigma-dispersion statistics.
//!
//! The growth regression is
//!
//! ```text
//! (1/s) ln(y_i,t1 / y_i,t0) = b0 - ((1 - exp(beta s)) / s) ln y_i,t0 + e_i
//! ```
//!
//! with `s = t1 - t0`. It is fitted by damped Gauss-Newton; standard errors
//! are HC1 sandwich estimates built from the Jacobian at the optimum. A
//! negative `beta` means poorer countries grew faster.

use alloc::vec::Vec;

use crate::ingest::{Panel, SUB_SAHARAN_AFRICA};
use crate::math::{exp, exp_m1, ln, ln_1p, sqrt};
use crate::nlls::{self, invert2, normal_equations, TwoParamModel};
use crate::stats::{self, percentile_value, VarianceNorm};
use crate::{Error, Result};

use crate::ingest::AnalysisSample;

/// Minimum countries for a growth regression.
pub const MIN_REGRESSION_N: usize = 3;
/// Minimum countries per year for a dispersion row (the top-5/bottom-5
/// income ratio needs ten).
pub const MIN_DISPERSION_N: usize = 10;
/// Below this per-year closure rate the half-life is reported as infinite.
pub const HALF_LIFE_RATE_FLOOR: f64 = 1e-12;
/// `exp(beta s)` below this means the fit ran off to the `beta -> -inf`
/// boundary, where the slope saturates at `-1/s` and beta is not attained.
const BOUNDARY_EXP_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaEstimate {
    /// Intercept, per-year growth units.
    pub beta0: f64,
    /// Convergence rate, per year.
    pub beta: f64,
    pub se_beta0: f64,
    pub se_beta: f64,
    pub n: usize,
    pub t0: i32,
    pub t1: i32,
    /// Horizon `t1 - t0` in years.
    pub horizon: f64,
    pub ssr: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Whether the standard errors are HC1 (`true`) or classical.
    pub robust: bool,
}

impl BetaEstimate {
    /// Coefficient on `ln y_t0`: `-(1 - exp(beta s)) / s`.
    pub fn slope(&self) -> f64 {
        slope_from_beta(self.beta, self.horizon)
    }

    pub fn t_stat(&self) -> f64 {
        self.beta / self.se_beta
    }

    pub fn half_life(&self) -> Result<f64> {
        half_life(self.beta, self.horizon)
    }
}

/// `b = (exp(beta s) - 1) / s`
pub fn slope_from_beta(beta: f64, horizon: f64) -> f64 {
    exp_m1(beta * horizon) / horizon
}

/// Inverse of [`slope_from_beta`]; `None` when `1 + b s <= 0`.
pub fn beta_from_slope(slope: f64, horizon: f64) -> Option<f64> {
    let arg = slope * horizon;
    (arg > -1.0).then(|| ln_1p(arg) / horizon)
}

struct GrowthRegression {
    log_start: Vec<f64>,
    growth: Vec<f64>,
    horizon: f64,
}

impl GrowthRegression {
    fn new(sample: &AnalysisSample) -> Self {
        let horizon = sample.horizon();
        let log_start: Vec<f64> = sample.rows().iter().map(|r| ln(r.y_start)).collect();
        let growth = sample
            .rows()
            .iter()
            .map(|r| ln(r.y_end / r.y_start) / horizon)
            .collect();
        GrowthRegression {
            log_start,
            growth,
            horizon,
        }
    }
}

impl TwoParamModel for GrowthRegression {
    fn len(&self) -> usize {
        self.growth.len()
    }

    fn residual(&self, i: usize, p: [f64; 2]) -> (f64, [f64; 2]) {
        let x = self.log_start[i];
        let e = exp(p[1] * self.horizon);
        let fitted = p[0] + (e - 1.0) / self.horizon * x;
        (self.growth[i] - fitted, [1.0, e * x])
    }
}

/// Fits the growth regression by nonlinear least squares.
///
/// With `robust` the standard errors are HC1 sandwich estimates scaled by
/// `n / (n - 2)`; otherwise classical `SSR / (n - 2) * (J'J)^-1`.
pub fn beta_convergence(sample: &AnalysisSample, robust: bool) -> Result<BetaEstimate> {
    let n = sample.n();
    if n < MIN_REGRESSION_N {
        return Err(Error::SampleTooSmall {
            found: n,
            required: MIN_REGRESSION_N,
        });
    }
    let model = GrowthRegression::new(sample);
    let s = model.horizon;

    let mx = stats::mean(&model.log_start);
    let mg = stats::mean(&model.growth);
    let sxx: f64 = model.log_start.iter().map(|x| (x - mx) * (x - mx)).sum();
    let spread = model
        .log_start
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        });
    if spread.1 - spread.0 == 0.0 || !(sxx > 0.0) {
        return Err(Error::UnidentifiedBeta);
    }
    let sxg: f64 = model
        .log_start
        .iter()
        .zip(&model.growth)
        .map(|(x, g)| (x - mx) * (g - mg))
        .sum();
    let ols_slope = sxg / sxx;
    let beta_init = beta_from_slope(ols_slope, s).unwrap_or(-0.001);
    let beta0_init = mg - slope_from_beta(beta_init, s) * mx;

    let fit = nlls::fit(&model, [beta0_init, beta_init], nlls::Settings::default())?;
    let [beta0, beta] = fit.params;
    if !(exp(beta * s) > BOUNDARY_EXP_FLOOR) || !beta.is_finite() {
        return Err(Error::NoConvergence {
            iterations: fit.iterations,
        });
    }

    let (a, _) = normal_equations(&model, fit.params);
    let a_inv = invert2(a).ok_or(Error::UnidentifiedBeta)?;
    let dof = (n - 2) as f64;
    let cov = if robust {
        let mut meat = [[0.0; 2]; 2];
        for i in 0..n {
            let (r, j) = model.residual(i, fit.params);
            let r2 = r * r;
            meat[0][0] += r2 * j[0] * j[0];
            meat[0][1] += r2 * j[0] * j[1];
            meat[1][1] += r2 * j[1] * j[1];
        }
        meat[1][0] = meat[0][1];
        let scale = n as f64 / dof;
        let mut out = sandwich(a_inv, meat);
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        out
    } else {
        let sigma2 = fit.ssr / dof;
        [
            [sigma2 * a_inv[0][0], sigma2 * a_inv[0][1]],
            [sigma2 * a_inv[1][0], sigma2 * a_inv[1][1]],
        ]
    };

    Ok(BetaEstimate {
        beta0,
        beta,
        se_beta0: sqrt(cov[0][0].max(0.0)),
        se_beta: sqrt(cov[1][1].max(0.0)),
        n,
        t0: sample.t0(),
        t1: sample.t1(),
        horizon: s,
        ssr: fit.ssr,
        converged: true,
        iterations: fit.iterations,
        robust,
    })
}

fn sandwich(bread: [[f64; 2]; 2], meat: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut tmp = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            tmp[i][j] = (0..2).map(|k| bread[i][k] * meat[k][j]).sum();
        }
    }
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (0..2).map(|k| tmp[i][k] * bread[k][j]).sum();
        }
    }
    out
}

/// Years to close half the gap: `-ln 2 / ln(1 - (1 - exp(beta s)) / s)`.
///
/// Returns `f64::INFINITY` when the implied closure rate is below
/// [`HALF_LIFE_RATE_FLOOR`].
pub fn half_life(beta: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive"));
    }
    if !(beta < 0.0) {
        return Err(Error::UndefinedHalfLife { beta, horizon });
    }
    let rate = -exp_m1(beta * horizon) / horizon;
    if !(rate < 1.0) {
        return Err(Error::UndefinedHalfLife { beta, horizon });
    }
    if rate < HALF_LIFE_RATE_FLOOR {
        return Ok(f64::INFINITY);
    }
    Ok(-core::f64::consts::LN_2 / ln_1p(-rate))
}

/// One row of a sigma-dispersion table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DispersionRow {
    pub year: i32,
    pub n: usize,
    pub p90_p10: f64,
    pub p90_p50: f64,
    pub p50_p10: f64,
    /// Variance of `ln y`.
    pub var_log: f64,
    /// Mean of the five highest incomes over mean of the five lowest.
    pub income_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DispersionOptions {
    pub exclude_ssa: bool,
    /// Drop the panel's configured variance exclusions from every measure.
    pub variance_sensitive: bool,
    pub norm: VarianceNorm,
}

/// Dispersion statistics of one cross-section of incomes.
pub fn dispersion_row(year: i32, incomes: &[f64], norm: VarianceNorm) -> Result<DispersionRow> {
    if incomes.len() < MIN_DISPERSION_N {
        return Err(Error::InsufficientCountries {
            year,
            found: incomes.len(),
            required: MIN_DISPERSION_N,
        });
    }
    let mut sorted = incomes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let p10 = percentile_value(&sorted, 10.0)?;
    let p50 = percentile_value(&sorted, 50.0)?;
    let p90 = percentile_value(&sorted, 90.0)?;
    let logs: Vec<f64> = sorted.iter().map(|y| ln(*y)).collect();
    let bottom = stats::mean(&sorted[..5]);
    let top = stats::mean(&sorted[sorted.len() - 5..]);
    let p90_p50 = p90 / p50;
    let p50_p10 = p50 / p10;
    Ok(DispersionRow {
        year,
        n: sorted.len(),
        p90_p10: p90_p50 * p50_p10,
        p90_p50,
        p50_p10,
        var_log: stats::variance(&logs, norm),
        income_ratio: top / bottom,
    })
}

pub fn dispersion_table(panel: &Panel, years: &[i32], opts: &DispersionOptions) -> Result<Vec<DispersionRow>> {
    years
        .iter()
        .map(|&year| {
            let incomes: Vec<f64> = panel
                .year_records(year)
                .filter(|r| !(opts.exclude_ssa && panel.region(r.country) == SUB_SAHARAN_AFRICA))
                .filter(|r| !(opts.variance_sensitive && panel.is_variance_excluded(r.country)))
                .filter_map(|r| r.y)
                .collect();
            dispersion_row(year, &incomes, opts.norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GrowthRow;
    use crate::CountryCode;
    use alloc::vec;

    fn sample_from(beta0: f64, beta: f64, s: i32, log_y0: &[f64]) -> AnalysisSample {
        let rows = log_y0
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let g = beta0 + slope_from_beta(beta, s as f64) * x;
                GrowthRow {
                    country: CountryCode::from_index(i).unwrap(),
                    y_start: exp(*x),
                    y_end: exp(x + s as f64 * g),
                }
            })
            .collect();
        AnalysisSample::new(2000, 2000 + s, rows).unwrap()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let x: Vec<f64> = (0..40).map(|i| 6.0 + 0.12 * i as f64).collect();
        let est = beta_convergence(&sample_from(0.02, -0.01, 20, &x), true).unwrap();
        assert!((est.beta0 - 0.02).abs() < 1e-8, "{est:?}");
        assert!((est.beta + 0.01).abs() < 1e-8);
        assert!(est.ssr < 1e-20);
        assert_eq!(est.horizon, 20.0);
    }

    #[test]
    fn degenerate_initial_income_is_unidentified() {
        let s = sample_from(0.02, -0.01, 20, &[8.0, 8.0, 8.0, 8.0]);
        assert_eq!(beta_convergence(&s, true).unwrap_err(), Error::UnidentifiedBeta);
    }

    #[test]
    fn too_few_countries() {
        let s = sample_from(0.02, -0.01, 20, &[8.0, 9.0]);
        assert!(matches!(
            beta_convergence(&s, true).unwrap_err(),
            Error::SampleTooSmall { found: 2, .. }
        ));
    }

    #[test]
    fn slope_beyond_minus_one_over_s_has_no_interior_optimum() {
        // Growth falls by more than 1/s per log point: 1 + b s < 0.
        let rows = (0..10)
            .map(|i| {
                let x = 6.0 + i as f64;
                GrowthRow {
                    country: CountryCode::from_index(i).unwrap(),
                    y_start: exp(x),
                    y_end: exp(x + 10.0 * (1.0 - 0.2 * x)),
                }
            })
            .collect();
        let s = AnalysisSample::new(2000, 2010, rows).unwrap();
        assert!(matches!(
            beta_convergence(&s, true).unwrap_err(),
            Error::NoConvergence { .. }
        ));
    }

    #[test]
    fn half_life_matches_reported_value() {
        let t = half_life(-0.0150, 19.0).unwrap();
        assert!((t - 53.0).abs() < 0.5, "{t}");
    }

    #[test]
    fn half_life_one_year_horizon() {
        // 1 - (1 - e^-0.05) = e^-0.05, so tau = ln 2 / 0.05.
        let t = half_life(-0.05, 1.0).unwrap();
        assert!((t - 13.862943611198906).abs() < 1e-12);
    }

    #[test]
    fn half_life_limits_and_errors() {
        assert_eq!(half_life(-1e-15, 20.0).unwrap(), f64::INFINITY);
        assert!(half_life(-1e-9, 20.0).unwrap() > 1e8);
        assert!(matches!(half_life(0.0, 20.0), Err(Error::UndefinedHalfLife { .. })));
        assert!(matches!(half_life(0.01, 20.0), Err(Error::UndefinedHalfLife { .. })));
        assert!(half_life(-0.01, 0.0).is_err());
    }

    #[test]
    fn reparameterisation_round_trip() {
        for beta in [-0.05, -0.0150, 0.0, 0.0047] {
            let b = slope_from_beta(beta, 19.0);
            assert!((beta_from_slope(b, 19.0).unwrap() - beta).abs() < 1e-15);
        }
        assert_eq!(beta_from_slope(-0.06, 20.0), None);
    }

    #[test]
    fn dispersion_row_identities() {
        let incomes: Vec<f64> = (1..=12).map(|i| (i * i) as f64 * 100.0).collect();
        let row = dispersion_row(2019, &incomes, VarianceNorm::Population).unwrap();
        assert_eq!(row.p90_p10, row.p90_p50 * row.p50_p10);
        assert!(row.p90_p10 >= 1.0 && row.p90_p50 >= 1.0 && row.p50_p10 >= 1.0);
        // top five: 8..12, bottom five: 1..5 (squares)
        let top = (64 + 81 + 100 + 121 + 144) as f64;
        let bottom = (1 + 4 + 9 + 16 + 25) as f64;
        assert!((row.income_ratio - top / bottom).abs() < 1e-12);
    }

    #[test]
    fn dispersion_needs_ten_countries() {
        let err = dispersion_row(1980, &[1.0; 9], VarianceNorm::Population).unwrap_err();
        assert!(matches!(err, Error::InsufficientCountries { found: 9, .. }));
    }

    #[test]
    fn dispersion_is_scale_invariant() {
        let incomes = vec![
            500.0, 900.0, 1300.0, 2200.0, 3100.0, 4000.0, 8000.0, 12000.0, 30000.0, 41000.0, 52000.0,
        ];
        let scaled: Vec<f64> = incomes.iter().map(|y| y * 1000.0).collect();
        let a = dispersion_row(2000, &incomes, VarianceNorm::Population).unwrap();
        let b = dispersion_row(2000, &scaled, VarianceNorm::Population).unwrap();
        for (x, y) in [
            (a.p90_p10, b.p90_p10),
            (a.p90_p50, b.p90_p50),
            (a.p50_p10, b.p50_p10),
            (a.var_log, b.var_log),
            (a.income_ratio, b.income_ratio),
        ] {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
