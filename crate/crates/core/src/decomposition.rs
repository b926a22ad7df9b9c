//! Percentile growth accounting with an income-varying capital share.
//!
//! For percentiles `p_lo < p_hi` of the cross-country income distribution,
//!
//! ```text
//! ln y(p_hi) - ln y(p_lo) = TFP + int a(p)/(1-a(p)) dln(k/y)/dp dp + [ln h(p_hi) - ln h(p_lo)]
//! ```
//!
//! The capital-output integral is evaluated with the trapezoid rule on the
//! profile grid, the human-capital term is an exact difference, and TFP is
//! whatever is left. With a constant share the capital term collapses to the
//! Hall-Jones closed form `a/(1-a) * [ln k/y(p_hi) - ln k/y(p_lo)]`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ingest::{Panel, PanelRecord, Warning, DECOMPOSITION_VARIABLES};
use crate::math::{ln, round};
use crate::stats::{self, value_at_rank, VarianceNorm};
use crate::{Error, Result};

/// Minimum countries per year for a percentile profile.
pub const MIN_PROFILE_N: usize = 10;
/// Capital share used by the variance decomposition unless overridden.
pub const DEFAULT_VARIANCE_ALPHA: f64 = 0.46;
const GRID_TOL: f64 = 1e-9;

/// How the capital share enters the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AlphaMode {
    /// Read alpha off the income distribution at each grid point.
    #[default]
    Varying,
    /// Use one share everywhere.
    Constant(f64),
}

impl AlphaMode {
    pub fn validate(self) -> Result<Self> {
        match self {
            AlphaMode::Constant(a) if !(a > 0.0 && a < 1.0) => Err(Error::AlphaOutOfRange(a)),
            m => Ok(m),
        }
    }
}

/// `ln y`, `ln k/y`, `ln h` and alpha read off the income-sorted distribution
/// at each grid percentile.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileProfile {
    year: i32,
    n_countries: usize,
    alpha_mode: AlphaMode,
    grid: Vec<f64>,
    ln_y: Vec<f64>,
    ln_ky: Vec<f64>,
    ln_h: Vec<f64>,
    alpha: Vec<f64>,
}

impl PercentileProfile {
    /// Builds a profile from explicit columns, checking its invariants.
    pub fn from_columns(
        year: i32,
        grid: Vec<f64>,
        ln_y: Vec<f64>,
        ln_ky: Vec<f64>,
        ln_h: Vec<f64>,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        validate_grid(&grid)?;
        let n = grid.len();
        if [ln_y.len(), ln_ky.len(), ln_h.len(), alpha.len()]
            .iter()
            .any(|l| *l != n)
        {
            return Err(Error::InvalidGrid("profile columns differ in length"));
        }
        if ln_y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidGrid("ln y must be non-decreasing along the grid"));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::AlphaOutOfRange(*a));
        }
        Ok(PercentileProfile {
            year,
            n_countries: 0,
            alpha_mode: AlphaMode::Varying,
            grid,
            ln_y,
            ln_ky,
            ln_h,
            alpha,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    /// Countries behind the profile (0 for profiles built from columns).
    pub fn n_countries(&self) -> usize {
        self.n_countries
    }

    pub fn alpha_mode(&self) -> AlphaMode {
        self.alpha_mode
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn ln_y(&self) -> &[f64] {
        &self.ln_y
    }

    pub fn ln_ky(&self) -> &[f64] {
        &self.ln_ky
    }

    pub fn ln_h(&self) -> &[f64] {
        &self.ln_h
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Same profile with every alpha replaced by `alpha`.
    pub fn with_constant_alpha(&self, alpha: f64) -> Result<Self> {
        AlphaMode::Constant(alpha).validate()?;
        Ok(PercentileProfile {
            alpha: alloc::vec![alpha; self.grid.len()],
            alpha_mode: AlphaMode::Constant(alpha),
            ..self.clone()
        })
    }

    pub fn with_alpha_mode(&self, mode: AlphaMode) -> Result<Self> {
        match mode.validate()? {
            AlphaMode::Varying => Ok(self.clone()),
            AlphaMode::Constant(a) => self.with_constant_alpha(a),
        }
    }

    fn index_of(&self, p: f64) -> Result<usize> {
        self.grid
            .iter()
            .position(|g| (g - p).abs() <= GRID_TOL)
            .ok_or(Error::NotOnGrid(p))
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("need at least two points"));
    }
    if grid.iter().any(|p| !(0.0..=100.0).contains(p)) {
        return Err(Error::InvalidGrid("points must lie in [0, 100]"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("points must be strictly increasing"));
    }
    Ok(())
}

/// Evenly spaced grid from `p_lo` to `p_hi` inclusive.
///
/// `step` has to divide the interval (to 1e-9).
pub fn percentile_grid(p_lo: f64, p_hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidGrid("step must be positive"));
    }
    if !(0.0..=100.0).contains(&p_lo) || !(0.0..=100.0).contains(&p_hi) || !(p_lo < p_hi) {
        return Err(Error::InvalidGrid("need 0 <= p_lo < p_hi <= 100"));
    }
    let intervals = round((p_hi - p_lo) / step);
    if ((p_hi - p_lo) - intervals * step).abs() > GRID_TOL {
        return Err(Error::InvalidGrid("step does not divide the interval"));
    }
    let k = intervals as usize;
    let mut grid: Vec<f64> = (0..k).map(|i| p_lo + i as f64 * step).collect();
    grid.push(p_hi);
    Ok(grid)
}

/// Records of `year` that qualify for decomposition, sorted by income.
fn decomposition_sample(panel: &Panel, year: i32) -> Vec<&PanelRecord> {
    let mut rows: Vec<&PanelRecord> = panel
        .year_records(year)
        .filter(|r| r.has_all(&DECOMPOSITION_VARIABLES))
        .collect();
    rows.sort_by(|a, b| {
        a.y.unwrap_or(0.0)
            .total_cmp(&b.y.unwrap_or(0.0))
            .then(a.country.cmp(&b.country))
    });
    rows
}

/// Reads `ln y`, `ln k/y`, `ln h` and alpha at each grid percentile.
///
/// Countries are sorted by income once; the companion variables are
/// interpolated at the same fractional rank, so they describe the countries
/// at that income percentile rather than their own marginal distributions.
pub fn percentile_profile(panel: &Panel, year: i32, grid: &[f64]) -> Result<PercentileProfile> {
    validate_grid(grid)?;
    let rows = decomposition_sample(panel, year);
    if rows.len() < MIN_PROFILE_N {
        return Err(Error::InsufficientCountries {
            year,
            found: rows.len(),
            required: MIN_PROFILE_N,
        });
    }
    // Present by construction of the decomposition sample.
    let col = |f: fn(&PanelRecord) -> f64| -> Vec<f64> { rows.iter().map(|r| f(r)).collect() };
    let ln_y_sorted = col(|r| ln(r.y.unwrap_or(f64::NAN)));
    let ln_ky_sorted = col(|r| ln(r.ky.unwrap_or(f64::NAN)));
    let ln_h_sorted = col(|r| ln(r.h.unwrap_or(f64::NAN)));
    let alpha_sorted = col(|r| r.decomposition_alpha().unwrap_or(f64::NAN));

    let read = |values: &[f64]| -> Result<Vec<f64>> { grid.iter().map(|p| value_at_rank(values, *p)).collect() };
    let profile = PercentileProfile {
        year,
        n_countries: rows.len(),
        alpha_mode: AlphaMode::Varying,
        grid: grid.to_vec(),
        ln_y: read(&ln_y_sorted)?,
        ln_ky: read(&ln_ky_sorted)?,
        ln_h: read(&ln_h_sorted)?,
        alpha: read(&alpha_sorted)?,
    };
    // Convex combinations of shares in (0, 1) stay in (0, 1).
    assert!(profile.alpha.iter().all(|a| *a > 0.0 && *a < 1.0));
    Ok(profile)
}

/// Log income gap between two percentiles and its three contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapDecomposition {
    pub year: i32,
    pub p_lo: f64,
    pub p_hi: f64,
    /// `ln y(p_hi) - ln y(p_lo)`.
    pub total: f64,
    pub contrib_ky: f64,
    pub contrib_h: f64,
    /// Residual: `total - contrib_ky - contrib_h`.
    pub contrib_tfp: f64,
    pub alpha_mode: AlphaMode,
}

/// Trapezoid-rule decomposition between two grid points of `profile`.
pub fn gap_decomposition(profile: &PercentileProfile, p_lo: f64, p_hi: f64) -> Result<GapDecomposition> {
    if !(p_lo < p_hi) {
        return Err(Error::InvalidGrid("need p_lo < p_hi"));
    }
    let lo = profile.index_of(p_lo)?;
    let hi = profile.index_of(p_hi)?;
    let weight = |a: f64| a / (1.0 - a);
    let contrib_ky: f64 = (lo..hi)
        .map(|k| {
            0.5 * (weight(profile.alpha[k + 1]) + weight(profile.alpha[k])) * (profile.ln_ky[k + 1] - profile.ln_ky[k])
        })
        .sum();
    let total = profile.ln_y[hi] - profile.ln_y[lo];
    let contrib_h = profile.ln_h[hi] - profile.ln_h[lo];
    Ok(GapDecomposition {
        year: profile.year,
        p_lo: profile.grid[lo],
        p_hi: profile.grid[hi],
        total,
        contrib_ky,
        contrib_h,
        contrib_tfp: total - contrib_ky - contrib_h,
        alpha_mode: profile.alpha_mode,
    })
}

/// Change in a gap decomposition between two years.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompositionChange {
    pub year_from: i32,
    pub year_to: i32,
    pub delta_total: f64,
    pub delta_ky: f64,
    pub delta_h: f64,
    pub delta_tfp: f64,
    pub start: GapDecomposition,
    pub end: GapDecomposition,
}

impl DecompositionChange {
    pub fn between(start: GapDecomposition, end: GapDecomposition) -> Self {
        DecompositionChange {
            year_from: start.year,
            year_to: end.year,
            delta_total: end.total - start.total,
            delta_ky: end.contrib_ky - start.contrib_ky,
            delta_h: end.contrib_h - start.contrib_h,
            delta_tfp: end.contrib_tfp - start.contrib_tfp,
            start,
            end,
        }
    }

    /// Shares of the total change attributed to (TFP, k/y, h).
    pub fn shares(&self) -> (f64, f64, f64) {
        (
            self.delta_tfp / self.delta_total,
            self.delta_ky / self.delta_total,
            self.delta_h / self.delta_total,
        )
    }
}

/// Decomposes the `p_hi / p_lo` gap in both years and differences them.
pub fn gap_change(
    panel: &Panel,
    year_from: i32,
    year_to: i32,
    p_lo: f64,
    p_hi: f64,
    grid: &[f64],
    alpha_mode: AlphaMode,
) -> Result<DecompositionChange> {
    let decompose = |year| -> Result<GapDecomposition> {
        let profile = percentile_profile(panel, year, grid)?.with_alpha_mode(alpha_mode)?;
        gap_decomposition(&profile, p_lo, p_hi)
    };
    Ok(DecompositionChange::between(decompose(year_from)?, decompose(year_to)?))
}

/// Cross-country variance of log income split into TFP, inputs and their
/// covariance under a Cobb-Douglas technology with a common share.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceDecomposition {
    pub year: i32,
    pub n: usize,
    pub alpha_const: f64,
    pub var_ln_y: f64,
    pub var_ln_a: f64,
    /// Variance of `ln y_kh = a/(1-a) ln k/y + ln h`.
    pub var_ln_ykh: f64,
    /// `2 Cov(ln A, ln y_kh)`.
    pub cov_term: f64,
}

/// Income concept for the variance decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum IncomeBasis {
    #[default]
    PerCapita,
    /// Requires employment data in the panel.
    PerWorker,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceOptions {
    pub alpha_const: f64,
    pub variance_sensitive: bool,
    pub basis: IncomeBasis,
    pub norm: VarianceNorm,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        VarianceOptions {
            alpha_const: DEFAULT_VARIANCE_ALPHA,
            variance_sensitive: false,
            basis: IncomeBasis::PerCapita,
            norm: VarianceNorm::Population,
        }
    }
}

pub fn variance_decomposition(panel: &Panel, year: i32, opts: &VarianceOptions) -> Result<VarianceDecomposition> {
    let a = AlphaMode::Constant(opts.alpha_const)
        .validate()
        .map(|_| opts.alpha_const)?;
    let weight = a / (1.0 - a);
    let mut ln_y = Vec::new();
    let mut ln_ykh = Vec::new();
    for r in decomposition_sample(panel, year) {
        if opts.variance_sensitive && panel.is_variance_excluded(r.country) {
            continue;
        }
        let income = match opts.basis {
            IncomeBasis::PerCapita => r.y,
            IncomeBasis::PerWorker => r.y_per_worker,
        };
        let (Some(y), Some(ky), Some(h)) = (income, r.ky, r.h) else {
            continue;
        };
        ln_y.push(ln(y));
        ln_ykh.push(weight * ln(ky) + ln(h));
    }
    if ln_y.is_empty() {
        return Err(Error::InsufficientCountries {
            year,
            found: 0,
            required: 1,
        });
    }
    let ln_a: Vec<f64> = ln_y.iter().zip(&ln_ykh).map(|(y, x)| y - x).collect();
    Ok(VarianceDecomposition {
        year,
        n: ln_y.len(),
        alpha_const: a,
        var_ln_y: stats::variance(&ln_y, opts.norm),
        var_ln_a: stats::variance(&ln_a, opts.norm),
        var_ln_ykh: stats::variance(&ln_ykh, opts.norm),
        cov_term: 2.0 * stats::covariance(&ln_a, &ln_ykh, opts.norm),
    })
}

/// Population-weighted mean capital-output ratio per region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionalCapitalOutput {
    pub year: i32,
    pub by_region: BTreeMap<String, f64>,
    pub warnings: Vec<Warning>,
}

pub fn regional_capital_output(panel: &Panel, year: i32) -> RegionalCapitalOutput {
    let mut sums: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for r in panel.year_records(year) {
        let entry = sums.entry(String::from(panel.region(r.country))).or_insert((0.0, 0.0));
        if let (Some(ky), Some(pop)) = (r.ky, r.pop) {
            entry.0 += pop * ky;
            entry.1 += pop;
        }
    }
    let mut by_region = BTreeMap::new();
    let mut warnings = Vec::new();
    for (region, (weighted, pop)) in sums {
        if pop > 0.0 {
            by_region.insert(region, weighted / pop);
        } else {
            warnings.push(Warning::RegionWithoutCoverage { region, year });
        }
    }
    RegionalCapitalOutput {
        year,
        by_region,
        warnings,
    }
}
