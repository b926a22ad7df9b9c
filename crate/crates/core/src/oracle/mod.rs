//! Synthetic data with known ground truth, plus brute-force estimators.
//!
//! Synthetic panels place country `i` of `n` at income percentile
//! `100 i / (n - 1)` and generate `ln A`, `ln k/y`, `ln h` and alpha as
//! polynomials in the rank `u = p / 100`. Income follows the Cobb-Douglas
//! intensive form `y = A (k/y)^(a/(1-a)) h`. Panels are emitted as raw
//! observations and run through [`build_panel`], so synthetic data exercises
//! the same path as real files.

mod rng;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

pub use rng::SeededRng;

use crate::convergence::slope_from_beta;
use crate::decomposition::{AlphaMode, GapDecomposition, PercentileProfile};
use crate::ingest::{
    build_panel, AnalysisSample, FilterConfig, GrowthRow, Observation, OilRentSeries, Panel, RegionMap,
};
use crate::math::{exp, ln, round};
use crate::{CountryCode, Error, Result};

/// Polynomial in the income rank `u = p / 100`, lowest order first.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Polynomial(vec![c])
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        Polynomial(vec![c0, c1])
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * u + k as f64 * c)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|c| *c == 0.0)
    }
}

/// Generating functions for one cross-section.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YearSpec {
    pub year: i32,
    pub ln_tfp: Polynomial,
    pub ln_ky: Polynomial,
    pub ln_h: Polynomial,
    pub alpha: Polynomial,
}

impl YearSpec {
    fn weight(&self, u: f64) -> f64 {
        let a = self.alpha.eval(u);
        a / (1.0 - a)
    }

    /// `ln y` at rank `u`.
    pub fn ln_income(&self, u: f64) -> f64 {
        self.ln_tfp.eval(u) + self.weight(u) * self.ln_ky.eval(u) + self.ln_h.eval(u)
    }

    /// Exact decomposition of the `p_hi / p_lo` gap.
    ///
    /// The capital term integrates `a/(1-a) * d ln(k/y)/dp` with composite
    /// Simpson at step 0.01 using the analytic derivative; with a constant
    /// share it is the closed form.
    pub fn true_gap(&self, p_lo: f64, p_hi: f64) -> GapDecomposition {
        let (u_lo, u_hi) = (p_lo / 100.0, p_hi / 100.0);
        let total = self.ln_income(u_hi) - self.ln_income(u_lo);
        let contrib_h = self.ln_h.eval(u_hi) - self.ln_h.eval(u_lo);
        let (contrib_ky, alpha_mode) = if self.alpha.is_constant() {
            let a = self.alpha.eval(0.0);
            (
                a / (1.0 - a) * (self.ln_ky.eval(u_hi) - self.ln_ky.eval(u_lo)),
                AlphaMode::Constant(a),
            )
        } else {
            let integrand = |p: f64| {
                let u = p / 100.0;
                self.weight(u) * self.ln_ky.derivative(u) / 100.0
            };
            (simpson(integrand, p_lo, p_hi, 0.01), AlphaMode::Varying)
        };
        GapDecomposition {
            year: self.year,
            p_lo,
            p_hi,
            total,
            contrib_ky,
            contrib_h,
            contrib_tfp: total - contrib_ky - contrib_h,
            alpha_mode,
        }
    }

    /// Profile evaluated directly from the generating functions.
    pub fn analytic_profile(&self, grid: &[f64]) -> Result<PercentileProfile> {
        let col = |f: &dyn Fn(f64) -> f64| grid.iter().map(|p| f(p / 100.0)).collect::<Vec<f64>>();
        PercentileProfile::from_columns(
            self.year,
            grid.to_vec(),
            col(&|u| self.ln_income(u)),
            col(&|u| self.ln_ky.eval(u)),
            col(&|u| self.ln_h.eval(u)),
            col(&|u| self.alpha.eval(u)),
        )
    }
}

/// Composite Simpson rule with the step rounded to an even number of panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, step: f64) -> f64 {
    let mut n = round((b - a) / step).max(2.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + i as f64 * h)
        })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    pub n_countries: usize,
    pub years: Vec<YearSpec>,
    /// Standard deviation of iid noise added to `ln A` per country-year.
    #[cfg_attr(feature = "serde", serde(default))]
    pub noise_sd: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    /// Populations are drawn uniformly from this range (millions).
    #[cfg_attr(feature = "serde", serde(default = "default_population_range"))]
    pub population_range: (f64, f64),
    /// Region of the country at rank `i` is `regions[i % regions.len()]`.
    #[cfg_attr(feature = "serde", serde(default = "default_regions"))]
    pub regions: Vec<String>,
    /// Percentile pair reported by [`SyntheticPanel::truth`].
    #[cfg_attr(feature = "serde", serde(default = "default_truth_pair"))]
    pub truth_pair: (f64, f64),
}

fn default_population_range() -> (f64, f64) {
    (1.0, 200.0)
}

fn default_regions() -> Vec<String> {
    vec!["Synthetic".to_string()]
}

fn default_truth_pair() -> (f64, f64) {
    (10.0, 90.0)
}

impl SyntheticSpec {
    pub fn new(n_countries: usize, years: Vec<YearSpec>) -> Self {
        SyntheticSpec {
            n_countries,
            years,
            noise_sd: 0.0,
            seed: 0,
            population_range: default_population_range(),
            regions: default_regions(),
            truth_pair: default_truth_pair(),
        }
    }

    fn validate(&self) -> Result<()> {
        let invalid = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.n_countries < 2 || self.n_countries > CountryCode::SYNTHETIC_CAPACITY {
            return invalid("n_countries must lie in [2, 17576]");
        }
        if self.years.is_empty() {
            return invalid("no years");
        }
        if !(self.noise_sd >= 0.0) {
            return invalid("noise_sd must be non-negative");
        }
        let (lo, hi) = self.population_range;
        if !(lo > 0.0 && hi >= lo) {
            return invalid("population_range must be positive and ordered");
        }
        if self.regions.is_empty() {
            return invalid("need at least one region label");
        }
        let (p_lo, p_hi) = self.truth_pair;
        if !(0.0 <= p_lo && p_lo < p_hi && p_hi <= 100.0) {
            return invalid("truth_pair must satisfy 0 <= lo < hi <= 100");
        }
        let mut years: Vec<i32> = self.years.iter().map(|y| y.year).collect();
        years.sort_unstable();
        if years.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate year");
        }
        Ok(())
    }

    fn rank(&self, i: usize) -> f64 {
        i as f64 / (self.n_countries - 1) as f64
    }
}

/// Raw observations and region map generated from `spec`.
pub fn synth_observations(spec: &SyntheticSpec) -> Result<(Vec<Observation>, RegionMap)> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let mut codes: Vec<CountryCode> = (0..spec.n_countries)
        .map(|i| CountryCode::from_index(i).expect("capacity checked"))
        .collect();
    rng.shuffle(&mut codes);

    let mut regions = RegionMap::new();
    for (i, code) in codes.iter().enumerate() {
        regions.insert(*code, &spec.regions[i % spec.regions.len()], None)?;
    }
    let (pop_lo, pop_hi) = spec.population_range;
    let pops: Vec<f64> = (0..spec.n_countries).map(|_| rng.uniform_in(pop_lo, pop_hi)).collect();

    let mut out = Vec::with_capacity(spec.n_countries * spec.years.len());
    for ys in &spec.years {
        let mut previous = f64::NEG_INFINITY;
        for (i, code) in codes.iter().enumerate() {
            let u = spec.rank(i);
            let alpha = ys.alpha.eval(u);
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "year {}: alpha({u}) = {alpha} outside (0, 1)",
                    ys.year
                )));
            }
            let ln_h = ys.ln_h.eval(u);
            if !(ln_h >= 0.0) {
                return Err(Error::InvalidSpec(format!("year {}: ln h({u}) = {ln_h} < 0", ys.year)));
            }
            let noise = if spec.noise_sd > 0.0 {
                spec.noise_sd * rng.standard_normal()
            } else {
                0.0
            };
            let ln_y = ys.ln_income(u) + noise;
            let y = exp(ln_y);
            if !(y > 0.0 && y.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "year {}: non-positive income at rank {u}",
                    ys.year
                )));
            }
            if spec.noise_sd == 0.0 && ln_y < previous {
                return Err(Error::InvalidSpec(format!(
                    "year {}: income must not fall with rank (fails at {u})",
                    ys.year
                )));
            }
            previous = ln_y;

            let pop = pops[i];
            let gdp = y * pop;
            let mut o = Observation::new(*code, ys.year);
            o.rgdpo = Some(gdp);
            o.rgdpe = Some(gdp);
            o.rgdpna = Some(gdp);
            o.rnna = Some(exp(ys.ln_ky.eval(u)) * gdp);
            o.pop = Some(pop);
            o.hc = Some(exp(ln_h));
            o.labsh = Some(1.0 - alpha);
            out.push(o);
        }
    }
    out.sort_by_key(|a| (a.country, a.year));
    Ok((out, regions))
}

/// A synthetic panel with its analytic decompositions.
#[derive(Debug, Clone)]
pub struct SyntheticPanel {
    pub panel: Panel,
    /// One entry per year for `spec.truth_pair`.
    pub truth: Vec<GapDecomposition>,
}

pub fn synth_panel(spec: &SyntheticSpec) -> Result<SyntheticPanel> {
    let (obs, regions) = synth_observations(spec)?;
    let cfg = FilterConfig {
        min_population_millions: (spec.population_range.0 * 0.5).min(0.2),
        variance_exclusions: Vec::new(),
        ..FilterConfig::default()
    };
    let panel = build_panel(&obs, &regions, &OilRentSeries::new(), &cfg)?;
    let (p_lo, p_hi) = spec.truth_pair;
    let truth = spec.years.iter().map(|y| y.true_gap(p_lo, p_hi)).collect();
    Ok(SyntheticPanel { panel, truth })
}

/// Cross-section for a growth regression with known parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthSampleSpec {
    pub beta0: f64,
    pub beta: f64,
    pub horizon: i32,
    pub n: usize,
    pub sigma_eps: f64,
    pub seed: u64,
    pub t0: i32,
    /// `ln y_t0` is drawn uniformly from this range.
    pub ln_y0_range: (f64, f64),
}

impl GrowthSampleSpec {
    pub fn new(beta0: f64, beta: f64, horizon: i32, n: usize, sigma_eps: f64, seed: u64) -> Self {
        GrowthSampleSpec {
            beta0,
            beta,
            horizon,
            n,
            sigma_eps,
            seed,
            t0: 2000,
            ln_y0_range: (6.0, 11.0),
        }
    }
}

/// Draws `ln y_t0`, then sets annualised growth to
/// `beta0 + ((exp(beta s) - 1) / s) ln y_t0 + sigma_eps * N(0, 1)`.
pub fn synth_growth_sample(spec: &GrowthSampleSpec) -> Result<AnalysisSample> {
    if spec.n < 3 || spec.n > CountryCode::SYNTHETIC_CAPACITY {
        return Err(Error::InvalidSpec("n must lie in [3, 17576]".to_string()));
    }
    if !(spec.sigma_eps >= 0.0) {
        return Err(Error::InvalidSpec("sigma_eps must be non-negative".to_string()));
    }
    if spec.horizon < 1 {
        return Err(Error::InvalidSpec("horizon must be at least one year".to_string()));
    }
    let s = spec.horizon as f64;
    let slope = slope_from_beta(spec.beta, s);
    let (lo, hi) = spec.ln_y0_range;
    let mut rng = SeededRng::new(spec.seed);
    let rows = (0..spec.n)
        .map(|i| {
            let x = rng.uniform_in(lo, hi);
            let eps = if spec.sigma_eps > 0.0 {
                spec.sigma_eps * rng.standard_normal()
            } else {
                0.0
            };
            let g = spec.beta0 + slope * x + eps;
            GrowthRow {
                country: CountryCode::from_index(i).expect("capacity checked"),
                y_start: exp(x),
                y_end: exp(x + s * g),
            }
        })
        .collect();
    AnalysisSample::new(spec.t0, spec.t0 + spec.horizon, rows)
}

/// Point estimate from [`brute_force_beta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFit {
    pub beta0: f64,
    pub beta: f64,
    pub ssr: f64,
    pub n: usize,
}

/// Grid search over beta with the intercept profiled out.
///
/// For a candidate beta the optimal intercept is the mean of
/// `g_i - b(beta) ln y_i,t0`, so only beta needs a grid.
pub fn brute_force_beta(sample: &AnalysisSample, beta_range: (f64, f64), step: f64) -> Result<GridFit> {
    let (lo, hi) = beta_range;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("grid step must be positive"));
    }
    if !(lo <= hi) {
        return Err(Error::InvalidParameter("empty beta grid"));
    }
    let s = sample.horizon();
    let x: Vec<f64> = sample.rows().iter().map(|r| ln(r.y_start)).collect();
    let g: Vec<f64> = sample.rows().iter().map(|r| ln(r.y_end / r.y_start) / s).collect();
    let n = x.len() as f64;
    let points = round((hi - lo) / step) as usize;
    let mut best: Option<GridFit> = None;
    for k in 0..=points {
        let beta = lo + k as f64 * step;
        let b = slope_from_beta(beta, s);
        let beta0 = x.iter().zip(&g).map(|(x, g)| g - b * x).sum::<f64>() / n;
        let ssr: f64 = x
            .iter()
            .zip(&g)
            .map(|(x, g)| {
                let r = g - beta0 - b * x;
                r * r
            })
            .sum();
        if best.is_none_or(|f| ssr < f.ssr) {
            best = Some(GridFit {
                beta0,
                beta,
                ssr,
                n: x.len(),
            });
        }
    }
    best.ok_or(Error::InvalidParameter("empty beta grid"))
}
