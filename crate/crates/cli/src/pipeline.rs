//! Analyses shared by the subcommands and the report, each returning typed
//! rows plus a conversion to [`Table`].

use convergence_core::capital::{k0_steady_state, pim, undepreciated_share, InvestmentSeries};
use convergence_core::convergence::{
    beta_convergence, dispersion_table, BetaEstimate, DispersionOptions, DispersionRow,
};
use convergence_core::decomposition::{
    gap_decomposition, percentile_grid, percentile_profile, regional_capital_output, variance_decomposition, AlphaMode,
    DecompositionChange, GapDecomposition, VarianceDecomposition, VarianceOptions,
};
use convergence_core::ingest::{analysis_sample, Panel, DECOMPOSITION_VARIABLES, SUB_SAHARAN_AFRICA};
use convergence_core::stats::VarianceNorm;
use convergence_core::{CountryCode, Result};

use crate::io::InvestmentTable;
use crate::table::{Cell, Table};

/// Which countries an analysis covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    All,
    ExcludeSsa,
}

impl Scope {
    pub fn from_flag(exclude_ssa: bool) -> Scope {
        if exclude_ssa {
            Scope::ExcludeSsa
        } else {
            Scope::All
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::ExcludeSsa => "excluding-ssa",
        }
    }

    pub fn apply(self, panel: &Panel) -> Panel {
        match self {
            Scope::All => panel.clone(),
            Scope::ExcludeSsa => panel.without_region(SUB_SAHARAN_AFRICA),
        }
    }
}

/// Both windows, full sample then outside SSA.
pub const TABLE1_WINDOWS: [(i32, i32); 2] = [(1980, 2000), (2000, 2019)];
pub const REPORT_YEARS: [i32; 3] = [1980, 2000, 2019];
pub const SIGMA_YEARS: [i32; 5] = [1980, 1990, 2000, 2010, 2019];
pub const PAIRS: [(f64, f64); 3] = [(10.0, 90.0), (50.0, 90.0), (10.0, 50.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRow {
    pub scope: Scope,
    pub estimate: BetaEstimate,
}

pub fn beta_row(panel: &Panel, t0: i32, t1: i32, scope: Scope, robust: bool) -> Result<BetaRow> {
    let sample = analysis_sample(panel, t0, t1, &[], scope == Scope::ExcludeSsa)?;
    Ok(BetaRow {
        scope,
        estimate: beta_convergence(&sample, robust)?,
    })
}

pub fn table1(panel: &Panel, robust: bool) -> Result<Vec<BetaRow>> {
    let mut rows = Vec::new();
    for scope in [Scope::All, Scope::ExcludeSsa] {
        for (t0, t1) in TABLE1_WINDOWS {
            rows.push(beta_row(panel, t0, t1, scope, robust)?);
        }
    }
    Ok(rows)
}

pub fn beta_table(rows: &[BetaRow]) -> Table {
    let mut t = Table::new([
        "t0",
        "t1",
        "sample",
        "n",
        "beta",
        "se_beta",
        "beta0",
        "se_beta0",
        "t_stat",
        "half_life",
        "ssr",
        "iterations",
        "se_type",
    ]);
    for r in rows {
        let e = &r.estimate;
        t.push(vec![
            e.t0.into(),
            e.t1.into(),
            r.scope.label().into(),
            e.n.into(),
            e.beta.into(),
            e.se_beta.into(),
            e.beta0.into(),
            e.se_beta0.into(),
            e.t_stat().into(),
            e.half_life().ok().into(),
            e.ssr.into(),
            e.iterations.into(),
            if e.robust { "hc1" } else { "classical" }.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionBlock {
    pub scope: Scope,
    pub rows: Vec<DispersionRow>,
}

pub fn dispersion(
    panel: &Panel,
    years: &[i32],
    scope: Scope,
    variance_sensitive: bool,
    norm: VarianceNorm,
) -> Result<DispersionBlock> {
    let opts = DispersionOptions {
        exclude_ssa: scope == Scope::ExcludeSsa,
        variance_sensitive,
        norm,
    };
    Ok(DispersionBlock {
        scope,
        rows: dispersion_table(panel, years, &opts)?,
    })
}

pub fn dispersion_output(blocks: &[DispersionBlock]) -> Table {
    let mut t = Table::new([
        "sample",
        "year",
        "n",
        "p90_p10",
        "p90_p50",
        "p50_p10",
        "var_log",
        "income_ratio",
    ]);
    for b in blocks {
        for r in &b.rows {
            t.push(vec![
                b.scope.label().into(),
                r.year.into(),
                r.n.into(),
                r.p90_p10.into(),
                r.p90_p50.into(),
                r.p50_p10.into(),
                r.var_log.into(),
                r.income_ratio.into(),
            ]);
        }
    }
    t
}

/// Percentile-gap decompositions on one balanced sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPath {
    pub scope: Scope,
    pub alpha_mode: AlphaMode,
    pub n_countries: usize,
    pub levels: Vec<GapDecomposition>,
}

impl GapPath {
    /// Consecutive periods, then first to last when there are more than two years.
    pub fn changes(&self) -> Vec<DecompositionChange> {
        let mut out: Vec<DecompositionChange> = self
            .levels
            .windows(2)
            .map(|w| DecompositionChange::between(w[0], w[1]))
            .collect();
        if self.levels.len() > 2 {
            out.push(DecompositionChange::between(
                self.levels[0],
                self.levels[self.levels.len() - 1],
            ));
        }
        out
    }
}

/// Keeps countries with every decomposition input in every year.
pub fn balanced_sample(panel: &Panel, scope: Scope, years: &[i32]) -> Panel {
    scope.apply(panel).balanced(years, &DECOMPOSITION_VARIABLES)
}

pub fn gap_path(
    panel: &Panel,
    scope: Scope,
    years: &[i32],
    (p_lo, p_hi): (f64, f64),
    grid_step: f64,
    alpha_mode: AlphaMode,
) -> Result<GapPath> {
    let alpha_mode = alpha_mode.validate()?;
    let sample = balanced_sample(panel, scope, years);
    let grid = percentile_grid(p_lo, p_hi, grid_step)?;
    let mut n_countries = 0;
    let levels = years
        .iter()
        .map(|&year| {
            let profile = percentile_profile(&sample, year, &grid)?.with_alpha_mode(alpha_mode)?;
            n_countries = profile.n_countries();
            gap_decomposition(&profile, p_lo, p_hi)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapPath {
        scope,
        alpha_mode,
        n_countries,
        levels,
    })
}

fn alpha_label(mode: AlphaMode) -> String {
    match mode {
        AlphaMode::Varying => "varying".to_string(),
        AlphaMode::Constant(a) => format!("const:{a}"),
    }
}

fn pair_label(p_lo: f64, p_hi: f64) -> String {
    format!("p{p_hi}/p{p_lo}")
}

pub fn change_table(paths: &[GapPath]) -> Table {
    let mut t = Table::new([
        "sample",
        "pair",
        "alpha",
        "n",
        "year_from",
        "year_to",
        "delta_total",
        "delta_tfp",
        "delta_ky",
        "delta_h",
        "share_tfp",
        "share_ky",
        "share_h",
    ]);
    for p in paths {
        for c in p.changes() {
            let (s_tfp, s_ky, s_h) = c.shares();
            t.push(vec![
                p.scope.label().into(),
                pair_label(c.start.p_lo, c.start.p_hi).into(),
                alpha_label(p.alpha_mode).into(),
                p.n_countries.into(),
                c.year_from.into(),
                c.year_to.into(),
                c.delta_total.into(),
                c.delta_tfp.into(),
                c.delta_ky.into(),
                c.delta_h.into(),
                s_tfp.into(),
                s_ky.into(),
                s_h.into(),
            ]);
        }
    }
    t
}

pub fn level_table(paths: &[GapPath]) -> Table {
    let mut t = Table::new([
        "sample",
        "pair",
        "alpha",
        "n",
        "year",
        "total",
        "contrib_tfp",
        "contrib_ky",
        "contrib_h",
    ]);
    for p in paths {
        for d in &p.levels {
            t.push(vec![
                p.scope.label().into(),
                pair_label(d.p_lo, d.p_hi).into(),
                alpha_label(p.alpha_mode).into(),
                p.n_countries.into(),
                d.year.into(),
                d.total.into(),
                d.contrib_tfp.into(),
                d.contrib_ky.into(),
                d.contrib_h.into(),
            ]);
        }
    }
    t
}

/// Per-percentile profile and cumulative contributions relative to `p_lo`,
/// for plotting.
pub fn plot_table(
    panel: &Panel,
    scope: Scope,
    years: &[i32],
    (p_lo, p_hi): (f64, f64),
    grid_step: f64,
    alpha_mode: AlphaMode,
) -> Result<Table> {
    let sample = balanced_sample(panel, scope, years);
    let grid = percentile_grid(p_lo, p_hi, grid_step)?;
    let mut t = Table::new([
        "year",
        "percentile",
        "ln_y",
        "ln_ky",
        "ln_h",
        "alpha",
        "cum_total",
        "cum_tfp",
        "cum_ky",
        "cum_h",
    ]);
    for &year in years {
        let profile = percentile_profile(&sample, year, &grid)?.with_alpha_mode(alpha_mode.validate()?)?;
        for (k, &p) in grid.iter().enumerate() {
            let d = if k == 0 {
                None
            } else {
                Some(gap_decomposition(&profile, p_lo, p)?)
            };
            let part = |f: fn(&GapDecomposition) -> f64| d.as_ref().map_or(0.0, f);
            t.push(vec![
                year.into(),
                p.into(),
                profile.ln_y()[k].into(),
                profile.ln_ky()[k].into(),
                profile.ln_h()[k].into(),
                profile.alpha()[k].into(),
                part(|d| d.total).into(),
                part(|d| d.contrib_tfp).into(),
                part(|d| d.contrib_ky).into(),
                part(|d| d.contrib_h).into(),
            ]);
        }
    }
    Ok(t)
}

/// Capital share read off the income distribution.
pub fn alpha_table(panel: &Panel, scope: Scope, years: &[i32], grid_step: f64) -> Result<Table> {
    let grid = percentile_grid(0.0, 100.0, grid_step)?;
    let mut t = Table::new(["sample", "year", "n", "percentile", "alpha"]);
    for &year in years {
        let profile = percentile_profile(&scope.apply(panel), year, &grid)?;
        for (p, a) in grid.iter().zip(profile.alpha()) {
            t.push(vec![
                scope.label().into(),
                year.into(),
                profile.n_countries().into(),
                (*p).into(),
                (*a).into(),
            ]);
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    pub scope: Scope,
    pub rows: Vec<VarianceDecomposition>,
}

pub fn variance_path(panel: &Panel, scope: Scope, years: &[i32], opts: &VarianceOptions) -> Result<VariancePath> {
    let sample = balanced_sample(panel, scope, years);
    let rows = years
        .iter()
        .map(|&y| variance_decomposition(&sample, y, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(VariancePath { scope, rows })
}

pub fn variance_table(paths: &[VariancePath]) -> Table {
    let mut t = Table::new([
        "sample",
        "year",
        "n",
        "alpha",
        "var_ln_y",
        "var_ln_a",
        "var_ln_ykh",
        "cov_term",
    ]);
    for p in paths {
        for v in &p.rows {
            t.push(vec![
                p.scope.label().into(),
                v.year.into(),
                v.n.into(),
                v.alpha_const.into(),
                v.var_ln_y.into(),
                v.var_ln_a.into(),
                v.var_ln_ykh.into(),
                v.cov_term.into(),
            ]);
        }
    }
    t
}

/// Change in `Var(ln y)` between two years and each component's share of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceChange {
    pub year_from: i32,
    pub year_to: i32,
    /// Relative change in `Var(ln y)`.
    pub pct_change: f64,
    pub delta_var_ln_y: f64,
    pub share_tfp: f64,
    pub share_inputs: f64,
    pub share_cov: f64,
}

impl VarianceChange {
    pub fn between(a: &VarianceDecomposition, b: &VarianceDecomposition) -> Self {
        let d = b.var_ln_y - a.var_ln_y;
        VarianceChange {
            year_from: a.year,
            year_to: b.year,
            pct_change: d / a.var_ln_y,
            delta_var_ln_y: d,
            share_tfp: (b.var_ln_a - a.var_ln_a) / d,
            share_inputs: (b.var_ln_ykh - a.var_ln_ykh) / d,
            share_cov: (b.cov_term - a.cov_term) / d,
        }
    }
}

impl VariancePath {
    pub fn changes(&self) -> Vec<VarianceChange> {
        let mut out: Vec<VarianceChange> = self
            .rows
            .windows(2)
            .map(|w| VarianceChange::between(&w[0], &w[1]))
            .collect();
        if self.rows.len() > 2 {
            out.push(VarianceChange::between(&self.rows[0], &self.rows[self.rows.len() - 1]));
        }
        out
    }
}

pub fn variance_change_table(paths: &[VariancePath]) -> Table {
    let mut t = Table::new([
        "sample",
        "year_from",
        "year_to",
        "pct_change",
        "delta_var_ln_y",
        "share_tfp",
        "share_inputs",
        "share_cov",
    ]);
    for p in paths {
        for c in p.changes() {
            t.push(vec![
                p.scope.label().into(),
                c.year_from.into(),
                c.year_to.into(),
                c.pct_change.into(),
                c.delta_var_ln_y.into(),
                c.share_tfp.into(),
                c.share_inputs.into(),
                c.share_cov.into(),
            ]);
        }
    }
    t
}

pub fn regional_table(panel: &Panel, years: &[i32]) -> Table {
    let mut t = Table::new(["year", "region", "ky_pop_weighted"]);
    for &year in years {
        let r = regional_capital_output(panel, year);
        for w in &r.warnings {
            log::warn!("{w}");
        }
        for (region, ky) in r.by_region {
            t.push(vec![year.into(), region.into(), ky.into()]);
        }
    }
    t
}

pub fn exclusion_table(panel: &Panel) -> Table {
    let mut t = Table::new(["countrycode", "reason"]);
    for e in panel.exclusions() {
        t.push(vec![e.country.as_str().into(), e.reason.as_str().into()]);
    }
    t
}

pub fn panel_table(panel: &Panel) -> Table {
    let mut t = Table::new([
        "countrycode",
        "year",
        "region",
        "pop",
        "y",
        "ky",
        "h",
        "alpha",
        "y_per_worker",
    ]);
    for r in panel.records() {
        t.push(vec![
            r.country.as_str().into(),
            r.year.into(),
            panel.region(r.country).into(),
            r.pop.into(),
            r.y.into(),
            r.ky.into(),
            r.h.into(),
            r.alpha.into(),
            r.y_per_worker.into(),
        ]);
    }
    t
}

/// Geometric mean growth of the first (up to) ten flows.
fn early_growth(flows: &[f64]) -> f64 {
    let k = flows.len().min(11) - 1;
    if k == 0 || !(flows[0] > 0.0) || !(flows[k] > 0.0) {
        return 0.0;
    }
    (flows[k] / flows[0]).powf(1.0 / k as f64) - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapitalDiagnostics {
    pub by_country: Vec<(CountryCode, Vec<(i32, f64)>)>,
    pub skipped: Vec<CountryCode>,
}

/// Share of each year's capital that is undepreciated base-year stock.
pub fn capital_diagnostics(
    investment: &InvestmentTable,
    base: i32,
    years: &[i32],
    delta: f64,
    k0_growth: Option<f64>,
) -> Result<CapitalDiagnostics> {
    let last = years.iter().copied().max().unwrap_or(base);
    let mut out = CapitalDiagnostics {
        by_country: Vec::new(),
        skipped: Vec::new(),
    };
    for (&country, series) in investment {
        let flows: Option<Vec<f64>> = (base + 1..=last).map(|y| series.get(&y).copied()).collect();
        let Some(flows) = flows.filter(|f| !f.is_empty()) else {
            out.skipped.push(country);
            continue;
        };
        let g = k0_growth.unwrap_or_else(|| early_growth(&flows));
        let g = if delta + g > 0.0 { g } else { 0.0 };
        let k0 = k0_steady_state(flows[0], delta, g)?;
        if !(k0 > 0.0) {
            out.skipped.push(country);
            continue;
        }
        let path = pim(&InvestmentSeries::new(base, flows)?, delta, k0)?;
        let shares = years
            .iter()
            .map(|&y| undepreciated_share(&path, base, y).map(|s| (y, s)))
            .collect::<Result<Vec<_>>>()?;
        out.by_country.push((country, shares));
    }
    Ok(out)
}

pub fn capital_table(d: &CapitalDiagnostics, years: &[i32]) -> Table {
    let mut t = Table::new(["countrycode", "year", "undepreciated_share"]);
    for (c, shares) in &d.by_country {
        for (y, s) in shares {
            t.push(vec![c.as_str().into(), (*y).into(), (*s).into()]);
        }
    }
    for (j, y) in years.iter().enumerate() {
        let n = d.by_country.len();
        let mean = if n == 0 {
            Cell::Empty
        } else {
            (d.by_country.iter().map(|(_, s)| s[j].1).sum::<f64>() / n as f64).into()
        };
        t.push(vec!["mean".into(), (*y).into(), mean]);
    }
    t
}
