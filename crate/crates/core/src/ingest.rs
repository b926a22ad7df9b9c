//! Sample construction: raw country-year observations, sample filters and the
//! derived analysis panel.
//!
//! Filters look at a country's whole observed history. A country is dropped
//! when its population never exceeds the threshold, or when oil rents exceed
//! the threshold share of GDP in any year. Everything downstream consumes the
//! resulting [`Panel`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{CountryCode, Error, Result};

/// World Bank region label used by the `exclude_ssa` switches.
pub const SUB_SAHARAN_AFRICA: &str = "Sub-Saharan Africa";
/// Bucket for countries absent from the region map.
pub const REGION_UNKNOWN: &str = "region-unknown";

pub const MIN_YEAR: i32 = 1950;
pub const MAX_YEAR: i32 = 2025;

/// One country-year row of raw PWT variables. Any value may be missing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub country: CountryCode,
    pub year: i32,
    /// Output-side real GDP, million 2017 PPP dollars.
    pub rgdpo: Option<f64>,
    /// Expenditure-side real GDP, million 2017 PPP dollars.
    pub rgdpe: Option<f64>,
    /// Real GDP at constant national prices.
    pub rgdpna: Option<f64>,
    /// Real capital stock at constant national prices.
    pub rnna: Option<f64>,
    /// Population, millions.
    pub pop: Option<f64>,
    /// Human capital index.
    pub hc: Option<f64>,
    /// Labour share of income.
    pub labsh: Option<f64>,
    /// Persons engaged, millions. Only used for per-worker income.
    pub emp: Option<f64>,
}

impl Observation {
    pub fn new(country: CountryCode, year: i32) -> Self {
        Observation {
            country,
            year,
            rgdpo: None,
            rgdpe: None,
            rgdpna: None,
            rnna: None,
            pop: None,
            hc: None,
            labsh: None,
            emp: None,
        }
    }

    /// Hard invariants. An out-of-range labour share is not an error here; it
    /// is flagged by [`build_panel`].
    pub fn validate(&self) -> Result<()> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(Error::YearOutOfRange {
                country: self.country,
                year: self.year,
            });
        }
        let positive = [
            ("rgdpo", self.rgdpo),
            ("rgdpe", self.rgdpe),
            ("rgdpna", self.rgdpna),
            ("rnna", self.rnna),
            ("pop", self.pop),
            ("hc", self.hc),
            ("emp", self.emp),
        ];
        for (field, value) in positive {
            if let Some(v) = value {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositiveValue {
                        country: self.country,
                        year: self.year,
                        field,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn labsh_in_range(&self) -> bool {
        self.labsh.is_none_or(|l| l > 0.0 && l < 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionEntry {
    pub region: String,
    pub income_group: Option<String>,
}

/// Country code to region (and optional income group).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionMap {
    entries: BTreeMap<CountryCode, RegionEntry>,
}

impl RegionMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a mapping. Repeating an identical region is accepted; a
    /// different one is an error.
    pub fn insert(&mut self, country: CountryCode, region: &str, income_group: Option<&str>) -> Result<()> {
        let region = region.trim();
        match self.entries.get_mut(&country) {
            Some(existing) if existing.region != region => Err(Error::ConflictingRegion {
                country,
                first: existing.region.clone(),
                second: region.to_string(),
            }),
            Some(existing) => {
                if existing.income_group.is_none() {
                    existing.income_group = income_group.map(str::to_string);
                }
                Ok(())
            }
            None => {
                self.entries.insert(
                    country,
                    RegionEntry {
                        region: region.to_string(),
                        income_group: income_group.map(str::to_string),
                    },
                );
                Ok(())
            }
        }
    }

    pub fn lookup(&self, country: CountryCode) -> Option<&str> {
        self.entries.get(&country).map(|e| e.region.as_str())
    }

    pub fn income_group(&self, country: CountryCode) -> Option<&str> {
        self.entries.get(&country).and_then(|e| e.income_group.as_deref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CountryCode, &RegionEntry)> {
        self.entries.iter().map(|(c, e)| (*c, e))
    }
}

/// Oil rents as percent of GDP by (country, year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OilRentSeries {
    values: BTreeMap<(CountryCode, i32), f64>,
}

impl OilRentSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, country: CountryCode, year: i32, pct_gdp: f64) -> Result<()> {
        if !(pct_gdp >= 0.0) {
            return Err(Error::NegativeOilRent {
                country,
                year,
                value: pct_gdp,
            });
        }
        self.values.insert((country, year), pct_gdp);
        Ok(())
    }

    pub fn get(&self, country: CountryCode, year: i32) -> Option<f64> {
        self.values.get(&(country, year)).copied()
    }

    /// Largest recorded value for the country across all years.
    pub fn max_for(&self, country: CountryCode) -> Option<f64> {
        self.values
            .range((country, i32::MIN)..=(country, i32::MAX))
            .map(|(_, v)| *v)
            .reduce(f64::max)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which real GDP series defines income per capita.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IncomeMeasure {
    /// `rgdpo`
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "rgdpo"))]
    OutputSide,
    /// `rgdpe`
    #[cfg_attr(feature = "serde", serde(rename = "rgdpe"))]
    ExpenditureSide,
}

impl IncomeMeasure {
    pub fn column(self) -> &'static str {
        match self {
            IncomeMeasure::OutputSide => "rgdpo",
            IncomeMeasure::ExpenditureSide => "rgdpe",
        }
    }

    fn select(self, obs: &Observation) -> Option<f64> {
        match self {
            IncomeMeasure::OutputSide => obs.rgdpo,
            IncomeMeasure::ExpenditureSide => obs.rgdpe,
        }
    }
}

impl core::str::FromStr for IncomeMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rgdpo" | "output" | "output-side" => Ok(IncomeMeasure::OutputSide),
            "rgdpe" | "expenditure" | "expenditure-side" => Ok(IncomeMeasure::ExpenditureSide),
            _ => Err(Error::InvalidConfig("income measure must be rgdpo or rgdpe")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterConfig {
    /// Countries whose population never exceeds this (millions) are dropped.
    pub min_population_millions: f64,
    /// Countries whose oil rents exceed this share of GDP (percent) in any
    /// year are dropped.
    pub max_oil_rent_pct: f64,
    /// Dropped only by operations running in variance-sensitive mode.
    pub variance_exclusions: Vec<CountryCode>,
    pub income_measure: IncomeMeasure,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_population_millions: 0.2,
            max_oil_rent_pct: 50.0,
            variance_exclusions: alloc::vec![CountryCode::new_unchecked(*b"VEN")],
            income_measure: IncomeMeasure::OutputSide,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_population_millions > 0.0) {
            return Err(Error::InvalidConfig("min_population_millions must be > 0"));
        }
        if !(self.max_oil_rent_pct > 0.0) {
            return Err(Error::InvalidConfig("max_oil_rent_pct must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExclusionReason {
    SmallPopulation,
    OilRents,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::SmallPopulation => "small-population",
            ExclusionReason::OilRents => "oil-rents",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exclusion {
    pub country: CountryCode,
    pub reason: ExclusionReason,
}

/// Non-fatal data issues collected while building or using a panel.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    UnknownRegion(CountryCode),
    MissingOilRents {
        country: CountryCode,
        years: usize,
    },
    LabourShareOutOfRange {
        country: CountryCode,
        year: i32,
        labsh: f64,
    },
    HumanCapitalBelowOne {
        country: CountryCode,
        year: i32,
        hc: f64,
    },
    RegionWithoutCoverage {
        region: String,
        year: i32,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnknownRegion(c) => write!(f, "{c}: not in region map, using {REGION_UNKNOWN}"),
            Warning::MissingOilRents { country, years } => {
                write!(
                    f,
                    "{country}: oil rents missing for {years} observed years, treated as 0"
                )
            }
            Warning::LabourShareOutOfRange { country, year, labsh } => write!(
                f,
                "{country} {year}: labsh = {labsh} outside (0, 1), barred from decomposition samples"
            ),
            Warning::HumanCapitalBelowOne { country, year, hc } => {
                write!(f, "{country} {year}: hc = {hc} below 1, treated as missing")
            }
            Warning::RegionWithoutCoverage { region, year } => {
                write!(f, "{region} {year}: no capital-output data, region omitted")
            }
        }
    }
}

/// Derived panel variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variable {
    /// Income per capita `y`.
    Income,
    /// Capital-output ratio `rnna / rgdpna`.
    CapitalOutput,
    /// Human capital index.
    HumanCapital,
    /// Capital share `1 - labsh`, restricted to (0, 1).
    CapitalShare,
}

/// Variables a country-year needs to enter a decomposition sample.
pub const DECOMPOSITION_VARIABLES: [Variable; 4] = [
    Variable::Income,
    Variable::CapitalOutput,
    Variable::HumanCapital,
    Variable::CapitalShare,
];

/// Derived country-year record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRecord {
    pub country: CountryCode,
    pub year: i32,
    pub pop: Option<f64>,
    /// Income per capita from the configured income measure.
    pub y: Option<f64>,
    /// Capital-output ratio.
    pub ky: Option<f64>,
    pub h: Option<f64>,
    /// `1 - labsh`. May lie outside (0, 1); see [`PanelRecord::decomposition_alpha`].
    pub alpha: Option<f64>,
    /// Income per person engaged, when `emp` is present.
    pub y_per_worker: Option<f64>,
}

impl PanelRecord {
    pub fn decomposition_alpha(&self) -> Option<f64> {
        self.alpha.filter(|a| *a > 0.0 && *a < 1.0)
    }

    pub fn has(&self, var: Variable) -> bool {
        match var {
            Variable::Income => self.y.is_some(),
            Variable::CapitalOutput => self.ky.is_some(),
            Variable::HumanCapital => self.h.is_some(),
            Variable::CapitalShare => self.decomposition_alpha().is_some(),
        }
    }

    pub fn has_all(&self, vars: &[Variable]) -> bool {
        vars.iter().all(|v| self.has(*v))
    }
}

/// Filtered and derived country-year dataset. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    records: Vec<PanelRecord>,
    regions: BTreeMap<CountryCode, String>,
    exclusions: Vec<Exclusion>,
    warnings: Vec<Warning>,
    alpha_violations: Vec<(CountryCode, i32)>,
    config: FilterConfig,
}

impl Panel {
    /// Records sorted by (country, year).
    pub fn records(&self) -> &[PanelRecord] {
        &self.records
    }

    pub fn record(&self, country: CountryCode, year: i32) -> Option<&PanelRecord> {
        self.records
            .binary_search_by(|r| (r.country, r.year).cmp(&(country, year)))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn year_records(&self, year: i32) -> impl Iterator<Item = &PanelRecord> + '_ {
        self.records.iter().filter(move |r| r.year == year)
    }

    pub fn countries(&self) -> BTreeSet<CountryCode> {
        self.records.iter().map(|r| r.country).collect()
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.records.iter().map(|r| r.year).collect()
    }

    pub fn region(&self, country: CountryCode) -> &str {
        self.regions.get(&country).map_or(REGION_UNKNOWN, String::as_str)
    }

    pub fn is_ssa(&self, country: CountryCode) -> bool {
        self.region(country) == SUB_SAHARAN_AFRICA
    }

    /// Countries dropped by the sample filters, sorted by code.
    pub fn exclusions(&self) -> &[Exclusion] {
        &self.exclusions
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Country-years whose labour share lies outside (0, 1).
    pub fn alpha_violations(&self) -> &[(CountryCode, i32)] {
        &self.alpha_violations
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn is_variance_excluded(&self, country: CountryCode) -> bool {
        self.config.variance_exclusions.contains(&country)
    }

    fn filtered(&self, keep: impl Fn(&PanelRecord) -> bool) -> Panel {
        Panel {
            records: self.records.iter().filter(|r| keep(r)).copied().collect(),
            regions: self.regions.clone(),
            exclusions: self.exclusions.clone(),
            warnings: self.warnings.clone(),
            alpha_violations: self.alpha_violations.clone(),
            config: self.config.clone(),
        }
    }

    /// Drops every country in `region`.
    pub fn without_region(&self, region: &str) -> Panel {
        self.filtered(|r| self.region(r.country) != region)
    }

    pub fn without_countries(&self, countries: &[CountryCode]) -> Panel {
        self.filtered(|r| !countries.contains(&r.country))
    }

    /// Same panel without the configured variance-sensitive exclusions.
    pub fn without_variance_exclusions(&self) -> Panel {
        self.without_countries(&self.config.variance_exclusions)
    }

    /// Keeps only countries that have every variable in `vars` in every year
    /// of `years`.
    pub fn balanced(&self, years: &[i32], vars: &[Variable]) -> Panel {
        let keep: BTreeSet<CountryCode> = self
            .countries()
            .into_iter()
            .filter(|c| {
                years
                    .iter()
                    .all(|y| self.record(*c, *y).is_some_and(|r| r.has_all(vars)))
            })
            .collect();
        self.filtered(|r| keep.contains(&r.country))
    }
}

/// Applies the sample filters and derives per-country-year variables.
pub fn build_panel(
    observations: &[Observation],
    regions: &RegionMap,
    oil: &OilRentSeries,
    cfg: &FilterConfig,
) -> Result<Panel> {
    cfg.validate()?;
    let mut obs: Vec<Observation> = observations.to_vec();
    obs.sort_by_key(|a| (a.country, a.year));
    for w in obs.windows(2) {
        if w[0].country == w[1].country && w[0].year == w[1].year {
            return Err(Error::DuplicateObservation {
                country: w[0].country,
                year: w[0].year,
            });
        }
    }
    for o in &obs {
        o.validate()?;
    }

    let mut records = Vec::new();
    let mut exclusions = Vec::new();
    let mut warnings = Vec::new();
    let mut alpha_violations = Vec::new();
    let mut region_of = BTreeMap::new();

    for group in obs.chunk_by(|a, b| a.country == b.country) {
        let country = group[0].country;

        let max_pop = group.iter().filter_map(|o| o.pop).reduce(f64::max);
        if max_pop.is_none_or(|p| p <= cfg.min_population_millions) {
            exclusions.push(Exclusion {
                country,
                reason: ExclusionReason::SmallPopulation,
            });
            continue;
        }
        let missing_oil = group.iter().filter(|o| oil.get(country, o.year).is_none()).count();
        if oil.max_for(country).is_some_and(|m| m > cfg.max_oil_rent_pct) {
            exclusions.push(Exclusion {
                country,
                reason: ExclusionReason::OilRents,
            });
            continue;
        }
        if missing_oil > 0 {
            warnings.push(Warning::MissingOilRents {
                country,
                years: missing_oil,
            });
        }

        match regions.lookup(country) {
            Some(r) => {
                region_of.insert(country, r.to_string());
            }
            None => warnings.push(Warning::UnknownRegion(country)),
        }

        for o in group {
            if !o.labsh_in_range() {
                let labsh = o.labsh.unwrap_or(f64::NAN);
                warnings.push(Warning::LabourShareOutOfRange {
                    country,
                    year: o.year,
                    labsh,
                });
                alpha_violations.push((country, o.year));
            }
            let h = match o.hc {
                Some(hc) if hc < 1.0 => {
                    warnings.push(Warning::HumanCapitalBelowOne {
                        country,
                        year: o.year,
                        hc,
                    });
                    None
                }
                other => other,
            };
            let gdp = cfg.income_measure.select(o);
            records.push(PanelRecord {
                country,
                year: o.year,
                pop: o.pop,
                y: gdp.zip(o.pop).map(|(g, p)| g / p),
                ky: o.rnna.zip(o.rgdpna).map(|(k, q)| k / q),
                h,
                alpha: o.labsh.map(|l| 1.0 - l),
                y_per_worker: gdp.zip(o.emp).map(|(g, e)| g / e),
            });
        }
    }

    if records.is_empty() {
        return Err(Error::EmptyPanel);
    }
    Ok(Panel {
        records,
        regions: region_of,
        exclusions,
        warnings,
        alpha_violations,
        config: cfg.clone(),
    })
}

/// Endpoint incomes of one country in an [`AnalysisSample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub country: CountryCode,
    pub y_start: f64,
    pub y_end: f64,
}

/// Countries observed at both endpoints of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSample {
    t0: i32,
    t1: i32,
    rows: Vec<GrowthRow>,
}

impl AnalysisSample {
    pub fn new(t0: i32, t1: i32, rows: Vec<GrowthRow>) -> Result<Self> {
        if t0 >= t1 {
            return Err(Error::InvalidWindow { t0, t1 });
        }
        if rows.is_empty() {
            return Err(Error::EmptySample { t0, t1 });
        }
        for r in &rows {
            for (field, v) in [("y_start", r.y_start), ("y_end", r.y_end)] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositiveValue {
                        country: r.country,
                        year: if field == "y_start" { t0 } else { t1 },
                        field,
                        value: v,
                    });
                }
            }
        }
        Ok(AnalysisSample { t0, t1, rows })
    }

    pub fn t0(&self) -> i32 {
        self.t0
    }

    pub fn t1(&self) -> i32 {
        self.t1
    }

    /// Horizon `s = t1 - t0` in years.
    pub fn horizon(&self) -> f64 {
        (self.t1 - self.t0) as f64
    }

    pub fn rows(&self) -> &[GrowthRow] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Same sample with every income multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| GrowthRow {
                country: r.country,
                y_start: r.y_start * factor,
                y_end: r.y_end * factor,
            })
            .collect();
        AnalysisSample::new(self.t0, self.t1, rows)
    }
}

/// Countries with income (plus `required`) observed in both `t0` and `t1`.
pub fn analysis_sample(
    panel: &Panel,
    t0: i32,
    t1: i32,
    required: &[Variable],
    exclude_ssa: bool,
) -> Result<AnalysisSample> {
    if t0 >= t1 {
        return Err(Error::InvalidWindow { t0, t1 });
    }
    let mut rows = Vec::new();
    for country in panel.countries() {
        if exclude_ssa && panel.is_ssa(country) {
            continue;
        }
        let (Some(a), Some(b)) = (panel.record(country, t0), panel.record(country, t1)) else {
            continue;
        };
        if !(a.has_all(required) && b.has_all(required)) {
            continue;
        }
        if let (Some(y0), Some(y1)) = (a.y, b.y) {
            rows.push(GrowthRow {
                country,
                y_start: y0,
                y_end: y1,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptySample { t0, t1 });
    }
    AnalysisSample::new(t0, t1, rows)
}
