//! Readers and writers for the CSV inputs: the PWT extract, the region map,
//! oil rents and investment series.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use convergence_core::ingest::{Observation, OilRentSeries, RegionMap};
use convergence_core::CountryCode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Header names for each PWT variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub countrycode: String,
    pub year: String,
    pub rgdpo: String,
    pub rgdpe: String,
    pub rgdpna: String,
    pub rnna: String,
    pub pop: String,
    pub hc: String,
    pub labsh: String,
    /// Employment is read only when this is set.
    pub emp: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            countrycode: "countrycode".into(),
            year: "year".into(),
            rgdpo: "rgdpo".into(),
            rgdpe: "rgdpe".into(),
            rgdpna: "rgdpna".into(),
            rnna: "rnna".into(),
            pop: "pop".into(),
            hc: "hc".into(),
            labsh: "labsh".into(),
            emp: None,
        }
    }
}

pub fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

struct CsvInput<R> {
    path: std::path::PathBuf,
    reader: csv::Reader<R>,
    headers: csv::StringRecord,
}

impl<R: Read> CsvInput<R> {
    fn new(input: R, path: &Path) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| CliError::parse(path, 1, e.to_string()))?
            .clone();
        Ok(CsvInput {
            path: path.to_path_buf(),
            reader,
            headers,
        })
    }

    fn column(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| CliError::parse(&self.path, 1, format!("missing column {name:?}")))
    }

    /// Calls `f` with each record and its 1-based line number.
    fn for_each(&mut self, mut f: impl FnMut(&csv::StringRecord, u64) -> CliResult<()>) -> CliResult<()> {
        let mut rec = csv::StringRecord::new();
        loop {
            let line = self.reader.position().line();
            match self.reader.read_record(&mut rec) {
                Ok(false) => return Ok(()),
                Ok(true) => f(&rec, rec.position().map_or(line, |p| p.line()))?,
                Err(e) => return Err(CliError::parse(&self.path, line, e.to_string())),
            }
        }
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "NaN" | "nan" | ".")
}

fn country(path: &Path, line: u64, field: &str) -> CliResult<CountryCode> {
    field
        .parse()
        .map_err(|e: convergence_core::Error| CliError::parse(path, line, e.to_string()))
}

fn year(path: &Path, line: u64, field: &str) -> CliResult<i32> {
    field
        .parse()
        .map_err(|_| CliError::parse(path, line, format!("invalid year {field:?}")))
}

fn number(path: &Path, line: u64, name: &str, field: &str) -> CliResult<Option<f64>> {
    if is_missing(field) {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| CliError::parse(path, line, format!("invalid {name} value {field:?}")))
}

pub fn load_pwt(path: &Path, columns: &ColumnMap) -> CliResult<Vec<Observation>> {
    read_pwt(open(path)?, path, columns)
}

pub fn read_pwt(input: impl Read, path: &Path, columns: &ColumnMap) -> CliResult<Vec<Observation>> {
    let mut csv = CsvInput::new(input, path)?;
    let code_col = csv.column(&columns.countrycode)?;
    let year_col = csv.column(&columns.year)?;
    let value_cols = [
        &columns.rgdpo,
        &columns.rgdpe,
        &columns.rgdpna,
        &columns.rnna,
        &columns.pop,
        &columns.hc,
        &columns.labsh,
    ]
    .map(|name| csv.column(name).map(|c| (name.clone(), c)));
    let [rgdpo, rgdpe, rgdpna, rnna, pop, hc, labsh] = value_cols;
    let (rgdpo, rgdpe, rgdpna, rnna, pop, hc, labsh) = (rgdpo?, rgdpe?, rgdpna?, rnna?, pop?, hc?, labsh?);
    let emp = match &columns.emp {
        Some(name) => Some((name.clone(), csv.column(name)?)),
        None => None,
    };
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    csv.for_each(|rec, line| {
        let get = |c: usize| rec.get(c).unwrap_or("");
        let value = |(name, c): &(String, usize)| number(path, line, name, get(*c));
        let code = country(path, line, get(code_col))?;
        let year = year(path, line, get(year_col))?;
        if !seen.insert((code, year)) {
            return Err(CliError::parse(path, line, format!("duplicate row for {code} {year}")));
        }
        out.push(Observation {
            rgdpo: value(&rgdpo)?,
            rgdpe: value(&rgdpe)?,
            rgdpna: value(&rgdpna)?,
            rnna: value(&rnna)?,
            pop: value(&pop)?,
            hc: value(&hc)?,
            labsh: value(&labsh)?,
            emp: emp.as_ref().map(value).transpose()?.flatten(),
            ..Observation::new(code, year)
        });
        Ok(())
    })?;
    Ok(out)
}

/// Columns `countrycode`, `region` and optionally `income_group`.
pub fn load_regions(path: &Path) -> CliResult<RegionMap> {
    read_regions(open(path)?, path)
}

pub fn read_regions(input: impl Read, path: &Path) -> CliResult<RegionMap> {
    let mut csv = CsvInput::new(input, path)?;
    let code_col = csv.column("countrycode")?;
    let region_col = csv.column("region")?;
    let group_col = csv.column("income_group").ok();
    let mut map = RegionMap::new();
    csv.for_each(|rec, line| {
        let code = country(path, line, rec.get(code_col).unwrap_or(""))?;
        let region = rec.get(region_col).unwrap_or("");
        if region.is_empty() {
            return Err(CliError::parse(path, line, format!("empty region for {code}")));
        }
        let group = group_col.and_then(|c| rec.get(c)).filter(|g| !g.is_empty());
        map.insert(code, region, group)?;
        Ok(())
    })?;
    Ok(map)
}

/// Columns `countrycode`, `year`, `oil_rents_pct_gdp`. Blank values are skipped.
pub fn load_oil_rents(path: &Path) -> CliResult<OilRentSeries> {
    read_oil_rents(open(path)?, path)
}

pub fn read_oil_rents(input: impl Read, path: &Path) -> CliResult<OilRentSeries> {
    let mut csv = CsvInput::new(input, path)?;
    let code_col = csv.column("countrycode")?;
    let year_col = csv.column("year")?;
    let value_col = csv.column("oil_rents_pct_gdp")?;
    let mut series = OilRentSeries::new();
    csv.for_each(|rec, line| {
        let code = country(path, line, rec.get(code_col).unwrap_or(""))?;
        let year = year(path, line, rec.get(year_col).unwrap_or(""))?;
        if let Some(v) = number(path, line, "oil_rents_pct_gdp", rec.get(value_col).unwrap_or(""))? {
            series.insert(code, year, v)?;
        }
        Ok(())
    })?;
    Ok(series)
}

/// Investment by country and year. Columns `countrycode`, `year`, `investment`.
pub type InvestmentTable = BTreeMap<CountryCode, BTreeMap<i32, f64>>;

pub fn load_investment(path: &Path) -> CliResult<InvestmentTable> {
    read_investment(open(path)?, path)
}

pub fn read_investment(input: impl Read, path: &Path) -> CliResult<InvestmentTable> {
    let mut csv = CsvInput::new(input, path)?;
    let code_col = csv.column("countrycode")?;
    let year_col = csv.column("year")?;
    let value_col = csv.column("investment")?;
    let mut table = InvestmentTable::new();
    csv.for_each(|rec, line| {
        let code = country(path, line, rec.get(code_col).unwrap_or(""))?;
        let year = year(path, line, rec.get(year_col).unwrap_or(""))?;
        let Some(v) = number(path, line, "investment", rec.get(value_col).unwrap_or(""))? else {
            return Ok(());
        };
        if table.entry(code).or_default().insert(year, v).is_some() {
            return Err(CliError::parse(path, line, format!("duplicate row for {code} {year}")));
        }
        Ok(())
    })?;
    Ok(table)
}

/// Writes observations with the default PWT header, readable by [`load_pwt`].
pub fn write_observations(out: impl Write, obs: &[Observation]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cols = ColumnMap::default();
    w.write_record([
        &cols.countrycode,
        &cols.year,
        &cols.rgdpo,
        &cols.rgdpe,
        &cols.rgdpna,
        &cols.rnna,
        &cols.pop,
        &cols.hc,
        &cols.labsh,
    ])?;
    let f = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:?}"));
    for o in obs {
        w.write_record([
            o.country.to_string(),
            o.year.to_string(),
            f(o.rgdpo),
            f(o.rgdpe),
            f(o.rgdpna),
            f(o.rnna),
            f(o.pop),
            f(o.hc),
            f(o.labsh),
        ])?;
    }
    w.flush()
}

pub fn write_regions(out: impl Write, regions: &RegionMap) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["countrycode", "region"])?;
    for (code, entry) in regions.iter() {
        w.write_record([code.as_str(), entry.region.as_str()])?;
    }
    w.flush()
}
