//! Run configuration: command-line flags override keys from a TOML config
//! file, which override built-in defaults.
//!
//! Recognised keys:
//!
//! ```toml
//! data_dir = "data"            # base for relative data paths; also CONVERGENCE_DATA_DIR
//! pwt = "pwt1001.csv"          # default <data_dir>/pwt.csv
//! regions = "regions.csv"      # default <data_dir>/regions.csv
//! oil = "oil_rents.csv"        # optional; default <data_dir>/oil_rents.csv if present
//! investment = "investment.csv"
//! format = "text"              # csv | json | text
//! out = "results"
//!
//! [filter]
//! min_population_millions = 0.2
//! max_oil_rent_pct = 50.0
//! variance_exclusions = ["VEN"]
//! income_measure = "rgdpo"     # rgdpo | rgdpe
//!
//! [analysis]
//! variance_norm = "population" # population | sample
//! grid_step = 1.0
//! robust = true
//! alpha_const = 0.46
//! delta = 0.05
//!
//! [columns]                    # PWT header names
//! countrycode = "countrycode"
//! emp = "emp"                  # enables per-worker income
//! ```

use std::path::{Path, PathBuf};

use convergence_core::capital::DEFAULT_DEPRECIATION;
use convergence_core::decomposition::DEFAULT_VARIANCE_ALPHA;
use convergence_core::ingest::{FilterConfig, IncomeMeasure};
use convergence_core::stats::VarianceNorm;
use convergence_core::CountryCode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::io::ColumnMap;
use crate::table::Format;

pub const DATA_DIR_ENV: &str = "CONVERGENCE_DATA_DIR";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data_dir: Option<PathBuf>,
    pub pwt: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub oil: Option<PathBuf>,
    pub investment: Option<PathBuf>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub filter: FilterSection,
    pub analysis: AnalysisSection,
    pub columns: Option<ColumnMap>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub min_population_millions: Option<f64>,
    pub max_oil_rent_pct: Option<f64>,
    pub variance_exclusions: Option<Vec<CountryCode>>,
    pub income_measure: Option<IncomeMeasure>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub variance_norm: Option<VarianceNorm>,
    pub grid_step: Option<f64>,
    pub robust: Option<bool>,
    pub alpha_const: Option<f64>,
    pub delta: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub pwt: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub oil: Option<PathBuf>,
    pub investment: Option<PathBuf>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub min_population_millions: Option<f64>,
    pub max_oil_rent_pct: Option<f64>,
    pub variance_exclusions: Option<Vec<CountryCode>>,
    pub income_measure: Option<IncomeMeasure>,
    pub variance_norm: Option<VarianceNorm>,
    pub grid_step: Option<f64>,
    pub alpha_const: Option<f64>,
    pub delta: Option<f64>,
    pub classical: bool,
}

/// Fully resolved configuration. Serialised into the report manifest and
/// hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub pwt: PathBuf,
    pub regions: PathBuf,
    pub oil: Option<PathBuf>,
    pub investment: Option<PathBuf>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub filter: FilterConfig,
    pub columns: ColumnMap,
    pub variance_norm: VarianceNorm,
    pub grid_step: f64,
    pub robust: bool,
    pub alpha_const: f64,
    pub delta: f64,
}

impl RunConfig {
    /// Merges flags, the config file named by `--config` (if any), the
    /// data-directory environment variable and defaults.
    pub fn resolve(flags: &Overrides, env_data_dir: Option<PathBuf>) -> CliResult<RunConfig> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        // Relative paths in a config file are relative to the file.
        let file_base = flags
            .config
            .as_ref()
            .and_then(|p| p.parent())
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let from_file = |p: &Option<PathBuf>| p.as_ref().map(|p| file_base.join(p));

        let data_dir = flags
            .data_dir
            .clone()
            .or_else(|| from_file(&file.data_dir))
            .or(env_data_dir);
        let in_data_dir = |p: PathBuf| match &data_dir {
            Some(dir) if p.is_relative() && !p.exists() => dir.join(p),
            _ => p,
        };
        let default_in_data_dir = |name: &str| match &data_dir {
            Some(dir) => dir.join(name),
            None => PathBuf::from(name),
        };

        let pwt = flags
            .pwt
            .clone()
            .or_else(|| from_file(&file.pwt))
            .map(in_data_dir)
            .unwrap_or_else(|| default_in_data_dir("pwt.csv"));
        let regions = flags
            .regions
            .clone()
            .or_else(|| from_file(&file.regions))
            .map(in_data_dir)
            .unwrap_or_else(|| default_in_data_dir("regions.csv"));
        let oil = flags
            .oil
            .clone()
            .or_else(|| from_file(&file.oil))
            .map(in_data_dir)
            .or_else(|| Some(default_in_data_dir("oil_rents.csv")).filter(|p| data_dir.is_some() && p.exists()));
        let investment = flags
            .investment
            .clone()
            .or_else(|| from_file(&file.investment))
            .map(in_data_dir);

        let defaults = FilterConfig::default();
        let filter = FilterConfig {
            min_population_millions: flags
                .min_population_millions
                .or(file.filter.min_population_millions)
                .unwrap_or(defaults.min_population_millions),
            max_oil_rent_pct: flags
                .max_oil_rent_pct
                .or(file.filter.max_oil_rent_pct)
                .unwrap_or(defaults.max_oil_rent_pct),
            variance_exclusions: flags
                .variance_exclusions
                .clone()
                .or(file.filter.variance_exclusions)
                .unwrap_or(defaults.variance_exclusions),
            income_measure: flags
                .income_measure
                .or(file.filter.income_measure)
                .unwrap_or(defaults.income_measure),
        };
        filter.validate()?;

        let grid_step = flags.grid_step.or(file.analysis.grid_step).unwrap_or(1.0);
        if !(grid_step > 0.0 && grid_step <= 100.0) {
            return Err(CliError::Usage(format!(
                "grid step must lie in (0, 100], got {grid_step}"
            )));
        }
        let robust = if flags.classical {
            false
        } else {
            file.analysis.robust.unwrap_or(true)
        };

        Ok(RunConfig {
            pwt,
            regions,
            oil,
            investment,
            format: flags.format.or(file.format),
            out: flags.out.clone().or_else(|| from_file(&file.out)),
            filter,
            columns: file.columns.unwrap_or_default(),
            variance_norm: flags.variance_norm.or(file.analysis.variance_norm).unwrap_or_default(),
            grid_step,
            robust,
            alpha_const: flags
                .alpha_const
                .or(file.analysis.alpha_const)
                .unwrap_or(DEFAULT_VARIANCE_ALPHA),
            delta: flags.delta.or(file.analysis.delta).unwrap_or(DEFAULT_DEPRECIATION),
        })
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }
}
