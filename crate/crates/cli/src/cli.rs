use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use convergence_core::decomposition::AlphaMode;
use convergence_core::ingest::IncomeMeasure;
use convergence_core::stats::VarianceNorm;
use convergence_core::CountryCode;

use crate::config::Overrides;
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(
    name = "convergence",
    version,
    about = "Cross-country income convergence and growth accounting"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory holding pwt.csv, regions.csv and oil_rents.csv.
    #[arg(long, global = true, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub pwt: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub regions: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub oil: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (a directory for `report`). Defaults to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_measure, value_name = "rgdpo|rgdpe")]
    pub income_measure: Option<IncomeMeasure>,
    /// Drop countries whose population never exceeds this many millions.
    #[arg(long, global = true)]
    pub min_population: Option<f64>,
    /// Drop countries whose oil rents ever exceed this percent of GDP.
    #[arg(long, global = true)]
    pub max_oil_rent: Option<f64>,
    /// Countries dropped in variance-sensitive mode.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_country)]
    pub variance_exclusions: Option<Vec<CountryCode>>,
    #[arg(long, global = true, value_enum)]
    pub variance_norm: Option<NormArg>,
    /// Percentile step of the integration grid.
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Population,
    Sample,
}

impl From<NormArg> for VarianceNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Population => VarianceNorm::Population,
            NormArg::Sample => VarianceNorm::Sample,
        }
    }
}

fn parse_measure(s: &str) -> Result<IncomeMeasure, String> {
    s.parse().map_err(|e: convergence_core::Error| e.to_string())
}

fn parse_country(s: &str) -> Result<CountryCode, String> {
    s.parse().map_err(|e: convergence_core::Error| e.to_string())
}

/// `90:10` style percentile pair, returned as `(lo, hi)`.
fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected HI:LO, e.g. 90:10")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("invalid percentile {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("invalid percentile {b:?}"))?;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo == hi || lo < 0.0 || hi > 100.0 {
        return Err("percentiles must be distinct and within [0, 100]".into());
    }
    Ok((lo, hi))
}

/// `varying` or `const:<alpha>`.
fn parse_alpha(s: &str) -> Result<AlphaMode, String> {
    if s == "varying" {
        return Ok(AlphaMode::Varying);
    }
    let v = s
        .strip_prefix("const:")
        .ok_or("expected `varying` or `const:<alpha>`")?;
    let a: f64 = v.parse().map_err(|_| format!("invalid alpha {v:?}"))?;
    AlphaMode::Constant(a).validate().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the filtered panel and print its derived variables.
    Ingest {
        /// Also write the exclusion ledger (countrycode, reason) here.
        #[arg(long, value_name = "FILE")]
        exclusions: Option<PathBuf>,
    },
    /// Unconditional beta-convergence between two years.
    Beta {
        #[arg(long)]
        t0: i32,
        #[arg(long)]
        t1: i32,
        #[arg(long)]
        exclude_ssa: bool,
        /// Classical instead of heteroskedasticity-robust standard errors.
        #[arg(long)]
        classical: bool,
    },
    /// Income dispersion measures by year.
    Sigma {
        #[arg(long, value_delimiter = ',', default_value = "1980,1990,2000,2010,2019")]
        years: Vec<i32>,
        #[arg(long)]
        exclude_ssa: bool,
        /// Drop the configured variance exclusions.
        #[arg(long)]
        variance_sensitive: bool,
    },
    /// Decompose a percentile income gap into TFP, capital-output and human capital.
    Decompose {
        #[arg(long, default_value = "90:10", value_parser = parse_pair, value_name = "HI:LO")]
        pair: (f64, f64),
        #[arg(long, value_delimiter = ',', default_value = "1980,2000,2019")]
        years: Vec<i32>,
        #[arg(long, default_value = "varying", value_parser = parse_alpha, value_name = "varying|const:A")]
        alpha: AlphaMode,
        #[arg(long)]
        exclude_ssa: bool,
        /// Also print gap levels per year.
        #[arg(long)]
        levels: bool,
        /// Write per-percentile plot data (CSV) here.
        #[arg(long, value_name = "FILE")]
        plot_data: Option<PathBuf>,
    },
    /// Variance decomposition of log income with a common capital share.
    Vardecomp {
        #[arg(long, value_delimiter = ',', default_value = "1980,2000,2019")]
        years: Vec<i32>,
        #[arg(long)]
        alpha_const: Option<f64>,
        #[arg(long)]
        variance_sensitive: bool,
        #[arg(long)]
        exclude_ssa: bool,
        /// Income per worker (needs an `emp` column mapping).
        #[arg(long)]
        per_worker: bool,
        /// Print period changes instead of levels.
        #[arg(long)]
        changes: bool,
    },
    /// Population-weighted capital-output ratio by region.
    Regions {
        /// Defaults to every year in the panel.
        #[arg(long, value_delimiter = ',')]
        years: Option<Vec<i32>>,
    },
    /// Share of capital that is undepreciated base-year stock.
    CapitalDiagnostics {
        /// Investment file with columns countrycode, year, investment.
        #[arg(long, value_name = "FILE")]
        investment: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1970)]
        base: i32,
        #[arg(long, value_delimiter = ',', default_value = "1980,1990,2000,2010")]
        years: Vec<i32>,
        /// Investment growth used for the steady-state initial stock.
        #[arg(long)]
        k0_growth: Option<f64>,
    },
    /// Generate a synthetic panel in the PWT schema from a TOML spec.
    Synth {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Also write the region map here.
        #[arg(long, value_name = "FILE")]
        regions_out: Option<PathBuf>,
        /// Also write the analytic gap decomposition per year here.
        #[arg(long, value_name = "FILE")]
        truth_out: Option<PathBuf>,
    },
    /// Run the full set of tables and write them with a manifest to --out.
    Report {
        /// Use classical standard errors in the beta table.
        #[arg(long)]
        classical: bool,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        let g = &self.global;
        let (alpha_const, delta, classical, investment) = match &self.command {
            Command::Vardecomp { alpha_const, .. } => (*alpha_const, None, false, None),
            Command::CapitalDiagnostics { delta, investment, .. } => (None, *delta, false, investment.clone()),
            Command::Beta { classical, .. } | Command::Report { classical } => (None, None, *classical, None),
            _ => (None, None, false, None),
        };
        Overrides {
            config: g.config.clone(),
            data_dir: g.data_dir.clone(),
            pwt: g.pwt.clone(),
            regions: g.regions.clone(),
            oil: g.oil.clone(),
            investment,
            format: g.format,
            out: g.out.clone(),
            min_population_millions: g.min_population,
            max_oil_rent_pct: g.max_oil_rent,
            variance_exclusions: g.variance_exclusions.clone(),
            income_measure: g.income_measure,
            variance_norm: g.variance_norm.map(Into::into),
            grid_step: g.grid_step,
            alpha_const,
            delta,
            classical,
        }
    }
}
