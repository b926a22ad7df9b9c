//! File formats, reports and the `convergence` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use convergence_core::decomposition::IncomeBasis;
use convergence_core::decomposition::VarianceOptions;
use convergence_core::ingest::{build_panel, OilRentSeries, Panel, Warning};
use convergence_core::oracle::{synth_observations, SyntheticSpec};

use crate::cli::{Cli, Command};
use crate::config::{RunConfig, DATA_DIR_ENV};
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_USAGE};
use crate::pipeline::Scope;
use crate::table::{Format, Table};

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status. Failures print one diagnostic line to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return clap_exit(e, stdout, stderr),
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.diagnostic());
            e.exit_code()
        }
    }
}

fn clap_exit(e: clap::Error, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match e.kind() {
        ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
            let _ = write!(stdout, "{}", e.render());
            EXIT_OK
        }
        ClapErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = write!(stderr, "{}", e.render());
            EXIT_USAGE
        }
        _ => {
            let rendered = e.render().to_string();
            let parts: Vec<&str> = rendered
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .collect();
            let message = parts.join(" ");
            let message = message.strip_prefix("error: ").unwrap_or(&message);
            let _ = writeln!(stderr, "{}", CliError::Usage(message.to_string()).diagnostic());
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let env_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    let cfg = RunConfig::resolve(&cli.overrides(), env_dir)?;
    match &cli.command {
        Command::Ingest { exclusions } => {
            let panel = load_panel(&cfg)?;
            if let Some(path) = exclusions {
                write_file(
                    path,
                    &pipeline::exclusion_table(&panel).to_bytes(Format::from_extension(path)),
                )?;
            }
            emit(&pipeline::panel_table(&panel), &cfg, stdout)
        }
        Command::Beta {
            t0, t1, exclude_ssa, ..
        } => {
            let panel = load_panel(&cfg)?;
            let row = pipeline::beta_row(&panel, *t0, *t1, Scope::from_flag(*exclude_ssa), cfg.robust)?;
            emit(&pipeline::beta_table(&[row]), &cfg, stdout)
        }
        Command::Sigma {
            years,
            exclude_ssa,
            variance_sensitive,
        } => {
            let panel = load_panel(&cfg)?;
            let block = pipeline::dispersion(
                &panel,
                years,
                Scope::from_flag(*exclude_ssa),
                *variance_sensitive,
                cfg.variance_norm,
            )?;
            emit(&pipeline::dispersion_output(&[block]), &cfg, stdout)
        }
        Command::Decompose {
            pair,
            years,
            alpha,
            exclude_ssa,
            levels,
            plot_data,
        } => {
            check_years(years, if *levels { 1 } else { 2 })?;
            let panel = load_panel(&cfg)?;
            let scope = Scope::from_flag(*exclude_ssa);
            let path = pipeline::gap_path(&panel, scope, years, *pair, cfg.grid_step, *alpha)?;
            if let Some(file) = plot_data {
                let plot = pipeline::plot_table(&panel, scope, years, *pair, cfg.grid_step, *alpha)?;
                write_file(file, &plot.to_bytes(Format::from_extension(file)))?;
            }
            let table = if *levels {
                pipeline::level_table(&[path])
            } else {
                pipeline::change_table(&[path])
            };
            emit(&table, &cfg, stdout)
        }
        Command::Vardecomp {
            years,
            variance_sensitive,
            exclude_ssa,
            per_worker,
            changes,
            ..
        } => {
            check_years(years, if *changes { 2 } else { 1 })?;
            let panel = load_panel(&cfg)?;
            let opts = VarianceOptions {
                alpha_const: cfg.alpha_const,
                variance_sensitive: *variance_sensitive,
                basis: if *per_worker {
                    IncomeBasis::PerWorker
                } else {
                    IncomeBasis::PerCapita
                },
                norm: cfg.variance_norm,
            };
            if *per_worker && cfg.columns.emp.is_none() {
                return Err(CliError::Usage(
                    "--per-worker needs an `emp` entry under [columns] in the config".into(),
                ));
            }
            let path = pipeline::variance_path(&panel, Scope::from_flag(*exclude_ssa), years, &opts)?;
            let table = if *changes {
                pipeline::variance_change_table(&[path])
            } else {
                pipeline::variance_table(&[path])
            };
            emit(&table, &cfg, stdout)
        }
        Command::Regions { years } => {
            let panel = load_panel(&cfg)?;
            let years: Vec<i32> = years.clone().unwrap_or_else(|| panel.years().into_iter().collect());
            emit(&pipeline::regional_table(&panel, &years), &cfg, stdout)
        }
        Command::CapitalDiagnostics {
            base, years, k0_growth, ..
        } => {
            check_years(years, 1)?;
            let path = cfg
                .investment
                .as_ref()
                .ok_or_else(|| CliError::Usage("capital-diagnostics needs --investment FILE".into()))?;
            if let Some(y) = years.iter().find(|y| **y < *base) {
                return Err(CliError::Usage(format!("year {y} precedes the base year {base}")));
            }
            let investment = io::load_investment(path)?;
            let d = pipeline::capital_diagnostics(&investment, *base, years, cfg.delta, *k0_growth)?;
            for c in &d.skipped {
                log::warn!(
                    "{c}: investment series incomplete between {} and {}, skipped",
                    base + 1,
                    years.iter().max().unwrap()
                );
            }
            emit(&pipeline::capital_table(&d, years), &cfg, stdout)
        }
        Command::Synth {
            spec,
            regions_out,
            truth_out,
        } => synth(spec, regions_out.as_deref(), truth_out.as_deref(), &cfg, stdout),
        Command::Report { .. } => {
            let out = cfg
                .out
                .clone()
                .ok_or_else(|| CliError::Usage("report needs --out DIR".into()))?;
            let panel = load_panel(&cfg)?;
            let written = report::write_report(&panel, &cfg, &out)?;
            writeln!(stdout, "wrote {} files to {}", written, out.display()).map_err(|e| CliError::io(&out, e))
        }
    }
}

fn check_years(years: &[i32], min: usize) -> CliResult<()> {
    if years.len() < min {
        return Err(CliError::Usage(format!("need at least {min} year(s)")));
    }
    if years.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("years must be strictly increasing".into()));
    }
    Ok(())
}

/// Loads the configured inputs and applies the sample filters.
pub fn load_panel(cfg: &RunConfig) -> CliResult<Panel> {
    let obs = io::load_pwt(&cfg.pwt, &cfg.columns)?;
    let regions = io::load_regions(&cfg.regions)?;
    let oil = match &cfg.oil {
        Some(path) => io::load_oil_rents(path)?,
        None => {
            log::warn!("no oil-rent file given: oil rents treated as 0 and the oil filter is inactive");
            OilRentSeries::new()
        }
    };
    let panel = build_panel(&obs, &regions, &oil, &cfg.filter)?;
    for w in panel.warnings() {
        if cfg.oil.is_none() && matches!(w, Warning::MissingOilRents { .. }) {
            continue;
        }
        log::warn!("{w}");
    }
    Ok(panel)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes `table` to `--out` if given, otherwise to stdout.
fn emit(table: &Table, cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    match &cfg.out {
        Some(path) => {
            let format = cfg.format.unwrap_or_else(|| Format::from_extension(path));
            write_file(path, &table.to_bytes(format))
        }
        None => table
            .write(cfg.format.unwrap_or_default(), stdout)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn synth(
    spec_path: &Path,
    regions_out: Option<&Path>,
    truth_out: Option<&Path>,
    cfg: &RunConfig,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| CliError::io(spec_path, e))?;
    let spec: SyntheticSpec = toml::from_str(&text).map_err(|e| CliError::Config {
        path: spec_path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    let (obs, regions) = synth_observations(&spec)?;
    match &cfg.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::io(path, e))?;
            io::write_observations(BufWriter::new(f), &obs).map_err(|e| CliError::io(path, e))?;
        }
        None => io::write_observations(&mut *stdout, &obs).map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    if let Some(path) = regions_out {
        let mut buf = Vec::new();
        io::write_regions(&mut buf, &regions).map_err(|e| CliError::io(path, e))?;
        write_file(path, &buf)?;
    }
    if let Some(path) = truth_out {
        let (p_lo, p_hi) = spec.truth_pair;
        let mut t = Table::new([
            "year",
            "p_lo",
            "p_hi",
            "total",
            "contrib_tfp",
            "contrib_ky",
            "contrib_h",
        ]);
        for y in &spec.years {
            let d = y.true_gap(p_lo, p_hi);
            t.push(vec![
                d.year.into(),
                d.p_lo.into(),
                d.p_hi.into(),
                d.total.into(),
                d.contrib_tfp.into(),
                d.contrib_ky.into(),
                d.contrib_h.into(),
            ]);
        }
        write_file(path, &t.to_bytes(Format::from_extension(path)))?;
    }
    Ok(())
}
