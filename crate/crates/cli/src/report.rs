//! The full set of tables, written to one directory with a manifest.

use std::path::{Path, PathBuf};

use convergence_core::decomposition::{AlphaMode, VarianceOptions};
use convergence_core::ingest::Panel;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::{self, Scope, PAIRS, REPORT_YEARS, SIGMA_YEARS};
use crate::table::{Format, Table};

pub const MANIFEST: &str = "manifest.json";

/// Capital share imposed in the constant-share comparison.
pub const CONSTANT_ALPHA: f64 = 1.0 / 3.0;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub generator: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub inputs: Vec<InputEntry>,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Serialize)]
pub struct InputEntry {
    pub role: &'static str,
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn input_entry(role: &'static str, path: &Path) -> CliResult<InputEntry> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputEntry {
        role,
        path: path.to_path_buf(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    })
}

/// Every report table, in output order.
pub fn report_tables(panel: &Panel, cfg: &RunConfig) -> CliResult<Vec<(&'static str, Table)>> {
    let scopes = [Scope::ExcludeSsa, Scope::All];
    let mut tables = Vec::new();

    tables.push((
        "table1_beta",
        pipeline::beta_table(&pipeline::table1(panel, cfg.robust)?),
    ));

    let dispersion = scopes
        .iter()
        .map(|&s| pipeline::dispersion(panel, &SIGMA_YEARS, s, true, cfg.variance_norm))
        .collect::<convergence_core::Result<Vec<_>>>()?;
    tables.push(("table2_dispersion", pipeline::dispersion_output(&dispersion)));

    for (name, mode) in [
        ("decomposition_varying_alpha", AlphaMode::Varying),
        ("decomposition_constant_alpha", AlphaMode::Constant(CONSTANT_ALPHA)),
    ] {
        let mut paths = Vec::new();
        for &scope in &scopes {
            for pair in PAIRS {
                paths.push(pipeline::gap_path(
                    panel,
                    scope,
                    &REPORT_YEARS,
                    pair,
                    cfg.grid_step,
                    mode,
                )?);
            }
        }
        tables.push((name, pipeline::change_table(&paths)));
    }

    let opts = VarianceOptions {
        alpha_const: cfg.alpha_const,
        variance_sensitive: true,
        norm: cfg.variance_norm,
        ..VarianceOptions::default()
    };
    let variance = scopes
        .iter()
        .map(|&s| pipeline::variance_path(panel, s, &REPORT_YEARS, &opts))
        .collect::<convergence_core::Result<Vec<_>>>()?;
    tables.push(("variance_decomposition", pipeline::variance_table(&variance)));
    tables.push((
        "variance_decomposition_changes",
        pipeline::variance_change_table(&variance),
    ));

    let years: Vec<i32> = panel.years().into_iter().collect();
    tables.push(("regional_capital_output", pipeline::regional_table(panel, &years)));
    tables.push((
        "alpha_by_percentile",
        pipeline::alpha_table(panel, Scope::All, &REPORT_YEARS, cfg.grid_step)?,
    ));
    tables.push(("exclusions", pipeline::exclusion_table(panel)));
    Ok(tables)
}

/// Writes every table plus the manifest into `dir`; returns the file count.
pub fn write_report(panel: &Panel, cfg: &RunConfig, dir: &Path) -> CliResult<usize> {
    let format = match cfg.format {
        Some(Format::Json) => Format::Json,
        _ => Format::Csv,
    };
    let ext = if format == Format::Json { "json" } else { "csv" };
    let tables = report_tables(panel, cfg)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let mut outputs = Vec::new();
    for (name, table) in &tables {
        let file = format!("{name}.{ext}");
        let bytes = table.to_bytes(format);
        let path = dir.join(&file);
        std::fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputEntry {
            file,
            rows: table.len(),
            sha256: sha256_hex(&bytes),
        });
    }

    let mut inputs = vec![input_entry("pwt", &cfg.pwt)?, input_entry("regions", &cfg.regions)?];
    if let Some(oil) = &cfg.oil {
        inputs.push(input_entry("oil", oil)?);
    }
    let manifest = Manifest {
        generator: format!("convergence {}", env!("CARGO_PKG_VERSION")),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        inputs,
        outputs,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
    json.push(b'\n');
    let path = dir.join(MANIFEST);
    std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
    Ok(tables.len() + 1)
}
