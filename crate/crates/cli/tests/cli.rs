mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::{cli, Fixture};
use convergence_cli::error::{EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use convergence_cli::table::Table;

fn read_csv(path: &Path) -> Table {
    Table::read_csv(std::fs::File::open(path).unwrap(), path).unwrap()
}

fn parse_csv(text: &str) -> Table {
    Table::read_csv(text.as_bytes(), Path::new("<stdout>")).unwrap()
}

fn col(t: &Table, row: usize, name: &str) -> f64 {
    let j = t.column(name).unwrap_or_else(|| panic!("no column {name}"));
    t.rows[row][j]
        .as_f64()
        .unwrap_or_else(|| panic!("{name} is not numeric"))
}

fn text(t: &Table, row: usize, name: &str) -> String {
    let j = t.column(name).unwrap();
    t.rows[row][j].as_str().unwrap().to_string()
}

fn one_line(stderr: &str) -> &str {
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "expected one diagnostic line, got {stderr:?}");
    lines[0]
}

#[test]
fn synth_writes_panel_regions_and_truth() {
    let f = Fixture::new();
    let pwt = std::fs::read_to_string(f.path("pwt.csv")).unwrap();
    assert!(pwt.starts_with("countrycode,"));
    // 80 countries, 5 years, one header
    assert_eq!(pwt.lines().count(), 80 * 5 + 1);
    let regions = read_csv(&f.path("regions.csv"));
    assert_eq!(regions.len(), 80);
    let truth = read_csv(&f.path("truth.csv"));
    assert_eq!(truth.len(), 5);
    for i in 0..truth.len() {
        let sum = col(&truth, i, "contrib_tfp") + col(&truth, i, "contrib_ky") + col(&truth, i, "contrib_h");
        assert!((sum - col(&truth, i, "total")).abs() < 1e-12);
    }
}

#[test]
fn synth_is_deterministic() {
    let a = Fixture::new();
    let b = Fixture::new();
    for name in ["pwt.csv", "regions.csv", "truth.csv"] {
        assert_eq!(
            std::fs::read(a.path(name)).unwrap(),
            std::fs::read(b.path(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn ingest_lists_records_and_exclusions() {
    let f = Fixture::new();
    let excl = f.path("excluded.csv");
    let out = f.run(&["--format", "csv", "ingest", "--exclusions", f.s(&excl)]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    assert!(!t.is_empty());
    let e = read_csv(&excl);
    assert_eq!(e.columns, vec!["countrycode", "reason"]);
    // population floor drops some of the smallest synthetic countries
    let high = f.run(&["--format", "csv", "--min-population", "50", "ingest"]);
    assert_eq!(high.code, EXIT_OK, "{}", high.stderr);
    assert!(parse_csv(&high.stdout).len() < t.len());
}

#[test]
fn beta_runs_with_robust_and_classical_errors() {
    let f = Fixture::new();
    let out = f.run(&["--format", "csv", "beta", "--t0", "1980", "--t1", "2000"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    assert_eq!(t.len(), 1);
    assert_eq!(text(&t, 0, "se_type"), "hc1");
    assert!(col(&t, 0, "se_beta") > 0.0);
    assert!(col(&t, 0, "n") >= 60.0);

    let classical = f.run(&["--format", "csv", "beta", "--t0", "1980", "--t1", "2000", "--classical"]);
    let c = parse_csv(&classical.stdout);
    assert_eq!(col(&c, 0, "beta"), col(&t, 0, "beta"));
    assert_eq!(text(&c, 0, "se_type"), "classical");

    let ex = f.run(&[
        "--format",
        "csv",
        "beta",
        "--t0",
        "1980",
        "--t1",
        "2000",
        "--exclude-ssa",
    ]);
    let e = parse_csv(&ex.stdout);
    assert_eq!(text(&e, 0, "sample"), "excluding-ssa");
    assert!(col(&e, 0, "n") < col(&t, 0, "n"));
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let f = Fixture::new();
    let out = f.run(&["beta", "--t1", "2000"]);
    assert_eq!(out.code, EXIT_USAGE);
    let line = one_line(&out.stderr);
    assert!(line.starts_with("error[usage]: "), "{line}");
    assert!(line.contains("--t0"), "{line}");

    let out = cli(&["frobnicate"]);
    assert_eq!(out.code, EXIT_USAGE);
    one_line(&out.stderr);

    let out = f.run(&["decompose", "--pair", "90"]);
    assert_eq!(out.code, EXIT_USAGE);
    one_line(&out.stderr);
}

#[test]
fn help_goes_to_stdout() {
    let out = cli(&["--help"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("decompose"));
    assert!(out.stderr.is_empty());
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "--data-dir",
        dir.path().to_str().unwrap(),
        "beta",
        "--t0",
        "1980",
        "--t1",
        "2000",
    ]);
    assert_eq!(out.code, EXIT_DATA);
    let line = one_line(&out.stderr);
    assert!(line.starts_with("error[io]: "), "{line}");
    assert!(line.contains("pwt.csv"), "{line}");
}

#[test]
fn malformed_input_reports_file_and_line() {
    let f = Fixture::new();
    let path = f.path("pwt.csv");
    let mut s = std::fs::read_to_string(&path).unwrap();
    s.push_str("ZZZ,1980,not-a-number,1,1,1,1,1,1\n");
    std::fs::write(&path, s).unwrap();
    let out = f.run(&["ingest"]);
    assert_eq!(out.code, EXIT_DATA);
    let line = one_line(&out.stderr);
    assert!(line.contains("pwt.csv"), "{line}");
    assert!(line.contains("402"), "{line}");
}

#[test]
fn year_outside_panel_is_reported() {
    let f = Fixture::new();
    let out = f.run(&["beta", "--t0", "1950", "--t1", "2000"]);
    assert_ne!(out.code, EXIT_OK);
    assert!(out.code == EXIT_DATA || out.code == EXIT_USAGE);
    one_line(&out.stderr);
}

#[test]
fn unidentified_slope_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut pwt = String::from("countrycode,year,rgdpo,rgdpe,rgdpna,pop,rnna,hc,labsh\n");
    let mut regions = String::from("countrycode,region\n");
    for (i, c) in ["AAA", "BBB", "CCC", "DDD", "EEE"].iter().enumerate() {
        let g = 1.0 + 0.1 * i as f64;
        pwt.push_str(&format!("{c},1980,1000,1000,1000,1,3000,2,0.6\n"));
        pwt.push_str(&format!("{c},2000,{0},{0},{0},1,3000,2,0.6\n", 1000.0 * g));
        regions.push_str(&format!("{c},Europe & Central Asia\n"));
    }
    std::fs::write(d.join("pwt.csv"), pwt).unwrap();
    std::fs::write(d.join("regions.csv"), regions).unwrap();
    let out = cli(&[
        "--data-dir",
        d.to_str().unwrap(),
        "--min-population",
        "0.1",
        "beta",
        "--t0",
        "1980",
        "--t1",
        "2000",
    ]);
    assert_eq!(out.code, EXIT_NUMERICAL, "{}", out.stderr);
    let line = one_line(&out.stderr);
    assert!(line.starts_with("error[convergence]: "), "{line}");
}

#[test]
fn sigma_identity_holds_in_output() {
    let f = Fixture::new();
    let out = f.run(&["--format", "csv", "sigma", "--years", "1980,2000,2019"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    assert_eq!(t.len(), 3);
    for i in 0..t.len() {
        let lhs = col(&t, i, "p90_p10");
        let rhs = col(&t, i, "p90_p50") * col(&t, i, "p50_p10");
        assert!((lhs - rhs).abs() <= 1e-12 * lhs, "{lhs} vs {rhs}");
        assert!(col(&t, i, "var_log") > 0.0);
    }
}

#[test]
fn decompose_changes_are_additive() {
    let f = Fixture::new();
    for alpha in ["varying", "const:0.3333333333333333"] {
        let out = f.run(&[
            "--format",
            "csv",
            "decompose",
            "--alpha",
            alpha,
            "--years",
            "1980,2000,2019",
        ]);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        let t = parse_csv(&out.stdout);
        // two consecutive periods plus the full span
        assert_eq!(t.len(), 3);
        for i in 0..t.len() {
            let parts = col(&t, i, "delta_tfp") + col(&t, i, "delta_ky") + col(&t, i, "delta_h");
            assert!((parts - col(&t, i, "delta_total")).abs() < 1e-12);
            let shares = col(&t, i, "share_tfp") + col(&t, i, "share_ky") + col(&t, i, "share_h");
            assert!((shares - 1.0).abs() < 1e-9);
        }
        // the full span is the sum of the two periods
        assert!((col(&t, 0, "delta_total") + col(&t, 1, "delta_total") - col(&t, 2, "delta_total")).abs() < 1e-12);
    }
}

const NOISELESS: &str = r#"
n_countries = 101
noise_sd = 0.0
seed = 7
population_range = [2.0, 200.0]
regions = ["Europe & Central Asia", "Sub-Saharan Africa"]

[[years]]
year = 1980
ln_tfp = [7.0, 2.2, 0.4]
ln_ky = [0.2, 0.6, 0.3]
ln_h = [0.2, 0.7]
alpha = [0.35, 0.25, -0.3]

[[years]]
year = 2000
ln_tfp = [7.2, 2.4, 0.35]
ln_ky = [0.3, 0.5, 0.25]
ln_h = [0.3, 0.62]
alpha = [0.37, 0.24, -0.3]

[[years]]
year = 2019
ln_tfp = [7.6, 2.0, 0.25]
ln_ky = [0.5, 0.3, 0.2]
ln_h = [0.4, 0.55]
alpha = [0.39, 0.2, -0.25]
"#;

#[test]
fn decompose_levels_recover_synthetic_truth() {
    let f = Fixture::with_spec(NOISELESS);
    let out = f.run(&["--format", "csv", "decompose", "--levels", "--years", "1980,2000,2019"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let got = parse_csv(&out.stdout);
    let truth = read_csv(&f.path("truth.csv"));
    assert_eq!(got.len(), truth.len());
    for i in 0..got.len() {
        assert_eq!(col(&got, i, "year"), col(&truth, i, "year"));
        assert_eq!(col(&got, i, "n"), 101.0);
        for c in ["total", "contrib_tfp", "contrib_ky", "contrib_h"] {
            let (a, b) = (col(&got, i, c), col(&truth, i, c));
            assert!((a - b).abs() < 1e-3, "{c} year row {i}: {a} vs {b}");
        }
    }
}

#[test]
fn plot_data_covers_the_grid() {
    let f = Fixture::new();
    let plot = f.path("plot.csv");
    let out = f.run(&[
        "--format",
        "csv",
        "decompose",
        "--years",
        "1980,2019",
        "--plot-data",
        f.s(&plot),
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = read_csv(&plot);
    // pair 10..90 at unit step: 81 points per year
    assert_eq!(t.len(), 2 * 81);
    let last = t.len() - 1;
    let cum = col(&t, last, "cum_tfp") + col(&t, last, "cum_ky") + col(&t, last, "cum_h");
    assert!((cum - col(&t, last, "cum_total")).abs() < 1e-12);
}

#[test]
fn vardecomp_identity_in_output() {
    let f = Fixture::new();
    let out = f.run(&["--format", "csv", "vardecomp", "--years", "1980,2000,2019"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    assert_eq!(t.len(), 3);
    for i in 0..t.len() {
        assert_eq!(col(&t, i, "alpha"), 0.46);
        let rhs = col(&t, i, "var_ln_a") + col(&t, i, "var_ln_ykh") + col(&t, i, "cov_term");
        assert!((col(&t, i, "var_ln_y") - rhs).abs() < 1e-10);
    }
    let out = f.run(&["--format", "csv", "vardecomp", "--changes", "--alpha-const", "0.3"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    for i in 0..t.len() {
        let s = col(&t, i, "share_tfp") + col(&t, i, "share_inputs") + col(&t, i, "share_cov");
        assert!((s - 1.0).abs() < 1e-9);
    }
    let out = f.run(&["vardecomp", "--per-worker"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn regions_cover_every_region() {
    let f = Fixture::new();
    let out = f.run(&["--format", "csv", "regions", "--years", "2000"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    assert_eq!(t.len(), 4);
    for i in 0..t.len() {
        assert!(col(&t, i, "ky_pop_weighted") > 0.0);
    }
}

#[test]
fn capital_diagnostics_in_steady_state() {
    let f = Fixture::new();
    let inv = f.path("investment.csv");
    let mut s = String::from("countrycode,year,investment\n");
    for c in ["AAA", "BBB"] {
        for (k, year) in (1970..=2010).enumerate() {
            s.push_str(&format!("{c},{year},{}\n", 100.0 * 1.03f64.powi(k as i32)));
        }
    }
    // incomplete series is skipped
    s.push_str("CCC,1970,5\nCCC,1975,5\n");
    std::fs::write(&inv, s).unwrap();
    let out = f.run(&[
        "--format",
        "csv",
        "capital-diagnostics",
        "--investment",
        f.s(&inv),
        "--delta",
        "0.05",
        "--years",
        "1980,2000",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let t = parse_csv(&out.stdout);
    let mut by: BTreeMap<(String, i64), f64> = BTreeMap::new();
    for i in 0..t.len() {
        by.insert(
            (text(&t, i, "countrycode"), col(&t, i, "year") as i64),
            col(&t, i, "undepreciated_share"),
        );
    }
    assert!(!by.keys().any(|(c, _)| c == "CCC"));
    let s80 = by[&("AAA".to_string(), 1980)];
    let s00 = by[&("AAA".to_string(), 2000)];
    // steady-state seed growing at g: share after n periods is ((1-d)/(1+g))^n
    let ratio: f64 = 0.95 / 1.03;
    assert!((s80 - ratio.powi(10)).abs() < 1e-9, "{s80}");
    assert!((s00 - ratio.powi(30)).abs() < 1e-9, "{s00}");

    let out = f.run(&["capital-diagnostics"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn config_file_and_flag_precedence() {
    let f = Fixture::new();
    let cfg = f.path("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "data_dir = {:?}\nformat = \"json\"\n\n[filter]\nmin_population_millions = 50.0\n",
            f.data_dir()
        ),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let from_file = cli(&["--config", c, "ingest"]);
    assert_eq!(from_file.code, EXIT_OK, "{}", from_file.stderr);
    let j = Table::read_json(from_file.stdout.as_bytes(), Path::new("<stdout>")).unwrap();

    let flagged = cli(&["--config", c, "--format", "csv", "--min-population", "0.5", "ingest"]);
    assert_eq!(flagged.code, EXIT_OK, "{}", flagged.stderr);
    let t = parse_csv(&flagged.stdout);
    assert!(t.len() > j.len());

    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    let bad = cli(&["--config", c, "ingest"]);
    assert_eq!(bad.code, EXIT_USAGE);
    assert!(one_line(&bad.stderr).starts_with("error[config]: "));
}

#[test]
fn output_file_round_trips() {
    let f = Fixture::new();
    for ext in ["csv", "json"] {
        let path = f.path(&format!("beta.{ext}"));
        let out = f.run(&["--out", f.s(&path), "beta", "--t0", "2000", "--t1", "2019"]);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        assert!(out.stdout.is_empty());
        let file = std::fs::File::open(&path).unwrap();
        let t = if ext == "csv" {
            Table::read_csv(file, &path).unwrap()
        } else {
            Table::read_json(file, &path).unwrap()
        };
        assert_eq!(t.len(), 1);
        assert!(col(&t, 0, "beta").is_finite());
    }
    let csv = read_csv(&f.path("beta.csv"));
    let json = Table::read_json(std::fs::File::open(f.path("beta.json")).unwrap(), Path::new("x")).unwrap();
    assert_eq!(col(&csv, 0, "beta"), col(&json, 0, "beta"));
    assert_eq!(col(&csv, 0, "se_beta"), col(&json, 0, "se_beta"));
}

const REPORT_FILES: [&str; 9] = [
    "table1_beta",
    "table2_dispersion",
    "decomposition_varying_alpha",
    "decomposition_constant_alpha",
    "variance_decomposition",
    "variance_decomposition_changes",
    "regional_capital_output",
    "alpha_by_percentile",
    "exclusions",
];

#[test]
fn report_is_complete_and_reproducible() {
    let f = Fixture::new();
    let a = f.path("report_a");
    let b = f.path("report_b");
    let mut first = BTreeMap::new();
    for dir in [&a, &a, &b] {
        let out = f.run(&["--out", f.s(dir), "report"]);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        assert!(out.stdout.contains("wrote 10 files"), "{}", out.stdout);
        if first.is_empty() {
            for e in std::fs::read_dir(&a).unwrap() {
                let e = e.unwrap();
                first.insert(e.file_name(), std::fs::read(e.path()).unwrap());
            }
        }
    }
    // a rerun into the same directory is byte-identical, manifest included
    for (name, bytes) in &first {
        assert_eq!(&std::fs::read(a.join(name)).unwrap(), bytes, "{name:?}");
    }
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut expected: Vec<String> = REPORT_FILES.iter().map(|n| format!("{n}.csv")).collect();
    expected.push("manifest.json".into());
    expected.sort();
    assert_eq!(names, expected);
    // tables do not depend on where they are written
    for name in names.iter().filter(|n| n.as_str() != "manifest.json") {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }

    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 9);
    for o in outputs {
        let file = a.join(o["file"].as_str().unwrap());
        let t = read_csv(&file);
        assert_eq!(t.len() as u64, o["rows"].as_u64().unwrap(), "{}", file.display());
    }
    let inputs = manifest["inputs"].as_array().unwrap();
    assert_eq!(inputs[0]["role"], "pwt");
    let pwt_len = std::fs::metadata(f.path("pwt.csv")).unwrap().len();
    assert_eq!(inputs[0]["bytes"].as_u64().unwrap(), pwt_len);

    let beta = read_csv(&a.join("table1_beta.csv"));
    assert_eq!(beta.len(), 4);
}

#[test]
fn report_json_format() {
    let f = Fixture::new();
    let dir = f.path("report_json");
    let out = f.run(&["--format", "json", "--out", f.s(&dir), "report"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    for n in REPORT_FILES {
        let path = dir.join(format!("{n}.json"));
        Table::read_json(std::fs::File::open(&path).unwrap(), &path).unwrap();
    }
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_convergence");
    let status = std::process::Command::new(bin)
        .args(["beta", "--t1", "2000"])
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_USAGE));
    let status = std::process::Command::new(bin).arg("--version").output().unwrap();
    assert!(status.status.success());
    assert!(String::from_utf8_lossy(&status.stdout).starts_with("convergence "));
}

#[test]
fn single_year_levels() {
    let f = Fixture::with_spec(NOISELESS);
    let out = f.run(&["--format", "csv", "decompose", "--levels", "--years", "2000"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(parse_csv(&out.stdout).len(), 1);
    let out = f.run(&["decompose", "--years", "2000"]);
    assert_eq!(out.code, EXIT_USAGE);
}
