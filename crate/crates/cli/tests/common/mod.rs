#![allow(dead_code)]

use std::path::{Path, PathBuf};

use tempfile::TempDir;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("convergence").chain(args.iter().copied());
    let code = convergence_cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub const SPEC: &str = r#"
n_countries = 80
noise_sd = 0.05
seed = 42
regions = ["Sub-Saharan Africa", "East Asia & Pacific", "Europe & Central Asia", "Latin America & Caribbean"]

[[years]]
year = 1980
ln_tfp = [7.0, 2.2, 0.4]
ln_ky = [0.2, 0.6, 0.3]
ln_h = [0.2, 0.7]
alpha = [0.35, 0.25, -0.3]

[[years]]
year = 1990
ln_tfp = [7.1, 2.3, 0.4]
ln_ky = [0.25, 0.55, 0.3]
ln_h = [0.25, 0.68]
alpha = [0.36, 0.25, -0.3]

[[years]]
year = 2000
ln_tfp = [7.2, 2.4, 0.35]
ln_ky = [0.3, 0.5, 0.25]
ln_h = [0.3, 0.62]
alpha = [0.37, 0.24, -0.3]

[[years]]
year = 2010
ln_tfp = [7.4, 2.2, 0.3]
ln_ky = [0.4, 0.4, 0.2]
ln_h = [0.35, 0.58]
alpha = [0.38, 0.22, -0.28]

[[years]]
year = 2019
ln_tfp = [7.6, 2.0, 0.25]
ln_ky = [0.5, 0.3, 0.2]
ln_h = [0.4, 0.55]
alpha = [0.39, 0.2, -0.25]
"#;

/// A temporary data directory holding a synthetic `pwt.csv` and
/// `regions.csv` produced by the `synth` command.
pub struct Fixture {
    pub dir: TempDir,
}

impl Fixture {
    pub fn new() -> Fixture {
        Fixture::with_spec(SPEC)
    }

    pub fn with_spec(spec: &str) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let spec_path = dir.path().join("spec.toml");
        std::fs::write(&spec_path, spec).unwrap();
        let f = Fixture { dir };
        let out = cli(&[
            "synth",
            "--spec",
            f.s(&spec_path),
            "--out",
            f.s(&f.path("pwt.csv")),
            "--regions-out",
            f.s(&f.path("regions.csv")),
            "--truth-out",
            f.s(&f.path("truth.csv")),
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        f
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn s<'a>(&self, p: &'a Path) -> &'a str {
        p.to_str().unwrap()
    }

    pub fn data_dir(&self) -> &str {
        self.dir.path().to_str().unwrap()
    }

    /// Runs a command against this fixture's data directory.
    pub fn run(&self, args: &[&str]) -> Output {
        let mut full = vec!["--data-dir", self.data_dir()];
        full.extend_from_slice(args);
        cli(&full)
    }
}
