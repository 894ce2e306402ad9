//! Configuration-driven experiment runner behind the `isofield` binary.
//!
//! Each command reads an [`ExperimentConfig`], writes deterministic payload
//! files (JSON and CSV) into the output directory and finishes with a
//! [`RunManifest`] that records timing and content digests.

mod commands;
mod config;
mod manifest;
mod suites;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use commands::{cmd_modulus, cmd_nugget, cmd_simulate, cmd_transform, cmd_verify, VerifyReport};
pub use config::{ExperimentConfig, NuggetConfig, SpectrumSource, Suite, CONFIG_SCHEMA_VERSION};
pub use manifest::{FileDigest, RunManifest, TestOutcome, MANIFEST_FILE};
pub use suites::{
    auxiliary_rng, domain_labels, orthonormality_test, projection_test, random_coefficients, round_trip_test, Grid,
    ORTHONORMALITY_TOL, PARSEVAL_TOL, PROJECTION_TOL, ROUND_TRIP_TOL,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical validity error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Library(#[from] crate::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Verify,
    Modulus,
    Nugget,
    Transform,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Modulus => "modulus",
            Command::Nugget => "nugget",
            Command::Transform => "transform",
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
    }
}

/// Result of one command before the manifest is written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub tests: Vec<TestOutcome>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.tests.iter().all(|t| t.pass)
    }
}

/// Collects payload files written into the output directory.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        self.write(name, serde_json::to_string_pretty(value)? + "\n")
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Names of the files written so far, in order.
    pub fn files(&self) -> &[String] {
        &self.files
    }
}

/// Runs a command on a validated config inside a pool of the configured
/// size and writes the manifest.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunManifest, HarnessError> {
    let workers = match cfg.workers {
        Some(0) => return Err(HarnessError::Config("workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let mut out = OutputDir::create(&cfg.out_dir)?;
    let outcome = pool.install(|| -> Result<Outcome, HarnessError> {
        match command {
            Command::Simulate => cmd_simulate(cfg, &mut out),
            Command::Verify => cmd_verify(cfg, &mut out),
            Command::Modulus => cmd_modulus(cfg, &mut out),
            Command::Nugget => cmd_nugget(cfg, &mut out),
            Command::Transform => cmd_transform(cfg, &mut out),
        }
    })?;
    let files = out
        .files
        .iter()
        .map(|f| FileDigest::of(&out.dir, f))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = RunManifest {
        schema_version: CONFIG_SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.name().to_string(),
        config: cfg.clone(),
        workers,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        pass: outcome.pass(),
        tests: outcome.tests,
        files,
    };
    manifest.write(&out.dir)?;
    Ok(manifest)
}

/// Loads the config at `path`, applies overrides and runs the command.
pub fn run_path(command: Command, path: &Path, overrides: &Overrides) -> Result<RunManifest, HarnessError> {
    let mut cfg = ExperimentConfig::load(path)?;
    overrides.apply(&mut cfg);
    run(command, &cfg)
}

/// Maps a run result onto the process exit code.
pub fn exit_code(result: &Result<RunManifest, HarnessError>) -> i32 {
    match result {
        Ok(m) if m.pass => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => e.exit_code(),
    }
}
