//! Everything needed to repeat a solver run.

use std::path::{Path, PathBuf};

use mcbap_core::search::{run_alns, Clock, SearchParams, SearchResult, VirtualClock};
use mcbap_core::model::Instance;
use serde::{Deserialize, Serialize};

use crate::clock::WallClock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    /// Elapsed seconds of real time.
    Wall,
    /// Time advances by `time_limit / max_iterations` per iteration.
    Virtual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub instance: PathBuf,
    pub params: SearchParams,
    pub clock: ClockKind,
    pub repeats: u32,
    pub output_dir: PathBuf,
    /// Allows parameters outside their tuning ranges.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ManifestError {
    #[error("instance file {0} does not exist")]
    MissingInstance(PathBuf),
    #[error("{0}")]
    OutOfRange(String),
    #[error("the virtual clock needs an iteration cap")]
    VirtualWithoutCap,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),
    #[error("parameter {name}: cannot parse {value:?}")]
    BadValue { name: String, value: String },
}

impl RunManifest {
    pub fn validate(&self) -> Result<(), ManifestError> {
        if !self.instance.is_file() {
            return Err(ManifestError::MissingInstance(self.instance.clone()));
        }
        if !self.allow_out_of_range {
            self.params
                .validate()
                .map_err(|e| ManifestError::OutOfRange(e.to_string()))?;
        }
        if self.clock == ClockKind::Virtual && self.params.max_iterations.is_none() {
            return Err(ManifestError::VirtualWithoutCap);
        }
        if self.repeats == 0 {
            return Err(ManifestError::NoRepeats);
        }
        Ok(())
    }

    /// Seed of repeat `r`.
    pub fn seed_of(&self, r: u32) -> u64 {
        self.params.seed + u64::from(r)
    }

    /// Runs repeat `r` on `inst`.
    pub fn run_repeat(&self, inst: &Instance, r: u32) -> SearchResult {
        let params = SearchParams { seed: self.seed_of(r), ..self.params.clone() };
        run_with_clock(inst, &params, self.clock)
    }

    pub fn path_in(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

/// Runs the search with a fresh clock of the given kind.
pub fn run_with_clock(inst: &Instance, params: &SearchParams, kind: ClockKind) -> SearchResult {
    let mut clock: Box<dyn Clock> = match kind {
        ClockKind::Wall => Box::new(WallClock::start()),
        ClockKind::Virtual => Box::new(VirtualClock::spread(
            params.time_limit,
            params.max_iterations.unwrap_or(1),
        )),
    };
    run_alns(inst, params, clock.as_mut())
}

/// Names accepted by [`set_param`].
pub const PARAM_NAMES: [&str; 18] = [
    "epsilon",
    "phi",
    "xi",
    "rho",
    "shaw_a",
    "shaw_b",
    "shaw_c",
    "alpha",
    "gamma",
    "mu",
    "kappa",
    "update_interval",
    "lambda",
    "psi1",
    "psi2",
    "psi3",
    "psi4",
    "position_bound",
];

/// Sets one tuned parameter from text.
pub fn set_param(p: &mut SearchParams, name: &str, value: &str) -> Result<(), ManifestError> {
    let bad = || ManifestError::BadValue { name: name.to_string(), value: value.to_string() };
    if name == "kappa" {
        p.kappa = value.parse().map_err(|_| bad())?;
        return Ok(());
    }
    let v: f64 = value.parse().map_err(|_| bad())?;
    let slot = match name {
        "epsilon" => &mut p.epsilon,
        "phi" => &mut p.phi,
        "xi" => &mut p.xi,
        "rho" => &mut p.rho,
        "shaw_a" => &mut p.shaw_a,
        "shaw_b" => &mut p.shaw_b,
        "shaw_c" => &mut p.shaw_c,
        "alpha" => &mut p.alpha,
        "gamma" => &mut p.gamma,
        "mu" => &mut p.mu,
        "update_interval" => &mut p.update_interval,
        "lambda" => &mut p.lambda,
        "psi1" => &mut p.rewards[0],
        "psi2" => &mut p.rewards[1],
        "psi3" => &mut p.rewards[2],
        "psi4" => &mut p.rewards[3],
        "position_bound" => &mut p.position_bound,
        _ => return Err(ManifestError::UnknownParam(name.to_string())),
    };
    *slot = v;
    Ok(())
}

pub fn manifest_to_string(m: &RunManifest) -> String {
    serde_json::to_string_pretty(m).expect("manifests serialise")
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, crate::io::IoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| crate::io::IoError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| crate::io::IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
