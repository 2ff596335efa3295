//! Versioned JSON files for instances and solutions.
//!
//! Every file is an envelope `{"format": ..., "version": ..., ...}`. Readers
//! check the format tag and version before decoding the payload, and report
//! syntax and field errors with line and column.

use std::fs;
use std::path::{Path, PathBuf};

use mcbap_core::model::{Instance, Solution};
use serde::{Deserialize, Serialize};

pub const INSTANCE_FORMAT: &str = "mcbap-instance";
pub const SOLUTION_FORMAT: &str = "mcbap-solution";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: expected a {expected} file, found format {found:?}")]
    Format {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("{path}: schema version {found} is not supported (this build reads version {supported})")]
    Version { path: PathBuf, found: u32, supported: u32 },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize)]
struct InstanceOut<'a> {
    format: &'static str,
    version: u32,
    instance: &'a Instance,
}

#[derive(Deserialize)]
struct InstanceIn {
    instance: Instance,
}

/// A solution together with the name of the instance it solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance: String,
    /// Objective at the time of writing; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub solution: Solution,
}

#[derive(Serialize)]
struct SolutionOut<'a> {
    format: &'static str,
    version: u32,
    #[serde(flatten)]
    body: &'a SolutionFile,
}

fn parse_error(path: &Path, e: serde_json::Error) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<(), IoError> {
    let wrap = |source| IoError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, contents).map_err(wrap)
}

fn check_header(path: &Path, text: &str, expected: &'static str) -> Result<(), IoError> {
    let h: Header = serde_json::from_str(text).map_err(|e| parse_error(path, e))?;
    if h.format != expected {
        return Err(IoError::Format { path: path.to_path_buf(), expected, found: h.format });
    }
    if h.version != SCHEMA_VERSION {
        return Err(IoError::Version { path: path.to_path_buf(), found: h.version, supported: SCHEMA_VERSION });
    }
    Ok(())
}

pub fn instance_to_string(inst: &Instance) -> String {
    let out = InstanceOut { format: INSTANCE_FORMAT, version: SCHEMA_VERSION, instance: inst };
    serde_json::to_string_pretty(&out).expect("instances serialise")
}

pub fn instance_from_str(path: &Path, text: &str) -> Result<Instance, IoError> {
    check_header(path, text, INSTANCE_FORMAT)?;
    let body: InstanceIn = serde_json::from_str(text).map_err(|e| parse_error(path, e))?;
    body.instance
        .validate()
        .map_err(|e| IoError::Invalid { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(body.instance)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<(), IoError> {
    write_text(path, &instance_to_string(inst))
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    instance_from_str(path, &read_text(path)?)
}

pub fn solution_to_string(file: &SolutionFile) -> String {
    let out = SolutionOut { format: SOLUTION_FORMAT, version: SCHEMA_VERSION, body: file };
    serde_json::to_string_pretty(&out).expect("solutions serialise")
}

pub fn solution_from_str(path: &Path, text: &str) -> Result<SolutionFile, IoError> {
    check_header(path, text, SOLUTION_FORMAT)?;
    serde_json::from_str(text).map_err(|e| parse_error(path, e))
}

pub fn write_solution(path: &Path, file: &SolutionFile) -> Result<(), IoError> {
    write_text(path, &solution_to_string(file))
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, IoError> {
    solution_from_str(path, &read_text(path)?)
}

/// Reads a solution and checks that it fits `inst`.
pub fn read_solution_for(path: &Path, inst: &Instance) -> Result<Solution, IoError> {
    let file = read_solution(path)?;
    if file.solution.assignments.len() != inst.calls.len() {
        return Err(IoError::Invalid {
            path: path.to_path_buf(),
            message: format!(
                "solution has {} assignments but instance {} has {} calls",
                file.solution.assignments.len(),
                inst.name,
                inst.calls.len()
            ),
        });
    }
    Ok(file.solution)
}

pub const ORACLE_FORMAT: &str = "mcbap-oracle";

/// Cached exact optimum of an instance on its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    pub instance: String,
    pub objective: f64,
    pub nodes: u64,
    pub solution: Solution,
}

#[derive(Serialize)]
struct OracleOut<'a> {
    format: &'static str,
    version: u32,
    #[serde(flatten)]
    body: &'a OracleFile,
}

/// `dir/name.json` becomes `dir/name.oracle.json`.
pub fn oracle_path(instance_path: &Path) -> PathBuf {
    let stem = instance_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    instance_path.with_file_name(format!("{stem}.oracle.json"))
}

pub fn write_oracle(path: &Path, file: &OracleFile) -> Result<(), IoError> {
    let out = OracleOut { format: ORACLE_FORMAT, version: SCHEMA_VERSION, body: file };
    write_text(path, &serde_json::to_string_pretty(&out).expect("oracle results serialise"))
}

pub fn read_oracle(path: &Path) -> Result<OracleFile, IoError> {
    let text = read_text(path)?;
    check_header(path, &text, ORACLE_FORMAT)?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, e))
}
