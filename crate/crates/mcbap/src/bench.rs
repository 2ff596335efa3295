//! Batch runs over an instance tree and the per-group gap table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mcbap_core::search::SearchParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{self, IoError};
use crate::manifest::{run_with_clock, ClockKind};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub params: SearchParams,
    pub clock: ClockKind,
    pub repeats: u32,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub group: String,
    pub seed: u64,
    pub objective: f64,
    pub initial: f64,
    pub iterations: u64,
    pub elapsed: f64,
    /// Relative gap to the best known objective of the instance.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub group: String,
    pub instances: usize,
    pub runs: usize,
    pub avg_gap_pct: f64,
    pub best_gap_pct: f64,
    pub worst_gap_pct: f64,
    pub avg_objective: f64,
    pub avg_initial: f64,
    pub avg_time: f64,
}

/// Instance files under `dir`, sorted; oracle caches are skipped.
pub fn find_instances(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|source| IoError::Io { path: d.clone(), source })?;
        for e in entries {
            let path = e.map_err(|source| IoError::Io { path: d.clone(), source })?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                if name.ends_with(".json") && !name.ends_with(".oracle.json") {
                    out.push(path);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `30_5_10_seed3` belongs to group `30_5_10`.
pub fn group_of(name: &str) -> String {
    match name.rfind("_seed") {
        Some(i) => name[..i].to_string(),
        None => name.to_string(),
    }
}

/// Runs every instance `repeats` times with seeds `seed, seed + 1, ...`.
/// Gaps are relative to the best objective seen for the instance, or to a
/// cached oracle optimum when one exists next to the file and is lower.
pub fn run_bench(paths: &[PathBuf], cfg: &BenchConfig) -> Result<Vec<RunRecord>, IoError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .expect("thread pool starts");
    let per_instance: Vec<Result<Vec<RunRecord>, IoError>> = pool.install(|| {
        paths
            .par_iter()
            .map(|path| {
                let inst = io::read_instance(path)?;
                let oracle = io::read_oracle(&io::oracle_path(path)).ok().map(|o| o.objective);
                let mut runs: Vec<RunRecord> = (0..cfg.repeats)
                    .map(|r| {
                        let params = SearchParams { seed: cfg.params.seed + u64::from(r), ..cfg.params.clone() };
                        let res = run_with_clock(&inst, &params, cfg.clock);
                        RunRecord {
                            instance: inst.name.clone(),
                            group: group_of(&inst.name),
                            seed: params.seed,
                            objective: res.best_objective,
                            initial: res.initial_objective,
                            iterations: res.iterations,
                            elapsed: res.elapsed,
                            gap: 0.0,
                        }
                    })
                    .collect();
                let best = runs
                    .iter()
                    .map(|r| r.objective)
                    .chain(oracle)
                    .fold(f64::INFINITY, f64::min);
                for r in &mut runs {
                    let g = mcbap_core::model::gap(r.objective, best).unwrap_or(0.0);
                    r.gap = if g.abs() < 1e-9 { 0.0 } else { g };
                }
                Ok(runs)
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in per_instance {
        out.extend(r?);
    }
    Ok(out)
}

/// Per-group averages of the average, best and worst run gap per instance.
pub fn gap_table(records: &[RunRecord]) -> Vec<GapRow> {
    let mut by_instance: BTreeMap<(&str, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_instance.entry((r.group.as_str(), r.instance.as_str())).or_default().push(r);
    }
    let mut by_group: BTreeMap<&str, Vec<Vec<&RunRecord>>> = BTreeMap::new();
    for ((g, _), runs) in by_instance {
        by_group.entry(g).or_default().push(runs);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    by_group
        .into_iter()
        .map(|(g, insts)| {
            let avg: Vec<f64> = insts.iter().map(|rs| mean(&rs.iter().map(|r| r.gap).collect::<Vec<_>>())).collect();
            let best: Vec<f64> = insts.iter().map(|rs| rs.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)).collect();
            let worst: Vec<f64> = insts.iter().map(|rs| rs.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max)).collect();
            let all: Vec<&RunRecord> = insts.iter().flatten().copied().collect();
            GapRow {
                group: g.to_string(),
                instances: insts.len(),
                runs: all.len(),
                avg_gap_pct: 100.0 * mean(&avg),
                best_gap_pct: 100.0 * mean(&best),
                worst_gap_pct: 100.0 * mean(&worst),
                avg_objective: mean(&all.iter().map(|r| r.objective).collect::<Vec<_>>()),
                avg_initial: mean(&all.iter().map(|r| r.initial).collect::<Vec<_>>()),
                avg_time: mean(&all.iter().map(|r| r.elapsed).collect::<Vec<_>>()),
            }
        })
        .collect()
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}
