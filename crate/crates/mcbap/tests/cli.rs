use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mcbap::io::{self, SolutionFile};
use mcbap_core::construct::construct;
use mcbap_core::instgen::{generate, GeneratorConfig};
use mcbap_core::model::{Instance, Solution};

fn mcbap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcbap"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MCBAP_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "json") {
                out.push(p);
            }
        }
    }
    out
}

fn write_instance(dir: &Path, ships: usize) -> (PathBuf, Instance) {
    let inst = generate(&GeneratorConfig::new(11, ships, 1, 80.0)).unwrap();
    let path = dir.join("inst.json");
    io::write_instance(&path, &inst).unwrap();
    (path, inst)
}

fn write_solution(path: &Path, inst: &Instance, sol: &Solution) {
    let file = SolutionFile { instance: inst.name.clone(), objective: None, solution: sol.clone() };
    io::write_solution(path, &file).unwrap();
}

#[test]
fn grids_have_expected_sizes_and_group_names() {
    let dir = tempfile::tempdir().unwrap();
    for (grid, count) in [("main", 240), ("small", 720)] {
        let o = mcbap(&["generate", "--grid", grid, "--out", "data"], dir.path());
        assert!(o.status.success(), "{o:?}");
        let root = dir.path().join("data/bench").join(grid);
        let files = json_files(&root);
        assert_eq!(files.len(), count);
        for f in &files {
            let group = f.parent().unwrap().file_name().unwrap().to_string_lossy().into_owned();
            let parts: Vec<&str> = group.split('_').collect();
            assert_eq!(parts.len(), 3, "{group}");
            assert!(parts.iter().all(|p| p.parse::<u32>().is_ok()), "{group}");
            assert!(f.file_name().unwrap().to_string_lossy().starts_with("seed"));
        }
    }
    let again = mcbap(&["generate", "--grid", "main", "--out", "data"], dir.path());
    assert_eq!(again.status.code(), Some(3));
    let forced = mcbap(&["generate", "--grid", "main", "--out", "data", "--force"], dir.path());
    assert!(forced.status.success());
}

#[test]
fn single_instance_lands_in_group_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbap(
        &["generate", "--ships", "3", "--external", "2", "--segment", "40", "--seed", "5", "--out", "d"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let path = dir.path().join("d/3_2_40/seed5.json");
    let inst = io::read_instance(&path).unwrap();
    assert_eq!(inst.ships.len(), 3);
}

#[test]
fn data_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mcbap"))
        .args(["generate", "--ships", "2", "--external", "0", "--segment", "80"])
        .current_dir(dir.path())
        .env("MCBAP_DATA_DIR", dir.path().join("elsewhere"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(dir.path().join("elsewhere/2_0_80/seed1.json").is_file());
}

#[test]
fn evaluate_accepts_construction_and_rejects_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let (inst_path, inst) = write_instance(dir.path(), 4);
    let sol = construct(&inst);
    let good = dir.path().join("good.json");
    write_solution(&good, &inst, &sol);
    let o = mcbap(&["evaluate", "--instance", inst_path.to_str().unwrap(), "--solution", "good.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("total") && text.contains("feasible"));

    let (a, b) = (0..inst.calls.len())
        .flat_map(|a| (0..inst.calls.len()).map(move |b| (a, b)))
        .find(|&(a, b)| inst.calls[a].port == inst.calls[b].port && inst.calls[a].ship != inst.calls[b].ship)
        .expect("two ships share a port");
    let mut bad = sol.clone();
    let (pa, sa) = {
        let x = bad.assignments[a].as_ref().unwrap();
        (x.berth_position, x.berth_start)
    };
    let y = bad.assignments[b].as_mut().unwrap();
    y.berth_position = pa;
    y.berth_start = sa;
    write_solution(&dir.path().join("bad.json"), &inst, &bad);
    let o = mcbap(&["evaluate", "--instance", "inst.json", "--solution", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{o:?}");
    assert!(stdout(&o).to_lowercase().contains("overlap"));
}

#[test]
fn evaluate_reports_gap_against_reference() {
    let dir = tempfile::tempdir().unwrap();
    let (_, inst) = write_instance(dir.path(), 3);
    let sol = construct(&inst);
    write_solution(&dir.path().join("s.json"), &inst, &sol);
    let z = inst.objective(&sol).unwrap();
    let best = format!("{}", z / 1.1);
    let o = mcbap(&["evaluate", "--instance", "inst.json", "--solution", "s.json", "--best", &best], dir.path());
    assert!(o.status.success());
    let line = stdout(&o).lines().find(|l| l.starts_with("gap")).unwrap().to_string();
    let g: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((g - 0.1).abs() < 1e-6, "{line}");
}

#[test]
fn plot_draws_one_rectangle_per_call_at_port() {
    let dir = tempfile::tempdir().unwrap();
    let (_, inst) = write_instance(dir.path(), 4);
    let sol = construct(&inst);
    write_solution(&dir.path().join("s.json"), &inst, &sol);
    let o = mcbap(&["plot", "--instance", "inst.json", "--solution", "s.json", "--out", "p"], dir.path());
    assert!(o.status.success(), "{o:?}");
    for (p, port) in inst.ports.iter().enumerate() {
        let svg = std::fs::read_to_string(dir.path().join(format!("p/{}_{}.svg", inst.name, port.code))).unwrap();
        let calls = inst.calls.iter().filter(|c| c.port.0 == p).count();
        let externals = inst.externals.iter().filter(|e| e.port.0 == p).count();
        assert_eq!(svg.matches("class=\"call\"").count(), calls);
        assert_eq!(svg.matches("class=\"external\"").count(), externals);
        assert!(svg.starts_with("<svg"));
    }

    let o = mcbap(&["plot", "--instance", "inst.json", "--out", "q"], dir.path());
    assert!(o.status.success());
    let svg = std::fs::read_to_string(dir.path().join(format!("q/{}_{}.svg", inst.name, inst.ports[0].code))).unwrap();
    assert_eq!(svg.matches("class=\"call\"").count(), 0);
    assert!(svg.contains("class=\"axis\""));
}

#[test]
fn export_mip_reports_counts_and_checks_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let (_, inst) = write_instance(dir.path(), 3);
    let sol = construct(&inst);
    write_solution(&dir.path().join("s.json"), &inst, &sol);
    let o = mcbap(&["export-mip", "--instance", "inst.json", "--out", "m.lp", "--check", "s.json"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("all rows satisfied"), "{text}");
    let model = mcbap_core::lp::build_model(&inst);
    assert!(text.contains(&format!("{} variables", model.variables.len())));
    assert!(text.contains(&format!("{} rows", model.rows.len())));
    let lp = std::fs::read_to_string(dir.path().join("m.lp")).unwrap();
    assert_eq!(mcbap_core::lp::parse_lp(&lp).unwrap().rows.len(), model.rows.len());
}

#[test]
fn solve_writes_outputs_and_manifest_rerun_matches() {
    let dir = tempfile::tempdir().unwrap();
    write_instance(dir.path(), 4);
    let o = mcbap(
        &["solve", "--instance", "inst.json", "--iterations", "150", "--time-limit", "10", "--variant", "lns", "--out", "r1"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    for f in ["solution.json", "trace.csv", "probabilities.csv", "operators.csv", "manifest.json"] {
        assert!(dir.path().join("r1").join(f).is_file(), "{f}");
    }
    let o = mcbap(&["solve", "--manifest", "r1/manifest.json", "--out", "r2"], dir.path());
    assert!(o.status.success(), "{o:?}");
    for f in ["solution.json", "trace.csv"] {
        let a = std::fs::read(dir.path().join("r1").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("r2").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let o = mcbap(&["evaluate", "--instance", "inst.json", "--solution", "r1/solution.json"], dir.path());
    assert!(o.status.success());
}

#[test]
fn solve_repeats_write_per_seed_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_instance(dir.path(), 3);
    let o = mcbap(
        &["solve", "--instance", "inst.json", "--iterations", "50", "--repeats", "3", "--seed", "4", "--out", "r"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    for s in 4..7 {
        assert!(dir.path().join(format!("r/trace_seed{s}.csv")).is_file());
    }
    assert!(stdout(&o).contains("gap to best found"));
}

#[test]
fn parameter_errors_exit_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    write_instance(dir.path(), 2);
    let cases: [&[&str]; 4] = [
        &["solve", "--instance", "inst.json", "--param", "nope=1"],
        &["solve", "--instance", "inst.json", "--param", "rho=7"],
        &["solve", "--instance", "inst.json", "--variant", "tabu"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(mcbap(args, dir.path()).status.code(), Some(4), "{args:?}");
    }
    let o = mcbap(&["solve", "--instance", "inst.json", "--param", "rho=7", "--unsafe", "--iterations", "5", "--out", "u"], dir.path());
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn missing_input_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbap(&["evaluate", "--instance", "none.json", "--solution", "none.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = mcbap(&["solve", "--instance", "none.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn oracle_caches_result_and_bench_uses_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbap(&["generate", "--ships", "2", "--external", "1", "--segment", "80", "--time-step", "4", "--out", "d"], dir.path());
    assert!(o.status.success());
    let o = mcbap(&["oracle", "--instance", "d/2_1_80/seed1.json"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let cache = io::read_oracle(&dir.path().join("d/2_1_80/seed1.oracle.json")).unwrap();
    let o = mcbap(&["oracle", "--instance", "d/2_1_80/seed1.json"], dir.path());
    assert!(stdout(&o).starts_with("cached"));

    let o = mcbap(&["bench", "--dir", "d", "--iterations", "100", "--repeats", "2", "--jobs", "2", "--out", "b"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let mut rdr = csv::Reader::from_path(dir.path().join("b/runs.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let headers = rdr.headers().unwrap().clone();
    let obj = headers.iter().position(|h| h == "objective").unwrap();
    for r in &rows {
        assert!(r[obj].parse::<f64>().unwrap() >= cache.objective - 1e-6);
    }
    assert!(dir.path().join("b/gaps.csv").is_file());
}
