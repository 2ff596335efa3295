//! Command-line entry point. [`run`] returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcbap_core::instgen::{bench_path, benchmark_grid, generate, GeneratorConfig, GridKind};
use mcbap_core::lp::{build_model, solution_values, substitute_and_check, to_lp_string};
use mcbap_core::model::{gap, Instance, PortId, Solution};
use mcbap_core::oracle::{brute_force, OracleConfig};
use mcbap_core::search::{LsPolicy, SearchParams, SearchResult, Variant};

use crate::bench::{self, BenchConfig};
use crate::io::{self, IoError, OracleFile, SolutionFile};
use crate::manifest::{self, ClockKind, RunManifest};
use crate::{plot, report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARAM: i32 = 4;

/// Environment variable naming the default data root.
pub const DATA_DIR_VAR: &str = "MCBAP_DATA_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Param(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Param(_) => EXIT_PARAM,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl From<manifest::ManifestError> for CliError {
    fn from(e: manifest::ManifestError) -> Self {
        match e {
            manifest::ManifestError::MissingInstance(_) => CliError::Io(IoError::Invalid {
                path: PathBuf::new(),
                message: e.to_string(),
            }),
            other => CliError::Param(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mcbap", version, about = "Multi-port continuous berth allocation with speed optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a benchmark grid or a single instance.
    Generate(GenerateArgs),
    /// Run the adaptive large neighbourhood search.
    Solve(SolveArgs),
    /// Print the cost breakdown and violations of a solution.
    Evaluate(EvaluateArgs),
    /// Write one SVG per port.
    Plot(PlotArgs),
    /// Write the mixed-integer model in LP format.
    ExportMip(ExportArgs),
    /// Solve a tiny instance exactly and cache the optimum next to it.
    Oracle(OracleArgs),
    /// Solve every instance under a directory and write the gap table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Grid {
    Main,
    Small,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Emit a whole benchmark grid instead of one instance.
    #[arg(long, value_enum, conflicts_with_all = ["ships", "external", "segment"])]
    grid: Option<Grid>,
    #[arg(long, required_unless_present = "grid")]
    ships: Option<usize>,
    /// External ships per port.
    #[arg(long, required_unless_present = "grid")]
    external: Option<usize>,
    /// Segment length in meters.
    #[arg(long, required_unless_present = "grid")]
    segment: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Start-time grid in hours.
    #[arg(long, default_value_t = 1.0)]
    time_step: f64,
    /// Fuel price in USD per tonne.
    #[arg(long, default_value_t = 500.0)]
    fuel_price: f64,
    /// Comma-separated terminal indices to keep (0 NLRTM, 1 DEBRV, 2 DEHAM).
    #[arg(long, value_delimiter = ',')]
    ports: Option<Vec<usize>>,
    /// Output root; defaults to $MCBAP_DATA_DIR or ./data.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing files.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    /// Time budget in seconds (or virtual time units with an iteration cap).
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Iteration cap; runs on the virtual clock unless --clock wall.
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long, value_enum)]
    clock: Option<ClockKind>,
    #[arg(long, default_value = "alns", value_parser = ["alns", "lns"])]
    variant: String,
    #[arg(long, default_value = "on-improve", value_parser = ["every", "on-improve", "every2", "every4", "off"])]
    ls_policy: String,
    /// Override a tuned parameter, e.g. --param rho=0.4 (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Accept parameters outside their tuning ranges.
    #[arg(long = "unsafe")]
    allow_unsafe: bool,
}

impl SearchArgs {
    fn params(&self) -> Result<SearchParams, CliError> {
        let mut p = SearchParams {
            time_limit: self.time_limit,
            seed: self.seed,
            max_iterations: self.iterations,
            variant: if self.variant == "lns" { Variant::Lns } else { Variant::Alns },
            ls_policy: LsPolicy::parse(&self.ls_policy).expect("clap restricts the values"),
            ..SearchParams::default()
        };
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Param(format!("--param expects NAME=VALUE, got {kv:?}")))?;
            manifest::set_param(&mut p, k.trim(), v.trim())?;
        }
        Ok(p)
    }

    fn clock(&self) -> ClockKind {
        self.clock.unwrap_or(if self.iterations.is_some() { ClockKind::Virtual } else { ClockKind::Wall })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, required_unless_present = "manifest")]
    instance: Option<PathBuf>,
    /// Rerun a manifest written by an earlier solve; other search flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// Output directory; defaults to runs/<instance name>.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Reference objective for the relative gap.
    #[arg(long)]
    best: Option<f64>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Without a solution only the external ships are drawn.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long, default_value = "plots")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Substitute this solution into every row and report violations.
    #[arg(long)]
    check: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 20_000_000)]
    max_nodes: u64,
    /// Recompute even if a cached result exists.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Instance tree; defaults to $MCBAP_DATA_DIR/bench or ./data/bench.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "bench-results")]
    out: PathBuf,
}

fn data_root(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os(DATA_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARAM } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Plot(a) => cmd_plot(a, out),
        Command::ExportMip(a) => cmd_export(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn say(out: &mut dyn Write, text: impl AsRef<str>) {
    let _ = out.write_all(text.as_ref().as_bytes());
}

fn gen_error(e: mcbap_core::instgen::GenerateError) -> CliError {
    CliError::Param(e.to_string())
}

fn dir_is_nonempty(dir: &Path) -> bool {
    std::fs::read_dir(dir).map(|mut d| d.next().is_some()).unwrap_or(false)
}

fn cmd_generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let root = data_root(a.out);
    let customise = |mut cfg: GeneratorConfig| {
        cfg.time_step = a.time_step;
        cfg.ports = a.ports.clone();
        cfg.with_fuel_price(a.fuel_price)
    };
    if let Some(grid) = a.grid {
        let kind = match grid {
            Grid::Main => GridKind::Main,
            Grid::Small => GridKind::Small,
        };
        let tree = root.join("bench").join(kind.as_str());
        if dir_is_nonempty(&tree) && !a.force {
            return Err(CliError::Io(IoError::Invalid {
                path: tree,
                message: "directory is not empty; pass --force to overwrite".into(),
            }));
        }
        let configs = benchmark_grid(kind);
        for cfg in &configs {
            let inst = generate(&customise(cfg.clone())).map_err(gen_error)?;
            io::write_instance(&root.join(bench_path(kind, cfg)), &inst)?;
        }
        say(out, format!("wrote {} instances under {}\n", configs.len(), tree.display()));
        return Ok(());
    }
    let cfg = customise(GeneratorConfig::new(
        a.seed,
        a.ships.expect("clap requires it"),
        a.external.expect("clap requires it"),
        a.segment.expect("clap requires it"),
    ));
    let path = root.join(cfg.group()).join(format!("seed{}.json", cfg.seed));
    if path.exists() && !a.force {
        return Err(CliError::Io(IoError::Invalid {
            path,
            message: "file exists; pass --force to overwrite".into(),
        }));
    }
    let inst = generate(&cfg).map_err(gen_error)?;
    io::write_instance(&path, &inst)?;
    say(out, format!("wrote {}\n", path.display()));
    Ok(())
}

fn solution_file(inst: &Instance, sol: &Solution) -> SolutionFile {
    SolutionFile { instance: inst.name.clone(), objective: inst.objective(sol).ok(), solution: sol.clone() }
}

fn write_run(dir: &Path, suffix: &str, inst: &Instance, r: &SearchResult) -> Result<(), IoError> {
    io::write_solution(&dir.join(format!("solution{suffix}.json")), &solution_file(inst, &r.best))?;
    io::write_text(&dir.join(format!("trace{suffix}.csv")), &report::trace_csv(r))?;
    io::write_text(&dir.join(format!("probabilities{suffix}.csv")), &report::probabilities_csv(r))?;
    io::write_text(&dir.join(format!("operators{suffix}.csv")), &report::operator_stats_csv(r))?;
    Ok(())
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let m = match &a.manifest {
        Some(path) => {
            let mut m = manifest::read_manifest(path)?;
            if let Some(o) = a.out.clone() {
                m.output_dir = o;
            }
            m
        }
        None => {
            let instance = a.instance.clone().expect("clap requires it");
            let stem = instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            RunManifest {
                params: a.search.params()?,
                clock: a.search.clock(),
                repeats: a.repeats,
                output_dir: a.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(stem)),
                allow_out_of_range: a.search.allow_unsafe,
                instance,
            }
        }
    };
    if !m.instance.is_file() {
        return Err(CliError::Io(IoError::Invalid {
            path: m.instance.clone(),
            message: "instance file does not exist".into(),
        }));
    }
    m.validate()?;
    let inst = io::read_instance(&m.instance)?;
    io::write_text(&m.path_in("manifest.json"), &manifest::manifest_to_string(&m))?;

    let results: Vec<SearchResult> = (0..m.repeats).map(|r| m.run_repeat(&inst, r)).collect();
    for (r, res) in results.iter().enumerate() {
        if !inst.check_feasibility(&res.best).is_empty() {
            return Err(CliError::Infeasible(format!("run {r} produced an infeasible plan")));
        }
    }
    let best_idx = (0..results.len())
        .min_by(|&i, &j| results[i].best_objective.total_cmp(&results[j].best_objective))
        .expect("at least one repeat");
    let best = results[best_idx].best_objective;
    if m.repeats == 1 {
        write_run(&m.output_dir, "", &inst, &results[0])?;
    } else {
        for (r, res) in results.iter().enumerate() {
            write_run(&m.output_dir, &format!("_seed{}", m.seed_of(r as u32)), &inst, res)?;
        }
        io::write_solution(&m.path_in("solution.json"), &solution_file(&inst, &results[best_idx].best))?;
    }

    let gaps: Vec<f64> = results.iter().map(|r| gap(r.best_objective, best).unwrap_or(0.0)).collect();
    for (r, res) in results.iter().enumerate() {
        say(out, format!("seed {}: {}; ls improvements {}\n", m.seed_of(r as u32), res.summary(), res.ls.improvements));
    }
    if m.repeats > 1 {
        let avg = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let worst = gaps.iter().copied().fold(0.0, f64::max);
        say(
            out,
            format!(
                "best {best:.2}; gap to best found: average {:.4}%, best 0.0000%, worst {:.4}%\n",
                100.0 * avg,
                100.0 * worst
            ),
        );
    }
    say(out, format!("outputs in {}\n", m.output_dir.display()));
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = io::read_instance(&a.instance)?;
    let sol = io::read_solution_for(&a.solution, &inst)?;
    let violations = inst.check_feasibility(&sol);
    match inst.evaluate(&sol) {
        Ok(b) => {
            say(out, report::breakdown_text(&b));
            if let Some(z) = a.best {
                let g = gap(b.total, z).map_err(|e| CliError::Param(e.to_string()))?;
                say(out, format!("gap         {:>16.6}\n", g));
            }
        }
        Err(e) => say(out, format!("cannot evaluate: {e}\n")),
    }
    say(out, report::violations_text(&violations));
    if violations.is_empty() {
        say(out, "feasible\n");
        Ok(())
    } else {
        Err(CliError::Infeasible(format!("{} violation(s)", violations.len())))
    }
}

fn cmd_plot(a: PlotArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = io::read_instance(&a.instance)?;
    let sol = match &a.solution {
        Some(p) => io::read_solution_for(p, &inst)?,
        None => Solution::empty(&inst),
    };
    for (p, port) in inst.ports.iter().enumerate() {
        let path = a.out.join(format!("{}_{}.svg", inst.name, port.code));
        io::write_text(&path, &plot::port_svg(&inst, &sol, PortId(p)))?;
        say(out, format!("wrote {}\n", path.display()));
    }
    Ok(())
}

fn cmd_export(a: ExportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = io::read_instance(&a.instance)?;
    let model = build_model(&inst);
    io::write_text(&a.out, &to_lp_string(&model, &format!("berth allocation model for {}", inst.name)))?;
    say(
        out,
        format!(
            "wrote {}: {} variables ({} continuous, {} binary), {} rows\n",
            a.out.display(),
            model.variables.len(),
            model.continuous_count(),
            model.binary_count(),
            model.rows.len()
        ),
    );
    if let Some(path) = &a.check {
        let sol = io::read_solution_for(path, &inst)?;
        let values = solution_values(&inst, &sol).map_err(|e| CliError::Infeasible(e.to_string()))?;
        let rep = substitute_and_check(&model, &values).map_err(|e| CliError::Param(e.to_string()))?;
        say(out, format!("substituted objective {}\n", rep.objective));
        for (row, excess) in &rep.violated_rows {
            say(out, format!("violated row {row} by {excess}\n"));
        }
        if !rep.is_feasible() {
            return Err(CliError::Infeasible(format!("{} row(s) violated", rep.violated_rows.len())));
        }
        say(out, "all rows satisfied\n");
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let path = io::oracle_path(&a.instance);
    if path.exists() && !a.force {
        let cached = io::read_oracle(&path)?;
        say(out, format!("cached optimum {} ({})\n", cached.objective, path.display()));
        return Ok(());
    }
    let inst = io::read_instance(&a.instance)?;
    let cfg = OracleConfig { max_nodes: a.max_nodes, ..OracleConfig::default() };
    let res = brute_force(&inst, &cfg).map_err(|e| CliError::Param(e.to_string()))?;
    io::write_oracle(
        &path,
        &OracleFile { instance: inst.name.clone(), objective: res.objective, nodes: res.nodes, solution: res.solution },
    )?;
    say(out, format!("optimum {} after {} nodes ({})\n", res.objective, res.nodes, path.display()));
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dir = a.dir.clone().unwrap_or_else(|| data_root(None).join("bench"));
    let paths = bench::find_instances(&dir)?;
    let params = a.search.params()?;
    if !a.search.allow_unsafe {
        params.validate().map_err(|e| CliError::Param(e.to_string()))?;
    }
    if a.repeats == 0 {
        return Err(CliError::Param("repeats must be at least 1".into()));
    }
    let cfg = BenchConfig { params, clock: a.search.clock(), repeats: a.repeats, jobs: a.jobs };
    let records = bench::run_bench(&paths, &cfg)?;
    let table = bench::gap_table(&records);
    io::write_text(&a.out.join("runs.csv"), &bench::to_csv(&records))?;
    io::write_text(&a.out.join("gaps.csv"), &bench::to_csv(&table))?;
    for row in &table {
        say(
            out,
            format!(
                "{:<10} n={:<3} avg {:.3}% best {:.3}% worst {:.3}%\n",
                row.group, row.instances, row.avg_gap_pct, row.best_gap_pct, row.worst_gap_pct
            ),
        );
    }
    say(out, format!("{} runs over {} instances; tables in {}\n", records.len(), paths.len(), a.out.display()));
    Ok(())
}
