//! `qngrc`: generate data, run, sweep and benchmark forecasting recipes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qngrc::error::ErrorClass;
use qngrc::exec::Execution;
use qngrc::manifest::{parse_override, parse_pairs, RunManifest, TaskKind, OUT_DIR_ENV};
use qngrc::photonics::{
    correlation_curve, curve_csv, degree_sweep, visibility, MixedPair, NoiseModel,
};
use qngrc::pipeline::{generate_series, run, series_csv, RunOutput};
use qngrc::suite::{benchmarks, run_benchmark, summary_csv, Reference};
use qngrc::sweep::{parse_axis, sweep};
use qngrc::Error;

#[derive(Parser)]
#[command(
    name = "qngrc",
    version,
    about = "Quantum next-generation reservoir computing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a task's ground-truth series as CSV, plus its manifest.
    Generate {
        #[command(flatten)]
        base: BaseArgs,
        /// Number of samples (default: what a run of the manifest uses).
        #[arg(long)]
        steps: Option<usize>,
        /// Output file (default: <out-dir>/<prefix>.series.csv).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Train and evaluate one manifest.
    Run {
        #[command(flatten)]
        base: BaseArgs,
    },
    /// Run a manifest over a parameter grid with seed replication.
    Sweep {
        #[command(flatten)]
        base: BaseArgs,
        /// Grid axis `key=v1,v2,...` (repeatable; axes combine as a product).
        #[arg(long = "grid", value_name = "KEY=VALUES")]
        grid: Vec<String>,
        /// Replicates per grid point, using seeds seed, seed + 1, ...
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },
    /// Run the canned recipes for the five benchmark tasks.
    Bench {
        /// Only run these recipes (repeatable), e.g. `timer-tau6`, `narma10`.
        #[arg(long)]
        only: Vec<String>,
        /// List recipe labels and exit.
        #[arg(long)]
        list: bool,
        /// Output directory (default: $QNGRC_OUT_DIR, else `out`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Disable the thread pool.
        #[arg(long)]
        sequential: bool,
    },
}

/// Two-photon correlation curve instead of a task series.
#[derive(Args)]
struct CurveArgs {
    /// Write a polarization correlation curve (angle_deg,counts).
    #[arg(long)]
    curve: bool,
    /// Source visibility.
    #[arg(long, default_value_t = 1.0, requires = "curve")]
    visibility: f64,
    /// Fixed idler analyzer angle in degrees.
    #[arg(long, default_value_t = 45.0, requires = "curve")]
    theta2_deg: f64,
    /// Signal analyzer step in degrees over 0..=180.
    #[arg(long, default_value_t = 5.0, requires = "curve")]
    step_deg: f64,
    /// Integration time per angle in seconds.
    #[arg(long, default_value_t = 1.0, requires = "curve")]
    integration_time: f64,
}

#[derive(Args)]
struct BaseArgs {
    /// Manifest file with `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Task: timer, narma<N>, lorenz63, mackey-glass or double-scroll.
    #[arg(long)]
    task: Option<String>,
    /// Manifest override `key=value` (repeatable, applied last).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base RNG seed (`run.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Timer delay.
    #[arg(long)]
    tau: Option<usize>,
    /// Output directory (default: $QNGRC_OUT_DIR, else `out`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io { path: PathBuf, message: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{}: {e}", e.code()),
            CliError::Io { path, message } => write!(f, "io: {}: {message}", path.display()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Io { .. } => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn exec_mode(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

impl BaseArgs {
    /// Manifest pairs from the config file, then flags, then `--set`.
    fn pairs(&self) -> CliResult<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        // the echoed version is informational
        map.remove("version");
        if let Some(t) = &self.task {
            map.insert("task.name".into(), t.clone());
        }
        if let Some(s) = self.seed {
            map.insert("run.seed".into(), s.to_string());
        }
        if let Some(t) = self.tau {
            map.insert("task.tau".into(), t.to_string());
        }
        if let Some(d) = &self.out_dir {
            map.insert("output.dir".into(), d.display().to_string());
        }
        for s in &self.set {
            let (k, v) = parse_override(s)?;
            map.insert(k, v);
        }
        if !map.contains_key("task.name") {
            return Err(Error::InvalidConfig(
                "no task given; use --task or a manifest with task.name".into(),
            )
            .into());
        }
        Ok(map)
    }
}

/// Resolves the output directory. An explicitly requested directory must
/// exist; the built-in default is created on demand.
fn output_dir(dir: &str, explicit: bool) -> CliResult<PathBuf> {
    let path = PathBuf::from(dir);
    if path.is_dir() {
        return Ok(path);
    }
    if explicit {
        return Err(io_err(&path, "output directory does not exist"));
    }
    std::fs::create_dir_all(&path).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn dir_is_explicit(pairs: &BTreeMap<String, String>) -> bool {
    pairs.contains_key("output.dir") || std::env::var_os(OUT_DIR_ENV).is_some_and(|v| !v.is_empty())
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_run(dir: &Path, prefix: &str, out: &RunOutput) -> CliResult<Vec<PathBuf>> {
    let mut files = vec![
        (
            dir.join(format!("{prefix}.metrics.json")),
            out.metrics_text(),
        ),
        (
            dir.join(format!("{prefix}.trajectory.csv")),
            out.trajectory_csv(),
        ),
        (
            dir.join(format!("{prefix}.manifest")),
            out.manifest.to_text(),
        ),
    ];
    if let Some(csv) = out.bench_csv() {
        files.push((dir.join(format!("{prefix}.bench.csv")), csv));
    }
    for (p, c) in &files {
        write(p, c)?;
    }
    Ok(files.into_iter().map(|f| f.0).collect())
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|v| format!("{v:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn default_steps(m: &RunManifest) -> usize {
    let t = &m.task;
    match t.kind {
        TaskKind::Timer => t.test,
        TaskKind::Narma => t.flush + t.train + t.test + 1,
        _ => t.flush + t.train + t.test,
    }
}

fn cmd_generate(base: &BaseArgs, steps: Option<usize>, output: Option<&Path>) -> CliResult<()> {
    let pairs = base.pairs()?;
    let m = RunManifest::from_pairs(&pairs)?;
    let n = steps.unwrap_or_else(|| default_steps(&m));
    if n == 0 {
        return Err(Error::InvalidConfig("--steps must be >= 1".into()).into());
    }
    let csv_path = match output {
        Some(p) => {
            let parent = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            if !parent.is_dir() {
                return Err(io_err(parent, "output directory does not exist"));
            }
            p.to_path_buf()
        }
        None => output_dir(&m.output_dir, dir_is_explicit(&pairs))?
            .join(format!("{}.series.csv", m.output_prefix)),
    };
    let series = generate_series(&m.task, n)?;
    write(&csv_path, &series_csv(&series))?;
    let manifest_path = csv_path.with_extension("manifest");
    write(
        &manifest_path,
        &format!("{}# generate.steps = {n}\n", m.to_text()),
    )?;
    println!("wrote {} ({n} rows)", csv_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn cmd_curve(base: &BaseArgs, c: &CurveArgs, output: Option<&Path>) -> CliResult<()> {
    if !(c.step_deg > 0.0 && c.step_deg <= 180.0) {
        return Err(Error::InvalidConfig("--step-deg must be in (0, 180]".into()).into());
    }
    let noise = NoiseModel {
        visibility: c.visibility,
        integration_time: c.integration_time,
        ..NoiseModel::default()
    };
    let seed = base.seed.unwrap_or(0);
    let points = correlation_curve(
        &MixedPair::bell(c.visibility),
        c.theta2_deg.to_radians(),
        &degree_sweep(c.step_deg),
        &noise,
        0,
        seed,
        exec_mode(base.sequential),
    )?;
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => {
            let explicit = base.out_dir.is_some()
                || std::env::var_os(OUT_DIR_ENV).is_some_and(|v| !v.is_empty());
            let dir = match &base.out_dir {
                Some(d) => d.display().to_string(),
                None => std::env::var(OUT_DIR_ENV)
                    .ok()
                    .filter(|v| !v.is_empty())
                    .unwrap_or_else(|| "out".into()),
            };
            output_dir(&dir, explicit)?.join("correlation-curve.csv")
        }
    };
    write(&path, &curve_csv(&points))?;
    let counts: Vec<u64> = points.iter().map(|p| p.counts).collect();
    let sidecar = format!(
        "curve.visibility = {}\ncurve.theta2_deg = {}\ncurve.step_deg = {}\ncurve.integration_time = {}\nrun.seed = {seed}\n",
        c.visibility, c.theta2_deg, c.step_deg, c.integration_time
    );
    write(&path.with_extension("manifest"), &sidecar)?;
    println!(
        "wrote {} (measured visibility {:.4})",
        path.display(),
        visibility(&counts)?
    );
    Ok(())
}

fn cmd_run(base: &BaseArgs) -> CliResult<()> {
    let pairs = base.pairs()?;
    let m = RunManifest::from_pairs(&pairs)?;
    let dir = output_dir(&m.output_dir, dir_is_explicit(&pairs))?;
    let out = run(&m, exec_mode(base.sequential))?;
    let files = write_run(&dir, &m.output_prefix, &out)?;
    println!(
        "task {} ({} feature columns, {})",
        m.task_name(),
        out.feature_columns,
        m.measurement.name()
    );
    if !out.report.nrmse.is_empty() {
        println!(
            "nrmse {} over {} steps",
            fmt_list(&out.report.nrmse),
            out.report.horizon
        );
    }
    if let Some(a) = out.report.accuracy {
        println!("accuracy {a}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_sweep(base: &BaseArgs, grid: &[String], seeds: usize) -> CliResult<()> {
    let pairs = base.pairs()?;
    let axes = grid
        .iter()
        .map(|g| parse_axis(g))
        .collect::<qngrc::Result<Vec<_>>>()?;
    let m = RunManifest::from_pairs(&pairs)?;
    let dir = output_dir(&m.output_dir, dir_is_explicit(&pairs))?;
    let res = sweep(&pairs, &axes, seeds, exec_mode(base.sequential))?;
    let prefix = format!("{}.sweep", m.output_prefix);
    let runs_dir = dir.join(&prefix);
    std::fs::create_dir_all(&runs_dir).map_err(|e| io_err(&runs_dir, e))?;
    for (i, reps) in res.runs.iter().enumerate() {
        for (r, out) in reps.iter().enumerate() {
            let stem = format!("point{i}-rep{r}");
            match out {
                Ok(o) => {
                    write(
                        &runs_dir.join(format!("{stem}.metrics.json")),
                        &o.metrics_text(),
                    )?;
                    write(
                        &runs_dir.join(format!("{stem}.manifest")),
                        &o.manifest.to_text(),
                    )?;
                }
                Err(e) => write(
                    &runs_dir.join(format!("{stem}.error")),
                    &format!("{}: {e}\n", e.code()),
                )?,
            }
        }
    }
    let table = res.to_csv();
    let table_path = dir.join(format!("{prefix}.csv"));
    write(&table_path, &table)?;
    write(&dir.join(format!("{prefix}.manifest")), &m.to_text())?;
    print!("{table}");
    println!("wrote {}", table_path.display());
    Ok(())
}

fn cmd_bench(
    only: &[String],
    list: bool,
    out_dir: Option<&Path>,
    sequential: bool,
) -> CliResult<()> {
    let all = benchmarks();
    if list {
        for b in &all {
            println!("{}", b.label);
        }
        return Ok(());
    }
    if let Some(bad) = only.iter().find(|l| !all.iter().any(|b| &b.label == *l)) {
        return Err(Error::InvalidConfig(format!(
            "unknown recipe `{bad}` (see `qngrc bench --list`)"
        ))
        .into());
    }
    let chosen: Vec<_> = all
        .into_iter()
        .filter(|b| only.is_empty() || only.contains(&b.label))
        .collect();
    let dir = match out_dir {
        Some(d) => output_dir(&d.display().to_string(), true)?,
        None => {
            let explicit = std::env::var_os(OUT_DIR_ENV).is_some_and(|v| !v.is_empty());
            output_dir(&chosen[0].manifest.output_dir, explicit)?
        }
    };
    let mut outcomes = Vec::new();
    for b in &chosen {
        let o = run_benchmark(b, exec_mode(sequential));
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        let detail = match (&o.result, &o.reference) {
            (Ok(r), Reference::Accuracy(a)) => {
                format!(
                    "accuracy {} (want {a})",
                    r.report.accuracy.unwrap_or(f64::NAN)
                )
            }
            (Ok(r), Reference::Nrmse { values, factor }) => format!(
                "nrmse {} (bound {factor} x {})",
                fmt_list(&r.report.nrmse),
                fmt_list(values)
            ),
            (Err(e), _) => format!("{}: {e}", e.code()),
        };
        println!(
            "{verdict} {:<14} {detail} [{:.2}s]",
            o.label,
            o.elapsed.as_secs_f64()
        );
        if let Ok(r) = &o.result {
            write_run(&dir, &o.label, r)?;
        }
        outcomes.push(o);
    }
    let path = dir.join("bench.summary.csv");
    write(&path, &summary_csv(&outcomes))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate {
            base,
            curve,
            output,
            ..
        } if curve.curve => cmd_curve(base, curve, output.as_deref()),
        Command::Generate {
            base,
            steps,
            output,
            ..
        } => cmd_generate(base, *steps, output.as_deref()),
        Command::Run { base } => cmd_run(base),
        Command::Sweep { base, grid, seeds } => cmd_sweep(base, grid, *seeds),
        Command::Bench {
            only,
            list,
            out_dir,
            sequential,
        } => cmd_bench(only, *list, out_dir.as_deref(), *sequential),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
