//! Canned benchmark recipes with published reference figures.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::manifest::RunManifest;
use crate::pipeline::{run, RunOutput};

/// What a recipe is scored against.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Exact test accuracy.
    Accuracy(f64),
    /// Per-component NRMSE reference and the accepted factor above it.
    Nrmse { values: Vec<f64>, factor: f64 },
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub label: String,
    pub manifest: RunManifest,
    pub reference: Reference,
}

fn manifest(pairs: &[(&str, &str)]) -> RunManifest {
    let map = pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    RunManifest::from_pairs(&map).expect("canned recipe is valid")
}

fn bench(name: &str, reference: Reference) -> Benchmark {
    Benchmark {
        label: name.to_string(),
        manifest: manifest(&[("task.name", name)]),
        reference,
    }
}

fn nrmse_ref(values: &[f64], factor: f64) -> Reference {
    Reference::Nrmse {
        values: values.to_vec(),
        factor,
    }
}

/// Timer recipe for a delay `tau` (training length `tau + 2`).
pub fn timer_benchmark(tau: usize) -> Benchmark {
    let label = format!("timer-tau{tau}");
    let m = manifest(&[
        ("task.name", "timer"),
        ("task.tau", &tau.to_string()),
        ("output.prefix", &label),
    ]);
    Benchmark {
        label,
        manifest: m,
        reference: Reference::Accuracy(1.0),
    }
}

/// NARMA recipe of the given order.
pub fn narma_benchmark(order: usize) -> Benchmark {
    let reference = match order {
        2 => 5.6e-4,
        5 => 3.0e-3,
        10 => 2.1e-3,
        15 => 5.9e-3,
        20 => 9.6e-3,
        _ => f64::NAN,
    };
    bench(&format!("narma{order}"), nrmse_ref(&[reference], 3.0))
}

pub fn lorenz_benchmark() -> Benchmark {
    bench("lorenz63", nrmse_ref(&[6.3e-2, 7.6e-2, 1.5e-2], 2.0))
}

pub fn mackey_glass_benchmark() -> Benchmark {
    bench("mackey-glass", nrmse_ref(&[0.16], 2.0))
}

pub fn double_scroll_benchmark() -> Benchmark {
    bench("double-scroll", nrmse_ref(&[2.1e-2, 3.2e-2, 2.2e-2], 2.0))
}

/// Every canned recipe.
pub fn benchmarks() -> Vec<Benchmark> {
    let mut v: Vec<Benchmark> = [5, 6, 10, 20].into_iter().map(timer_benchmark).collect();
    v.push(lorenz_benchmark());
    v.extend([2, 5, 10, 15, 20].into_iter().map(narma_benchmark));
    v.push(mackey_glass_benchmark());
    v.push(double_scroll_benchmark());
    v
}

/// Outcome of one benchmark.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub label: String,
    pub reference: Reference,
    pub result: std::result::Result<RunOutput, Error>,
    pub elapsed: Duration,
}

impl BenchOutcome {
    /// Whether the run meets its reference.
    pub fn passed(&self) -> bool {
        let Ok(out) = &self.result else { return false };
        match &self.reference {
            Reference::Accuracy(a) => out.report.accuracy == Some(*a),
            Reference::Nrmse { values, factor } => {
                out.report.nrmse.len() == values.len()
                    && out
                        .report
                        .nrmse
                        .iter()
                        .zip(values)
                        .all(|(got, r)| *got <= factor * r)
            }
        }
    }
}

pub fn run_benchmark(b: &Benchmark, exec: Execution) -> BenchOutcome {
    let start = Instant::now();
    let result = run(&b.manifest, exec);
    BenchOutcome {
        label: b.label.clone(),
        reference: b.reference.clone(),
        result,
        elapsed: start.elapsed(),
    }
}

/// Runs benchmarks one after another (each one parallel inside).
pub fn run_suite(list: &[Benchmark], exec: Execution) -> Vec<BenchOutcome> {
    list.iter().map(|b| run_benchmark(b, exec)).collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Summary table; multi-component values are `;`-separated.
pub fn summary_csv(outcomes: &[BenchOutcome]) -> String {
    let mut out = String::from("recipe,status,error,feature_columns,nrmse,reference_nrmse,bound_factor,accuracy,reference_accuracy\n");
    for o in outcomes {
        let (status, error, cols, nrmse, acc) = match &o.result {
            Ok(r) => (
                if o.passed() { "pass" } else { "fail" },
                String::new(),
                r.feature_columns.to_string(),
                join(&r.report.nrmse),
                r.report.accuracy.map(|a| a.to_string()).unwrap_or_default(),
            ),
            Err(e) => (
                "error",
                e.code().to_string(),
                String::new(),
                String::new(),
                String::new(),
            ),
        };
        let (rn, f, ra) = match &o.reference {
            Reference::Accuracy(a) => (String::new(), String::new(), a.to_string()),
            Reference::Nrmse { values, factor } => {
                (join(values), factor.to_string(), String::new())
            }
        };
        let _ = writeln!(
            out,
            "{},{status},{error},{cols},{nrmse},{rn},{f},{acc},{ra}",
            o.label
        );
    }
    out
}

/// Looks up a benchmark by label.
pub fn find(label: &str) -> Result<Benchmark> {
    benchmarks()
        .into_iter()
        .find(|b| b.label == label)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown benchmark `{label}`")))
}
