//! Parameter sweeps over manifest keys with seed replication.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::manifest::{RunManifest, KEYS};
use crate::pipeline::{run, RunOutput};

/// One grid axis: a manifest key and the values it takes.
pub type Axis = (String, Vec<String>);

/// Parses `key=v1,v2,...`.
pub fn parse_axis(s: &str) -> Result<Axis> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("grid axis `{s}` is not key=v1,v2,...")))?;
    let key = k.trim().to_string();
    if !KEYS.contains(&key.as_str()) || key == "version" {
        return Err(Error::InvalidConfig(format!(
            "unknown manifest key `{key}` in grid"
        )));
    }
    let values: Vec<String> = v
        .split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect();
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "grid axis `{key}` has no values"
        )));
    }
    Ok((key, values))
}

/// Aggregated outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: usize,
    pub assignment: Vec<(String, String)>,
    pub ok_runs: usize,
    pub failed_runs: usize,
    /// Error code of the first failed replicate.
    pub first_error: Option<String>,
    pub feature_columns: Option<usize>,
    pub nrmse_mean: Vec<f64>,
    /// Sample standard deviation over replicates (0 for a single run).
    pub nrmse_std: Vec<f64>,
    pub accuracy_mean: Option<f64>,
    pub valid_time_mean: Option<f64>,
}

impl SweepRow {
    pub fn status(&self) -> &'static str {
        match (self.ok_runs, self.failed_runs) {
            (_, 0) => "ok",
            (0, _) => "failed",
            _ => "partial",
        }
    }
}

/// Result of a sweep: rows plus every individual run.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<Vec<std::result::Result<RunOutput, Error>>>,
}

fn cartesian(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    let mut points = vec![Vec::new()];
    for (key, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Runs every grid point for `seeds` replicates (seed, seed + 1, ...).
///
/// `base` holds the manifest pairs the grid is applied to. Failures of
/// individual runs are recorded in their row; the sweep continues.
pub fn sweep(
    base: &BTreeMap<String, String>,
    axes: &[Axis],
    seeds: usize,
    exec: Execution,
) -> Result<SweepResult> {
    if axes.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    if seeds == 0 {
        return Err(Error::InvalidConfig("sweep needs at least one seed".into()));
    }
    // reject an invalid base before spending time on the grid
    let base_manifest = RunManifest::from_pairs(base)?;
    let seed0 = base_manifest.seed;
    let points = cartesian(axes);
    let jobs = points.len() * seeds;
    let results = map_indexed(exec, 0..jobs, |j| {
        let (p, r) = (j / seeds, j % seeds);
        let mut pairs = base.clone();
        for (k, v) in &points[p] {
            pairs.insert(k.clone(), v.clone());
        }
        pairs.insert("run.seed".into(), (seed0 + r as u64).to_string());
        RunManifest::from_pairs(&pairs).and_then(|m| run(&m, Execution::Sequential))
    });
    let columns: Vec<Option<usize>> = points
        .iter()
        .map(|p| {
            let mut pairs = base.clone();
            pairs.extend(p.iter().cloned());
            RunManifest::from_pairs(&pairs)
                .ok()
                .map(|m| m.feature.feature_len())
        })
        .collect();
    let mut runs: Vec<Vec<_>> = Vec::with_capacity(points.len());
    let mut it = results.into_iter();
    for _ in 0..points.len() {
        runs.push(it.by_ref().take(seeds).collect());
    }
    let rows = points
        .iter()
        .zip(&runs)
        .enumerate()
        .map(|(i, (assignment, reps))| aggregate(i, assignment.clone(), columns[i], reps))
        .collect();
    Ok(SweepResult {
        axes: axes.iter().map(|a| a.0.clone()).collect(),
        rows,
        runs,
    })
}

fn aggregate(
    point: usize,
    assignment: Vec<(String, String)>,
    feature_columns: Option<usize>,
    reps: &[std::result::Result<RunOutput, Error>],
) -> SweepRow {
    let ok: Vec<&RunOutput> = reps.iter().filter_map(|r| r.as_ref().ok()).collect();
    let first_error = reps
        .iter()
        .find_map(|r| r.as_ref().err())
        .map(|e| e.code().to_string());
    let dim = ok.first().map_or(0, |o| o.report.nrmse.len());
    let (nrmse_mean, nrmse_std) = (0..dim)
        .map(|c| {
            mean_std(
                &ok.iter()
                    .filter_map(|o| o.report.nrmse.get(c).copied())
                    .collect::<Vec<_>>(),
            )
        })
        .unzip();
    let accs: Vec<f64> = ok.iter().filter_map(|o| o.report.accuracy).collect();
    let vts: Vec<f64> = ok
        .iter()
        .map(|o| o.report.valid_time.unwrap_or(o.report.horizon) as f64)
        .collect();
    SweepRow {
        point,
        assignment,
        ok_runs: ok.len(),
        failed_runs: reps.len() - ok.len(),
        first_error,
        feature_columns,
        nrmse_mean,
        nrmse_std,
        accuracy_mean: (!accs.is_empty()).then(|| mean_std(&accs).0),
        valid_time_mean: (!vts.is_empty()).then(|| mean_std(&vts).0),
    }
}

impl SweepResult {
    /// One row per grid point. Valid times count the full horizon when
    /// the error never crosses the threshold.
    pub fn to_csv(&self) -> String {
        let dim = self
            .rows
            .iter()
            .map(|r| r.nrmse_mean.len())
            .max()
            .unwrap_or(0);
        let mut out = String::from("point");
        for a in &self.axes {
            let _ = write!(out, ",{a}");
        }
        out.push_str(",ok_runs,failed_runs,status,error,feature_columns");
        for i in 1..=dim {
            let _ = write!(out, ",nrmse_mean_{i},nrmse_std_{i}");
        }
        out.push_str(",accuracy_mean,valid_time_mean\n");
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            let _ = write!(out, "{}", r.point);
            for (_, v) in &r.assignment {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(
                out,
                ",{},{},{},{},{}",
                r.ok_runs,
                r.failed_runs,
                r.status(),
                opt(r.first_error.clone()),
                opt(r.feature_columns.map(|c| c.to_string()))
            );
            for i in 0..dim {
                let _ = write!(
                    out,
                    ",{},{}",
                    opt(r.nrmse_mean.get(i).map(|v| v.to_string())),
                    opt(r.nrmse_std.get(i).map(|v| v.to_string()))
                );
            }
            let _ = writeln!(
                out,
                ",{},{}",
                opt(r.accuracy_mean.map(|v| v.to_string())),
                opt(r.valid_time_mean.map(|v| v.to_string()))
            );
        }
        out
    }
}
