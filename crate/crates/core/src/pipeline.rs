//! End-to-end runs: generate, encode, train, forecast, score.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::dynamics::{
    double_scroll_rhs, integrate, lorenz63_rhs, mackey_glass, narma_series, standardize,
    timer_series, MackeyGlass, OdeGrid, SeriesBundle,
};
use crate::encoding::{delay_window, FeatureConfig, TargetMode};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::manifest::{Normalize, RunManifest, TaskKind, TaskSpec};
use crate::measurement::{Featurizer, MeasurementModel};
use crate::metrics::{nrmse, timer_accuracy, valid_time, MetricReport, NRMSE_DEFINITION};
use crate::photonics::{compile_path_state, C64};
use crate::readout::{
    build_feature_matrix, forecast_closed_loop, next_step_targets, train, ReadoutWeights,
};

/// A generated series with column names, one row per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub names: Vec<String>,
    pub data: DMatrix<f64>,
}

/// Raw ground truth of `samples` steps for a task. Timer and NARMA series
/// carry the input in row 0 and the target in row 1.
pub fn generate_series(task: &TaskSpec, samples: usize) -> Result<Series> {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
    match task.kind {
        TaskKind::Timer => {
            let t = timer_series(task.k_start, task.tau, samples)?;
            let data = DMatrix::from_fn(
                2,
                samples,
                |i, k| if i == 0 { t.input[k] } else { t.target[k] },
            );
            Ok(Series {
                names: names(&["x1", "y1"]),
                data,
            })
        }
        TaskKind::Narma => {
            let (x, y) = narma_series(task.order, task.transient + samples)?;
            let data = DMatrix::from_fn(2, samples, |i, k| {
                if i == 0 {
                    x[task.transient + k]
                } else {
                    y[task.transient + k]
                }
            });
            Ok(Series {
                names: names(&["x1", "y1"]),
                data,
            })
        }
        TaskKind::Lorenz63 | TaskKind::DoubleScroll => {
            let grid = OdeGrid {
                dt: task.dt,
                sample_every: task.sample_every,
                transient: task.transient,
            };
            let init = [task.init[0], task.init[1], task.init[2]];
            let data = if task.kind == TaskKind::Lorenz63 {
                integrate(|x| Some(lorenz63_rhs(x)), init, grid, samples)?
            } else {
                integrate(double_scroll_rhs, init, grid, samples)?
            };
            Ok(Series {
                names: names(&["x1", "x2", "x3"]),
                data,
            })
        }
        TaskKind::MackeyGlass => {
            let params = MackeyGlass {
                dt: task.dt,
                tau: task.tau_mg,
                sample_every: task.sample_every,
                init: task.init[0],
                transient: task.transient,
            };
            let v = mackey_glass(&params, samples)?;
            Ok(Series {
                names: names(&["x1"]),
                data: DMatrix::from_row_slice(1, samples, &v),
            })
        }
    }
}

/// Wave-plate settings for one branch of one encoded state.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub state: usize,
    pub branch: usize,
    /// `ok`, `empty` (unpopulated branch) or `singular`.
    pub status: &'static str,
    pub theta_ua: Option<f64>,
    pub theta_ub: Option<f64>,
    pub source_theta: Option<f64>,
    pub pump_theta: Option<f64>,
    pub phase: Option<f64>,
}

/// Predictions against targets over the evaluation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<usize>,
    pub pred: DMatrix<f64>,
    pub target: DMatrix<f64>,
    /// 0.5-thresholded predictions for binary tasks.
    pub thresholded: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub report: MetricReport,
    pub trajectory: Trajectory,
    pub weights: ReadoutWeights,
    pub feature_columns: usize,
    /// Present for the photonic backend when states fit two pair branches.
    pub bench: Option<Vec<BenchRow>>,
}

/// Runs one manifest.
pub fn run(manifest: &RunManifest, exec: Execution) -> Result<RunOutput> {
    match manifest.task.kind {
        TaskKind::Timer => run_timer(manifest, exec),
        TaskKind::Narma => run_narma(manifest, exec),
        _ => run_autonomous(manifest, exec),
    }
}

fn featurizer(m: &RunManifest) -> Result<Featurizer> {
    Featurizer::new(m.feature, m.measurement)
}

fn run_timer(m: &RunManifest, exec: Execution) -> Result<RunOutput> {
    let t = &m.task;
    let cfg = m.feature;
    let f = featurizer(m)?;
    let pad = cfg.first_valid_step();
    let padded = |input: &[f64]| {
        let mut v = vec![0.0; pad];
        v.extend_from_slice(input);
        DMatrix::from_row_slice(1, v.len(), &v)
    };
    // training covers k_start .. k_start + train
    let train_len = (t.k_start + t.train).max(t.k_start + t.tau + 1);
    let tr = timer_series(t.k_start, t.tau, train_len)?;
    let x_train = padded(&tr.input);
    let steps = (pad + t.k_start)..(pad + t.k_start + t.train);
    let mtx = build_feature_matrix(&x_train, steps.clone(), &f, m.seed, exec)?;
    let y = DMatrix::from_row_slice(1, t.train, &tr.target[t.k_start..t.k_start + t.train]);
    let weights = train(&mtx, &y, cfg.ridge, m.solver)?;

    let te = timer_series(t.k_start, t.tau, t.test)?;
    let x_test = padded(&te.input);
    let test_features = build_feature_matrix(&x_test, pad..pad + t.test, &f, m.seed, exec)?;
    let pred = weights.predict(&test_features)?;
    let target = DMatrix::from_row_slice(1, t.test, &te.target);
    let thresholded = pred.map(|v| if v >= 0.5 { 1.0 } else { 0.0 });
    let accuracy = timer_accuracy(pred.as_slice(), target.as_slice());
    let report = MetricReport {
        nrmse: nrmse(&pred, &target, t.test).unwrap_or_default(),
        horizon: t.test,
        accuracy: Some(accuracy),
        valid_time: None,
        one_step_nrmse: None,
    };
    let bench = bench_rows(m, &x_train, steps)?;
    Ok(RunOutput {
        manifest: m.clone(),
        report,
        trajectory: Trajectory {
            steps: (0..t.test).collect(),
            pred,
            target,
            thresholded: Some(thresholded),
        },
        weights,
        feature_columns: cfg.feature_len(),
        bench,
    })
}

fn normalized(
    raw: &DMatrix<f64>,
    mode: Normalize,
    range: std::ops::Range<usize>,
) -> Result<SeriesBundle> {
    match mode {
        Normalize::Standardize => standardize(raw, range),
        Normalize::Raw => Ok(SeriesBundle::identity(raw.clone())),
    }
}

fn run_narma(m: &RunManifest, exec: Execution) -> Result<RunOutput> {
    let t = &m.task;
    let cfg = m.feature;
    let f = featurizer(m)?;
    let total = t.flush + t.train + t.test + 1;
    let series = generate_series(t, total)?;
    let x_raw = series.data.rows(0, 1).into_owned();
    let y = series.data.rows(1, 1).into_owned();
    let x = normalized(&x_raw, t.normalize, t.flush..t.flush + t.train)?.standardized;

    let train_steps = t.flush..t.flush + t.train;
    let mtx = build_feature_matrix(&x, train_steps.clone(), &f, m.seed, exec)?;
    let y_train = y.columns(t.flush + 1, t.train).into_owned();
    let weights = train(&mtx, &y_train, cfg.ridge, m.solver)?;

    let test_start = t.flush + t.train;
    let test_features =
        build_feature_matrix(&x, test_start..test_start + t.test, &f, m.seed, exec)?;
    let pred = weights.predict(&test_features)?;
    let target = y.columns(test_start + 1, t.test).into_owned();
    let report = MetricReport {
        nrmse: nrmse(&pred, &target, t.test)?,
        horizon: t.test,
        accuracy: None,
        valid_time: valid_time(&pred, &target, t.test, m.valid_threshold)?,
        one_step_nrmse: None,
    };
    let bench = bench_rows(m, &x, train_steps)?;
    Ok(RunOutput {
        manifest: m.clone(),
        report,
        trajectory: Trajectory {
            steps: (test_start + 1..test_start + 1 + t.test).collect(),
            pred,
            target,
            thresholded: None,
        },
        weights,
        feature_columns: cfg.feature_len(),
        bench,
    })
}

/// Trained model of an autonomous task, before evaluation.
struct AutonomousFit {
    x: DMatrix<f64>,
    weights: ReadoutWeights,
    featurizer: Featurizer,
    /// Last training step; the forecast starts at `k0 + 1`.
    k0: usize,
}

fn fit_autonomous(m: &RunManifest, exec: Execution) -> Result<AutonomousFit> {
    let t = &m.task;
    let cfg = m.feature;
    let f = featurizer(m)?;
    let total = t.flush + t.train + t.test;
    let raw = generate_series(t, total)?.data;
    let x = normalized(&raw, t.normalize, t.flush..t.flush + t.train + 1)?.standardized;
    let train_steps = t.flush..t.flush + t.train;
    let mtx = build_feature_matrix(&x, train_steps.clone(), &f, m.seed, exec)?;
    let targets = next_step_targets(&x, train_steps, cfg.target)?;
    let weights = train(&mtx, &targets, cfg.ridge, m.solver)?;
    Ok(AutonomousFit {
        x,
        weights,
        featurizer: f,
        k0: t.flush + t.train - 1,
    })
}

impl AutonomousFit {
    fn target(&self, horizon: usize) -> DMatrix<f64> {
        self.x.columns(self.k0 + 1, horizon).into_owned()
    }

    fn one_step_nrmse(&self, horizon: usize, seed: u64, exec: Execution) -> Result<Vec<f64>> {
        let steps = self.k0..self.k0 + horizon;
        let pred = one_step_forecast(&self.x, &self.weights, &self.featurizer, steps, seed, exec)?;
        nrmse(&pred, &self.target(horizon), horizon)
    }
}

/// Teacher-forced one-step NRMSE of an autonomous task over its test
/// horizon. Unlike [`run`], this never iterates the model on itself, so
/// it stays finite when the closed loop diverges.
pub fn one_step_nrmse(m: &RunManifest, exec: Execution) -> Result<Vec<f64>> {
    if !m.task.kind.is_autonomous() {
        return Err(Error::InvalidConfig(format!(
            "{} is not an autonomous task",
            m.task_name()
        )));
    }
    fit_autonomous(m, exec)?.one_step_nrmse(m.task.test, m.seed, exec)
}

fn run_autonomous(m: &RunManifest, exec: Execution) -> Result<RunOutput> {
    let t = &m.task;
    let fit = fit_autonomous(m, exec)?;
    let (k0, hist) = (fit.k0, m.feature.history_len());
    let seed_history = fit.x.columns(k0 + 1 - hist, hist).into_owned();
    let target = fit.target(t.test);
    let one_step = fit.one_step_nrmse(t.test, m.seed, exec)?;
    let pred = forecast_closed_loop(
        &fit.weights,
        &fit.featurizer,
        &seed_history,
        t.test,
        k0,
        m.seed,
    )?;
    let report = MetricReport {
        nrmse: nrmse(&pred, &target, t.test)?,
        horizon: t.test,
        accuracy: None,
        valid_time: valid_time(&pred, &target, t.test, m.valid_threshold)?,
        one_step_nrmse: Some(one_step),
    };
    let bench = bench_rows(m, &fit.x, t.flush..t.flush + t.train)?;
    Ok(RunOutput {
        manifest: m.clone(),
        report,
        trajectory: Trajectory {
            steps: (k0 + 1..k0 + 1 + t.test).collect(),
            pred,
            target,
            thresholded: None,
        },
        weights: fit.weights,
        feature_columns: m.feature.feature_len(),
        bench,
    })
}

/// Predicts `x[k + 1]` from the true window at each `k` in `steps`.
fn one_step_forecast(
    x: &DMatrix<f64>,
    weights: &ReadoutWeights,
    f: &Featurizer,
    steps: std::ops::Range<usize>,
    seed: u64,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    let feats = build_feature_matrix(x, steps.clone(), f, seed, exec)?;
    let mut pred = weights.predict(&feats)?;
    if f.config().target == TargetMode::Delta {
        pred += x.columns(steps.start, steps.len());
    }
    Ok(pred)
}

/// Compiles each training window onto the two-branch bench (photonic
/// backend only, `d*u <= 8`).
fn bench_rows(
    m: &RunManifest,
    series: &DMatrix<f64>,
    steps: std::ops::Range<usize>,
) -> Result<Option<Vec<BenchRow>>> {
    if !matches!(m.measurement, MeasurementModel::Photonic { .. }) || m.feature.linear_len() > 8 {
        return Ok(None);
    }
    let cfg: &FeatureConfig = &m.feature;
    let mut rows = Vec::new();
    for k in steps {
        let mut amps: Vec<C64> = delay_window(series, k, cfg)
            .into_iter()
            .map(|v| C64::new(v, 0.0))
            .collect();
        amps.resize(8, C64::new(0.0, 0.0));
        let empty = |branch| BenchRow {
            state: k,
            branch,
            status: "empty",
            theta_ua: None,
            theta_ub: None,
            source_theta: None,
            pump_theta: None,
            phase: None,
        };
        // branch-wise compilation so one inadmissible branch does not hide the other
        let weights: Vec<f64> = (0..2)
            .map(|b| amps[4 * b..4 * b + 4].iter().map(|z| z.norm_sqr()).sum())
            .collect();
        if weights.iter().sum::<f64>() == 0.0 {
            rows.push(empty(0));
            rows.push(empty(1));
            continue;
        }
        let split = crate::photonics::PumpSplit::for_weights(weights[0], weights[1], 1.0);
        for b in 0..2 {
            if weights[b] == 0.0 {
                rows.push(empty(b));
                continue;
            }
            let mut single = vec![C64::new(0.0, 0.0); 8];
            single[..4].copy_from_slice(&amps[4 * b..4 * b + 4]);
            match compile_path_state(&single, 1.0) {
                Ok(c) => {
                    let s = c.benches[0].expect("populated branch");
                    rows.push(BenchRow {
                        state: k,
                        branch: b,
                        status: "ok",
                        theta_ua: Some(s.theta_ua),
                        theta_ub: Some(s.theta_ub),
                        source_theta: Some(s.source_theta),
                        pump_theta: Some(split.theta),
                        phase: Some(s.phase),
                    });
                }
                Err(Error::SingularDecomposition(_)) => rows.push(BenchRow {
                    status: "singular",
                    pump_theta: Some(split.theta),
                    ..empty(b)
                }),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Some(rows))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunOutput {
    /// Metrics document. Output locations are left out so results compare
    /// across directories.
    pub fn metrics_json(&self) -> Value {
        let config: Map<String, Value> = self
            .manifest
            .to_pairs()
            .into_iter()
            .filter(|(k, _)| !k.starts_with("output."))
            .map(|(k, v)| (k, Value::String(v)))
            .collect();
        json!({
            "task": self.manifest.task_name(),
            "config": config,
            "seed": self.manifest.seed,
            "nrmse": self.report.nrmse,
            "nrmse_definition": NRMSE_DEFINITION,
            "accuracy": self.report.accuracy,
            "horizon": self.report.horizon,
            "valid_time": self.report.valid_time,
            "one_step_nrmse": self.report.one_step_nrmse,
            "valid_threshold": self.manifest.valid_threshold,
            "feature_columns": self.feature_columns,
            "measurement": self.manifest.measurement.name(),
        })
    }

    /// Metrics document as pretty-printed JSON with a trailing newline.
    pub fn metrics_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.metrics_json()).expect("metrics serialize");
        s.push('\n');
        s
    }

    /// `step, pred_i..., target_i...` (plus thresholded columns for binary
    /// tasks), in the units the model was trained in.
    pub fn trajectory_csv(&self) -> String {
        let tr = &self.trajectory;
        let d = tr.pred.nrows();
        let mut out = String::from("step");
        for i in 1..=d {
            let _ = write!(out, ",pred_{i}");
        }
        if tr.thresholded.is_some() {
            for i in 1..=d {
                let _ = write!(out, ",thresholded_{i}");
            }
        }
        for i in 1..=d {
            let _ = write!(out, ",target_{i}");
        }
        out.push('\n');
        for (j, step) in tr.steps.iter().enumerate() {
            let _ = write!(out, "{step}");
            for i in 0..d {
                let _ = write!(out, ",{}", tr.pred[(i, j)]);
            }
            if let Some(th) = &tr.thresholded {
                for i in 0..d {
                    let _ = write!(out, ",{}", th[(i, j)]);
                }
            }
            for i in 0..d {
                let _ = write!(out, ",{}", tr.target[(i, j)]);
            }
            out.push('\n');
        }
        out
    }

    /// Bench settings as CSV, if any.
    pub fn bench_csv(&self) -> Option<String> {
        let rows = self.bench.as_ref()?;
        let mut out =
            String::from("state,branch,status,theta_ua,theta_ub,source_theta,pump_theta,phase\n");
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.state,
                r.branch,
                r.status,
                fmt_opt(r.theta_ua),
                fmt_opt(r.theta_ub),
                fmt_opt(r.source_theta),
                fmt_opt(r.pump_theta),
                fmt_opt(r.phase)
            );
        }
        Some(out)
    }
}

/// Series as CSV with a `step` column.
pub fn series_csv(series: &Series) -> String {
    let mut out = String::from("step");
    for n in &series.names {
        let _ = write!(out, ",{n}");
    }
    out.push('\n');
    for k in 0..series.data.ncols() {
        let _ = write!(out, "{k}");
        for i in 0..series.data.nrows() {
            let _ = write!(out, ",{}", series.data[(i, k)]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timer_recipe_is_exact() {
        let m = RunManifest::recipe("timer").unwrap();
        let out = run(&m, Execution::Sequential).unwrap();
        assert_eq!(out.report.accuracy, Some(1.0));
        assert_eq!(out.trajectory.steps.len(), 10);
    }

    #[test]
    fn timer_series_csv_shape() {
        let m = RunManifest::recipe("timer").unwrap();
        let s = generate_series(&m.task, 10).unwrap();
        let csv = series_csv(&s);
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.starts_with("step,x1,y1\n"));
    }

    #[test]
    fn photonic_run_reports_bench_settings() {
        let m = RunManifest::recipe("timer")
            .unwrap()
            .with_overrides(&[
                ("measurement.mode".into(), "photonic".into()),
                ("measurement.rate".into(), "1e8".into()),
            ])
            .unwrap();
        let out = run(&m, Execution::Parallel).unwrap();
        let csv = out.bench_csv().unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * m.task.train);
    }
}
