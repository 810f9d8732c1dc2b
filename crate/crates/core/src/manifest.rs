//! Run manifests: flat `key = value` files with dotted keys.
//!
//! A manifest names a task; every other key defaults to the canned recipe
//! for that task. [`RunManifest::to_text`] writes every key, so the echo of
//! a run fully determines it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::encoding::{FeatureConfig, TargetMode};
use crate::error::{Error, Result};
use crate::measurement::{MeasurementModel, SignMode};
use crate::readout::Solver;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "QNGRC_OUT_DIR";

/// Benchmark task family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Timer,
    Narma,
    Lorenz63,
    MackeyGlass,
    DoubleScroll,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Timer => "timer",
            TaskKind::Narma => "narma",
            TaskKind::Lorenz63 => "lorenz63",
            TaskKind::MackeyGlass => "mackey-glass",
            TaskKind::DoubleScroll => "double-scroll",
        }
    }

    /// Parses a task name; `narmaN` also yields the order `N`.
    pub fn parse(s: &str) -> Option<(Self, Option<usize>)> {
        match s {
            "timer" => Some((TaskKind::Timer, None)),
            "narma" => Some((TaskKind::Narma, None)),
            "lorenz63" | "lorenz" => Some((TaskKind::Lorenz63, None)),
            "mackey-glass" | "mg" => Some((TaskKind::MackeyGlass, None)),
            "double-scroll" | "dsec" => Some((TaskKind::DoubleScroll, None)),
            _ => {
                let n: usize = s.strip_prefix("narma")?.parse().ok()?;
                Some((TaskKind::Narma, Some(n)))
            }
        }
    }

    /// Series dimension.
    pub fn dim(self) -> usize {
        match self {
            TaskKind::Lorenz63 | TaskKind::DoubleScroll => 3,
            _ => 1,
        }
    }

    /// Whether the task is forecast autoregressively.
    pub fn is_autonomous(self) -> bool {
        matches!(
            self,
            TaskKind::Lorenz63 | TaskKind::MackeyGlass | TaskKind::DoubleScroll
        )
    }
}

/// How the series is scaled before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalize {
    /// Zero mean and unit variance on the training segment.
    Standardize,
    Raw,
}

impl Normalize {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalize::Standardize => "standardize",
            Normalize::Raw => "raw",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standardize" => Some(Normalize::Standardize),
            "raw" => Some(Normalize::Raw),
            _ => None,
        }
    }
}

/// Task parameters. Lengths are in emitted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Samples generated and discarded before the series starts.
    pub transient: usize,
    /// Samples reserved for filling delay taps before training.
    pub flush: usize,
    pub train: usize,
    /// Evaluation horizon.
    pub test: usize,
    pub dt: f64,
    pub sample_every: usize,
    pub init: Vec<f64>,
    pub tau: usize,
    pub k_start: usize,
    pub order: usize,
    pub tau_mg: f64,
    pub normalize: Normalize,
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub task: TaskSpec,
    pub feature: FeatureConfig,
    pub solver: Solver,
    pub measurement: MeasurementModel,
    pub seed: u64,
    pub valid_threshold: f64,
    pub output_dir: String,
    pub output_prefix: String,
}

/// Measurement knobs, kept even when the selected mode ignores them so the
/// echo stays complete.
#[derive(Debug, Clone, Copy)]
struct MeasurementKnobs {
    mode: &'static str,
    shots: u64,
    visibility: f64,
    rate: f64,
    time: f64,
    signs: SignMode,
}

const DEFAULT_KNOBS: MeasurementKnobs = MeasurementKnobs {
    mode: "ideal-signed",
    shots: 100_000,
    visibility: 1.0,
    rate: 1.0e6,
    time: 1.0,
    signs: SignMode::Restore,
};

/// All accepted keys, in echo order.
pub const KEYS: &[&str] = &[
    "version",
    "task.name",
    "task.order",
    "task.transient",
    "task.flush",
    "task.train",
    "task.test",
    "task.dt",
    "task.sample_every",
    "task.init",
    "task.tau",
    "task.k_start",
    "task.tau_mg",
    "task.normalize",
    "feature.u",
    "feature.q",
    "feature.s",
    "feature.target",
    "readout.ridge",
    "readout.solver",
    "measurement.mode",
    "measurement.shots",
    "measurement.visibility",
    "measurement.rate",
    "measurement.time",
    "measurement.signs",
    "metrics.valid_threshold",
    "run.seed",
    "output.dir",
    "output.prefix",
];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// later duplicates win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            ))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Parses a single `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::InvalidConfig(format!("{key} = {value}: expected {what}"))
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| bad(key, v, "a non-negative integer")),
        }
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| bad(key, v, "a non-negative integer")),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(bad(key, v, "a finite number")),
            },
        }
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(key, v, "comma-separated numbers"))
                })
                .collect(),
        }
    }

    fn parsed<T>(
        &self,
        key: &str,
        default: T,
        parse: fn(&str) -> Option<T>,
        what: &str,
    ) -> Result<T> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => parse(v).ok_or_else(|| bad(key, v, what)),
        }
    }
}

/// Per-task defaults.
struct Recipe {
    transient: usize,
    flush: usize,
    train: usize,
    test: usize,
    dt: f64,
    sample_every: usize,
    init: Vec<f64>,
    taps: usize,
    spacing: usize,
    order: usize,
    ridge: f64,
    solver: Solver,
    normalize: Normalize,
}

fn recipe(kind: TaskKind, narma_order: usize, tau: usize, k_start: usize) -> Recipe {
    match kind {
        TaskKind::Timer => Recipe {
            transient: 0,
            flush: 0,
            train: tau + 2,
            test: k_start + tau + 1,
            dt: 1.0,
            sample_every: 1,
            init: vec![],
            taps: tau + 2,
            spacing: 1,
            order: 0,
            ridge: 0.0,
            solver: Solver::Pinv,
            normalize: Normalize::Raw,
        },
        TaskKind::Narma => {
            let long = narma_order >= 20;
            let spacing = if long { 16 } else { 1 };
            Recipe {
                transient: 200,
                flush: 7 * spacing,
                train: if long { 2000 } else { 1000 },
                test: 200,
                dt: 1.0,
                sample_every: 1,
                init: vec![],
                taps: 8,
                spacing,
                order: 4,
                ridge: 0.0,
                solver: Solver::Pinv,
                normalize: Normalize::Standardize,
            }
        }
        TaskKind::Lorenz63 => Recipe {
            transient: 1000,
            flush: 200,
            train: 1000,
            test: 270,
            dt: 0.01,
            sample_every: 1,
            init: vec![1.0, 1.0, 1.0],
            taps: 2,
            spacing: 1,
            order: 2,
            ridge: 1e-6,
            solver: Solver::Cholesky,
            normalize: Normalize::Standardize,
        },
        TaskKind::MackeyGlass => Recipe {
            transient: 1000,
            flush: 200,
            train: 1000,
            test: 300,
            dt: 0.1,
            sample_every: 10,
            init: vec![1.2],
            taps: 8,
            spacing: 6,
            order: 5,
            ridge: 1e-7,
            solver: Solver::Cholesky,
            normalize: Normalize::Raw,
        },
        TaskKind::DoubleScroll => Recipe {
            transient: 1000,
            flush: 200,
            train: 3800,
            test: 135,
            dt: 0.025,
            sample_every: 2,
            init: vec![0.1, 0.0, 0.0],
            taps: 2,
            spacing: 1,
            order: 3,
            ridge: 1e-7,
            solver: Solver::Cholesky,
            normalize: Normalize::Standardize,
        },
    }
}

fn default_out_dir() -> String {
    std::env::var(OUT_DIR_ENV)
        .ok()
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "out".to_string())
}

impl RunManifest {
    /// Builds a manifest from key-value pairs; `task.name` is required.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        let known: BTreeSet<&str> = KEYS.iter().copied().collect();
        if let Some(k) = map.keys().find(|k| !known.contains(k.as_str())) {
            return Err(Error::InvalidConfig(format!("unknown manifest key `{k}`")));
        }
        let r = Reader { map };
        let name = map
            .get("task.name")
            .ok_or_else(|| Error::InvalidConfig("manifest needs task.name".into()))?;
        let (kind, name_order) = TaskKind::parse(name).ok_or_else(|| {
            bad(
                "task.name",
                name,
                "timer, narma<N>, lorenz63, mackey-glass or double-scroll",
            )
        })?;
        let order = r.usize("task.order", name_order.unwrap_or(2))?;
        if kind == TaskKind::Narma {
            if let Some(n) = name_order {
                if r.has("task.order") && order != n {
                    return Err(Error::InvalidConfig(format!(
                        "task.name = {name} conflicts with task.order = {order}"
                    )));
                }
            }
            if order < 2 {
                return Err(bad("task.order", &order.to_string(), "a NARMA order >= 2"));
            }
        }
        let tau = r.usize("task.tau", 6)?;
        let k_start = r.usize("task.k_start", 3)?;
        let d = recipe(kind, order, tau, k_start);

        let taps = r.usize("feature.u", d.taps)?;
        let spacing = r.usize("feature.q", d.spacing)?;
        let s_order = r.usize("feature.s", d.order)?;
        let target = r.parsed(
            "feature.target",
            TargetMode::NextState,
            TargetMode::parse,
            "next-state or delta",
        )?;
        let ridge = r.f64("readout.ridge", d.ridge)?;
        let feature = FeatureConfig::new(kind.dim(), taps, spacing, s_order)?
            .with_target(target)
            .with_ridge(ridge);
        feature.validate()?;

        let flush_default = if kind == TaskKind::Narma {
            feature.first_valid_step()
        } else {
            d.flush
        };
        let task = TaskSpec {
            kind,
            transient: r.usize("task.transient", d.transient)?,
            flush: r.usize("task.flush", flush_default)?,
            train: r.usize("task.train", d.train)?,
            test: r.usize("task.test", d.test)?,
            dt: r.f64("task.dt", d.dt)?,
            sample_every: r.usize("task.sample_every", d.sample_every)?,
            init: r.list("task.init", &d.init)?,
            tau,
            k_start,
            order,
            tau_mg: r.f64("task.tau_mg", 17.0)?,
            normalize: r.parsed(
                "task.normalize",
                d.normalize,
                Normalize::parse,
                "standardize or raw",
            )?,
        };

        let knobs = MeasurementKnobs {
            mode: match map.get("measurement.mode").map(String::as_str) {
                None => DEFAULT_KNOBS.mode,
                Some("ideal-signed") => "ideal-signed",
                Some("ideal-magnitude") => "ideal-magnitude",
                Some("shots") => "shots",
                Some("photonic") => "photonic",
                Some(v) => {
                    return Err(bad(
                        "measurement.mode",
                        v,
                        "ideal-signed, ideal-magnitude, shots or photonic",
                    ))
                }
            },
            shots: r.u64("measurement.shots", DEFAULT_KNOBS.shots)?,
            visibility: r.f64("measurement.visibility", DEFAULT_KNOBS.visibility)?,
            rate: r.f64("measurement.rate", DEFAULT_KNOBS.rate)?,
            time: r.f64("measurement.time", DEFAULT_KNOBS.time)?,
            signs: r.parsed(
                "measurement.signs",
                DEFAULT_KNOBS.signs,
                SignMode::parse,
                "restore or drop",
            )?,
        };
        let measurement = knobs_to_model(&knobs);
        measurement.validate()?;

        let m = RunManifest {
            task,
            feature,
            solver: r.parsed(
                "readout.solver",
                d.solver,
                Solver::parse,
                "cholesky or pinv",
            )?,
            measurement,
            seed: r.u64("run.seed", 0)?,
            valid_threshold: r.f64("metrics.valid_threshold", 0.5)?,
            output_dir: map
                .get("output.dir")
                .cloned()
                .unwrap_or_else(default_out_dir),
            output_prefix: map
                .get("output.prefix")
                .cloned()
                .unwrap_or_else(|| name.clone()),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    /// Canned recipe for a task name.
    pub fn recipe(name: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        map.insert("task.name".to_string(), name.to_string());
        Self::from_pairs(&map)
    }

    /// Applies `key = value` overrides on top of this manifest.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        let mut map = self.to_pairs();
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        Self::from_pairs(&map)
    }

    /// Task name as written in outputs.
    pub fn task_name(&self) -> String {
        match self.task.kind {
            TaskKind::Narma => format!("narma{}", self.task.order),
            k => k.as_str().to_string(),
        }
    }

    fn validate(&self) -> Result<()> {
        let t = &self.task;
        let usage = |msg: String| Err(Error::InvalidConfig(msg));
        if t.kind == TaskKind::Narma || t.kind.is_autonomous() {
            if t.flush < self.feature.first_valid_step() {
                return usage(format!(
                    "task.flush = {} is shorter than the delay window reach {}",
                    t.flush,
                    self.feature.first_valid_step()
                ));
            }
            if t.train == 0 || t.test == 0 {
                return usage("task.train and task.test must be >= 1".into());
            }
        }
        if t.kind.is_autonomous() {
            if t.dt.is_nan() || t.dt <= 0.0 || t.sample_every == 0 {
                return usage("task.dt must be > 0 and task.sample_every >= 1".into());
            }
            if t.init.len() != t.kind.dim() {
                return usage(format!(
                    "task.init needs {} values, got {}",
                    t.kind.dim(),
                    t.init.len()
                ));
            }
        }
        if t.kind == TaskKind::Timer && t.train < t.tau + 1 {
            return usage(format!(
                "timer training needs at least tau + 1 = {} steps",
                t.tau + 1
            ));
        }
        if self.valid_threshold.is_nan() || self.valid_threshold <= 0.0 {
            return usage("metrics.valid_threshold must be > 0".into());
        }
        Ok(())
    }

    fn knobs(&self) -> MeasurementKnobs {
        let mut k = DEFAULT_KNOBS;
        match self.measurement {
            MeasurementModel::IdealSigned => k.mode = "ideal-signed",
            MeasurementModel::IdealMagnitude => k.mode = "ideal-magnitude",
            MeasurementModel::Shots { shots, signs } => {
                k.mode = "shots";
                k.shots = shots;
                k.signs = signs;
            }
            MeasurementModel::Photonic {
                visibility,
                rate,
                time,
                signs,
            } => {
                k.mode = "photonic";
                k.visibility = visibility;
                k.rate = rate;
                k.time = time;
                k.signs = signs;
            }
        }
        k
    }

    /// Every key with its value.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let t = &self.task;
        let f = &self.feature;
        let k = self.knobs();
        let init = t
            .init
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let entries: Vec<(&str, String)> = vec![
            ("version", VERSION.to_string()),
            ("task.name", self.task_name()),
            ("task.order", t.order.to_string()),
            ("task.transient", t.transient.to_string()),
            ("task.flush", t.flush.to_string()),
            ("task.train", t.train.to_string()),
            ("task.test", t.test.to_string()),
            ("task.dt", t.dt.to_string()),
            ("task.sample_every", t.sample_every.to_string()),
            ("task.init", init),
            ("task.tau", t.tau.to_string()),
            ("task.k_start", t.k_start.to_string()),
            ("task.tau_mg", t.tau_mg.to_string()),
            ("task.normalize", t.normalize.as_str().to_string()),
            ("feature.u", f.taps.to_string()),
            ("feature.q", f.spacing.to_string()),
            ("feature.s", f.order.to_string()),
            ("feature.target", f.target.as_str().to_string()),
            ("readout.ridge", f.ridge.to_string()),
            ("readout.solver", self.solver.as_str().to_string()),
            ("measurement.mode", k.mode.to_string()),
            ("measurement.shots", k.shots.to_string()),
            ("measurement.visibility", k.visibility.to_string()),
            ("measurement.rate", k.rate.to_string()),
            ("measurement.time", k.time.to_string()),
            ("measurement.signs", k.signs.as_str().to_string()),
            ("metrics.valid_threshold", self.valid_threshold.to_string()),
            ("run.seed", self.seed.to_string()),
            ("output.dir", self.output_dir.clone()),
            ("output.prefix", self.output_prefix.clone()),
        ];
        let mut map: BTreeMap<String, String> = entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        if t.init.is_empty() {
            map.remove("task.init");
        }
        map
    }

    /// Manifest text with every key, in a fixed order.
    pub fn to_text(&self) -> String {
        let pairs = self.to_pairs();
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = pairs.get(*key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }
}

fn knobs_to_model(k: &MeasurementKnobs) -> MeasurementModel {
    match k.mode {
        "ideal-magnitude" => MeasurementModel::IdealMagnitude,
        "shots" => MeasurementModel::Shots {
            shots: k.shots,
            signs: k.signs,
        },
        "photonic" => MeasurementModel::Photonic {
            visibility: k.visibility,
            rate: k.rate,
            time: k.time,
            signs: k.signs,
        },
        _ => MeasurementModel::IdealSigned,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipes_parse() {
        for name in [
            "timer",
            "narma2",
            "narma5",
            "narma10",
            "narma15",
            "narma20",
            "lorenz63",
            "mackey-glass",
            "double-scroll",
        ] {
            let m = RunManifest::recipe(name).unwrap();
            assert_eq!(m.task_name(), name);
        }
        let l = RunManifest::recipe("lorenz63").unwrap();
        assert_eq!(l.feature.feature_len(), 28);
        let ds = RunManifest::recipe("double-scroll").unwrap();
        assert_eq!(ds.feature.feature_len(), 63);
        let mg = RunManifest::recipe("mackey-glass").unwrap();
        assert_eq!(mg.feature.nonlinear_len(), 792);
        let n20 = RunManifest::recipe("narma20").unwrap();
        assert_eq!((n20.task.train, n20.feature.spacing), (2000, 16));
    }

    #[test]
    fn text_roundtrip() {
        let m = RunManifest::from_text(
            "task.name = lorenz63\n# comment\nmeasurement.mode = shots\nmeasurement.shots = 1000\nrun.seed = 9\noutput.dir = /tmp/x\n",
        )
        .unwrap();
        assert_eq!(
            m.measurement,
            MeasurementModel::Shots {
                shots: 1000,
                signs: SignMode::Restore
            }
        );
        let again = RunManifest::from_text(&m.to_text()).unwrap();
        assert_eq!(m, again);
        assert_eq!(m.to_text(), again.to_text());
    }

    #[test]
    fn timer_defaults_follow_tau() {
        let m = RunManifest::from_text("task.name = timer\ntask.tau = 10\n").unwrap();
        assert_eq!((m.feature.taps, m.task.train, m.task.test), (12, 12, 14));
    }

    #[test]
    fn usage_errors() {
        for text in [
            "task.name = pendulum",
            "task.name = lorenz63\nfeature.u = 0",
            "task.name = lorenz63\nfoo.bar = 1",
            "feature.u = 2",
            "task.name = lorenz63\nmeasurement.mode = magic",
            "task.name = lorenz63\nreadout.ridge = -1",
            "task.name = lorenz63\nmeasurement.mode = shots\nmeasurement.shots = 0",
            "task.name = narma10\ntask.order = 5",
            "task.name = lorenz63\ntask.flush = 0\nfeature.u = 3",
            "task.name = lorenz63\nnot a pair",
        ] {
            let err = RunManifest::from_text(text).unwrap_err();
            assert_eq!(
                err.class(),
                crate::error::ErrorClass::Usage,
                "{text}: {err}"
            );
        }
    }

    #[test]
    fn overrides() {
        let m = RunManifest::recipe("lorenz63").unwrap();
        let m2 = m
            .with_overrides(&[("feature.s".into(), "3".into())])
            .unwrap();
        assert_eq!(m2.feature.feature_len(), 1 + 6 + 56);
        assert!(parse_override("novalue").is_err());
    }
}
