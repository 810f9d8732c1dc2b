//! Feature matrices, least-squares readout, and forecasting.
//!
//! Features are stored as columns (`features x time`), so the readout is
//! `W = Y mᵀ (m mᵀ + λ I)⁻¹`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::encoding::{delay_window, TargetMode};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::measurement::Featurizer;

/// Linear least-squares method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Cholesky factorization of the regularized Gram matrix.
    #[default]
    Cholesky,
    /// SVD of the feature matrix; minimum-norm solution with Tikhonov
    /// filtering when the ridge is positive.
    Pinv,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Cholesky => "cholesky",
            Solver::Pinv => "pinv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cholesky" => Some(Solver::Cholesky),
            "pinv" | "svd" => Some(Solver::Pinv),
            _ => None,
        }
    }
}

/// Trained readout `W` of shape `outputs x features`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    pub w: DMatrix<f64>,
}

impl ReadoutWeights {
    pub fn outputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn features(&self) -> usize {
        self.w.ncols()
    }

    /// `W m`, column by column.
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if features.nrows() != self.w.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "features have {} rows, weights expect {}",
                features.nrows(),
                self.w.ncols()
            )));
        }
        Ok(&self.w * features)
    }

    fn predict_one(&self, feature: &[f64]) -> DVector<f64> {
        &self.w * DVector::from_column_slice(feature)
    }
}

/// One feature column per step in `steps`. Column `j` uses the window ending
/// at step `steps.start + j` and draws from random stream `steps.start + j`.
pub fn build_feature_matrix(
    series: &DMatrix<f64>,
    steps: Range<usize>,
    featurizer: &Featurizer,
    seed: u64,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    let cfg = featurizer.config();
    if series.nrows() != cfg.dim {
        return Err(Error::DimensionMismatch(format!(
            "series has {} components, configuration dimension is {}",
            series.nrows(),
            cfg.dim
        )));
    }
    if steps.is_empty() {
        return Err(Error::InsufficientData("no training steps".into()));
    }
    if steps.start < cfg.first_valid_step() || steps.end > series.ncols() {
        return Err(Error::InsufficientData(format!(
            "steps {}..{} need the series to span {}..{}, it has {} samples",
            steps.start,
            steps.end,
            steps.start.saturating_sub(cfg.first_valid_step()),
            steps.end,
            series.ncols()
        )));
    }
    let start = steps.start;
    let cols = map_indexed(exec, 0..steps.len(), |j| {
        let k = start + j;
        let mut rng = stream_rng(seed, k as u64);
        featurizer.features(&delay_window(series, k, cfg), &mut rng)
    });
    let mut m = DMatrix::zeros(cfg.feature_len(), steps.len());
    for (j, col) in cols.into_iter().enumerate() {
        m.set_column(j, &DVector::from_vec(col?));
    }
    Ok(m)
}

/// Targets for steps in `steps`: `x_{k+1}` or `x_{k+1} - x_k`.
pub fn next_step_targets(
    series: &DMatrix<f64>,
    steps: Range<usize>,
    mode: TargetMode,
) -> Result<DMatrix<f64>> {
    if steps.end >= series.ncols() {
        return Err(Error::InsufficientData(format!(
            "target for step {} needs {} samples, series has {}",
            steps.end - 1,
            steps.end + 1,
            series.ncols()
        )));
    }
    let mut y = series.columns(steps.start + 1, steps.len()).into_owned();
    if mode == TargetMode::Delta {
        y -= series.columns(steps.start, steps.len());
    }
    Ok(y)
}

/// Solves for `W` in `targets ≈ W m`.
pub fn train(
    m: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    ridge: f64,
    solver: Solver,
) -> Result<ReadoutWeights> {
    if m.ncols() == 0 {
        return Err(Error::InsufficientData(
            "feature matrix has no columns".into(),
        ));
    }
    if targets.ncols() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} target columns for {} feature columns",
            targets.ncols(),
            m.ncols()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge must be finite and >= 0, got {ridge}"
        )));
    }
    let w = match solver {
        Solver::Cholesky => solve_cholesky(m, targets, ridge)?,
        Solver::Pinv => solve_svd(m, targets, ridge),
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularGram {
            condition: f64::INFINITY,
        });
    }
    Ok(ReadoutWeights { w })
}

fn condition_estimate(gram: &DMatrix<f64>) -> f64 {
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve_cholesky(m: &DMatrix<f64>, targets: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let mut gram = m * m.transpose();
    for i in 0..gram.nrows() {
        gram[(i, i)] += ridge;
    }
    if ridge == 0.0 {
        let cond = condition_estimate(&gram);
        if cond > 1.0 / f64::EPSILON {
            return Err(Error::SingularGram { condition: cond });
        }
    }
    let rhs = m * targets.transpose();
    let chol = gram.clone().cholesky().ok_or_else(|| Error::SingularGram {
        condition: condition_estimate(&gram),
    })?;
    Ok(chol.solve(&rhs).transpose())
}

fn solve_svd(m: &DMatrix<f64>, targets: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    // mᵀ = U Σ Vᵀ, so Wᵀ = V diag(σ / (σ² + λ)) Uᵀ Yᵀ
    let svd = m.transpose().svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = f64::EPSILON * (m.nrows().max(m.ncols()) as f64) * smax;
    let filter = svd.singular_values.map(|s| {
        if ridge > 0.0 {
            s / (s * s + ridge)
        } else if s > cutoff {
            1.0 / s
        } else {
            0.0
        }
    });
    let mut uty = u.transpose() * targets.transpose();
    for (i, f) in filter.iter().enumerate() {
        uty.row_mut(i).scale_mut(*f);
    }
    (vt.transpose() * uty).transpose()
}

/// Autoregressive forecast of `steps` samples.
///
/// `seed_history` holds at least one full delay window of ground truth,
/// oldest column first; its last column is `x_{k0}`. Forecast step `t`
/// draws from random stream `k0 + t`, so the first output equals the
/// open-loop prediction at `k0`.
pub fn forecast_closed_loop(
    weights: &ReadoutWeights,
    featurizer: &Featurizer,
    seed_history: &DMatrix<f64>,
    steps: usize,
    k0: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let cfg = featurizer.config();
    let d = cfg.dim;
    if seed_history.nrows() != d || weights.outputs() != d {
        return Err(Error::DimensionMismatch(format!(
            "closed loop needs {d}-dimensional history and outputs, got {} and {}",
            seed_history.nrows(),
            weights.outputs()
        )));
    }
    if weights.features() != cfg.feature_len() {
        return Err(Error::DimensionMismatch(format!(
            "weights expect {} features, configuration produces {}",
            weights.features(),
            cfg.feature_len()
        )));
    }
    let hist = cfg.history_len();
    if seed_history.ncols() < hist {
        return Err(Error::InsufficientData(format!(
            "seed history has {} samples, delay window needs {hist}",
            seed_history.ncols()
        )));
    }
    let mut buf = seed_history
        .columns(seed_history.ncols() - hist, hist)
        .into_owned();
    let mut out = DMatrix::zeros(d, steps);
    for t in 0..steps {
        let mut rng = stream_rng(seed, (k0 + t) as u64);
        let window = delay_window(&buf, hist - 1, cfg);
        let y = weights.predict_one(&featurizer.features(&window, &mut rng)?);
        let next = match cfg.target {
            TargetMode::NextState => y,
            TargetMode::Delta => y + buf.column(hist - 1),
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: t });
        }
        out.set_column(t, &next);
        if hist > 1 {
            for c in 0..hist - 1 {
                let src = buf.column(c + 1).into_owned();
                buf.set_column(c, &src);
            }
        }
        buf.set_column(hist - 1, &next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::FeatureConfig;
    use crate::measurement::{MeasurementModel, SignMode};
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, 0);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn constant_fit() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let y = DMatrix::from_row_slice(1, 2, &[2.0, 2.0]);
        for solver in [Solver::Cholesky, Solver::Pinv] {
            let w = train(&m, &y, 0.0, solver).unwrap();
            assert!((w.w[(0, 0)] - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn consistent_system_is_recovered() {
        let m = random_matrix(8, 100, 1);
        let a = random_matrix(3, 8, 2);
        let y = &a * &m;
        for solver in [Solver::Cholesky, Solver::Pinv] {
            let w = train(&m, &y, 0.0, solver).unwrap();
            assert!((w.w - &a).amax() < 1e-9);
        }
    }

    #[test]
    fn singular_gram_without_ridge() {
        let mut m = random_matrix(4, 50, 3);
        let r0 = m.row(0).into_owned();
        m.set_row(3, &r0);
        let y = random_matrix(1, 50, 4);
        assert!(matches!(
            train(&m, &y, 0.0, Solver::Cholesky),
            Err(Error::SingularGram { .. })
        ));
        assert!(train(&m, &y, 1e-6, Solver::Cholesky).is_ok());
        assert!(train(&m, &y, 0.0, Solver::Pinv).is_ok());
    }

    #[test]
    fn svd_and_cholesky_agree_with_ridge() {
        let m = random_matrix(6, 40, 5);
        let y = random_matrix(2, 40, 6);
        let a = train(&m, &y, 1e-3, Solver::Cholesky).unwrap();
        let b = train(&m, &y, 1e-3, Solver::Pinv).unwrap();
        assert!((a.w - b.w).amax() < 1e-10);
    }

    #[test]
    fn predict_checks_dimensions() {
        let w = ReadoutWeights {
            w: DMatrix::zeros(1, 3),
        };
        assert!(matches!(
            w.predict(&DMatrix::zeros(2, 4)),
            Err(Error::DimensionMismatch(_))
        ));
        assert_eq!(
            w.predict(&DMatrix::from_element(3, 4, 1.5)).unwrap(),
            DMatrix::zeros(1, 4)
        );
    }

    #[test]
    fn single_sample_feature_matrix() {
        let f = Featurizer::new(
            FeatureConfig::new(1, 1, 1, 0).unwrap(),
            MeasurementModel::IdealSigned,
        )
        .unwrap();
        let series = DMatrix::from_row_slice(1, 1, &[5.0]);
        let m = build_feature_matrix(&series, 0..1, &f, 0, Execution::Sequential).unwrap();
        assert_eq!(m.column(0).as_slice(), &[1.0, 5.0]);
    }

    #[test]
    fn feature_matrix_requires_filled_taps() {
        let f = Featurizer::new(
            FeatureConfig::new(1, 3, 2, 0).unwrap(),
            MeasurementModel::IdealSigned,
        )
        .unwrap();
        let series = DMatrix::from_fn(1, 20, |_, j| j as f64);
        assert!(matches!(
            build_feature_matrix(&series, 3..10, &f, 0, Execution::Sequential),
            Err(Error::InsufficientData(_))
        ));
        assert!(build_feature_matrix(&series, 4..10, &f, 0, Execution::Sequential).is_ok());
    }

    #[test]
    fn stochastic_matrix_is_execution_independent() {
        let f = Featurizer::new(
            FeatureConfig::new(2, 2, 1, 2).unwrap(),
            MeasurementModel::Shots {
                shots: 500,
                signs: SignMode::Restore,
            },
        )
        .unwrap();
        let series = random_matrix(2, 60, 9);
        let a = build_feature_matrix(&series, 1..59, &f, 42, Execution::Sequential).unwrap();
        let b = build_feature_matrix(&series, 1..59, &f, 42, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_system_closed_loop_is_exact() {
        // x_{k+1} = A x_k for a rotation A
        let (s, c) = 0.1f64.sin_cos();
        let a = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let mut series = DMatrix::zeros(2, 300);
        series.set_column(0, &DVector::from_vec(vec![1.0, 0.0]));
        for k in 1..300 {
            let next = &a * series.column(k - 1);
            series.set_column(k, &next);
        }
        let f = Featurizer::new(
            FeatureConfig::new(2, 1, 1, 0).unwrap(),
            MeasurementModel::IdealSigned,
        )
        .unwrap();
        let m = build_feature_matrix(&series, 0..100, &f, 0, Execution::Parallel).unwrap();
        let y = next_step_targets(&series, 0..100, TargetMode::NextState).unwrap();
        let w = train(&m, &y, 0.0, Solver::Cholesky).unwrap();
        let hist = series.columns(99, 1).into_owned();
        let fc = forecast_closed_loop(&w, &f, &hist, 200, 99, 0).unwrap();
        let truth = series.columns(100, 200);
        assert!((fc - truth).amax() < 1e-6);
    }

    #[test]
    fn delta_targets() {
        let series = DMatrix::from_row_slice(1, 4, &[1.0, 3.0, 6.0, 10.0]);
        let y = next_step_targets(&series, 0..3, TargetMode::Delta).unwrap();
        assert_eq!(y.as_slice(), &[2.0, 3.0, 4.0]);
        assert!(next_step_targets(&series, 0..4, TargetMode::NextState).is_err());
    }
}
