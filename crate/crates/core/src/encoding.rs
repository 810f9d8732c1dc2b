//! Delay-embedded state encoding.
//!
//! A window of `u` input vectors spaced `q` steps apart is concatenated
//! (newest first) and normalized into the amplitude vector of a real pure
//! state. The squared norm of the raw window is kept alongside so that
//! measurement outcomes can be rescaled back to raw magnitudes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// How the readout target is derived from the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetMode {
    /// Predict `x_{k+1}`.
    #[default]
    NextState,
    /// Predict `x_{k+1} - x_k`.
    Delta,
}

impl TargetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetMode::NextState => "next-state",
            TargetMode::Delta => "delta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "next-state" | "next" => Some(TargetMode::NextState),
            "delta" => Some(TargetMode::Delta),
            _ => None,
        }
    }
}

/// Embedding and feature hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Input dimension `d`.
    pub dim: usize,
    /// Number of delay taps `u`.
    pub taps: usize,
    /// Tap spacing `q` in steps.
    pub spacing: usize,
    /// Tensor-product order `S` of the nonlinear block (0 disables it).
    pub order: usize,
    pub target: TargetMode,
    pub ridge: f64,
}

impl FeatureConfig {
    pub fn new(dim: usize, taps: usize, spacing: usize, order: usize) -> Result<Self> {
        let cfg = FeatureConfig {
            dim,
            taps,
            spacing,
            order,
            target: TargetMode::NextState,
            ridge: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_target(mut self, target: TargetMode) -> Self {
        self.target = target;
        self
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.taps == 0 {
            return Err(Error::InvalidConfig(format!(
                "d*u must be at least 1 (d = {}, u = {})",
                self.dim, self.taps
            )));
        }
        if self.spacing == 0 {
            return Err(Error::InvalidConfig("tap spacing q must be >= 1".into()));
        }
        if self.ridge.is_nan() || self.ridge < 0.0 || !self.ridge.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ridge must be finite and >= 0, got {}",
                self.ridge
            )));
        }
        Ok(())
    }

    /// `N_s = d * u`.
    pub fn linear_len(&self) -> usize {
        self.dim * self.taps
    }

    /// `N_r = C(d*u + S - 1, S)`, or 0 when `S = 0`.
    pub fn nonlinear_len(&self) -> usize {
        if self.order == 0 {
            0
        } else {
            multiset_count(self.linear_len(), self.order)
        }
    }

    /// Length of an assembled feature vector, constant entry included.
    pub fn feature_len(&self) -> usize {
        1 + self.linear_len() + self.nonlinear_len()
    }

    /// Number of consecutive series samples a window reaches back over.
    pub fn history_len(&self) -> usize {
        1 + (self.taps - 1) * self.spacing
    }

    /// Earliest step whose window lies entirely inside the series.
    pub fn first_valid_step(&self) -> usize {
        (self.taps - 1) * self.spacing
    }
}

/// Number of sorted `order`-multisets over `n` symbols.
pub fn multiset_count(n: usize, order: usize) -> usize {
    binomial(n + order - 1, order)
}

/// Exact binomial coefficient; panics on `usize` overflow.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

/// Normalized amplitudes of the linear feature state plus the squared norm
/// `N` of the raw window they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFeatureState {
    amplitudes: Vec<f64>,
    norm_factor: f64,
}

impl LinearFeatureState {
    /// Encodes a raw concatenated window.
    pub fn from_window(window: &[f64]) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::InvalidConfig("empty window".into()));
        }
        let norm_factor: f64 = window.iter().map(|v| v * v).sum();
        if norm_factor == 0.0 {
            return Err(Error::ZeroWindow);
        }
        let scale = norm_factor.sqrt();
        Ok(LinearFeatureState {
            amplitudes: window.iter().map(|v| v / scale).collect(),
            norm_factor,
        })
    }

    /// Stand-in for an all-zero window: uniform amplitudes with `N = 0`, so
    /// every rescaled feature evaluates to exactly zero.
    pub fn zero_substitute(len: usize) -> Self {
        let a = 1.0 / (len as f64).sqrt();
        LinearFeatureState {
            amplitudes: vec![a; len],
            norm_factor: 0.0,
        }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Computational-basis probabilities `|a_i|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * a).collect()
    }
}

/// Concatenates `x_k, x_{k-q}, ..., x_{k-(u-1)q}` from the columns of `series`.
///
/// Panics if `k` is outside the series or the window reaches before column 0.
pub fn delay_window(series: &DMatrix<f64>, k: usize, cfg: &FeatureConfig) -> Vec<f64> {
    assert!(k < series.ncols(), "step {k} outside series");
    assert!(
        k >= cfg.first_valid_step(),
        "window at step {k} reaches before the series start"
    );
    let mut out = Vec::with_capacity(cfg.linear_len());
    for tap in 0..cfg.taps {
        out.extend(series.column(k - tap * cfg.spacing).iter());
    }
    out
}

/// Builds the linear feature state from a history block whose columns run
/// oldest to newest and whose last column is `x_k`.
pub fn build_linear_state(
    history: &DMatrix<f64>,
    cfg: &FeatureConfig,
) -> Result<LinearFeatureState> {
    cfg.validate()?;
    if history.nrows() != cfg.dim {
        return Err(Error::DimensionMismatch(format!(
            "history has {} rows, config dimension is {}",
            history.nrows(),
            cfg.dim
        )));
    }
    if history.ncols() < cfg.history_len() {
        return Err(Error::InsufficientData(format!(
            "history has {} columns, window needs {}",
            history.ncols(),
            cfg.history_len()
        )));
    }
    let window = delay_window(history, history.ncols() - 1, cfg);
    LinearFeatureState::from_window(&window)
}

/// A sorted multiset of basis indices, one nonlinear projector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultisetIndex(Vec<usize>);

impl MultisetIndex {
    /// Sorts the given indices into canonical order.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultisetIndex(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Number of distinct orderings, `S! / prod(repetition counts!)`.
    pub fn multiplicity(&self) -> u64 {
        let mut result = factorial(self.0.len());
        let mut run = 1usize;
        for w in self.0.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                result /= factorial(run);
                run = 1;
            }
        }
        if !self.0.is_empty() {
            result /= factorial(run);
        }
        result
    }

    /// Product of the selected entries of `values`.
    pub fn product(&self, values: &[f64]) -> f64 {
        self.0.iter().map(|&i| values[i]).product()
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All sorted `order`-multisets over `0..n`, in lexicographic order.
/// Order 0 has the single empty multiset.
pub fn enumerate_multisets(n: usize, order: usize) -> Vec<MultisetIndex> {
    if n == 0 {
        return Vec::new();
    }
    if order == 0 {
        return vec![MultisetIndex(Vec::new())];
    }
    let mut out = Vec::with_capacity(multiset_count(n, order));
    let mut current = vec![0usize; order];
    loop {
        out.push(MultisetIndex(current.clone()));
        // rightmost position that can still be incremented
        let Some(pos) = (0..order).rev().find(|&p| current[p] + 1 < n) else {
            break;
        };
        let next = current[pos] + 1;
        for slot in &mut current[pos..] {
            *slot = next;
        }
    }
    out
}

/// Default upper bound on the number of amplitudes in a materialized tensor power.
pub const DEFAULT_TENSOR_CAP: usize = 1_000_000;

/// Kronecker power `a^{⊗S}` of the state amplitudes.
///
/// Only meant for verification: the size grows as `(d*u)^S`.
pub fn materialize_tensor_state(
    state: &LinearFeatureState,
    order: usize,
    cap: usize,
) -> Result<Vec<f64>> {
    let n = state.len() as u128;
    let len = n.checked_pow(order as u32).unwrap_or(u128::MAX);
    if len > cap as u128 {
        return Err(Error::CapExceeded { len, cap });
    }
    let mut acc = vec![1.0];
    for _ in 0..order {
        let mut next = Vec::with_capacity(acc.len() * state.len());
        for &lhs in &acc {
            next.extend(state.amplitudes().iter().map(|&a| lhs * a));
        }
        acc = next;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn normalizes_two_vector() {
        let history = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let cfg = FeatureConfig::new(2, 1, 1, 0).unwrap();
        let state = build_linear_state(&history, &cfg).unwrap();
        assert!(close(state.amplitudes(), &[0.6, 0.8], 1e-15));
        assert_eq!(state.norm_factor(), 25.0);
    }

    #[test]
    fn basis_window() {
        // columns oldest -> newest: x_{k-2}=0, x_{k-1}=0, x_k=1
        let history = DMatrix::from_column_slice(1, 3, &[0.0, 0.0, 1.0]);
        let cfg = FeatureConfig::new(1, 3, 1, 0).unwrap();
        let state = build_linear_state(&history, &cfg).unwrap();
        assert_eq!(state.amplitudes(), &[1.0, 0.0, 0.0]);
        assert_eq!(state.norm_factor(), 1.0);
    }

    #[test]
    fn window_order_is_newest_first() {
        // d = 3, u = 2: amplitudes proportional to x_k ⊕ x_{k-1}
        let history = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let cfg = FeatureConfig::new(3, 2, 1, 2).unwrap();
        let state = build_linear_state(&history, &cfg).unwrap();
        let scale = state.norm_factor().sqrt();
        let raw: Vec<f64> = state.amplitudes().iter().map(|a| a * scale).collect();
        assert!(close(&raw, &[4.0, 5.0, 6.0, 1.0, 2.0, 3.0], 1e-12));
    }

    #[test]
    fn spacing_selects_taps() {
        let series = DMatrix::from_row_slice(1, 7, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let cfg = FeatureConfig::new(1, 3, 3, 0).unwrap();
        assert_eq!(delay_window(&series, 6, &cfg), vec![6.0, 3.0, 0.0]);
        assert_eq!(cfg.history_len(), 7);
    }

    #[test]
    fn zero_window_is_rejected() {
        let history = DMatrix::zeros(2, 3);
        let cfg = FeatureConfig::new(2, 2, 1, 1).unwrap();
        assert_eq!(build_linear_state(&history, &cfg), Err(Error::ZeroWindow));
        let sub = LinearFeatureState::zero_substitute(4);
        assert_eq!(sub.norm_factor(), 0.0);
        assert!((sub.amplitudes().iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn short_history_is_rejected() {
        let history = DMatrix::from_element(1, 2, 1.0);
        let cfg = FeatureConfig::new(1, 2, 2, 0).unwrap();
        assert!(matches!(
            build_linear_state(&history, &cfg),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(FeatureConfig::new(0, 1, 1, 0).is_err());
        assert!(FeatureConfig::new(1, 0, 1, 0).is_err());
        assert!(FeatureConfig::new(1, 1, 0, 0).is_err());
        assert!(FeatureConfig::new(1, 1, 1, 0)
            .unwrap()
            .with_ridge(-1.0)
            .validate()
            .is_err());
        let lorenz = FeatureConfig::new(3, 2, 1, 2).unwrap();
        assert_eq!(lorenz.feature_len(), 28);
        let mg = FeatureConfig::new(1, 8, 1, 5).unwrap();
        assert_eq!(mg.nonlinear_len(), 792);
        let scroll = FeatureConfig::new(3, 2, 1, 3).unwrap();
        assert_eq!(scroll.feature_len(), 63);
        assert_eq!(FeatureConfig::new(1, 8, 1, 4).unwrap().nonlinear_len(), 330);
    }

    #[test]
    fn multisets_small() {
        let sets = enumerate_multisets(3, 2);
        let flat: Vec<Vec<usize>> = sets.iter().map(|m| m.indices().to_vec()).collect();
        assert_eq!(
            flat,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 1],
                vec![1, 2],
                vec![2, 2]
            ]
        );
        assert_eq!(enumerate_multisets(6, 2).len(), 21);
        assert_eq!(enumerate_multisets(8, 4).len(), 330);
        assert_eq!(enumerate_multisets(4, 0), vec![MultisetIndex::new(vec![])]);
    }

    #[test]
    fn multiplicity_counts_orderings() {
        assert_eq!(MultisetIndex::new(vec![0, 0]).multiplicity(), 1);
        assert_eq!(MultisetIndex::new(vec![1, 0]).multiplicity(), 2);
        assert_eq!(MultisetIndex::new(vec![2, 0, 2]).multiplicity(), 3);
        assert_eq!(MultisetIndex::new(vec![0, 1, 2]).multiplicity(), 6);
        assert_eq!(MultisetIndex::new(vec![3, 3, 3, 3]).multiplicity(), 1);
    }

    #[test]
    fn tensor_power_examples() {
        let basis = LinearFeatureState::from_window(&[1.0, 0.0]).unwrap();
        assert_eq!(
            materialize_tensor_state(&basis, 2, 16).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0]
        );

        let s = LinearFeatureState::from_window(&[3.0, 4.0]).unwrap();
        let t = materialize_tensor_state(&s, 2, 16).unwrap();
        assert!(close(&t, &[0.36, 0.48, 0.48, 0.64], 1e-15));
        assert_eq!(materialize_tensor_state(&s, 1, 16).unwrap(), s.amplitudes());

        assert!(matches!(
            materialize_tensor_state(&s, 5, 16),
            Err(Error::CapExceeded { len: 32, cap: 16 })
        ));
    }
}
