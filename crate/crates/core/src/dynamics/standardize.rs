//! Per-component standardization fitted on a training range.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBundle {
    pub raw: DMatrix<f64>,
    pub standardized: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub std: DVector<f64>,
}

impl SeriesBundle {
    /// Maps standardized columns back to raw units.
    pub fn inverse(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = z.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row.apply(|v| *v = *v * self.std[i] + self.mean[i]);
        }
        out
    }

    /// Identity transform (mean 0, std 1), for tasks run on raw data.
    pub fn identity(raw: DMatrix<f64>) -> Self {
        let d = raw.nrows();
        SeriesBundle {
            standardized: raw.clone(),
            raw,
            mean: DVector::zeros(d),
            std: DVector::from_element(d, 1.0),
        }
    }
}

/// `(raw - mean) / std` with population statistics over `train_range`.
pub fn standardize(raw: &DMatrix<f64>, train_range: Range<usize>) -> Result<SeriesBundle> {
    if train_range.is_empty() || train_range.end > raw.ncols() {
        return Err(Error::InsufficientData(format!(
            "normalization range {}..{} does not fit a series of {} samples",
            train_range.start,
            train_range.end,
            raw.ncols()
        )));
    }
    let seg = raw.columns(train_range.start, train_range.len());
    let n = train_range.len() as f64;
    let d = raw.nrows();
    let mut mean = DVector::zeros(d);
    let mut std = DVector::zeros(d);
    for i in 0..d {
        let m = seg.row(i).sum() / n;
        let var = seg.row(i).iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
        let s = var.sqrt();
        if s.is_nan() || s <= 0.0 || !s.is_finite() {
            return Err(Error::DegenerateComponent { component: i });
        }
        mean[i] = m;
        std[i] = s;
    }
    let mut standardized = raw.clone();
    for (i, mut row) in standardized.row_iter_mut().enumerate() {
        row.apply(|v| *v = (*v - mean[i]) / std[i]);
    }
    Ok(SeriesBundle {
        raw: raw.clone(),
        standardized,
        mean,
        std,
    })
}
