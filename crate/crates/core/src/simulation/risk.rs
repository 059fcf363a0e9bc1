use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::bayes_classify;
use crate::data::Label;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

use super::model::DriftModel;

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    /// Sample mean and `s/√n` with the unbiased variance.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, n }
    }

    /// Standard error of the difference of two independent means.
    pub fn pooled_se(&self, other: &Self) -> f64 {
        (self.std_error * self.std_error + other.std_error * other.std_error).sqrt()
    }
}

/// Ground truth used to score a prediction at a test point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyTruth {
    /// The Bayes label `1{η_Q(x) > 1/2}`.
    #[default]
    Bayes,
    /// A fresh label `Y ~ Bernoulli(η_Q(x))`.
    Noisy,
}

/// Fraction of `points` where `predict` agrees with the Bayes label.
pub fn classification_accuracy(
    mut predict: impl FnMut(&[f64]) -> Result<Label>,
    model: &DriftModel,
    points: &[Vec<f64>],
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no test points".into()));
    }
    let mut hits = 0usize;
    for x in points {
        if predict(x)? == bayes_classify(model, x) {
            hits += 1;
        }
    }
    Ok(hits as f64 / points.len() as f64)
}

/// Monte-Carlo estimate of `E_Q = 2 E[|η_Q(X) - 1/2| · 1{f(X) ≠ f*(X)}]`
/// with `X` uniform on `[0,1]^d`.
///
/// Points with zero weight cannot contribute, so `predict` is only evaluated
/// where `η_Q(X) ≠ 1/2`.
pub fn excess_risk_mc(
    mut predict: impl FnMut(&[f64]) -> Result<Label>,
    model: &DriftModel,
    n_mc: usize,
    source: RandomSource,
) -> Result<McEstimate> {
    if n_mc == 0 {
        return Err(Error::InvalidParameter("n_mc must be positive".into()));
    }
    let mut rng = source.rng();
    let mut x = vec![0.0; model.d];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..n_mc {
        for v in x.iter_mut() {
            *v = rng.random::<f64>();
        }
        let w = model.risk_weight(&x);
        if w > 0.0 && predict(&x)? != bayes_classify(model, &x) {
            sum += w;
            sum_sq += w * w;
        }
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = if n_mc > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n: n_mc,
    })
}
