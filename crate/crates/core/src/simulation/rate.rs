//! Empirical check of the convergence-rate exponent.
//!
//! For each sample size the rate-optimal weighted classifier is trained on a
//! fresh dataset and its excess risk is estimated by Monte Carlo. The slope of
//! `log(mean risk)` against `log(n)` is then compared with the minimax exponent.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{theorem1_plan, weighted_knn_predict};
use crate::data::HyperParams;
use crate::error::{Error, Result};
use crate::neighbors::TransferIndex;
use crate::rng::RandomSource;

use super::model::DriftModel;
use super::risk::{excess_risk_mc, McEstimate};
use super::sampling::sample_dataset;

/// Which sample grows along the sweep; the other one is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateSweep {
    #[default]
    Target,
    Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheckConfig {
    pub sweep: RateSweep,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub n_mc: usize,
    pub p_max: f64,
    /// Link exponent of the generating model.
    pub gamma_sim: f64,
    /// Parameters handed to the plan and used for the target exponent.
    pub hp: HyperParams<f64>,
    pub bootstrap: usize,
    pub seed: u64,
}

impl RateCheckConfig {
    /// Target-only sweep over `n_Q ∈ {500, ..., 16000}` under the standard
    /// simulation model with `p_max = 0.55`.
    pub fn standard(seed: u64) -> Self {
        Self {
            sweep: RateSweep::Target,
            sizes: vec![500, 1000, 2000, 4000, 8000, 16000],
            reps: 400,
            n_mc: 100_000,
            p_max: 0.55,
            gamma_sim: 0.3,
            hp: HyperParams::single(0.0, 1.0, 0.3, 2).expect("valid"),
            bootstrap: 1000,
            seed,
        }
    }

    /// `-β(1+α)/(2β+d)` for target sweeps, `-β(1+α)/(2γβ+d)` for source sweeps.
    pub fn target_slope(&self) -> f64 {
        match self.sweep {
            RateSweep::Target => -self.hp.target_rate_exponent(),
            RateSweep::Source => -self.hp.source_rate_exponent(0),
        }
    }

    fn validate(&self) -> Result<()> {
        self.hp.validate()?;
        if self.sizes.len() < 4 {
            return Err(Error::DegenerateGrid(format!(
                "{} sizes given, at least 4 are needed",
                self.sizes.len()
            )));
        }
        let lo = self.sizes.iter().copied().min().unwrap_or(0);
        let hi = self.sizes.iter().copied().max().unwrap_or(0);
        if lo == 0 || hi < 10 * lo {
            return Err(Error::DegenerateGrid(format!(
                "sizes {lo}..{hi} do not span a decade"
            )));
        }
        if self.reps < 2 {
            return Err(Error::DegenerateGrid(
                "at least 2 replications are needed".into(),
            ));
        }
        if self.n_mc == 0 {
            return Err(Error::InvalidParameter("n_mc must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub risk: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheckReport {
    pub sweep: RateSweep,
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub target_slope: f64,
}

impl RateCheckReport {
    pub fn within(&self, tolerance: f64) -> bool {
        (self.slope - self.target_slope).abs() <= tolerance
    }
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn log_log_slope(sizes: &[usize], means: &[f64]) -> Result<f64> {
    if means.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::DegenerateGrid(
            "a mean excess risk is zero; the log-log fit is undefined".into(),
        ));
    }
    let lx: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    Ok(ols_slope(&lx, &ly))
}

/// Percentile bootstrap interval (2.5%, 97.5%) for the log-log slope,
/// resampling replications independently within each size.
pub fn bootstrap_slope_ci(
    sizes: &[usize],
    values: &[Vec<f64>],
    resamples: usize,
    source: RandomSource,
) -> Result<(f64, f64)> {
    if resamples == 0 {
        return Err(Error::InvalidParameter("bootstrap needs resamples".into()));
    }
    let mut rng = source.rng();
    let mut slopes = Vec::with_capacity(resamples);
    let mut means = vec![0.0; values.len()];
    for _ in 0..resamples {
        for (m, v) in means.iter_mut().zip(values) {
            let s: f64 = (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).sum();
            *m = s / v.len() as f64;
        }
        // Resamples with an all-zero size carry no slope information.
        if let Ok(s) = log_log_slope(sizes, &means) {
            slopes.push(s);
        }
    }
    if slopes.is_empty() {
        return Err(Error::DegenerateGrid(
            "every bootstrap resample was degenerate".into(),
        ));
    }
    slopes.sort_by(f64::total_cmp);
    let q = |p: f64| slopes[((slopes.len() - 1) as f64 * p).round() as usize];
    Ok((q(0.025), q(0.975)))
}

fn replicate_risk(
    cfg: &RateCheckConfig,
    model: &DriftModel,
    n: usize,
    rs: RandomSource,
) -> Result<f64> {
    let (n_p, n_q) = match cfg.sweep {
        RateSweep::Target => (0, n),
        RateSweep::Source => (n, 0),
    };
    let ds = sample_dataset(model, n_p, n_q, rs.fork_named("data"));
    let plan = theorem1_plan(n_p, n_q, &cfg.hp)?;
    let index = TransferIndex::build(&ds);
    let est = excess_risk_mc(
        |x| weighted_knn_predict(&index, &plan, x),
        model,
        cfg.n_mc,
        rs.fork_named("mc"),
    )?;
    Ok(est.mean)
}

/// Runs the sweep and fits the slope.
pub fn rate_exponent_check(cfg: &RateCheckConfig) -> Result<RateCheckReport> {
    cfg.validate()?;
    let model = DriftModel::centered(cfg.p_max, cfg.gamma_sim, cfg.hp.d)?;
    let root = RandomSource::new(cfg.seed).fork_named("rate-check");
    let mut values = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let cell = root.fork(n as u64);
        let risks: Vec<f64> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| replicate_risk(cfg, &model, n, cell.fork(r as u64)))
            .collect::<Result<_>>()?;
        values.push(risks);
    }
    let points: Vec<RatePoint> = cfg
        .sizes
        .iter()
        .zip(&values)
        .map(|(&n, v)| RatePoint {
            n,
            risk: McEstimate::from_values(v),
        })
        .collect();
    let means: Vec<f64> = points.iter().map(|p| p.risk.mean).collect();
    let slope = log_log_slope(&cfg.sizes, &means)?;
    let (ci_low, ci_high) = bootstrap_slope_ci(
        &cfg.sizes,
        &values,
        cfg.bootstrap,
        root.fork_named("bootstrap"),
    )?;
    Ok(RateCheckReport {
        sweep: cfg.sweep,
        points,
        slope,
        ci_low,
        ci_high,
        target_slope: cfg.target_slope(),
    })
}
