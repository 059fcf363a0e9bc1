//! Neighbor counts and weights for the rate-optimal weighted K-NN rules.
//!
//! With effective sample size `N = n_Q + Σ n_Pi^((2β+d)/(2γ_iβ+d))`:
//!
//! * `w_Q = N^(-β/(2β+d))`, `w_Pi = N^(-γ_iβ/(2β+d))`
//! * `k_Q = ⌊n_Q N^(-d/(2β+d))⌋`, `k_Pi = ⌊n_Pi N^(-d/(2β+d))⌋`
//!
//! A nonempty sample always contributes at least one neighbor: the floor can
//! otherwise discard a whole sample at small sizes.

use crate::data::{HyperParams, KnnPlan, MultiKnnPlan};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn floor_count<T: Scalar>(n: usize, scale: T) -> usize {
    let k = (T::of_usize(n) * scale)
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(n);
    k.max(n.min(1))
}

/// Effective sample size `n_Q + Σ n_Pi^((2β+d)/(2γ_iβ+d))`.
pub fn effective_sample_size<T: Scalar>(
    source_sizes: &[usize],
    n_q: usize,
    hp: &HyperParams<T>,
) -> T {
    source_sizes
        .iter()
        .enumerate()
        .fold(T::of_usize(n_q), |acc, (i, &n)| {
            acc + T::of_usize(n).powf(hp.transfer_exponent(i))
        })
}

/// Single-source plan.
pub fn theorem1_plan<T: Scalar>(n_p: usize, n_q: usize, hp: &HyperParams<T>) -> Result<KnnPlan<T>> {
    hp.validate()?;
    if n_p == 0 && n_q == 0 {
        return Err(Error::EmptyDataset);
    }
    let plan = multisource_plan(
        &[n_p],
        n_q,
        &HyperParams {
            gamma: vec![hp.gamma()],
            ..hp.clone()
        },
    )?;
    Ok(KnnPlan {
        k_p: plan.k_sources[0],
        k_q: plan.k_q,
        w_p: plan.w_sources[0],
        w_q: plan.w_q,
    })
}

/// Multi-source plan; `hp.gamma` must hold one exponent per source.
pub fn multisource_plan<T: Scalar>(
    source_sizes: &[usize],
    n_q: usize,
    hp: &HyperParams<T>,
) -> Result<MultiKnnPlan<T>> {
    hp.validate()?;
    if source_sizes.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one source is required".into(),
        ));
    }
    if hp.gamma.len() != source_sizes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} gamma values for {} sources",
            hp.gamma.len(),
            source_sizes.len()
        )));
    }
    if n_q == 0 && source_sizes.iter().all(|&n| n == 0) {
        return Err(Error::EmptyDataset);
    }
    let big_n = effective_sample_size(source_sizes, n_q, hp);
    let denom = T::of(2.0) * hp.beta + T::of_usize(hp.d);
    let scale = big_n.powf(-T::of_usize(hp.d) / denom);
    let w_q = big_n.powf(-hp.beta / denom);
    let w_sources = hp
        .gamma
        .iter()
        .map(|&g| big_n.powf(-g * hp.beta / denom))
        .collect();
    let k_sources = source_sizes
        .iter()
        .map(|&n| floor_count(n, scale))
        .collect();
    Ok(MultiKnnPlan {
        k_sources,
        w_sources,
        k_q: floor_count(n_q, scale),
        w_q,
    })
}

/// `⌊n^(2β/(2β+d))⌋`, at least 1 for nonempty samples: the conventional K-NN
/// neighborhood size used by the single-sample baselines.
pub fn conventional_k<T: Scalar>(n: usize, beta: T, d: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let two_beta = T::of(2.0) * beta;
    let k = T::of_usize(n)
        .powf(two_beta / (two_beta + T::of_usize(d)))
        .floor()
        .to_usize()
        .unwrap_or(1);
    k.clamp(1, n)
}
