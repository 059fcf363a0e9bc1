//! Data-driven classifiers that grow a pooled neighborhood one point at a
//! time and stop once the signal-to-noise index clears `(d+3)·ln n`.
//!
//! At step `k` the `k` nearest pooled points split into `k_P` source and `k_Q`
//! target points with label means `η̂_P`, `η̂_Q` (1/2 when the count is zero).
//! The index is `k_P(η̂_P-½)² + k_Q(η̂_Q-½)²` when both means sit on the same
//! side of 1/2 and the larger of the two terms otherwise. The rule stops at
//! the first step above the threshold; if none exists it uses the step with
//! the largest index (earliest on ties).
//!
//! Final decisions are made in exact integer/rational arithmetic from label
//! counts so the tie rules (`≥ 0`, `r₊ ≥ r₋`) do not depend on rounding.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::data::Label;
use crate::error::{Error, Origin, Result};
use crate::neighbors::{MergedNeighbor, MultiSourceIndex, TransferIndex};
use crate::scalar::Scalar;

/// Signal-to-noise index of one step.
///
/// A mean exactly at 1/2 contributes zero, so it is treated as agreeing in
/// sign with the other mean.
pub fn snr_index<T: Scalar>(k_p: usize, eta_p: T, k_q: usize, eta_q: T) -> T {
    let half = T::half();
    let dp = eta_p - half;
    let dq = eta_q - half;
    let a = T::of_usize(k_p) * dp * dp;
    let b = T::of_usize(k_q) * dq * dq;
    let disagree = (dp > T::zero() && dq < T::zero()) || (dp < T::zero() && dq > T::zero());
    if disagree {
        a.max(b)
    } else {
        a + b
    }
}

/// Stopping threshold `(d+3)·ln n`.
pub fn stopping_threshold<T: Scalar>(d: usize, n: usize) -> T {
    T::of_usize(d + 3) * T::of_usize(n).ln()
}

fn mean_or_half<T: Scalar>(ones: usize, k: usize) -> T {
    if k == 0 {
        T::half()
    } else {
        T::of_usize(ones) / T::of_usize(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveStep<T> {
    pub k: usize,
    pub k_p: usize,
    pub k_q: usize,
    pub eta_p: T,
    pub eta_q: T,
    pub r: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveTrace<T> {
    pub steps: Vec<AdaptiveStep<T>>,
    pub threshold: T,
    /// First step whose index exceeded the threshold.
    pub stop: Option<usize>,
    /// Step whose intermediate classifier was returned.
    pub chosen: usize,
    pub label: Label,
}

/// `1{√k_P(η̂_P-½) + √k_Q(η̂_Q-½) ≥ 0}` from label counts, exactly.
///
/// With `u = 2·ones_P - k_P` and `v = 2·ones_Q - k_Q` the statistic has the
/// sign of `u/√k_P + v/√k_Q`.
fn intermediate_label(k_p: usize, ones_p: usize, k_q: usize, ones_q: usize) -> Label {
    let u = 2 * ones_p as i128 - k_p as i128;
    let v = 2 * ones_q as i128 - k_q as i128;
    let positive = match (u.signum(), v.signum()) {
        (a, b) if a >= 0 && b >= 0 => true,
        (a, b) if a <= 0 && b <= 0 => false,
        // Opposite signs: compare u²/k_P with v²/k_Q.
        (1, _) => u * u * k_q as i128 >= v * v * k_p as i128,
        _ => v * v * k_p as i128 >= u * u * k_q as i128,
    };
    Label::from(positive)
}

/// Running per-origin counts over a growing merged neighbor sequence.
struct Growth<T, F> {
    total: usize,
    fetch: F,
    buf: Vec<MergedNeighbor<T>>,
}

impl<T: Scalar, F> Growth<T, F>
where
    F: FnMut(usize) -> Result<Vec<MergedNeighbor<T>>>,
{
    fn new(total: usize, fetch: F) -> Self {
        Self {
            total,
            fetch,
            buf: Vec::new(),
        }
    }

    /// The `k`-th (1-based) merged neighbor. Fetches in doubling batches; each
    /// batch is a prefix-extension of the previous one.
    fn get(&mut self, k: usize) -> Result<MergedNeighbor<T>> {
        if k > self.buf.len() {
            let want = (self.buf.len() * 2).max(64).max(k).min(self.total);
            self.buf = (self.fetch)(want)?;
        }
        Ok(self.buf[k - 1])
    }
}

#[derive(Clone, Copy)]
struct Counts {
    k_p: usize,
    ones_p: usize,
    k_q: usize,
    ones_q: usize,
}

fn run_single<T: Scalar>(
    index: &TransferIndex<'_, T>,
    x: &[T],
    mut record: impl FnMut(AdaptiveStep<T>),
) -> Result<(Label, Option<usize>, usize, T)> {
    let n = index.n_p() + index.n_q();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if x.len() != index.d() {
        return Err(Error::QueryDimension {
            expected: index.d(),
            found: x.len(),
        });
    }
    let threshold = stopping_threshold::<T>(index.d(), n);
    let mut growth = Growth::new(n, |k| index.merged_sequence(x, k));
    let mut c = Counts {
        k_p: 0,
        ones_p: 0,
        k_q: 0,
        ones_q: 0,
    };
    let mut best: Option<(T, usize, Counts)> = None;
    for k in 1..=n {
        let m = growth.get(k)?;
        let one = usize::from(m.neighbor.label == 1);
        match m.origin {
            Origin::Q => {
                c.k_q += 1;
                c.ones_q += one;
            }
            Origin::P(_) => {
                c.k_p += 1;
                c.ones_p += one;
            }
        }
        let eta_p = mean_or_half::<T>(c.ones_p, c.k_p);
        let eta_q = mean_or_half::<T>(c.ones_q, c.k_q);
        let r = snr_index(c.k_p, eta_p, c.k_q, eta_q);
        record(AdaptiveStep {
            k,
            k_p: c.k_p,
            k_q: c.k_q,
            eta_p,
            eta_q,
            r,
        });
        if r > threshold {
            let label = intermediate_label(c.k_p, c.ones_p, c.k_q, c.ones_q);
            return Ok((label, Some(k), k, threshold));
        }
        if best.as_ref().is_none_or(|(br, _, _)| r > *br) {
            best = Some((r, k, c));
        }
    }
    let (_, k, c) = best.expect("n >= 1");
    Ok((
        intermediate_label(c.k_p, c.ones_p, c.k_q, c.ones_q),
        None,
        k,
        threshold,
    ))
}

/// Adaptive single-source classifier with its full step trace.
pub fn adaptive_predict<T: Scalar>(
    index: &TransferIndex<'_, T>,
    x: &[T],
) -> Result<(Label, AdaptiveTrace<T>)> {
    let mut steps = Vec::new();
    let (label, stop, chosen, threshold) = run_single(index, x, |s| steps.push(s))?;
    Ok((
        label,
        AdaptiveTrace {
            steps,
            threshold,
            stop,
            chosen,
            label,
        },
    ))
}

/// Adaptive single-source classifier, label only.
pub fn adaptive_label<T: Scalar>(index: &TransferIndex<'_, T>, x: &[T]) -> Result<Label> {
    run_single(index, x, |_| {}).map(|(label, ..)| label)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiAdaptiveStep<T> {
    pub k: usize,
    pub k_sources: Vec<usize>,
    pub k_q: usize,
    pub eta_sources: Vec<T>,
    pub eta_q: T,
    pub r_plus: T,
    pub r_minus: T,
    pub r: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiAdaptiveTrace<T> {
    pub steps: Vec<MultiAdaptiveStep<T>>,
    pub threshold: T,
    pub stop: Option<usize>,
    pub chosen: usize,
    pub label: Label,
}

/// Positive and negative signal-to-noise indices for one step.
///
/// Entries are `(count, mean)`; a mean of exactly 1/2 counts as positive and
/// contributes zero.
pub fn signed_snr<T: Scalar>(parts: &[(usize, T)]) -> (T, T) {
    let half = T::half();
    parts
        .iter()
        .fold((T::zero(), T::zero()), |(plus, minus), &(k, eta)| {
            let dev = eta - half;
            let term = T::of_usize(k) * dev * dev;
            if eta >= half {
                (plus + term, minus)
            } else {
                (plus, minus + term)
            }
        })
}

/// `(count, ones)` per sample, target first.
type PartCounts = Vec<(usize, usize)>;

/// `1{r₊ ≥ r₋}` with each term `u²/(4k)`, `u = 2·ones - k`, summed exactly.
fn multi_label(parts: &[(usize, usize)]) -> Label {
    let zero = || BigRational::from_integer(BigInt::from(0));
    let (mut plus, mut minus) = (zero(), zero());
    for &(k, ones) in parts {
        if k == 0 {
            continue;
        }
        let u = 2 * ones as i128 - k as i128;
        let term = BigRational::new(BigInt::from(u * u), BigInt::from(k));
        if u >= 0 {
            plus += term;
        } else {
            minus += term;
        }
    }
    Label::from(plus.cmp(&minus) != Ordering::Less)
}

fn run_multi<T: Scalar>(
    index: &MultiSourceIndex<'_, T>,
    x: &[T],
    mut record: impl FnMut(MultiAdaptiveStep<T>),
) -> Result<(Label, Option<usize>, usize, T)> {
    let n = index.total();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if x.len() != index.d() {
        return Err(Error::QueryDimension {
            expected: index.d(),
            found: x.len(),
        });
    }
    let m = index.sources.len();
    let threshold = stopping_threshold::<T>(index.d(), n);
    let mut growth = Growth::new(n, |k| index.merged_sequence(x, k));
    // Slot 0 is the target; slot i+1 is source i. Entries are (count, ones).
    let mut counts = vec![(0usize, 0usize); m + 1];
    let mut best: Option<(T, usize, PartCounts)> = None;
    for k in 1..=n {
        let nb = growth.get(k)?;
        let slot = match nb.origin {
            Origin::Q => 0,
            Origin::P(i) => i + 1,
        };
        counts[slot].0 += 1;
        counts[slot].1 += usize::from(nb.neighbor.label == 1);
        let means: Vec<(usize, T)> = counts
            .iter()
            .map(|&(c, ones)| (c, mean_or_half::<T>(ones, c)))
            .collect();
        let (r_plus, r_minus) = signed_snr(&means);
        let r = r_plus.max(r_minus);
        record(MultiAdaptiveStep {
            k,
            k_sources: counts[1..].iter().map(|c| c.0).collect(),
            k_q: counts[0].0,
            eta_sources: means[1..].iter().map(|m| m.1).collect(),
            eta_q: means[0].1,
            r_plus,
            r_minus,
            r,
        });
        if r > threshold {
            return Ok((multi_label(&counts), Some(k), k, threshold));
        }
        if best.as_ref().is_none_or(|(br, _, _)| r > *br) {
            best = Some((r, k, counts.clone()));
        }
    }
    let (_, k, c) = best.expect("n >= 1");
    Ok((multi_label(&c), None, k, threshold))
}

/// Adaptive multi-source classifier with its full step trace.
pub fn multisource_adaptive_predict<T: Scalar>(
    index: &MultiSourceIndex<'_, T>,
    x: &[T],
) -> Result<(Label, MultiAdaptiveTrace<T>)> {
    let mut steps = Vec::new();
    let (label, stop, chosen, threshold) = run_multi(index, x, |s| steps.push(s))?;
    Ok((
        label,
        MultiAdaptiveTrace {
            steps,
            threshold,
            stop,
            chosen,
            label,
        },
    ))
}

pub fn multisource_adaptive_label<T: Scalar>(
    index: &MultiSourceIndex<'_, T>,
    x: &[T],
) -> Result<Label> {
    run_multi(index, x, |_| {}).map(|(label, ..)| label)
}
