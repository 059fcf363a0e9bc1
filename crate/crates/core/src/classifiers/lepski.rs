use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::neighbors::{NeighborIndex, NeighborList};
use crate::scalar::Scalar;

/// Confidence half-width used by the Lepski rule at neighborhood size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LepskiWidth {
    /// `√((d+3)/k) · ln n`
    #[default]
    Algorithm3,
    /// `√((d+3) · ln n / k)`
    Lemma5,
}

impl LepskiWidth {
    pub fn width<T: Scalar>(self, d: usize, k: usize, n: usize) -> T {
        let dk = T::of_usize(d + 3) / T::of_usize(k);
        let log_n = T::of_usize(n).ln();
        match self {
            LepskiWidth::Algorithm3 => dk.sqrt() * log_n,
            LepskiWidth::Lemma5 => (dk * log_n).sqrt(),
        }
    }
}

impl fmt::Display for LepskiWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LepskiWidth::Algorithm3 => "algorithm3",
            LepskiWidth::Lemma5 => "lemma5",
        })
    }
}

impl FromStr for LepskiWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algorithm3" => Ok(LepskiWidth::Algorithm3),
            "lemma5" => Ok(LepskiWidth::Lemma5),
            other => Err(Error::InvalidParameter(format!(
                "unknown lepski width {other:?} (expected algorithm3 or lemma5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LepskiOutcome<T> {
    pub label: Label,
    /// Step at which the running interval excluded 1/2, if any.
    pub stop: Option<usize>,
    pub lower: T,
    pub upper: T,
}

/// Lepski's rule: intersect the intervals `η̂_k ± width(k)` for growing `k`
/// and stop once the intersection lies strictly on one side of 1/2.
pub fn lepski_run<T: Scalar>(
    index: &NeighborIndex<'_, T>,
    x: &[T],
    width: LepskiWidth,
) -> Result<LepskiOutcome<T>> {
    let n = index.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = index.set().d;
    let half = T::half();
    let mut lower = T::neg_infinity();
    let mut upper = T::infinity();
    let mut ones = 0usize;
    let mut list = NeighborList::default();
    for k in 1..=n {
        if k > list.len() {
            let want = (list.len() * 2).max(64).max(k).min(n);
            list = index.query(x, want)?;
        }
        ones += usize::from(list[k - 1].label == 1);
        let eta = T::of_usize(ones) / T::of_usize(k);
        let w = width.width::<T>(d, k, n);
        lower = lower.max(eta - w);
        upper = upper.min(eta + w);
        if lower > half || upper < half {
            return Ok(LepskiOutcome {
                label: Label::from(eta >= half),
                stop: Some(k),
                lower,
                upper,
            });
        }
    }
    let eta = T::of_usize(ones) / T::of_usize(n);
    Ok(LepskiOutcome {
        label: Label::from(eta >= half),
        stop: None,
        lower,
        upper,
    })
}

pub fn lepski_predict<T: Scalar>(
    index: &NeighborIndex<'_, T>,
    x: &[T],
    width: LepskiWidth,
) -> Result<Label> {
    lepski_run(index, x, width).map(|o| o.label)
}
