//! Labeled samples, dataset containers and hyperparameter records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result};
use crate::scalar::Scalar;

/// Binary class label, stored as an integer so label averages are plain
/// arithmetic.
pub type Label = u8;

/// A covariate vector with its binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<T> {
    pub x: Vec<T>,
    pub y: Label,
}

impl<T: Scalar> LabeledSample<T> {
    pub fn new(x: Vec<T>, y: Label) -> Self {
        Self { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// An ordered collection of samples sharing one dimension.
///
/// Insertion order is significant: neighbor ties are broken by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet<T> {
    pub d: usize,
    pub samples: Vec<LabeledSample<T>>,
}

impl<T: Scalar> SampleSet<T> {
    /// Builds a validated set, tagging errors with `Origin::Q`.
    pub fn new(d: usize, samples: Vec<LabeledSample<T>>) -> Result<Self> {
        let set = Self { d, samples };
        set.validate(Origin::Q)?;
        Ok(set)
    }

    pub fn empty(d: usize) -> Self {
        Self {
            d,
            samples: Vec::new(),
        }
    }

    /// Convenience constructor from parallel coordinate rows and labels.
    pub fn from_rows(d: usize, rows: Vec<Vec<T>>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let samples = rows
            .into_iter()
            .zip(labels)
            .map(|(x, y)| LabeledSample { x, y })
            .collect();
        Self::new(d, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledSample<T>> {
        self.samples.iter()
    }

    pub fn push(&mut self, sample: LabeledSample<T>) {
        self.samples.push(sample);
    }

    /// Checks dimension, label and finiteness invariants, reporting the first
    /// offending sample.
    pub fn validate(&self, origin: Origin) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for (index, s) in self.samples.iter().enumerate() {
            if s.x.len() != self.d {
                return Err(Error::DimensionMismatch {
                    origin,
                    index,
                    expected: self.d,
                    found: s.x.len(),
                });
            }
            if s.y > 1 {
                return Err(Error::InvalidLabel {
                    origin,
                    index,
                    label: s.y,
                });
            }
            if let Some(coord) = s.x.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteCoordinate {
                    origin,
                    index,
                    coord,
                });
            }
        }
        Ok(())
    }

    /// Number of samples labeled 1.
    pub fn positives(&self) -> usize {
        self.samples.iter().filter(|s| s.y == 1).count()
    }
}

/// One source sample and one target sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferDataset<T> {
    pub p_data: SampleSet<T>,
    pub q_data: SampleSet<T>,
}

impl<T: Scalar> TransferDataset<T> {
    pub fn new(p_data: SampleSet<T>, q_data: SampleSet<T>) -> Result<Self> {
        validate_dataset(Self { p_data, q_data })
    }

    pub fn d(&self) -> usize {
        self.q_data.d
    }

    pub fn n_p(&self) -> usize {
        self.p_data.len()
    }

    pub fn n_q(&self) -> usize {
        self.q_data.len()
    }

    pub fn total(&self) -> usize {
        self.n_p() + self.n_q()
    }

    /// Target samples followed by source samples, as one unlabeled-origin set.
    pub fn pooled(&self) -> SampleSet<T> {
        let samples = self
            .q_data
            .samples
            .iter()
            .chain(self.p_data.samples.iter())
            .cloned()
            .collect();
        SampleSet {
            d: self.d(),
            samples,
        }
    }
}

/// Returns the dataset iff every sample is well formed and both sets agree on
/// the dimension.
pub fn validate_dataset<T: Scalar>(ds: TransferDataset<T>) -> Result<TransferDataset<T>> {
    ds.p_data.validate(Origin::P(0))?;
    ds.q_data.validate(Origin::Q)?;
    if ds.p_data.d != ds.q_data.d {
        return Err(Error::DimensionMismatch {
            origin: Origin::P(0),
            index: 0,
            expected: ds.q_data.d,
            found: ds.p_data.d,
        });
    }
    Ok(ds)
}

/// Several source samples and one target sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSourceDataset<T> {
    pub sources: Vec<SampleSet<T>>,
    pub q_data: SampleSet<T>,
}

impl<T: Scalar> MultiSourceDataset<T> {
    pub fn new(sources: Vec<SampleSet<T>>, q_data: SampleSet<T>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one source sample set is required".into(),
            ));
        }
        q_data.validate(Origin::Q)?;
        for (i, s) in sources.iter().enumerate() {
            s.validate(Origin::P(i))?;
            if s.d != q_data.d {
                return Err(Error::DimensionMismatch {
                    origin: Origin::P(i),
                    index: 0,
                    expected: q_data.d,
                    found: s.d,
                });
            }
        }
        Ok(Self { sources, q_data })
    }

    pub fn d(&self) -> usize {
        self.q_data.d
    }

    pub fn m(&self) -> usize {
        self.sources.len()
    }

    pub fn source_sizes(&self) -> Vec<usize> {
        self.sources.iter().map(SampleSet::len).collect()
    }

    pub fn total(&self) -> usize {
        self.q_data.len() + self.sources.iter().map(SampleSet::len).sum::<usize>()
    }

    /// Concatenates all sources (in order) into a single-source dataset.
    pub fn merge_sources(&self) -> TransferDataset<T> {
        let samples = self
            .sources
            .iter()
            .flat_map(|s| s.samples.iter().cloned())
            .collect();
        TransferDataset {
            p_data: SampleSet {
                d: self.d(),
                samples,
            },
            q_data: self.q_data.clone(),
        }
    }
}

impl<T: Scalar> From<TransferDataset<T>> for MultiSourceDataset<T> {
    fn from(ds: TransferDataset<T>) -> Self {
        Self {
            sources: vec![ds.p_data],
            q_data: ds.q_data,
        }
    }
}

/// Margin exponent, smoothness and relative signal exponents.
///
/// `gamma` holds one entry per source; single-source use takes `gamma[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: Vec<T>,
    pub d: usize,
}

impl<T: Scalar> HyperParams<T> {
    pub fn new(alpha: T, beta: T, gamma: Vec<T>, d: usize) -> Result<Self> {
        let hp = Self {
            alpha,
            beta,
            gamma,
            d,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn single(alpha: T, beta: T, gamma: T, d: usize) -> Result<Self> {
        Self::new(alpha, beta, vec![gamma], d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if !(self.beta > T::zero() && self.beta <= T::one()) {
            return bad(format!("beta = {} must lie in (0, 1]", self.beta));
        }
        if !(self.alpha >= T::zero()) {
            return bad(format!("alpha = {} must be nonnegative", self.alpha));
        }
        if self.alpha * self.beta > T::of_usize(self.d) {
            return bad(format!(
                "alpha * beta = {} exceeds d = {}",
                self.alpha * self.beta,
                self.d
            ));
        }
        if self.gamma.is_empty() {
            return bad("at least one gamma is required".into());
        }
        if let Some(g) = self
            .gamma
            .iter()
            .find(|g| !(**g > T::zero() && g.is_finite()))
        {
            return bad(format!("gamma = {g} must be positive"));
        }
        Ok(())
    }

    pub fn gamma(&self) -> T {
        self.gamma[0]
    }

    /// `β(1+α)/(2β+d)`: the rate exponent with respect to target sample size.
    pub fn target_rate_exponent(&self) -> T {
        let two = T::of(2.0);
        self.beta * (T::one() + self.alpha) / (two * self.beta + T::of_usize(self.d))
    }

    /// `β(1+α)/(2γβ+d)`: the rate exponent with respect to source sample size
    /// when no target data is available.
    pub fn source_rate_exponent(&self, source: usize) -> T {
        let two = T::of(2.0);
        self.beta * (T::one() + self.alpha)
            / (two * self.gamma[source] * self.beta + T::of_usize(self.d))
    }

    /// `(2β+d)/(2γβ+d)`: exponent turning a source size into its
    /// target-equivalent sample size.
    pub fn transfer_exponent(&self, source: usize) -> T {
        let two = T::of(2.0);
        let d = T::of_usize(self.d);
        (two * self.beta + d) / (two * self.gamma[source] * self.beta + d)
    }
}

/// Neighbor counts and weights of the two-sample weighted K-NN rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnPlan<T> {
    pub k_p: usize,
    pub k_q: usize,
    pub w_p: T,
    pub w_q: T,
}

impl<T: Scalar> KnnPlan<T> {
    /// Checks the plan against concrete sample sizes.
    pub fn check(&self, n_p: usize, n_q: usize) -> Result<()> {
        if self.k_p > n_p {
            return Err(Error::PlanExceedsSample {
                origin: Origin::P(0),
                needed: self.k_p,
                available: n_p,
            });
        }
        if self.k_q > n_q {
            return Err(Error::PlanExceedsSample {
                origin: Origin::Q,
                needed: self.k_q,
                available: n_q,
            });
        }
        if self.w_p < T::zero() || self.w_q < T::zero() {
            return Err(Error::InvalidParameter(
                "weights must be nonnegative".into(),
            ));
        }
        let mass = self.w_p * T::of_usize(self.k_p) + self.w_q * T::of_usize(self.k_q);
        if !(mass > T::zero()) && n_p + n_q > 0 {
            return Err(Error::InvalidParameter(
                "plan puts zero total weight on the neighbors".into(),
            ));
        }
        Ok(())
    }
}

/// Multi-source generalization of [`KnnPlan`]: one `(k, w)` pair per source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiKnnPlan<T> {
    pub k_sources: Vec<usize>,
    pub w_sources: Vec<T>,
    pub k_q: usize,
    pub w_q: T,
}

impl<T: Scalar> MultiKnnPlan<T> {
    pub fn check(&self, source_sizes: &[usize], n_q: usize) -> Result<()> {
        if self.k_sources.len() != source_sizes.len() || self.w_sources.len() != source_sizes.len()
        {
            return Err(Error::InvalidParameter(format!(
                "plan covers {} sources, dataset has {}",
                self.k_sources.len(),
                source_sizes.len()
            )));
        }
        for (i, (&k, &n)) in self.k_sources.iter().zip(source_sizes).enumerate() {
            if k > n {
                return Err(Error::PlanExceedsSample {
                    origin: Origin::P(i),
                    needed: k,
                    available: n,
                });
            }
        }
        if self.k_q > n_q {
            return Err(Error::PlanExceedsSample {
                origin: Origin::Q,
                needed: self.k_q,
                available: n_q,
            });
        }
        let mut mass = self.w_q * T::of_usize(self.k_q);
        for (&k, &w) in self.k_sources.iter().zip(&self.w_sources) {
            if w < T::zero() {
                return Err(Error::InvalidParameter(
                    "weights must be nonnegative".into(),
                ));
            }
            mass = mass + w * T::of_usize(k);
        }
        if !(mass > T::zero()) {
            return Err(Error::InvalidParameter(
                "plan puts zero total weight on the neighbors".into(),
            ));
        }
        Ok(())
    }
}

impl<T: Scalar> From<KnnPlan<T>> for MultiKnnPlan<T> {
    fn from(p: KnnPlan<T>) -> Self {
        Self {
            k_sources: vec![p.k_p],
            w_sources: vec![p.w_p],
            k_q: p.k_q,
            w_q: p.w_q,
        }
    }
}
