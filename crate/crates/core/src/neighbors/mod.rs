//! Exact k-nearest-neighbor search with deterministic tie-breaking.
//!
//! Neighbors are ordered by squared Euclidean distance, then by position in
//! the backing [`SampleSet`]. When two sample sets are queried jointly, a
//! target (Q) point wins a distance tie against a source point, and sources
//! are ranked by their number.

mod brute;
mod kdtree;

use std::ops::Deref;

pub use brute::brute_force_knn;

use crate::data::{Label, MultiSourceDataset, SampleSet, TransferDataset};
use crate::error::{Error, Origin, Result};
use crate::scalar::Scalar;

use kdtree::KdTree;

/// Squared Euclidean distance, summed in coordinate order.
#[inline]
pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    /// Position in the backing sample set.
    pub index: usize,
    pub distance: T,
    /// Ordering key; `distance` is its square root.
    pub sq_distance: T,
    pub label: Label,
}

/// Neighbors sorted by (distance, index).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborList<T>(Vec<Neighbor<T>>);

impl<T: Scalar> NeighborList<T> {
    pub fn new(neighbors: Vec<Neighbor<T>>) -> Self {
        Self(neighbors)
    }

    /// Number of neighbors labeled 1.
    pub fn positives(&self) -> usize {
        self.0.iter().filter(|n| n.label == 1).count()
    }

    /// Label sum of the first `k` neighbors.
    pub fn positives_in_prefix(&self, k: usize) -> usize {
        self.0[..k].iter().filter(|n| n.label == 1).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|n| n.index).collect()
    }

    pub fn into_inner(self) -> Vec<Neighbor<T>> {
        self.0
    }
}

impl<T> Deref for NeighborList<T> {
    type Target = [Neighbor<T>];

    fn deref(&self) -> &[Neighbor<T>] {
        &self.0
    }
}

/// How a query is answered. Every strategy returns identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Tree search for small `k`, full scan when `k` is a large fraction of `n`.
    #[default]
    Auto,
    Tree,
    Scan,
}

/// Immutable exact-search index over one sample set.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a, T> {
    set: &'a SampleSet<T>,
    tree: KdTree<T>,
}

impl<'a, T: Scalar> NeighborIndex<'a, T> {
    pub fn build(set: &'a SampleSet<T>) -> Self {
        let tree = KdTree::build(set.d, set.samples.iter().map(|s| s.x.as_slice()));
        Self { set, tree }
    }

    pub fn set(&self) -> &'a SampleSet<T> {
        self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// The `min(k, n)` nearest samples to `x`.
    pub fn query(&self, x: &[T], k: usize) -> Result<NeighborList<T>> {
        self.query_with(x, k, SearchStrategy::Auto)
    }

    pub fn query_with(
        &self,
        x: &[T],
        k: usize,
        strategy: SearchStrategy,
    ) -> Result<NeighborList<T>> {
        if x.len() != self.set.d {
            return Err(Error::QueryDimension {
                expected: self.set.d,
                found: x.len(),
            });
        }
        let n = self.set.len();
        let k = k.min(n);
        let use_scan = match strategy {
            SearchStrategy::Scan => true,
            SearchStrategy::Tree => false,
            SearchStrategy::Auto => n <= 64 || k.saturating_mul(4) >= n,
        };
        if use_scan {
            return brute_force_knn(self.set, x, k);
        }
        let hits = self.tree.knn(x, k);
        Ok(NeighborList(
            hits.into_iter()
                .map(|c| Neighbor {
                    index: c.index,
                    distance: c.sq.sqrt(),
                    sq_distance: c.sq,
                    label: self.set.samples[c.index].y,
                })
                .collect(),
        ))
    }
}

/// Convenience wrapper: build an index and run one query.
pub fn query_knn<T: Scalar>(set: &SampleSet<T>, x: &[T], k: usize) -> Result<NeighborList<T>> {
    NeighborIndex::build(set).query(x, k)
}

/// A neighbor tagged with the sample set it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedNeighbor<T> {
    pub origin: Origin,
    pub neighbor: Neighbor<T>,
}

fn origin_rank(o: Origin) -> usize {
    match o {
        Origin::Q => 0,
        Origin::P(i) => i + 1,
    }
}

/// Merges per-set neighbor lists into one global order, taking `k` entries.
fn merge_lists<T: Scalar>(lists: &[(Origin, NeighborList<T>)], k: usize) -> Vec<MergedNeighbor<T>> {
    let mut heads = vec![0usize; lists.len()];
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let mut best: Option<usize> = None;
        for (j, (origin, list)) in lists.iter().enumerate() {
            let Some(cand) = list.get(heads[j]) else {
                continue;
            };
            best = match best {
                None => Some(j),
                Some(b) => {
                    let (bo, bl) = &lists[b];
                    let inc = &bl[heads[b]];
                    let ord = cand
                        .sq_distance
                        .partial_cmp(&inc.sq_distance)
                        .expect("finite")
                        .then(origin_rank(*origin).cmp(&origin_rank(*bo)))
                        .then(cand.index.cmp(&inc.index));
                    if ord.is_lt() {
                        Some(j)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let Some(b) = best else { break };
        out.push(MergedNeighbor {
            origin: lists[b].0,
            neighbor: lists[b].1[heads[b]],
        });
        heads[b] += 1;
    }
    out
}

/// Indexes over the source and target sets of a [`TransferDataset`].
#[derive(Debug, Clone)]
pub struct TransferIndex<'a, T> {
    pub p: NeighborIndex<'a, T>,
    pub q: NeighborIndex<'a, T>,
}

impl<'a, T: Scalar> TransferIndex<'a, T> {
    pub fn build(ds: &'a TransferDataset<T>) -> Self {
        Self {
            p: NeighborIndex::build(&ds.p_data),
            q: NeighborIndex::build(&ds.q_data),
        }
    }

    pub fn n_p(&self) -> usize {
        self.p.len()
    }

    pub fn n_q(&self) -> usize {
        self.q.len()
    }

    pub fn d(&self) -> usize {
        self.q.set.d
    }

    /// The `k` globally nearest points of the pooled sample, in order.
    pub fn merged_sequence(&self, x: &[T], k: usize) -> Result<Vec<MergedNeighbor<T>>> {
        let n = self.n_p() + self.n_q();
        if k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        let lists = [
            (Origin::Q, self.q.query(x, k)?),
            (Origin::P(0), self.p.query(x, k)?),
        ];
        Ok(merge_lists(&lists, k))
    }

    /// The `k` globally nearest points split by origin: `(from P, from Q)`.
    pub fn merged_knn(&self, x: &[T], k: usize) -> Result<(NeighborList<T>, NeighborList<T>)> {
        let seq = self.merged_sequence(x, k)?;
        let (mut p, mut q) = (Vec::new(), Vec::new());
        for m in seq {
            match m.origin {
                Origin::Q => q.push(m.neighbor),
                Origin::P(_) => p.push(m.neighbor),
            }
        }
        Ok((NeighborList(p), NeighborList(q)))
    }
}

/// One-shot form of [`TransferIndex::merged_knn`].
pub fn merged_knn<T: Scalar>(
    ds: &TransferDataset<T>,
    x: &[T],
    k: usize,
) -> Result<(NeighborList<T>, NeighborList<T>)> {
    TransferIndex::build(ds).merged_knn(x, k)
}

/// Indexes over every source set and the target set.
#[derive(Debug, Clone)]
pub struct MultiSourceIndex<'a, T> {
    pub sources: Vec<NeighborIndex<'a, T>>,
    pub q: NeighborIndex<'a, T>,
}

impl<'a, T: Scalar> MultiSourceIndex<'a, T> {
    pub fn build(mds: &'a MultiSourceDataset<T>) -> Self {
        Self {
            sources: mds.sources.iter().map(NeighborIndex::build).collect(),
            q: NeighborIndex::build(&mds.q_data),
        }
    }

    pub fn total(&self) -> usize {
        self.q.len() + self.sources.iter().map(NeighborIndex::len).sum::<usize>()
    }

    pub fn d(&self) -> usize {
        self.q.set.d
    }

    pub fn merged_sequence(&self, x: &[T], k: usize) -> Result<Vec<MergedNeighbor<T>>> {
        let n = self.total();
        if k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        let mut lists = Vec::with_capacity(self.sources.len() + 1);
        lists.push((Origin::Q, self.q.query(x, k)?));
        for (i, s) in self.sources.iter().enumerate() {
            lists.push((Origin::P(i), s.query(x, k)?));
        }
        Ok(merge_lists(&lists, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledSample;

    fn set(rows: &[(&[f64], u8)]) -> SampleSet<f64> {
        SampleSet::new(
            rows[0].0.len(),
            rows.iter()
                .map(|(x, y)| LabeledSample::new(x.to_vec(), *y))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_index() {
        let s = SampleSet::<f64>::empty(2);
        let idx = NeighborIndex::build(&s);
        assert!(idx.query(&[0.5, 0.5], 3).unwrap().is_empty());
    }

    #[test]
    fn singleton() {
        let s = set(&[(&[0.2, 0.3], 1)]);
        let idx = NeighborIndex::build(&s);
        for k in 1..4 {
            let r = idx.query(&[0.9, 0.9], k).unwrap();
            assert_eq!(r.indices(), vec![0]);
        }
    }

    #[test]
    fn nearer_of_two() {
        let s = set(&[(&[0.0, 0.0], 0), (&[1.0, 1.0], 1)]);
        let r = query_knn(&s, &[0.1, 0.1], 1).unwrap();
        assert_eq!(r[0].index, 0);
        assert!((r[0].distance - 0.02f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn saturates_at_n() {
        let s = set(&[(&[0.0], 0), (&[1.0], 1), (&[2.0], 1)]);
        assert_eq!(query_knn(&s, &[0.0], 10).unwrap().len(), 3);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let s = set(&[(&[0.0, 1.0], 0), (&[1.0, 0.0], 1)]);
        let r = query_knn(&s, &[0.0, 0.0], 1).unwrap();
        assert_eq!(r[0].index, 0);
        let s = set(&[(&[1.0, 0.0], 0), (&[0.0, 1.0], 1)]);
        let r = query_knn(&s, &[0.0, 0.0], 1).unwrap();
        assert_eq!(r[0].index, 0);
    }

    #[test]
    fn tree_handles_many_duplicates() {
        let rows: Vec<(Vec<f64>, u8)> = (0..200)
            .map(|i| (vec![(i % 3) as f64], (i % 2) as u8))
            .collect();
        let s = SampleSet::new(
            1,
            rows.into_iter()
                .map(|(x, y)| LabeledSample::new(x, y))
                .collect(),
        )
        .unwrap();
        let idx = NeighborIndex::build(&s);
        for k in [1, 5, 17, 40] {
            let tree = idx.query_with(&[1.0], k, SearchStrategy::Tree).unwrap();
            let scan = idx.query_with(&[1.0], k, SearchStrategy::Scan).unwrap();
            assert_eq!(tree, scan);
        }
    }

    #[test]
    fn query_dimension_checked() {
        let s = set(&[(&[0.0, 0.0], 0)]);
        assert!(matches!(
            query_knn(&s, &[0.0], 1),
            Err(Error::QueryDimension {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn merged_takes_both() {
        let ds = TransferDataset::new(set(&[(&[0.0, 0.0], 1)]), set(&[(&[1.0, 1.0], 0)])).unwrap();
        let (p, q) = merged_knn(&ds, &[0.0, 0.0], 2).unwrap();
        assert_eq!((p.len(), q.len()), (1, 1));
    }

    #[test]
    fn merged_exhaustion() {
        let p = set(&[(&[0.0], 0), (&[5.0], 0), (&[9.0], 1)]);
        let q = set(&[(&[0.1], 1), (&[0.2], 1)]);
        let ds = TransferDataset::new(p, q).unwrap();
        let (p, q) = merged_knn(&ds, &[100.0], 5).unwrap();
        assert_eq!((p.len(), q.len()), (3, 2));
        assert!(merged_knn(&ds, &[0.0], 6).is_err());
    }

    #[test]
    fn merged_tie_prefers_target() {
        let ds = TransferDataset::new(set(&[(&[1.0], 0)]), set(&[(&[-1.0], 1)])).unwrap();
        let (p, q) = merged_knn(&ds, &[0.0], 1).unwrap();
        assert_eq!((p.len(), q.len()), (0, 1));
    }
}
