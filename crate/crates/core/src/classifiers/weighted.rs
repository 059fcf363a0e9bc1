use crate::data::{KnnPlan, Label, MultiKnnPlan};
use crate::error::{Error, Result};
use crate::neighbors::{MultiSourceIndex, NeighborIndex, TransferIndex};
use crate::scalar::Scalar;

/// Plain K-NN: 1 iff the mean of the `k` nearest labels exceeds 1/2.
pub fn knn_predict<T: Scalar>(index: &NeighborIndex<'_, T>, k: usize, x: &[T]) -> Result<Label> {
    let n = index.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let ones = index.query(x, k)?.positives();
    // mean > 1/2  <=>  2·ones > k, evaluated exactly.
    Ok(Label::from(2 * ones > k))
}

/// Two-sample weighted estimate of the target regression function at `x`.
pub fn weighted_knn_estimate<T: Scalar>(
    index: &TransferIndex<'_, T>,
    plan: &KnnPlan<T>,
    x: &[T],
) -> Result<T> {
    plan.check(index.n_p(), index.n_q())?;
    let ones_p = index.p.query(x, plan.k_p)?.positives();
    let ones_q = index.q.query(x, plan.k_q)?.positives();
    let num = plan.w_p * T::of_usize(ones_p) + plan.w_q * T::of_usize(ones_q);
    let den = plan.w_p * T::of_usize(plan.k_p) + plan.w_q * T::of_usize(plan.k_q);
    Ok(num / den)
}

/// Two-sample weighted K-NN rule: 1 iff the weighted estimate exceeds 1/2.
pub fn weighted_knn_predict<T: Scalar>(
    index: &TransferIndex<'_, T>,
    plan: &KnnPlan<T>,
    x: &[T],
) -> Result<Label> {
    Ok(Label::from(
        weighted_knn_estimate(index, plan, x)? > T::half(),
    ))
}

pub fn multisource_weighted_estimate<T: Scalar>(
    index: &MultiSourceIndex<'_, T>,
    plan: &MultiKnnPlan<T>,
    x: &[T],
) -> Result<T> {
    let sizes: Vec<usize> = index.sources.iter().map(NeighborIndex::len).collect();
    plan.check(&sizes, index.q.len())?;
    let ones_q = index.q.query(x, plan.k_q)?.positives();
    let mut num = plan.w_q * T::of_usize(ones_q);
    let mut den = plan.w_q * T::of_usize(plan.k_q);
    for ((src, &k), &w) in index
        .sources
        .iter()
        .zip(&plan.k_sources)
        .zip(&plan.w_sources)
    {
        let ones = src.query(x, k)?.positives();
        num = num + w * T::of_usize(ones);
        den = den + w * T::of_usize(k);
    }
    Ok(num / den)
}

/// Multi-source weighted K-NN rule.
pub fn multisource_weighted_predict<T: Scalar>(
    index: &MultiSourceIndex<'_, T>,
    plan: &MultiKnnPlan<T>,
    x: &[T],
) -> Result<Label> {
    Ok(Label::from(
        multisource_weighted_estimate(index, plan, x)? > T::half(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{LabeledSample, MultiSourceDataset, SampleSet, TransferDataset};

    fn line(points: &[(f64, u8)]) -> SampleSet<f64> {
        SampleSet::new(
            1,
            points
                .iter()
                .map(|&(x, y)| LabeledSample::new(vec![x], y))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn knn_boundary_is_strict() {
        let s = line(&[(0.0, 1), (0.1, 0), (0.2, 1), (5.0, 0)]);
        let idx = NeighborIndex::build(&s);
        assert_eq!(knn_predict(&idx, 1, &[0.0]).unwrap(), 1);
        assert_eq!(knn_predict(&idx, 3, &[0.0]).unwrap(), 1);
        assert_eq!(knn_predict(&idx, 2, &[0.0]).unwrap(), 0);
        assert!(knn_predict(&idx, 0, &[0.0]).is_err());
        assert!(knn_predict(&idx, 5, &[0.0]).is_err());
    }

    #[test]
    fn unanimous() {
        let ds = TransferDataset::new(line(&[(0.0, 1), (1.0, 1)]), line(&[(0.5, 1)])).unwrap();
        let idx = TransferIndex::build(&ds);
        let plan = KnnPlan {
            k_p: 2,
            k_q: 1,
            w_p: 0.3,
            w_q: 0.9,
        };
        assert_eq!(weighted_knn_estimate(&idx, &plan, &[0.2]).unwrap(), 1.0);
        assert_eq!(weighted_knn_predict(&idx, &plan, &[0.2]).unwrap(), 1);
    }

    #[test]
    fn hand_computed_ratio() {
        // Nearest P labels (1, 0), nearest Q label 0:
        // (1·1 + 2·0) / (1·2 + 2·1) = 0.25.
        let p = line(&[(0.0, 1), (0.1, 0), (3.0, 1)]);
        let q = line(&[(0.05, 0), (4.0, 1)]);
        let ds = TransferDataset::new(p, q).unwrap();
        let idx = TransferIndex::build(&ds);
        let plan = KnnPlan {
            k_p: 2,
            k_q: 1,
            w_p: 1.0,
            w_q: 2.0,
        };
        assert_eq!(weighted_knn_estimate(&idx, &plan, &[0.0]).unwrap(), 0.25);
        assert_eq!(weighted_knn_predict(&idx, &plan, &[0.0]).unwrap(), 0);
    }

    #[test]
    fn zero_source_neighbors_is_plain_knn() {
        let p = line(&[(0.0, 1), (0.01, 1), (0.02, 1)]);
        let q = line(&[(0.0, 0), (0.3, 1), (0.4, 1), (0.6, 0), (0.9, 1)]);
        let ds = TransferDataset::new(p, q).unwrap();
        let idx = TransferIndex::build(&ds);
        for k in 1..=5 {
            let plan = KnnPlan {
                k_p: 0,
                k_q: k,
                w_p: 123.0,
                w_q: 0.7,
            };
            for x in [0.0, 0.35, 0.7, 1.0] {
                assert_eq!(
                    weighted_knn_predict(&idx, &plan, &[x]).unwrap(),
                    knn_predict(&idx.q, k, &[x]).unwrap()
                );
            }
        }
    }

    #[test]
    fn plan_too_large() {
        let ds = TransferDataset::new(line(&[(0.0, 1)]), line(&[(0.5, 1)])).unwrap();
        let idx = TransferIndex::build(&ds);
        let plan = KnnPlan {
            k_p: 2,
            k_q: 1,
            w_p: 1.0,
            w_q: 1.0,
        };
        assert!(matches!(
            weighted_knn_predict(&idx, &plan, &[0.0]),
            Err(Error::PlanExceedsSample { .. })
        ));
    }

    #[test]
    fn multisource_hand_example() {
        // P1 = {0.0:1, 0.2:0}, P2 = {0.1:1}, Q = {0.05:0, 0.3:0}
        // plan: k_P1 = 2 (w 1), k_P2 = 1 (w 3), k_Q = 2 (w 2)
        // η = (2·0 + 1·1 + 3·1) / (2·2 + 1·2 + 3·1) = 4/9 → 0.
        let mds = MultiSourceDataset::new(
            vec![line(&[(0.0, 1), (0.2, 0)]), line(&[(0.1, 1)])],
            line(&[(0.05, 0), (0.3, 0)]),
        )
        .unwrap();
        let idx = MultiSourceIndex::build(&mds);
        let plan = MultiKnnPlan {
            k_sources: vec![2, 1],
            w_sources: vec![1.0, 3.0],
            k_q: 2,
            w_q: 2.0,
        };
        let eta = multisource_weighted_estimate(&idx, &plan, &[0.0]).unwrap();
        assert!((eta - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(
            multisource_weighted_predict(&idx, &plan, &[0.0]).unwrap(),
            0
        );
        let plan = MultiKnnPlan {
            w_sources: vec![1.0, 9.0],
            ..plan
        };
        // (0 + 1 + 9) / (4 + 2 + 9) = 10/15 → 1.
        assert_eq!(
            multisource_weighted_predict(&idx, &plan, &[0.0]).unwrap(),
            1
        );
    }
}
