use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{squared_distance, Neighbor, NeighborList};

/// Reference linear scan: sort every point by (squared distance, index).
pub fn brute_force_knn<T: Scalar>(
    set: &SampleSet<T>,
    x: &[T],
    k: usize,
) -> Result<NeighborList<T>> {
    if x.len() != set.d {
        return Err(Error::QueryDimension {
            expected: set.d,
            found: x.len(),
        });
    }
    let mut all: Vec<(T, usize)> = set
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (squared_distance(&s.x, x), i))
        .collect();
    let k = k.min(all.len());
    let cmp = |a: &(T, usize), b: &(T, usize)| {
        a.0.partial_cmp(&b.0)
            .expect("distances are finite")
            .then(a.1.cmp(&b.1))
    };
    if k < all.len() && k > 0 {
        all.select_nth_unstable_by(k - 1, cmp);
    }
    all.truncate(k);
    all.sort_unstable_by(cmp);
    Ok(NeighborList::new(
        all.into_iter()
            .map(|(sq, index)| Neighbor {
                index,
                distance: sq.sqrt(),
                sq_distance: sq,
                label: set.samples[index].y,
            })
            .collect(),
    ))
}
