use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Scalar;

use super::squared_distance;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node<T> {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: T,
        left: usize,
        right: usize,
    },
}

/// Exact kd-tree over a flat coordinate buffer.
///
/// Points are stored permuted into leaf order; `order[i]` maps a slot back to
/// the caller's index.
#[derive(Debug, Clone)]
pub(crate) struct KdTree<T> {
    d: usize,
    coords: Vec<T>,
    order: Vec<usize>,
    nodes: Vec<Node<T>>,
}

/// Heap entry ordered by (squared distance, index).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate<T> {
    pub sq: T,
    pub index: usize,
}

impl<T: Scalar> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Candidate<T> {}

impl<T: Scalar> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq
            .partial_cmp(&other.sq)
            .expect("distances are finite")
            .then(self.index.cmp(&other.index))
    }
}

impl<T: Scalar> KdTree<T> {
    pub fn build<'a>(d: usize, points: impl ExactSizeIterator<Item = &'a [T]>) -> Self {
        let n = points.len();
        let mut coords = Vec::with_capacity(n * d);
        for p in points {
            coords.extend_from_slice(p);
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            Self::split(d, &coords, &mut order, 0, n, &mut nodes);
        }
        let coords = order
            .iter()
            .flat_map(|&i| coords[i * d..(i + 1) * d].iter().copied())
            .collect();
        Self {
            d,
            coords,
            order,
            nodes,
        }
    }

    fn split(
        d: usize,
        coords: &[T],
        order: &mut [usize],
        start: usize,
        end: usize,
        nodes: &mut Vec<Node<T>>,
    ) -> usize {
        let id = nodes.len();
        if end - start <= LEAF_SIZE {
            nodes.push(Node::Leaf { start, end });
            return id;
        }
        // Split on the dimension of widest spread.
        let slice = &order[start..end];
        let mut dim = 0;
        let mut widest = T::neg_infinity();
        for j in 0..d {
            let (lo, hi) = slice
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &i| {
                    let v = coords[i * d + j];
                    (lo.min(v), hi.max(v))
                });
            if hi - lo > widest {
                widest = hi - lo;
                dim = j;
            }
        }
        if !(widest > T::zero()) {
            // All points coincide.
            nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = (end - start) / 2;
        order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            coords[a * d + dim]
                .partial_cmp(&coords[b * d + dim])
                .expect("finite")
        });
        let value = coords[order[start + mid] * d + dim];
        nodes.push(Node::Leaf { start, end });
        let left = Self::split(d, coords, order, start, start + mid, nodes);
        let right = Self::split(d, coords, order, start + mid, end, nodes);
        nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` smallest (squared distance, index) pairs, ascending.
    pub fn knn(&self, x: &[T], k: usize) -> Vec<Candidate<T>> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.visit(0, x, k, &mut heap);
        heap.into_sorted_vec()
    }

    fn visit(&self, node: usize, x: &[T], k: usize, heap: &mut BinaryHeap<Candidate<T>>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let p = &self.coords[slot * self.d..(slot + 1) * self.d];
                    let cand = Candidate {
                        sq: squared_distance(p, x),
                        index: self.order[slot],
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("nonempty") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = x[dim] - value;
                // Points equal to the split value may sit on either side.
                let (near, far) = if diff < T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.visit(near, x, k, heap);
                let plane = diff * diff;
                // `<=` keeps equal-distance candidates with smaller indices reachable.
                if heap.len() < k || plane <= heap.peek().expect("nonempty").sq {
                    self.visit(far, x, k, heap);
                }
            }
        }
    }
}
