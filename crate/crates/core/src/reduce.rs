//! Deterministic sums.
//!
//! The input is cut into fixed-size leaves, each leaf is summed left to right,
//! and the leaf sums are combined pairwise level by level. The combination
//! order depends only on the input length, never on the worker count.

use std::ops::Add;

use crate::team::{balanced_ranges, WorkerTeam};

/// Number of elements summed sequentially in one leaf.
pub const LEAF: usize = 256;

pub fn tree_sum<T>(values: &[T], team: &WorkerTeam) -> T
where
    T: Copy + Default + Add<Output = T> + Send + Sync,
{
    tree_sum_map(values, team, |v| v)
}

/// Pairwise sum of `map(v)` over `values`.
pub fn tree_sum_map<S, T, F>(values: &[S], team: &WorkerTeam, map: F) -> T
where
    S: Sync,
    T: Copy + Default + Add<Output = T> + Send + Sync,
    F: Fn(S) -> T + Sync + Send,
    S: Copy,
{
    if values.is_empty() {
        return T::default();
    }
    let leaves = values.len().div_ceil(LEAF);
    let groups = balanced_ranges(leaves, team.size().min(leaves));
    let per_group: Vec<Vec<T>> = team.gather(groups, |_, leaf_range| {
        leaf_range
            .map(|leaf| {
                let lo = leaf * LEAF;
                let hi = (lo + LEAF).min(values.len());
                values[lo..hi]
                    .iter()
                    .fold(T::default(), |acc, &v| acc + map(v))
            })
            .collect()
    });
    let mut level: Vec<T> = per_group.into_iter().flatten().collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| if pair.len() == 2 { pair[0] + pair[1] } else { pair[0] })
            .collect();
    }
    level[0]
}
