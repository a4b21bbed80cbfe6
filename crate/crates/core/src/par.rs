//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here splits its index range with a fixed binary tree, so
//! the floating-point summation order of a result never depends on the number
//! of worker threads or on whether the `parallel` feature is enabled.

use std::ops::Range;

/// How an operation distributes its inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// behaves exactly like [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn join<A, B, RA, RB>(exec: Execution, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return rayon::join(a, b);
    }
    let _ = exec;
    (a(), b())
}

/// Maps `f` over `range` and collects in index order.
pub(crate) fn map_range<T, F>(exec: Execution, range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Pairwise (cascade) reduction over `range`.
///
/// Ranges of at most `leaf` indices are handed to `leaf_fn`; partial results
/// are merged bottom-up with `combine` along a split tree that depends only on
/// the range and `leaf`.
pub(crate) fn pairwise_reduce<T, L, C>(
    exec: Execution,
    range: Range<usize>,
    leaf: usize,
    leaf_fn: &L,
    combine: &C,
) -> T
where
    T: Send,
    L: Fn(Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    let len = range.end - range.start;
    if len <= leaf.max(1) {
        return leaf_fn(range);
    }
    let mid = range.start + len / 2;
    let (lo, hi) = join(
        exec,
        || pairwise_reduce(exec, range.start..mid, leaf, leaf_fn, combine),
        || pairwise_reduce(exec, mid..range.end, leaf, leaf_fn, combine),
    );
    combine(lo, hi)
}

/// Pairwise sum of a slice; deterministic and O(log n) error growth.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_reduce_matches_across_modes() {
        let data: Vec<f64> = (0..10_007).map(|i| (i as f64 * 0.37).sin() / (1.0 + i as f64)).collect();
        let leaf = |r: Range<usize>| data[r].iter().sum::<f64>();
        let add = |a: f64, b: f64| a + b;
        let seq = pairwise_reduce(Execution::Sequential, 0..data.len(), 64, &leaf, &add);
        let par = pairwise_reduce(Execution::Parallel, 0..data.len(), 64, &leaf, &add);
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn map_range_keeps_order() {
        let v = map_range(Execution::Parallel, 0..100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn pairwise_sum_small_and_large() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        let ones = vec![1.0; 1000];
        assert_eq!(pairwise_sum(&ones), 1000.0);
    }
}
