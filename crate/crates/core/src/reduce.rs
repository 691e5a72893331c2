//! Deterministic summation.
//!
//! Every reduction in the crate goes through these helpers so that results
//! do not depend on the size of the rayon pool: partial sums are produced in
//! a fixed order and combined with a fixed binary tree.

use rayon::prelude::*;

const LEAF: usize = 16;

/// Pairwise (cascade) summation with a fixed tree shape.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluates `row(i)` for every `i` in `rows` in parallel and returns the
/// pairwise sum of the results. Each row is computed by a single thread, so
/// the result is bit-identical for any number of workers.
pub fn par_row_sum<F>(rows: &[usize], row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partial: Vec<f64> = rows.par_iter().map(|&i| row(i)).collect();
    pairwise_sum(&partial)
}

/// Sequential sum of `f(j)` over `cols`, in order.
#[inline]
pub fn seq_sum<F>(cols: &[usize], mut f: F) -> f64
where
    F: FnMut(usize) -> f64,
{
    let mut acc = 0.0;
    for &j in cols {
        acc += f(j);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_small_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn par_row_sum_independent_of_pool_size() {
        let rows: Vec<usize> = (0..5000).collect();
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| par_row_sum(&rows, f));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(7)
            .build()
            .unwrap()
            .install(|| par_row_sum(&rows, f));
        assert_eq!(one.to_bits(), many.to_bits());
    }
}
