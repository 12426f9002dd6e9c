//! Data-parallel map helpers with a sequential fallback.
//!
//! Scans over grid samples, edges and random corpora are expressed as
//! index maps `0..n -> T`. With the `parallel` feature the map runs on
//! rayon; without it the same closure runs on one thread. The output
//! vector is indexed, so any follow-up reduction (max, lexicographic
//! sum) is performed sequentially by the caller and the result is
//! bitwise independent of the evaluation order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference version of [`map_indexed`], kept available for
/// benchmarking the parallel path against single-threaded execution.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maximum of a slice of finite residuals, 0 for an empty slice.
pub fn max_residual(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, &v| acc.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let f = |i: usize| (i as f64).sin() * 1.0e-3 + (i as f64).sqrt();
        let a = map_indexed(1000, f);
        let b = map_indexed_seq(1000, f);
        assert_eq!(a, b);
    }

    #[test]
    fn max_residual_of_empty_is_zero() {
        assert_eq!(max_residual(&[]), 0.0);
    }
}
