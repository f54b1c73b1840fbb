//! Data-parallel helpers. With the `parallel` feature (default) the maps run on
//! rayon; without it they fall back to sequential iteration. Outputs preserve
//! input order in both modes, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map, parallel when the `parallel` feature is enabled.
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Always-sequential map, kept public so benchmarks can compare both paths.
pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Fallible order-preserving map; the first error wins deterministically
/// (errors are resolved by input position, not completion order).
pub fn try_map<T, U, F>(items: Vec<T>, f: F) -> crate::error::Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> crate::error::Result<U> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        let results: Vec<crate::error::Result<U>> = items.into_par_iter().map(f).collect();
        results.into_iter().collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
