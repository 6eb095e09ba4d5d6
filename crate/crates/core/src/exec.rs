//! Data-parallel map facade.
//!
//! With the `parallel` feature (default) the slice maps run on rayon; without
//! it the same entry points degrade to sequential loops, so downstream code is
//! agnostic. `map_seq` is always sequential and exists so benchmarks can
//! compare both paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential reference path, independent of the feature flag.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_matches_seq() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.37).collect();
        let a = map(&xs, |x| x.sin() * x.cos());
        let b = map_seq(&xs, |x| x.sin() * x.cos());
        assert_eq!(a, b);
    }
}
