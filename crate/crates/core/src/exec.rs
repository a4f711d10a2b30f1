//! Data-parallel map over slices.
//!
//! With the `parallel` feature (default) the work is spread over the rayon
//! pool, unless the pool has a single thread; without it everything runs on
//! the calling thread. Output order always matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if rayon::current_num_threads() <= 1 {
        return map_sequential(items, f);
    }
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// True when this build spreads work over threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
