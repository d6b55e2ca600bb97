//! Data-parallel loop helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these run on the rayon pool;
//! without it they are plain loops. Every helper is restricted to
//! element-wise writes or reductions whose combine step is exact
//! (integer sums, map unions), so results are identical for any thread
//! count, including one.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Build a vector where element `i` is `f(i)`.
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

/// Run `f` on every `chunk`-sized slice of `data` (last one may be short).
/// The first argument of `f` is the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Fold `chunk`-sized slices of `data` into per-chunk accumulators and
/// merge them. `fold` receives the chunk index alongside the slice;
/// `merge` must be associative and exact for determinism.
pub fn fold_chunks<T, A, I, F, M>(data: &[T], chunk: usize, init: I, fold: F, merge: M) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, usize, &[T]) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks(chunk)
            .enumerate()
            .fold(&init, |acc, (i, c)| fold(acc, i, c))
            .reduce(&init, merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = merge;
        data.chunks(chunk)
            .enumerate()
            .fold(init(), |acc, (i, c)| fold(acc, i, c))
    }
}

/// Map every element of `items` to a new value, preserving order.
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// True when the crate was built with the rayon backend.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
