//! Minimal data-parallelism shim.
//!
//! The laboratory's hot loops (subset enumeration, optimizer restarts, scan
//! grids, randomized sweeps) are all map/reduce over independent items. With
//! the `parallel` feature they can run on rayon; without it the same calls
//! compile to plain sequential iteration. [`Parallelism::Sequential`] forces
//! the sequential path even in a parallel build so benchmarks can compare the
//! two on identical inputs.
//!
//! Results are bit-identical across modes: parallel callers collect per-item
//! outputs into a `Vec` indexed like the input (or reduce with exact
//! associative operations such as `min` with index tie-breaks), never with
//! order-dependent floating-point accumulation.

/// Execution mode for data-parallel operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Use rayon when the `parallel` feature is enabled, otherwise run
    /// sequentially.
    #[default]
    Auto,
    /// Always run sequentially.
    Sequential,
}

impl Parallelism {
    /// Whether this mode actually runs on the rayon pool in this build.
    pub fn is_parallel(self) -> bool {
        match self {
            Parallelism::Sequential => false,
            #[cfg(feature = "parallel")]
            Parallelism::Auto => true,
            #[cfg(not(feature = "parallel"))]
            Parallelism::Auto => false,
        }
    }
}

/// Map `f` over `0..n`, returning outputs in index order.
pub fn map_indexed<T, F>(mode: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Map `f` over a slice, returning outputs in input order.
pub fn map_slice<'a, T, U, F>(mode: Parallelism, items: &'a [T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&'a T) -> U + Sync + Send,
{
    map_indexed(mode, items.len(), |i| f(&items[i]))
}

/// Minimize `key` over `0..n`, returning `(argmin, key(argmin))`. Ties break
/// toward the smallest index, in both modes, so results are deterministic.
pub fn min_by_key<F>(mode: Parallelism, n: usize, key: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
        if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    }
    if n == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .map(|i| (i, key(i)))
                .reduce_with(better);
        }
    }
    let _ = mode;
    (0..n).map(|i| (i, key(i))).reduce(better)
}
