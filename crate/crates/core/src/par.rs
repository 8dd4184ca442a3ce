//! Execution strategy for the data-parallel loops (brute-force oracles,
//! truth tables, per-partition rectangle enumeration, experiment cells).
//!
//! With the `parallel` feature the loops run on the rayon pool; without it
//! every strategy degrades to the sequential path. Results are always
//! assembled in input order, so both strategies produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Order-preserving map over `0..len`.
    pub fn map_range<R, F>(self, len: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..len).into_par_iter().map(f).collect(),
            _ => (0..len).map(f).collect(),
        }
    }

    /// Splits `0..len` into contiguous chunks, folds each chunk with `f`, and
    /// returns the per-chunk results in order.
    pub fn chunked<R, F>(self, len: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(std::ops::Range<u64>) -> R + Sync + Send,
    {
        const CHUNK: u64 = 1 << 12;
        let chunks = len.div_ceil(CHUNK);
        self.map_range(chunks, |c| f(c * CHUNK..((c + 1) * CHUNK).min(len)))
    }
}
