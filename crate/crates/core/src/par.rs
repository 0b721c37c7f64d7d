//! Execution strategy for the data-parallel loops (Monte Carlo trials, grid
//! sweeps). Results are collected in index order, so output never depends on
//! the strategy or the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    /// Rayon work-stealing. Falls back to sequential when the crate is built
    /// without the `parallel` feature.
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    /// `(0..n).map(f).collect()`, possibly in parallel.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Like [`Self::map_slice`] but stops at the first error (by index).
    pub fn try_map_slice<S, T, E, F>(self, items: &[S], f: F) -> Result<Vec<T>, E>
    where
        S: Sync,
        T: Send,
        E: Send,
        F: Fn(&S) -> Result<T, E> + Sync + Send,
    {
        self.map_slice(items, f).into_iter().collect()
    }
}
