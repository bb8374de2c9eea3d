//! Execution policy for the data-parallel loops (Monte Carlo trials,
//! experiment cells, oracle subsets, diameters).
//!
//! Results are always collected in index order, so the output of every
//! routine is identical under either policy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// falls back to sequential execution.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let seq = Execution::Sequential.map_range(1000, |i| (i * i) % 97);
        let par = Execution::Parallel.map_range(1000, |i| (i * i) % 97);
        assert_eq!(seq, par);
        let items: Vec<u32> = (0..50).collect();
        assert_eq!(
            Execution::Sequential.map_slice(&items, |x| x + 1),
            Execution::Parallel.map_slice(&items, |x| x + 1)
        );
    }
}
