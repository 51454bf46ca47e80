//! Replication-level execution: a rayon pool when the `parallel` feature is
//! on, a plain loop otherwise.
//!
//! Results are always returned in index order, and every unit of work gets
//! its own RNG substream, so output does not depend on the worker count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Execution {
    Sequential,
    /// `workers == 0` means rayon's default (one per logical CPU).
    Parallel { workers: usize },
    #[default]
    Auto,
}

impl Execution {
    pub fn with_workers(workers: usize) -> Self {
        if workers == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Auto => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(*workers).build() {
                    Ok(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
                    Err(err) => {
                        log::warn!("thread pool unavailable ({err}); running sequentially");
                        (0..n).map(f).collect()
                    }
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..n).map(f).collect(),
        }
    }
}

/// Splits `total` Monte Carlo draws into fixed-size blocks. The block layout
/// depends only on `total` and `block`, never on the worker count.
pub fn blocks(total: usize, block: usize) -> Vec<(usize, usize)> {
    let block = block.max(1);
    (0..total.div_ceil(block))
        .map(|b| {
            let start = b * block;
            (start, (start + block).min(total))
        })
        .collect()
}
