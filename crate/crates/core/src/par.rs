//! Execution policy for the data-parallel loops (Monte Carlo trials,
//! sampled region checks, exhaustive sweeps).
//!
//! All parallel reductions here collect results in index order or merge them
//! with exact integer arithmetic, so the output never depends on the worker
//! count.

use serde::{Deserialize, Serialize};

/// Environment variable read by [`Execution::from_env`] for the worker count.
pub const WORKERS_ENV: &str = "GROUPCODE_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// `workers == 0` means the rayon default.
    Parallel {
        workers: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: 0 }
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `GROUPCODE_WORKERS=1` forces sequential execution, any other positive
    /// value sets the pool size.
    pub fn from_env() -> Self {
        match std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            Some(1) => Execution::Sequential,
            Some(w) => Execution::Parallel { workers: w },
            None => Execution::default(),
        }
    }

    pub fn with_workers(workers: usize) -> Self {
        if workers == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && matches!(self, Execution::Parallel { .. })
    }

    /// `f(0) .. f(n-1)`, in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match *self {
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => {
                use rayon::prelude::*;
                run_in_pool(workers, || (0..n).into_par_iter().map(&f).collect())
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fold `f(i)` for `i in 0..n` into accumulators merged with `merge`.
    /// `merge` must be associative and commutative for the result to be
    /// independent of the sharding.
    pub fn map_reduce<T, F, I, M>(&self, n: u64, identity: I, f: F, merge: M) -> T
    where
        T: Send,
        F: Fn(&mut T, u64) + Sync + Send,
        I: Fn() -> T + Sync + Send,
        M: Fn(T, T) -> T + Sync + Send,
    {
        match *self {
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => {
                use rayon::prelude::*;
                run_in_pool(workers, || {
                    (0..n)
                        .into_par_iter()
                        .fold(&identity, |mut acc, i| {
                            f(&mut acc, i);
                            acc
                        })
                        .reduce(&identity, &merge)
                })
            }
            _ => {
                let mut acc = identity();
                for i in 0..n {
                    f(&mut acc, i);
                }
                acc
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn run_in_pool<T: Send>(workers: usize, op: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_map_matches_sequential() {
        let f = |i: usize| i * i + 1;
        let a = Execution::Sequential.map_indexed(1000, f);
        let b = Execution::Parallel { workers: 3 }.map_indexed(1000, f);
        assert_eq!(a, b);
    }

    #[test]
    fn reduce_is_sharding_independent() {
        let run =
            |e: Execution| e.map_reduce(10_000, || 0u64, |acc, i| *acc += i * 7 % 13, |a, b| a + b);
        let s = run(Execution::Sequential);
        assert_eq!(s, run(Execution::Parallel { workers: 2 }));
        assert_eq!(s, run(Execution::Parallel { workers: 0 }));
    }

    #[test]
    fn worker_count_one_is_sequential() {
        assert_eq!(Execution::with_workers(1), Execution::Sequential);
    }
}
