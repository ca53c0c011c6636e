//! Replication-parallel execution.
//!
//! Replications run on a shared rayon pool whose size is capped by
//! `SPIKED_COV_THREADS` (default: logical cores). Results come back in
//! replication order regardless of scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{HarnessError, Result};

pub const THREADS_ENV: &str = "SPIKED_COV_THREADS";

static POOL: OnceLock<std::result::Result<rayon::ThreadPool, String>> = OnceLock::new();

/// Worker count requested through the environment, if any.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn pool() -> Result<&'static rayon::ThreadPool> {
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("spikecov-{i}"));
        if let Some(n) = configured_threads() {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| e.to_string())
    })
    .as_ref()
    .map_err(|e| HarnessError::Pool(e.clone()))
}

pub fn num_threads() -> usize {
    pool().map(|p| p.current_num_threads()).unwrap_or(1)
}

/// Runs `f(0..count)` in parallel and returns results in index order.
/// The first error (by index) wins.
pub fn run_indexed<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    pool()?.install(|| (0..count).into_par_iter().map(&f).collect::<Vec<_>>())
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_index_order() {
        let out = run_indexed(100, |i| Ok(i * i)).unwrap();
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn reports_lowest_failing_index() {
        let err = run_indexed(50, |i| {
            if i % 7 == 3 {
                Err(HarnessError::config("x", format!("{i}")))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert!(err.to_string().ends_with(": 3"));
    }
}
