//! Worker-count control for the data-parallel operators.

use crate::error::{config_err, Result};

/// Run `f` on a dedicated pool of `workers` threads. Results do not depend
/// on the worker count: every parallel reduction in the crate combines
/// partial results in a fixed order.
pub fn with_workers<R, F>(workers: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if workers == 0 {
        return Err(config_err("worker count must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| config_err(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_size_is_applied() {
        assert_eq!(with_workers(3, rayon::current_num_threads).unwrap(), 3);
        assert!(with_workers(0, || ()).is_err());
    }
}
