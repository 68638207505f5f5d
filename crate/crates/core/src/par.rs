//! Data-parallel mapping with a sequential fallback.
//!
//! With the `parallel` feature (default) work runs on a rayon pool; without
//! it, or when `serial` is requested, on one thread. Either way results come
//! back in index order. Worker threads get large stacks because the engine
//! recurses once per proof step.

use std::thread;

pub const STACK_SIZE: usize = 64 << 20;

/// Runs `f` on a thread with a large stack.
pub fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    thread::scope(|s| {
        thread::Builder::new()
            .stack_size(STACK_SIZE)
            .spawn_scoped(s, f)
            .expect("spawn worker thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// `f(0), .., f(n-1)` in order.
pub fn map_indices<T, F>(n: usize, serial: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !serial {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().stack_size(STACK_SIZE).build() {
            return pool.install(|| (0..n).into_par_iter().map(&f).collect());
        }
    }
    let _ = serial;
    with_big_stack(|| (0..n).map(&f).collect())
}

/// Maps over a slice, keeping order.
pub fn map<I, T, F>(items: &[I], serial: bool, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indices(items.len(), serial, |i| f(&items[i]))
}

/// Whether parallel execution is compiled in.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let a = map_indices(100, false, |i| i * i);
        let b = map_indices(100, true, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }

    #[test]
    fn deep_recursion_fits() {
        fn depth(n: u32) -> u32 {
            if n == 0 {
                0
            } else {
                1 + depth(n - 1)
            }
        }
        assert_eq!(with_big_stack(|| depth(100_000)), 100_000);
    }
}
