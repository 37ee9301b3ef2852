//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) and `jobs > 1` the work runs on a
//! dedicated rayon pool of `jobs` threads; otherwise it runs in order on the
//! calling thread. Results always come back in index order.

/// Worker count for `jobs = 0`.
pub fn available_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn map_indexed<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let jobs = if jobs == 0 { available_jobs() } else { jobs };
    #[cfg(feature = "parallel")]
    if jobs > 1 && n > 1 {
        use rayon::prelude::*;
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.min(n)).build() {
            Ok(pool) => return pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(e) => log::warn!("could not start a {jobs}-thread pool ({e}); running sequentially"),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    (0..n).map(f).collect()
}
