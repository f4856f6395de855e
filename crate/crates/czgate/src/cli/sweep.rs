//! Order-preserving map over independent parameter points.

/// Evaluates `f` on every point in order, on the calling thread.
pub fn run_sequential<T, R, F>(points: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    points.iter().map(f).collect()
}

/// Evaluates `f` on every point using up to `jobs` worker threads
/// (0 = one per core). Output order matches input order.
#[cfg(feature = "parallel")]
pub fn run_parallel<T, R, F>(points: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| points.par_iter().map(&f).collect()),
        Err(_) => run_sequential(points, f),
    }
}

/// Dispatches to the worker pool when the `parallel` feature is enabled and
/// more than one job is requested.
pub fn run_points<T, R, F>(points: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs != 1 && points.len() > 1 {
            return run_parallel(points, jobs, f);
        }
    }
    let _ = jobs;
    run_sequential(points, f)
}
