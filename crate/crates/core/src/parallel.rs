use rayon::prelude::*;

/// Order-preserving map; runs on a dedicated pool of `threads` workers when `threads > 1`.
pub(crate) fn map_ordered<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    if threads <= 1 || items.len() < 2 {
        return items.into_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.into_par_iter().map(&f).collect()),
        Err(_) => items.into_iter().map(f).collect(),
    }
}
