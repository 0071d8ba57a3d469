//! Work distribution. Results are always collected in job order, so any
//! executor yields the same output as [`Sequential`].

use alloc::vec::Vec;

/// Streams per job when fanning out Monte Carlo samples. Fixed so that the
/// reduction tree never depends on the worker count.
pub const STREAM_CHUNK: u64 = 4096;

pub trait Executor: Sync {
    /// Evaluates `f(0), ..., f(jobs - 1)` and returns the results in order.
    fn map_collect<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_collect<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..jobs).map(f).collect()
    }
}

/// Splits streams `0..n` into [`STREAM_CHUNK`]-sized ranges and maps each.
pub fn map_stream_chunks<E, T, F>(exec: &E, n: u64, f: F) -> Vec<T>
where
    E: Executor + ?Sized,
    T: Send,
    F: Fn(core::ops::Range<u64>) -> T + Sync,
{
    let jobs = n.div_ceil(STREAM_CHUNK) as usize;
    exec.map_collect(jobs, |j| {
        let lo = j as u64 * STREAM_CHUNK;
        f(lo..(lo + STREAM_CHUNK).min(n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_streams_in_order() {
        let parts = map_stream_chunks(&Sequential, 10_000, |r| (r.start, r.end));
        assert_eq!(parts, alloc::vec![(0, 4096), (4096, 8192), (8192, 10_000)]);
        assert!(map_stream_chunks(&Sequential, 0, |r| r).is_empty());
    }
}
