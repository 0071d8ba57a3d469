//! A rayon-backed [`Executor`].

use rayon::prelude::*;
use slabperc_core::exec::Executor;

pub struct Rayon {
    pool: rayon::ThreadPool,
}

impl Rayon {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(Rayon { pool })
    }

    /// One worker per available core.
    pub fn available() -> Result<Self, rayon::ThreadPoolBuildError> {
        Rayon::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Rayon {
    fn map_collect<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        // indexed collect keeps job order
        self.pool.install(|| (0..jobs).into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use slabperc_core::exec::Sequential;

    #[test]
    fn matches_sequential() {
        let r = Rayon::new(4).unwrap();
        let f = |i: usize| i * i + 1;
        assert_eq!(r.map_collect(1000, f), Sequential.map_collect(1000, f));
        assert_eq!(r.workers(), 4);
    }
}
