//! Thread-pool executor. Work is split across threads but results come back
//! in index order, so the thread count never changes the output.

use netclust_core::Executor;
use rayon::prelude::*;

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `threads == 0` uses one thread per available core.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Pool { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, n: usize, f: &F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let pool = Pool::new(4).unwrap();
        assert_eq!(pool.map(100, &|i| i * i), (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
