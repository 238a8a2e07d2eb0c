//! Per-point evaluation on a rayon pool. Terms come back in input order and
//! the reduction stays in the core crate, so results match [`Serial`] bit
//! for bit.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use sextic_pinn_core::loss::{PointExecutor, PointTerm, Serial};
use sextic_pinn_core::Result;

/// Environment variable capping the worker count. `0` or unset means serial.
pub const THREADS_ENV: &str = "SEXTIC_PINN_THREADS";

pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    pub fn new(threads: usize) -> std::result::Result<Self, String> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl PointExecutor for Pool {
    fn map_points(&self, points: &[f64], term: &(dyn Fn(f64) -> Result<PointTerm> + Sync)) -> Result<Vec<PointTerm>> {
        self.pool.install(|| points.par_iter().map(|&x| term(x)).collect())
    }
}

/// Serial or pooled, chosen at run time.
pub enum Executor {
    Serial(Serial),
    Pool(Pool),
}

impl Executor {
    pub fn with_threads(threads: usize) -> std::result::Result<Self, String> {
        if threads == 0 {
            Ok(Executor::Serial(Serial))
        } else {
            Pool::new(threads).map(Executor::Pool)
        }
    }

    /// Reads [`THREADS_ENV`].
    pub fn from_env() -> std::result::Result<Self, String> {
        match std::env::var(THREADS_ENV) {
            Err(std::env::VarError::NotPresent) => Ok(Executor::Serial(Serial)),
            Err(e) => Err(format!("{THREADS_ENV}: {e}")),
            Ok(v) => {
                let n = v.trim().parse::<usize>().map_err(|_| format!("{THREADS_ENV}: expected a count, got `{v}`"))?;
                Self::with_threads(n)
            }
        }
    }
}

impl PointExecutor for Executor {
    fn map_points(&self, points: &[f64], term: &(dyn Fn(f64) -> Result<PointTerm> + Sync)) -> Result<Vec<PointTerm>> {
        match self {
            Executor::Serial(s) => s.map_points(points, term),
            Executor::Pool(p) => p.map_points(points, term),
        }
    }
}
