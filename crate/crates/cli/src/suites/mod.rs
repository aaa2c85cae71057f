//! Suite runners. Each returns a [`Report`] whose records are ordered by
//! seed and instance, independent of thread scheduling.

pub mod definetti;
pub mod repetition;
pub mod separability;

use crate::report::Report;
use definetti_core::{DimCap, Result};
use rayon::prelude::*;

/// Settings shared by every suite.
#[derive(Clone, Copy, Debug)]
pub struct Context {
    pub seed: u64,
    pub cap: DimCap,
    /// Overrides the suite's main tolerance.
    pub tol: Option<f64>,
}

impl Context {
    pub fn new(seed: u64) -> Self {
        Self { seed, cap: DimCap::default(), tol: None }
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

/// Maps `f` over `0..count` in parallel, keeping index order.
pub(crate) fn par_map<T: Send>(count: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count).into_par_iter().map(f).collect()
}

pub(crate) fn flatten(suite: &str, seed: u64, groups: Vec<Vec<crate::report::Record>>) -> Report {
    Report::new(suite, seed, groups.into_iter().flatten().collect())
}
