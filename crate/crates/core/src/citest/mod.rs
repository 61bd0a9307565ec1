//! Conditional-independence testing: a d-separation oracle and two data
//! backends (G² for discrete data, Fisher-z for Gaussian data), plus
//! caching and counting wrappers.

mod data;
mod fisherz;
mod gsq;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use thiserror::Error;

use crate::graphs::MixedGraph;
use crate::separation::is_separated;
use crate::vertex_set::VertexSet;

pub use data::{Columns, DataKind, Dataset};
pub use fisherz::FisherZ;
pub use gsq::GSquare;

#[derive(Debug, Error)]
pub enum CiError {
    #[error("malformed dataset: {0}")]
    Shape(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{backend} needs {expected} data")]
    WrongKind { backend: &'static str, expected: &'static str },
    #[error("invalid query: variables {a}, {b} with conditioning set {cond:?}")]
    InvalidQuery { a: usize, b: usize, cond: VertexSet },
    #[error("singular correlation matrix for {a}, {b} given {cond:?}")]
    Singular { a: usize, b: usize, cond: VertexSet },
    #[error("significance level must lie in (0, 1), got {0}")]
    Alpha(f64),
}

/// Outcome of one test. Data backends set `independent` iff `p_value >= alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiVerdict {
    pub independent: bool,
    pub statistic: f64,
    pub p_value: f64,
    /// Set when the verdict is independence by convention (constant
    /// variable, no degrees of freedom, too few rows).
    pub degenerate: bool,
}

impl CiVerdict {
    fn from_p(statistic: f64, p_value: f64, alpha: f64) -> Self {
        CiVerdict {
            independent: p_value >= alpha,
            statistic,
            p_value,
            degenerate: false,
        }
    }

    fn by_convention() -> Self {
        CiVerdict {
            independent: true,
            statistic: 0.0,
            p_value: 1.0,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CiBackend {
    #[default]
    Oracle,
    GSquare,
    FisherZ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiTestConfig {
    pub alpha: f64,
    /// G² treats a query as degenerate when the mean expected count per cell
    /// of the full contingency table falls below this. Zero disables it.
    pub min_cell_expectation: f64,
    pub backend: CiBackend,
}

impl Default for CiTestConfig {
    fn default() -> Self {
        CiTestConfig {
            alpha: 0.05,
            min_cell_expectation: 0.0,
            backend: CiBackend::Oracle,
        }
    }
}

impl CiTestConfig {
    pub fn validate(&self) -> Result<(), CiError> {
        if self.alpha > 0.0 && self.alpha < 1.0 {
            Ok(())
        } else {
            Err(CiError::Alpha(self.alpha))
        }
    }
}

/// A conditional-independence test over variables `0..n_vars()`.
pub trait CiTester: Sync {
    fn n_vars(&self) -> usize;

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError>;

    /// Number of degenerate verdicts issued so far, for backends that track it.
    fn degenerate_count(&self) -> usize {
        0
    }

    fn independent(&self, a: usize, b: usize, cond: VertexSet) -> Result<bool, CiError> {
        Ok(self.test(a, b, cond)?.independent)
    }
}

impl<T: CiTester + ?Sized> CiTester for &T {
    fn n_vars(&self) -> usize {
        (**self).n_vars()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        (**self).test(a, b, cond)
    }

    fn degenerate_count(&self) -> usize {
        (**self).degenerate_count()
    }
}

impl<T: CiTester + ?Sized + Send> CiTester for Box<T> {
    fn n_vars(&self) -> usize {
        (**self).n_vars()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        (**self).test(a, b, cond)
    }

    fn degenerate_count(&self) -> usize {
        (**self).degenerate_count()
    }
}

pub(crate) fn check_query(n: usize, a: usize, b: usize, cond: VertexSet) -> Result<(), CiError> {
    if a == b || a >= n || b >= n || cond.contains(a) || cond.contains(b) || cond.iter().any(|c| c >= n) {
        return Err(CiError::InvalidQuery { a, b, cond });
    }
    Ok(())
}

/// Answers queries by m-separation in a known graph.
#[derive(Debug, Clone)]
pub struct OracleTester {
    truth: MixedGraph,
}

impl OracleTester {
    pub fn new(truth: MixedGraph) -> Self {
        OracleTester { truth }
    }

    pub fn truth(&self) -> &MixedGraph {
        &self.truth
    }
}

impl CiTester for OracleTester {
    fn n_vars(&self) -> usize {
        self.truth.n()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        check_query(self.truth.n(), a, b, cond)?;
        let sep = is_separated(&self.truth, a, b, cond);
        Ok(CiVerdict {
            independent: sep,
            statistic: 0.0,
            p_value: if sep { 1.0 } else { 0.0 },
            degenerate: false,
        })
    }
}

/// Memoizes verdicts by the canonical form of the query.
pub struct CachedTester<T> {
    inner: T,
    cache: RwLock<HashMap<(usize, usize, VertexSet), CiVerdict>>,
}

impl<T: CiTester> CachedTester<T> {
    pub fn new(inner: T) -> Self {
        CachedTester {
            inner,
            cache: RwLock::default(),
        }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    pub fn cached(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}

impl<T: CiTester> CiTester for CachedTester<T> {
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        let key = (a.min(b), a.max(b), cond);
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = self.inner.test(key.0, key.1, cond)?;
        self.cache.write().unwrap().insert(key, v);
        Ok(v)
    }

    fn degenerate_count(&self) -> usize {
        self.inner.degenerate_count()
    }
}

/// Counts queries and records the largest conditioning set seen.
pub struct CountingTester<T> {
    inner: T,
    queries: AtomicUsize,
    max_cond: AtomicUsize,
}

impl<T: CiTester> CountingTester<T> {
    pub fn new(inner: T) -> Self {
        CountingTester {
            inner,
            queries: AtomicUsize::new(0),
            max_cond: AtomicUsize::new(0),
        }
    }

    pub fn queries(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn max_cond_size(&self) -> usize {
        self.max_cond.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: CiTester> CiTester for CountingTester<T> {
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.max_cond.fetch_max(cond.len(), Ordering::Relaxed);
        self.inner.test(a, b, cond)
    }

    fn degenerate_count(&self) -> usize {
        self.inner.degenerate_count()
    }
}

/// Builds the data backend named in `config`.
pub fn data_tester(data: &Dataset, config: &CiTestConfig) -> Result<Box<dyn CiTester + Send>, CiError> {
    config.validate()?;
    match config.backend {
        CiBackend::GSquare => Ok(Box::new(GSquare::new(data, config.alpha, config.min_cell_expectation)?)),
        CiBackend::FisherZ => Ok(Box::new(FisherZ::new(data, config.alpha)?)),
        CiBackend::Oracle => Err(CiError::WrongKind {
            backend: "oracle",
            expected: "a truth graph instead of",
        }),
    }
}
