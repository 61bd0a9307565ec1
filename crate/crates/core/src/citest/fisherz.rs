use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_query, CiError, CiTester, CiVerdict, Columns, Dataset};
use crate::vertex_set::VertexSet;

/// Fisher-z test on the partial correlation of Gaussian data.
#[derive(Debug)]
pub struct FisherZ {
    corr: DMatrix<f64>,
    /// Variables with zero sample variance.
    constant: Vec<bool>,
    rows: usize,
    alpha: f64,
    degenerate: AtomicUsize,
}

impl FisherZ {
    pub fn new(data: &Dataset, alpha: f64) -> Result<Self, CiError> {
        let Columns::Continuous(values) = data.columns() else {
            return Err(CiError::WrongKind {
                backend: "Fisher-z test",
                expected: "continuous",
            });
        };
        let n = values.len();
        let rows = data.rows();
        let centered: Vec<Vec<f64>> = values
            .iter()
            .map(|col| {
                let mean = col.iter().sum::<f64>() / rows.max(1) as f64;
                col.iter().map(|x| x - mean).collect()
            })
            .collect();
        let sd: Vec<f64> = centered.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let constant: Vec<bool> = sd.iter().map(|&s| s <= 1e-12).collect();
        let corr = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else if constant[i] || constant[j] {
                0.0
            } else {
                centered[i].iter().zip(&centered[j]).map(|(x, y)| x * y).sum::<f64>() / (sd[i] * sd[j])
            }
        });
        Ok(FisherZ {
            corr,
            constant,
            rows,
            alpha,
            degenerate: AtomicUsize::new(0),
        })
    }

    /// Partial correlation of `a` and `b` given `cond`.
    pub fn partial_correlation(&self, a: usize, b: usize, cond: VertexSet) -> Result<f64, CiError> {
        let idx: Vec<usize> = [a, b].into_iter().chain(cond.iter()).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.corr[(idx[i], idx[j])]);
        let sv = sub.singular_values();
        if sv.min() <= 1e-10 * sv.max() {
            return Err(CiError::Singular { a, b, cond });
        }
        let p = sub.try_inverse().ok_or(CiError::Singular { a, b, cond })?;
        let r = -p[(0, 1)] / (p[(0, 0)] * p[(1, 1)]).sqrt();
        if !r.is_finite() {
            return Err(CiError::Singular { a, b, cond });
        }
        Ok(r)
    }
}

impl CiTester for FisherZ {
    fn n_vars(&self) -> usize {
        self.constant.len()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        check_query(self.constant.len(), a, b, cond)?;
        let dof = self.rows as f64 - cond.len() as f64 - 3.0;
        if self.constant[a] || self.constant[b] || dof <= 0.0 {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
            return Ok(CiVerdict::by_convention());
        }
        let r = self.partial_correlation(a, b, cond)?.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
        let z = dof.sqrt() * r.atanh();
        let p = 2.0 * Normal::standard().sf(z.abs());
        Ok(CiVerdict::from_p(z.abs(), p.min(1.0), self.alpha))
    }

    fn degenerate_count(&self) -> usize {
        self.degenerate.load(Ordering::Relaxed)
    }
}
