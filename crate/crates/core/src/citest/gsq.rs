use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{check_query, CiError, CiTester, CiVerdict, Columns, Dataset};
use crate::vertex_set::VertexSet;

/// Likelihood-ratio G² test on discrete data.
///
/// Degrees of freedom are `(|A|-1)(|B|-1)` times the number of strata of
/// the conditioning set that actually occur in the data.
#[derive(Debug)]
pub struct GSquare {
    codes: Vec<Vec<u32>>,
    cardinality: Vec<usize>,
    /// Variables taking a single observed value.
    constant: Vec<bool>,
    rows: usize,
    alpha: f64,
    min_cell_expectation: f64,
    degenerate: AtomicUsize,
}

impl GSquare {
    pub fn new(data: &Dataset, alpha: f64, min_cell_expectation: f64) -> Result<Self, CiError> {
        let Columns::Discrete { codes, cardinality } = data.columns() else {
            return Err(CiError::WrongKind {
                backend: "G² test",
                expected: "discrete",
            });
        };
        let constant = codes.iter().map(|c| c.iter().all(|&x| Some(&x) == c.first())).collect();
        Ok(GSquare {
            codes: codes.clone(),
            cardinality: cardinality.clone(),
            constant,
            rows: data.rows(),
            alpha,
            min_cell_expectation,
            degenerate: AtomicUsize::new(0),
        })
    }

    /// Statistic and degrees of freedom, without the degeneracy checks.
    pub fn statistic(&self, a: usize, b: usize, cond: VertexSet) -> (f64, usize) {
        let (ra, rb) = (self.cardinality[a], self.cardinality[b]);
        let cond: Vec<usize> = cond.iter().collect();
        let mut strata: BTreeMap<u128, Vec<u32>> = BTreeMap::new();
        for r in 0..self.rows {
            let key = cond
                .iter()
                .fold(0u128, |acc, &c| acc * self.cardinality[c] as u128 + self.codes[c][r] as u128);
            let table = strata.entry(key).or_insert_with(|| vec![0; ra * rb]);
            table[self.codes[a][r] as usize * rb + self.codes[b][r] as usize] += 1;
        }
        let mut g = 0.0;
        for table in strata.values() {
            let n: f64 = table.iter().map(|&x| x as f64).sum();
            let row: Vec<f64> = (0..ra).map(|i| table[i * rb..(i + 1) * rb].iter().map(|&x| x as f64).sum()).collect();
            let col: Vec<f64> = (0..rb).map(|j| (0..ra).map(|i| table[i * rb + j] as f64).sum()).collect();
            for i in 0..ra {
                for j in 0..rb {
                    let o = table[i * rb + j] as f64;
                    if o > 0.0 {
                        g += o * (o * n / (row[i] * col[j])).ln();
                    }
                }
            }
        }
        let dof = (ra - 1) * (rb - 1) * strata.len();
        ((2.0 * g).max(0.0), dof)
    }

    fn cells(&self, a: usize, b: usize, cond: VertexSet) -> f64 {
        cond.iter()
            .map(|c| self.cardinality[c] as f64)
            .product::<f64>()
            * (self.cardinality[a] * self.cardinality[b]) as f64
    }
}

impl CiTester for GSquare {
    fn n_vars(&self) -> usize {
        self.codes.len()
    }

    fn test(&self, a: usize, b: usize, cond: VertexSet) -> Result<CiVerdict, CiError> {
        check_query(self.codes.len(), a, b, cond)?;
        let sparse = self.min_cell_expectation > 0.0
            && (self.rows as f64) / self.cells(a, b, cond) < self.min_cell_expectation;
        if self.constant[a] || self.constant[b] || self.rows == 0 || sparse {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
            log::debug!("G² degenerate for {a}, {b} given {cond:?}");
            return Ok(CiVerdict::by_convention());
        }
        let (g, dof) = self.statistic(a, b, cond);
        if dof == 0 {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
            return Ok(CiVerdict::by_convention());
        }
        let p = ChiSquared::new(dof as f64).expect("positive dof").sf(g);
        Ok(CiVerdict::from_p(g, p, self.alpha))
    }

    fn degenerate_count(&self) -> usize {
        self.degenerate.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn names(n: usize) -> Arc<[String]> {
        (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>().into()
    }

    fn table_data(counts: [[usize; 2]; 2]) -> Dataset {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..2 {
            for j in 0..2 {
                for _ in 0..counts[i][j] {
                    a.push(i as u32);
                    b.push(j as u32);
                }
            }
        }
        Dataset::discrete(names(2), vec![a, b], None).unwrap()
    }

    #[test]
    fn hand_computed_two_by_two() {
        // expected counts 12 18 28 42
        let t = GSquare::new(&table_data([[10, 20], [30, 40]]), 0.05, 0.0).unwrap();
        let v = t.test(0, 1, VertexSet::EMPTY).unwrap();
        assert!((v.statistic - 0.804_348_646_096_483_5).abs() < 1e-12);
        assert!((v.p_value - 0.369_796_367_929_896_45).abs() < 1e-9);
        assert!(v.independent);
        let flipped = t.test(1, 0, VertexSet::EMPTY).unwrap();
        assert!((flipped.statistic - v.statistic).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_independent_by_convention() {
        let d = Dataset::discrete(names(3), vec![vec![0, 1, 0, 1], vec![1, 1, 1, 1], vec![0, 1, 1, 0]], None).unwrap();
        let t = GSquare::new(&d, 0.05, 0.0).unwrap();
        for (a, b, c) in [(0, 1, VertexSet::EMPTY), (1, 2, VertexSet::singleton(0)), (2, 1, VertexSet::EMPTY)] {
            let v = t.test(a, b, c).unwrap();
            assert!(v.independent && v.degenerate);
        }
        assert_eq!(t.degenerate_count(), 3);
    }

    #[test]
    fn perfect_dependence_is_rejected() {
        let t = GSquare::new(&table_data([[50, 0], [0, 50]]), 0.05, 0.0).unwrap();
        let v = t.test(0, 1, VertexSet::EMPTY).unwrap();
        assert!(!v.independent);
        assert!((v.statistic - 200.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn stratified_dof_counts_occupied_strata() {
        // c takes values 0 and 2 only, so of three strata two are occupied
        let d = Dataset::discrete(
            names(3),
            vec![vec![0, 1, 0, 1], vec![0, 1, 1, 0], vec![0, 0, 2, 2]],
            Some(vec![2, 2, 3]),
        )
        .unwrap();
        let t = GSquare::new(&d, 0.05, 0.0).unwrap();
        assert_eq!(t.statistic(0, 1, VertexSet::singleton(2)).1, 2);
        assert!(t.test(0, 1, VertexSet::singleton(2)).unwrap().independent);
        let guarded = GSquare::new(&d, 0.05, 5.0).unwrap();
        assert!(guarded.test(0, 1, VertexSet::EMPTY).unwrap().degenerate);
    }

    #[test]
    fn rejects_continuous_data() {
        let d = Dataset::continuous(names(1), vec![vec![0.5]]).unwrap();
        assert!(matches!(GSquare::new(&d, 0.05, 0.0), Err(CiError::WrongKind { .. })));
    }
}
