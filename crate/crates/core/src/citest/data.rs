use std::io::{Read, Write};
use std::sync::Arc;

use super::CiError;

/// How to interpret the cells of a CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataKind {
    Discrete,
    Continuous,
    /// Discrete when every cell is a non-negative integer, else continuous.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Columns {
    /// Integer codes per variable, each in `0..cardinality[v]`.
    Discrete { codes: Vec<Vec<u32>>, cardinality: Vec<usize> },
    Continuous(Vec<Vec<f64>>),
}

/// Column-oriented samples with variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Arc<[String]>,
    columns: Columns,
    rows: usize,
}

impl Dataset {
    /// Cardinalities are taken as one more than the largest code unless given.
    pub fn discrete(names: Arc<[String]>, codes: Vec<Vec<u32>>, cardinality: Option<Vec<usize>>) -> Result<Self, CiError> {
        let rows = check_shape(&names, &codes)?;
        let cardinality = match cardinality {
            Some(c) => {
                if c.len() != names.len() {
                    return Err(CiError::Shape(format!("{} cardinalities for {} variables", c.len(), names.len())));
                }
                c
            }
            None => codes
                .iter()
                .map(|col| col.iter().max().map_or(1, |&m| m as usize + 1))
                .collect(),
        };
        for (v, col) in codes.iter().enumerate() {
            if let Some(&bad) = col.iter().find(|&&x| x as usize >= cardinality[v]) {
                return Err(CiError::Shape(format!(
                    "code {bad} of {} outside 0..{}",
                    names[v], cardinality[v]
                )));
            }
        }
        Ok(Dataset {
            names,
            columns: Columns::Discrete { codes, cardinality },
            rows,
        })
    }

    pub fn continuous(names: Arc<[String]>, values: Vec<Vec<f64>>) -> Result<Self, CiError> {
        let rows = check_shape(&names, &values)?;
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CiError::Shape("non-finite value".into()));
        }
        Ok(Dataset {
            names,
            columns: Columns::Continuous(values),
            rows,
        })
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &Columns {
        &self.columns
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.columns, Columns::Discrete { .. })
    }

    /// Reads a CSV whose first row holds the variable names.
    pub fn from_csv(reader: impl Read, kind: DataKind) -> Result<Self, CiError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(CiError::Shape(format!("row {} has {} fields, expected {}", i + 2, rec.len(), names.len())));
            }
            for (col, field) in cells.iter_mut().zip(rec.iter()) {
                col.push(field.to_string());
            }
        }
        let names: Arc<[String]> = names.into();
        let integral = cells.iter().flatten().all(|s| s.parse::<u32>().is_ok());
        let discrete = match kind {
            DataKind::Discrete => true,
            DataKind::Continuous => false,
            DataKind::Auto => integral,
        };
        if discrete {
            let codes = cells
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|s| s.parse::<u32>().map_err(|_| CiError::Shape(format!("not an integer code: {s:?}"))))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Dataset::discrete(names, codes, None)
        } else {
            let values = cells
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|s| s.parse::<f64>().map_err(|_| CiError::Shape(format!("not a number: {s:?}"))))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Dataset::continuous(names, values)
        }
    }

    pub fn to_csv(&self, writer: impl Write) -> Result<(), CiError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.names.iter())?;
        for r in 0..self.rows {
            let row: Vec<String> = match &self.columns {
                Columns::Discrete { codes, .. } => codes.iter().map(|c| c[r].to_string()).collect(),
                Columns::Continuous(values) => values.iter().map(|c| c[r].to_string()).collect(),
            };
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CiError::Io(e.to_string()))?;
        Ok(())
    }
}

fn check_shape<T>(names: &[String], cols: &[Vec<T>]) -> Result<usize, CiError> {
    if names.len() != cols.len() {
        return Err(CiError::Shape(format!("{} names for {} columns", names.len(), cols.len())));
    }
    let rows = cols.first().map_or(0, Vec::len);
    if cols.iter().any(|c| c.len() != rows) {
        return Err(CiError::Shape("columns differ in length".into()));
    }
    Ok(rows)
}
