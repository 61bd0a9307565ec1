use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Deserialize;

use super::BenchError;
use crate::citest::Dataset;
use crate::graphs::Dag;

pub fn default_names(n: usize) -> Arc<[String]> {
    (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>().into()
}

/// Random DAG over `x0..x{n-1}`: a uniformly random order, every forward
/// pair kept with probability `max_edges / C(n,2)`, then random edges
/// dropped until at most `max_edges` remain.
pub fn random_dag(n: usize, max_edges: usize, rng: &mut impl Rng) -> Result<Dag, BenchError> {
    let pairs = n * n.saturating_sub(1) / 2;
    if max_edges > pairs {
        return Err(BenchError::Config(format!("max_edges {max_edges} exceeds {pairs} possible edges on {n} vertices")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let p = if pairs == 0 { 0.0 } else { max_edges as f64 / pairs as f64 };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    while edges.len() > max_edges {
        let drop = rng.random_range(0..edges.len());
        edges.swap_remove(drop);
    }
    edges.sort_unstable();
    Ok(Dag::from_edges(default_names(n).iter().cloned(), &edges).expect("edges follow a topological order"))
}

/// Discrete Bayesian network. Row `r` of a CPT is the distribution of the
/// vertex given parent configuration `r`, encoded mixed-radix over the
/// parents in ascending index order, first parent most significant.
#[derive(Debug, Clone)]
pub struct BayesNet {
    pub dag: Dag,
    pub states: Vec<usize>,
    pub cpts: Vec<Vec<Vec<f64>>>,
}

impl BayesNet {
    pub fn new(dag: Dag, states: Vec<usize>, cpts: Vec<Vec<Vec<f64>>>) -> Result<Self, BenchError> {
        let n = dag.n();
        if states.len() != n || cpts.len() != n {
            return Err(BenchError::Model(format!("{n} vertices but {} state counts, {} CPTs", states.len(), cpts.len())));
        }
        for v in 0..n {
            let rows: usize = dag.parents(v).iter().map(|p| states[p]).product();
            if cpts[v].len() != rows {
                return Err(BenchError::Model(format!("CPT of {} has {} rows, expected {rows}", dag.name(v), cpts[v].len())));
            }
            for row in &cpts[v] {
                let sum: f64 = row.iter().sum();
                if row.len() != states[v] || row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(BenchError::Model(format!("CPT row of {} is not a distribution over {} states", dag.name(v), states[v])));
                }
            }
        }
        Ok(BayesNet { dag, states, cpts })
    }

    /// Every CPT row drawn uniformly from the simplex (normalized Exp(1) draws).
    pub fn random(dag: Dag, states: usize, rng: &mut impl Rng) -> Self {
        let n = dag.n();
        let cpts = (0..n)
            .map(|v| {
                let rows = states.pow(dag.parents(v).len() as u32);
                (0..rows)
                    .map(|_| {
                        let w: Vec<f64> = (0..states).map(|_| Exp1.sample(rng)).collect();
                        let s: f64 = w.iter().sum();
                        w.into_iter().map(|x| x / s).collect()
                    })
                    .collect()
            })
            .collect();
        BayesNet {
            dag,
            states: vec![states; n],
            cpts,
        }
    }

    /// Parameters from JSON of the form
    /// `{"states": {"v": 2, ..}, "cpts": {"v": [[p0, p1], ..], ..}}`.
    pub fn from_json(dag: Dag, json: &str) -> Result<Self, BenchError> {
        #[derive(Deserialize)]
        struct Raw {
            states: HashMap<String, usize>,
            cpts: HashMap<String, Vec<Vec<f64>>>,
        }
        let raw: Raw = serde_json::from_str(json).map_err(|e| BenchError::Model(e.to_string()))?;
        let mut states = Vec::new();
        let mut cpts = Vec::new();
        for name in dag.names().iter() {
            let missing = || BenchError::Model(format!("no parameters for {name}"));
            states.push(*raw.states.get(name).ok_or_else(missing)?);
            cpts.push(raw.cpts.get(name).ok_or_else(missing)?.clone());
        }
        BayesNet::new(dag, states, cpts)
    }
}

/// Linear Gaussian SCM: `x_v = Σ w[u][v] x_u + ε_v`, unit-variance noise.
#[derive(Debug, Clone)]
pub struct LinearScm {
    pub dag: Dag,
    /// `weights[u][v]` for each edge `u -> v`, zero elsewhere.
    pub weights: Vec<Vec<f64>>,
}

impl LinearScm {
    /// Coefficients uniform on `[lo, hi]`.
    pub fn random(dag: Dag, lo: f64, hi: f64, rng: &mut impl Rng) -> Self {
        let n = dag.n();
        let mut weights = vec![vec![0.0; n]; n];
        for (u, v) in dag.directed_edges() {
            weights[u][v] = rng.random_range(lo..=hi);
        }
        LinearScm { dag, weights }
    }
}

fn draw(dist: &[f64], rng: &mut impl Rng) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u32;
        }
    }
    // rounding left a sliver above the last cumulative sum
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
}

/// Forward sampling in topological order.
pub fn sample_discrete(bn: &BayesNet, rows: usize, rng: &mut impl Rng) -> Dataset {
    let n = bn.dag.n();
    let order = bn.dag.topo_order();
    let parents: Vec<Vec<usize>> = (0..n).map(|v| bn.dag.parents(v).to_vec()).collect();
    let mut codes = vec![vec![0u32; rows]; n];
    for r in 0..rows {
        for &v in &order {
            let cfg = parents[v].iter().fold(0usize, |acc, &p| acc * bn.states[p] + codes[p][r] as usize);
            codes[v][r] = draw(&bn.cpts[v][cfg], rng);
        }
    }
    Dataset::discrete(bn.dag.names().clone(), codes, Some(bn.states.clone())).expect("codes within state counts")
}

pub fn sample_linear(scm: &LinearScm, rows: usize, rng: &mut impl Rng) -> Dataset {
    let n = scm.dag.n();
    let order = scm.dag.topo_order();
    let mut values = vec![vec![0.0; rows]; n];
    for r in 0..rows {
        for &v in &order {
            let noise: f64 = StandardNormal.sample(rng);
            let x = scm.dag.parents(v).iter().map(|u| scm.weights[u][v] * values[u][r]).sum::<f64>() + noise;
            values[v][r] = x;
        }
    }
    Dataset::continuous(scm.dag.names().clone(), values).expect("finite samples")
}

/// Structure of the Asia network.
pub fn asia() -> Dag {
    let g = crate::graphs::parse_graph(include_str!("../../fixtures/asia.graph")).expect("fixture parses");
    Dag::from_pmg(g).expect("fixture is a DAG")
}
