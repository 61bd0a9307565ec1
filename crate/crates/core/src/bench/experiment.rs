use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::generate::{random_dag, sample_discrete, sample_linear, BayesNet, LinearScm};
use super::score::{score, ReferenceMode, ScoreReport};
use super::BenchError;
use crate::citest::{data_tester, CiBackend, CiTestConfig, CiTester, Dataset};
use crate::graphs::Dag;
use crate::kpc::{kpc_learn, pc_stable_learn, KpcOptions, PcOptions, Step5Mode};
use crate::separation::{ConditioningBound, SearchScope};

pub const CSV_HEADER: [&str; 9] = [
    "instance",
    "dataset",
    "learner",
    "k",
    "N",
    "arrowhead_f1",
    "tail_f1",
    "skeleton_f1",
    "errors",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Kpc,
    Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataModel {
    #[default]
    Discrete,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeSetting {
    #[default]
    All,
    Neighbors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step5Setting {
    #[default]
    Single,
    Fixpoint,
    Off,
}

/// Experiment configuration, read from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub max_edges: usize,
    /// Number of random models.
    #[serde(alias = "repetitions")]
    pub instances: usize,
    /// Datasets drawn per model and sample size.
    #[serde(default = "default_datasets")]
    pub datasets: usize,
    pub samples: Vec<usize>,
    #[serde(default)]
    pub ks: Vec<usize>,
    pub learners: Vec<LearnerKind>,
    #[serde(default)]
    pub data: DataModel,
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default = "default_coef_range")]
    pub coef_range: (f64, f64),
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reference: ReferenceMode,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub min_cell_expectation: f64,
    #[serde(default)]
    pub scope: ScopeSetting,
    #[serde(default)]
    pub step5: Step5Setting,
    /// Discriminating-path rule in k-PC.
    #[serde(default = "default_r4")]
    pub r4: bool,
    /// Bound on PC-stable conditioning sets; unbounded when absent.
    #[serde(default)]
    pub pc_max_level: Option<usize>,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_datasets() -> usize {
    3
}

fn default_states() -> usize {
    2
}

fn default_coef_range() -> (f64, f64) {
    (-3.0, 3.0)
}

fn default_r4() -> bool {
    true
}

fn default_alpha() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        if self.max_edges > pairs {
            return Err(BenchError::Config(format!("max_edges {} exceeds {pairs}", self.max_edges)));
        }
        if self.learners.contains(&LearnerKind::Kpc) && self.ks.is_empty() {
            return Err(BenchError::Config("k-PC requested with an empty `ks` list".into()));
        }
        if self.data == DataModel::Discrete && self.states < 2 {
            return Err(BenchError::Config("`states` must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(BenchError::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.coef_range.0 > self.coef_range.1 {
            return Err(BenchError::Config("coef_range is empty".into()));
        }
        Ok(())
    }

    /// Learner runs per dataset: k-PC once per `k`, then PC-stable.
    fn runs(&self) -> Vec<(LearnerKind, Option<usize>)> {
        let mut out = Vec::new();
        for &l in &self.learners {
            match l {
                LearnerKind::Kpc => out.extend(self.ks.iter().map(|&k| (l, Some(k)))),
                LearnerKind::Pc => out.push((l, self.pc_max_level)),
            }
        }
        out
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub instance: usize,
    pub dataset: usize,
    pub learner: LearnerKind,
    pub k: Option<usize>,
    pub samples: usize,
    pub report: Option<ScoreReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    /// CI tests answered independent by convention.
    pub degenerate_tests: usize,
}

/// Random stream for instance `i`: stream 0 draws the model, stream `1 + j`
/// the `j`-th dataset.
fn rng_for(seed: u64, instance: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (instance as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

enum Model {
    Discrete(BayesNet),
    Linear(LinearScm),
}

impl Model {
    fn dag(&self) -> &Dag {
        match self {
            Model::Discrete(bn) => &bn.dag,
            Model::Linear(scm) => &scm.dag,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, BenchError> {
    config.validate()?;
    let runs = config.runs();
    let per_instance: Vec<(Vec<ExperimentRow>, usize)> = (0..config.instances)
        .into_par_iter()
        .map(|i| run_instance(config, &runs, i))
        .collect::<Result<_, _>>()?;
    let degenerate_tests = per_instance.iter().map(|(_, d)| d).sum();
    Ok(ExperimentOutput {
        rows: per_instance.into_iter().flat_map(|(r, _)| r).collect(),
        degenerate_tests,
    })
}

fn run_instance(config: &ExperimentConfig, runs: &[(LearnerKind, Option<usize>)], i: usize) -> Result<(Vec<ExperimentRow>, usize), BenchError> {
    let mut rng = rng_for(config.seed, i, 0);
    let dag = random_dag(config.n, config.max_edges, &mut rng)?;
    let model = match config.data {
        DataModel::Discrete => Model::Discrete(BayesNet::random(dag, config.states, &mut rng)),
        DataModel::Linear => Model::Linear(LinearScm::random(dag, config.coef_range.0, config.coef_range.1, &mut rng)),
    };
    let ci = CiTestConfig {
        alpha: config.alpha,
        min_cell_expectation: config.min_cell_expectation,
        backend: match config.data {
            DataModel::Discrete => CiBackend::GSquare,
            DataModel::Linear => CiBackend::FisherZ,
        },
    };
    let mut rows = Vec::new();
    let mut degenerate = 0;
    let mut stream = 1;
    for j in 0..config.datasets {
        for &rows_n in &config.samples {
            let mut drng = rng_for(config.seed, i, stream);
            stream += 1;
            let data = match &model {
                Model::Discrete(bn) => sample_discrete(bn, rows_n, &mut drng),
                Model::Linear(scm) => sample_linear(scm, rows_n, &mut drng),
            };
            for &(learner, k) in runs {
                let (report, error, degen) = match learn_and_score(config, &ci, &data, model.dag(), learner, k) {
                    Ok((r, d)) => (Some(r), None, d),
                    Err(e) => (None, Some(e.to_string()), 0),
                };
                degenerate += degen;
                rows.push(ExperimentRow {
                    instance: i,
                    dataset: j,
                    learner,
                    k,
                    samples: rows_n,
                    report,
                    error,
                });
            }
        }
    }
    Ok((rows, degenerate))
}

fn learn_and_score(
    config: &ExperimentConfig,
    ci: &CiTestConfig,
    data: &Dataset,
    truth: &Dag,
    learner: LearnerKind,
    k: Option<usize>,
) -> Result<(ScoreReport, usize), BenchError> {
    let tester = data_tester(data, ci)?;
    let names = data.names().clone();
    let graph = match learner {
        LearnerKind::Kpc => {
            let options = KpcOptions {
                scope: match config.scope {
                    ScopeSetting::All => SearchScope::AllSubsets,
                    ScopeSetting::Neighbors => SearchScope::NeighborSubsets,
                },
                step5: match config.step5 {
                    Step5Setting::Single => Step5Mode::Single,
                    Step5Setting::Fixpoint => Step5Mode::Fixpoint,
                    Step5Setting::Off => Step5Mode::Off,
                },
                r4: config.r4,
            };
            let bound = ConditioningBound::new(k.expect("k-PC runs carry k"));
            kpc_learn(&tester, names, bound, options)?.k_graph
        }
        LearnerKind::Pc => {
            let options = PcOptions {
                max_level: k,
                ..Default::default()
            };
            pc_stable_learn(&tester, names, options)?.graph
        }
    };
    Ok((score(&graph, truth, config.reference)?, tester.degenerate_count()))
}

pub fn write_csv(rows: &[ExperimentRow], out: impl Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let learner = match r.learner {
            LearnerKind::Kpc => "kpc",
            LearnerKind::Pc => "pc",
        };
        let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.instance.to_string(),
            r.dataset.to_string(),
            learner.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.samples.to_string(),
            f(r.report.map(|s| s.arrowhead_f1())),
            f(r.report.map(|s| s.tail_f1())),
            f(r.report.map(|s| s.skeleton_f1())),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::Io(e.to_string()))?;
    Ok(())
}
