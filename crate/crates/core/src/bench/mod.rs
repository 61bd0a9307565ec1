//! Synthetic benchmarks: random DAGs and parameters, forward sampling,
//! endpoint-mark F1 scores, and the experiment driver that writes one CSV
//! row per instance, dataset, learner and sample size.

mod experiment;
mod generate;
mod score;

use thiserror::Error;

use crate::citest::CiError;

pub use experiment::{
    run_experiment, write_csv, DataModel, ExperimentConfig, ExperimentOutput, ExperimentRow, LearnerKind, ScopeSetting, Step5Setting,
    CSV_HEADER,
};
pub use generate::{asia, default_names, random_dag, sample_discrete, sample_linear, BayesNet, LinearScm};
pub use score::{score, Counts, ReferenceMode, ScoreReport};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(String),
}
