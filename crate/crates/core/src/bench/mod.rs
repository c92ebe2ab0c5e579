//! Dataset generation and evaluation harness.

mod dataset;
mod metrics;

use thiserror::Error;

pub use dataset::{benchmark_world, default_initial_locations, generate_dataset, BenchmarkWorld, DatasetConfig, BENCHMARK_GAZETTEER_SIZE};
pub use metrics::{
    aggregate, evaluate_dataset, evaluate_problem, final_step_metrics, render_comparison, render_table, DatasetEvaluation,
    EvalOptions, MetricsReport, MetricsRow, ProblemEvaluation, ProblemMetrics, StepMetrics,
};

use crate::geo::GeoError;
use crate::planner::PlanError;
use crate::recognizer::RecognitionError;
use crate::roadnet::{NetworkError, PlaceError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid dataset config: {0}")]
    InvalidConfig(String),
    #[error("gazetteer has {available} usable entries for start {init}, {requested} requested")]
    GazetteerTooSmall { requested: usize, available: usize, init: String },
    #[error("no route from {from} to {to}: {source}")]
    Unreachable { from: String, to: String, source: PlanError },
    #[error("problem {problem_id:?}: {source}")]
    Problem { problem_id: String, source: RecognitionError },
    #[error("no problems to evaluate")]
    EmptyDataset,
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}
