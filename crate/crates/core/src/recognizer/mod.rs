//! Mirroring recognizer: compares, for every candidate destination, the
//! ideal route from the start with the route forced through the observations
//! so far, and turns the agreement into a posterior over candidates.

mod problem;
mod scoring;
mod session;

use thiserror::Error;

pub use problem::{parse_problems, problems_to_json, solve_problem, trace_of, ProblemTrace, RecognitionProblem};
pub use scoring::{argmax_set, likelihood, posterior, score_epsilon, CandidateScore, RankedDistribution, TraceStep, ARGMAX_TIE_EPSILON};
pub use session::{create_session, Environment, Session};

pub use crate::roadnet::PlaceRef;

use crate::geo::GeoError;
use crate::planner::PlanError;
use crate::roadnet::PlaceError;

#[derive(Debug, Error)]
pub enum RecognitionError {
    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("{priors} priors but {likelihoods} likelihoods")]
    LengthMismatch { priors: usize, likelihoods: usize },
    #[error("priors must be probabilities summing to 1, got sum {0}")]
    PriorsNotNormalized(f64),
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("likelihood {0} outside (0, 1]")]
    InvalidLikelihood(f64),
    #[error("posterior normalization mass is zero")]
    ZeroMass,
    #[error("at least 2 intentions are required, got {0}")]
    TooFewIntentions(usize),
    #[error("intentions {first:?} and {second:?} share coordinates")]
    DuplicateIntention { first: String, second: String },
    #[error("intention {candidate:?} is unreachable from the start: {source}")]
    Unreachable { candidate: String, source: PlanError },
    #[error("intent_location {0:?} is not one of the intentions")]
    IntentNotInIntentions(String),
    #[error("problem has no observations")]
    NoObservations,
    #[error("malformed problem file: {0}")]
    ProblemFile(String),
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}
