use serde::{Deserialize, Serialize};

use super::{create_session, Environment, RankedDistribution, RecognitionError, TraceStep};
use crate::roadnet::{fold_name, PlaceRef};
use crate::LatLng;

/// One recognition problem in the JSON problem-file layout. Any place may
/// be a gazetteer name or a `[lat, lng]` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionProblem {
    pub problem_id: String,
    pub init: PlaceRef,
    pub intent_location: PlaceRef,
    pub intentions: Vec<PlaceRef>,
    pub observations: Vec<LatLng>,
}

fn same_place(a: &PlaceRef, b: &PlaceRef) -> bool {
    match (a, b) {
        (PlaceRef::Name(x), PlaceRef::Name(y)) => fold_name(x) == fold_name(y),
        (PlaceRef::Coords(x), PlaceRef::Coords(y)) => x == y,
        _ => false,
    }
}

impl RecognitionProblem {
    pub fn validate(&self) -> Result<(), RecognitionError> {
        if self.intentions.len() < 2 {
            return Err(RecognitionError::TooFewIntentions(self.intentions.len()));
        }
        if self.intent_index().is_none() {
            return Err(RecognitionError::IntentNotInIntentions(self.intent_location.label()));
        }
        Ok(())
    }

    /// Position of the true intention within `intentions`.
    pub fn intent_index(&self) -> Option<usize> {
        self.intentions.iter().position(|p| same_place(p, &self.intent_location))
    }

    /// Label of the true intention as it appears in traces.
    pub fn intent_label(&self) -> Option<String> {
        self.intent_index().map(|i| self.intentions[i].label())
    }
}

/// Parses a problem file: a JSON array of problems (a bare object is also
/// accepted). Every problem is validated.
pub fn parse_problems(json: &str) -> Result<Vec<RecognitionProblem>, RecognitionError> {
    let parsed = if json.trim_start().starts_with('{') {
        serde_json::from_str::<RecognitionProblem>(json).map(|p| vec![p])
    } else {
        serde_json::from_str::<Vec<RecognitionProblem>>(json)
    };
    let problems = parsed.map_err(|e| RecognitionError::ProblemFile(e.to_string()))?;
    for (i, p) in problems.iter().enumerate() {
        p.validate()
            .map_err(|e| RecognitionError::ProblemFile(format!("problem #{i} ({:?}): {e}", p.problem_id)))?;
    }
    Ok(problems)
}

pub fn problems_to_json(problems: &[RecognitionProblem]) -> String {
    serde_json::to_string_pretty(problems).expect("problems serialize")
}

/// Replays the observations through a fresh session and returns the
/// distribution after every observation.
pub fn solve_problem(problem: &RecognitionProblem, env: &Environment) -> Result<Vec<RankedDistribution>, RecognitionError> {
    problem.validate()?;
    let init = env.resolve(&problem.init)?;
    let intentions = problem
        .intentions
        .iter()
        .map(|p| Ok((p.label(), env.resolve(p)?)))
        .collect::<Result<Vec<_>, RecognitionError>>()?;
    let mut session = create_session(env.planner.clone(), env.geo, init, intentions, None)?;
    Ok(problem.observations.iter().map(|&o| session.observe(o).clone()).collect())
}

pub fn trace_of(distributions: &[RankedDistribution]) -> Vec<TraceStep> {
    distributions.iter().map(TraceStep::from).collect()
}

/// Solve output for one problem in its wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemTrace {
    pub problem_id: String,
    pub intent_location: String,
    pub trace: Vec<TraceStep>,
    pub final_argmax: Vec<String>,
    pub intent_in_argmax: bool,
}

impl ProblemTrace {
    pub fn new(problem: &RecognitionProblem, distributions: &[RankedDistribution]) -> Self {
        let trace = trace_of(distributions);
        let final_argmax = trace.last().map(|s| s.argmax.clone()).unwrap_or_default();
        let intent = problem.intent_label().unwrap_or_else(|| problem.intent_location.label());
        Self {
            problem_id: problem.problem_id.clone(),
            intent_in_argmax: final_argmax.contains(&intent),
            intent_location: intent,
            trace,
            final_argmax,
        }
    }
}
