//! Bundled London fixture: a small hand-built road network around central
//! London, a gazetteer covering the landmark names of the example problem,
//! and that problem file.

use crate::recognizer::{parse_problems, RecognitionProblem};
use crate::roadnet::{Gazetteer, RoadNetwork};

pub const LONDON_NETWORK_JSON: &str = include_str!("../fixtures/london_network.json");
pub const LONDON_GAZETTEER_JSON: &str = include_str!("../fixtures/london_gazetteer.json");
pub const EXAMPLE_PROBLEM_JSON: &str = include_str!("../fixtures/example_problem.json");

pub fn london_network() -> RoadNetwork {
    RoadNetwork::from_json_str(LONDON_NETWORK_JSON).expect("bundled network is valid")
}

pub fn london_gazetteer() -> Gazetteer {
    Gazetteer::from_json_str(LONDON_GAZETTEER_JSON).expect("bundled gazetteer is valid")
}

pub fn example_problems() -> Vec<RecognitionProblem> {
    parse_problems(EXAMPLE_PROBLEM_JSON).expect("bundled problem is valid")
}
