//! Destination intention recognition on road networks.
//!
//! The recognizer plans an ideal route from the start to every candidate
//! destination, plans an observation-compliant route through the observed
//! positions, scores how closely the two agree under a great-circle distance
//! threshold, and keeps a normalized posterior over the candidates that is
//! refreshed after every observation.
//!
//! The geodesy and probability primitives are generic over the floating point
//! scalar (see [`Scalar`]); the aliases below pin them to `f64`, which is what
//! the graph, planner, session and benchmark layers use.

pub mod bench;
pub mod fixtures;
pub mod geo;
pub mod planner;
pub mod recognizer;
pub mod roadnet;
mod scalar;

pub use scalar::Scalar;

/// Geographic point in degrees, `f64` precision.
pub type LatLng = geo::LatLng<f64>;
/// Geographic point in degrees, `f32` precision.
pub type LatLng32 = geo::LatLng<f32>;
/// Geodesy configuration, `f64` precision.
pub type GeoConfig = geo::GeoConfig<f64>;
/// Planned route, `f64` precision.
pub type Route = planner::Route<f64>;
/// Posterior over candidate destinations, `f64` precision.
pub type RankedDistribution = recognizer::RankedDistribution<f64>;

pub use planner::RoutePlanner;
pub use recognizer::{Environment, PlaceRef, RecognitionProblem, Session};
pub use roadnet::{Gazetteer, RoadNetwork};
