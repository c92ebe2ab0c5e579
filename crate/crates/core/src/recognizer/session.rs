use std::sync::Arc;

use rayon::prelude::*;

use super::scoring::matched_fraction;
use super::{RankedDistribution, RecognitionError};
use crate::geo::resample_polyline;
use crate::planner::{concat_routes, GraphPlanner, PlanError, RoutePlanner};
use crate::roadnet::{resolve_place, Gazetteer, PlaceError, PlaceRef, RoadNetwork};
use crate::{GeoConfig, LatLng, Route};

/// Everything a recognition run needs besides the problem itself.
#[derive(Clone)]
pub struct Environment {
    pub network: Arc<RoadNetwork>,
    pub gazetteer: Arc<Gazetteer>,
    pub planner: Arc<dyn RoutePlanner>,
    pub geo: GeoConfig,
}

impl Environment {
    /// Environment using the internal graph planner on `network`.
    pub fn internal(network: Arc<RoadNetwork>, gazetteer: Arc<Gazetteer>, geo: GeoConfig) -> Self {
        let planner = Arc::new(GraphPlanner::new(network.clone()));
        Self { network, gazetteer, planner, geo }
    }

    pub fn with_planner(&self, planner: Arc<dyn RoutePlanner>) -> Self {
        Self { planner, ..self.clone() }
    }

    pub fn resolve(&self, place: &PlaceRef) -> Result<LatLng, PlaceError> {
        resolve_place(&self.gazetteer, place)
    }
}

struct Candidate {
    label: String,
    pos: LatLng,
    ideal: Route,
    ideal_resampled: Vec<LatLng>,
}

/// Live recognition state for one observed agent. Observations are
/// append-only; ideal routes are planned once at creation.
pub struct Session {
    planner: Arc<dyn RoutePlanner>,
    geo: GeoConfig,
    init: LatLng,
    candidates: Vec<Candidate>,
    priors: Vec<f64>,
    observations: Vec<LatLng>,
    // Route through all observations so far, kept when the planner's via
    // routes are plain leg concatenations.
    prefix: Option<Result<Route, String>>,
    latest: RankedDistribution,
    observation_route_lengths: Vec<Option<f64>>,
    warnings: Vec<String>,
}

fn normalized_priors(priors: Option<Vec<f64>>, n: usize) -> Result<Vec<f64>, RecognitionError> {
    let Some(priors) = priors else {
        return Ok(vec![1.0 / n as f64; n]);
    };
    if priors.len() != n {
        return Err(RecognitionError::InvalidPriors(format!("{} priors for {n} intentions", priors.len())));
    }
    if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(RecognitionError::InvalidPriors("priors must be finite and non-negative".into()));
    }
    let total: f64 = priors.iter().sum();
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(total > 0.0) {
        return Err(RecognitionError::InvalidPriors("priors sum to zero".into()));
    }
    Ok(priors.into_iter().map(|p| p / total).collect())
}

/// Plans and caches the ideal route to every intention. `priors` may be any
/// non-negative weights; they are normalized. Uniform when absent.
pub fn create_session(
    planner: Arc<dyn RoutePlanner>,
    geo: GeoConfig,
    init: LatLng,
    intentions: Vec<(String, LatLng)>,
    priors: Option<Vec<f64>>,
) -> Result<Session, RecognitionError> {
    geo.validate()?;
    if intentions.len() < 2 {
        return Err(RecognitionError::TooFewIntentions(intentions.len()));
    }
    for (i, (first, a)) in intentions.iter().enumerate() {
        if let Some((second, _)) = intentions[i + 1..].iter().find(|(_, b)| b == a) {
            return Err(RecognitionError::DuplicateIntention { first: first.clone(), second: second.clone() });
        }
    }
    let priors = normalized_priors(priors, intentions.len())?;

    let candidates = intentions
        .into_par_iter()
        .map(|(label, pos)| {
            let ideal = planner.plan(init, pos).map_err(|e| match e {
                PlanError::NoRoute { .. } | PlanError::NoRouteLeg { .. } => {
                    RecognitionError::Unreachable { candidate: label.clone(), source: e }
                }
                other => RecognitionError::Plan(other),
            })?;
            let ideal_resampled = resample_polyline(&ideal.points, geo.resample_spacing, geo.sphere_radius)?;
            Ok(Candidate { label, pos, ideal, ideal_resampled })
        })
        .collect::<Result<Vec<_>, RecognitionError>>()?;

    let labels: Vec<String> = candidates.iter().map(|c| c.label.clone()).collect();
    let latest = RankedDistribution::from_epsilons(&labels, &vec![1.0; labels.len()], &priors, 0)?;
    let prefix = planner.composes_legs().then(|| {
        Ok(Route { points: Vec::new(), total_length: 0.0, cost: 0.0, planner_id: planner.id().to_string(), nodes: Vec::new() })
    });
    Ok(Session {
        observation_route_lengths: vec![None; candidates.len()],
        planner,
        geo,
        init,
        candidates,
        priors,
        observations: Vec::new(),
        prefix,
        latest,
        warnings: Vec::new(),
    })
}

impl Session {
    /// Adds one observation and recomputes every candidate's observation
    /// route, compliance score and posterior from the full prefix.
    ///
    /// A candidate whose observation route cannot be planned scores 0 and a
    /// warning is recorded.
    pub fn observe(&mut self, observation: LatLng) -> &RankedDistribution {
        let previous = self.observations.last().copied().unwrap_or(self.init);
        self.observations.push(observation);
        let step = self.observations.len();

        if let Some(Ok(prefix)) = &self.prefix {
            let extended = self.planner.plan(previous, observation).map(|leg| {
                if prefix.points.is_empty() {
                    leg
                } else {
                    concat_routes(vec![prefix.clone(), leg], self.planner.id())
                }
            });
            self.prefix = Some(extended.map_err(|e| format!("observation {step}: {e}")));
        }

        let planner = &self.planner;
        let observations = &self.observations;
        let prefix = &self.prefix;
        let init = self.init;
        let geo = self.geo;
        let outcomes: Vec<Result<(f64, f64), String>> = self
            .candidates
            .par_iter()
            .map(|c| {
                let route = match prefix {
                    Some(Ok(prefix)) => planner
                        .plan(observation, c.pos)
                        .map(|leg| concat_routes(vec![prefix.clone(), leg], planner.id()))
                        .map_err(|e| e.to_string()),
                    Some(Err(e)) => Err(e.clone()),
                    None => planner.plan_via(init, observations, c.pos).map_err(|e| e.to_string()),
                }?;
                let resampled = resample_polyline(&route.points, geo.resample_spacing, geo.sphere_radius).map_err(|e| e.to_string())?;
                Ok((matched_fraction(&resampled, &c.ideal_resampled, &geo), route.total_length))
            })
            .collect();

        let mut epsilons = Vec::with_capacity(outcomes.len());
        for (i, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok((epsilon, length)) => {
                    epsilons.push(epsilon);
                    self.observation_route_lengths[i] = Some(length);
                }
                Err(e) => {
                    self.warnings.push(format!("step {step}: no observation route for {:?}: {e}", self.candidates[i].label));
                    epsilons.push(0.0);
                    self.observation_route_lengths[i] = None;
                }
            }
        }
        self.latest = RankedDistribution::from_epsilons(&self.labels(), &epsilons, &self.priors, step)
            .expect("epsilons in [0, 1] and normalized priors always score");
        &self.latest
    }

    pub fn latest(&self) -> &RankedDistribution {
        &self.latest
    }

    pub fn labels(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.label.clone()).collect()
    }

    pub fn init(&self) -> LatLng {
        self.init
    }

    pub fn intentions(&self) -> Vec<(String, LatLng)> {
        self.candidates.iter().map(|c| (c.label.clone(), c.pos)).collect()
    }

    pub fn observations(&self) -> &[LatLng] {
        &self.observations
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn geo(&self) -> &GeoConfig {
        &self.geo
    }

    pub fn planner_id(&self) -> &str {
        self.planner.id()
    }

    pub fn ideal_route(&self, label: &str) -> Option<&Route> {
        self.candidates.iter().find(|c| c.label == label).map(|c| &c.ideal)
    }

    pub fn ideal_routes(&self) -> impl Iterator<Item = (&str, &Route)> {
        self.candidates.iter().map(|c| (c.label.as_str(), &c.ideal))
    }

    /// Length of each candidate's latest observation route; `None` before the
    /// first observation or when it could not be planned.
    pub fn observation_route_lengths(&self) -> impl Iterator<Item = (&str, Option<f64>)> {
        self.candidates.iter().zip(&self.observation_route_lengths).map(|(c, l)| (c.label.as_str(), *l))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
