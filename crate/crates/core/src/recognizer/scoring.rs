use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::RecognitionError;
use crate::geo::{haversine_distance, resample_polyline, GeoConfig, LatLng};
use crate::planner::Route;
use crate::Scalar;

/// Posteriors within this distance of the maximum all count as top-ranked.
pub const ARGMAX_TIE_EPSILON: f64 = 1e-9;
const PRIOR_SUM_TOLERANCE: f64 = 1e-9;

/// Compliance of an observation route with an ideal route: the fraction of
/// resampled observation-route points lying within the similarity threshold
/// of some resampled ideal-route point. 1 means fully compliant.
pub fn score_epsilon<T: Scalar>(ideal: &Route<T>, obs_route: &Route<T>, cfg: &GeoConfig<T>) -> Result<T, RecognitionError> {
    let ideal = resample_polyline(&ideal.points, cfg.resample_spacing, cfg.sphere_radius)?;
    let observed = resample_polyline(&obs_route.points, cfg.resample_spacing, cfg.sphere_radius)?;
    Ok(matched_fraction(&observed, &ideal, cfg))
}

/// Fraction of `observed` points with a point of `reference` within the
/// similarity threshold. Both slices must already be resampled.
pub(crate) fn matched_fraction<T: Scalar>(observed: &[LatLng<T>], reference: &[LatLng<T>], cfg: &GeoConfig<T>) -> T {
    if observed.is_empty() {
        return T::zero();
    }
    // Latitude alone bounds the distance from below.
    let lat_window = (cfg.similarity_threshold / cfg.sphere_radius).to_degrees() * T::lit(1.000001);
    let within = |a: LatLng<T>, b: LatLng<T>| {
        (a.lat() - b.lat()).abs() <= lat_window && haversine_distance(a, b, cfg.sphere_radius) <= cfg.similarity_threshold
    };
    let mut hint = 0usize;
    let mut matched = 0usize;
    for &point in observed {
        // Consecutive points usually match near the previous hit.
        let hit = (hint..reference.len()).chain(0..hint).find(|&j| within(point, reference[j]));
        if let Some(j) = hit {
            matched += 1;
            hint = j;
        }
    }
    T::from_usize(matched).unwrap() / T::from_usize(observed.len()).unwrap()
}

/// `1 / (1 + (1 - epsilon))`, ranging over [0.5, 1].
pub fn likelihood<T: Scalar>(epsilon: T) -> Result<T, RecognitionError> {
    if !(epsilon >= T::zero() && epsilon <= T::one()) {
        return Err(RecognitionError::EpsilonOutOfRange(epsilon.to_f64_lossy()));
    }
    Ok(T::one() / (T::one() + (T::one() - epsilon)))
}

/// Normalized product of priors and likelihoods.
pub fn posterior<T: Scalar>(priors: &[T], likelihoods: &[T]) -> Result<Vec<T>, RecognitionError> {
    if priors.len() != likelihoods.len() {
        return Err(RecognitionError::LengthMismatch { priors: priors.len(), likelihoods: likelihoods.len() });
    }
    let prior_sum = priors.iter().fold(T::zero(), |a, &b| a + b);
    if priors.iter().any(|p| !(*p >= T::zero() && *p <= T::one()))
        || (prior_sum - T::one()).abs() > T::lit(PRIOR_SUM_TOLERANCE).max(T::epsilon() * T::lit(64.0))
    {
        return Err(RecognitionError::PriorsNotNormalized(prior_sum.to_f64_lossy()));
    }
    if let Some(bad) = likelihoods.iter().find(|l| !(**l > T::zero() && **l <= T::one())) {
        return Err(RecognitionError::InvalidLikelihood(bad.to_f64_lossy()));
    }
    let joint: Vec<T> = priors.iter().zip(likelihoods).map(|(&p, &l)| p * l).collect();
    let mass = joint.iter().fold(T::zero(), |a, &b| a + b);
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(mass > T::zero()) {
        return Err(RecognitionError::ZeroMass);
    }
    let eta = T::one() / mass;
    Ok(joint.into_iter().map(|j| j * eta).collect())
}

/// Indices whose value is within `tie_epsilon` of the maximum.
pub fn argmax_set<T: Scalar>(values: &[T], tie_epsilon: T) -> Vec<usize> {
    let Some(max) = values.iter().copied().reduce(T::max) else {
        return Vec::new();
    };
    values.iter().enumerate().filter(|(_, &v)| max - v <= tie_epsilon).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore<T> {
    pub label: String,
    pub epsilon: T,
    pub likelihood: T,
    pub posterior: T,
}

/// Posterior over the candidate destinations after some number of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDistribution<T = f64> {
    pub candidates: Vec<CandidateScore<T>>,
    /// Indices into `candidates`, ascending.
    pub argmax: Vec<usize>,
    pub observation_count: usize,
}

impl<T: Scalar> RankedDistribution<T> {
    /// Scores every candidate from its epsilon and prior.
    pub fn from_epsilons(
        labels: &[String],
        epsilons: &[T],
        priors: &[T],
        observation_count: usize,
    ) -> Result<Self, RecognitionError> {
        let likelihoods = epsilons.iter().map(|&e| likelihood(e)).collect::<Result<Vec<_>, _>>()?;
        let posteriors = posterior(priors, &likelihoods)?;
        let argmax = argmax_set(&posteriors, T::lit(ARGMAX_TIE_EPSILON));
        let candidates = labels
            .iter()
            .zip(epsilons)
            .zip(likelihoods)
            .zip(posteriors)
            .map(|(((label, &epsilon), likelihood), posterior)| CandidateScore { label: label.clone(), epsilon, likelihood, posterior })
            .collect();
        Ok(Self { candidates, argmax, observation_count })
    }

    pub fn argmax_labels(&self) -> Vec<&str> {
        self.argmax.iter().map(|&i| self.candidates[i].label.as_str()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&CandidateScore<T>> {
        self.candidates.iter().find(|c| c.label == label)
    }

    pub fn posterior_sum(&self) -> T {
        self.candidates.iter().fold(T::zero(), |a, c| a + c.posterior)
    }
}

/// One step of a recognition trace in its wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub posterior: IndexMap<String, f64>,
    pub epsilon: IndexMap<String, f64>,
    pub argmax: Vec<String>,
}

impl<T: Scalar> From<&RankedDistribution<T>> for TraceStep {
    fn from(d: &RankedDistribution<T>) -> Self {
        Self {
            step: d.observation_count,
            posterior: d.candidates.iter().map(|c| (c.label.clone(), c.posterior.to_f64_lossy())).collect(),
            epsilon: d.candidates.iter().map(|c| (c.label.clone(), c.epsilon.to_f64_lossy())).collect(),
            argmax: d.argmax_labels().into_iter().map(str::to_string).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::MEAN_EARTH_RADIUS_M;
    use proptest::prelude::*;

    fn p(lat: f64, lng: f64) -> LatLng<f64> {
        LatLng::new(lat, lng).unwrap()
    }

    fn east(from: LatLng<f64>, meters: f64) -> LatLng<f64> {
        let dlng = (meters / (MEAN_EARTH_RADIUS_M * from.lat().to_radians().cos())).to_degrees();
        p(from.lat(), from.lng() + dlng)
    }

    fn north(from: LatLng<f64>, meters: f64) -> LatLng<f64> {
        p(from.lat() + (meters / MEAN_EARTH_RADIUS_M).to_degrees(), from.lng())
    }

    #[test]
    fn likelihood_points() {
        assert_eq!(likelihood(1.0).unwrap(), 1.0);
        assert_eq!(likelihood(0.0).unwrap(), 0.5);
        assert!((likelihood(0.5f64).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(likelihood(1.5).is_err());
        assert!(likelihood(-0.1).is_err());
        assert!(likelihood(f64::NAN).is_err());
        assert!((likelihood(0.5f32).unwrap() - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn posterior_examples() {
        assert_eq!(posterior(&[0.5, 0.5], &[0.7, 0.7]).unwrap(), vec![0.5, 0.5]);
        let two_thirds = posterior::<f64>(&[0.5, 0.5], &[1.0, 0.5]).unwrap();
        assert!((two_thirds[0] - 2.0 / 3.0).abs() < 1e-15 && (two_thirds[1] - 1.0 / 3.0).abs() < 1e-15);
        let prior = posterior::<f64>(&[0.8, 0.2], &[0.6, 0.6]).unwrap();
        assert!((prior[0] - 0.8).abs() < 1e-15 && (prior[1] - 0.2).abs() < 1e-15);
        assert_eq!(argmax_set(&[0.5, 0.5], 1e-9), vec![0, 1]);
    }

    #[test]
    fn posterior_rejects_bad_input() {
        assert!(matches!(posterior(&[0.5], &[1.0, 1.0]), Err(RecognitionError::LengthMismatch { .. })));
        assert!(matches!(posterior(&[0.5, 0.6], &[1.0, 1.0]), Err(RecognitionError::PriorsNotNormalized(_))));
        assert!(matches!(posterior(&[0.5, 0.5], &[1.0, 0.0]), Err(RecognitionError::InvalidLikelihood(_))));
    }

    #[test]
    fn identical_routes_score_one() {
        let a = p(51.5, -0.1);
        let route = Route::from_points(vec![a, east(a, 300.0), north(east(a, 300.0), 200.0)], "internal");
        assert_eq!(score_epsilon(&route, &route, &GeoConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn distant_routes_score_zero() {
        let a = p(51.5, -0.1);
        let ideal = Route::from_points(vec![a, east(a, 500.0)], "internal");
        let b = north(a, 400.0);
        let obs = Route::from_points(vec![b, east(b, 500.0)], "internal");
        assert_eq!(score_epsilon(&ideal, &obs, &GeoConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn half_shared_route_scores_half() {
        // Ideal: 400 m east. Observed: the first 200 m of it, then 200 m
        // north from there. A 10 m threshold keeps the junction from
        // absorbing neighbors; the oracle counts matches directly.
        let cfg = GeoConfig::new(MEAN_EARTH_RADIUS_M, 10.0, 25.0).unwrap();
        let a = p(51.5, -0.1);
        let mid = east(a, 200.0);
        let ideal = Route::from_points(vec![a, mid, east(a, 400.0)], "internal");
        let obs = Route::from_points(vec![a, mid, north(mid, 200.0)], "internal");
        let resampled_obs = resample_polyline(&obs.points, 25.0, MEAN_EARTH_RADIUS_M).unwrap();
        let resampled_ideal = resample_polyline(&ideal.points, 25.0, MEAN_EARTH_RADIUS_M).unwrap();
        let oracle = resampled_obs
            .iter()
            .filter(|o| resampled_ideal.iter().map(|i| haversine_distance(**o, *i, MEAN_EARTH_RADIUS_M)).fold(f64::INFINITY, f64::min) <= 10.0)
            .count() as f64
            / resampled_obs.len() as f64;
        let eps = score_epsilon(&ideal, &obs, &cfg).unwrap();
        assert_eq!(eps, oracle);
        assert!((eps - 0.5).abs() <= 1.0 / resampled_obs.len() as f64, "{eps}");
    }

    #[test]
    fn empty_route_is_an_error() {
        let empty = Route::<f64>::from_points(vec![], "x");
        let one = Route::from_points(vec![p(0.0, 0.0)], "x");
        assert!(score_epsilon(&empty, &one, &GeoConfig::default()).is_err());
        assert!(score_epsilon(&one, &empty, &GeoConfig::default()).is_err());
    }

    #[test]
    fn trace_step_keeps_candidate_order() {
        let labels = vec!["b".to_string(), "a".to_string()];
        let d = RankedDistribution::from_epsilons(&labels, &[1.0, 0.0], &[0.5, 0.5], 3).unwrap();
        let step = TraceStep::from(&d);
        assert_eq!(step.step, 3);
        assert_eq!(step.posterior.keys().collect::<Vec<_>>(), ["b", "a"]);
        assert_eq!(step.argmax, ["b"]);
        let json = serde_json::to_string(&step).unwrap();
        assert!(json.starts_with(r#"{"step":3,"posterior":{"b":"#));
    }

    proptest! {
        #[test]
        fn posterior_is_normalized(raw in prop::collection::vec((0.01f64..1.0, 0.0f64..=1.0), 2..20)) {
            let total: f64 = raw.iter().map(|r| r.0).sum();
            let priors: Vec<f64> = raw.iter().map(|r| r.0 / total).collect();
            let eps: Vec<f64> = raw.iter().map(|r| r.1).collect();
            let labels: Vec<String> = (0..raw.len()).map(|i| i.to_string()).collect();
            let d = RankedDistribution::from_epsilons(&labels, &eps, &priors, 1).unwrap();
            prop_assert!((d.posterior_sum() - 1.0).abs() <= 1e-9);
            prop_assert!(!d.argmax.is_empty());
            prop_assert!(d.candidates.iter().all(|c| (0.0..=1.0).contains(&c.posterior)));
        }

        #[test]
        fn likelihood_is_increasing(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assume!(a > b);
            prop_assert!(likelihood(a).unwrap() > likelihood(b).unwrap());
        }

        #[test]
        fn uniform_priors_rank_like_epsilon(eps in prop::collection::vec(0.0f64..=1.0, 2..12)) {
            let n = eps.len();
            let priors = vec![1.0 / n as f64; n];
            let likes: Vec<f64> = eps.iter().map(|&e| likelihood(e).unwrap()).collect();
            let post = posterior(&priors, &likes).unwrap();
            for i in 0..n {
                for j in 0..n {
                    if eps[i] > eps[j] {
                        prop_assert!(post[i] > post[j]);
                    }
                }
            }
        }

        #[test]
        fn equal_likelihoods_return_priors(raw in prop::collection::vec(0.01f64..1.0, 2..12), l in 0.5f64..=1.0) {
            let total: f64 = raw.iter().sum();
            let priors: Vec<f64> = raw.iter().map(|r| r / total).collect();
            let post = posterior(&priors, &vec![l; priors.len()]).unwrap();
            for (a, b) in post.iter().zip(&priors) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn argmax_is_scale_invariant(raw in prop::collection::vec(0.01f64..1.0, 2..12), eps in prop::collection::vec(0.0f64..=1.0, 12), k in 0.1f64..10.0) {
            let n = raw.len();
            let eps = &eps[..n];
            let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let norm = |w: &[f64]| { let t: f64 = w.iter().sum(); w.iter().map(|x| x / t).collect::<Vec<_>>() };
            let scaled: Vec<f64> = raw.iter().map(|r| r * k).collect();
            let a = RankedDistribution::from_epsilons(&labels, eps, &norm(&raw), 1).unwrap();
            let b = RankedDistribution::from_epsilons(&labels, eps, &norm(&scaled), 1).unwrap();
            prop_assert_eq!(a.argmax, b.argmax);
        }
    }
}
