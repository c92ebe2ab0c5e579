//! Great-circle geodesy on a sphere: distances, point similarity and
//! polyline resampling.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::Scalar;

/// IUGG mean Earth radius in meters.
pub const MEAN_EARTH_RADIUS_M: f64 = 6_371_008.8;
pub const DEFAULT_SIMILARITY_THRESHOLD_M: f64 = 50.0;
pub const DEFAULT_RESAMPLE_SPACING_M: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("{what} must be strictly positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("empty polyline")]
    EmptyPolyline,
}

/// A point on the sphere in degrees. Longitude is kept in (-180, 180].
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LatLng<T> {
    lat: T,
    lng: T,
}

impl<T: Scalar> LatLng<T> {
    pub fn new(lat: T, lng: T) -> Result<Self, GeoError> {
        if !lat.is_finite() || !lng.is_finite() {
            return Err(GeoError::NonFinite);
        }
        if lat < -T::lit(90.0) || lat > T::lit(90.0) {
            return Err(GeoError::LatitudeOutOfRange(lat.to_f64_lossy()));
        }
        Ok(Self { lat, lng: normalize_longitude(lng) })
    }

    #[inline]
    pub fn lat(&self) -> T {
        self.lat
    }

    #[inline]
    pub fn lng(&self) -> T {
        self.lng
    }

    /// Converts between scalar precisions.
    pub fn cast<U: Scalar>(&self) -> LatLng<U> {
        LatLng {
            lat: U::lit(self.lat.to_f64_lossy()),
            lng: normalize_longitude(U::lit(self.lng.to_f64_lossy())),
        }
    }
}

// Values already in range are returned untouched so that coordinates
// round-trip bit for bit.
fn normalize_longitude<T: Scalar>(lng: T) -> T {
    let half_turn = T::lit(180.0);
    if lng > -half_turn && lng <= half_turn {
        return lng;
    }
    let turn = T::lit(360.0);
    let mut wrapped = (lng + half_turn) % turn;
    if wrapped < T::zero() {
        wrapped = wrapped + turn;
    }
    let out = wrapped - half_turn;
    if out <= -half_turn {
        half_turn
    } else {
        out
    }
}

impl<T: fmt::Debug> fmt::Debug for LatLng<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.lat, self.lng)
    }
}

impl<T: Scalar> fmt::Display for LatLng<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat, self.lng)
    }
}

// Wire form is a `[lat, lng]` pair everywhere.
impl<T: Scalar + Serialize> Serialize for LatLng<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.lat, self.lng].serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for LatLng<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [lat, lng] = <[T; 2]>::deserialize(deserializer)?;
        LatLng::new(lat, lng).map_err(D::Error::custom)
    }
}

/// Sphere radius, similarity threshold and resampling spacing, all in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoConfig<T> {
    pub sphere_radius: T,
    pub similarity_threshold: T,
    pub resample_spacing: T,
}

impl<T: Scalar> GeoConfig<T> {
    pub fn new(sphere_radius: T, similarity_threshold: T, resample_spacing: T) -> Result<Self, GeoError> {
        let cfg = Self { sphere_radius, similarity_threshold, resample_spacing };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        for (what, value) in [
            ("sphere radius", self.sphere_radius),
            ("similarity threshold", self.similarity_threshold),
            ("resample spacing", self.resample_spacing),
        ] {
            if !(value.is_finite() && value > T::zero()) {
                return Err(GeoError::NonPositive { what, value: value.to_f64_lossy() });
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Default for GeoConfig<T> {
    fn default() -> Self {
        Self {
            sphere_radius: T::lit(MEAN_EARTH_RADIUS_M),
            similarity_threshold: T::lit(DEFAULT_SIMILARITY_THRESHOLD_M),
            resample_spacing: T::lit(DEFAULT_RESAMPLE_SPACING_M),
        }
    }
}

/// Great-circle distance by the haversine formula. The longitude difference
/// takes the short way around the antimeridian.
pub fn haversine_distance<T: Scalar>(a: LatLng<T>, b: LatLng<T>, radius: T) -> T {
    let two = T::lit(2.0);
    let half_turn = T::lit(180.0);
    let dlat = (a.lat - b.lat).abs().to_radians();
    let mut dlng = (a.lng - b.lng).abs();
    if dlng > half_turn {
        dlng = T::lit(360.0) - dlng;
    }
    let dlng = dlng.to_radians();

    let sin_dlat = (dlat / two).sin();
    let sin_dlng = (dlng / two).sin();
    let h = sin_dlat * sin_dlat + b.lat.to_radians().cos() * a.lat.to_radians().cos() * sin_dlng * sin_dlng;
    two * radius * h.min(T::one()).sqrt().asin()
}

pub fn points_similar<T: Scalar>(a: LatLng<T>, b: LatLng<T>, cfg: &GeoConfig<T>) -> bool {
    haversine_distance(a, b, cfg.sphere_radius) <= cfg.similarity_threshold
}

/// Sum of consecutive great-circle gaps.
pub fn polyline_length<T: Scalar>(points: &[LatLng<T>], radius: T) -> T {
    points
        .windows(2)
        .fold(T::zero(), |acc, w| acc + haversine_distance(w[0], w[1], radius))
}

/// Point at `fraction` of the way from `a` to `b` along the great circle.
pub fn intermediate_point<T: Scalar>(a: LatLng<T>, b: LatLng<T>, fraction: T) -> LatLng<T> {
    if fraction <= T::zero() {
        return a;
    }
    if fraction >= T::one() {
        return b;
    }
    let central = haversine_distance(a, b, T::one());
    if central < T::lit(1e-12) {
        // Too short for a stable slerp; straight interpolation is exact to rounding.
        return LatLng {
            lat: a.lat + (b.lat - a.lat) * fraction,
            lng: a.lng + shortest_lng_delta(a.lng, b.lng) * fraction,
        }
        .renormalized();
    }
    let (lat1, lng1) = (a.lat.to_radians(), a.lng.to_radians());
    let (lat2, lng2) = (b.lat.to_radians(), b.lng.to_radians());
    let sin_central = central.sin();
    let wa = ((T::one() - fraction) * central).sin() / sin_central;
    let wb = (fraction * central).sin() / sin_central;
    let x = wa * lat1.cos() * lng1.cos() + wb * lat2.cos() * lng2.cos();
    let y = wa * lat1.cos() * lng1.sin() + wb * lat2.cos() * lng2.sin();
    let z = wa * lat1.sin() + wb * lat2.sin();
    let lat = z.atan2((x * x + y * y).sqrt()).to_degrees();
    let lng = y.atan2(x).to_degrees();
    LatLng { lat: lat.max(-T::lit(90.0)).min(T::lit(90.0)), lng: normalize_longitude(lng) }
}

/// Point at arc length `distance` along the polyline, clamped to its ends.
pub fn point_along<T: Scalar>(points: &[LatLng<T>], distance: T, radius: T) -> Result<LatLng<T>, GeoError> {
    let first = *points.first().ok_or(GeoError::EmptyPolyline)?;
    if distance <= T::zero() {
        return Ok(first);
    }
    let mut travelled = T::zero();
    for w in points.windows(2) {
        let seg = haversine_distance(w[0], w[1], radius);
        if seg > T::zero() && travelled + seg >= distance {
            return Ok(intermediate_point(w[0], w[1], (distance - travelled) / seg));
        }
        travelled = travelled + seg;
    }
    Ok(*points.last().unwrap())
}

fn shortest_lng_delta<T: Scalar>(from: T, to: T) -> T {
    let mut d = to - from;
    if d > T::lit(180.0) {
        d = d - T::lit(360.0);
    } else if d < -T::lit(180.0) {
        d = d + T::lit(360.0);
    }
    d
}

impl<T: Scalar> LatLng<T> {
    fn renormalized(self) -> Self {
        Self { lat: self.lat, lng: normalize_longitude(self.lng) }
    }
}

/// Resamples a polyline at fixed arc-length stations.
///
/// Stations sit at multiples of `spacing` measured from the first point.
/// Every original vertex is kept as well, so corners are not cut and the
/// total length is preserved.
pub fn resample_polyline<T: Scalar>(
    points: &[LatLng<T>],
    spacing: T,
    radius: T,
) -> Result<Vec<LatLng<T>>, GeoError> {
    let first = *points.first().ok_or(GeoError::EmptyPolyline)?;
    if !(spacing.is_finite() && spacing > T::zero()) {
        return Err(GeoError::NonPositive { what: "resample spacing", value: spacing.to_f64_lossy() });
    }
    let tolerance = spacing * T::lit(1e-9);
    let mut out = vec![first];
    let mut travelled = T::zero();
    let mut next_station = spacing;

    for w in points.windows(2) {
        let (from, to) = (w[0], w[1]);
        let seg = haversine_distance(from, to, radius);
        if seg <= T::zero() {
            continue;
        }
        let seg_end = travelled + seg;
        while next_station < seg_end - tolerance {
            let fraction = (next_station - travelled) / seg;
            out.push(intermediate_point(from, to, fraction));
            next_station = next_station + spacing;
        }
        out.push(to);
        travelled = seg_end;
        // A vertex landing on a station consumes it.
        while next_station <= travelled + tolerance {
            next_station = next_station + spacing;
        }
    }
    if out.len() == 1 && points.len() > 1 {
        // All segments degenerate; keep the last original point.
        out.push(*points.last().unwrap());
    }
    Ok(out)
}
