//! Spherical-earth primitives shared by the labeller and the detectors.

use crate::error::{Error, Result};
use crate::model::TrajectoryPoint;

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance in meters between two lat/lon pairs given in degrees.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    Fix::new(lat1, lon1, 0.0).distance(&Fix::new(lat2, lon2, 0.0))
}

pub fn haversine_distance(a: &TrajectoryPoint, b: &TrajectoryPoint) -> f64 {
    haversine_m(a.lat, a.lon, b.lat, b.lon)
}

/// Initial great-circle bearing. `degenerate` is set when both points share a
/// position, in which case `degrees` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bearing {
    pub degrees: f64,
    pub degenerate: bool,
}

pub fn initial_bearing_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Bearing {
    if lat1 == lat2 && lon1 == lon2 {
        return Bearing {
            degrees: 0.0,
            degenerate: true,
        };
    }
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    Bearing {
        degrees: normalize_degrees(y.atan2(x).to_degrees()),
        degenerate: false,
    }
}

pub fn initial_bearing(a: &TrajectoryPoint, b: &TrajectoryPoint) -> Bearing {
    initial_bearing_deg(a.lat, a.lon, b.lat, b.lon)
}

/// Speed in m/s implied by moving from `a` to `b`.
pub fn segment_speed(a: &TrajectoryPoint, b: &TrajectoryPoint) -> Result<f64> {
    let dt = b.t - a.t;
    if dt <= 0.0 || dt.is_nan() {
        return Err(Error::ZeroOrNegativeDuration { dt });
    }
    Ok(haversine_distance(a, b) / dt)
}

/// Speed between two points of an ordered trajectory. Callers guarantee
/// `b.t > a.t`.
#[inline]
pub(crate) fn ordered_speed(a: &TrajectoryPoint, b: &TrajectoryPoint) -> f64 {
    debug_assert!(b.t > a.t);
    haversine_distance(a, b) / (b.t - a.t)
}

/// Position in radians with its latitude cosine cached, for tight loops over
/// many pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Fix {
    phi: f64,
    lambda: f64,
    cos_phi: f64,
    pub t: f64,
}

impl Fix {
    pub fn new(lat: f64, lon: f64, t: f64) -> Self {
        let phi = lat.to_radians();
        Self {
            phi,
            lambda: lon.to_radians(),
            cos_phi: phi.cos(),
            t,
        }
    }

    pub fn of(p: &TrajectoryPoint) -> Self {
        Self::new(p.lat, p.lon, p.t)
    }

    #[inline]
    pub fn distance(&self, other: &Fix) -> f64 {
        let dphi = other.phi - self.phi;
        let dlambda = other.lambda - self.lambda;
        let h = (dphi * 0.5).sin().powi(2)
            + self.cos_phi * other.cos_phi * (dlambda * 0.5).sin().powi(2);
        2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
    }

    /// Speed from `self` to a later fix.
    #[inline]
    pub fn speed_to(&self, later: &Fix) -> f64 {
        self.distance(later) / (later.t - self.t)
    }
}

pub(crate) fn fixes(points: &[TrajectoryPoint]) -> Vec<Fix> {
    points.iter().map(Fix::of).collect()
}

/// Smallest angle between two directions, in `[0, 180]`.
pub fn circular_diff(x: f64, y: f64) -> f64 {
    let d = (x - y).abs() % 360.0;
    d.min(360.0 - d)
}

/// Folds any angle into `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Equirectangular projection about a reference point, giving east/north
/// offsets in meters. Accurate enough over a single trajectory's extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPlane {
    lat0: f64,
    lon0: f64,
    cos_lat0: f64,
}

impl LocalPlane {
    pub fn new(lat0: f64, lon0: f64) -> Self {
        Self {
            lat0,
            lon0,
            cos_lat0: lat0.to_radians().cos(),
        }
    }

    /// Plane centred on the mean position of `points`. Longitudes are averaged
    /// relative to the first point so tracks crossing the antimeridian stay
    /// contiguous.
    pub fn centred_on(points: &[TrajectoryPoint]) -> Self {
        let Some(first) = points.first() else {
            return Self::new(0.0, 0.0);
        };
        let n = points.len() as f64;
        let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
        let dlon = points.iter().map(|p| wrap_delta(p.lon - first.lon)).sum::<f64>() / n;
        Self::new(lat, first.lon + dlon)
    }

    pub fn project(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = EARTH_RADIUS_M * wrap_delta(lon - self.lon0).to_radians() * self.cos_lat0;
        let y = EARTH_RADIUS_M * (lat - self.lat0).to_radians();
        (x, y)
    }

    pub fn project_point(&self, p: &TrajectoryPoint) -> (f64, f64) {
        self.project(p.lat, p.lon)
    }

    /// Inverse of [`project`](Self::project); returns `(lat, lon)`.
    pub fn unproject(&self, x: f64, y: f64) -> (f64, f64) {
        let lat = self.lat0 + (y / EARTH_RADIUS_M).to_degrees();
        let lon = if self.cos_lat0.abs() < 1e-12 {
            self.lon0
        } else {
            self.lon0 + (x / (EARTH_RADIUS_M * self.cos_lat0)).to_degrees()
        };
        (lat.clamp(-90.0, 90.0), crate::model::normalize_lon(lon))
    }
}

fn wrap_delta(d: f64) -> f64 {
    (d + 180.0).rem_euclid(360.0) - 180.0
}
