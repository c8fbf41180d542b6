use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timestamped fix, optionally carrying the speed and course reported
/// by the object's own sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub object_id: Arc<str>,
    /// Seconds since the Unix epoch.
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    /// Meters per second.
    pub recorded_speed: Option<f64>,
    /// Degrees clockwise from north, in `[0, 360)`.
    pub recorded_bearing: Option<f64>,
}

impl TrajectoryPoint {
    /// Builds a validated point. Longitude is wrapped into `[-180, 180)` and a
    /// recorded bearing of exactly 360 is folded to 0.
    pub fn new(
        object_id: impl Into<Arc<str>>,
        t: f64,
        lat: f64,
        lon: f64,
        recorded_speed: Option<f64>,
        recorded_bearing: Option<f64>,
    ) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidPoint(format!("non-finite timestamp {t}")));
        }
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::InvalidPoint(format!("latitude {lat} outside [-90, 90]")));
        }
        if !lon.is_finite() {
            return Err(Error::InvalidPoint(format!("non-finite longitude {lon}")));
        }
        let recorded_speed = match recorded_speed {
            Some(v) if !v.is_finite() || v < 0.0 => {
                return Err(Error::InvalidPoint(format!("recorded speed {v} is negative")))
            }
            other => other,
        };
        let recorded_bearing = match recorded_bearing {
            Some(b) if !b.is_finite() || !(0.0..=360.0).contains(&b) => {
                return Err(Error::InvalidPoint(format!(
                    "recorded bearing {b} outside [0, 360)"
                )))
            }
            Some(360.0) => Some(0.0),
            other => other,
        };
        Ok(Self {
            object_id: object_id.into(),
            t,
            lat,
            lon: normalize_lon(lon),
            recorded_speed,
            recorded_bearing,
        })
    }
}

/// Wraps a longitude into `[-180, 180)`.
pub fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Time-ordered fixes of a single object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    object_id: Arc<str>,
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// Checks that every point belongs to `object_id` and that timestamps
    /// strictly increase.
    pub fn new(object_id: impl Into<Arc<str>>, points: Vec<TrajectoryPoint>) -> Result<Self> {
        let object_id = object_id.into();
        if let Some(p) = points.iter().find(|p| p.object_id != object_id) {
            return Err(Error::InvalidTrajectory(format!(
                "point with id {:?} in trajectory {:?}",
                p.object_id, object_id
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidTrajectory(format!(
                "timestamps not strictly increasing ({} then {}) in {:?}",
                w[0].t, w[1].t, object_id
            )));
        }
        Ok(Self { object_id, points })
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<TrajectoryPoint> {
        self.points
    }
}

/// Admissible speed interval `[v_min, v_max]` in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedBounds {
    #[serde(default)]
    pub v_min: f64,
    pub v_max: f64,
}

impl SpeedBounds {
    pub fn new(v_min: f64, v_max: f64) -> Result<Self> {
        let bounds = Self { v_min, v_max };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_min >= 0.0 && self.v_max > self.v_min) || !self.v_max.is_finite() {
            return Err(Error::Config(format!(
                "speed bounds need 0 <= v_min < v_max, got [{}, {}]",
                self.v_min, self.v_max
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, speed: f64) -> bool {
        speed >= self.v_min && speed <= self.v_max
    }
}

/// Sorted, duplicate-free indices of flagged points within one trajectory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSet(Vec<usize>);

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn insert(&mut self, index: usize) -> bool {
        match self.0.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, index);
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Largest index, if any.
    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Builds the set of indices in `0..n` for which `keep[i]` is false.
    pub fn complement_of(keep: &[bool]) -> Self {
        Self(
            keep.iter()
                .enumerate()
                .filter_map(|(i, &k)| (!k).then_some(i))
                .collect(),
        )
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<Vec<usize>> for LabelSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(t: f64) -> TrajectoryPoint {
        TrajectoryPoint::new("a", t, 0.0, 0.0, None, None).unwrap()
    }

    #[test]
    fn longitude_is_wrapped() {
        assert_eq!(normalize_lon(180.0), -180.0);
        assert_eq!(normalize_lon(190.0), -170.0);
        assert_eq!(normalize_lon(-190.0), 170.0);
        assert_eq!(normalize_lon(12.5), 12.5);
        assert!((normalize_lon(540.0) - -180.0).abs() < 1e-12);
    }

    #[test]
    fn point_rejects_out_of_range_fields() {
        assert!(TrajectoryPoint::new("a", 0.0, 91.0, 0.0, None, None).is_err());
        assert!(TrajectoryPoint::new("a", 0.0, 0.0, 0.0, Some(-1.0), None).is_err());
        assert!(TrajectoryPoint::new("a", 0.0, 0.0, 0.0, None, Some(361.0)).is_err());
        let p = TrajectoryPoint::new("a", 0.0, 0.0, 0.0, None, Some(360.0)).unwrap();
        assert_eq!(p.recorded_bearing, Some(0.0));
    }

    #[test]
    fn trajectory_requires_increasing_time() {
        assert!(Trajectory::new("a", vec![pt(0.0), pt(1.0)]).is_ok());
        assert!(Trajectory::new("a", vec![pt(1.0), pt(1.0)]).is_err());
        let other = TrajectoryPoint::new("b", 2.0, 0.0, 0.0, None, None).unwrap();
        assert!(Trajectory::new("a", vec![pt(0.0), other]).is_err());
    }

    #[test]
    fn label_set_is_sorted_and_unique() {
        let labels: LabelSet = vec![7, 3, 7, 1].into();
        assert_eq!(labels.as_slice(), &[1, 3, 7]);
        let mut labels = labels;
        assert!(labels.insert(5));
        assert!(!labels.insert(5));
        assert_eq!(labels.as_slice(), &[1, 3, 5, 7]);
        assert_eq!(LabelSet::complement_of(&[true, false, true, false]).as_slice(), &[1, 3]);
    }

    #[test]
    fn speed_bounds_validation() {
        assert!(SpeedBounds::new(0.0, 10.0).is_ok());
        assert!(SpeedBounds::new(10.0, 10.0).is_err());
        assert!(SpeedBounds::new(-1.0, 10.0).is_err());
    }
}
