//! CSV ingestion with configurable column mappings.
//!
//! A mapping is a small TOML file:
//!
//! ```toml
//! id = "MMSI"             # column name, or a 0-based index such as 0
//! t = "BaseDateTime"
//! lat = "LAT"
//! lon = "LON"
//! speed = "SOG"           # optional
//! bearing = "COG"         # optional
//! t_format = "iso8601"    # epoch_s | epoch_ms | iso8601
//! speed_unit = "knots"    # m/s | knots | km/h
//! delimiter = ","
//! header = true
//! kind = "ais"            # ais | gps; picks the speed_unit default
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Trajectory, TrajectoryPoint};

pub const METERS_PER_SECOND_PER_KNOT: f64 = 0.514444;
const METERS_PER_SECOND_PER_KMH: f64 = 1.0 / 3.6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl From<&str> for ColumnRef {
    fn from(s: &str) -> Self {
        ColumnRef::Name(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TimestampFormat {
    #[default]
    #[serde(rename = "epoch_s")]
    EpochSeconds,
    #[serde(rename = "epoch_ms")]
    EpochMillis,
    #[serde(rename = "iso8601")]
    Iso8601,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeedUnit {
    #[serde(rename = "m/s")]
    MetersPerSecond,
    #[serde(rename = "knots")]
    Knots,
    #[serde(rename = "km/h")]
    KilometersPerHour,
}

impl SpeedUnit {
    pub fn to_meters_per_second(self, v: f64) -> f64 {
        match self {
            SpeedUnit::MetersPerSecond => v,
            SpeedUnit::Knots => v * METERS_PER_SECOND_PER_KNOT,
            SpeedUnit::KilometersPerHour => v * METERS_PER_SECOND_PER_KMH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Ais,
    #[default]
    Gps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub id: ColumnRef,
    pub t: ColumnRef,
    pub lat: ColumnRef,
    pub lon: ColumnRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<ColumnRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bearing: Option<ColumnRef>,
    #[serde(default)]
    pub t_format: TimestampFormat,
    pub speed_unit: SpeedUnit,
    pub delimiter: char,
    pub header: bool,
}

impl Default for ColumnMapping {
    /// Schema written by the synthetic generator.
    fn default() -> Self {
        Self {
            id: "object_id".into(),
            t: "t".into(),
            lat: "lat".into(),
            lon: "lon".into(),
            speed: Some("speed".into()),
            bearing: Some("bearing".into()),
            t_format: TimestampFormat::EpochSeconds,
            speed_unit: SpeedUnit::MetersPerSecond,
            delimiter: ',',
            header: true,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    id: Option<ColumnRef>,
    t: Option<ColumnRef>,
    lat: Option<ColumnRef>,
    lon: Option<ColumnRef>,
    speed: Option<ColumnRef>,
    bearing: Option<ColumnRef>,
    t_format: Option<TimestampFormat>,
    speed_unit: Option<SpeedUnit>,
    delimiter: Option<String>,
    header: Option<bool>,
    #[serde(default)]
    kind: DatasetKind,
}

impl ColumnMapping {
    /// MarineCadastre-style AIS export: knots and ISO timestamps.
    pub fn ais() -> Self {
        Self {
            id: "MMSI".into(),
            t: "BaseDateTime".into(),
            lat: "LAT".into(),
            lon: "LON".into(),
            speed: Some("SOG".into()),
            bearing: Some("COG".into()),
            t_format: TimestampFormat::Iso8601,
            speed_unit: SpeedUnit::Knots,
            delimiter: ',',
            header: true,
        }
    }

    /// Parses the TOML mapping grammar documented at module level.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let file: MappingFile =
            toml::from_str(src).map_err(|e| Error::Mapping(e.message().to_owned()))?;
        Self::from_file(file)
    }

    pub fn from_toml_table(table: &toml::Table) -> Result<Self> {
        let file: MappingFile = table
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::Mapping(e.message().to_owned()))?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&src)
    }

    fn from_file(f: MappingFile) -> Result<Self> {
        let missing = |key: &str| Error::Mapping(format!("mandatory key `{key}` missing"));
        let delimiter = match f.delimiter.as_deref() {
            None => ',',
            Some(s) => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii() => c,
                    _ => {
                        return Err(Error::Mapping(format!(
                            "delimiter must be a single ASCII character, got {s:?}"
                        )))
                    }
                }
            }
        };
        let speed_unit = f.speed_unit.unwrap_or(match f.kind {
            DatasetKind::Ais => SpeedUnit::Knots,
            DatasetKind::Gps => SpeedUnit::MetersPerSecond,
        });
        Ok(Self {
            id: f.id.ok_or_else(|| missing("id"))?,
            t: f.t.ok_or_else(|| missing("t"))?,
            lat: f.lat.ok_or_else(|| missing("lat"))?,
            lon: f.lon.ok_or_else(|| missing("lon"))?,
            speed: f.speed,
            bearing: f.bearing,
            t_format: f.t_format.unwrap_or_default(),
            speed_unit,
            delimiter,
            header: f.header.unwrap_or(true),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectTally {
    pub malformed: usize,
    pub duplicate_timestamp: usize,
    pub out_of_range: usize,
}

impl RejectTally {
    pub fn total(&self) -> usize {
        self.malformed + self.duplicate_timestamp + self.out_of_range
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub points_accepted: usize,
    pub rows_rejected: usize,
    pub rejected: RejectTally,
    pub trajectories_built: usize,
}

/// Reads a delimited file into per-object trajectories. Rows that fail to
/// parse are counted in the report and skipped.
pub fn parse_dataset(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
) -> Result<(Vec<Trajectory>, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_reader(file, mapping)
}

pub fn parse_reader<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
) -> Result<(Vec<Trajectory>, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .has_headers(mapping.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let columns = ResolvedColumns::resolve(mapping, &mut rdr)?;
    let mut report = IngestReport::default();
    let mut ids: BTreeMap<String, Arc<str>> = BTreeMap::new();
    let mut points = Vec::new();

    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                report.rows_read += 1;
                match columns.point_from(&record, mapping, &mut ids) {
                    Ok(p) => points.push(p),
                    Err(RowError::Malformed) => report.rejected.malformed += 1,
                    Err(RowError::OutOfRange) => report.rejected.out_of_range += 1,
                }
            }
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                report.rows_read += 1;
                report.rejected.malformed += 1;
            }
        }
    }

    let (trajectories, duplicates) = order_by_id_and_timestamp(points);
    report.rejected.duplicate_timestamp = duplicates;
    report.rows_rejected = report.rejected.total();
    report.points_accepted = trajectories.iter().map(Trajectory::len).sum();
    report.trajectories_built = trajectories.len();
    debug_assert_eq!(report.rows_read, report.points_accepted + report.rows_rejected);
    Ok((trajectories, report))
}

/// Groups points by object id (ascending) and sorts each group by time.
/// Points repeating an `(id, t)` pair are dropped, keeping the first seen;
/// the number dropped is returned alongside.
pub fn order_by_id_and_timestamp(mut points: Vec<TrajectoryPoint>) -> (Vec<Trajectory>, usize) {
    // stable sort keeps input order among equal timestamps
    points.sort_by(|a, b| {
        a.object_id
            .cmp(&b.object_id)
            .then_with(|| a.t.total_cmp(&b.t))
    });

    let mut trajectories = Vec::new();
    let mut duplicates = 0;
    let mut current: Vec<TrajectoryPoint> = Vec::new();
    for p in points {
        if let Some(last) = current.last() {
            if last.object_id != p.object_id {
                let done = std::mem::take(&mut current);
                trajectories.push(build(done));
            } else if last.t == p.t {
                duplicates += 1;
                continue;
            }
        }
        current.push(p);
    }
    if !current.is_empty() {
        trajectories.push(build(current));
    }
    (trajectories, duplicates)
}

fn build(points: Vec<TrajectoryPoint>) -> Trajectory {
    let id = points[0].object_id.clone();
    Trajectory::new(id, points).expect("grouped and sorted points form a valid trajectory")
}

enum RowError {
    Malformed,
    OutOfRange,
}

struct ResolvedColumns {
    id: usize,
    t: usize,
    lat: usize,
    lon: usize,
    speed: Option<usize>,
    bearing: Option<usize>,
}

impl ResolvedColumns {
    fn resolve<R: Read>(mapping: &ColumnMapping, rdr: &mut csv::Reader<R>) -> Result<Self> {
        let headers = if mapping.header {
            Some(rdr.headers()?.clone())
        } else {
            None
        };
        let find = |key: &str, col: &ColumnRef| -> Result<usize> {
            match (col, &headers) {
                (ColumnRef::Index(i), _) => Ok(*i),
                (ColumnRef::Name(name), Some(h)) => {
                    h.iter().position(|c| c == name).ok_or_else(|| {
                        Error::Mapping(format!("column {name:?} for `{key}` not in header"))
                    })
                }
                (ColumnRef::Name(name), None) => Err(Error::Mapping(format!(
                    "`{key}` refers to column {name:?} but the file has no header"
                ))),
            }
        };
        Ok(Self {
            id: find("id", &mapping.id)?,
            t: find("t", &mapping.t)?,
            lat: find("lat", &mapping.lat)?,
            lon: find("lon", &mapping.lon)?,
            speed: mapping.speed.as_ref().map(|c| find("speed", c)).transpose()?,
            bearing: mapping
                .bearing
                .as_ref()
                .map(|c| find("bearing", c))
                .transpose()?,
        })
    }

    fn point_from(
        &self,
        record: &csv::StringRecord,
        mapping: &ColumnMapping,
        ids: &mut BTreeMap<String, Arc<str>>,
    ) -> std::result::Result<TrajectoryPoint, RowError> {
        let field = |i: usize| record.get(i).ok_or(RowError::Malformed);
        let number = |i: usize| -> std::result::Result<f64, RowError> {
            field(i)?
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or(RowError::Malformed)
        };
        let optional = |i: Option<usize>| -> std::result::Result<Option<f64>, RowError> {
            match i {
                None => Ok(None),
                Some(i) => match record.get(i) {
                    None | Some("") => Ok(None),
                    Some(_) => number(i).map(Some),
                },
            }
        };

        let id = field(self.id)?;
        if id.is_empty() {
            return Err(RowError::Malformed);
        }
        let t = parse_timestamp(field(self.t)?, mapping.t_format).ok_or(RowError::Malformed)?;
        let lat = number(self.lat)?;
        let lon = number(self.lon)?;
        let speed = optional(self.speed)?.map(|v| mapping.speed_unit.to_meters_per_second(v));
        let bearing = optional(self.bearing)?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(RowError::OutOfRange);
        }

        let shared = match ids.get(id) {
            Some(s) => s.clone(),
            None => {
                let s: Arc<str> = Arc::from(id);
                ids.insert(id.to_owned(), s.clone());
                s
            }
        };
        TrajectoryPoint::new(shared, t, lat, lon, speed, bearing).map_err(|_| RowError::OutOfRange)
    }
}

/// Converts a timestamp field to epoch seconds. ISO timestamps without an
/// offset are taken as UTC.
pub fn parse_timestamp(s: &str, format: TimestampFormat) -> Option<f64> {
    match format {
        TimestampFormat::EpochSeconds => s.parse::<f64>().ok().filter(|v| v.is_finite()),
        TimestampFormat::EpochMillis => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|ms| ms / 1000.0),
        TimestampFormat::Iso8601 => {
            let dt = DateTime::parse_from_rfc3339(s)
                .map(|d| d.naive_utc())
                .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f"))
                .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
                .ok()?
                .and_utc();
            Some(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9)
        }
    }
}
