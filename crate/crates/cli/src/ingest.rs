//! Reading directional data from CSV.

use std::io::Read;
use std::path::{Path, PathBuf};

use rotsym::geometry::DirectionalSample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rows closer than this to unit norm are kept bit-for-bit.
const EXACT_UNIT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Format {
    /// `p` columns per row, each row a unit vector.
    UnitVectorsCsv,
    /// Two columns, geographic longitude and latitude in degrees.
    LonlatDegreesCsv,
}

#[derive(Debug, Clone)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub format: Format,
    /// Rows with `|‖x‖ - 1|` up to this value are renormalised.
    pub tolerance: f64,
    pub header: bool,
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>, format: Format) -> Self {
        Self {
            path: path.into(),
            format,
            tolerance: 1e-3,
            header: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("tolerance must lie in (0, 0.1), got {0}")]
    InvalidTolerance(f64),
    #[error("row {row}: {message}")]
    Malformed { row: u64, message: String },
    #[error("row {row}: expected {expected} columns, found {found}")]
    DimensionMismatch { row: u64, expected: usize, found: usize },
    #[error("row {row}: norm {norm} is off the unit sphere by more than {tolerance}")]
    NormViolation { row: u64, norm: f64, tolerance: f64 },
    #[error("row {row}: latitude {lat} outside [-90, 90]")]
    LatitudeOutOfRange { row: u64, lat: f64 },
    #[error("no data rows")]
    Empty,
    #[error("need at least 3 coordinates per row, found {0}")]
    DimensionTooSmall(usize),
}

impl IngestError {
    /// 1-based line of the offending row, when there is one.
    pub fn row(&self) -> Option<u64> {
        match self {
            Self::Malformed { row, .. }
            | Self::DimensionMismatch { row, .. }
            | Self::NormViolation { row, .. }
            | Self::LatitudeOutOfRange { row, .. } => Some(*row),
            _ => None,
        }
    }
}

/// `(λ°, φ°) ↦ (cos φ cos λ, cos φ sin λ, sin φ)`.
pub fn lonlat_to_unit(lon_deg: f64, lat_deg: f64) -> [f64; 3] {
    let (lon, lat) = (lon_deg.to_radians(), lat_deg.to_radians());
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

pub fn ingest(spec: &IngestSpec) -> Result<DirectionalSample, IngestError> {
    let file = std::fs::File::open(&spec.path).map_err(|source| IngestError::Io {
        path: spec.path.clone(),
        source,
    })?;
    ingest_reader(file, spec)
}

pub fn ingest_path(path: &Path, format: Format, tolerance: f64, header: bool) -> Result<DirectionalSample, IngestError> {
    ingest(&IngestSpec {
        path: path.to_path_buf(),
        format,
        tolerance,
        header,
    })
}

pub fn ingest_reader<R: Read>(reader: R, spec: &IngestSpec) -> Result<DirectionalSample, IngestError> {
    if !(spec.tolerance > 0.0 && spec.tolerance < 0.1) {
        return Err(IngestError::InvalidTolerance(spec.tolerance));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(spec.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut data = Vec::new();
    let mut p = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::Malformed {
            row: e.position().map_or(0, |pos| pos.line()),
            message: e.to_string(),
        })?;
        let row = rec.position().map_or(0, |pos| pos.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let values = rec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| IngestError::Malformed {
                        row,
                        message: format!("column {}: cannot parse {s:?} as a finite number", j + 1),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let x = match spec.format {
            Format::UnitVectorsCsv => {
                let expected = *p.get_or_insert(values.len());
                if values.len() != expected {
                    return Err(IngestError::DimensionMismatch {
                        row,
                        expected,
                        found: values.len(),
                    });
                }
                unit_row(values, row, spec.tolerance)?
            }
            Format::LonlatDegreesCsv => {
                if values.len() != 2 {
                    return Err(IngestError::DimensionMismatch {
                        row,
                        expected: 2,
                        found: values.len(),
                    });
                }
                if !(-90.0..=90.0).contains(&values[1]) {
                    return Err(IngestError::LatitudeOutOfRange { row, lat: values[1] });
                }
                p = Some(3);
                lonlat_to_unit(values[0], values[1]).to_vec()
            }
        };
        data.extend(x);
    }
    let p = p.ok_or(IngestError::Empty)?;
    if p < 3 {
        return Err(IngestError::DimensionTooSmall(p));
    }
    Ok(DirectionalSample::from_flat(p, data).expect("rows validated during ingest"))
}

fn unit_row(mut x: Vec<f64>, row: u64, tol: f64) -> Result<Vec<f64>, IngestError> {
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let dev = (norm - 1.0).abs();
    // a few ulps of slack so that decimal inputs such as 0.999 with tol 1e-3
    // sit inside the boundary
    if dev > tol + 4.0 * f64::EPSILON {
        return Err(IngestError::NormViolation { row, norm, tolerance: tol });
    }
    if dev > EXACT_UNIT {
        x.iter_mut().for_each(|a| *a /= norm);
    }
    Ok(x)
}

/// CSV text of a sample, one row per observation, shortest round-trip
/// formatting so that re-ingesting reproduces every bit.
pub fn write_sample<W: std::io::Write>(sample: &DirectionalSample, w: W) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for x in sample.rows() {
        wtr.write_record(x.iter().map(|a| format!("{a}")))?;
    }
    wtr.flush()?;
    Ok(())
}
