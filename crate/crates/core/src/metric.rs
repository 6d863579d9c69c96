//! Metric spaces, labeled samples and empirical error.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Class label from a countable label space; ordered by id for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A metric space over points of type `Self::Point`.
///
/// Implementations must be symmetric, vanish exactly on the diagonal and satisfy
/// the triangle inequality. Distances are returned as `f64`; spaces whose
/// distances are exactly representable (the Preiss tree metric) return exact values.
pub trait MetricSpace: Sync {
    type Point: Clone + PartialEq + Send + Sync;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;

    /// Doubling dimension, when known.
    fn ddim_hint(&self) -> Option<f64> {
        None
    }
}

/// Point of a finite-dimensional real vector space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EuclideanPoint {
    coords: Vec<f64>,
}

impl EuclideanPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl TryFrom<Vec<f64>> for EuclideanPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EuclideanPoint> for Vec<f64> {
    fn from(p: EuclideanPoint) -> Self {
        p.coords
    }
}

/// Standard ℓ2 metric. Points of different dimension are rejected.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl MetricSpace for Euclidean {
    type Point = EuclideanPoint;

    #[inline]
    fn distance(&self, x: &EuclideanPoint, y: &EuclideanPoint) -> Result<f64> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
        }
        let s: f64 = x.coords.iter().zip(&y.coords).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(s.sqrt())
    }
}

/// Indexed list of `(point, label)` pairs. Position `i` is the identity of example `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<P> {
    points: Vec<P>,
    labels: Vec<Label>,
}

impl<P> LabeledSample<P> {
    pub fn new(points: Vec<P>, labels: Vec<Label>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("labeled sample"));
        }
        if points.len() != labels.len() {
            return Err(Error::Mismatch(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        Ok(Self { points, labels })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (P, Label)>) -> Result<Self> {
        let (points, labels) = pairs.into_iter().unzip();
        Self::new(points, labels)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: samples are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn point(&self, i: usize) -> &P {
        &self.points[i]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, Label)> {
        self.points.iter().zip(self.labels.iter().copied())
    }
}

/// Fraction of `(points[i], labels[i])` that `predict` gets wrong.
pub fn empirical_error<P, F>(mut predict: F, points: &[P], labels: &[Label]) -> Result<f64>
where
    F: FnMut(&P) -> Result<Label>,
{
    if points.is_empty() {
        return Err(Error::Empty("evaluation subset"));
    }
    if points.len() != labels.len() {
        return Err(Error::Mismatch(format!("{} points but {} labels", points.len(), labels.len())));
    }
    let mut wrong = 0usize;
    for (x, &y) in points.iter().zip(labels) {
        if predict(x)? != y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / points.len() as f64)
}

fn read_rows<R: Read>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn parse_coords(line: usize, fields: &[String]) -> Result<EuclideanPoint> {
    let coords = fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::Parse { line, msg: format!("bad coordinate {f:?}: {e}") })
        })
        .collect::<Result<Vec<_>>>()?;
    EuclideanPoint::new(coords).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

/// Reads `x_1,…,x_d,label` rows. All rows must have the same width.
pub fn read_csv_sample<R: Read>(reader: R) -> Result<LabeledSample<EuclideanPoint>> {
    let rows = read_rows(reader)?;
    let width = rows.first().map(|(_, r)| r.len()).ok_or(Error::Empty("CSV sample"))?;
    if width < 2 {
        return Err(Error::Parse { line: rows[0].0, msg: "need at least one coordinate and a label".into() });
    }
    let mut points = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        if row.len() != width {
            return Err(Error::Parse { line, msg: format!("expected {width} fields, found {}", row.len()) });
        }
        points.push(parse_coords(line, &row[..width - 1])?);
        let raw = &row[width - 1];
        let label = raw
            .parse::<u32>()
            .map_err(|e| Error::Parse { line, msg: format!("bad label {raw:?}: {e}") })?;
        labels.push(Label(label));
    }
    LabeledSample::new(points, labels)
}

/// Reads unlabeled rows of `dim` coordinates; a trailing label column (width `dim + 1`) is ignored.
pub fn read_csv_points<R: Read>(reader: R, dim: usize) -> Result<Vec<EuclideanPoint>> {
    read_rows(reader)?
        .into_iter()
        .map(|(line, row)| {
            if row.len() != dim && row.len() != dim + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {dim} coordinates, found {} fields", row.len()),
                });
            }
            parse_coords(line, &row[..dim])
        })
        .collect()
}

pub fn load_csv_sample(path: impl AsRef<Path>) -> Result<LabeledSample<EuclideanPoint>> {
    read_csv_sample(std::fs::File::open(path)?)
}

pub fn write_csv_sample<W: Write>(writer: W, sample: &LabeledSample<EuclideanPoint>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for (p, y) in sample.iter() {
        let mut rec: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        rec.push(y.0.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
