//! The KSU learner: greedy γ-nets at every candidate scale, empirical
//! majority relabeling of the Voronoi cells, and selection of the scale that
//! minimizes the compression bound. The output is a 1-NN classifier over the
//! relabeled net.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bound::{delta_schedule, q_bound, BoundInput, BoundParams};
use crate::metric::{Label, LabeledSample, MetricSpace};
use crate::net::{greedy_net, nearest_anchor, voronoi, Direct, DistanceMatrix, GammaNet, IndexedDistance, VoronoiAssignment};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Largest sample for which `ScalePolicy::Auto` uses every pairwise distance.
pub const AUTO_FULL_MAX_N: usize = 500;

/// Largest sample for which pairwise distances are tabulated up front.
const MATRIX_MAX_N: usize = 2048;

/// Which scales `fit` tries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ScalePolicy {
    /// Every distinct nonzero pairwise distance.
    Full,
    /// `γ_min·r^i` up to the diameter, plus the diameter itself.
    Geometric(f64),
    /// `Full` for `n ≤ 500`, `Geometric(2)` above.
    #[default]
    Auto,
}

impl ScalePolicy {
    pub fn resolve(self, n: usize) -> ScalePolicy {
        match self {
            ScalePolicy::Auto if n <= AUTO_FULL_MAX_N => ScalePolicy::Full,
            ScalePolicy::Auto => ScalePolicy::Geometric(2.0),
            p => p,
        }
    }
}

impl fmt::Display for ScalePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalePolicy::Full => write!(f, "full"),
            ScalePolicy::Geometric(r) => write!(f, "geo:{r}"),
            ScalePolicy::Auto => write!(f, "auto"),
        }
    }
}

impl FromStr for ScalePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ScalePolicy::Full),
            "auto" => Ok(ScalePolicy::Auto),
            _ => {
                let r = s
                    .strip_prefix("geo:")
                    .and_then(|r| r.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown scale policy {s:?}")))?;
                if !(r > 1.0 && r.is_finite()) {
                    return Err(Error::InvalidParameter(format!("geometric ratio must exceed 1, got {r}")));
                }
                Ok(ScalePolicy::Geometric(r))
            }
        }
    }
}

/// Confidence parameter handed to the bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaPolicy {
    /// `delta_schedule(n)`.
    #[default]
    Auto,
    Fixed(f64),
}

impl DeltaPolicy {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            DeltaPolicy::Auto => delta_schedule(n),
            DeltaPolicy::Fixed(d) => d,
        }
    }
}

impl FromStr for DeltaPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(DeltaPolicy::Auto);
        }
        let d: f64 = s.parse().map_err(|_| Error::InvalidParameter(format!("bad delta {s:?}")))?;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {d} outside (0,1)")));
        }
        Ok(DeltaPolicy::Fixed(d))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub delta: DeltaPolicy,
    pub params: BoundParams,
    pub scales: ScalePolicy,
    pub exec: Execution,
}

/// Outcome of one candidate scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleDiagnostics {
    pub gamma: f64,
    pub kappa: usize,
    pub alpha: f64,
    /// `Q(n, α, 2κ, δ)`, or `+∞` when `2κ ≥ n` leaves the bound undefined.
    #[serde(with = "inf_as_null")]
    pub q_value: f64,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// The relabeled net selected by `fit`, usable as a 1-NN classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedClassifier<P> {
    pub anchors: Vec<(P, Label)>,
    /// Sample positions of the anchors.
    pub anchor_indices: Vec<usize>,
    pub gamma_star: f64,
    pub alpha_star: f64,
    pub kappa_star: usize,
    #[serde(with = "inf_as_null")]
    pub q_star: f64,
    pub per_scale: Vec<ScaleDiagnostics>,
    /// Scales abandoned once their net exceeded `(n−1)/2` anchors (bound undefined there).
    pub pruned_scales: Vec<f64>,
    pub n: usize,
    pub delta: f64,
    pub params: BoundParams,
    /// Resolved scale policy, e.g. `full` or `geo:2`.
    pub scale_policy: String,
    /// True when scales came from a geometric grid rather than all pairwise distances.
    pub geometric_grid: bool,
}

impl<P> CompressedClassifier<P> {
    /// Label of the nearest anchor; exact ties go to the earlier anchor.
    pub fn predict<S>(&self, x: &P, space: &S) -> Result<Label>
    where
        S: MetricSpace<Point = P>,
        P: Clone + PartialEq + Send + Sync,
    {
        let mut best = (f64::INFINITY, Label(0));
        for (a, y) in &self.anchors {
            let d = space.distance(x, a)?;
            if d < best.0 {
                best = (d, *y);
            }
        }
        if self.anchors.is_empty() {
            return Err(Error::Empty("classifier"));
        }
        Ok(best.1)
    }

    pub fn predict_many<S>(&self, xs: &[P], space: &S, exec: Execution) -> Result<Vec<Label>>
    where
        S: MetricSpace<Point = P>,
        P: Clone + PartialEq + Send + Sync,
    {
        par::map_slice(exec, xs, |x| self.predict(x, space)).into_iter().collect()
    }
}

/// Candidate scales in ascending order; empty iff all points coincide.
pub fn candidate_scales<S: MetricSpace>(
    points: &[S::Point],
    space: &S,
    policy: ScalePolicy,
    exec: Execution,
) -> Result<Vec<f64>> {
    match policy.resolve(points.len()) {
        ScalePolicy::Full => {
            let rows = par::try_map_range(exec, points.len(), |i| {
                let mut seen = HashSet::new();
                for q in &points[i + 1..] {
                    let d = space.distance(&points[i], q)?;
                    if d > 0.0 {
                        seen.insert(d.to_bits());
                    }
                }
                Ok::<_, Error>(seen)
            })?;
            let mut all: HashSet<u64> = HashSet::new();
            for r in rows {
                all.extend(r);
            }
            let mut scales: Vec<f64> = all.into_iter().map(f64::from_bits).collect();
            scales.sort_by(f64::total_cmp);
            Ok(scales)
        }
        ScalePolicy::Geometric(ratio) => {
            if !(ratio > 1.0) {
                return Err(Error::InvalidParameter(format!("geometric ratio must exceed 1, got {ratio}")));
            }
            let extremes = par::try_map_range(exec, points.len(), |i| {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for q in &points[i + 1..] {
                    let d = space.distance(&points[i], q)?;
                    if d > 0.0 {
                        lo = lo.min(d);
                    }
                    hi = hi.max(d);
                }
                Ok::<_, Error>((lo, hi))
            })?;
            let (min, diam) = extremes
                .into_iter()
                .fold((f64::INFINITY, 0.0f64), |(a, b), (lo, hi)| (a.min(lo), b.max(hi)));
            if diam == 0.0 {
                return Ok(Vec::new());
            }
            let mut scales = Vec::new();
            let mut g = min;
            while g < diam {
                scales.push(g);
                g *= ratio;
            }
            scales.push(diam);
            Ok(scales)
        }
        ScalePolicy::Auto => unreachable!("resolved above"),
    }
}

/// Most frequent label in each cell; count ties go to the smaller label id.
pub fn majority_relabel(labels: &[Label], assignment: &VoronoiAssignment) -> Result<Vec<Label>> {
    assignment
        .cells
        .iter()
        .enumerate()
        .map(|(pos, members)| {
            let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
            for &i in members {
                *counts.entry(labels[i]).or_default() += 1;
            }
            let mut best: Option<(Label, usize)> = None;
            for (y, c) in counts {
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((y, c));
                }
            }
            best.map(|(y, _)| y).ok_or(Error::EmptyCell(pos))
        })
        .collect()
}

struct ScaleFit {
    net: GammaNet,
    cell_labels: Vec<Label>,
    alpha: f64,
}

fn fit_scale(
    dist: &impl IndexedDistance,
    labels: &[Label],
    gamma: f64,
    max_anchors: Option<usize>,
    exec: Execution,
) -> Result<Option<ScaleFit>> {
    let Some(net) = greedy_net(dist, gamma, max_anchors)? else {
        return Ok(None);
    };
    let assignment = voronoi(dist, &net, exec)?;
    let cell_labels = majority_relabel(labels, &assignment)?;
    let wrong = assignment
        .cell_of
        .iter()
        .zip(labels)
        .filter(|(&c, &y)| cell_labels[c] != y)
        .count();
    Ok(Some(ScaleFit { net, cell_labels, alpha: wrong as f64 / labels.len() as f64 }))
}

fn bound_or_inf(n: usize, alpha: f64, kappa: usize, delta: f64, params: BoundParams) -> Result<f64> {
    if 2 * kappa >= n {
        return Ok(f64::INFINITY);
    }
    q_bound(BoundInput { n, alpha, m: 2 * kappa, delta }, params)
}

/// Runs the learner on `sample`.
///
/// Every candidate scale is evaluated independently (concurrently under
/// `Execution::Parallel`); the scale minimizing `Q(n, α(γ), 2κ(γ), δ)` wins,
/// with ties going to the larger scale.
pub fn fit<S: MetricSpace>(
    sample: &LabeledSample<S::Point>,
    space: &S,
    opts: &FitOptions,
) -> Result<CompressedClassifier<S::Point>> {
    let n = sample.len();
    let delta = opts.delta.resolve(n);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0,1)")));
    }
    let policy = opts.scales.resolve(n);
    let scales = candidate_scales(sample.points(), space, policy, opts.exec)?;
    if n <= MATRIX_MAX_N {
        let dist = DistanceMatrix::compute(space, sample.points(), opts.exec)?;
        fit_with(sample, &dist, &scales, delta, policy, opts)
    } else {
        let dist = Direct { space, points: sample.points() };
        fit_with(sample, &dist, &scales, delta, policy, opts)
    }
}

fn fit_with<P: Clone>(
    sample: &LabeledSample<P>,
    dist: &impl IndexedDistance,
    scales: &[f64],
    delta: f64,
    policy: ScalePolicy,
    opts: &FitOptions,
) -> Result<CompressedClassifier<P>> {
    let n = sample.len();
    let labels = sample.labels();
    let params = opts.params;
    let geometric_grid = matches!(policy, ScalePolicy::Geometric(_));

    if scales.is_empty() {
        // All points coincide.
        let assignment = VoronoiAssignment { cell_of: vec![0; n], cells: vec![(0..n).collect()] };
        let label = majority_relabel(labels, &assignment)?[0];
        let alpha = labels.iter().filter(|&&y| y != label).count() as f64 / n as f64;
        let q_star = bound_or_inf(n, alpha, 1, delta, params)?;
        return Ok(CompressedClassifier {
            anchors: vec![(sample.point(0).clone(), label)],
            anchor_indices: vec![0],
            gamma_star: 0.0,
            alpha_star: alpha,
            kappa_star: 1,
            q_star,
            per_scale: Vec::new(),
            pruned_scales: Vec::new(),
            n,
            delta,
            params,
            scale_policy: policy.to_string(),
            geometric_grid,
        });
    }

    let feasible_kappa = (n - 1) / 2;
    let largest = scales.len() - 1;
    let inner = Execution::Sequential;
    let results = par::try_map_range(opts.exec, scales.len(), |s| {
        let cap = (s != largest).then_some(feasible_kappa);
        let fitted = fit_scale(dist, labels, scales[s], cap, inner)?;
        fitted
            .map(|f| {
                let kappa = f.net.kappa();
                let q_value = bound_or_inf(n, f.alpha, kappa, delta, params)?;
                Ok::<_, Error>(ScaleDiagnostics { gamma: scales[s], kappa, alpha: f.alpha, q_value })
            })
            .transpose()
    })?;

    let mut per_scale = Vec::with_capacity(results.len());
    let mut pruned_scales = Vec::new();
    for (s, r) in results.into_iter().enumerate() {
        match r {
            Some(d) => per_scale.push(d),
            None => pruned_scales.push(scales[s]),
        }
    }

    let mut best = per_scale.len() - 1;
    for (i, d) in per_scale.iter().enumerate().rev() {
        if d.q_value < per_scale[best].q_value {
            best = i;
        }
    }
    let chosen = per_scale[best];
    let fitted = fit_scale(dist, labels, chosen.gamma, None, opts.exec)?
        .expect("uncapped scale always completes");
    let anchors = fitted
        .net
        .anchor_indices
        .iter()
        .zip(&fitted.cell_labels)
        .map(|(&i, &y)| (sample.point(i).clone(), y))
        .collect();
    Ok(CompressedClassifier {
        anchors,
        anchor_indices: fitted.net.anchor_indices,
        gamma_star: chosen.gamma,
        alpha_star: chosen.alpha,
        kappa_star: chosen.kappa,
        q_star: chosen.q_value,
        per_scale,
        pruned_scales,
        n,
        delta,
        params,
        scale_policy: policy.to_string(),
        geometric_grid,
    })
}

/// Index vectors showing the classifier is reconstructible from `2κ` sample
/// positions: `points[i]` are the anchor points, `labels[j]` their labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressionWitness {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompressionViolation {
    /// The anchor point does not occur in the sample.
    AnchorNotInSample { anchor: usize },
    /// No sample point in the anchor's cell carries the anchor's label.
    LabelNotInCell { anchor: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompressionCheck {
    Valid(CompressionWitness),
    Invalid(CompressionViolation),
}

impl CompressionCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, CompressionCheck::Valid(_))
    }
}

/// Checks that `classifier` is a `(err, 2κ)`-compression of `sample`.
pub fn verify_compression<S: MetricSpace>(
    sample: &LabeledSample<S::Point>,
    classifier: &CompressedClassifier<S::Point>,
    space: &S,
) -> Result<CompressionCheck> {
    let mut i_vec = Vec::with_capacity(classifier.anchors.len());
    for (pos, (a, _)) in classifier.anchors.iter().enumerate() {
        match sample.points().iter().position(|p| p == a) {
            Some(i) => i_vec.push(i),
            None => return Ok(CompressionCheck::Invalid(CompressionViolation::AnchorNotInSample { anchor: pos })),
        }
    }
    let dist = Direct { space, points: sample.points() };
    let cell_of = par::try_map_range(Execution::default(), sample.len(), |j| nearest_anchor(&dist, &i_vec, j))?;
    let mut j_vec = vec![None; classifier.anchors.len()];
    for (j, &c) in cell_of.iter().enumerate() {
        if j_vec[c].is_none() && sample.label(j) == classifier.anchors[c].1 {
            j_vec[c] = Some(j);
        }
    }
    let mut j_out = Vec::with_capacity(j_vec.len());
    for (pos, j) in j_vec.into_iter().enumerate() {
        match j {
            Some(j) => j_out.push(j),
            None => return Ok(CompressionCheck::Invalid(CompressionViolation::LabelNotInCell { anchor: pos })),
        }
    }
    Ok(CompressionCheck::Valid(CompressionWitness { i: i_vec, j: j_out }))
}
