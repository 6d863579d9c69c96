//! Greedy γ-nets and their Voronoi partitions.
//!
//! A γ-net of a point set here uses strict packing (anchors pairwise `> γ`
//! apart) and non-strict covering (every point within `≤ γ` of an anchor).

use serde::{Deserialize, Serialize};

use crate::metric::MetricSpace;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Anchors of a γ-net, as positions into the sample it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaNet {
    pub gamma: f64,
    pub anchor_indices: Vec<usize>,
}

impl GammaNet {
    pub fn kappa(&self) -> usize {
        self.anchor_indices.len()
    }
}

/// Nearest-anchor map for every sample point, plus the induced cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoronoiAssignment {
    /// `cell_of[i]` is the anchor position (in `0..κ`) owning sample point `i`.
    pub cell_of: Vec<usize>,
    /// Members of each cell, in ascending sample order.
    pub cells: Vec<Vec<usize>>,
}

impl VoronoiAssignment {
    fn from_cell_of(cell_of: Vec<usize>, kappa: usize) -> Result<Self> {
        let mut cells = vec![Vec::new(); kappa];
        for (i, &c) in cell_of.iter().enumerate() {
            cells[c].push(i);
        }
        if let Some(empty) = cells.iter().position(Vec::is_empty) {
            return Err(Error::EmptyCell(empty));
        }
        Ok(Self { cell_of, cells })
    }
}

/// Distances between sample points addressed by index.
pub(crate) trait IndexedDistance: Sync {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> Result<f64>;
}

pub(crate) struct Direct<'a, S: MetricSpace> {
    pub space: &'a S,
    pub points: &'a [S::Point],
}

impl<S: MetricSpace> IndexedDistance for Direct<'_, S> {
    fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> Result<f64> {
        self.space.distance(&self.points[i], &self.points[j])
    }
}

/// Dense `n × n` distance table.
pub(crate) struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn compute<S: MetricSpace>(space: &S, points: &[S::Point], exec: Execution) -> Result<Self> {
        let n = points.len();
        let rows = par::try_map_range(exec, n, |i| {
            points.iter().map(|q| space.distance(&points[i], q)).collect::<Result<Vec<f64>>>()
        })?;
        Ok(Self { n, data: rows.concat() })
    }
}

impl IndexedDistance for DistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.data[i * self.n + j])
    }
}

/// Greedy sweep in index order. Returns `None` once more than `max_anchors` anchors are needed.
pub(crate) fn greedy_net(
    dist: &impl IndexedDistance,
    gamma: f64,
    max_anchors: Option<usize>,
) -> Result<Option<GammaNet>> {
    let mut anchors: Vec<usize> = Vec::new();
    'points: for i in 0..dist.len() {
        for &a in &anchors {
            if dist.dist(i, a)? <= gamma {
                continue 'points;
            }
        }
        anchors.push(i);
        if max_anchors.is_some_and(|m| anchors.len() > m) {
            return Ok(None);
        }
    }
    Ok(Some(GammaNet { gamma, anchor_indices: anchors }))
}

pub(crate) fn voronoi(
    dist: &impl IndexedDistance,
    net: &GammaNet,
    exec: Execution,
) -> Result<VoronoiAssignment> {
    let anchors = &net.anchor_indices;
    let cell_of = par::try_map_range(exec, dist.len(), |i| nearest_anchor(dist, anchors, i))?;
    VoronoiAssignment::from_cell_of(cell_of, anchors.len())
}

#[inline]
pub(crate) fn nearest_anchor(dist: &impl IndexedDistance, anchors: &[usize], i: usize) -> Result<usize> {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (pos, &a) in anchors.iter().enumerate() {
        let d = if a == i { 0.0 } else { dist.dist(i, a)? };
        if d < best_d {
            best_d = d;
            best = pos;
        }
    }
    Ok(best)
}

/// Builds the greedy γ-net of `points`: point `i` becomes an anchor iff it is
/// more than `gamma` away from every anchor chosen before it.
pub fn build_net<S: MetricSpace>(points: &[S::Point], gamma: f64, space: &S) -> Result<GammaNet> {
    if points.is_empty() {
        return Err(Error::Empty("point set"));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let net = greedy_net(&Direct { space, points }, gamma, None)?;
    Ok(net.expect("uncapped net always completes"))
}

/// Assigns every point to its nearest anchor; exact ties go to the earlier anchor.
pub fn assign_voronoi<S: MetricSpace>(
    points: &[S::Point],
    net: &GammaNet,
    space: &S,
) -> Result<VoronoiAssignment> {
    assign_voronoi_with(points, net, space, Execution::default())
}

pub fn assign_voronoi_with<S: MetricSpace>(
    points: &[S::Point],
    net: &GammaNet,
    space: &S,
    exec: Execution,
) -> Result<VoronoiAssignment> {
    if net.anchor_indices.is_empty() {
        return Err(Error::Empty("net"));
    }
    if let Some(&bad) = net.anchor_indices.iter().find(|&&a| a >= points.len()) {
        return Err(Error::Mismatch(format!(
            "anchor index {bad} out of range for {} points",
            points.len()
        )));
    }
    voronoi(&Direct { space, points }, net, exec)
}

/// `⌈diam/γ⌉^ddim`, rounded up. Diagnostic only.
pub fn net_size_bound(diam: f64, gamma: f64, ddim: f64) -> u64 {
    if gamma >= diam {
        return 1;
    }
    let base = (diam / gamma).ceil();
    let v = base.powf(ddim).ceil();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Euclidean, EuclideanPoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Vec<EuclideanPoint> {
        xs.iter().map(|&x| EuclideanPoint::new(vec![x]).unwrap()).collect()
    }

    #[test]
    fn greedy_on_the_line() {
        let pts = line(&[0.0, 1.0, 2.0]);
        let net = build_net(&pts, 1.0, &Euclidean).unwrap();
        assert_eq!(net.anchor_indices, vec![0, 2]);
        assert_eq!(net.kappa(), 2);
    }

    #[test]
    fn single_point_and_fine_scale() {
        let one = line(&[3.0]);
        assert_eq!(build_net(&one, 0.1, &Euclidean).unwrap().anchor_indices, vec![0]);
        let pts = line(&[0.0, 0.5, 1.5, 3.0]);
        let net = build_net(&pts, 0.49, &Euclidean).unwrap();
        assert_eq!(net.anchor_indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn gamma_must_be_positive() {
        let pts = line(&[0.0]);
        assert!(build_net(&pts, 0.0, &Euclidean).is_err());
        assert!(build_net(&pts, -1.0, &Euclidean).is_err());
        assert!(build_net(&pts, f64::NAN, &Euclidean).is_err());
        assert!(build_net::<Euclidean>(&[], 1.0, &Euclidean).is_err());
    }

    #[test]
    fn voronoi_ties_go_to_earlier_anchor() {
        let pts = line(&[0.0, 1.0, 2.0]);
        let net = build_net(&pts, 1.0, &Euclidean).unwrap();
        let v = assign_voronoi(&pts, &net, &Euclidean).unwrap();
        assert_eq!(v.cell_of, vec![0, 0, 1]);
        assert_eq!(v.cells, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn one_anchor_owns_everything() {
        let pts = line(&[0.0, 0.2, 0.9, 0.4]);
        let net = build_net(&pts, 5.0, &Euclidean).unwrap();
        let v = assign_voronoi(&pts, &net, &Euclidean).unwrap();
        assert_eq!(v.cells, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn voronoi_rejects_foreign_net() {
        let pts = line(&[0.0, 1.0]);
        let net = GammaNet { gamma: 1.0, anchor_indices: vec![5] };
        assert!(matches!(assign_voronoi(&pts, &net, &Euclidean), Err(Error::Mismatch(_))));
    }

    #[test]
    fn size_bound_examples() {
        assert_eq!(net_size_bound(1.0, 0.25, 1.0), 4);
        assert_eq!(net_size_bound(1.0, 0.25, 2.0), 16);
        assert_eq!(net_size_bound(1.0, 1.0, 3.0), 1);
        assert_eq!(net_size_bound(1.0, 2.0, 3.0), 1);
    }

    fn check_net(pts: &[EuclideanPoint], net: &GammaNet) {
        let g = net.gamma;
        for (x, &a) in net.anchor_indices.iter().enumerate() {
            for &b in &net.anchor_indices[x + 1..] {
                assert!(Euclidean.distance(&pts[a], &pts[b]).unwrap() > g);
            }
        }
        for p in pts {
            assert!(net
                .anchor_indices
                .iter()
                .any(|&a| Euclidean.distance(p, &pts[a]).unwrap() <= g));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn packing_and_covering_hold(
            pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..80),
            gamma in 0.001f64..1.5,
        ) {
            let pts: Vec<_> = pts.into_iter().map(|(a, b)| EuclideanPoint::new(vec![a, b]).unwrap()).collect();
            let net = build_net(&pts, gamma, &Euclidean).unwrap();
            check_net(&pts, &net);
            let v = assign_voronoi(&pts, &net, &Euclidean).unwrap();
            for (pos, &a) in net.anchor_indices.iter().enumerate() {
                prop_assert_eq!(v.cell_of[a], pos);
            }
            for (i, &c) in v.cell_of.iter().enumerate() {
                let own = Euclidean.distance(&pts[i], &pts[net.anchor_indices[c]]).unwrap();
                for &a in &net.anchor_indices {
                    prop_assert!(own <= Euclidean.distance(&pts[i], &pts[a]).unwrap());
                }
            }
        }
    }

    #[test]
    fn voronoi_independent_of_evaluation_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = (0..300)
            .map(|_| EuclideanPoint::new(vec![rng.random(), rng.random()]).unwrap())
            .collect();
        let net = build_net(&pts, 0.1, &Euclidean).unwrap();
        let a = assign_voronoi_with(&pts, &net, &Euclidean, Execution::Sequential).unwrap();
        let b = assign_voronoi_with(&pts, &net, &Euclidean, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        // Shuffled evaluation: compute each point's cell in a random order.
        let mut order: Vec<usize> = (0..pts.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let dist = Direct { space: &Euclidean, points: &pts };
        for &i in &order {
            assert_eq!(nearest_anchor(&dist, &net.anchor_indices, i).unwrap(), a.cell_of[i]);
        }
    }

    #[test]
    fn grid_net_sizes_against_bound() {
        // Calibrated constant: ddim of a d-dimensional grid taken as 2·d.
        const C: f64 = 2.0;
        let mut violations = Vec::new();
        for d in 1..=3usize {
            let side = [40usize, 12, 6][d - 1];
            let mut pts = Vec::new();
            let mut idx = vec![0usize; d];
            loop {
                pts.push(EuclideanPoint::new(idx.iter().map(|&i| i as f64 / (side - 1) as f64).collect()).unwrap());
                let mut k = 0;
                while k < d {
                    idx[k] += 1;
                    if idx[k] < side {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
            let diam = (d as f64).sqrt();
            for &gamma in &[0.05, 0.1, 0.2, 0.5, 1.0] {
                let net = build_net(&pts, gamma, &Euclidean).unwrap();
                let bound = net_size_bound(diam, gamma, C * d as f64);
                if net.kappa() as u64 > bound {
                    violations.push((d, gamma, net.kappa(), bound));
                }
            }
        }
        if !violations.is_empty() {
            eprintln!("net-size bound violations (d, gamma, kappa, bound): {violations:?}");
        }
    }
}
