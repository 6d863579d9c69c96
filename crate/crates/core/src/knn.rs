//! Brute-force k-nearest-neighbor majority vote.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::metric::{Label, LabeledSample, MetricSpace};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// `⌈√n⌉`.
pub fn default_k_schedule(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while k * k < n {
        k += 1;
    }
    while k > 0 && (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KPolicy {
    /// `default_k_schedule(n)`.
    #[default]
    Auto,
    Fixed(usize),
}

impl KPolicy {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            KPolicy::Auto => default_k_schedule(n),
            KPolicy::Fixed(k) => k,
        }
    }
}

impl FromStr for KPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(KPolicy::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KPolicy::Fixed(k)),
            _ => Err(Error::InvalidParameter(format!("k must be a positive integer or auto, got {s:?}"))),
        }
    }
}

impl fmt::Display for KPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPolicy::Auto => write!(f, "auto"),
            KPolicy::Fixed(k) => write!(f, "{k}"),
        }
    }
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Majority label among the `k` sample points closest to `x`.
///
/// Neighbors are ranked by distance, then by sample position; vote ties go
/// to the smallest label.
pub fn knn_predict<S: MetricSpace>(
    sample: &LabeledSample<S::Point>,
    x: &S::Point,
    k: usize,
    space: &S,
) -> Result<Label> {
    let n = sample.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in [1, {n}]")));
    }
    let mut scored = sample
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((space.distance(x, p)?, i)))
        .collect::<Result<Vec<_>>>()?;
    if k < n {
        scored.select_nth_unstable_by(k - 1, by_distance_then_index);
    }
    let mut votes: BTreeMap<Label, usize> = BTreeMap::new();
    for &(_, i) in &scored[..k] {
        *votes.entry(sample.label(i)).or_default() += 1;
    }
    let mut best = (Label(0), 0);
    for (y, c) in votes {
        if c > best.1 {
            best = (y, c);
        }
    }
    Ok(best.0)
}

/// A stored training sample with a fixed `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel<P> {
    pub sample: LabeledSample<P>,
    pub k: usize,
}

impl<P: Clone + PartialEq + Send + Sync> KnnModel<P> {
    pub fn new(sample: LabeledSample<P>, policy: KPolicy) -> Result<Self> {
        let k = policy.resolve(sample.len());
        if k == 0 || k > sample.len() {
            return Err(Error::InvalidParameter(format!("k = {k} must lie in [1, {}]", sample.len())));
        }
        Ok(KnnModel { sample, k })
    }

    pub fn predict<S: MetricSpace<Point = P>>(&self, x: &P, space: &S) -> Result<Label> {
        knn_predict(&self.sample, x, self.k, space)
    }

    pub fn predict_many<S: MetricSpace<Point = P>>(&self, xs: &[P], space: &S, exec: Execution) -> Result<Vec<Label>> {
        par::map_slice(exec, xs, |x| self.predict(x, space)).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{empirical_error, Euclidean, EuclideanPoint};
    use proptest::prelude::*;

    fn pt(x: f64) -> EuclideanPoint {
        EuclideanPoint::new(vec![x]).unwrap()
    }

    fn line(xs: &[f64], ys: &[u32]) -> LabeledSample<EuclideanPoint> {
        LabeledSample::new(xs.iter().map(|&x| pt(x)).collect(), ys.iter().map(|&y| Label(y)).collect()).unwrap()
    }

    #[test]
    fn schedule() {
        let got: Vec<usize> = [1, 2, 4, 5, 9, 10, 100, 2000, 20000].iter().map(|&n| default_k_schedule(n)).collect();
        assert_eq!(got, vec![1, 2, 2, 3, 3, 4, 10, 45, 142]);
        assert_eq!(default_k_schedule(0), 0);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("auto".parse::<KPolicy>().unwrap(), KPolicy::Auto);
        assert_eq!("7".parse::<KPolicy>().unwrap(), KPolicy::Fixed(7));
        assert!("0".parse::<KPolicy>().is_err());
        assert!("x".parse::<KPolicy>().is_err());
    }

    #[test]
    fn vote_examples() {
        let s = line(&[0.0, 1.0, 2.0, 10.0], &[1, 1, 0, 0]);
        assert_eq!(knn_predict(&s, &pt(0.5), 3, &Euclidean).unwrap(), Label(1));
        assert_eq!(knn_predict(&s, &pt(9.0), 1, &Euclidean).unwrap(), Label(0));
        // Two votes each: the smaller label wins.
        assert_eq!(knn_predict(&s, &pt(5.0), 4, &Euclidean).unwrap(), Label(0));
        // Equidistant neighbors: the earlier sample position is taken.
        let s = line(&[-1.0, 1.0], &[5, 3]);
        assert_eq!(knn_predict(&s, &pt(0.0), 1, &Euclidean).unwrap(), Label(5));
        assert!(knn_predict(&s, &pt(0.0), 3, &Euclidean).is_err());
        assert!(knn_predict(&s, &pt(0.0), 0, &Euclidean).is_err());
    }

    #[test]
    fn one_nn_on_training_set() {
        let s = line(&[0.0, 0.2, 0.9, 1.7, 3.0], &[0, 1, 0, 1, 1]);
        let err = empirical_error(|x| knn_predict(&s, x, 1, &Euclidean), s.points(), s.labels()).unwrap();
        assert_eq!(err, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn selection_matches_full_sort(
            xs in prop::collection::vec(-5i32..5, 1..40),
            ys in prop::collection::vec(0u32..3, 40),
            q in -6i32..6,
            k_raw in 1usize..40,
        ) {
            let n = xs.len();
            let k = 1 + (k_raw - 1) % n;
            let s = line(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>(), &ys[..n]);
            let mut order: Vec<(f64, usize)> = xs.iter().enumerate().map(|(i, &x)| (((x - q) as f64).abs(), i)).collect();
            order.sort_by(by_distance_then_index);
            let mut counts = [0usize; 3];
            for &(_, i) in &order[..k] {
                counts[ys[i] as usize] += 1;
            }
            let best = (0..3).max_by_key(|&y| (counts[y], std::cmp::Reverse(y))).unwrap();
            prop_assert_eq!(knn_predict(&s, &pt(q as f64), k, &Euclidean).unwrap(), Label(best as u32));
        }
    }
}
