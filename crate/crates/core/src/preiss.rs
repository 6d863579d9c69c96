//! A Preiss-type tree space: finite sequences `Z₀` plus infinite sequences
//! `C = Z_∞` with coordinate `i` ranging over `[i!]`.
//!
//! The distance between `x` and `y` with longest common prefix `x∧y` is
//! `(γ_{|x∧y|} − γ_{|x|}) + (γ_{|x∧y|} − γ_{|y|})` where `γ_k = 2^{-k}` and
//! `γ_∞ = 0`. All distances are dyadic rationals with denominator dividing
//! `2^MAX_DEPTH`, so the `f64` values returned are exact.

use std::io::{BufRead, Write};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metric::{Label, LabeledSample, MetricSpace};
use crate::{Error, Result};

/// Deepest coordinate representable: `34! < 2^128 < 35!`.
pub const MAX_DEPTH: usize = 34;
pub const MIN_DEPTH_CAP: usize = 8;
pub const DEFAULT_DEPTH_CAP: usize = 30;

const FACTORIALS: [u128; MAX_DEPTH + 1] = {
    let mut t = [1u128; MAX_DEPTH + 1];
    let mut i = 1;
    while i <= MAX_DEPTH {
        t[i] = t[i - 1] * i as u128;
        i += 1;
    }
    t
};

/// `N_k = k!` for any `k ≥ 1`.
pub fn branching(k: usize) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidParameter("branching is defined for k ≥ 1".into()));
    }
    Ok((1..=k).map(BigUint::from).product())
}

/// `N_k` in native width, for `1 ≤ k ≤ MAX_DEPTH`.
pub fn branching_u128(k: usize) -> Option<u128> {
    (1..=MAX_DEPTH).contains(&k).then(|| FACTORIALS[k])
}

/// `N_1·N_2·…·N_d`, the number of sequences of length `d`.
pub fn superfactorial(d: usize) -> BigUint {
    (1..=d).map(|i| branching(i).expect("i ≥ 1")).product()
}

/// `γ_k = 2^{-k}`; `None` stands for `k = ∞`.
pub fn gamma_level(k: Option<usize>) -> f64 {
    match k {
        Some(k) => 2f64.powi(-(k as i32)),
        None => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreissParams {
    /// Mass of the infinite sequences.
    pub alpha: f64,
    /// How many coordinates of an infinite point are realized.
    pub depth_cap: usize,
}

impl PreissParams {
    pub fn new(alpha: f64, depth_cap: usize) -> Result<Self> {
        let p = PreissParams { alpha, depth_cap };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(MIN_DEPTH_CAP..=MAX_DEPTH).contains(&self.depth_cap) {
            return Err(Error::InvalidParameter(format!(
                "depth cap must lie in [{MIN_DEPTH_CAP}, {MAX_DEPTH}], got {}",
                self.depth_cap
            )));
        }
        Ok(())
    }
}

/// A point of the space. Infinite points carry the seed that generates
/// their coordinates and the prefix realized so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub enum SeqPoint {
    Finite { coords: Vec<u128> },
    Infinite { seed: u64, realized: Vec<u128> },
}

// Internally tagged enums buffer their input, which loses u128 support in
// serde_json, so the wire form goes through a flat struct.
#[derive(Serialize, Deserialize)]
struct RawPoint {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<u128>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    realized: Option<Vec<u128>>,
}

impl From<SeqPoint> for RawPoint {
    fn from(p: SeqPoint) -> Self {
        match p {
            SeqPoint::Finite { coords } => {
                RawPoint { kind: "finite".into(), coords: Some(coords), seed: None, realized: None }
            }
            SeqPoint::Infinite { seed, realized } => {
                RawPoint { kind: "infinite".into(), coords: None, seed: Some(seed), realized: Some(realized) }
            }
        }
    }
}

impl TryFrom<RawPoint> for SeqPoint {
    type Error = String;
    fn try_from(r: RawPoint) -> std::result::Result<Self, String> {
        match (r.kind.as_str(), r.coords, r.seed, r.realized) {
            ("finite", Some(coords), None, None) => Ok(SeqPoint::Finite { coords }),
            ("infinite", None, Some(seed), realized) => {
                Ok(SeqPoint::Infinite { seed, realized: realized.unwrap_or_default() })
            }
            (kind, ..) => Err(format!("malformed point of kind {kind:?}")),
        }
    }
}

fn realize(seed: u64, depth: usize) -> Vec<u128> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=depth).map(|i| rng.random_range(1..=FACTORIALS[i])).collect()
}

fn check_coords(coords: &[u128]) -> Result<()> {
    if coords.len() > MAX_DEPTH {
        return Err(Error::InvalidPoint(format!("{} coordinates exceed the maximum depth {MAX_DEPTH}", coords.len())));
    }
    for (i, &c) in coords.iter().enumerate() {
        if c == 0 || c > FACTORIALS[i + 1] {
            return Err(Error::InvalidPoint(format!("coordinate {} = {c} outside [1, {}!]", i + 1, i + 1)));
        }
    }
    Ok(())
}

impl SeqPoint {
    pub fn finite(coords: Vec<u128>) -> Result<Self> {
        check_coords(&coords)?;
        Ok(SeqPoint::Finite { coords })
    }

    /// The infinite point generated by `seed`, realized through `depth`.
    pub fn infinite(seed: u64, depth: usize) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthCapExhausted { depth });
        }
        Ok(SeqPoint::Infinite { seed, realized: realize(seed, depth) })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SeqPoint::Infinite { .. })
    }

    /// Length of a finite point; `None` for infinite points.
    pub fn len(&self) -> Option<usize> {
        match self {
            SeqPoint::Finite { coords } => Some(coords.len()),
            SeqPoint::Infinite { .. } => None,
        }
    }

    /// Coordinates known without further realization.
    pub fn known(&self) -> &[u128] {
        match self {
            SeqPoint::Finite { coords } => coords,
            SeqPoint::Infinite { realized, .. } => realized,
        }
    }

    /// Coordinate `i` (1-based). Infinite points realize beyond their stored
    /// prefix up to `MAX_DEPTH`.
    pub fn coord(&self, i: usize) -> Result<u128> {
        let known = self.known();
        if i == 0 {
            return Err(Error::CoordinateOutOfRange { index: i, depth: known.len() });
        }
        if let Some(&c) = known.get(i - 1) {
            return Ok(c);
        }
        match self {
            SeqPoint::Finite { coords } => Err(Error::CoordinateOutOfRange { index: i, depth: coords.len() }),
            SeqPoint::Infinite { seed, .. } if i <= MAX_DEPTH => Ok(realize(*seed, i)[i - 1]),
            SeqPoint::Infinite { .. } => Err(Error::DepthCapExhausted { depth: MAX_DEPTH }),
        }
    }

    /// First `l` coordinates.
    pub fn prefix(&self, l: usize) -> Result<Vec<u128>> {
        match self {
            SeqPoint::Finite { coords } if l <= coords.len() => Ok(coords[..l].to_vec()),
            SeqPoint::Finite { coords } => Err(Error::CoordinateOutOfRange { index: l, depth: coords.len() }),
            SeqPoint::Infinite { realized, .. } if l <= realized.len() => Ok(realized[..l].to_vec()),
            SeqPoint::Infinite { seed, .. } if l <= MAX_DEPTH => Ok(realize(*seed, l)),
            SeqPoint::Infinite { .. } => Err(Error::DepthCapExhausted { depth: MAX_DEPTH }),
        }
    }

    /// Checks coordinate ranges and, for infinite points, that the stored
    /// prefix is the one the seed generates.
    pub fn validate(&self) -> Result<()> {
        check_coords(self.known())?;
        if let SeqPoint::Infinite { seed, realized } = self {
            if realize(*seed, realized.len()) != *realized {
                return Err(Error::InvalidPoint(format!("realized prefix does not match seed {seed}")));
            }
        }
        Ok(())
    }
}

/// Length of the longest common prefix, `None` when the points coincide.
fn common_prefix(x: &SeqPoint, y: &SeqPoint) -> Result<Option<usize>> {
    use SeqPoint::*;
    let (a, b) = (x.known(), y.known());
    let shared = a.len().min(b.len());
    if let Some(i) = (0..shared).find(|&i| a[i] != b[i]) {
        return Ok(Some(i));
    }
    match (x, y) {
        (Finite { .. }, Finite { .. }) => Ok((a.len() != b.len()).then_some(shared)),
        (Infinite { seed: s, .. }, Infinite { seed: t, .. }) => {
            if s == t {
                Ok(None)
            } else {
                Err(Error::DepthCapExhausted { depth: shared })
            }
        }
        (Finite { coords }, inf @ Infinite { .. }) | (inf @ Infinite { .. }, Finite { coords }) => {
            for i in shared..coords.len() {
                if inf.coord(i + 1)? != coords[i] {
                    return Ok(Some(i));
                }
            }
            Ok(Some(coords.len()))
        }
    }
}

const UNIT_EXP: usize = MAX_DEPTH;

fn gamma_units(k: Option<usize>) -> u64 {
    match k {
        Some(k) => 1u64 << (UNIT_EXP - k),
        None => 0,
    }
}

/// `ρ(x, y)·2^MAX_DEPTH`, an exact integer.
pub fn preiss_distance_units(x: &SeqPoint, y: &SeqPoint) -> Result<u64> {
    let Some(m) = common_prefix(x, y)? else {
        return Ok(0);
    };
    let g = gamma_units(Some(m));
    Ok(2 * g - gamma_units(x.len()) - gamma_units(y.len()))
}

pub fn preiss_distance(x: &SeqPoint, y: &SeqPoint) -> Result<f64> {
    Ok(units_to_f64(preiss_distance_units(x, y)?))
}

/// Exact conversion of a distance in units of `2^-MAX_DEPTH`.
pub fn units_to_f64(u: u64) -> f64 {
    u as f64 * gamma_level(Some(UNIT_EXP))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PreissSpace;

impl MetricSpace for PreissSpace {
    type Point = SeqPoint;

    fn distance(&self, x: &SeqPoint, y: &SeqPoint) -> Result<f64> {
        preiss_distance(x, y)
    }
}

/// Draws one point: infinite with label 1 with probability `alpha`,
/// otherwise finite with geometric length and label 0.
pub fn sample_labeled_point<R: Rng + ?Sized>(rng: &mut R, params: &PreissParams) -> Result<(SeqPoint, Label)> {
    if rng.random::<f64>() < params.alpha {
        let seed = rng.random::<u64>();
        return Ok((SeqPoint::infinite(seed, params.depth_cap)?, Label(1)));
    }
    let mut len = 1;
    while rng.random::<bool>() {
        len += 1;
        if len > MAX_DEPTH {
            return Err(Error::DepthCapExhausted { depth: MAX_DEPTH });
        }
    }
    let coords = (1..=len).map(|i| rng.random_range(1..=FACTORIALS[i])).collect();
    Ok((SeqPoint::Finite { coords }, Label(0)))
}

/// `n` labeled points from a `ChaCha8` stream seeded with `seed`.
pub fn sample(params: &PreissParams, n: usize, seed: u64) -> Result<LabeledSample<SeqPoint>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n).map(|_| sample_labeled_point(&mut rng, params)).collect::<Result<Vec<_>>>()?;
    LabeledSample::from_pairs(pairs)
}

/// A subtree `T(z)` of all sequences extending `z`, or its closure
/// `T̄(z) = T(z) ∪ {parent of z}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubtreeId {
    pub prefix: Vec<u128>,
    pub closed: bool,
}

impl SubtreeId {
    pub fn new(prefix: Vec<u128>, closed: bool) -> Result<Self> {
        check_coords(&prefix)?;
        if closed && prefix.is_empty() {
            return Err(Error::InvalidParameter("the closed subtree needs a nonempty prefix".into()));
        }
        Ok(SubtreeId { prefix, closed })
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn contains(&self, x: &SeqPoint) -> Result<bool> {
        let l = self.prefix.len();
        if self.closed && x.len() == Some(l - 1) && x.known() == &self.prefix[..l - 1] {
            return Ok(true);
        }
        if x.len().is_some_and(|len| len < l) {
            return Ok(false);
        }
        Ok(x.prefix(l)? == self.prefix)
    }
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    point: SeqPoint,
    label: Label,
}

/// One `{"point": …, "label": …}` object per line.
pub fn write_jsonl<W: Write>(mut w: W, sample: &LabeledSample<SeqPoint>) -> Result<()> {
    for (point, label) in sample.iter() {
        serde_json::to_writer(&mut w, &SampleLine { point: point.clone(), label })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<LabeledSample<SeqPoint>> {
    let mut pairs = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleLine =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        rec.point.validate().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        pairs.push((rec.point, rec.label));
    }
    LabeledSample::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn fin(c: &[u128]) -> SeqPoint {
        SeqPoint::finite(c.to_vec()).unwrap()
    }

    #[test]
    fn branching_examples() {
        assert_eq!(branching(1).unwrap(), BigUint::from(1u32));
        assert_eq!(branching(4).unwrap(), BigUint::from(24u32));
        assert_eq!(branching(10).unwrap(), BigUint::from(3_628_800u32));
        assert!(branching(0).is_err());
        assert_eq!(branching(40).unwrap().to_string(), "815915283247897734345611269596115894272000000000");
        assert_eq!(branching_u128(34), Some(295232799039604140847618609643520000000));
        assert_eq!(branching_u128(35), None);
        assert_eq!(superfactorial(4), BigUint::from(288u32));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_level(Some(0)), 1.0);
        assert_eq!(gamma_level(Some(3)), 0.125);
        assert_eq!(gamma_level(None), 0.0);
    }

    #[test]
    fn distance_examples() {
        let x = SeqPoint::infinite(7, 30).unwrap();
        assert_eq!(preiss_distance(&x, &x).unwrap(), 0.0);
        for k in 0..=12 {
            let y = SeqPoint::finite(x.prefix(k).unwrap()).unwrap();
            assert_eq!(preiss_distance(&x, &y).unwrap(), gamma_level(Some(k)));
        }
        // Coordinate 1 is always 1, so two points can first differ at coordinate 2.
        let mut seeds = (0u64..).map(|s| SeqPoint::infinite(s, 30).unwrap());
        let a = seeds.next().unwrap();
        let b = seeds.find(|b| b.known()[1] != a.known()[1]).unwrap();
        assert_eq!(preiss_distance(&a, &b).unwrap(), 2.0 * gamma_level(Some(1)));
        let root = fin(&[]);
        assert_eq!(preiss_distance(&root, &a).unwrap(), 1.0);
        assert_eq!(preiss_distance(&fin(&[1, 2]), &fin(&[1, 1, 3])).unwrap(), 2.0 * 0.5 - 0.25 - 0.125);
    }

    #[test]
    fn formula_at_the_root() {
        // N_1 = 1, so valid points always share coordinate 1; these are built
        // directly to exercise a meet at depth 0.
        let x = SeqPoint::Infinite { seed: 1, realized: vec![1, 1] };
        let y = SeqPoint::Infinite { seed: 2, realized: vec![2, 1] };
        assert_eq!(preiss_distance(&x, &y).unwrap(), 2.0);
        let x = SeqPoint::Infinite { seed: 1, realized: vec![] };
        let y = SeqPoint::Infinite { seed: 2, realized: vec![] };
        assert!(matches!(preiss_distance(&x, &y), Err(Error::DepthCapExhausted { depth: 0 })));
    }

    #[test]
    fn depth_cap_exhaustion_is_explicit() {
        let x = SeqPoint::infinite(3, 8).unwrap();
        let SeqPoint::Infinite { realized, .. } = &x else { unreachable!() };
        let y = SeqPoint::Infinite { seed: 4, realized: realized.clone() };
        assert!(matches!(preiss_distance(&x, &y), Err(Error::DepthCapExhausted { depth: 8 })));
        // A long finite prefix is resolved by realizing further coordinates.
        let long = SeqPoint::finite(x.prefix(12).unwrap()).unwrap();
        assert_eq!(preiss_distance(&x, &long).unwrap(), gamma_level(Some(12)));
    }

    #[test]
    fn invalid_points_are_rejected() {
        assert!(SeqPoint::finite(vec![2]).is_err());
        assert!(SeqPoint::finite(vec![1, 3]).is_err());
        assert!(SeqPoint::finite(vec![1, 2, 6]).is_ok());
        assert!(SeqPoint::finite(vec![1, 0]).is_err());
        let bad = SeqPoint::Infinite { seed: 5, realized: vec![1, 1, 1, 1, 1, 1, 1, 1, 1] };
        let good = SeqPoint::infinite(5, 9).unwrap();
        assert_eq!(good.validate().is_ok(), true);
        assert_eq!(bad.validate().is_ok(), bad == good);
        assert!(PreissParams::new(0.0, 30).is_err());
        assert!(PreissParams::new(0.3, 7).is_err());
        assert!(PreissParams::new(0.3, 35).is_err());
        assert!(fin(&[1]).coord(2).is_err());
        assert!(SubtreeId::new(vec![], true).is_err());
    }

    #[test]
    fn realization_is_reproducible() {
        let a = SeqPoint::infinite(42, 30).unwrap();
        let b = SeqPoint::infinite(42, 30).unwrap();
        assert_eq!(a, b);
        let short = SeqPoint::infinite(42, 10).unwrap();
        assert_eq!(short.known(), &a.known()[..10]);
        assert_eq!(short.coord(20).unwrap(), a.coord(20).unwrap());
        assert!(a.known().iter().enumerate().all(|(i, &c)| c >= 1 && c <= FACTORIALS[i + 1]));
    }

    #[test]
    fn json_encoding() {
        let p = fin(&[1, 2]);
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"kind":"finite","coords":[1,2]}"#);
        let q = SeqPoint::infinite(9, 3).unwrap();
        let text = serde_json::to_string(&q).unwrap();
        assert!(text.starts_with(r#"{"kind":"infinite","seed":9,"realized":[1,"#));
        assert_eq!(serde_json::from_str::<SeqPoint>(&text).unwrap(), q);
        let big = SeqPoint::infinite(9, 34).unwrap();
        let back: SeqPoint = serde_json::from_str(&serde_json::to_string(&big).unwrap()).unwrap();
        assert_eq!(back, big);
    }

    #[test]
    fn jsonl_round_trip() {
        let params = PreissParams::new(0.3, 12).unwrap();
        let s = sample(&params, 50, 1).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &s).unwrap();
        let back = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, s);
        assert!(matches!(read_jsonl(&b"{\"point\":{\"kind\":\"finite\",\"coords\":[5]},\"label\":0}\n"[..]), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sampler_frequencies() {
        let params = PreissParams::new(0.3, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut ones = 0usize;
        let mut finite = 0usize;
        let mut len_one = 0usize;
        const DRAWS: usize = 100_000;
        for _ in 0..DRAWS {
            let (p, y) = sample_labeled_point(&mut rng, &params).unwrap();
            assert_eq!(y == Label(1), p.is_infinite());
            p.validate().unwrap();
            if y == Label(1) {
                ones += 1;
            } else {
                finite += 1;
                len_one += usize::from(p.len() == Some(1));
            }
        }
        let freq = ones as f64 / DRAWS as f64;
        assert!((freq - 0.3).abs() <= 0.005, "{freq}");
        let half = len_one as f64 / finite as f64;
        assert!((half - 0.5).abs() <= 0.01, "{half}");
    }

    fn point_strategy() -> impl Strategy<Value = SeqPoint> {
        // Small depth cap and a narrow coordinate range make ties and shared prefixes common.
        prop_oneof![
            (0usize..6, any::<u64>()).prop_map(|(len, s)| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let coords = (1..=len).map(|i| rng.random_range(1..=FACTORIALS[i].min(3))).collect();
                SeqPoint::Finite { coords }
            }),
            any::<u64>().prop_map(|s| SeqPoint::infinite(s, 30).unwrap()),
            (any::<u64>(), 0usize..6).prop_map(|(s, k)| SeqPoint::finite(realize(s % 4, k)).unwrap()),
            (0u64..4).prop_map(|s| SeqPoint::infinite(s, 30).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn metric_axioms_exact(x in point_strategy(), y in point_strategy(), z in point_strategy()) {
            let d = |a: &SeqPoint, b: &SeqPoint| preiss_distance_units(a, b).unwrap();
            prop_assert_eq!(d(&x, &x), 0);
            prop_assert_eq!(d(&x, &y), d(&y, &x));
            prop_assert_eq!(d(&x, &y) == 0, x == y);
            prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
            prop_assert_eq!(preiss_distance(&x, &y).unwrap(), units_to_f64(d(&x, &y)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn closed_balls_are_closed_subtrees(zs in 0u64..8, l in 1usize..=8, probe_seed in any::<u64>()) {
            let z = SeqPoint::infinite(zs, 30).unwrap();
            let tree = SubtreeId::new(z.prefix(l).unwrap(), true).unwrap();
            let open = SubtreeId::new(z.prefix(l).unwrap(), false).unwrap();
            let radius = gamma_level(Some(l - 1));
            let mut rng = ChaCha8Rng::seed_from_u64(probe_seed);
            for _ in 0..10 {
                // Probes share a random-length prefix with z so that all cases occur.
                let keep = rng.random_range(0..=l + 2);
                let mut coords = z.prefix(keep).unwrap();
                let extra = rng.random_range(0..3usize);
                for i in keep + 1..=keep + extra {
                    coords.push(rng.random_range(1..=FACTORIALS[i].min(3)));
                }
                let probe = if rng.random::<bool>() {
                    SeqPoint::finite(coords).unwrap()
                } else {
                    let s = rng.random::<u64>();
                    let mut tail = realize(s, 30);
                    tail[..coords.len()].copy_from_slice(&coords);
                    SeqPoint::Infinite { seed: s, realized: tail }
                };
                let d = preiss_distance(&probe, &z).unwrap();
                prop_assert_eq!(d <= radius, tree.contains(&probe).unwrap());
                prop_assert!(!open.contains(&probe).unwrap() || tree.contains(&probe).unwrap());
                if !tree.contains(&probe).unwrap() {
                    prop_assert!(d >= gamma_level(Some(l - 1)) + gamma_level(Some(l)));
                }
            }
        }
    }
}
