//! Exact rational measure computations on the Preiss tree space.
//!
//! With `P_d = N_1⋯N_d` and `a_d = 2^{-d}/P_d`, each finite sequence of
//! length `d ≥ 1` is an atom of mass `(1−α)·a_d`, the empty sequence has mass
//! zero, and the infinite sequences carry mass `α` spread uniformly, so a
//! subtree `T(z)` with `|z| = d` holds infinite mass `α/P_d`. Summing the
//! atoms of `T(z)` gives `(1−α)·2^{1−d}/P_d` for `d ≥ 1`.
//!
//! Partitions are described symbolically: a [`CellClass`] stands for every
//! subtree (or atom) whose prefix matches a per-coordinate pattern, and all
//! cells in a class carry identical masses, so integrating over a partition
//! is a finite sum.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::metric::Label;
use crate::preiss::{branching_u128, superfactorial, SeqPoint, SubtreeId, MAX_DEPTH};
use crate::{Error, Result};

/// A non-negative exact rational.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactMeasure(BigRational);

impl ExactMeasure {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::InvalidParameter(format!("negative measure {value}")));
        }
        Ok(ExactMeasure(value))
    }

    pub fn zero() -> Self {
        ExactMeasure(BigRational::zero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ExactMeasure(BigRational::new(num.into(), den.into()))
    }

    /// Parses a decimal literal such as `0.3` into the rational it denotes.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("not a decimal number: {s:?}"));
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        Ok(ExactMeasure(BigRational::new(digits, den)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal expansion rounded half-up to `digits` places.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = &self.0 * BigRational::from_integer(scale);
        let rounded = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
        let text = rounded.to_string();
        if digits == 0 {
            return text;
        }
        let padded = format!("{text:0>width$}", width = digits + 1);
        let (int, frac) = padded.split_at(padded.len() - digits);
        format!("{int}.{frac}")
    }

    fn abs_diff(&self, other: &Self) -> Self {
        ExactMeasure((&self.0 - &other.0).abs())
    }
}

impl fmt::Display for ExactMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for &ExactMeasure {
    type Output = ExactMeasure;
    fn add(self, rhs: &ExactMeasure) -> ExactMeasure {
        ExactMeasure(&self.0 + &rhs.0)
    }
}

impl Mul for &ExactMeasure {
    type Output = ExactMeasure;
    fn mul(self, rhs: &ExactMeasure) -> ExactMeasure {
        ExactMeasure(&self.0 * &rhs.0)
    }
}

/// Saturates at zero; measures never go negative.
impl Sub for &ExactMeasure {
    type Output = ExactMeasure;
    fn sub(self, rhs: &ExactMeasure) -> ExactMeasure {
        let d = &self.0 - &rhs.0;
        ExactMeasure(if d.is_negative() { BigRational::zero() } else { d })
    }
}

fn rat(n: BigUint) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow2_neg(k: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::one() << k.unsigned_abs());
    if k >= 0 {
        p.recip()
    } else {
        p
    }
}

fn check_alpha(alpha: &ExactMeasure) -> Result<()> {
    if alpha.0.is_zero() || alpha.0 >= BigRational::one() {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

/// Mass of one finite sequence of length `d`.
pub fn atom_mass(d: usize, alpha: &ExactMeasure) -> ExactMeasure {
    if d == 0 {
        return ExactMeasure::zero();
    }
    let one_minus = BigRational::one() - &alpha.0;
    ExactMeasure(one_minus * pow2_neg(d as i64) / rat(superfactorial(d)))
}

/// `(μ(T(z) ∩ C), μ(T(z) ∖ C))` for `|z| = d`.
pub fn subtree_parts(d: usize, alpha: &ExactMeasure) -> (ExactMeasure, ExactMeasure) {
    let p = rat(superfactorial(d));
    let one_minus = BigRational::one() - &alpha.0;
    let c = &alpha.0 / &p;
    let rest = if d == 0 { one_minus } else { one_minus * pow2_neg(d as i64 - 1) / p };
    (ExactMeasure(c), ExactMeasure(rest))
}

/// `μ(T(z_{1:k}))`, which depends only on `k`.
pub fn mu_subtree(k: usize, alpha: &ExactMeasure) -> Result<ExactMeasure> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::InvalidParameter("mu_subtree needs k ≥ 1".into()));
    }
    let (c, rest) = subtree_parts(k, alpha);
    Ok(&c + &rest)
}

/// `Σ_{j=from}^{to} a_j·N_1⋯N_j`, summed term by term.
pub fn tail_partial_sum(from: usize, to: usize) -> BigRational {
    (from..=to)
        .map(|j| pow2_neg(j as i64) / rat(superfactorial(j)) * rat(superfactorial(j)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Closed form `Σ_{j≥k} a_j·N_1⋯N_j = 2^{1−k}`.
pub fn tail_closed_form(k: usize) -> BigRational {
    pow2_neg(k as i64 - 1)
}

/// One coordinate constraint of a prefix pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    Any,
    Is(u128),
    Not(u128),
}

impl Position {
    fn matches(self, c: u128) -> bool {
        match self {
            Position::Any => true,
            Position::Is(a) => c == a,
            Position::Not(a) => c != a,
        }
    }

    /// Number of admissible values among `1..=n`.
    fn count(self, n: u128) -> u128 {
        let inside = |a: u128| (1..=n).contains(&a);
        match self {
            Position::Any => n,
            Position::Is(a) => u128::from(inside(a)),
            Position::Not(a) => n - u128::from(inside(a)),
        }
    }

    fn meets(self, other: Position, n: u128) -> bool {
        use Position::*;
        let inside = |a: u128| (1..=n).contains(&a);
        match (self, other) {
            (Any, p) | (p, Any) => p.count(n) > 0,
            (Is(a), Is(b)) => a == b && inside(a),
            (Is(a), Not(b)) | (Not(b), Is(a)) => a != b && inside(a),
            (Not(a), Not(b)) => {
                let excluded = u128::from(inside(a)) + u128::from(inside(b) && a != b);
                n > excluded
            }
        }
    }
}

fn patterns_meet(p: &[Position], q: &[Position]) -> bool {
    p.iter().zip(q).enumerate().all(|(i, (&a, &b))| a.meets(b, branching_u128(i + 1).expect("depth checked")))
}

fn pattern_matches(p: &[Position], coords: &[u128]) -> bool {
    p.iter().zip(coords).all(|(&a, &c)| a.matches(c))
}

/// What part of each matching prefix's subtree a class covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// `T(z)`.
    Open,
    /// `T̄(z) = T(z) ∪ {parent of z}`.
    Closed,
    /// The single finite sequence `z`.
    Atom,
    /// The infinite sequences `C ∩ T(z)`.
    Infinite,
}

/// Every cell of a given shape whose prefix matches `pattern`, all carrying `label`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellClass {
    pub pattern: Vec<Position>,
    pub shape: Shape,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RegionKind {
    Tree,
    Atom,
    Infinite,
}

impl CellClass {
    pub fn new(pattern: Vec<Position>, shape: Shape, label: Label) -> Result<Self> {
        if pattern.len() > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!("pattern depth {} exceeds {MAX_DEPTH}", pattern.len())));
        }
        if shape == Shape::Closed {
            // Distinct prefixes sharing a parent would share the parent atom.
            match pattern.last() {
                Some(Position::Is(_)) => {}
                _ => {
                    return Err(Error::OverlappingCells(
                        "a closed class needs a fixed last coordinate".into(),
                    ))
                }
            }
        }
        Ok(CellClass { pattern, shape, label })
    }

    pub fn depth(&self) -> usize {
        self.pattern.len()
    }

    /// Number of cells in the class.
    pub fn multiplicity(&self) -> BigUint {
        self.pattern
            .iter()
            .enumerate()
            .map(|(i, p)| BigUint::from(p.count(branching_u128(i + 1).expect("depth checked"))))
            .product()
    }

    /// `(infinite mass, finite mass)` of one cell.
    pub fn cell_parts(&self, alpha: &ExactMeasure) -> (ExactMeasure, ExactMeasure) {
        let d = self.depth();
        match self.shape {
            Shape::Open => subtree_parts(d, alpha),
            Shape::Closed => {
                let (c, rest) = subtree_parts(d, alpha);
                (c, &rest + &atom_mass(d - 1, alpha))
            }
            Shape::Atom => (ExactMeasure::zero(), atom_mass(d, alpha)),
            Shape::Infinite => (subtree_parts(d, alpha).0, ExactMeasure::zero()),
        }
    }

    /// `(infinite mass, finite mass)` of the whole class.
    pub fn class_parts(&self, alpha: &ExactMeasure) -> (ExactMeasure, ExactMeasure) {
        let m = ExactMeasure(rat(self.multiplicity()));
        let (c, rest) = self.cell_parts(alpha);
        (&m * &c, &m * &rest)
    }

    /// Supremum of distances within one cell, `2^{1−d}` for subtrees.
    pub fn diameter(&self) -> BigRational {
        match self.shape {
            Shape::Atom => BigRational::zero(),
            _ => pow2_neg(self.depth() as i64 - 1),
        }
    }

    fn regions(&self) -> Vec<(RegionKind, &[Position])> {
        let p = &self.pattern[..];
        match self.shape {
            Shape::Open => vec![(RegionKind::Tree, p)],
            Shape::Closed => vec![(RegionKind::Tree, p), (RegionKind::Atom, &p[..p.len() - 1])],
            Shape::Atom => vec![(RegionKind::Atom, p)],
            Shape::Infinite => vec![(RegionKind::Infinite, p)],
        }
    }

    pub fn contains(&self, x: &SeqPoint) -> Result<bool> {
        let d = self.depth();
        let reaches = |len: usize| x.len().is_none_or(|l| l >= len);
        let in_tree = |x: &SeqPoint| -> Result<bool> {
            Ok(reaches(d) && pattern_matches(&self.pattern, &x.prefix(d)?))
        };
        Ok(match self.shape {
            Shape::Open => in_tree(x)?,
            Shape::Closed => {
                in_tree(x)? || (x.len() == Some(d - 1) && pattern_matches(&self.pattern, x.known()))
            }
            Shape::Atom => x.len() == Some(d) && pattern_matches(&self.pattern, x.known()),
            Shape::Infinite => x.is_infinite() && in_tree(x)?,
        })
    }
}

fn regions_meet(a: (RegionKind, &[Position]), b: (RegionKind, &[Position])) -> bool {
    use RegionKind::*;
    let ((ka, pa), (kb, pb)) = (a, b);
    let shared = pa.len().min(pb.len());
    let prefix_meet = patterns_meet(&pa[..shared], &pb[..shared]);
    match (ka, kb) {
        (Tree, Tree) | (Tree, Infinite) | (Infinite, Tree) | (Infinite, Infinite) => prefix_meet,
        (Tree, Atom) => pb.len() >= pa.len() && prefix_meet,
        (Atom, Tree) => pa.len() >= pb.len() && prefix_meet,
        (Atom, Atom) => pa.len() == pb.len() && prefix_meet,
        (Atom, Infinite) | (Infinite, Atom) => false,
    }
}

/// Disjoint cell classes plus a residual (everything not covered) with its own label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    pub cells: Vec<CellClass>,
    pub residual_label: Label,
}

impl PartitionSpec {
    pub fn new(cells: Vec<CellClass>, residual_label: Label) -> Result<Self> {
        for (i, a) in cells.iter().enumerate() {
            if a.multiplicity().is_zero() {
                continue;
            }
            for b in &cells[i + 1..] {
                if b.multiplicity().is_zero() {
                    continue;
                }
                for ra in a.regions() {
                    for rb in b.regions() {
                        if regions_meet(ra, rb) {
                            return Err(Error::OverlappingCells(format!("{a:?} meets {b:?}")));
                        }
                    }
                }
            }
        }
        Ok(PartitionSpec { cells, residual_label })
    }

    /// `(infinite mass, finite mass)` left outside every cell.
    pub fn residual_parts(&self, alpha: &ExactMeasure) -> (ExactMeasure, ExactMeasure) {
        let one_minus = ExactMeasure(BigRational::one() - &alpha.0);
        self.cells.iter().fold((alpha.clone(), one_minus), |(c, r), cell| {
            let (cc, cr) = cell.class_parts(alpha);
            (&c - &cc, &r - &cr)
        })
    }

    /// Index of the class containing `x`, `None` for the residual.
    pub fn locate(&self, x: &SeqPoint) -> Result<Option<usize>> {
        for (i, c) in self.cells.iter().enumerate() {
            if c.contains(x)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn label_of(&self, x: &SeqPoint) -> Result<Label> {
        Ok(self.locate(x)?.map_or(self.residual_label, |i| self.cells[i].label))
    }

    /// Relabels every class by the exact majority of its cells.
    pub fn with_true_majority(mut self, alpha: &ExactMeasure) -> Self {
        for c in &mut self.cells {
            let (inf, fin) = c.cell_parts(alpha);
            c.label = majority(&inf, &fin).0;
        }
        let (inf, fin) = self.residual_parts(alpha);
        self.residual_label = majority(&inf, &fin).0;
        self
    }

    pub fn max_diameter(&self) -> BigRational {
        self.cells.iter().map(CellClass::diameter).max().unwrap_or_else(BigRational::zero)
    }
}

/// Label 1 when the infinite part is strictly heavier; equal masses vote 0.
fn majority(inf: &ExactMeasure, fin: &ExactMeasure) -> (Label, ExactMeasure) {
    let label = if inf > fin { Label(1) } else { Label(0) };
    (label, inf.abs_diff(fin))
}

/// Exact error of the classifier that predicts each cell's label.
pub fn partition_error(spec: &PartitionSpec, alpha: &ExactMeasure) -> Result<ExactMeasure> {
    check_alpha(alpha)?;
    let wrong = |label: Label, (inf, fin): (ExactMeasure, ExactMeasure)| if label == Label(1) { fin } else { inf };
    let mut total = wrong(spec.residual_label, spec.residual_parts(alpha));
    for c in &spec.cells {
        total = &total + &wrong(c.label, c.class_parts(alpha));
    }
    Ok(total)
}

/// The four shapes an impure Voronoi cell of a `γ_k`-net can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `T(z_{1:k})`
    Ia,
    /// `T(z_{1:k+1})`
    Ib,
    /// `T̄(z_{1:k})`
    IIa,
    /// `T̄(z_{1:k+1})`
    IIb,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Ia, Variant::Ib, Variant::IIa, Variant::IIb];

    fn depth(self, k: usize) -> usize {
        match self {
            Variant::Ia | Variant::IIa => k,
            Variant::Ib | Variant::IIb => k + 1,
        }
    }

    fn shape(self) -> Shape {
        match self {
            Variant::Ia | Variant::Ib => Shape::Open,
            Variant::IIa | Variant::IIb => Shape::Closed,
        }
    }

    /// The vote for large `k`.
    pub fn asymptotic_vote(self) -> Label {
        match self {
            Variant::Ia | Variant::Ib => Label(1),
            Variant::IIa | Variant::IIb => Label(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellType {
    pub variant: Variant,
    pub k: usize,
    /// `z_{1:k}` for the a-variants, `z_{1:k+1}` for the b-variants.
    pub prefix: Vec<u128>,
}

impl CellType {
    pub fn subtree(&self) -> SubtreeId {
        SubtreeId { prefix: self.prefix.clone(), closed: self.variant.shape() == Shape::Closed }
    }
}

fn variant_parts(variant: Variant, k: usize, alpha: &ExactMeasure) -> (ExactMeasure, ExactMeasure) {
    let d = variant.depth(k);
    let (c, rest) = subtree_parts(d, alpha);
    match variant.shape() {
        Shape::Closed => (c, &rest + &atom_mass(d - 1, alpha)),
        _ => (c, rest),
    }
}

/// Exact true-majority label of a cell of the given type, with the margin
/// `|μ(V ∩ C) − μ(V ∖ C)|`.
pub fn true_majority(cell: &CellType, alpha: &ExactMeasure) -> Result<(Label, ExactMeasure)> {
    check_alpha(alpha)?;
    let (inf, fin) = variant_parts(cell.variant, cell.k, alpha);
    Ok(majority(&inf, &fin))
}

/// Smallest `k ≤ k_max` from which the vote of `variant` equals its
/// asymptotic value for every larger `k ≤ k_max`, with the margin there.
pub fn vote_crossover(variant: Variant, alpha: &ExactMeasure, k_max: usize) -> Result<Option<(usize, ExactMeasure)>> {
    check_alpha(alpha)?;
    let mut found = None;
    for k in (1..=k_max).rev() {
        let (inf, fin) = variant_parts(variant, k, alpha);
        let (label, margin) = majority(&inf, &fin);
        if label != variant.asymptotic_vote() {
            break;
        }
        found = Some((k, margin));
    }
    Ok(found)
}

/// Names the shape of an impure Voronoi cell of a `γ_k`-net from its anchor
/// and members. Shapes are tried smallest first.
pub fn classify_impure_cell(k: usize, anchor: &SeqPoint, members: &[&SeqPoint]) -> Result<CellType> {
    let Some(z) = members.iter().find(|p| p.is_infinite()) else {
        return Err(Error::Precondition("cell has no infinite member".into()));
    };
    if members.iter().all(|p| p.is_infinite()) {
        return Err(Error::Precondition("cell is pure".into()));
    }
    let z_k = z.prefix(k)?;
    let z_k1 = z.prefix(k + 1)?;
    for p in members.iter().filter(|p| p.is_infinite()) {
        if p.prefix(k)? != z_k {
            return Err(Error::UnclassifiableCell(format!("infinite members differ within the first {k} coordinates")));
        }
    }
    let closed_ball = SubtreeId { prefix: z_k1.clone(), closed: true };
    if !closed_ball.contains(anchor)? {
        return Err(Error::UnclassifiableCell("anchor is farther than γ_k from an infinite member".into()));
    }
    let candidates = [
        (Variant::Ib, &z_k1, false),
        (Variant::IIb, &z_k1, true),
        (Variant::Ia, &z_k, false),
        (Variant::IIa, &z_k, true),
    ];
    for (variant, prefix, closed) in candidates {
        if closed && prefix.is_empty() {
            continue;
        }
        let tree = SubtreeId { prefix: prefix.clone(), closed };
        let mut inside = true;
        for p in members {
            if !tree.contains(p)? {
                inside = false;
                break;
            }
        }
        if inside {
            return Ok(CellType { variant, k, prefix: prefix.clone() });
        }
    }
    Err(Error::UnclassifiableCell(format!("members fit none of the four shapes at level {k}")))
}

fn any_prefix(k: usize) -> Vec<Position> {
    vec![Position::Any; k]
}

/// Voronoi partition of the whole space induced by the greedy `γ_k`-net taken
/// in breadth-first order, labeled by true majority.
///
/// The anchors are every sequence shorter than `k`, each `(z_{1:k}, 1)` and
/// each `(z_{1:k}, j, 1)` with `j ≠ 1`. The short sequences are pure atoms
/// (the residual); the impure cells are `T̄(z_{1:k}, 1)` and `T(z_{1:k}, j)`.
pub fn canonical_net_partition(k: usize, alpha: &ExactMeasure) -> Result<PartitionSpec> {
    check_alpha(alpha)?;
    if k == 0 || k + 2 > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!("level k must lie in [1, {}], got {k}", MAX_DEPTH - 2)));
    }
    let mut first = any_prefix(k);
    first.push(Position::Is(1));
    let mut rest = any_prefix(k);
    rest.push(Position::Not(1));
    let cells = vec![
        CellClass::new(first, Shape::Closed, Label(0))?,
        CellClass::new(rest, Shape::Open, Label(0))?,
    ];
    Ok(PartitionSpec::new(cells, Label(0))?.with_true_majority(alpha))
}

/// Anchors of the canonical `γ_k`-net in breadth-first order, for small `k`.
pub fn canonical_net_anchors(k: usize) -> Result<Vec<SeqPoint>> {
    if k == 0 || k > 4 {
        return Err(Error::InvalidParameter(format!("anchor enumeration supports 1 ≤ k ≤ 4, got {k}")));
    }
    let mut out = Vec::new();
    for seq in sequences_up_to(k + 2) {
        let d = seq.len();
        let keep = d < k || (d == k + 1 && seq[k] == 1) || (d == k + 2 && seq[k] != 1 && seq[k + 1] == 1);
        if keep {
            out.push(SeqPoint::Finite { coords: seq });
        }
    }
    Ok(out)
}

/// All finite sequences of length `≤ depth`, breadth first, lexicographic within a level.
pub fn sequences_up_to(depth: usize) -> Vec<Vec<u128>> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for i in 1..=depth {
        let n = branching_u128(i).expect("small depth");
        let mut next = Vec::new();
        for prefix in &level {
            for c in 1..=n {
                let mut s: Vec<u128> = prefix.clone();
                s.push(c);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Partition of vanishing diameter whose impure cells are all closed subtrees
/// `T̄(z)` voting 0.
///
/// Below level `k` every sequence is its own cell. Beyond it, for
/// `m = 1, …, l−1` the cells are `T̄(z_{1:k}, j_1, …, j_{m−1}, 1)` with every
/// `j ≠ 1`, and the remaining mass sits in the open subtrees
/// `T(z_{1:k}, j_1, …, j_{l−1})` with every `j ≠ 1`.
pub fn inconsistent_partition(k: usize, l: usize, alpha: &ExactMeasure) -> Result<PartitionSpec> {
    check_alpha(alpha)?;
    if k == 0 || l == 0 || k + l > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!("need k ≥ 1, l ≥ 1 and k + l ≤ {MAX_DEPTH}")));
    }
    let mut cells = Vec::with_capacity(l);
    for m in 1..l {
        let mut p = any_prefix(k);
        p.extend(std::iter::repeat_n(Position::Not(1), m - 1));
        p.push(Position::Is(1));
        cells.push(CellClass::new(p, Shape::Closed, Label(0))?);
    }
    let mut last = any_prefix(k);
    last.extend(std::iter::repeat_n(Position::Not(1), l - 1));
    cells.push(CellClass::new(last, Shape::Open, Label(0))?);
    Ok(PartitionSpec::new(cells, Label(0))?.with_true_majority(alpha))
}

/// `μ(C ∩ B̄)/μ(B̄)` for the closed ball `B̄ = B̄_{γ_{l−1}}(z) = T̄(z_{1:l})`, `z ∈ C`.
pub fn besicovitch_ratio(l: usize, alpha: &ExactMeasure) -> Result<ExactMeasure> {
    check_alpha(alpha)?;
    if l == 0 {
        return Err(Error::InvalidParameter("besicovitch_ratio needs l ≥ 1".into()));
    }
    let (c, rest) = subtree_parts(l, alpha);
    let total = &(&c + &rest) + &atom_mass(l - 1, alpha);
    Ok(ExactMeasure(c.0 / total.0))
}

/// `α/((1−α)·a_{l−1}·N_1⋯N_l)`, an upper bound on [`besicovitch_ratio`] for `l ≥ 2`.
pub fn besicovitch_bound(l: usize, alpha: &ExactMeasure) -> Result<ExactMeasure> {
    check_alpha(alpha)?;
    if l < 2 {
        return Err(Error::InvalidParameter("besicovitch_bound needs l ≥ 2".into()));
    }
    let a = atom_mass(l - 1, alpha);
    let p = rat(superfactorial(l));
    Ok(ExactMeasure(&alpha.0 / (a.0 * p)))
}
