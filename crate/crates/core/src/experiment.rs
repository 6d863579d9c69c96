//! Seeded batch experiments: KSU on a synthetic finite-dimensional mixture,
//! and KSU against k-NN on the Preiss space. Results are one CSV row per
//! `(scenario, n, trial, learner)`.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bound::BoundParams;
use crate::knn::{KPolicy, KnnModel};
use crate::learner::{fit, CompressedClassifier, DeltaPolicy, FitOptions, ScalePolicy};
use crate::metric::{Euclidean, EuclideanPoint, Label, LabeledSample, MetricSpace};
use crate::par::{self, Execution};
use crate::preiss::{sample_labeled_point, PreissParams, PreissSpace, DEFAULT_DEPTH_CAP};
use crate::{Error, Result};

/// Test points are drawn and scored in chunks of this size, each from its own seed.
const TEST_CHUNK: usize = 2048;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` at sample size `n`, independent of execution order.
pub fn derive_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    FiniteDim,
    Preiss,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FiniteDim => "finite-dim",
            ScenarioKind::Preiss => "preiss",
        }
    }
}

/// An axis-aligned box `[lo, hi)` of `[0,1]^d` with `P(Y = 1 | x) = eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub eta: f64,
}

impl Region {
    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| v >= l && (v < h || (h == 1.0 && v <= h)))
    }

    fn overlap(&self, other: &Region) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .map(|((&a, &b), (&c, &d))| (b.min(d) - a.max(c)).max(0.0))
            .product()
    }
}

/// Uniform marginal on `[0,1]^d` with a piecewise-constant regression function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    dim: usize,
    regions: Vec<Region>,
    bayes_risk: f64,
}

#[derive(Deserialize)]
struct RawMixture {
    dim: usize,
    regions: Vec<Region>,
}

impl<'de> Deserialize<'de> for MixtureSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMixture::deserialize(d)?;
        MixtureSpec::new(raw.dim, raw.regions).map_err(serde::de::Error::custom)
    }
}

const TILING_TOL: f64 = 1e-12;

impl MixtureSpec {
    /// The regions must tile `[0,1]^d`.
    pub fn new(dim: usize, regions: Vec<Region>) -> Result<Self> {
        if dim == 0 || regions.is_empty() {
            return Err(Error::InvalidParameter("mixture needs dim ≥ 1 and at least one region".into()));
        }
        for r in &regions {
            if r.lo.len() != dim || r.hi.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: r.lo.len().max(r.hi.len()) });
            }
            let inside = r.lo.iter().zip(&r.hi).all(|(&l, &h)| 0.0 <= l && l < h && h <= 1.0);
            if !inside || !(0.0..=1.0).contains(&r.eta) {
                return Err(Error::InvalidParameter(format!("bad region {r:?}")));
            }
        }
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                if a.overlap(b) > TILING_TOL {
                    return Err(Error::InvalidParameter(format!("regions {a:?} and {b:?} overlap")));
                }
            }
        }
        let total: f64 = regions.iter().map(Region::volume).sum();
        if (total - 1.0).abs() > TILING_TOL {
            return Err(Error::InvalidParameter(format!("regions cover volume {total}, not 1")));
        }
        let bayes_risk = regions.iter().map(|r| r.volume() * r.eta.min(1.0 - r.eta)).sum();
        Ok(MixtureSpec { dim, regions, bayes_risk })
    }

    /// `η = 0.8` on `[0, 0.5)` and `0.2` on `[0.5, 1]`.
    pub fn two_step() -> Self {
        MixtureSpec::new(
            1,
            vec![
                Region { lo: vec![0.0], hi: vec![0.5], eta: 0.8 },
                Region { lo: vec![0.5], hi: vec![1.0], eta: 0.2 },
            ],
        )
        .expect("valid tiling")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bayes_risk(&self) -> f64 {
        self.bayes_risk
    }

    pub fn eta(&self, x: &[f64]) -> f64 {
        self.regions.iter().find(|r| r.contains(x)).map_or(0.0, |r| r.eta)
    }
}

/// A distribution over labeled points that experiments can draw from.
pub trait Scenario: Sync {
    type Space: MetricSpace;
    fn space(&self) -> &Self::Space;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<(<Self::Space as MetricSpace>::Point, Label)>;
    fn bayes_risk(&self) -> f64;
}

impl Scenario for MixtureSpec {
    type Space = Euclidean;

    fn space(&self) -> &Euclidean {
        &Euclidean
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<(EuclideanPoint, Label)> {
        let x: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>()).collect();
        let y = Label(u32::from(rng.random::<f64>() < self.eta(&x)));
        Ok((EuclideanPoint::new(x)?, y))
    }

    fn bayes_risk(&self) -> f64 {
        self.bayes_risk
    }
}

impl Scenario for PreissParams {
    type Space = PreissSpace;

    fn space(&self) -> &PreissSpace {
        &PreissSpace
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<(crate::preiss::SeqPoint, Label)> {
        sample_labeled_point(rng, self)
    }

    fn bayes_risk(&self) -> f64 {
        0.0
    }
}

pub type PointOf<S> = <<S as Scenario>::Space as MetricSpace>::Point;

pub fn draw_sample<S: Scenario>(scenario: &S, n: usize, seed: u64) -> Result<LabeledSample<PointOf<S>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n).map(|_| scenario.draw(&mut rng)).collect::<Result<Vec<_>>>()?;
    LabeledSample::from_pairs(pairs)
}

/// Monte Carlo test error of each classifier on the same `test_size` fresh draws.
pub fn test_errors<S, F>(scenario: &S, classifiers: &[F], test_size: usize, seed: u64, exec: Execution) -> Result<Vec<f64>>
where
    S: Scenario,
    F: Fn(&PointOf<S>) -> Result<Label> + Sync,
{
    if test_size == 0 {
        return Err(Error::Empty("test set"));
    }
    let chunks = test_size.div_ceil(TEST_CHUNK);
    let counts = par::try_map_range(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(c as u64)));
        let len = TEST_CHUNK.min(test_size - c * TEST_CHUNK);
        let mut wrong = vec![0usize; classifiers.len()];
        for _ in 0..len {
            let (x, y) = scenario.draw(&mut rng)?;
            for (w, h) in wrong.iter_mut().zip(classifiers) {
                *w += usize::from(h(&x)? != y);
            }
        }
        Ok::<_, Error>(wrong)
    })?;
    let mut total = vec![0usize; classifiers.len()];
    for c in counts {
        for (t, w) in total.iter_mut().zip(c) {
            *t += w;
        }
    }
    Ok(total.into_iter().map(|w| w as f64 / test_size as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    #[serde(default = "auto")]
    pub delta: String,
    #[serde(default = "two")]
    pub c_linear: f64,
    #[serde(default = "two")]
    pub c_sqrt: f64,
    #[serde(default = "auto")]
    pub scales: String,
    #[serde(default = "auto")]
    pub k: String,
    #[serde(default)]
    pub exec: Execution,
}

fn auto() -> String {
    "auto".into()
}

fn two() -> f64 {
    2.0
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig { delta: auto(), c_linear: 2.0, c_sqrt: 2.0, scales: auto(), k: auto(), exec: Execution::default() }
    }
}

impl LearnerConfig {
    pub fn fit_options(&self) -> Result<FitOptions> {
        Ok(FitOptions {
            delta: self.delta.parse::<DeltaPolicy>()?,
            params: BoundParams::new(self.c_linear, self.c_sqrt)?,
            scales: self.scales.parse::<ScalePolicy>()?,
            exec: self.exec,
        })
    }

    pub fn k_policy(&self) -> Result<KPolicy> {
        self.k.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreissConfig {
    pub alpha: f64,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
}

fn default_depth_cap() -> usize {
    DEFAULT_DEPTH_CAP
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub test_size: usize,
    #[serde(default)]
    pub learner: LearnerConfig,
    pub mixture: Option<MixtureSpec>,
    pub preiss: Option<PreissConfig>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid[0] == 0 {
            return Err(Error::InvalidParameter("n_grid must be nonempty, positive and strictly ascending".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.test_size == 0 {
            return Err(Error::InvalidParameter("test_size must be at least 1".into()));
        }
        self.learner.fit_options()?;
        self.learner.k_policy()?;
        match self.scenario {
            ScenarioKind::FiniteDim if self.mixture.is_none() => {
                Err(Error::InvalidParameter("finite-dim scenario needs a [mixture] section".into()))
            }
            ScenarioKind::Preiss => self.preiss_params().map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn preiss_params(&self) -> Result<PreissParams> {
        let p = self
            .preiss
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("preiss scenario needs a [preiss] section".into()))?;
        PreissParams::new(p.alpha, p.depth_cap)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    fn jobs(&self) -> Vec<(usize, usize)> {
        self.n_grid.iter().flat_map(|&n| (0..self.trials).map(move |t| (n, t))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Ksu,
    Knn,
}

/// One CSV row. Learner-specific columns are empty for the other learner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub scenario: &'static str,
    pub n: usize,
    pub trial: usize,
    pub learner: LearnerKind,
    pub seed: u64,
    pub k: Option<usize>,
    pub gamma_star: Option<f64>,
    pub kappa_star: Option<usize>,
    pub alpha_star: Option<f64>,
    pub q_star: Option<f64>,
    pub test_error: f64,
    pub bayes_risk: f64,
    pub excess_risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    /// Sorted by `(n, trial)`, KSU before k-NN.
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

impl ExperimentReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn mean_error(&self, n: usize, learner: LearnerKind) -> Option<f64> {
        let errs: Vec<f64> =
            self.records.iter().filter(|r| r.n == n && r.learner == learner).map(|r| r.test_error).collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    }

    pub fn mean_excess(&self, n: usize, learner: LearnerKind) -> Option<f64> {
        let xs: Vec<f64> =
            self.records.iter().filter(|r| r.n == n && r.learner == learner).map(|r| r.excess_risk).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn ksu_record<P>(scenario: ScenarioKind, n: usize, trial: usize, seed: u64, c: &CompressedClassifier<P>, err: f64, bayes: f64) -> TrialRecord {
    TrialRecord {
        scenario: scenario.name(),
        n,
        trial,
        learner: LearnerKind::Ksu,
        seed,
        k: None,
        gamma_star: Some(c.gamma_star),
        kappa_star: Some(c.kappa_star),
        alpha_star: Some(c.alpha_star),
        q_star: Some(c.q_star),
        test_error: err,
        bayes_risk: bayes,
        excess_risk: err - bayes,
    }
}

fn collect(results: Vec<(usize, usize, u64, Result<Vec<TrialRecord>>)>) -> ExperimentReport {
    let mut report = ExperimentReport::default();
    for (n, trial, seed, r) in results {
        match r {
            Ok(rows) => report.records.extend(rows),
            Err(e) => report.failures.push(TrialFailure {
                n,
                trial,
                seed,
                message: format!("trial {trial} at n = {n} (seed {seed}): {e}"),
            }),
        }
    }
    report
}

fn run_jobs<F>(config: &ExperimentConfig, trial: F) -> ExperimentReport
where
    F: Fn(usize, usize, u64) -> Result<Vec<TrialRecord>> + Sync + Send,
{
    let jobs = config.jobs();
    let results = par::map_range(config.learner.exec, jobs.len(), |j| {
        let (n, t) = jobs[j];
        let seed = derive_seed(config.seed, n, t);
        (n, t, seed, trial(n, t, seed))
    });
    collect(results)
}

/// KSU on the configured scenario at every `n`, one row per trial.
pub fn run_consistency(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let opts = config.learner.fit_options()?;
    match config.scenario {
        ScenarioKind::FiniteDim => {
            let mix = config.mixture.as_ref().expect("validated");
            Ok(run_ksu(config, mix, &opts))
        }
        ScenarioKind::Preiss => Ok(run_ksu(config, &config.preiss_params()?, &opts)),
    }
}

fn run_ksu<S: Scenario>(config: &ExperimentConfig, scenario: &S, opts: &FitOptions) -> ExperimentReport {
    run_jobs(config, |n, t, seed| {
        let sample = draw_sample(scenario, n, seed)?;
        let c = fit(&sample, scenario.space(), opts)?;
        let h = |x: &PointOf<S>| c.predict(x, scenario.space());
        let err = test_errors(scenario, &[h], config.test_size, splitmix64(seed), opts.exec)?[0];
        Ok(vec![ksu_record(config.scenario, n, t, seed, &c, err, scenario.bayes_risk())])
    })
}

/// KSU and k-NN fitted on the same Preiss sample and scored on the same test draws.
pub fn run_preiss_contrast(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.scenario != ScenarioKind::Preiss {
        return Err(Error::InvalidParameter("the contrast experiment runs on the preiss scenario".into()));
    }
    let params = config.preiss_params()?;
    let opts = config.learner.fit_options()?;
    let k_policy = config.learner.k_policy()?;
    let space = PreissSpace;
    Ok(run_jobs(config, |n, t, seed| {
        let sample = draw_sample(&params, n, seed)?;
        let c = fit(&sample, &space, &opts)?;
        let knn = KnnModel::new(sample, k_policy)?;
        let ksu_h = |x: &PointOf<PreissParams>| c.predict(x, &space);
        let knn_h = |x: &PointOf<PreissParams>| knn.predict(x, &space);
        let hs: [&(dyn Fn(&PointOf<PreissParams>) -> Result<Label> + Sync); 2] = [&ksu_h, &knn_h];
        let errs = test_errors(&params, &hs, config.test_size, splitmix64(seed), opts.exec)?;
        let mut knn_row = ksu_record(config.scenario, n, t, seed, &c, errs[1], 0.0);
        knn_row.learner = LearnerKind::Knn;
        knn_row.k = Some(knn.k);
        (knn_row.gamma_star, knn_row.kappa_star, knn_row.alpha_star, knn_row.q_star) = (None, None, None, None);
        Ok(vec![ksu_record(config.scenario, n, t, seed, &c, errs[0], 0.0), knn_row])
    }))
}

/// Dispatches on the scenario: the Preiss scenario runs the contrast.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.scenario {
        ScenarioKind::FiniteDim => run_consistency(config),
        ScenarioKind::Preiss => run_preiss_contrast(config),
    }
}
