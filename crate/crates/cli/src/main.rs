use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ksu::bound::{q_bound, BoundInput, BoundParams};
use ksu::experiment::{run, ExperimentConfig};
use ksu::knn::{KPolicy, KnnModel};
use ksu::learner::{fit, CompressedClassifier, DeltaPolicy, FitOptions, ScalePolicy};
use ksu::metric::{load_csv_sample, read_csv_points, Euclidean, EuclideanPoint, Label, LabeledSample};
use ksu::oracle::{besicovitch_ratio, canonical_net_partition, inconsistent_partition, partition_error, ExactMeasure};
use ksu::par::Execution;
use ksu::preiss::{read_jsonl, sample, write_jsonl, PreissParams, PreissSpace, SeqPoint, DEFAULT_DEPTH_CAP};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "ksu", version, about = "Compression-based nearest-neighbor learning in metric spaces")]
struct Cli {
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the compression-based 1-NN classifier. `.jsonl` inputs are read as Preiss samples.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Confidence parameter, or `auto` for min(1/2, 1/n²).
        #[arg(long, default_value = "auto")]
        delta: String,
        /// `full`, `geo:<ratio>` or `auto`.
        #[arg(long, default_value = "auto")]
        scales: String,
        #[arg(long = "bound-c1", default_value_t = 2.0)]
        c1: f64,
        #[arg(long = "bound-c2", default_value_t = 2.0)]
        c2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label points with a fitted model, one label per line.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// k-NN labels for a test file; the error is reported when the test file is labeled.
    Knn {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "auto")]
        k: String,
        #[arg(long)]
        test: PathBuf,
    },
    /// CSV table of the compression bound over grids of its arguments.
    Bound {
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000, 10000, 100000])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1, 0.2])]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 10, 50])]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.01])]
        delta: Vec<f64>,
        #[arg(long = "bound-c1", default_value_t = 2.0)]
        c1: f64,
        #[arg(long = "bound-c2", default_value_t = 2.0)]
        c2: f64,
    },
    /// Draw a labeled Preiss sample as JSON lines.
    PreissSample {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DEPTH_CAP)]
        depth_cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact measure tables on the Preiss space.
    Oracle {
        #[arg(long, value_enum)]
        task: OracleTask,
        /// Decimal literal, read as an exact rational.
        #[arg(long, default_value = "0.3")]
        alpha: String,
        /// Level `k` or inclusive range `a..b`.
        #[arg(long, default_value = "1..12")]
        k: String,
        /// Truncation `l` or inclusive range `a..b`.
        #[arg(long, default_value = "1..6")]
        l: String,
        /// Digits after the decimal point in the `value` column.
        #[arg(long, default_value_t = 30)]
        digits: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch experiment described by a TOML file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleTask {
    NetError,
    Inconsistent,
    Besicovitch,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "space", content = "model", rename_all = "lowercase")]
enum ModelFile {
    Euclidean(CompressedClassifier<EuclideanPoint>),
    Preiss(CompressedClassifier<SeqPoint>),
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

fn load_preiss(path: &Path) -> Result<LabeledSample<SeqPoint>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn load_euclidean(path: &Path) -> Result<LabeledSample<EuclideanPoint>> {
    load_csv_sample(path).with_context(|| format!("reading {}", path.display()))
}

/// Preiss points, one per line, either bare or as `{"point": …, "label": …}`.
fn load_preiss_points(path: &Path) -> Result<(Vec<SeqPoint>, Option<Vec<Label>>)> {
    // Tried in turn rather than as an untagged enum, which would buffer
    // the input and lose u128 coordinates.
    #[derive(Deserialize)]
    struct Labeled {
        point: SeqPoint,
        label: Label,
    }
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (p, y) = match serde_json::from_str::<Labeled>(&line) {
            Ok(l) => (l.point, Some(l.label)),
            Err(_) => {
                let p: SeqPoint =
                    serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
                (p, None)
            }
        };
        p.validate().with_context(|| format!("{}:{}", path.display(), i + 1))?;
        points.push(p);
        labels.push(y);
    }
    let labels = labels.iter().all(Option::is_some).then(|| labels.into_iter().flatten().collect());
    Ok((points, labels))
}

/// CSV points of dimension `dim`, with labels when every row has `dim + 1` columns.
fn load_csv_points(path: &Path, dim: usize) -> Result<(Vec<EuclideanPoint>, Option<Vec<Label>>)> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let text = io::read_to_string(f)?;
    if let Ok(s) = ksu::metric::read_csv_sample(text.as_bytes()) {
        if s.point(0).dim() == dim {
            return Ok((s.points().to_vec(), Some(s.labels().to_vec())));
        }
    }
    let points = read_csv_points(text.as_bytes(), dim).with_context(|| format!("reading {}", path.display()))?;
    Ok((points, None))
}

fn write_labels(labels: &[Label]) -> Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    for y in labels {
        writeln!(out, "{y}")?;
    }
    out.flush()?;
    Ok(())
}

fn report_error(pred: &[Label], truth: Option<&[Label]>) -> Result<()> {
    if let Some(truth) = truth {
        let wrong = pred.iter().zip(truth).filter(|(a, b)| a != b).count();
        eprintln!("error: {}", wrong as f64 / pred.len() as f64);
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// `a..b` (inclusive) or a single integer.
fn parse_range(s: &str) -> Result<Vec<usize>> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?),
        None => {
            let v = s.trim().parse()?;
            (v, v)
        }
    };
    if lo > hi {
        bail!("empty range {s:?}");
    }
    Ok((lo..=hi).collect())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ksu: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Fit { input, delta, scales, c1, c2, out } => {
            let opts = FitOptions {
                delta: delta.parse::<DeltaPolicy>()?,
                params: BoundParams::new(c1, c2)?,
                scales: scales.parse::<ScalePolicy>()?,
                exec,
            };
            let model = if is_jsonl(&input) {
                ModelFile::Preiss(fit(&load_preiss(&input)?, &PreissSpace, &opts)?)
            } else {
                ModelFile::Euclidean(fit(&load_euclidean(&input)?, &Euclidean, &opts)?)
            };
            let mut w = create(&out)?;
            serde_json::to_writer_pretty(&mut w, &model)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Predict { model, input } => {
            let f = File::open(&model).with_context(|| format!("opening {}", model.display()))?;
            let model: ModelFile = serde_json::from_reader(BufReader::new(f)).context("parsing model")?;
            let (pred, truth) = match &model {
                ModelFile::Euclidean(c) => {
                    let dim = c.anchors[0].0.dim();
                    let (points, truth) = load_csv_points(&input, dim)?;
                    (c.predict_many(&points, &Euclidean, exec)?, truth)
                }
                ModelFile::Preiss(c) => {
                    let (points, truth) = load_preiss_points(&input)?;
                    (c.predict_many(&points, &PreissSpace, exec)?, truth)
                }
            };
            write_labels(&pred)?;
            report_error(&pred, truth.as_deref())?;
        }
        Command::Knn { input, k, test } => {
            let policy: KPolicy = k.parse()?;
            let (pred, truth) = if is_jsonl(&input) {
                let model = KnnModel::new(load_preiss(&input)?, policy)?;
                let (points, truth) = load_preiss_points(&test)?;
                (model.predict_many(&points, &PreissSpace, exec)?, truth)
            } else {
                let train = load_euclidean(&input)?;
                let dim = train.point(0).dim();
                let model = KnnModel::new(train, policy)?;
                let (points, truth) = load_csv_points(&test, dim)?;
                (model.predict_many(&points, &Euclidean, exec)?, truth)
            };
            write_labels(&pred)?;
            report_error(&pred, truth.as_deref())?;
        }
        Command::Bound { n, alpha, m, delta, c1, c2 } => {
            let params = BoundParams::new(c1, c2)?;
            let mut out = csv::Writer::from_writer(io::stdout().lock());
            out.write_record(["n", "alpha", "m", "delta", "q"])?;
            for &n in &n {
                for &a in &alpha {
                    for &m in &m {
                        if m >= n {
                            continue;
                        }
                        for &d in &delta {
                            let q = q_bound(BoundInput { n, alpha: a, m, delta: d }, params)?;
                            out.write_record([n.to_string(), a.to_string(), m.to_string(), d.to_string(), q.to_string()])?;
                        }
                    }
                }
            }
            out.flush()?;
        }
        Command::PreissSample { alpha, n, seed, depth_cap, out } => {
            let params = PreissParams::new(alpha, depth_cap)?;
            let s = sample(&params, n, seed)?;
            let mut w = create(&out)?;
            write_jsonl(&mut w, &s)?;
            w.flush()?;
        }
        Command::Oracle { task, alpha, k, l, digits, out } => {
            let a = ExactMeasure::parse_decimal(&alpha)?;
            let mut w = csv::Writer::from_writer(create(&out)?);
            w.write_record(["task", "k", "l", "alpha", "value", "numerator", "denominator"])?;
            let mut row = |task: &str, k: Option<usize>, l: Option<usize>, v: &ExactMeasure| {
                let show = |x: Option<usize>| x.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([
                    task.to_string(),
                    show(k),
                    show(l),
                    alpha.clone(),
                    v.to_decimal(digits),
                    v.numer().to_string(),
                    v.denom().to_string(),
                ])
            };
            match task {
                OracleTask::NetError => {
                    for k in parse_range(&k)? {
                        let spec = canonical_net_partition(k, &a)?;
                        row("net-error", Some(k), None, &partition_error(&spec, &a)?)?;
                    }
                }
                OracleTask::Inconsistent => {
                    for k in parse_range(&k)? {
                        for l in parse_range(&l)? {
                            let spec = inconsistent_partition(k, l, &a)?;
                            row("inconsistent", Some(k), Some(l), &partition_error(&spec, &a)?)?;
                        }
                    }
                }
                OracleTask::Besicovitch => {
                    for l in parse_range(&l)? {
                        row("besicovitch", None, Some(l), &besicovitch_ratio(l, &a)?)?;
                    }
                }
            }
            w.flush()?;
        }
        Command::Experiment { config, out } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if cli.sequential {
                cfg.learner.exec = Execution::Sequential;
            }
            let report = run(&cfg)?;
            report.write_csv(create(&out)?)?;
            if !report.failures.is_empty() {
                for f in &report.failures {
                    eprintln!("ksu: n = {}, trial {}: {}", f.n, f.trial, f.message);
                }
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
