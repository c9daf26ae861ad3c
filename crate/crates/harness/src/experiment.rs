use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ptf_lab::distributions::{sample_hidden, uniform_points, Seed};
use ptf_lab::learner::avgcase::sample_and_search;
use ptf_lab::learner::batch::{batch_klmz, BatchParams};
use ptf_lab::learner::iterative::learn_all;
use ptf_lab::{Backend, Instance, LearnError, QuerySet, Rational, Scalar, Sign};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentConfig, Learner};
use crate::HarnessError;

/// Per-order counts beyond this order go into a JSON column.
const FIXED_ORDER_COLUMNS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: usize,
    pub seed_stream: u64,
    pub d: usize,
    pub n: usize,
    pub alpha: Option<f64>,
    pub model: String,
    pub learner: Learner,
    pub backend: Backend,
    pub queries_total: u64,
    pub per_order: BTreeMap<usize, u64>,
    pub rounds: u64,
    pub z: Option<u64>,
    /// How the learner finished: `all_flips`/`exhausted` for Sample and
    /// Search, `final_batch`/`covered` for the batch learner, `complete` for
    /// the iterative learner, `error` when the learner failed.
    pub case: String,
    pub correct: bool,
    pub wall_ms: f64,
    pub error: Option<String>,
    /// Segments per derivative order (iterative learner only).
    pub segments: Vec<usize>,
    pub labels_digest: u64,
}

/// Streams are `(cell << 32) | trial`, so every trial of every cell has its own.
pub fn seed_stream(cell: usize, trial: usize) -> u64 {
    ((cell as u64) << 32) | trial as u64
}

struct Outcome {
    labels: Vec<Sign>,
    z: Option<u64>,
    case: String,
    segments: Vec<usize>,
}

/// FNV-1a over the label vector; lets runs on shared instances be compared
/// without storing every label.
pub fn digest(labels: &[Sign]) -> u64 {
    labels.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, s| {
        (h ^ u64::from(*s == Sign::Pos)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Draws the instance of a trial from the start of its stream. Every learner
/// sees the same instance for the same `(master seed, cell, trial)`.
pub fn draw_instance<T: Scalar>(cell: &Cell, leading_random: bool, rng: &mut ChaCha8Rng) -> Result<Instance<T>, HarnessError> {
    let points = uniform_points::<T, _>(cell.n, rng);
    let leading = if leading_random && rng.random::<bool>() { Sign::Neg } else { Sign::Pos };
    let hidden = sample_hidden::<T, _>(&cell.model, leading, rng)?;
    Ok(Instance::new(points, hidden, cell.d)?)
}

fn learn<T: Scalar>(
    learner: Learner,
    cell: &Cell,
    inst: &Instance<T>,
    rng: &mut ChaCha8Rng,
) -> Result<(Outcome, ptf_lab::QueryLedger), LearnError> {
    let d = cell.d;
    match learner {
        Learner::Iterative => {
            let mut o = inst.oracle(QuerySet::full(d));
            let out = learn_all(inst.points(), d, &mut o)?;
            let mut segments = vec![0; d];
            for lvl in &out.trace {
                segments[lvl.order] = lvl.segments;
            }
            let oc = Outcome { labels: out.labels, z: None, case: "complete".into(), segments };
            Ok((oc, o.ledger().clone()))
        }
        Learner::Batch => {
            let alpha = cell.alpha.ok_or_else(|| LearnError::InvalidParams("missing alpha".into()))?;
            let params = BatchParams::new(d, cell.n, alpha)?;
            let mut o = inst.oracle(QuerySet::full(d));
            let out = batch_klmz(inst.points(), &mut o, &params, rng)?;
            let case = if out.final_batch { "final_batch" } else { "covered" };
            let oc = Outcome { labels: out.labels, z: None, case: case.into(), segments: Vec::new() };
            Ok((oc, o.ledger().clone()))
        }
        Learner::SampleSearch => {
            let mut o = inst.oracle(QuerySet::labels_only(d));
            let out = sample_and_search(inst.points(), &mut o, cell.model.d(), rng)?;
            let oc = Outcome {
                labels: out.labels,
                z: Some(out.z),
                case: out.termination.as_str().into(),
                segments: Vec::new(),
            };
            Ok((oc, o.ledger().clone()))
        }
    }
}

fn run_trial_in<T: Scalar>(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> TrialRecord {
    let stream = seed_stream(cell.index, trial);
    let mut rng = Seed { master: cfg.master_seed, stream }.rng();
    let mut rec = TrialRecord {
        cell: cell.index,
        trial,
        seed_stream: stream,
        d: cell.d,
        n: cell.n,
        alpha: cell.alpha,
        model: cell.model.name().into(),
        learner: cfg.learner,
        backend: T::BACKEND,
        queries_total: 0,
        per_order: BTreeMap::new(),
        rounds: 0,
        z: None,
        case: "error".into(),
        correct: false,
        wall_ms: 0.0,
        error: None,
        segments: Vec::new(),
        labels_digest: 0,
    };
    let inst = match draw_instance::<T>(cell, cfg.random_leading, &mut rng) {
        Ok(i) => i,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let start = Instant::now();
    let result = learn(cfg.learner, cell, &inst, &mut rng);
    if cfg.timing {
        rec.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    match result {
        Ok((out, ledger)) => {
            rec.correct = out.labels == inst.ground_truth();
            rec.labels_digest = digest(&out.labels);
            rec.queries_total = ledger.total;
            rec.per_order = ledger.per_order.clone();
            rec.rounds = ledger.rounds;
            rec.z = out.z;
            rec.case = out.case;
            rec.segments = out.segments;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Runs a single trial of `cfg` in `cell`.
pub fn run_trial(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> TrialRecord {
    match cfg.backend {
        Backend::Exact => run_trial_in::<Rational>(cfg, cell, trial),
        Backend::Float => run_trial_in::<f64>(cfg, cell, trial),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Summary> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(Summary { mean, stderr, max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub cell: usize,
    pub d: usize,
    pub n: usize,
    pub alpha: Option<f64>,
    pub model: String,
    pub trials: usize,
    pub failures: usize,
    /// Absent whenever any trial in the cell failed or mislabelled.
    pub queries: Option<Summary>,
    pub rounds: Option<Summary>,
    pub z: Option<Summary>,
}

impl CellAggregate {
    pub fn from_records(cell: &Cell, recs: &[&TrialRecord]) -> Self {
        let failures = recs.iter().filter(|r| !r.correct).count();
        let gate = |f: &dyn Fn(&TrialRecord) -> Option<f64>| {
            if failures > 0 {
                return None;
            }
            let xs: Option<Vec<f64>> = recs.iter().map(|r| f(r)).collect();
            xs.and_then(|xs| Summary::of(&xs))
        };
        CellAggregate {
            cell: cell.index,
            d: cell.d,
            n: cell.n,
            alpha: cell.alpha,
            model: cell.model.name().into(),
            trials: recs.len(),
            failures,
            queries: gate(&|r| Some(r.queries_total as f64)),
            rounds: gate(&|r| Some(r.rounds as f64)),
            z: gate(&|r| r.z.map(|z| z as f64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub aggregates: Vec<CellAggregate>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn ok(&self) -> bool {
        self.records.iter().all(|r| r.correct)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| !r.correct)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_path(path)?;
        write_records(&mut w, &self.records)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 19] = [
    "trial",
    "seed_stream",
    "d",
    "n",
    "alpha",
    "learner",
    "backend",
    "queries_total",
    "queries_order0",
    "queries_order1",
    "queries_order2",
    "queries_order3",
    "queries_order_extra",
    "rounds",
    "z",
    "case",
    "correct",
    "wall_ms",
    "model",
];

pub fn write_records<W: std::io::Write>(w: &mut csv::Writer<W>, recs: &[TrialRecord]) -> Result<(), HarnessError> {
    w.write_record(CSV_HEADER)?;
    for r in recs {
        let fixed: Vec<String> = (0..FIXED_ORDER_COLUMNS)
            .map(|k| if k < r.d { r.per_order.get(&k).copied().unwrap_or(0).to_string() } else { String::new() })
            .collect();
        let extra: BTreeMap<String, u64> = r
            .per_order
            .range(FIXED_ORDER_COLUMNS..)
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let extra = if extra.is_empty() { String::new() } else { serde_json::to_string(&extra)? };
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.trial.to_string(),
            r.seed_stream.to_string(),
            r.d.to_string(),
            r.n.to_string(),
            opt(r.alpha.map(|a| a.to_string())),
            r.learner.to_string(),
            r.backend.to_string(),
            r.queries_total.to_string(),
            fixed[0].clone(),
            fixed[1].clone(),
            fixed[2].clone(),
            fixed[3].clone(),
            extra,
            r.rounds.to_string(),
            opt(r.z.map(|z| z.to_string())),
            r.case.clone(),
            r.correct.to_string(),
            format!("{:.3}", r.wall_ms),
            r.model.clone(),
        ])?;
    }
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PTF_LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| HarnessError::Config(format!("PTF_LAB_THREADS={v:?} is not a number")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| HarnessError::Config(e.to_string()))
}

/// Runs every trial of every cell. Records come back in (cell, trial) order
/// whatever the scheduling. With `config.out` set, writes the CSV there and
/// the aggregates next to it with a `.json` extension.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let cells = config.cells();
    let jobs: Vec<(&Cell, usize)> = cells.iter().flat_map(|c| (0..config.trials).map(move |t| (c, t))).collect();
    let records: Vec<TrialRecord> =
        thread_pool()?.install(|| jobs.par_iter().map(|&(c, t)| run_trial(config, c, t)).collect());
    let aggregates = cells
        .iter()
        .map(|c| {
            let recs: Vec<&TrialRecord> = records.iter().filter(|r| r.cell == c.index).collect();
            CellAggregate::from_records(c, &recs)
        })
        .collect();
    let result = ExperimentResult { config: config.clone(), aggregates, records };
    if let Some(out) = &config.out {
        if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        result.write_csv(out)?;
        result.write_json(&out.with_extension("json"))?;
    }
    Ok(result)
}
