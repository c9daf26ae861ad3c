//! Browser demo: three small experiments on random instances, each returned
//! as a JSON string for the page to draw.

use ptf_lab::distributions::{sample_hidden, sample_roots, uniform_points, RootModel, Seed};
use ptf_lab::learner::avgcase::sample_and_search;
use ptf_lab::learner::batch::{batch_klmz, BatchParams};
use ptf_lab::learner::iterative::{learn_all, query_bound};
use ptf_lab::{Instance, Polynomial, QuerySet, Sign};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 1 << 16;
const CURVE_SAMPLES: usize = 400;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub roots: Vec<f64>,
    /// `CURVE_SAMPLES + 1` values of the hidden polynomial on `[0, 1]`.
    pub values: Vec<f64>,
}

fn curve(roots: &[f64], f: &Polynomial<f64>) -> Curve {
    let values = (0..=CURVE_SAMPLES).map(|i| f.eval(&(i as f64 / CURVE_SAMPLES as f64))).collect();
    Curve { roots: roots.to_vec(), values }
}

fn signs(v: &[Sign]) -> Vec<i8> {
    v.iter().map(|s| s.as_i8()).collect()
}

fn check_size(d: usize, n: usize) -> Result<(), String> {
    if d == 0 || d > 8 {
        return Err(format!("degree {d} outside 1..=8"));
    }
    if n < 2 || n > MAX_POINTS {
        return Err(format!("n = {n} outside 2..={MAX_POINTS}"));
    }
    Ok(())
}

fn instance(model: &RootModel, n: usize, seed: u64) -> Result<(Instance<f64>, Vec<f64>, rand_chacha::ChaCha8Rng), String> {
    let mut rng = Seed { master: seed, stream: 0 }.rng();
    let points = uniform_points::<f64, _>(n, &mut rng);
    let roots = sample_roots::<f64, _>(model, &mut rng).map_err(|e| e.to_string())?;
    let hidden = Polynomial::from_roots(&roots, Sign::Pos).map_err(|e| e.to_string())?;
    let inst = Instance::new(points, hidden, model.d()).map_err(|e| e.to_string())?;
    Ok((inst, roots, rng))
}

#[derive(Debug, Serialize)]
pub struct LevelView {
    pub order: usize,
    pub segments: usize,
    pub queries: u64,
    pub signs: Vec<i8>,
}

#[derive(Debug, Serialize)]
pub struct IterativeView {
    pub points: Vec<f64>,
    pub curve: Curve,
    pub labels: Vec<i8>,
    pub levels: Vec<LevelView>,
    pub queries: u64,
    pub bound: u64,
    pub correct: bool,
}

/// Runs the iterative derivative-query learner on a random instance.
pub fn iterative(d: usize, n: usize, seed: u64) -> Result<IterativeView, String> {
    check_size(d, n)?;
    let (inst, roots, _) = instance(&RootModel::Uniform { d }, n, seed)?;
    let mut o = inst.oracle(QuerySet::full(d));
    let out = learn_all(inst.points(), d, &mut o).map_err(|e| e.to_string())?;
    let levels = out
        .trace
        .iter()
        .map(|t| LevelView {
            order: t.order,
            segments: t.segments,
            queries: t.queries,
            signs: signs(&out.levels[t.order].signs),
        })
        .collect();
    Ok(IterativeView {
        points: inst.points().to_vec(),
        curve: curve(&roots, inst.hidden()),
        correct: out.labels == inst.ground_truth(),
        labels: signs(&out.labels),
        levels,
        queries: o.ledger().total,
        bound: query_bound(d, n),
    })
}

#[derive(Debug, Serialize)]
pub struct SampleSearchView {
    pub points: Vec<f64>,
    pub curve: Curve,
    pub labels: Vec<i8>,
    /// Phase-1 probes, in the order they were drawn.
    pub probes: Vec<usize>,
    pub z: u64,
    pub search_queries: u64,
    pub termination: String,
    pub correct: bool,
}

/// Sample and Search with `d` roots, uniform (`alpha <= 0`) or Dirichlet(`alpha`) gaps.
pub fn sample_search(d: usize, n: usize, alpha: f64, seed: u64) -> Result<SampleSearchView, String> {
    check_size(d, n)?;
    let model = if alpha > 0.0 { RootModel::Dirichlet { d, alpha } } else { RootModel::Uniform { d } };
    let (inst, roots, mut rng) = instance(&model, n, seed)?;
    let mut o = inst.oracle(QuerySet::labels_only(d));
    let out = sample_and_search(inst.points(), &mut o, d, &mut rng).map_err(|e| e.to_string())?;
    Ok(SampleSearchView {
        points: inst.points().to_vec(),
        curve: curve(&roots, inst.hidden()),
        correct: out.labels == inst.ground_truth(),
        labels: signs(&out.labels),
        probes: out.probes,
        z: out.z,
        search_queries: out.search_queries,
        termination: out.termination.as_str().into(),
    })
}

#[derive(Debug, Serialize)]
pub struct BatchPoint {
    pub alpha: f64,
    pub batch_size: usize,
    pub mean_rounds: f64,
    pub mean_queries: f64,
    pub round_bound: f64,
}

/// Mean rounds and queries of the batch learner for each `alpha`.
pub fn batch_tradeoff(d: usize, n: usize, alphas: &[f64], trials: usize, seed: u64) -> Result<Vec<BatchPoint>, String> {
    check_size(d, n)?;
    if trials == 0 || trials > 500 {
        return Err(format!("trials = {trials} outside 1..=500"));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let params = BatchParams::new(d, n, alpha).map_err(|e| e.to_string())?;
            let (mut rounds, mut queries) = (0u64, 0u64);
            for t in 0..trials {
                let mut rng = Seed { master: seed, stream: t as u64 }.rng();
                let points = uniform_points::<f64, _>(n, &mut rng);
                let hidden = sample_hidden::<f64, _>(&RootModel::Uniform { d }, Sign::Pos, &mut rng).map_err(|e| e.to_string())?;
                let inst = Instance::new(points, hidden, d).map_err(|e| e.to_string())?;
                let mut o = inst.oracle(QuerySet::full(d));
                let out = batch_klmz(inst.points(), &mut o, &params, &mut rng).map_err(|e| e.to_string())?;
                if out.labels != inst.ground_truth() {
                    return Err(format!("mislabelled trial {t}"));
                }
                rounds += o.ledger().rounds;
                queries += o.ledger().total;
            }
            Ok(BatchPoint {
                alpha,
                batch_size: params.m,
                mean_rounds: rounds as f64 / trials as f64,
                mean_queries: queries as f64 / trials as f64,
                round_bound: 1.0 + 2.0 / alpha,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = runIterative)]
pub fn run_iterative(d: usize, n: usize, seed: u64) -> Result<String, JsError> {
    to_js(iterative(d, n, seed))
}

#[wasm_bindgen(js_name = runSampleSearch)]
pub fn run_sample_search(d: usize, n: usize, alpha: f64, seed: u64) -> Result<String, JsError> {
    to_js(sample_search(d, n, alpha, seed))
}

#[wasm_bindgen(js_name = runBatchTradeoff)]
pub fn run_batch_tradeoff(d: usize, n: usize, alphas: Vec<f64>, trials: usize, seed: u64) -> Result<String, JsError> {
    to_js(batch_tradeoff(d, n, &alphas, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterative_view_is_consistent() {
        let v = iterative(3, 500, 1).unwrap();
        assert!(v.correct);
        assert!(v.queries <= v.bound);
        assert_eq!(v.levels.len(), 3);
        assert_eq!(v.levels.iter().map(|l| l.queries).sum::<u64>(), v.queries);
        assert_eq!(v.curve.values.len(), CURVE_SAMPLES + 1);
        // order 0 signs are the labels
        assert_eq!(v.levels.last().unwrap().signs, v.labels);
    }

    #[test]
    fn sample_search_view() {
        let v = sample_search(2, 1000, 0.0, 4).unwrap();
        assert!(v.correct);
        assert_eq!(v.probes.len() as u64, v.z);
        let w = sample_search(2, 1000, 30.0, 4).unwrap();
        assert!(w.correct);
    }

    #[test]
    fn batch_tradeoff_rounds_shrink_with_alpha() {
        let pts = batch_tradeoff(2, 5000, &[0.3, 1.0], 10, 3).unwrap();
        assert_eq!(pts[1].mean_rounds, 1.0);
        assert!(pts[0].mean_rounds > 1.0 && pts[0].mean_rounds <= pts[0].round_bound + 1.0);
        assert!(pts[0].mean_queries < pts[1].mean_queries);
    }

    #[test]
    fn bad_sizes_are_errors() {
        assert!(iterative(0, 10, 0).is_err());
        assert!(sample_search(2, 1, 0.0, 0).is_err());
        assert!(batch_tradeoff(2, 100, &[0.01], 1, 0).is_err());
        assert!(batch_tradeoff(2, 100, &[0.5], 0, 0).is_err());
    }
}
