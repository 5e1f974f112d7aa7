//! Seeded ground-truth generator for answer streams.
//!
//! Synthesizes the crowd: an item distribution (uniform, Zipf, self-similar
//! or explicit weights), a worker population with configurable contribution
//! skew, per-worker sampling without replacement, and optional "list
//! walkers" that transcribe a fixed list verbatim. The output carries the
//! true cardinality, the item weights and a per-record list-walking label,
//! which makes every estimator in this crate testable against known truth.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::estimate_chao92;
use crate::rng::derive_seed;
use crate::stream::{AnswerStream, FrequencyStatistics};

/// Item-probability model with true cardinality `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDistribution {
    kind: DistributionKind,
    /// Normalized weights, strictly positive, summing to 1.
    weights: Vec<f64>,
    label_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Zipf { exponent: f64 },
    SelfSimilar { h: f64 },
    Explicit,
}

impl ItemDistribution {
    pub fn uniform(n: usize) -> Result<Self> {
        Self::build(DistributionKind::Uniform, vec![1.0; check_n(n)?])
    }

    /// `p_i ∝ i^(-exponent)` for ranks i = 1..N.
    pub fn zipf(n: usize, exponent: f64) -> Result<Self> {
        if exponent < 0.0 || !exponent.is_finite() {
            return Err(Error::InvalidConfig("zipf exponent must be finite and >= 0".into()));
        }
        let weights = (1..=check_n(n)?).map(|i| (i as f64).powf(-exponent)).collect();
        Self::build(DistributionKind::Zipf { exponent }, weights)
    }

    /// Gray's self-similar (80/20-style) distribution: `p_i ∝ (1-h)·h^(i-1)`,
    /// truncated at N and renormalized. Smaller `h` means heavier skew.
    /// Deep-tail weights that underflow f64 are clamped to the smallest
    /// positive value; their true mass is unrepresentably small anyway.
    pub fn self_similar(n: usize, h: f64) -> Result<Self> {
        if !(0.0 < h && h < 1.0) {
            return Err(Error::InvalidConfig("self-similar h must be in (0, 1)".into()));
        }
        let weights = (0..check_n(n)?)
            .map(|i| ((1.0 - h) * h.powi(i as i32)).max(f64::MIN_POSITIVE))
            .collect();
        Self::build(DistributionKind::SelfSimilar { h }, weights)
    }

    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        check_n(weights.len())?;
        Self::build(DistributionKind::Explicit, weights)
    }

    fn build(kind: DistributionKind, raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidConfig("item weights must be strictly positive".into()));
        }
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let label_width = format!("{}", weights.len()).len().max(4);
        Ok(Self { kind, weights, label_width })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// True cardinality N.
    pub fn num_items(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Stable answer label for an item; zero-padded so lexicographic order
    /// equals index order.
    pub fn label(&self, item: usize) -> String {
        format!("item_{item:0width$}", width = self.label_width)
    }
}

fn check_n(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidConfig("item count must be >= 1".into()));
    }
    Ok(n)
}

/// How many answers each sampling worker contributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswersPerWorker {
    /// Every worker contributes exactly this many answers.
    Fixed(usize),
    /// Worker loads shaped like a discrete power law over worker rank:
    /// `total_hits` answers are dealt to workers with probability
    /// `∝ rank^(-exponent)`, after every worker is guaranteed one answer.
    /// Mirrors the streaker-vs-sampler skew seen on real platforms.
    PowerLaw { exponent: f64, total_hits: usize },
    /// Explicit per-worker answer counts.
    Explicit(Vec<usize>),
}

/// Interleaving of per-worker sequences into global arrival order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interleaving {
    RoundRobin,
    /// Each arrival slot picks a worker with probability proportional to
    /// its remaining answers; workers start and stop at varying times.
    Random,
}

/// Sampling-worker population model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerModel {
    pub num_workers: usize,
    pub answers_per_worker: AnswersPerWorker,
    /// Workers do not repeat themselves: each worker samples without
    /// replacement from the item distribution (renormalizing after every
    /// draw).
    pub without_replacement: bool,
    pub interleaving: Interleaving,
}

impl WorkerModel {
    pub fn new(num_workers: usize, answers_per_worker: AnswersPerWorker) -> Self {
        Self {
            num_workers,
            answers_per_worker,
            without_replacement: true,
            interleaving: Interleaving::Random,
        }
    }
}

/// Injected list-walking workers: `count` extra workers transcribe
/// `answers_each` consecutive items of the same list, each starting at its
/// own offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListWalkerSpec {
    pub count: usize,
    pub list_order: ListOrder,
    /// Per-walker start offset into the list; length must equal `count`.
    pub start_offsets: Vec<usize>,
    pub answers_each: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListOrder {
    /// Items in label (= index) order, like an alphabetical web list.
    Alphabetical,
    /// An explicit sequence of distinct item indices.
    Explicit(Vec<usize>),
}

impl ListWalkerSpec {
    /// All walkers copy the same `length`-item alphabetical prefix from
    /// offset 0.
    pub fn verbatim(count: usize, length: usize) -> Self {
        Self {
            count,
            list_order: ListOrder::Alphabetical,
            start_offsets: vec![0; count],
            answers_each: length,
        }
    }
}

/// What the generator knows and the estimators must recover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// True cardinality.
    #[serde(rename = "N")]
    pub n_items: usize,
    pub weights: Vec<f64>,
    /// hit_index of every record emitted by a list walker.
    pub list_walk_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub stream: AnswerStream,
    pub truth: GroundTruth,
}

impl SimulationOutput {
    pub fn truth_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.truth)?)
    }
}

/// Runs one simulation. Identical (configuration, seed) pairs produce
/// identical output regardless of platform.
pub fn simulate(
    dist: &ItemDistribution,
    workers: &WorkerModel,
    lists: Option<&ListWalkerSpec>,
    seed: u64,
) -> Result<SimulationOutput> {
    if workers.num_workers < 1 {
        return Err(Error::InvalidConfig("num_workers must be >= 1".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let counts = worker_counts(workers, &mut master)?;

    // Each worker's answers come from its own sub-seeded RNG so the result
    // does not depend on interleaving.
    let mut sequences: Vec<(String, Vec<String>, bool)> = Vec::new();
    for (j, &count) in counts.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, j as u64));
        let draws = if workers.without_replacement {
            draw_without_replacement(dist, count, &mut rng)?
        } else {
            draw_with_replacement(dist, count, &mut rng)
        };
        let answers = draws.into_iter().map(|i| dist.label(i)).collect();
        sequences.push((format!("w{j:03}"), answers, false));
    }

    if let Some(spec) = lists {
        for (walker, answers) in walker_sequences(dist, spec)? {
            sequences.push((walker, answers, true));
        }
    }

    let arrival = interleave(&mut master, workers.interleaving, &sequences);
    let mut pairs = Vec::with_capacity(arrival.len());
    let mut list_walk_indices = Vec::new();
    for (hit_index, (worker_idx, pos)) in arrival.iter().enumerate() {
        let (worker_id, answers, is_walker) = &sequences[*worker_idx];
        pairs.push((worker_id.clone(), answers[*pos].clone()));
        if *is_walker {
            list_walk_indices.push(hit_index);
        }
    }

    let stream = AnswerStream::from_pairs(pairs)?;
    Ok(SimulationOutput {
        stream,
        truth: GroundTruth {
            n_items: dist.num_items(),
            weights: dist.weights().to_vec(),
            list_walk_indices,
        },
    })
}

fn worker_counts(workers: &WorkerModel, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let w = workers.num_workers;
    match &workers.answers_per_worker {
        AnswersPerWorker::Fixed(k) => {
            if *k < 1 {
                return Err(Error::InvalidConfig("answers per worker must be >= 1".into()));
            }
            Ok(vec![*k; w])
        }
        AnswersPerWorker::Explicit(counts) => {
            if counts.len() != w {
                return Err(Error::InvalidConfig(format!(
                    "explicit counts length {} != num_workers {w}",
                    counts.len()
                )));
            }
            if counts.iter().any(|&k| k < 1) {
                return Err(Error::InvalidConfig("answers per worker must be >= 1".into()));
            }
            Ok(counts.clone())
        }
        AnswersPerWorker::PowerLaw { exponent, total_hits } => {
            if *total_hits < w {
                return Err(Error::InvalidConfig(
                    "total_hits must be at least num_workers".into(),
                ));
            }
            // Everyone gets one answer; the rest are dealt with probability
            // proportional to rank^(-exponent).
            let mut counts = vec![1usize; w];
            let rank_weights: Vec<f64> =
                (1..=w).map(|rank| (rank as f64).powf(-exponent)).collect();
            let cdf = cumulative(&rank_weights);
            for _ in 0..(total_hits - w) {
                counts[sample_cdf(&cdf, rng)] += 1;
            }
            Ok(counts)
        }
    }
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect()
}

fn sample_cdf(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn draw_with_replacement(
    dist: &ItemDistribution,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let cdf = cumulative(dist.weights());
    (0..count).map(|_| sample_cdf(&cdf, rng)).collect()
}

/// Sequential without-replacement draws: after each pick the remaining
/// weights are renormalized, which is exactly conditioning the distribution
/// on the unseen items.
fn draw_without_replacement(
    dist: &ItemDistribution,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = dist.num_items();
    if count > n {
        return Err(Error::Simulation(format!(
            "worker requests {count} without-replacement draws from {n} items"
        )));
    }
    let mut weights = dist.weights().to_vec();
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        // The remaining total is re-summed each draw: after heavy items are
        // removed it can be many orders of magnitude below 1 and running
        // subtraction would cancel it away.
        let total: f64 = weights.iter().sum();
        let target: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            if target < acc {
                chosen = Some(i);
                break;
            }
        }
        // Floating-point drift can leave target just past the last bucket.
        let pick = chosen
            .or_else(|| weights.iter().rposition(|&w| w > 0.0))
            .expect("at least one item remains");
        picks.push(pick);
        weights[pick] = 0.0;
    }
    Ok(picks)
}

fn walker_sequences(
    dist: &ItemDistribution,
    spec: &ListWalkerSpec,
) -> Result<Vec<(String, Vec<String>)>> {
    if spec.start_offsets.len() != spec.count {
        return Err(Error::InvalidConfig(format!(
            "start_offsets length {} != walker count {}",
            spec.start_offsets.len(),
            spec.count
        )));
    }
    if spec.answers_each < 1 {
        return Err(Error::InvalidConfig("walker answers_each must be >= 1".into()));
    }
    let order: Vec<usize> = match &spec.list_order {
        ListOrder::Alphabetical => {
            let mut idx: Vec<usize> = (0..dist.num_items()).collect();
            idx.sort_by_key(|&i| dist.label(i));
            idx
        }
        ListOrder::Explicit(indices) => {
            let unique: HashSet<usize> = indices.iter().copied().collect();
            if unique.len() != indices.len() {
                return Err(Error::InvalidConfig("list_order has duplicate items".into()));
            }
            if indices.iter().any(|&i| i >= dist.num_items()) {
                return Err(Error::InvalidConfig("list_order index out of range".into()));
            }
            indices.clone()
        }
    };
    spec.start_offsets
        .iter()
        .enumerate()
        .map(|(k, &offset)| {
            if offset + spec.answers_each > order.len() {
                return Err(Error::InvalidConfig(format!(
                    "walker {k}: offset {offset} + {} exceeds list length {}",
                    spec.answers_each,
                    order.len()
                )));
            }
            let answers = order[offset..offset + spec.answers_each]
                .iter()
                .map(|&i| dist.label(i))
                .collect();
            Ok((format!("walker{k:02}"), answers))
        })
        .collect()
}

/// Global arrival order as (sequence index, position within sequence).
fn interleave(
    rng: &mut ChaCha8Rng,
    policy: Interleaving,
    sequences: &[(String, Vec<String>, bool)],
) -> Vec<(usize, usize)> {
    let mut remaining: Vec<usize> = sequences.iter().map(|(_, a, _)| a.len()).collect();
    let mut next_pos = vec![0usize; sequences.len()];
    let total: usize = remaining.iter().sum();
    let mut arrival = Vec::with_capacity(total);
    match policy {
        Interleaving::RoundRobin => {
            while arrival.len() < total {
                for j in 0..sequences.len() {
                    if remaining[j] > 0 {
                        arrival.push((j, next_pos[j]));
                        next_pos[j] += 1;
                        remaining[j] -= 1;
                    }
                }
            }
        }
        Interleaving::Random => {
            let mut left = total;
            while left > 0 {
                let target = rng.random::<f64>() * left as f64;
                let mut acc = 0.0;
                let mut pick = remaining.iter().rposition(|&r| r > 0).unwrap();
                for (j, &r) in remaining.iter().enumerate() {
                    if r == 0 {
                        continue;
                    }
                    acc += r as f64;
                    if target < acc {
                        pick = j;
                        break;
                    }
                }
                arrival.push((pick, next_pos[pick]));
                next_pos[pick] += 1;
                remaining[pick] -= 1;
                left -= 1;
            }
        }
    }
    arrival
}

/// One row of the worker-count sensitivity study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub num_workers: usize,
    /// Mean signed Chao92 error (estimate − true N) over the runs.
    pub mean_error: f64,
}

/// Splits a fixed number of hits evenly across varying worker counts (all
/// sampling without replacement) and reports how the Chao92 error responds.
/// With very few workers the per-worker sequences are long and singleton-
/// heavy, which drives the estimate up; past roughly ten workers the effect
/// fades.
pub fn streaker_impact_study(
    dist: &ItemDistribution,
    worker_counts: &[usize],
    hits: usize,
    runs: usize,
    seed: u64,
) -> Result<Vec<StudyRow>> {
    if runs < 1 {
        return Err(Error::InvalidConfig("runs must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(worker_counts.len());
    for (ci, &num_workers) in worker_counts.iter().enumerate() {
        if num_workers < 1 || num_workers > hits {
            return Err(Error::InvalidConfig(format!(
                "worker count {num_workers} not in 1..=hits ({hits})"
            )));
        }
        let base = hits / num_workers;
        let mut counts = vec![base; num_workers];
        for slot in counts.iter_mut().take(hits % num_workers) {
            *slot += 1;
        }
        let workers = WorkerModel {
            num_workers,
            answers_per_worker: AnswersPerWorker::Explicit(counts),
            without_replacement: true,
            interleaving: Interleaving::Random,
        };
        let mut total_error = 0.0;
        for run in 0..runs {
            let run_seed = derive_seed(derive_seed(seed, ci as u64), run as u64);
            let out = simulate(dist, &workers, None, run_seed)?;
            let fstat = FrequencyStatistics::from_stream(&out.stream)?;
            let estimate = estimate_chao92(&fstat)?;
            total_error += estimate.value - dist.num_items() as f64;
        }
        rows.push(StudyRow { num_workers, mean_error: total_error / runs as f64 });
    }
    Ok(rows)
}
