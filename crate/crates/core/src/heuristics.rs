//! Streaker-bias correction.
//!
//! A few overzealous workers ("streakers") often contribute the bulk of all
//! answers. Because individual workers do not repeat themselves, streakers
//! flood the sample with fresh unique answers and inflate the singleton
//! count, which in turn makes coverage-based estimators over-predict. The
//! two transforms here rebalance the sample before estimation by removing
//! part of the over-contributors' answers:
//!
//! - [`cluster_truncate`] caps every worker at a quota derived from the top
//!   contributors, removing a random subsample of the excess.
//! - [`f1_truncate`] does the same but only ever removes answers that are
//!   singletons in the whole stream, leaving duplicated answers alone.
//!
//! Both are pure, seeded and deterministic. The output stream is a
//! subsequence of the input (arrival order kept, hit indices renumbered).

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::AnswerStream;

/// Which truncation transform to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    Cluster,
    F1,
}

/// Truncation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub kind: HeuristicKind,
    /// Number of top workers whose mean contribution defines the quota.
    pub t: usize,
    /// Cap on the fraction of a worker's (in-domain) answers that may be
    /// removed.
    pub r: f64,
    pub seed: u64,
    /// Resamples to average over when evaluating estimators on truncated
    /// streams. 1 means a single truncation pass.
    pub repetitions: usize,
}

impl HeuristicConfig {
    pub fn new(kind: HeuristicKind, seed: u64) -> Self {
        Self { kind, t: 10, r: 0.40, seed, repetitions: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(Error::InvalidConfig("heuristic t must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::InvalidConfig("heuristic r must be in [0, 1)".into()));
        }
        if self.repetitions < 1 {
            return Err(Error::InvalidConfig("heuristic repetitions must be >= 1".into()));
        }
        Ok(())
    }

    /// Same configuration with a different seed; used to derive independent
    /// resamples.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Applies the configured transform.
pub fn apply(stream: &AnswerStream, cfg: &HeuristicConfig) -> Result<AnswerStream> {
    cfg.validate()?;
    match cfg.kind {
        HeuristicKind::Cluster => Ok(cluster_truncate(stream, cfg)),
        HeuristicKind::F1 => Ok(f1_truncate(stream, cfg)),
    }
}

/// Multistage-cluster truncation: every worker keeps at most the quota `q`,
/// the mean answer count of the top `t` workers (mean over all workers when
/// fewer than `t` exist). A worker with `a` answers loses
/// `min(ceil(a - q), floor(r·a))` of them, chosen uniformly without
/// replacement; survivors keep their arrival order.
pub fn cluster_truncate(stream: &AnswerStream, cfg: &HeuristicConfig) -> AnswerStream {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in stream.records() {
        *counts.entry(r.worker_id.as_str()).or_insert(0) += 1;
    }
    truncate_by_counts(stream, cfg, &counts, |_| true)
}

/// Singleton-targeted truncation: like [`cluster_truncate`] but both the
/// worker loads `a_j` and the removals are restricted to answers that occur
/// exactly once in the whole stream. Duplicated answers are never touched,
/// so no `f_j` with `j >= 2` gains mass.
pub fn f1_truncate(stream: &AnswerStream, cfg: &HeuristicConfig) -> AnswerStream {
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for r in stream.records() {
        *occurrences.entry(r.answer.as_str()).or_insert(0) += 1;
    }
    let singletons: HashSet<&str> =
        occurrences.into_iter().filter(|&(_, k)| k == 1).map(|(a, _)| a).collect();
    if singletons.is_empty() {
        return stream.clone();
    }
    // Every worker participates in the quota ranking, including those with
    // zero singletons.
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in stream.records() {
        let slot = counts.entry(r.worker_id.as_str()).or_insert(0);
        if singletons.contains(r.answer.as_str()) {
            *slot += 1;
        }
    }
    truncate_by_counts(stream, cfg, &counts, |answer| singletons.contains(answer))
}

/// Shared core: `counts` holds each worker's in-domain answer count and
/// `in_domain` says which records are candidates for removal.
fn truncate_by_counts(
    stream: &AnswerStream,
    cfg: &HeuristicConfig,
    counts: &HashMap<&str, usize>,
    in_domain: impl Fn(&str) -> bool,
) -> AnswerStream {
    if counts.is_empty() {
        return stream.clone();
    }

    // Quota: mean load of the top-t workers (ties broken by id so the
    // result does not depend on hash order).
    let mut by_load: Vec<(&str, usize)> = counts.iter().map(|(&w, &a)| (w, a)).collect();
    by_load.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top = &by_load[..cfg.t.min(by_load.len())];
    let quota = top.iter().map(|&(_, a)| a as f64).sum::<f64>() / top.len() as f64;

    // Removal budget per worker: quota excess, capped at floor(r * a_j).
    let mut removals: HashMap<&str, usize> = HashMap::new();
    for &(worker, a) in &by_load {
        let excess = (a as f64 - quota).max(0.0).ceil() as usize;
        let cap = (cfg.r * a as f64).floor() as usize;
        let k = excess.min(cap);
        if k > 0 {
            removals.insert(worker, k);
        }
    }
    if removals.is_empty() {
        return stream.clone();
    }

    // Pick the removed record positions per worker, uniformly without
    // replacement among that worker's in-domain records. Workers are visited
    // in sorted order so the RNG stream is reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut positions_by_worker: HashMap<&str, Vec<usize>> = HashMap::new();
    for (pos, r) in stream.records().iter().enumerate() {
        if in_domain(r.answer.as_str()) {
            positions_by_worker.entry(r.worker_id.as_str()).or_default().push(pos);
        }
    }
    let mut workers: Vec<&str> = removals.keys().copied().collect();
    workers.sort_unstable();
    let mut dropped: HashSet<usize> = HashSet::new();
    for worker in workers {
        let k = removals[worker];
        let positions = &positions_by_worker[worker];
        debug_assert!(k <= positions.len());
        for idx in sample_indices(&mut rng, positions.len(), k) {
            dropped.insert(positions[idx]);
        }
    }

    let survivors = stream
        .records()
        .iter()
        .enumerate()
        .filter(|(pos, _)| !dropped.contains(pos))
        .map(|(_, r)| (r.worker_id.clone(), r.answer.clone()));
    AnswerStream::from_pairs(survivors).expect("survivors are already normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::FrequencyStatistics;
    use proptest::prelude::*;

    /// Stream with the given per-worker answer counts; every answer is
    /// globally unique so each record is a singleton.
    fn stream_with_counts(counts: &[usize]) -> AnswerStream {
        let mut pairs = Vec::new();
        for (w, &k) in counts.iter().enumerate() {
            for i in 0..k {
                pairs.push((format!("w{w:02}"), format!("answer {w} {i}")));
            }
        }
        AnswerStream::from_pairs(pairs).unwrap()
    }

    fn count_for(stream: &AnswerStream, worker: &str) -> usize {
        stream.records().iter().filter(|r| r.worker_id == worker).count()
    }

    #[test]
    fn cluster_truncates_streaker_to_quota() {
        // counts [30,10,5,5], t=2 -> q=20; worker 0 loses min(10, 12)=10.
        let stream = stream_with_counts(&[30, 10, 5, 5]);
        let cfg = HeuristicConfig { t: 2, ..HeuristicConfig::new(HeuristicKind::Cluster, 7) };
        let out = cluster_truncate(&stream, &cfg);
        assert_eq!(count_for(&out, "w00"), 20);
        assert_eq!(count_for(&out, "w01"), 10);
        assert_eq!(count_for(&out, "w02"), 5);
        assert_eq!(out.len(), 40);
    }

    #[test]
    fn cluster_noop_when_under_quota() {
        let stream = stream_with_counts(&[8, 8, 8]);
        let cfg = HeuristicConfig { t: 2, ..HeuristicConfig::new(HeuristicKind::Cluster, 7) };
        assert_eq!(cluster_truncate(&stream, &cfg), stream);
    }

    #[test]
    fn cluster_single_worker_is_its_own_quota() {
        let stream = stream_with_counts(&[100]);
        let cfg = HeuristicConfig::new(HeuristicKind::Cluster, 7);
        assert_eq!(cluster_truncate(&stream, &cfg), stream);
    }

    #[test]
    fn f1_removes_capped_singleton_excess() {
        // Streaker w00 contributes 20 singletons; w01..w04 contribute 5, 5,
        // 0, 0 singletons; t=2 -> q = (20+5)/2 = 12.5, excess ceil(7.5)=8,
        // cap floor(0.4*20)=8 -> exactly 8 singleton records removed.
        let mut pairs = Vec::new();
        for i in 0..20 {
            pairs.push(("w00".to_string(), format!("rare {i}")));
        }
        for w in 1..=2 {
            for i in 0..5 {
                pairs.push((format!("w{w:02}"), format!("rare {w} {i}")));
            }
        }
        // Duplicated answers shared by two extra workers; not singletons.
        for _ in 0..6 {
            pairs.push(("w03".to_string(), "common a".to_string()));
            pairs.push(("w04".to_string(), "common b".to_string()));
        }
        let stream = AnswerStream::from_pairs(pairs).unwrap();
        let cfg = HeuristicConfig { t: 2, ..HeuristicConfig::new(HeuristicKind::F1, 11) };
        let out = f1_truncate(&stream, &cfg);
        assert_eq!(count_for(&out, "w00"), 12);
        // Non-singleton records are untouched.
        assert_eq!(count_for(&out, "w03"), 6);
        assert_eq!(count_for(&out, "w04"), 6);

        let fs_in = FrequencyStatistics::from_stream(&stream).unwrap();
        let fs_out = FrequencyStatistics::from_stream(&out).unwrap();
        assert_eq!(fs_out.f1(), fs_in.f1() - 8);
        assert_eq!(fs_out.f(6), fs_in.f(6));
    }

    #[test]
    fn f1_noop_without_singletons() {
        let stream =
            AnswerStream::from_pairs([("w0", "a"), ("w1", "a"), ("w0", "b"), ("w1", "b")]).unwrap();
        let cfg = HeuristicConfig::new(HeuristicKind::F1, 3);
        assert_eq!(f1_truncate(&stream, &cfg), stream);
    }

    #[test]
    fn truncation_is_deterministic() {
        let stream = stream_with_counts(&[40, 9, 3, 3, 2]);
        let cfg = HeuristicConfig { t: 3, ..HeuristicConfig::new(HeuristicKind::Cluster, 99) };
        assert_eq!(cluster_truncate(&stream, &cfg), cluster_truncate(&stream, &cfg));
        let other = cluster_truncate(&stream, &cfg.with_seed(100));
        // Same sizes either way, usually different picks.
        assert_eq!(other.len(), cluster_truncate(&stream, &cfg).len());
    }

    fn is_subsequence(inner: &AnswerStream, outer: &AnswerStream) -> bool {
        let mut it = outer.records().iter();
        inner
            .records()
            .iter()
            .all(|r| it.any(|o| o.worker_id == r.worker_id && o.answer == r.answer))
    }

    prop_compose! {
        fn arb_counts()(counts in prop::collection::vec(1usize..40, 1..12)) -> Vec<usize> {
            counts
        }
    }

    proptest! {
        #[test]
        fn cluster_output_is_bounded_subsequence(counts in arb_counts(), seed in any::<u64>(), t in 1usize..12) {
            let stream = stream_with_counts(&counts);
            let cfg = HeuristicConfig { t, ..HeuristicConfig::new(HeuristicKind::Cluster, seed) };
            let out = cluster_truncate(&stream, &cfg);
            prop_assert!(is_subsequence(&out, &stream));
            for (w, &a) in counts.iter().enumerate() {
                let kept = count_for(&out, &format!("w{w:02}"));
                let removed = a - kept;
                prop_assert!(removed <= (cfg.r * a as f64).floor() as usize);
            }
        }

        #[test]
        fn f1_never_increases_singletons(
            pairs in prop::collection::vec((0u8..6, 0u16..80), 2..120),
            seed in any::<u64>(),
        ) {
            let stream = AnswerStream::from_pairs(
                pairs.into_iter().map(|(w, a)| (format!("w{w}"), format!("ans {a}"))),
            )
            .unwrap();
            let cfg = HeuristicConfig { t: 2, ..HeuristicConfig::new(HeuristicKind::F1, seed) };
            let out = f1_truncate(&stream, &cfg);
            prop_assert!(is_subsequence(&out, &stream));
            let fs_in = FrequencyStatistics::from_stream(&stream).unwrap();
            let fs_out = FrequencyStatistics::from_stream(&out).unwrap();
            let removed = stream.len() - out.len();
            prop_assert_eq!(fs_out.f1(), fs_in.f1() - removed);
            for (j, fj) in fs_in.iter() {
                if j >= 2 {
                    prop_assert_eq!(fs_out.f(j), fj);
                }
            }
        }
    }
}
