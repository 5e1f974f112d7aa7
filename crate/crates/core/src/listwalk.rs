//! List-walking detection.
//!
//! Workers who transcribe the same external list produce identical answer
//! subsequences at the same per-worker offset. For every shared window the
//! detector asks: how likely is it that this many workers would emit this
//! exact sequence if they were genuinely sampling? The sequence probability
//! blends the observed per-position answer frequencies with a pessimistic
//! maximally-skewed prior (a self-similar 80/20 distribution), and a
//! binomial tail turns it into the probability that at least `w` of the `W`
//! comparable workers share the window by chance. Windows below the
//! threshold are reported, with nested same-worker windows consolidated
//! into their maximal span.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stream::{AnswerStream, WorkerSequence};

/// Detection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ListWalkConfig {
    /// Shortest window length worth testing.
    pub s_min: usize,
    /// Smoothing factor: 1 trusts only the observed frequencies, 0 only the
    /// skewed prior.
    pub beta: f64,
    /// Self-similar prior parameter; the most likely item carries
    /// probability `1 - h`.
    pub h: f64,
    /// Report windows whose tail probability falls below this.
    pub threshold: f64,
}

impl Default for ListWalkConfig {
    fn default() -> Self {
        Self { s_min: 5, beta: 0.5, h: 0.2, threshold: 0.01 }
    }
}

impl ListWalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s_min < 2 {
            return Err(Error::InvalidConfig("s_min must be >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig("beta must be in [0, 1]".into()));
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::InvalidConfig("h must be in (0, 1)".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig("threshold must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A shared window flagged as likely list walking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedWindow {
    /// Per-worker answer position the window starts at.
    pub offset: usize,
    pub length: usize,
    /// The shared answers.
    pub sequence: Vec<String>,
    /// Workers sharing the window (size `w`), sorted.
    pub workers: Vec<String>,
    /// Cohort size `W`: workers with at least `offset + length` answers.
    pub cohort: usize,
    /// Probability that `w` or more of the `W` workers share the sequence
    /// by chance.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffectedPoint {
    pub hits: usize,
    pub affected: usize,
}

/// Scan result: detected windows plus how many records they cover.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ListWalkReport {
    pub windows: Vec<DetectedWindow>,
    /// Distinct records covered by any detected window (overlaps counted
    /// once).
    pub affected_hits: usize,
    /// Per-prefix affected counts; filled by [`affected_series`].
    pub affected_series: Vec<AffectedPoint>,
}

/// Smoothed probability of one position: `β·(r/W) + (1-β)·(1-h)`.
fn position_probability(matches: usize, cohort: usize, beta: f64, h: f64) -> f64 {
    beta * matches as f64 / cohort as f64 + (1.0 - beta) * (1.0 - h)
}

fn sequence_probability(match_counts: &[usize], cohort: usize, beta: f64, h: f64) -> f64 {
    match_counts
        .iter()
        .map(|&r| position_probability(r, cohort, beta, h))
        .product()
}

/// Probability of observing the target sequence `alpha` (the answers at
/// per-worker positions `offset .. offset + alpha.len()`) under the smoothed
/// model: the product over positions of `β·(r_i/W) + (1-β)(1-h)`, where
/// `r_i` counts cohort workers whose answer at that position equals
/// `alpha_i`.
///
/// Every cohort member must have at least `offset + alpha.len()` answers.
pub fn target_probability(
    alpha: &[&str],
    offset: usize,
    cohort: &[&WorkerSequence],
    beta: f64,
    h: f64,
) -> Result<f64> {
    if cohort.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let needed = offset + alpha.len();
    if cohort.iter().any(|w| w.answers.len() < needed) {
        return Err(Error::InvalidConfig(
            "cohort member has fewer answers than offset + sequence length".into(),
        ));
    }
    let match_counts: Vec<usize> = alpha
        .iter()
        .enumerate()
        .map(|(i, &a)| cohort.iter().filter(|w| w.answers[offset + i].1 == a).count())
        .collect();
    Ok(sequence_probability(&match_counts, cohort.len(), beta, h))
}

/// Upper binomial tail `P(X >= w)` for `X ~ Binomial(W, p)`, summed
/// directly term by term so small probabilities survive.
pub fn binomial_tail(w: usize, big_w: usize, p: f64) -> f64 {
    if w == 0 {
        return 1.0;
    }
    if w > big_w {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    // First tail term in log space, then incremental ratio updates.
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_term =
        ln_choose(big_w, w) + w as f64 * ln_p + (big_w - w) as f64 * ln_q;
    let mut term = ln_term.exp();
    let mut sum = term;
    if term == 0.0 {
        // Underflow: stay in log space for the whole tail.
        for i in w..big_w {
            ln_term += ((big_w - i) as f64 / (i + 1) as f64).ln() + ln_p - ln_q;
            sum += ln_term.exp();
        }
        return sum;
    }
    for i in w..big_w {
        term *= (big_w - i) as f64 / (i + 1) as f64 * (p / (1.0 - p));
        sum += term;
    }
    sum.min(1.0)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|j| ((n - k + j) as f64).ln() - (j as f64).ln()).sum()
}

/// Scans every (offset, length) window for shared sequences and reports the
/// ones unlikely under the smoothed skew model.
///
/// Windows are tested for all lengths from `s_min` up to the longest worker
/// sequence; a detected window nested inside another detected window with
/// the same worker set is dropped as redundant. Output ordering is
/// deterministic: (offset, length, first worker).
pub fn scan(stream: &AnswerStream, cfg: &ListWalkConfig) -> Result<ListWalkReport> {
    cfg.validate()?;
    let sequences = stream.worker_sequences();
    // Intern answers so window grouping hashes integer slices.
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut interned: Vec<Vec<u32>> = Vec::with_capacity(sequences.len());
    for seq in &sequences {
        let row = seq
            .answers
            .iter()
            .map(|(_, a)| {
                let next = ids.len() as u32;
                *ids.entry(a.as_str()).or_insert(next)
            })
            .collect();
        interned.push(row);
    }
    let max_len = interned.iter().map(Vec::len).max().unwrap_or(0);

    let mut detected: Vec<DetectedWindow> = Vec::new();
    for offset in 0..max_len.saturating_sub(cfg.s_min - 1) {
        for length in cfg.s_min..=(max_len - offset) {
            let needed = offset + length;
            let cohort: Vec<usize> =
                (0..interned.len()).filter(|&i| interned[i].len() >= needed).collect();
            if cohort.len() < 2 {
                break;
            }
            // Group cohort members by their exact window content.
            let mut groups: HashMap<&[u32], Vec<usize>> = HashMap::new();
            for &i in &cohort {
                groups.entry(&interned[i][offset..needed]).or_default().push(i);
            }
            for (alpha, members) in groups {
                if members.len() < 2 {
                    continue;
                }
                let match_counts: Vec<usize> = (0..length)
                    .map(|i| {
                        cohort
                            .iter()
                            .filter(|&&c| interned[c][offset + i] == alpha[i])
                            .count()
                    })
                    .collect();
                let p_alpha = sequence_probability(&match_counts, cohort.len(), cfg.beta, cfg.h);
                let tail = binomial_tail(members.len(), cohort.len(), p_alpha);
                if tail < cfg.threshold {
                    detected.push(DetectedWindow {
                        offset,
                        length,
                        sequence: sequences[members[0]].answers[offset..needed]
                            .iter()
                            .map(|(_, a)| a.clone())
                            .collect(),
                        workers: members
                            .iter()
                            .map(|&i| sequences[i].worker_id.clone())
                            .collect(),
                        cohort: cohort.len(),
                        probability: tail,
                    });
                }
            }
        }
    }

    let windows = consolidate(detected);
    let affected_hits = covered_records(&sequences, &windows);
    Ok(ListWalkReport { windows, affected_hits, affected_series: Vec::new() })
}

/// Drops windows fully contained (same workers, nested span) in another
/// detected window.
fn consolidate(mut detected: Vec<DetectedWindow>) -> Vec<DetectedWindow> {
    for w in &mut detected {
        w.workers.sort_unstable();
    }
    let mut by_workers: HashMap<Vec<String>, Vec<DetectedWindow>> = HashMap::new();
    for w in detected {
        by_workers.entry(w.workers.clone()).or_default().push(w);
    }
    let mut kept = Vec::new();
    for (_, mut group) in by_workers {
        // Sort by start ascending, end descending: a window is nested iff
        // some earlier window in this order already reaches its end.
        group.sort_by_key(|w| (w.offset, std::cmp::Reverse(w.offset + w.length)));
        let mut max_end = 0;
        for w in group {
            let end = w.offset + w.length;
            if end > max_end {
                max_end = end;
                kept.push(w);
            }
        }
    }
    kept.sort_by(|a, b| {
        (a.offset, a.length, &a.workers[0]).cmp(&(b.offset, b.length, &b.workers[0]))
    });
    kept
}

fn covered_records(sequences: &[WorkerSequence], windows: &[DetectedWindow]) -> usize {
    let by_id: HashMap<&str, &WorkerSequence> =
        sequences.iter().map(|s| (s.worker_id.as_str(), s)).collect();
    let mut covered: HashSet<usize> = HashSet::new();
    for w in windows {
        for worker in &w.workers {
            let seq = by_id[worker.as_str()];
            for (hit_index, _) in &seq.answers[w.offset..w.offset + w.length] {
                covered.insert(*hit_index);
            }
        }
    }
    covered.len()
}

/// Runs [`scan`] on growing prefixes and reports the affected-record count
/// per prefix. Not necessarily monotone: a window only exists once a second
/// copier has shown up.
pub fn affected_series(
    stream: &AnswerStream,
    cfg: &ListWalkConfig,
    step: usize,
) -> Result<Vec<AffectedPoint>> {
    if step < 1 {
        return Err(Error::InvalidConfig("step must be >= 1".into()));
    }
    cfg.validate()?;
    let n = stream.len();
    let mut points: Vec<usize> = (1..=n / step).map(|k| k * step).collect();
    if n > 0 && points.last() != Some(&n) {
        points.push(n);
    }
    points
        .into_iter()
        .map(|hits| {
            let report = scan(&stream.prefix(hits)?, cfg)?;
            Ok(AffectedPoint { hits, affected: report.affected_hits })
        })
        .collect()
}
