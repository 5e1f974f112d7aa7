//! Answer streams and their sufficient statistics.
//!
//! A stream is the ordered log of crowd answers for one enumeration task:
//! one record per HIT, carrying the arrival position, the worker token and
//! the normalized answer string. Everything downstream (estimators,
//! heuristics, list detection) consumes either the stream itself or the
//! frequency statistics derived from it.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expected CSV header, in this exact column order.
pub const CSV_HEADER: &str = "hit_index,worker_id,answer";

/// One HIT response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    /// 0-based global arrival position. Within a stream these are strictly
    /// increasing and contiguous from 0.
    pub hit_index: usize,
    /// Opaque worker token.
    pub worker_id: String,
    /// Answer text, already normalized (lowercase, whitespace collapsed).
    pub answer: String,
}

/// Ordered sequence of answer records; the universal input.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnswerStream {
    records: Vec<AnswerRecord>,
}

/// One worker's answers in arrival order, as (hit_index, answer) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerSequence {
    pub worker_id: String,
    pub answers: Vec<(usize, String)>,
}

/// Sample size, distinct count and the frequency-of-frequencies histogram.
///
/// `f_j` is the number of distinct answers observed exactly `j` times, so
/// `Σ_j f_j = c` and `Σ_j j·f_j = n` always hold. The histogram is the
/// sufficient statistic for every cardinality estimator in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyStatistics {
    n: usize,
    c: usize,
    f: BTreeMap<usize, usize>,
}

/// Species accumulation curve: unique answers seen after each HIT.
///
/// Plain curves from [`AnswerStream::sac`] have integral `unique` values;
/// permutation-averaged curves are fractional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SACurve {
    pub points: Vec<SacPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SacPoint {
    pub hits: usize,
    pub unique: f64,
}

/// Canonicalizes an answer: trims surrounding whitespace, collapses internal
/// whitespace runs to single spaces and lowercases. Errors when nothing is
/// left.
pub fn normalize_answer(raw: &str) -> Result<String> {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let normalized = collapsed.to_lowercase();
    if normalized.is_empty() {
        return Err(Error::BlankAnswer);
    }
    Ok(normalized)
}

impl AnswerStream {
    /// Builds a stream from (worker, raw answer) pairs in arrival order.
    /// Answers are normalized; hit indices are assigned 0..n-1.
    pub fn from_pairs<I, W, A>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (W, A)>,
        W: Into<String>,
        A: AsRef<str>,
    {
        let records = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (worker, answer))| {
                Ok(AnswerRecord {
                    hit_index: i,
                    worker_id: worker.into(),
                    answer: normalize_answer(answer.as_ref())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { records })
    }

    /// Parses a CSV document with header `hit_index,worker_id,answer`.
    ///
    /// Rows may arrive in any order; they are sorted by `hit_index` and the
    /// indices are re-assigned to arrival rank 0..n-1. Malformed rows,
    /// duplicate indices and answers that normalize to nothing are reported
    /// with their 1-based data row number.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());

        let header = reader
            .headers()
            .map_err(|e| Error::Parse { row: 0, reason: e.to_string() })?
            .clone();
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                row: 0,
                reason: format!("expected header `{CSV_HEADER}`, got `{}`", header.iter().collect::<Vec<_>>().join(",")),
            });
        }

        // (given index, file row, worker, normalized answer)
        let mut rows: Vec<(usize, usize, String, String)> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Parse { row, reason: e.to_string() })?;
            if record.len() != 3 {
                return Err(Error::Parse {
                    row,
                    reason: format!("expected 3 columns, got {}", record.len()),
                });
            }
            let hit_index: usize = record[0].trim().parse().map_err(|_| Error::Parse {
                row,
                reason: format!("invalid hit_index `{}`", &record[0]),
            })?;
            let answer = normalize_answer(&record[2]).map_err(|_| Error::Parse {
                row,
                reason: "answer is blank after normalization".to_string(),
            })?;
            rows.push((hit_index, row, record[1].to_string(), answer));
        }

        rows.sort_by_key(|(hit_index, row, _, _)| (*hit_index, *row));
        for pair in rows.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Parse {
                    row: pair[1].1,
                    reason: format!("duplicate hit_index {}", pair[1].0),
                });
            }
        }

        let records = rows
            .into_iter()
            .enumerate()
            .map(|(i, (_, _, worker_id, answer))| AnswerRecord { hit_index: i, worker_id, answer })
            .collect();
        Ok(Self { records })
    }

    /// Serializes to CSV (UTF-8, LF, RFC-4180 quoting), records sorted by
    /// hit_index. `from_csv ∘ to_csv` is the identity.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(CSV_HEADER.split(',')).expect("write to Vec cannot fail");
        for r in &self.records {
            writer
                .write_record([r.hit_index.to_string().as_str(), &r.worker_id, &r.answer])
                .expect("write to Vec cannot fail");
        }
        String::from_utf8(writer.into_inner().expect("no partial flush")).expect("valid utf8")
    }

    pub fn records(&self) -> &[AnswerRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First `k` records, indices preserved.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k > self.len() {
            return Err(Error::PrefixOutOfRange { requested: k, available: self.len() });
        }
        Ok(Self { records: self.records[..k].to_vec() })
    }

    /// Species accumulation curve: point k holds the number of distinct
    /// answers among the first k records.
    pub fn sac(&self) -> SACurve {
        let mut seen = HashSet::new();
        let points = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                seen.insert(r.answer.as_str());
                SacPoint { hits: i + 1, unique: seen.len() as f64 }
            })
            .collect();
        SACurve { points }
    }

    /// Per-worker answer sequences in global arrival order, sorted by
    /// worker id for deterministic iteration.
    pub fn worker_sequences(&self) -> Vec<WorkerSequence> {
        let mut by_worker: BTreeMap<&str, Vec<(usize, String)>> = BTreeMap::new();
        for r in &self.records {
            by_worker
                .entry(r.worker_id.as_str())
                .or_default()
                .push((r.hit_index, r.answer.clone()));
        }
        by_worker
            .into_iter()
            .map(|(worker_id, answers)| WorkerSequence { worker_id: worker_id.to_string(), answers })
            .collect()
    }
}

impl FrequencyStatistics {
    /// Computes n, c and the f_j histogram from a stream.
    pub fn from_stream(stream: &AnswerStream) -> Result<Self> {
        if stream.is_empty() {
            return Err(Error::EmptyStream);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for r in stream.records() {
            *counts.entry(r.answer.as_str()).or_insert(0) += 1;
        }
        let mut f: BTreeMap<usize, usize> = BTreeMap::new();
        for &count in counts.values() {
            *f.entry(count).or_insert(0) += 1;
        }
        Ok(Self { n: stream.len(), c: counts.len(), f })
    }

    /// Builds statistics directly from an f_j histogram; n and c are derived.
    pub fn from_histogram(histogram: BTreeMap<usize, usize>) -> Result<Self> {
        let f: BTreeMap<usize, usize> =
            histogram.into_iter().filter(|&(_, fj)| fj > 0).collect();
        if f.keys().any(|&j| j == 0) {
            return Err(Error::InvalidStatistics("histogram key j must be >= 1".into()));
        }
        let c: usize = f.values().sum();
        let n: usize = f.iter().map(|(&j, &fj)| j * fj).sum();
        if c == 0 {
            return Err(Error::EmptyStream);
        }
        Ok(Self { n, c, f })
    }

    /// Sample size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct answers.
    pub fn c(&self) -> usize {
        self.c
    }

    /// f_j: number of distinct answers occurring exactly `j` times.
    pub fn f(&self, j: usize) -> usize {
        self.f.get(&j).copied().unwrap_or(0)
    }

    /// Singleton count f_1.
    pub fn f1(&self) -> usize {
        self.f(1)
    }

    /// Doubleton count f_2.
    pub fn f2(&self) -> usize {
        self.f(2)
    }

    /// Iterates (j, f_j) pairs in increasing j, skipping zero entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.f.iter().map(|(&j, &fj)| (j, fj))
    }

    /// Fraction of singletons among the distinct answers, f_1 / c.
    ///
    /// A high ratio signals that many answers are still arriving for the
    /// first time, i.e. the sample is far from the accumulation plateau.
    pub fn f1_ratio(&self) -> f64 {
        self.f1() as f64 / self.c as f64
    }
}

impl SACurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Unique count at the end of the curve, 0 for an empty curve.
    pub fn final_unique(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.unique)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].unique >= w[0].unique)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream_of(answers: &[&str]) -> AnswerStream {
        AnswerStream::from_pairs(answers.iter().map(|a| ("w1", *a))).unwrap()
    }

    #[test]
    fn normalize_collapses_and_lowercases() {
        assert_eq!(normalize_answer("  New  York ").unwrap(), "new york");
        assert_eq!(normalize_answer("Texas").unwrap(), "texas");
    }

    #[test]
    fn normalize_rejects_blank() {
        assert!(matches!(normalize_answer("   "), Err(Error::BlankAnswer)));
        assert!(matches!(normalize_answer(""), Err(Error::BlankAnswer)));
    }

    #[test]
    fn parse_three_rows() {
        let text = "hit_index,worker_id,answer\n0,w1,Texas\n1,w2,Ohio\n2,w1,Iowa\n";
        let stream = AnswerStream::from_csv(text).unwrap();
        assert_eq!(stream.len(), 3);
        assert_eq!(stream.records()[0].answer, "texas");
        assert_eq!(stream.records()[2].worker_id, "w1");
    }

    #[test]
    fn parse_sorts_out_of_order_rows() {
        let sorted = AnswerStream::from_csv("hit_index,worker_id,answer\n0,w1,a\n1,w2,b\n2,w1,c\n").unwrap();
        let shuffled = AnswerStream::from_csv("hit_index,worker_id,answer\n2,w1,c\n0,w1,a\n1,w2,b\n").unwrap();
        assert_eq!(sorted, shuffled);
    }

    #[test]
    fn parse_rejects_blank_answer_naming_row() {
        let text = "hit_index,worker_id,answer\n0,w1,a\n1,w2,   \n";
        match AnswerStream::from_csv(text) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_duplicate_hit_index() {
        let text = "hit_index,worker_id,answer\n0,w1,a\n0,w2,b\n";
        match AnswerStream::from_csv(text) {
            Err(Error::Parse { row, reason }) => {
                assert_eq!(row, 2);
                assert!(reason.contains("duplicate"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_wrong_column_count() {
        let text = "hit_index,worker_id,answer\n0,w1\n";
        assert!(matches!(AnswerStream::from_csv(text), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn parse_rejects_wrong_header() {
        let text = "idx,worker,ans\n0,w1,a\n";
        assert!(matches!(AnswerStream::from_csv(text), Err(Error::Parse { row: 0, .. })));
    }

    #[test]
    fn fstat_direct_counts() {
        let s = stream_of(&["a", "b", "a", "c"]);
        let fs = FrequencyStatistics::from_stream(&s).unwrap();
        assert_eq!(fs.n(), 4);
        assert_eq!(fs.c(), 3);
        assert_eq!(fs.f1(), 2);
        assert_eq!(fs.f2(), 1);
        assert_eq!(fs.f(3), 0);
    }

    #[test]
    fn fstat_single_class() {
        let s = stream_of(&["a", "a", "a"]);
        let fs = FrequencyStatistics::from_stream(&s).unwrap();
        assert_eq!((fs.n(), fs.c()), (3, 1));
        assert_eq!(fs.f(3), 1);
    }

    #[test]
    fn fstat_rejects_empty_stream() {
        let s = AnswerStream::default();
        assert!(matches!(FrequencyStatistics::from_stream(&s), Err(Error::EmptyStream)));
    }

    #[test]
    fn f1_ratio_examples() {
        let fs = FrequencyStatistics::from_histogram(BTreeMap::from([(1, 10), (2, 40)])).unwrap();
        assert_eq!(fs.f1_ratio(), 0.2);

        let none = FrequencyStatistics::from_histogram(BTreeMap::from([(2, 7)])).unwrap();
        assert_eq!(none.f1_ratio(), 0.0);

        let all = FrequencyStatistics::from_histogram(BTreeMap::from([(1, 9)])).unwrap();
        assert_eq!(all.f1_ratio(), 1.0);
    }

    #[test]
    fn sac_direct_scan() {
        let s = stream_of(&["a", "b", "a", "c"]);
        let curve = s.sac();
        let got: Vec<(usize, f64)> = curve.points.iter().map(|p| (p.hits, p.unique)).collect();
        assert_eq!(got, vec![(1, 1.0), (2, 2.0), (3, 2.0), (4, 3.0)]);
    }

    #[test]
    fn sac_constant_stream() {
        let s = stream_of(&["x", "x", "x", "x", "x"]);
        assert!(s.sac().points.iter().all(|p| p.unique == 1.0));
    }

    #[test]
    fn sac_empty_stream() {
        assert!(AnswerStream::default().sac().is_empty());
    }

    #[test]
    fn prefix_boundaries() {
        let s = stream_of(&["a", "b", "c"]);
        assert_eq!(s.prefix(3).unwrap(), s);
        assert!(s.prefix(0).unwrap().is_empty());
        let two = s.prefix(2).unwrap();
        assert_eq!(two.records()[1].answer, "b");
        assert!(matches!(s.prefix(4), Err(Error::PrefixOutOfRange { .. })));
    }

    #[test]
    fn worker_sequences_preserve_order() {
        let s = AnswerStream::from_pairs([("w2", "a"), ("w1", "b"), ("w2", "c")]).unwrap();
        let seqs = s.worker_sequences();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].worker_id, "w1");
        assert_eq!(seqs[1].answers, vec![(0, "a".to_string()), (2, "c".to_string())]);
    }

    prop_compose! {
        fn arb_stream()(pairs in prop::collection::vec((0u8..6, 0u8..12), 1..200)) -> AnswerStream {
            AnswerStream::from_pairs(
                pairs.into_iter().map(|(w, a)| (format!("w{w}"), format!("ans {a}"))),
            )
            .unwrap()
        }
    }

    proptest! {
        #[test]
        fn fstat_identities(stream in arb_stream()) {
            let fs = FrequencyStatistics::from_stream(&stream).unwrap();
            let sum_f: usize = fs.iter().map(|(_, fj)| fj).sum();
            let sum_jf: usize = fs.iter().map(|(j, fj)| j * fj).sum();
            prop_assert_eq!(sum_f, fs.c());
            prop_assert_eq!(sum_jf, fs.n());
            prop_assert!(fs.c() <= fs.n());
        }

        #[test]
        fn sac_final_equals_distinct_count(stream in arb_stream()) {
            let fs = FrequencyStatistics::from_stream(&stream).unwrap();
            prop_assert_eq!(stream.sac().final_unique(), fs.c() as f64);
        }

        #[test]
        fn fstat_order_insensitive(stream in arb_stream(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut pairs: Vec<(String, String)> = stream
                .records()
                .iter()
                .map(|r| (r.worker_id.clone(), r.answer.clone()))
                .collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            pairs.shuffle(&mut rng);
            let permuted = AnswerStream::from_pairs(pairs).unwrap();
            prop_assert_eq!(
                FrequencyStatistics::from_stream(&stream).unwrap(),
                FrequencyStatistics::from_stream(&permuted).unwrap()
            );
        }
    }

    proptest! {
        // Quoting stress: answers with commas, quotes and whitespace runs.
        #[test]
        fn csv_round_trip(pairs in prop::collection::vec(
            ("[a-d]{1,3}", "[a-z ,\"']{1,12}"),
            1..60,
        )) {
            let pairs: Vec<(String, String)> = pairs
                .into_iter()
                .filter(|(_, a)| !a.trim().is_empty())
                .collect();
            prop_assume!(!pairs.is_empty());
            let stream = AnswerStream::from_pairs(pairs).unwrap();
            let parsed = AnswerStream::from_csv(&stream.to_csv()).unwrap();
            prop_assert_eq!(parsed, stream);
        }
    }
}
