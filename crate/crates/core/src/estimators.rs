//! Cardinality estimators over frequency statistics.
//!
//! All estimators consume a [`FrequencyStatistics`] and return a
//! [`CardinalityEstimate`] whose value is never below the observed distinct
//! count `c` (it may be `+inf` when the sample carries no duplication
//! signal at all).
//!
//! - `uniform_mle` assumes equally likely items and solves
//!   `c = N(1 - e^(-n/N))` for `N`.
//! - `chao84` adds the rare-species correction `f1^2 / (2 f2)`.
//! - `chao92` rescales by the Good-Turing sample coverage `1 - f1/n` and a
//!   coefficient-of-variation estimate, which makes it robust to item skew.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristics::{self, HeuristicConfig};
use crate::stream::{AnswerStream, FrequencyStatistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    UniformMle,
    Chao84,
    Chao92,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] =
        [EstimatorKind::UniformMle, EstimatorKind::Chao84, EstimatorKind::Chao92];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::UniformMle => "uniform_mle",
            EstimatorKind::Chao84 => "chao84",
            EstimatorKind::Chao92 => "chao92",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform_mle" => Ok(EstimatorKind::UniformMle),
            "chao84" => Ok(EstimatorKind::Chao84),
            "chao92" => Ok(EstimatorKind::Chao92),
            other => Err(Error::InvalidConfig(format!("unknown estimator `{other}`"))),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Caveat attached to an estimate whose inputs were degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateFlag {
    /// Every answer was a singleton; the uniform MLE has no finite root.
    InsufficientDuplication,
    /// Coverage was 0 and got clamped to 1/(2n); treat the value as a rough
    /// early-stream reading.
    LowCoverage,
}

/// An estimated number of distinct items, with optional diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityEstimate {
    pub kind: EstimatorKind,
    /// Estimated class count; at least `c`, possibly `+inf`.
    pub value: f64,
    /// Good-Turing sample coverage, for coverage-based estimators.
    pub coverage: Option<f64>,
    /// Squared coefficient-of-variation estimate.
    pub cv_squared: Option<f64>,
    pub flag: Option<EstimateFlag>,
}

impl CardinalityEstimate {
    fn plain(kind: EstimatorKind, value: f64) -> Self {
        Self { kind, value, coverage: None, cv_squared: None, flag: None }
    }
}

/// Solves `c = N(1 - e^(-n/N))` for `N >= c` by bracketed bisection.
///
/// The left bracket is `c` itself (the residual there is negative whenever
/// the sample is finite); the right bracket is grown geometrically until the
/// residual changes sign. With `c = n` the equation has no finite root and
/// the estimate is `+inf`, flagged [`EstimateFlag::InsufficientDuplication`].
pub fn estimate_uniform_mle(fstat: &FrequencyStatistics) -> CardinalityEstimate {
    let (n, c) = (fstat.n(), fstat.c());
    if c == n {
        return CardinalityEstimate {
            flag: Some(EstimateFlag::InsufficientDuplication),
            ..CardinalityEstimate::plain(EstimatorKind::UniformMle, f64::INFINITY)
        };
    }
    let value = solve_uniform_mle(n as f64, c as f64);
    CardinalityEstimate::plain(EstimatorKind::UniformMle, value)
}

fn solve_uniform_mle(n: f64, c: f64) -> f64 {
    // residual(N) = N(1 - e^(-n/N)) - c, increasing in N with limit n - c > 0
    let residual = |nn: f64| -nn * f64::exp_m1(-n / nn) - c;
    let mut lo = c;
    let mut hi = (2.0 * c).max(10.0 * n);
    while residual(hi) <= 0.0 && hi < 1e300 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Chao's rare-species estimator: `c + f1^2 / (2 f2)`. When there are no
/// doubletons the bias-corrected form `c + f1(f1-1)/2` is used instead.
pub fn estimate_chao84(fstat: &FrequencyStatistics) -> CardinalityEstimate {
    let c = fstat.c() as f64;
    let f1 = fstat.f1() as f64;
    let f2 = fstat.f2() as f64;
    let value = if f2 > 0.0 { c + f1 * f1 / (2.0 * f2) } else { c + f1 * (f1 - 1.0) / 2.0 };
    CardinalityEstimate::plain(EstimatorKind::Chao84, value)
}

/// Good-Turing sample coverage `1 - f1/n`, clamped to `1/(2n)` when every
/// answer is a singleton so that coverage-based estimators stay defined.
pub fn sample_coverage(fstat: &FrequencyStatistics) -> f64 {
    let n = fstat.n();
    if fstat.f1() == n {
        return 1.0 / (2.0 * n as f64);
    }
    1.0 - fstat.f1() as f64 / n as f64
}

/// Squared coefficient-of-variation estimate,
/// `max{ (c/Ĉ) · Σ_j j(j-1) f_j / (n(n-1)) - 1, 0 }`.
pub fn cv_squared(fstat: &FrequencyStatistics) -> Result<f64> {
    if fstat.n() < 2 {
        return Err(Error::NeedsTwoSamples);
    }
    let n = fstat.n() as f64;
    let coverage = sample_coverage(fstat);
    let pair_sum: f64 = fstat.iter().map(|(j, fj)| (j * (j - 1) * fj) as f64).sum();
    let gamma_sq = (fstat.c() as f64 / coverage) * pair_sum / (n * (n - 1.0)) - 1.0;
    Ok(gamma_sq.max(0.0))
}

/// Coverage-adjusted estimator: `c/Ĉ + n(1-Ĉ)/Ĉ · γ̂²`. With `γ̂² = 0` this
/// is exactly `c/Ĉ`.
pub fn estimate_chao92(fstat: &FrequencyStatistics) -> Result<CardinalityEstimate> {
    let gamma_sq = cv_squared(fstat)?;
    let coverage = sample_coverage(fstat);
    let n = fstat.n() as f64;
    let c = fstat.c() as f64;
    let value = c / coverage + n * (1.0 - coverage) / coverage * gamma_sq;
    let flag = (fstat.f1() == fstat.n()).then_some(EstimateFlag::LowCoverage);
    Ok(CardinalityEstimate {
        kind: EstimatorKind::Chao92,
        value,
        coverage: Some(coverage),
        cv_squared: Some(gamma_sq),
        flag,
    })
}

/// Runs the requested estimator.
pub fn estimate(kind: EstimatorKind, fstat: &FrequencyStatistics) -> Result<CardinalityEstimate> {
    match kind {
        EstimatorKind::UniformMle => Ok(estimate_uniform_mle(fstat)),
        EstimatorKind::Chao84 => Ok(estimate_chao84(fstat)),
        EstimatorKind::Chao92 => estimate_chao92(fstat),
    }
}

/// Completeness: observed unique answers over predicted cardinality.
/// Divergent (`+inf`) estimates give 0.
pub fn completeness(fstat: &FrequencyStatistics, estimate: &CardinalityEstimate) -> f64 {
    if estimate.value.is_infinite() {
        return 0.0;
    }
    fstat.c() as f64 / estimate.value
}

/// One estimator value inside a series row. Divergent estimates and
/// not-computable prefixes are kept distinct so that emitted series stay
/// machine-readable (`inf` vs empty cell).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateCell {
    /// Estimator not requested or not computable on this prefix.
    Missing,
    Value(f64),
    Infinite,
}

impl EstimateCell {
    fn from_value(value: f64) -> Self {
        if value.is_infinite() {
            EstimateCell::Infinite
        } else {
            EstimateCell::Value(value)
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            EstimateCell::Missing => None,
            EstimateCell::Value(v) => Some(*v),
            EstimateCell::Infinite => Some(f64::INFINITY),
        }
    }

    /// CSV cell text: empty for missing, `inf` for divergent.
    pub fn to_csv_field(&self) -> String {
        match self {
            EstimateCell::Missing => String::new(),
            EstimateCell::Value(v) => format!("{v}"),
            EstimateCell::Infinite => "inf".to_string(),
        }
    }
}

impl Serialize for EstimateCell {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EstimateCell::Missing => serializer.serialize_none(),
            EstimateCell::Value(v) => serializer.serialize_f64(*v),
            EstimateCell::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// One evaluation point of an estimate series. `unique` and `f1_ratio`
/// describe the raw prefix; the estimator cells (and their diagnostics)
/// reflect the heuristic pre-pass when one was configured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub hits: usize,
    pub unique: usize,
    pub f1_ratio: f64,
    pub uniform_mle: EstimateCell,
    pub chao84: EstimateCell,
    pub chao92: EstimateCell,
    pub coverage: Option<f64>,
    pub cv_squared: Option<f64>,
}

/// Per-prefix time series of estimates and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSeries {
    pub kinds: Vec<EstimatorKind>,
    pub rows: Vec<SeriesRow>,
}

/// CSV header for series rows restricted to the given estimators.
pub fn series_csv_header(kinds: &[EstimatorKind]) -> String {
    let mut cols = vec!["hits".to_string(), "unique".to_string(), "f1_ratio".to_string()];
    for kind in kinds {
        cols.push(kind.name().to_string());
    }
    if kinds.contains(&EstimatorKind::Chao92) {
        cols.push("coverage".to_string());
        cols.push("cv_squared".to_string());
    }
    cols.join(",")
}

/// CSV line for one series row (no trailing newline).
pub fn series_csv_row(kinds: &[EstimatorKind], row: &SeriesRow) -> String {
    let mut cols =
        vec![row.hits.to_string(), row.unique.to_string(), format!("{}", row.f1_ratio)];
    for kind in kinds {
        let cell = match kind {
            EstimatorKind::UniformMle => row.uniform_mle,
            EstimatorKind::Chao84 => row.chao84,
            EstimatorKind::Chao92 => row.chao92,
        };
        cols.push(cell.to_csv_field());
    }
    if kinds.contains(&EstimatorKind::Chao92) {
        cols.push(row.coverage.map_or_else(String::new, |v| format!("{v}")));
        cols.push(row.cv_squared.map_or_else(String::new, |v| format!("{v}")));
    }
    cols.join(",")
}

impl EstimateSeries {
    pub fn to_csv(&self) -> String {
        let mut out = series_csv_header(&self.kinds);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&series_csv_row(&self.kinds, row));
            out.push('\n');
        }
        out
    }
}

/// Evaluation points step, 2·step, …, n (the final partial point is always
/// included).
fn series_points(n: usize, step: usize) -> Vec<usize> {
    let mut points: Vec<usize> = (1..=n / step).map(|k| k * step).collect();
    if n > 0 && points.last() != Some(&n) {
        points.push(n);
    }
    points
}

/// Evaluates the requested estimators on growing prefixes of the stream.
///
/// Estimator preconditions that fail on a short prefix (for example Chao92
/// on a single record) produce missing cells, not errors.
pub fn estimate_series(
    stream: &AnswerStream,
    step: usize,
    kinds: &[EstimatorKind],
) -> Result<EstimateSeries> {
    estimate_series_with_heuristic(stream, step, kinds, None)
}

/// Like [`estimate_series`], with an optional streaker-correction pre-pass.
///
/// The heuristic is re-applied to every prefix (it sees exactly the answers
/// available at that point in time), and with `repetitions > 1` the reported
/// estimate is the mean over that many independently seeded truncations.
pub fn estimate_series_with_heuristic(
    stream: &AnswerStream,
    step: usize,
    kinds: &[EstimatorKind],
    heuristic: Option<&HeuristicConfig>,
) -> Result<EstimateSeries> {
    if step < 1 {
        return Err(Error::InvalidConfig("step must be >= 1".into()));
    }
    if let Some(cfg) = heuristic {
        cfg.validate()?;
    }
    let mut rows = Vec::new();
    for hits in series_points(stream.len(), step) {
        rows.push(series_row(&stream.prefix(hits)?, kinds, heuristic)?);
    }
    Ok(EstimateSeries { kinds: kinds.to_vec(), rows })
}

/// Evaluates one series row on a (non-empty) prefix of the stream.
pub fn series_row(
    prefix: &AnswerStream,
    kinds: &[EstimatorKind],
    heuristic: Option<&HeuristicConfig>,
) -> Result<SeriesRow> {
    let raw_fstat = FrequencyStatistics::from_stream(prefix)?;

    let mut cells = [EstimateCell::Missing; 3];
    let mut coverage = None;
    let mut cv_sq = None;
    match heuristic {
        None => {
            fill_cells(&raw_fstat, kinds, &mut cells, &mut coverage, &mut cv_sq);
        }
        Some(cfg) => {
            let mut acc: [Vec<EstimateCell>; 3] = Default::default();
            for rep in 0..cfg.repetitions {
                let rep_cfg = cfg.with_seed(crate::rng::derive_seed(cfg.seed, rep as u64));
                let truncated = heuristics::apply(prefix, &rep_cfg)?;
                let fstat = FrequencyStatistics::from_stream(&truncated)?;
                let mut rep_cells = [EstimateCell::Missing; 3];
                fill_cells(&fstat, kinds, &mut rep_cells, &mut coverage, &mut cv_sq);
                for (slot, cell) in acc.iter_mut().zip(rep_cells) {
                    slot.push(cell);
                }
            }
            for (slot, reps) in cells.iter_mut().zip(acc) {
                *slot = mean_cell(&reps);
            }
        }
    }

    Ok(SeriesRow {
        hits: prefix.len(),
        unique: raw_fstat.c(),
        f1_ratio: raw_fstat.f1_ratio(),
        uniform_mle: cells[0],
        chao84: cells[1],
        chao92: cells[2],
        coverage,
        cv_squared: cv_sq,
    })
}

fn fill_cells(
    fstat: &FrequencyStatistics,
    kinds: &[EstimatorKind],
    cells: &mut [EstimateCell; 3],
    coverage: &mut Option<f64>,
    cv_sq: &mut Option<f64>,
) {
    for &kind in kinds {
        let slot = match kind {
            EstimatorKind::UniformMle => 0,
            EstimatorKind::Chao84 => 1,
            EstimatorKind::Chao92 => 2,
        };
        match estimate(kind, fstat) {
            Ok(est) => {
                cells[slot] = EstimateCell::from_value(est.value);
                if kind == EstimatorKind::Chao92 {
                    *coverage = est.coverage;
                    *cv_sq = est.cv_squared;
                }
            }
            Err(_) => cells[slot] = EstimateCell::Missing,
        }
    }
}

/// Mean of repeated evaluations: any missing repetition poisons the cell,
/// any divergent repetition makes it divergent.
fn mean_cell(cells: &[EstimateCell]) -> EstimateCell {
    if cells.is_empty() || cells.iter().any(|c| matches!(c, EstimateCell::Missing)) {
        return EstimateCell::Missing;
    }
    if cells.iter().any(|c| matches!(c, EstimateCell::Infinite)) {
        return EstimateCell::Infinite;
    }
    let values: Vec<f64> = cells.iter().filter_map(|c| c.as_f64()).collect();
    EstimateCell::Value(values.iter().sum::<f64>() / values.len() as f64)
}
