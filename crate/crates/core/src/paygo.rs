//! Pay-as-you-go benefit prediction.
//!
//! Instead of asking "how many items exist", these routines ask "how many
//! new unique answers will `m` more HITs buy". Two complementary methods:
//!
//! - [`shen_predict`] reasons from sample coverage: with `ŵ` unseen items
//!   and unseen probability mass `1 - Ĉ`, the expected number of new
//!   uniques in `m` extra draws is `ŵ·[1 - (1 - (1-Ĉ)/ŵ)^m]`.
//! - [`SplineModel`] extrapolates the permutation-averaged accumulation
//!   curve with a natural cubic spline and reads the increment off the
//!   extended curve.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::estimate_chao92;
use crate::rng::derive_seed;
use crate::spline::NaturalCubic;
use crate::stream::{AnswerStream, FrequencyStatistics, SACurve, SacPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaygoMethod {
    Shen,
    Spline,
}

impl std::fmt::Display for PaygoMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PaygoMethod::Shen => "shen",
            PaygoMethod::Spline => "spline",
        })
    }
}

/// Expected number of new unique answers from `m` additional HITs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaygoPrediction {
    pub m: usize,
    pub expected_new_uniques: f64,
    pub method: PaygoMethod,
}

/// Coverage-based prediction from raw parts: `w` unseen items and sample
/// coverage `coverage`. Exposed separately so callers with ground truth can
/// evaluate the formula directly.
pub fn shen_from_parts(w: f64, coverage: f64, m: usize) -> f64 {
    if w <= 0.0 || m == 0 {
        return 0.0;
    }
    let base = (1.0 - (1.0 - coverage) / w).clamp(0.0, 1.0);
    w * (1.0 - base.powi(m as i32))
}

/// Coverage-based prediction with `ŵ = chao92 - c` and the Good-Turing
/// coverage estimate.
pub fn shen_predict(fstat: &FrequencyStatistics, m: usize) -> Result<PaygoPrediction> {
    let chao92 = estimate_chao92(fstat)?;
    let w_hat = chao92.value - fstat.c() as f64;
    let coverage = chao92.coverage.expect("chao92 always carries coverage");
    Ok(PaygoPrediction {
        m,
        expected_new_uniques: shen_from_parts(w_hat, coverage, m),
        method: PaygoMethod::Shen,
    })
}

/// Mean accumulation curve over seeded permutations of the records.
///
/// Permutation 0 is the observed arrival order, so `permutations = 1`
/// reproduces [`AnswerStream::sac`] exactly; further permutations are
/// uniform shuffles with sub-seeds derived from (seed, index).
pub fn mean_sac(stream: &AnswerStream, permutations: usize, seed: u64) -> Result<SACurve> {
    if permutations < 1 {
        return Err(Error::InvalidConfig("permutations must be >= 1".into()));
    }
    let n = stream.len();
    let mut sums = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for p in 0..permutations {
        if p > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, p as u64));
            order.shuffle(&mut rng);
        }
        let mut seen = HashSet::with_capacity(n);
        for (k, &idx) in order.iter().enumerate() {
            seen.insert(stream.records()[idx].answer.as_str());
            sums[k] += seen.len() as f64;
        }
    }
    let points = sums
        .iter()
        .enumerate()
        .map(|(k, &s)| SacPoint { hits: k + 1, unique: s / permutations as f64 })
        .collect();
    Ok(SACurve { points })
}

/// Natural cubic spline fitted to (a subsample of) an accumulation curve,
/// with a slope-capped extension for prediction past the observed range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplineModel {
    /// Knots actually used for the fit, as (hits, unique).
    pub knots: Vec<(usize, f64)>,
    /// Permutations behind the fitted curve, when it came from [`mean_sac`].
    pub permutations: Option<usize>,
    pub seed: Option<u64>,
    #[serde(skip)]
    spline: NaturalCubic,
}

impl SplineModel {
    /// Fits the spline through knots subsampled every `max(1, n/25)` curve
    /// points (the last point is always a knot). Needs at least 4 points.
    pub fn fit(curve: &SACurve) -> Result<Self> {
        if curve.len() < 4 {
            return Err(Error::InvalidStatistics(
                "spline fit needs at least 4 curve points".into(),
            ));
        }
        let n = curve.len();
        let stride = (n / 25).max(1);
        let mut indices: Vec<usize> = (0..n).step_by(stride).collect();
        if *indices.last().unwrap() != n - 1 {
            indices.push(n - 1);
        }
        let knots: Vec<(usize, f64)> =
            indices.iter().map(|&i| (curve.points[i].hits, curve.points[i].unique)).collect();
        let xs: Vec<f64> = knots.iter().map(|&(h, _)| h as f64).collect();
        let ys: Vec<f64> = knots.iter().map(|&(_, u)| u).collect();
        let spline = NaturalCubic::fit(&xs, &ys);
        Ok(Self { knots, permutations: None, seed: None, spline })
    }

    /// Convenience: permutation-averaged curve plus fit, with provenance
    /// recorded on the model.
    pub fn fit_mean_sac(stream: &AnswerStream, permutations: usize, seed: u64) -> Result<Self> {
        let curve = mean_sac(stream, permutations, seed)?;
        let mut model = Self::fit(&curve)?;
        model.permutations = Some(permutations);
        model.seed = Some(seed);
        Ok(model)
    }

    /// Spline value at `hits`; beyond the last knot the final cubic segment
    /// extends (uncapped; predictions go through [`predict`](Self::predict),
    /// which caps the extension slope).
    pub fn eval(&self, hits: f64) -> f64 {
        self.spline.eval(hits)
    }

    /// Last knot abscissa: the sample size the model was fitted at.
    pub fn end_hits(&self) -> usize {
        self.knots.last().expect("fit guarantees knots").0
    }

    /// Expected new uniques from `m` more HITs: the increment of the
    /// extended curve, with the extension's slope clamped into
    /// `[0, slope at the end]` so predictions are non-negative, monotone in
    /// `m` and never exceed `end slope × m`.
    pub fn predict(&self, m: usize) -> PaygoPrediction {
        let gain = self.extension_gain(m as f64);
        PaygoPrediction { m, expected_new_uniques: gain, method: PaygoMethod::Spline }
    }

    fn extension_gain(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        let slope = self.spline.end_slope();
        if slope <= 0.0 {
            return 0.0;
        }
        let d = self.spline.end_cubic_coefficient();
        if d >= 0.0 {
            // Curving upward: the raw extension exceeds slope·m immediately,
            // so the cap makes it linear.
            return slope * m;
        }
        // Curving downward: follow the cubic until its slope hits zero, then
        // plateau.
        let turn = (slope / (3.0 * -d)).sqrt();
        let v = m.min(turn);
        slope * v + d * v * v * v
    }
}
