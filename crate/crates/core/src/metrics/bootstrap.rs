//! Paired bootstrap resampling over evaluation units.
//!
//! Resample `i` draws from its own ChaCha8 stream: the generator is keyed by
//! the seed and `set_stream(i)` selects the stream, so resamples can run in
//! any order or in parallel and still reproduce exactly. Units are sorted
//! into a canonical order first, which makes the result independent of the
//! order in which they were supplied.

use std::fmt;
use std::ops::AddAssign;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AttachmentCounts, ExtractionCounts, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapMetric {
    Uas,
    Las,
    Precision,
    Recall,
    F1,
}

impl fmt::Display for BootstrapMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BootstrapMetric::Uas => "uas",
            BootstrapMetric::Las => "las",
            BootstrapMetric::Precision => "precision",
            BootstrapMetric::Recall => "recall",
            BootstrapMetric::F1 => "f1",
        })
    }
}

/// Sufficient statistics of one evaluation unit. Corpus-level metrics are
/// computed from the sum over units.
pub trait UnitStats: Copy + Default + Ord + AddAssign + Send + Sync {
    fn supports(metric: BootstrapMetric) -> bool;

    /// Value of `metric` on these (summed) counts; 0 when undefined.
    fn score(&self, metric: BootstrapMetric) -> f64;
}

impl UnitStats for AttachmentCounts {
    fn supports(metric: BootstrapMetric) -> bool {
        matches!(metric, BootstrapMetric::Uas | BootstrapMetric::Las)
    }

    fn score(&self, metric: BootstrapMetric) -> f64 {
        match metric {
            BootstrapMetric::Uas => self.uas().unwrap_or(0.0),
            BootstrapMetric::Las => self.las().unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

impl UnitStats for ExtractionCounts {
    fn supports(metric: BootstrapMetric) -> bool {
        matches!(
            metric,
            BootstrapMetric::Precision | BootstrapMetric::Recall | BootstrapMetric::F1
        )
    }

    fn score(&self, metric: BootstrapMetric) -> f64 {
        match metric {
            BootstrapMetric::Precision => self.precision(),
            BootstrapMetric::Recall => self.recall(),
            BootstrapMetric::F1 => self.f1(),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// System B is better than system A.
    #[default]
    Greater,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
    pub alternative: Alternative,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 10_000,
            seed: 0,
            alternative: Alternative::Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub metric: BootstrapMetric,
    pub alternative: Alternative,
    pub p_value: f64,
    pub n_resamples: usize,
    pub n_units: usize,
    pub seed: u64,
    pub score_a: f64,
    pub score_b: f64,
    /// `score_b - score_a` on the full unit list.
    pub observed_delta: f64,
}

const TIE_EPSILON: f64 = 1e-12;

/// Paired bootstrap test of system B against system A.
///
/// For the one-sided test the p-value is the share of resamples in which B
/// does not beat A, with exact ties counted as half a resample each, so two
/// identical systems get p = 0.5. The two-sided p-value doubles the smaller
/// tail, capped at 1.
pub fn paired_bootstrap<T: UnitStats>(
    a: &[T],
    b: &[T],
    metric: BootstrapMetric,
    config: BootstrapConfig,
) -> Result<BootstrapResult, MetricsError> {
    if !T::supports(metric) {
        return Err(MetricsError::UnsupportedMetric(metric));
    }
    if a.len() != b.len() {
        return Err(MetricsError::UnpairedUnits(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::NoUnits);
    }
    if config.n_resamples == 0 {
        return Err(MetricsError::NoResamples);
    }

    let mut units: Vec<(T, T)> = a.iter().copied().zip(b.iter().copied()).collect();
    units.sort_unstable();
    let n = units.len();

    let total = |pick: &mut dyn FnMut() -> usize| {
        let (mut sa, mut sb) = (T::default(), T::default());
        for _ in 0..n {
            let (ua, ub) = units[pick()];
            sa += ua;
            sb += ub;
        }
        sb.score(metric) - sa.score(metric)
    };

    let mut next = 0;
    let observed_delta = total(&mut || {
        next += 1;
        next - 1
    });
    let (sum_a, sum_b) = units
        .iter()
        .fold((T::default(), T::default()), |(mut sa, mut sb), (ua, ub)| {
            sa += *ua;
            sb += *ub;
            (sa, sb)
        });

    // (resamples with delta < 0, resamples with delta == 0)
    let (below, ties) = (0..config.n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let delta = total(&mut || rng.random_range(0..n));
            if delta.abs() <= TIE_EPSILON {
                (0u64, 1u64)
            } else if delta < 0.0 {
                (1, 0)
            } else {
                (0, 0)
            }
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    let resamples = config.n_resamples as f64;
    let above = config.n_resamples as u64 - below - ties;
    let lower_tail = (below as f64 + 0.5 * ties as f64) / resamples;
    let upper_tail = (above as f64 + 0.5 * ties as f64) / resamples;
    let p_value = match config.alternative {
        Alternative::Greater => lower_tail,
        Alternative::TwoSided => (2.0 * lower_tail.min(upper_tail)).min(1.0),
    };

    Ok(BootstrapResult {
        metric,
        alternative: config.alternative,
        p_value,
        n_resamples: config.n_resamples,
        n_units: n,
        seed: config.seed,
        score_a: sum_a.score(metric),
        score_b: sum_b.score(metric),
        observed_delta,
    })
}
