//! Attachment scores, per-category breakdowns and significance testing.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{LabelPolicy, Sentence, Token};
use crate::stability::{Classification, EdgeCategory};

mod bootstrap;

pub use bootstrap::{paired_bootstrap, Alternative, BootstrapConfig, BootstrapMetric, BootstrapResult, UnitStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("sentence {sent_id}: {reason}")]
    TokenMismatch { sent_id: String, reason: String },
    #[error("gold and predicted treebanks differ in length ({gold} vs {predicted})")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("no stability category for edge {dep_id} of sentence {sent_id}")]
    MissingCategory { sent_id: String, dep_id: usize },
    #[error("nothing to aggregate")]
    NoRuns,
    #[error("bootstrap needs at least one unit")]
    NoUnits,
    #[error("paired outcome lists differ in length ({0} vs {1})")]
    UnpairedUnits(usize, usize),
    #[error("metric {0} is not defined for these outcomes")]
    UnsupportedMetric(BootstrapMetric),
    #[error("bootstrap needs at least one resample")]
    NoResamples,
}

/// A gold tree and a parser's prediction over the same tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPair {
    gold: Sentence,
    predicted: Sentence,
}

impl ParsedPair {
    pub fn new(gold: Sentence, predicted: Sentence) -> Result<Self, MetricsError> {
        let mismatch = |reason: String| MetricsError::TokenMismatch {
            sent_id: gold.sent_id().to_owned(),
            reason,
        };
        if gold.len() != predicted.len() {
            return Err(mismatch(format!(
                "{} gold tokens vs {} predicted",
                gold.len(),
                predicted.len()
            )));
        }
        if let Some((g, p)) = gold
            .tokens()
            .iter()
            .zip(predicted.tokens())
            .find(|(g, p)| g.form != p.form)
        {
            return Err(mismatch(format!(
                "token {} is `{}` in gold but `{}` in prediction",
                g.id, g.form, p.form
            )));
        }
        Ok(ParsedPair { gold, predicted })
    }

    pub fn gold(&self) -> &Sentence {
        &self.gold
    }

    pub fn predicted(&self) -> &Sentence {
        &self.predicted
    }
}

/// Pair two treebanks sentence by sentence, in order.
pub fn pair_treebanks(gold: &[Sentence], predicted: &[Sentence]) -> Result<Vec<ParsedPair>, MetricsError> {
    if gold.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    gold.iter()
        .zip(predicted)
        .map(|(g, p)| ParsedPair::new(g.clone(), p.clone()))
        .collect()
}

/// Attachment counts over a set of edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttachmentCounts {
    pub total: u64,
    pub head_correct: u64,
    pub label_correct: u64,
}

impl AttachmentCounts {
    pub fn uas(&self) -> Option<f64> {
        (self.total > 0).then(|| self.head_correct as f64 / self.total as f64)
    }

    pub fn las(&self) -> Option<f64> {
        (self.total > 0).then(|| self.label_correct as f64 / self.total as f64)
    }

    fn record(&mut self, gold: &Token, predicted: &Token, policy: LabelPolicy) {
        self.total += 1;
        if gold.head == predicted.head {
            self.head_correct += 1;
            if policy.matches(&gold.deprel, &predicted.deprel) {
                self.label_correct += 1;
            }
        }
    }
}

impl Add for AttachmentCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        AttachmentCounts {
            total: self.total + rhs.total,
            head_correct: self.head_correct + rhs.head_correct,
            label_correct: self.label_correct + rhs.label_correct,
        }
    }
}

impl AddAssign for AttachmentCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Restricts scoring to some tokens: `(gold sentence, gold token) -> keep`.
pub type EdgeFilter<'a> = &'a (dyn Fn(&Sentence, &Token) -> bool + Sync);

/// Excludes tokens whose gold UPOS is `PUNCT`.
pub fn without_punctuation(_: &Sentence, token: &Token) -> bool {
    token.upos != "PUNCT"
}

/// Counts for one sentence pair; one unit of the paired bootstrap.
pub fn sentence_counts(pair: &ParsedPair, filter: Option<EdgeFilter<'_>>, policy: LabelPolicy) -> AttachmentCounts {
    let mut counts = AttachmentCounts::default();
    for (g, p) in pair.gold.tokens().iter().zip(pair.predicted.tokens()) {
        if filter.is_none_or(|f| f(&pair.gold, g)) {
            counts.record(g, p, policy);
        }
    }
    counts
}

/// UAS/LAS over every (filtered) token, root attachments included.
pub fn attachment_scores(
    pairs: &[ParsedPair],
    filter: Option<EdgeFilter<'_>>,
    policy: LabelPolicy,
) -> AttachmentCounts {
    pairs
        .iter()
        .map(|p| sentence_counts(p, filter, policy))
        .fold(AttachmentCounts::default(), Add::add)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub per_category: BTreeMap<EdgeCategory, AttachmentCounts>,
}

impl CategoryScores {
    pub fn get(&self, category: EdgeCategory) -> AttachmentCounts {
        self.per_category.get(&category).copied().unwrap_or_default()
    }

    pub fn total(&self) -> AttachmentCounts {
        self.per_category
            .values()
            .copied()
            .fold(AttachmentCounts::default(), Add::add)
    }
}

/// Attachment scores restricted to each stability category. The
/// classification must cover every gold edge (matched by `sent_id` and
/// dependent id).
pub fn per_category_scores(
    pairs: &[ParsedPair],
    classification: &Classification,
    filter: Option<EdgeFilter<'_>>,
    policy: LabelPolicy,
) -> Result<CategoryScores, MetricsError> {
    let by_id = classification.by_sent_id();
    let mut per_category: BTreeMap<EdgeCategory, AttachmentCounts> = EdgeCategory::ALL
        .iter()
        .map(|&c| (c, AttachmentCounts::default()))
        .collect();
    for pair in pairs {
        let sent_id = pair.gold.sent_id();
        let classes = by_id.get(sent_id);
        for (g, p) in pair.gold.tokens().iter().zip(pair.predicted.tokens()) {
            if filter.is_some_and(|f| !f(&pair.gold, g)) {
                continue;
            }
            let category = classes
                .and_then(|c| c.category(g.id))
                .ok_or_else(|| MetricsError::MissingCategory {
                    sent_id: sent_id.to_owned(),
                    dep_id: g.id,
                })?;
            per_category.entry(category).or_default().record(g, p, policy);
        }
    }
    Ok(CategoryScores { per_category })
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        // Shifted by the first value so that constant inputs give exactly 0.
        let n = values.len() as f64;
        let shift = values[0];
        let mean_d = values.iter().map(|v| v - shift).sum::<f64>() / n;
        let var = values.iter().map(|v| (v - shift - mean_d).powi(2)).sum::<f64>() / n;
        Some(MeanStd {
            mean: shift + mean_d,
            std: var.sqrt(),
            n: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAggregate {
    /// `None` when the category has no edges in any run.
    pub uas: Option<MeanStd>,
    pub las: Option<MeanStd>,
    /// Mean edge count across runs.
    pub n_edges: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScores {
    pub runs: usize,
    pub per_category: BTreeMap<EdgeCategory, CategoryAggregate>,
}

/// Mean and population standard deviation of every (category, metric) cell
/// across runs. Runs in which a category is empty do not contribute to it.
pub fn aggregate_runs(runs: &[CategoryScores]) -> Result<AggregateScores, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::NoRuns);
    }
    let per_category = EdgeCategory::ALL
        .iter()
        .map(|&c| {
            let counts: Vec<AttachmentCounts> = runs.iter().map(|r| r.get(c)).collect();
            let uas: Vec<f64> = counts.iter().filter_map(AttachmentCounts::uas).collect();
            let las: Vec<f64> = counts.iter().filter_map(AttachmentCounts::las).collect();
            let n_edges = counts.iter().map(|k| k.total as f64).sum::<f64>() / runs.len() as f64;
            (
                c,
                CategoryAggregate {
                    uas: MeanStd::of(&uas),
                    las: MeanStd::of(&las),
                    n_edges,
                },
            )
        })
        .collect();
    Ok(AggregateScores {
        runs: runs.len(),
        per_category,
    })
}

/// Precision/recall counts for relation extraction, treating `no_relation`
/// as the negative class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExtractionCounts {
    pub predicted_positive: u64,
    pub gold_positive: u64,
    pub correct: u64,
}

impl ExtractionCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.predicted_positive)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold_positive)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Add for ExtractionCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        ExtractionCounts {
            predicted_positive: self.predicted_positive + rhs.predicted_positive,
            gold_positive: self.gold_positive + rhs.gold_positive,
            correct: self.correct + rhs.correct,
        }
    }
}

impl AddAssign for ExtractionCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
