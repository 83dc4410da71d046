//! Label-only rewrites of UD trees. Heads and token fields are never
//! touched; every relabeled edge loses its subtype.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{DepLabel, Sentence};

mod sidecar;

pub use sidecar::{read_process_sidecar, read_snacs_sidecar, ProcessRecord, SnacsRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("sentence {sent_id}: annotated token {id} is outside the sentence")]
    OutOfBounds { sent_id: String, id: usize },
    #[error("adverbial tag set is empty")]
    EmptyTagSet,
    #[error("unknown transformation `{0}` (expected nominal, predicate or oblique)")]
    UnknownKind(String),
    #[error("malformed sidecar line {line}: {message}")]
    Sidecar { line: usize, message: String },
    #[error("duplicate sidecar record for sentence {0}")]
    DuplicateRecord(String),
}

/// The label introduced for undifferentiated clause participants.
pub const PARTICIPANT: &str = "A";

const NOMINAL_SOURCES: [&str; 3] = ["compound", "nmod", "amod"];
const HARMONIZED: [&str; 4] = ["nsubj", "obj", "iobj", "obl"];

fn process_incoming(universal: &str) -> Option<&'static str> {
    Some(match universal {
        "nsubj" => "csubj",
        "nmod" | "compound" => "acl",
        "obj" | "iobj" => "ccomp",
        "obl" => "advcl",
        _ => return None,
    })
}

fn process_dependent(universal: &str) -> Option<&'static str> {
    Some(match universal {
        "amod" => "advmod",
        "acl" => "advcl",
        "nmod" | "compound" => PARTICIPANT,
        _ => return None,
    })
}

/// Relabel counts and fallbacks collected while transforming.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformReport {
    pub sentences: usize,
    /// `"from->to"` (prefixed by the phase for the predicate rewrite) to count.
    pub relabeled: BTreeMap<String, usize>,
    /// Sentences that had no sidecar record and used empty annotations.
    pub missing_annotation: usize,
    /// Obliques with no recoverable supersense, sent to `iobj`.
    pub missing_supersense: usize,
}

impl TransformReport {
    fn note(&mut self, rule: String) {
        *self.relabeled.entry(rule).or_default() += 1;
    }

    fn merge(mut self, other: TransformReport) -> TransformReport {
        self.sentences += other.sentences;
        self.missing_annotation += other.missing_annotation;
        self.missing_supersense += other.missing_supersense;
        for (k, v) in other.relabeled {
            *self.relabeled.entry(k).or_default() += v;
        }
        self
    }

    pub fn total_relabeled(&self) -> usize {
        self.relabeled.values().sum()
    }
}

fn nominal(sentence: &Sentence, report: &mut TransformReport) -> Sentence {
    sentence.relabeled(|tok| {
        let u = tok.deprel.universal();
        if NOMINAL_SOURCES.contains(&u) {
            report.note(format!("{u}->acl"));
            DepLabel::plain("acl")
        } else {
            tok.deprel.clone()
        }
    })
}

/// Collapse `compound`, `nmod` and `amod` into `acl`.
pub fn transform_nominal(sentence: &Sentence) -> Sentence {
    nominal(sentence, &mut TransformReport::default())
}

/// Where the participant harmonization of the predicate rewrite applies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Harmonization {
    /// Every sentence.
    #[default]
    Global,
    /// Only sentences with at least one process head.
    ProcessSentencesOnly,
}

fn check_ids<'a>(sentence: &Sentence, ids: impl IntoIterator<Item = &'a usize>) -> Result<(), TransformError> {
    for &id in ids {
        if sentence.token(id).is_none() {
            return Err(TransformError::OutOfBounds {
                sent_id: sentence.sent_id().to_owned(),
                id,
            });
        }
    }
    Ok(())
}

fn predicate(
    sentence: &Sentence,
    process_heads: &BTreeSet<usize>,
    harmonization: Harmonization,
    report: &mut TransformReport,
) -> Result<Sentence, TransformError> {
    check_ids(sentence, process_heads)?;
    let mut labels: Vec<DepLabel> = sentence.tokens().iter().map(|t| t.deprel.clone()).collect();
    let mut touched = vec![false; labels.len()];

    // Incoming edge of each process head.
    for &h in process_heads {
        let i = h - 1;
        if let Some(to) = process_incoming(labels[i].universal()) {
            report.note(format!("incoming:{}->{to}", labels[i].universal()));
            labels[i] = DepLabel::plain(to);
            touched[i] = true;
        }
    }
    // Dependents of process heads, seeing the labels produced above.
    for (i, tok) in sentence.tokens().iter().enumerate() {
        if process_heads.contains(&tok.head) {
            if let Some(to) = process_dependent(labels[i].universal()) {
                report.note(format!("dependent:{}->{to}", labels[i].universal()));
                labels[i] = DepLabel::plain(to);
                touched[i] = true;
            }
        }
    }
    // Participant harmonization over everything not yet rewritten.
    if harmonization == Harmonization::Global || !process_heads.is_empty() {
        for (label, done) in labels.iter_mut().zip(&touched) {
            let u = label.universal();
            if !done && HARMONIZED.contains(&u) {
                report.note(format!("harmonize:{u}->{PARTICIPANT}"));
                *label = DepLabel::plain(PARTICIPANT);
            }
        }
    }

    let mut labels = labels.into_iter();
    Ok(sentence.relabeled(|_| labels.next().expect("one label per token")))
}

/// Rewrite nominal subtrees headed by process-evoking tokens into clauses,
/// then fold core and oblique participants into `A`.
///
/// Incoming edge of a process head: `nsubj`→`csubj`, `nmod`/`compound`→`acl`,
/// `obj`/`iobj`→`ccomp`, `obl`→`advcl`. Dependents of a process head:
/// `amod`→`advmod`, `acl`→`advcl`, `nmod`/`compound`→`A`. Finally every
/// edge not rewritten so far that is `nsubj`, `obj`, `iobj` or `obl` becomes `A`.
pub fn transform_predicate(
    sentence: &Sentence,
    process_heads: &BTreeSet<usize>,
    harmonization: Harmonization,
) -> Result<Sentence, TransformError> {
    predicate(sentence, process_heads, harmonization, &mut TransformReport::default())
}

/// SNACS supersenses whose obliques become `advmod`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdverbialTagSet(BTreeSet<String>);

impl Default for AdverbialTagSet {
    fn default() -> Self {
        AdverbialTagSet(
            [
                "Locus",
                "Time",
                "EndTime",
                "Goal",
                "Source",
                "Purpose",
                "Duration",
                "Circumstance",
                "ComparisonRef",
                "Manner",
                "Extent",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        )
    }
}

impl AdverbialTagSet {
    pub fn new<I, S>(tags: I) -> Result<Self, TransformError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = tags.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(TransformError::EmptyTagSet);
        }
        Ok(AdverbialTagSet(set))
    }

    /// Accepts bare (`Locus`) and prefixed (`p.Locus`) supersense names.
    pub fn contains(&self, supersense: &str) -> bool {
        let bare = supersense.strip_prefix("p.").unwrap_or(supersense);
        self.0.contains(bare)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }
}

fn oblique(
    sentence: &Sentence,
    supersenses: &BTreeMap<usize, String>,
    adverbial: &AdverbialTagSet,
    report: &mut TransformReport,
) -> Result<Sentence, TransformError> {
    check_ids(sentence, supersenses.keys())?;
    let mut missing = 0;
    let out = sentence.relabeled(|tok| {
        if !tok.deprel.is("obl") {
            return tok.deprel.clone();
        }
        let case_tag = sentence
            .dependents(tok.id)
            .find(|d| d.deprel.is("case"))
            .and_then(|c| supersenses.get(&c.id));
        let to = match case_tag.or_else(|| supersenses.get(&tok.id)) {
            Some(tag) if adverbial.contains(tag) => "advmod",
            Some(_) => "iobj",
            None => {
                missing += 1;
                "iobj"
            }
        };
        report.note(format!("obl->{to}"));
        DepLabel::plain(to)
    });
    report.missing_supersense += missing;
    Ok(out)
}

/// Split `obl` into `advmod` and `iobj` by the supersense of the oblique's
/// case marker (its leftmost `case` dependent), falling back to the
/// supersense of the oblique itself. Untagged obliques become `iobj`.
pub fn transform_oblique(
    sentence: &Sentence,
    supersenses: &BTreeMap<usize, String>,
    adverbial: &AdverbialTagSet,
) -> Result<Sentence, TransformError> {
    oblique(sentence, supersenses, adverbial, &mut TransformReport::default())
}

/// Process-evoking heads per sentence.
pub type ProcessAnnotation = BTreeMap<String, BTreeSet<usize>>;

/// Supersense per token per sentence.
pub type SnacsAnnotation = BTreeMap<String, BTreeMap<usize, String>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Nominal,
    Predicate,
    Oblique,
}

impl FromStr for TransformKind {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nominal" => Ok(TransformKind::Nominal),
            "predicate" => Ok(TransformKind::Predicate),
            "oblique" => Ok(TransformKind::Oblique),
            other => Err(TransformError::UnknownKind(other.to_owned())),
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Nominal => "nominal",
            TransformKind::Predicate => "predicate",
            TransformKind::Oblique => "oblique",
        })
    }
}

/// A transformation together with the annotations it consumes.
#[derive(Debug, Clone, Copy)]
pub enum Transform<'a> {
    Nominal,
    Predicate {
        processes: &'a ProcessAnnotation,
        harmonization: Harmonization,
    },
    Oblique {
        supersenses: &'a SnacsAnnotation,
        adverbial: &'a AdverbialTagSet,
    },
}

impl Transform<'_> {
    pub fn kind(&self) -> TransformKind {
        match self {
            Transform::Nominal => TransformKind::Nominal,
            Transform::Predicate { .. } => TransformKind::Predicate,
            Transform::Oblique { .. } => TransformKind::Oblique,
        }
    }

    fn apply(&self, sentence: &Sentence, report: &mut TransformReport) -> Result<Sentence, TransformError> {
        report.sentences += 1;
        match *self {
            Transform::Nominal => Ok(nominal(sentence, report)),
            Transform::Predicate {
                processes,
                harmonization,
            } => {
                let empty = BTreeSet::new();
                let heads = processes.get(sentence.sent_id()).unwrap_or_else(|| {
                    report.missing_annotation += 1;
                    &empty
                });
                predicate(sentence, heads, harmonization, report)
            }
            Transform::Oblique { supersenses, adverbial } => {
                let empty = BTreeMap::new();
                let tags = supersenses.get(sentence.sent_id()).unwrap_or_else(|| {
                    report.missing_annotation += 1;
                    &empty
                });
                oblique(sentence, tags, adverbial, report)
            }
        }
    }
}

/// Apply `transform` to every sentence. Sentences without a sidecar record
/// are transformed with empty annotations and counted in the report.
pub fn transform_treebank(
    sentences: &[Sentence],
    transform: Transform<'_>,
) -> Result<(Vec<Sentence>, TransformReport), TransformError> {
    let results: Vec<(Sentence, TransformReport)> = sentences
        .par_iter()
        .map(|s| {
            let mut report = TransformReport::default();
            transform.apply(s, &mut report).map(|out| (out, report))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(results.len());
    let mut report = TransformReport::default();
    for (s, r) in results {
        out.push(s);
        report = report.merge(r);
    }
    Ok((out, report))
}
