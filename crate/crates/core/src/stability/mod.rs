//! Cross-lingual stability categories for the edges of a translated sentence.
//!
//! Every target edge lands in exactly one [`EdgeCategory`]. The checks run
//! in a fixed order and the first match wins:
//!
//! 1. either endpoint is a function word: [`EdgeCategory::FunctionWord`];
//! 2. either endpoint does not have exactly one aligned source token:
//!    [`EdgeCategory::Unaligned`];
//! 3. the aligned source tokens form an edge in the same direction:
//!    [`EdgeCategory::FullyAligned`] when the labels agree, otherwise
//!    [`EdgeCategory::PartiallyAligned`];
//! 4. they form an edge in the opposite direction: [`EdgeCategory::Flipped`];
//! 5. anything else is [`EdgeCategory::Misaligned`].
//!
//! The artificial root (id 0) of the target is treated as aligned to the
//! artificial root of the source, so root attachments are classified like
//! any other edge.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{DepLabel, Edge, FunctionWordConfig, LabelPolicy, Sentence};

mod alignment;

pub use alignment::{
    parse_pharaoh_line, read_alignment_json, read_pharaoh, write_pharaoh, AlignmentLink, IndexBase, SentenceAlignment,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error("alignment {src_sent_id} -> {tgt_sent_id} links source token {src_id} to target token {tgt_id}, outside the sentences")]
    LinkOutOfRange {
        src_sent_id: String,
        tgt_sent_id: String,
        src_id: usize,
        tgt_id: usize,
    },
    #[error("edge {head}->{dep} is not part of target sentence {sent_id}")]
    ForeignEdge { sent_id: String, head: usize, dep: usize },
    #[error("unmatched sentence ids: {}", .0.join(", "))]
    Unmatched(Vec<String>),
    #[error("duplicate sentence id `{0}`")]
    DuplicateSentId(String),
    #[error("classification is empty")]
    Empty,
    #[error("malformed alignment input: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeCategory {
    FullyAligned,
    PartiallyAligned,
    Unaligned,
    Misaligned,
    Flipped,
    FunctionWord,
}

impl EdgeCategory {
    pub const ALL: [EdgeCategory; 6] = [
        EdgeCategory::FullyAligned,
        EdgeCategory::PartiallyAligned,
        EdgeCategory::Unaligned,
        EdgeCategory::Misaligned,
        EdgeCategory::Flipped,
        EdgeCategory::FunctionWord,
    ];

    /// Row label for report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            EdgeCategory::FullyAligned => "Fully Aligned",
            EdgeCategory::PartiallyAligned => "Partially Aligned",
            EdgeCategory::Unaligned => "Unaligned",
            EdgeCategory::Misaligned => "Misaligned",
            EdgeCategory::Flipped => "Flipped",
            EdgeCategory::FunctionWord => "Function Word",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EdgeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EdgeCategory::FullyAligned => "FullyAligned",
            EdgeCategory::PartiallyAligned => "PartiallyAligned",
            EdgeCategory::Unaligned => "Unaligned",
            EdgeCategory::Misaligned => "Misaligned",
            EdgeCategory::Flipped => "Flipped",
            EdgeCategory::FunctionWord => "FunctionWord",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub function_words: FunctionWordConfig,
    pub labels: LabelPolicy,
}

/// Per-target-token view of an alignment.
struct AlignmentIndex {
    by_target: Vec<Vec<usize>>,
}

impl AlignmentIndex {
    fn new(align: &SentenceAlignment, src: &Sentence, tgt: &Sentence) -> Result<Self, StabilityError> {
        align.check_bounds(src, tgt)?;
        let mut by_target = vec![Vec::new(); tgt.len() + 1];
        for link in &align.links {
            by_target[link.tgt_id].push(link.src_id);
        }
        Ok(AlignmentIndex { by_target })
    }

    /// The unique source token aligned to `tgt_id`; root maps to root.
    fn single(&self, tgt_id: usize) -> Option<usize> {
        if tgt_id == 0 {
            return Some(0);
        }
        match self.by_target[tgt_id].as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }
}

fn classify_indexed(
    head: usize,
    dep: usize,
    label: &DepLabel,
    src: &Sentence,
    tgt: &Sentence,
    index: &AlignmentIndex,
    config: &ClassifyConfig,
) -> EdgeCategory {
    let function_word = |id: usize| tgt.token(id).is_some_and(|t| config.function_words.is_function_word(t));
    if function_word(head) || function_word(dep) {
        return EdgeCategory::FunctionWord;
    }
    let (Some(w1), Some(w2)) = (index.single(head), index.single(dep)) else {
        return EdgeCategory::Unaligned;
    };
    if src.has_edge(w1, w2) {
        let src_label = &src.token(w2).expect("aligned token in source").deprel;
        if config.labels.matches(src_label, label) {
            EdgeCategory::FullyAligned
        } else {
            EdgeCategory::PartiallyAligned
        }
    } else if src.has_edge(w2, w1) {
        EdgeCategory::Flipped
    } else {
        EdgeCategory::Misaligned
    }
}

/// Category of a single edge of `tgt`.
pub fn classify_edge(
    edge: Edge<'_>,
    src: &Sentence,
    tgt: &Sentence,
    align: &SentenceAlignment,
    config: &ClassifyConfig,
) -> Result<EdgeCategory, StabilityError> {
    if !tgt.has_edge(edge.head_id, edge.dep_id) {
        return Err(StabilityError::ForeignEdge {
            sent_id: tgt.sent_id().to_owned(),
            head: edge.head_id,
            dep: edge.dep_id,
        });
    }
    let index = AlignmentIndex::new(align, src, tgt)?;
    Ok(classify_indexed(
        edge.head_id,
        edge.dep_id,
        edge.label,
        src,
        tgt,
        &index,
        config,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedEdge {
    pub sent_id: String,
    pub dep_id: usize,
    pub head_id: usize,
    pub label: DepLabel,
    pub category: EdgeCategory,
}

/// Categories of every edge of one target sentence, indexed by `dep_id - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceClassification {
    pub sent_id: String,
    pub edges: Vec<ClassifiedEdge>,
}

impl SentenceClassification {
    pub fn category(&self, dep_id: usize) -> Option<EdgeCategory> {
        dep_id
            .checked_sub(1)
            .and_then(|i| self.edges.get(i))
            .map(|e| e.category)
    }
}

pub fn classify_sentence(
    src: &Sentence,
    tgt: &Sentence,
    align: &SentenceAlignment,
    config: &ClassifyConfig,
) -> Result<SentenceClassification, StabilityError> {
    let index = AlignmentIndex::new(align, src, tgt)?;
    let edges = tgt
        .edges()
        .map(|e| ClassifiedEdge {
            sent_id: tgt.sent_id().to_owned(),
            dep_id: e.dep_id,
            head_id: e.head_id,
            label: e.label.clone(),
            category: classify_indexed(e.head_id, e.dep_id, e.label, src, tgt, &index, config),
        })
        .collect();
    Ok(SentenceClassification {
        sent_id: tgt.sent_id().to_owned(),
        edges,
    })
}

/// Classification of a whole target treebank, in target order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classification {
    pub sentences: Vec<SentenceClassification>,
}

impl Classification {
    pub fn edges(&self) -> impl Iterator<Item = &ClassifiedEdge> + '_ {
        self.sentences.iter().flat_map(|s| s.edges.iter())
    }

    pub fn sentence(&self, sent_id: &str) -> Option<&SentenceClassification> {
        self.sentences.iter().find(|s| s.sent_id == sent_id)
    }

    pub fn by_sent_id(&self) -> HashMap<&str, &SentenceClassification> {
        self.sentences.iter().map(|s| (s.sent_id.as_str(), s)).collect()
    }

    /// One JSON object per edge, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for edge in self.edges() {
            out.push_str(&serde_json::to_string(edge).expect("edge record serializes"));
            out.push('\n');
        }
        out
    }
}

fn index_by_id(sentences: &[Sentence]) -> Result<HashMap<&str, &Sentence>, StabilityError> {
    let mut map = HashMap::with_capacity(sentences.len());
    for s in sentences {
        if map.insert(s.sent_id(), s).is_some() {
            return Err(StabilityError::DuplicateSentId(s.sent_id().to_owned()));
        }
    }
    Ok(map)
}

/// Classify every edge of `tgt`. Target sentences are paired with their
/// alignment record by `tgt_sent_id` and with the source sentence named in
/// that record; without a record the source with the same `sent_id` is used
/// and the alignment is taken to be empty.
pub fn classify_treebank(
    src: &[Sentence],
    tgt: &[Sentence],
    alignments: &[SentenceAlignment],
    config: &ClassifyConfig,
) -> Result<Classification, StabilityError> {
    let src_by_id = index_by_id(src)?;
    let tgt_by_id = index_by_id(tgt)?;
    let mut align_by_tgt: HashMap<&str, &SentenceAlignment> = HashMap::new();
    for a in alignments {
        if align_by_tgt.insert(a.tgt_sent_id.as_str(), a).is_some() {
            return Err(StabilityError::DuplicateSentId(a.tgt_sent_id.clone()));
        }
    }

    let mut orphans: Vec<String> = alignments
        .iter()
        .filter(|a| !tgt_by_id.contains_key(a.tgt_sent_id.as_str()))
        .map(|a| format!("alignment target {}", a.tgt_sent_id))
        .collect();
    let empty = SentenceAlignment::default();
    let mut jobs = Vec::with_capacity(tgt.len());
    for t in tgt {
        let align = align_by_tgt.get(t.sent_id()).copied();
        let src_id = align.map_or(t.sent_id(), |a| a.src_sent_id.as_str());
        match src_by_id.get(src_id) {
            Some(s) => jobs.push((*s, t, align.unwrap_or(&empty))),
            None => orphans.push(format!("target {} (source {src_id})", t.sent_id())),
        }
    }
    if !orphans.is_empty() {
        return Err(StabilityError::Unmatched(orphans));
    }

    let sentences = jobs
        .par_iter()
        .map(|(s, t, a)| classify_sentence(s, t, a, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Classification { sentences })
}

/// Edge counts per category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub counts: BTreeMap<EdgeCategory, usize>,
    pub total: usize,
}

impl CategoryDistribution {
    pub fn count(&self, category: EdgeCategory) -> usize {
        self.counts.get(&category).copied().unwrap_or(0)
    }

    pub fn percent(&self, category: EdgeCategory) -> f64 {
        100.0 * self.count(category) as f64 / self.total as f64
    }

    pub fn percentages(&self) -> BTreeMap<EdgeCategory, f64> {
        EdgeCategory::ALL.iter().map(|&c| (c, self.percent(c))).collect()
    }
}

pub fn category_distribution(classification: &Classification) -> Result<CategoryDistribution, StabilityError> {
    let mut counts: BTreeMap<EdgeCategory, usize> = EdgeCategory::ALL.iter().map(|&c| (c, 0)).collect();
    let mut total = 0;
    for edge in classification.edges() {
        *counts.entry(edge.category).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(StabilityError::Empty);
    }
    Ok(CategoryDistribution { counts, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> Sentence {
        Sentence::from_rows("s1", &[("Japanese", "ADJ", 2, "amod"), ("company", "NOUN", 0, "root")]).unwrap()
    }

    fn ar() -> Sentence {
        Sentence::from_rows("s1", &[("sharikat", "NOUN", 0, "root"), ("yabania", "ADJ", 1, "amod")]).unwrap()
    }

    fn ja() -> Sentence {
        Sentence::from_rows(
            "s1",
            &[
                ("Nihon", "PROPN", 3, "nmod"),
                ("no", "ADP", 1, "case"),
                ("kaisha", "NOUN", 0, "root"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn arabic_amod_is_fully_aligned() {
        let align = SentenceAlignment::new("s1", "s1", [(1, 2), (2, 1)]);
        let tgt = ar();
        let amod = tgt.edges().find(|e| e.label.is("amod")).unwrap();
        let cfg = ClassifyConfig::default();
        assert_eq!(
            classify_edge(amod, &en(), &tgt, &align, &cfg).unwrap(),
            EdgeCategory::FullyAligned
        );
        let root = tgt.edges().find(|e| e.head_id == 0).unwrap();
        assert_eq!(
            classify_edge(root, &en(), &tgt, &align, &cfg).unwrap(),
            EdgeCategory::FullyAligned
        );
    }

    #[test]
    fn japanese_nmod_is_partially_aligned() {
        let align = SentenceAlignment::new("s1", "s1", [(1, 1), (2, 3)]);
        let c = classify_sentence(&en(), &ja(), &align, &ClassifyConfig::default()).unwrap();
        assert_eq!(c.category(1), Some(EdgeCategory::PartiallyAligned));
        assert_eq!(c.category(2), Some(EdgeCategory::FunctionWord));
        assert_eq!(c.category(3), Some(EdgeCategory::FullyAligned));
    }

    #[test]
    fn flipped_unaligned_misaligned() {
        // source: 1 <- 2 (root); target: 1 (root) -> 2, aligned crosswise = flipped
        let src = Sentence::from_rows("s", &[("a", "NOUN", 2, "nmod"), ("b", "NOUN", 0, "root")]).unwrap();
        let tgt = Sentence::from_rows("s", &[("a", "NOUN", 0, "root"), ("b", "NOUN", 1, "nmod")]).unwrap();
        let cfg = ClassifyConfig::default();
        let straight = SentenceAlignment::new("s", "s", [(1, 1), (2, 2)]);
        let c = classify_sentence(&src, &tgt, &straight, &cfg).unwrap();
        assert_eq!(c.category(2), Some(EdgeCategory::Flipped));
        // root edge: target root 1 aligned to source 1 which is not the source root
        assert_eq!(c.category(1), Some(EdgeCategory::Misaligned));

        let many = SentenceAlignment::new("s", "s", [(1, 1), (2, 1), (2, 2)]);
        let c = classify_sentence(&src, &tgt, &many, &cfg).unwrap();
        assert_eq!(c.category(2), Some(EdgeCategory::Unaligned));

        let none = SentenceAlignment::new("s", "s", []);
        let c = classify_sentence(&src, &tgt, &none, &cfg).unwrap();
        assert_eq!(c.category(2), Some(EdgeCategory::Unaligned));
        assert_eq!(c.category(1), Some(EdgeCategory::Unaligned));
    }

    #[test]
    fn punctuation_dominates() {
        let src = Sentence::from_rows("s", &[("a", "NOUN", 0, "root"), (".", "PUNCT", 1, "punct")]).unwrap();
        let align = SentenceAlignment::new("s", "s", [(1, 1), (2, 2)]);
        let c = classify_sentence(&src, &src, &align, &ClassifyConfig::default()).unwrap();
        assert_eq!(c.category(2), Some(EdgeCategory::FunctionWord));
    }

    #[test]
    fn subtype_policy() {
        let src = Sentence::from_rows("s", &[("a", "NOUN", 2, "nmod:poss"), ("b", "NOUN", 0, "root")]).unwrap();
        let tgt = Sentence::from_rows("s", &[("a", "NOUN", 2, "nmod"), ("b", "NOUN", 0, "root")]).unwrap();
        let align = SentenceAlignment::new("s", "s", [(1, 1), (2, 2)]);
        let mut cfg = ClassifyConfig::default();
        assert_eq!(
            classify_sentence(&src, &tgt, &align, &cfg).unwrap().category(1),
            Some(EdgeCategory::FullyAligned)
        );
        cfg.labels = LabelPolicy::Exact;
        assert_eq!(
            classify_sentence(&src, &tgt, &align, &cfg).unwrap().category(1),
            Some(EdgeCategory::PartiallyAligned)
        );
    }

    #[test]
    fn out_of_range_link_is_error() {
        let align = SentenceAlignment::new("s1", "s1", [(1, 3)]);
        let e = classify_sentence(&en(), &ar(), &align, &ClassifyConfig::default()).unwrap_err();
        assert!(matches!(e, StabilityError::LinkOutOfRange { tgt_id: 3, .. }));
        assert!(e.to_string().contains("s1 -> s1"));
    }

    #[test]
    fn foreign_edge_is_error() {
        let align = SentenceAlignment::new("s1", "s1", []);
        let label = DepLabel::plain("amod");
        let edge = Edge {
            head_id: 2,
            dep_id: 1,
            label: &label,
        };
        assert!(matches!(
            classify_edge(edge, &en(), &ar(), &align, &ClassifyConfig::default()),
            Err(StabilityError::ForeignEdge { .. })
        ));
    }

    #[test]
    fn treebank_pairing_and_orphans() {
        let src = vec![en()];
        let tgt = vec![ar()];
        let c = classify_treebank(&src, &tgt, &[], &ClassifyConfig::default()).unwrap();
        assert!(c
            .edges()
            .all(|e| e.category == EdgeCategory::Unaligned || e.head_id == 0));

        let orphan = Sentence::from_rows("zz", &[("x", "NOUN", 0, "root")]).unwrap();
        let e = classify_treebank(&src, &[ar(), orphan], &[], &ClassifyConfig::default()).unwrap_err();
        assert!(matches!(&e, StabilityError::Unmatched(o) if o.len() == 1 && o[0].contains("zz")));

        let stray = SentenceAlignment::new("s1", "nope", []);
        assert!(classify_treebank(&src, &tgt, &[stray], &ClassifyConfig::default()).is_err());
    }

    #[test]
    fn distribution_and_jsonl() {
        let align = SentenceAlignment::new("s1", "s1", [(1, 1), (2, 3)]);
        let c = classify_treebank(&[en()], &[ja()], &[align], &ClassifyConfig::default()).unwrap();
        let d = category_distribution(&c).unwrap();
        assert_eq!(d.total, 3);
        assert_eq!(d.count(EdgeCategory::FullyAligned), 1);
        assert!((d.percentages().values().sum::<f64>() - 100.0).abs() < 1e-9);
        let jsonl = c.to_jsonl();
        assert_eq!(jsonl.lines().count(), 3);
        assert!(jsonl
            .starts_with(r#"{"sent_id":"s1","dep_id":1,"head_id":3,"label":"nmod","category":"PartiallyAligned"}"#));
        assert_eq!(
            category_distribution(&Classification::default()),
            Err(StabilityError::Empty)
        );
    }
}
