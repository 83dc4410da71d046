//! Pattern-based relation extraction over dependency parses.
//!
//! A pattern is the shortest tree path between the two mentions, anchored
//! at a trigger word when the sentence contains one. Training counts how
//! often each pattern carries each relation; decoding takes a majority vote
//! over the counts of the matched patterns.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::shortest_path;
use crate::metrics::{
    paired_bootstrap, BootstrapConfig, BootstrapMetric, BootstrapResult, ExtractionCounts, MetricsError,
};

mod instance;
mod lexicon;
mod pattern;

pub use instance::{read_instances, write_instances, InstanceRecord, RelationInstance, Span};
pub use lexicon::TriggerLexicon;
pub use pattern::{steps_of, Pattern, PatternError, PatternStep, TriggerAnchor};

pub const NO_RELATION: &str = "no_relation";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReError {
    #[error("instance {id}: {reason}")]
    Instance { id: String, reason: String },
    #[error("instance {0} has no parse")]
    MissingParse(String),
    #[error("duplicate instance id {0}")]
    DuplicateId(String),
    #[error("instance {0} has no gold relation")]
    MissingGold(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("trigger lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("invalid dictionary: {0}")]
    Dictionary(String),
    #[error("predictions and gold labels cover different ids (first difference: {0})")]
    IdMismatch(String),
    #[error("parse variants disagree: {0}")]
    VariantMismatch(String),
    #[error("{0}")]
    Setting(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Options shared by training and decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReConfig {
    /// Count `no_relation` training instances as negative evidence.
    pub negatives: bool,
    /// Besides the trigger-anchored pattern, also use the trigger-free one.
    pub also_untriggered: bool,
}

impl Default for ReConfig {
    fn default() -> Self {
        ReConfig {
            negatives: true,
            also_untriggered: false,
        }
    }
}

/// Lexicon matches outside both mentions, in token order.
pub fn find_triggers(instance: &RelationInstance, lexicon: &TriggerLexicon) -> Vec<(usize, String)> {
    let (subj, obj) = (instance.subj_span(), instance.obj_span());
    instance
        .parse()
        .tokens()
        .iter()
        .filter(|t| !subj.contains(t.id) && !obj.contains(t.id))
        .flat_map(|t| lexicon.matches(t).map(move |ty| (t.id, ty.to_owned())))
        .collect()
}

/// Shortest path between the two mentions with no trigger anchor.
pub fn untriggered_pattern(instance: &RelationInstance) -> Option<Pattern> {
    let path = shortest_path(
        instance.parse(),
        &instance.subj_span().ids(),
        &instance.obj_span().ids(),
    )?;
    Pattern::new(instance.subj_type(), steps_of(&path), None, instance.obj_type()).ok()
}

/// The instance's pattern: through the trigger that minimizes the total
/// path length (ties go to the leftmost trigger, then to the smaller pattern
/// string), or the direct path when there is no trigger.
pub fn extract_pattern(instance: &RelationInstance, lexicon: &TriggerLexicon) -> Option<Pattern> {
    let subj = instance.subj_span().ids();
    let obj = instance.obj_span().ids();
    let mut best: Option<(usize, usize, String, Pattern)> = None;
    for (tid, ty) in find_triggers(instance, lexicon) {
        let (Some(p1), Some(p2)) = (
            shortest_path(instance.parse(), &subj, &[tid]),
            shortest_path(instance.parse(), &[tid], &obj),
        ) else {
            continue;
        };
        let anchor = TriggerAnchor {
            trigger_type: ty,
            steps: steps_of(&p2),
        };
        let Ok(pattern) = Pattern::new(instance.subj_type(), steps_of(&p1), Some(anchor), instance.obj_type()) else {
            continue;
        };
        let key = (pattern.hops(), tid, pattern.to_string());
        if best.as_ref().is_none_or(|(h, t, s, _)| key < (*h, *t, s.clone())) {
            best = Some((key.0, key.1, key.2, pattern));
        }
    }
    match best {
        Some((.., p)) => Some(p),
        None => untriggered_pattern(instance),
    }
}

/// Patterns used for one instance under `config`, deduplicated.
pub fn instance_patterns(instance: &RelationInstance, lexicon: &TriggerLexicon, config: ReConfig) -> Vec<Pattern> {
    let mut out: Vec<Pattern> = extract_pattern(instance, lexicon).into_iter().collect();
    if config.also_untriggered {
        if let Some(p) = untriggered_pattern(instance) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Pattern → relation → count, tagged with the annotation scheme of the
/// training parses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DictionaryFile", into = "DictionaryFile")]
pub struct PatternDictionary {
    scheme: String,
    patterns: BTreeMap<String, BTreeMap<String, u64>>,
    totals: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DictionaryFile {
    #[serde(default)]
    scheme: String,
    patterns: BTreeMap<String, BTreeMap<String, u64>>,
}

impl TryFrom<DictionaryFile> for PatternDictionary {
    type Error = ReError;

    fn try_from(file: DictionaryFile) -> Result<Self, ReError> {
        let mut dict = PatternDictionary::new(&file.scheme);
        for (pattern, counts) in file.patterns {
            let parsed: Pattern = pattern.parse()?;
            if parsed.to_string() != pattern {
                return Err(ReError::Dictionary(format!(
                    "pattern `{pattern}` is not in canonical form"
                )));
            }
            for (relation, count) in counts {
                if count == 0 || relation.is_empty() {
                    return Err(ReError::Dictionary(format!(
                        "`{pattern}` has a zero count or empty relation"
                    )));
                }
                dict.add(&parsed, &relation, count);
            }
        }
        Ok(dict)
    }
}

impl From<PatternDictionary> for DictionaryFile {
    fn from(d: PatternDictionary) -> Self {
        DictionaryFile {
            scheme: d.scheme,
            patterns: d.patterns,
        }
    }
}

impl PatternDictionary {
    pub fn new(scheme: &str) -> Self {
        PatternDictionary {
            scheme: scheme.to_owned(),
            ..Default::default()
        }
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn add(&mut self, pattern: &Pattern, relation: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self
            .patterns
            .entry(pattern.to_string())
            .or_default()
            .entry(relation.to_owned())
            .or_default() += count;
        *self.totals.entry(relation.to_owned()).or_default() += count;
    }

    pub fn get(&self, pattern: &Pattern) -> Option<&BTreeMap<String, u64>> {
        self.patterns.get(&pattern.to_string())
    }

    pub fn patterns(&self) -> &BTreeMap<String, BTreeMap<String, u64>> {
        &self.patterns
    }

    /// Total count of each relation over all patterns.
    pub fn relation_totals(&self) -> &BTreeMap<String, u64> {
        &self.totals
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Sum of several dictionaries; the scheme tags are joined with `+`.
    pub fn union(parts: &[&PatternDictionary]) -> PatternDictionary {
        let scheme: Vec<&str> = parts.iter().map(|d| d.scheme()).collect();
        let mut out = PatternDictionary::new(&scheme.join("+"));
        for d in parts {
            out.merge(d);
        }
        out
    }

    fn merge(&mut self, other: &PatternDictionary) {
        for (p, counts) in &other.patterns {
            let slot = self.patterns.entry(p.clone()).or_default();
            for (r, c) in counts {
                *slot.entry(r.clone()).or_default() += c;
                *self.totals.entry(r.clone()).or_default() += c;
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dictionary serializes") + "\n"
    }

    pub fn from_json(input: &str) -> Result<Self, ReError> {
        serde_json::from_str(input).map_err(|e| ReError::Dictionary(e.to_string()))
    }
}

/// Count the patterns of labeled instances. Fails on an instance without a
/// gold relation.
pub fn train(
    instances: &[RelationInstance],
    lexicon: &TriggerLexicon,
    scheme: &str,
    config: ReConfig,
) -> Result<PatternDictionary, ReError> {
    let partials: Vec<PatternDictionary> = instances
        .par_iter()
        .map(|inst| {
            let gold = inst
                .relation()
                .ok_or_else(|| ReError::MissingGold(inst.id().to_owned()))?;
            let mut d = PatternDictionary::new(scheme);
            if gold != NO_RELATION || config.negatives {
                for p in instance_patterns(inst, lexicon, config) {
                    d.add(&p, gold, 1);
                }
            }
            Ok(d)
        })
        .collect::<Result<_, ReError>>()?;
    let mut dict = PatternDictionary::new(scheme);
    for d in &partials {
        dict.merge(d);
    }
    Ok(dict)
}

/// Highest count wins; ties go to the relation with the larger corpus
/// total, then to the smaller name.
fn vote(counts: &BTreeMap<&str, u64>, totals: &BTreeMap<&str, u64>) -> Option<String> {
    counts
        .iter()
        .max_by(|(ra, ca), (rb, cb)| {
            let ta = totals.get(*ra).copied().unwrap_or(0);
            let tb = totals.get(*rb).copied().unwrap_or(0);
            ca.cmp(cb).then(ta.cmp(&tb)).then(rb.cmp(ra))
        })
        .map(|(r, _)| (*r).to_owned())
}

fn pooled<'a>(
    hits: impl IntoIterator<Item = &'a BTreeMap<String, u64>>,
    dictionaries: impl IntoIterator<Item = &'a PatternDictionary>,
) -> (BTreeMap<&'a str, u64>, BTreeMap<&'a str, u64>) {
    let mut counts = BTreeMap::new();
    for hit in hits {
        for (r, c) in hit {
            *counts.entry(r.as_str()).or_default() += c;
        }
    }
    let mut totals = BTreeMap::new();
    for d in dictionaries {
        for (r, c) in &d.totals {
            *totals.entry(r.as_str()).or_default() += c;
        }
    }
    (counts, totals)
}

/// Majority vote over the dictionary entries of the instance's patterns;
/// `no_relation` if none is known.
pub fn predict(
    instance: &RelationInstance,
    dictionary: &PatternDictionary,
    lexicon: &TriggerLexicon,
    config: ReConfig,
) -> String {
    let patterns = instance_patterns(instance, lexicon, config);
    let hits = patterns.iter().filter_map(|p| dictionary.get(p));
    let (counts, totals) = pooled(hits, [dictionary]);
    vote(&counts, &totals).unwrap_or_else(|| NO_RELATION.to_owned())
}

/// Decode one instance from several parses of it, each looked up in its own
/// dictionary (pass the same union dictionary to every variant to pool a
/// single merged model).
///
/// The counts of all matched patterns are pooled. The result is
/// `no_relation` only when nothing matches or every variant on its own votes
/// `no_relation`; otherwise it is the pooled majority among positive
/// relations, so a relation found by any single variant is never lost.
pub fn predict_ensemble(
    variants: &[(&RelationInstance, &PatternDictionary)],
    lexicon: &TriggerLexicon,
    config: ReConfig,
) -> String {
    let mut seen: BTreeSet<(usize, String)> = BTreeSet::new();
    let mut hits = Vec::new();
    let mut dicts: Vec<&PatternDictionary> = Vec::new();
    let mut any_positive = false;
    for (inst, dict) in variants {
        let slot = match dicts.iter().position(|d| std::ptr::eq(*d, *dict)) {
            Some(i) => i,
            None => {
                dicts.push(dict);
                dicts.len() - 1
            }
        };
        let mut own = Vec::new();
        for p in instance_patterns(inst, lexicon, config) {
            if let Some(hit) = dict.get(&p) {
                own.push(hit);
                if seen.insert((slot, p.to_string())) {
                    hits.push(hit);
                }
            }
        }
        let (counts, totals) = pooled(own, [*dict]);
        any_positive |= vote(&counts, &totals).is_some_and(|r| r != NO_RELATION);
    }
    if !any_positive {
        return NO_RELATION.to_owned();
    }
    let (mut counts, totals) = pooled(hits, dicts.iter().copied());
    counts.remove(NO_RELATION);
    vote(&counts, &totals).expect("a variant voted for a positive relation")
}

/// Precision, recall and F1 with `no_relation` as the negative class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ExtractionCounts,
}

impl From<ExtractionCounts> for ReScores {
    fn from(counts: ExtractionCounts) -> Self {
        ReScores {
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            counts,
        }
    }
}

/// Counts contributed by a single prediction.
pub fn unit_counts(predicted: &str, gold: &str) -> ExtractionCounts {
    let pred_pos = predicted != NO_RELATION;
    let gold_pos = gold != NO_RELATION;
    ExtractionCounts {
        predicted_positive: pred_pos as u64,
        gold_positive: gold_pos as u64,
        correct: (pred_pos && predicted == gold) as u64,
    }
}

/// Per-id counts over identical id sets, in id order.
pub fn paired_units(
    predictions: &BTreeMap<String, String>,
    golds: &BTreeMap<String, String>,
) -> Result<Vec<(String, ExtractionCounts)>, ReError> {
    if let Some(id) = predictions
        .keys()
        .find(|k| !golds.contains_key(*k))
        .or_else(|| golds.keys().find(|k| !predictions.contains_key(*k)))
    {
        return Err(ReError::IdMismatch(id.clone()));
    }
    Ok(golds
        .iter()
        .map(|(id, g)| (id.clone(), unit_counts(&predictions[id], g)))
        .collect())
}

pub fn score(predictions: &BTreeMap<String, String>, golds: &BTreeMap<String, String>) -> Result<ReScores, ReError> {
    let total = paired_units(predictions, golds)?
        .into_iter()
        .fold(ExtractionCounts::default(), |acc, (_, c)| acc + c);
    Ok(total.into())
}

/// Gold relations by id. Fails on an unlabeled instance.
pub fn gold_labels(instances: &[RelationInstance]) -> Result<BTreeMap<String, String>, ReError> {
    instances
        .iter()
        .map(|i| {
            i.relation()
                .map(|r| (i.id().to_owned(), r.to_owned()))
                .ok_or_else(|| ReError::MissingGold(i.id().to_owned()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct PredictionRecord<'a> {
    id: &'a str,
    relation: &'a str,
}

pub fn write_predictions(predictions: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (id, relation) in predictions {
        out.push_str(&serde_json::to_string(&PredictionRecord { id, relation }).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_predictions(input: &str) -> Result<BTreeMap<String, String>, ReError> {
    let mut out = BTreeMap::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord<'_> = serde_json::from_str(line).map_err(|e| ReError::Line {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if out.insert(rec.id.to_owned(), rec.relation.to_owned()).is_some() {
            return Err(ReError::DuplicateId(rec.id.to_owned()));
        }
    }
    Ok(out)
}

/// Which training material a test instance may see.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Training instances whose source id is listed are dropped.
    Standard { excluded_sources: BTreeSet<String> },
    /// All training instances are used.
    Parallel,
}

impl Setting {
    /// Standard setting excluding the sources of the given test instances.
    pub fn standard_for(test: &[RelationInstance]) -> Setting {
        Setting::Standard {
            excluded_sources: test.iter().map(|i| i.source_id().to_owned()).collect(),
        }
    }

    fn keeps(&self, inst: &RelationInstance) -> bool {
        match self {
            Setting::Standard { excluded_sources } => !excluded_sources.contains(inst.source_id()),
            Setting::Parallel => true,
        }
    }
}

/// One list of instances per parse variant (annotation scheme), all lists
/// covering the same mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeCorpus {
    pub schemes: Vec<(String, Vec<RelationInstance>)>,
}

impl SchemeCorpus {
    pub fn single(scheme: &str, instances: Vec<RelationInstance>) -> Self {
        SchemeCorpus {
            schemes: vec![(scheme.to_owned(), instances)],
        }
    }

    /// Check that every variant lists the same mentions in the same order.
    pub fn validate(&self) -> Result<(), ReError> {
        let Some((first_name, first)) = self.schemes.first() else {
            return Err(ReError::Setting("no parse variants given".into()));
        };
        for (name, insts) in &self.schemes[1..] {
            if insts.len() != first.len() {
                return Err(ReError::VariantMismatch(format!(
                    "{first_name} has {} instances, {name} has {}",
                    first.len(),
                    insts.len()
                )));
            }
            if let Some((a, _)) = first.iter().zip(insts).find(|(a, b)| !a.same_mentions(b)) {
                return Err(ReError::VariantMismatch(format!(
                    "instance {} differs between {first_name} and {name}",
                    a.id()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub scores: ReScores,
    pub predictions: BTreeMap<String, String>,
    pub dictionary: PatternDictionary,
}

/// Train on `train`, decode `test` and score against the test gold labels.
///
/// Without `ensemble` both corpora must hold exactly one variant. With it,
/// one dictionary is trained over all training variants and each test
/// instance is decoded from all of its variants with [`predict_ensemble`].
pub fn evaluate_setting(
    train_set: &SchemeCorpus,
    test_set: &SchemeCorpus,
    setting: &Setting,
    ensemble: bool,
    lexicon: &TriggerLexicon,
    config: ReConfig,
) -> Result<Evaluation, ReError> {
    train_set.validate()?;
    test_set.validate()?;
    let variants = train_set.schemes.len();
    if test_set.schemes.len() != variants {
        return Err(ReError::Setting(format!(
            "{variants} training variants but {} test variants",
            test_set.schemes.len()
        )));
    }
    match (ensemble, variants) {
        (false, 1) => {}
        (false, n) => {
            return Err(ReError::Setting(format!(
                "{n} parse variants need the ensemble setting"
            )))
        }
        (true, n) if n < 2 => return Err(ReError::Setting("the ensemble setting needs two parse variants".into())),
        (true, _) => {}
    }

    let mut dicts = Vec::with_capacity(variants);
    for (scheme, insts) in &train_set.schemes {
        let kept: Vec<RelationInstance> = insts.iter().filter(|i| setting.keeps(i)).cloned().collect();
        dicts.push(train(&kept, lexicon, scheme, config)?);
    }
    let dictionary = PatternDictionary::union(&dicts.iter().collect::<Vec<_>>());

    let test_variants = &test_set.schemes;
    let n_test = test_variants[0].1.len();
    let predictions: BTreeMap<String, String> = (0..n_test)
        .into_par_iter()
        .map(|i| {
            let lead = &test_variants[0].1[i];
            let relation = if ensemble {
                let pairs: Vec<(&RelationInstance, &PatternDictionary)> = test_variants
                    .iter()
                    .map(|(_, insts)| (&insts[i], &dictionary))
                    .collect();
                predict_ensemble(&pairs, lexicon, config)
            } else {
                predict(lead, &dictionary, lexicon, config)
            };
            (lead.id().to_owned(), relation)
        })
        .collect();
    let golds = gold_labels(&test_variants[0].1)?;
    let scores = score(&predictions, &golds)?;
    Ok(Evaluation {
        scores,
        predictions,
        dictionary,
    })
}

/// One system scored against the gold labels and tested against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemComparison {
    pub name: String,
    pub scores: ReScores,
    /// System minus baseline for precision, recall and F1.
    pub delta: [f64; 3],
    /// One-sided bootstrap p-values for precision, recall and F1.
    pub p_values: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline_name: String,
    pub baseline: ReScores,
    pub bootstrap: BootstrapConfig,
    pub systems: Vec<SystemComparison>,
}

const COMPARED: [BootstrapMetric; 3] = [BootstrapMetric::Precision, BootstrapMetric::Recall, BootstrapMetric::F1];

/// Score every system and test whether it beats the baseline on P, R and
/// F1 with a paired bootstrap over instances.
pub fn compare_predictions(
    golds: &BTreeMap<String, String>,
    baseline: (&str, &BTreeMap<String, String>),
    systems: &[(String, BTreeMap<String, String>)],
    config: BootstrapConfig,
) -> Result<Comparison, ReError> {
    let units = |preds: &BTreeMap<String, String>| -> Result<Vec<ExtractionCounts>, ReError> {
        Ok(paired_units(preds, golds)?.into_iter().map(|(_, c)| c).collect())
    };
    let base_units = units(baseline.1)?;
    let base_scores = score(baseline.1, golds)?;
    let mut out = Vec::with_capacity(systems.len());
    for (name, preds) in systems {
        let sys_units = units(preds)?;
        let scores = score(preds, golds)?;
        let mut p_values = [0.0; 3];
        for (slot, metric) in p_values.iter_mut().zip(COMPARED) {
            let r: BootstrapResult = paired_bootstrap(&base_units, &sys_units, metric, config)?;
            *slot = r.p_value;
        }
        out.push(SystemComparison {
            name: name.clone(),
            delta: [
                scores.precision - base_scores.precision,
                scores.recall - base_scores.recall,
                scores.f1 - base_scores.f1,
            ],
            scores,
            p_values,
        });
    }
    Ok(Comparison {
        baseline_name: baseline.0.to_owned(),
        baseline: base_scores,
        bootstrap: config,
        systems: out,
    })
}
