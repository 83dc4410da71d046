use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ReError;
use crate::conllu::{parse_str, serialize_conllu, ParseMode, Sentence};

/// Inclusive range of 1-based token ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl From<[usize; 2]> for Span {
    fn from([start, end]: [usize; 2]) -> Self {
        Span { start, end }
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn ids(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }

    pub fn contains(&self, id: usize) -> bool {
        (self.start..=self.end).contains(&id)
    }

    fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// A sentence with a typed subject and object mention, optionally labeled
/// with the gold relation between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    id: String,
    subj_span: Span,
    obj_span: Span,
    subj_type: String,
    obj_type: String,
    relation: Option<String>,
    source_id: Option<String>,
    parse: Sentence,
}

impl RelationInstance {
    /// Validates the spans against the parse. Token strings are taken from
    /// the parse.
    pub fn new(
        id: &str,
        subj_span: Span,
        obj_span: Span,
        subj_type: &str,
        obj_type: &str,
        relation: Option<&str>,
        parse: Sentence,
    ) -> Result<Self, ReError> {
        let bad = |reason: String| ReError::Instance {
            id: id.to_owned(),
            reason,
        };
        for (name, span) in [("subject", subj_span), ("object", obj_span)] {
            if span.start == 0 || span.start > span.end || span.end > parse.len() {
                return Err(bad(format!(
                    "{name} span [{}, {}] is outside the {}-token sentence",
                    span.start,
                    span.end,
                    parse.len()
                )));
            }
        }
        if subj_span.overlaps(&obj_span) {
            return Err(bad("subject and object spans overlap".into()));
        }
        for (name, ty) in [("subject", subj_type), ("object", obj_type)] {
            if ty.is_empty() || ty.chars().any(char::is_whitespace) || ty.starts_with('"') || ty == "<" || ty == ">" {
                return Err(bad(format!("{name} type `{ty}` cannot appear in a pattern")));
            }
        }
        if relation.is_some_and(str::is_empty) {
            return Err(bad("empty relation".into()));
        }
        Ok(RelationInstance {
            id: id.to_owned(),
            subj_span,
            obj_span,
            subj_type: subj_type.to_owned(),
            obj_type: obj_type.to_owned(),
            relation: relation.map(str::to_owned),
            source_id: None,
            parse,
        })
    }

    pub fn with_source_id(mut self, source_id: Option<&str>) -> Self {
        self.source_id = source_id.map(str::to_owned);
        self
    }

    /// The same mention pair over a different parse of the same tokens.
    pub fn with_parse(&self, parse: Sentence) -> Result<Self, ReError> {
        check_forms(
            &self.id,
            &self.parse.tokens().iter().map(|t| t.form.clone()).collect::<Vec<_>>(),
            &parse,
        )?;
        Ok(RelationInstance { parse, ..self.clone() })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn subj_span(&self) -> Span {
        self.subj_span
    }

    pub fn obj_span(&self) -> Span {
        self.obj_span
    }

    pub fn subj_type(&self) -> &str {
        &self.subj_type
    }

    pub fn obj_type(&self) -> &str {
        &self.obj_type
    }

    pub fn relation(&self) -> Option<&str> {
        self.relation.as_deref()
    }

    /// Identifier of the sentence this instance was derived from, used to
    /// keep test material out of training. Defaults to the instance id.
    pub fn source_id(&self) -> &str {
        self.source_id.as_deref().unwrap_or(&self.id)
    }

    pub fn parse(&self) -> &Sentence {
        &self.parse
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.parse.tokens().iter().map(|t| t.form.as_str())
    }

    /// Same tokens, spans and types (the parse may differ).
    pub fn same_mentions(&self, other: &RelationInstance) -> bool {
        self.id == other.id
            && self.subj_span == other.subj_span
            && self.obj_span == other.obj_span
            && self.subj_type == other.subj_type
            && self.obj_type == other.obj_type
            && self.tokens().eq(other.tokens())
    }
}

fn check_forms(id: &str, tokens: &[String], parse: &Sentence) -> Result<(), ReError> {
    let forms = parse.tokens().iter().map(|t| t.form.as_str());
    if tokens.len() != parse.len() || !forms.eq(tokens.iter().map(String::as_str)) {
        return Err(ReError::Instance {
            id: id.to_owned(),
            reason: "parse tokens differ from instance tokens".into(),
        });
    }
    Ok(())
}

/// One JSON line of an instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub subj_span: Span,
    pub obj_span: Span,
    pub subj_type: String,
    pub obj_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    /// Embedded CoNLL-U block. When absent the parse comes from a separate
    /// treebank whose `sent_id` equals `id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conllu: Option<String>,
}

impl RelationInstance {
    pub fn to_record(&self, embed_parse: bool) -> InstanceRecord {
        InstanceRecord {
            id: self.id.clone(),
            tokens: self.tokens().map(str::to_owned).collect(),
            subj_span: self.subj_span,
            obj_span: self.obj_span,
            subj_type: self.subj_type.clone(),
            obj_type: self.obj_type.clone(),
            relation: self.relation.clone(),
            source_id: self.source_id.clone(),
            conllu: embed_parse.then(|| serialize_conllu(std::slice::from_ref(&self.parse))),
        }
    }

    pub fn from_record(record: InstanceRecord, parses: Option<&BTreeMap<String, Sentence>>) -> Result<Self, ReError> {
        let parse = match (&record.conllu, parses) {
            (Some(block), _) => {
                let bank = parse_str(block, ParseMode::Strict).map_err(|e| ReError::Instance {
                    id: record.id.clone(),
                    reason: format!("embedded parse: {e}"),
                })?;
                let mut sentences = bank.sentences.into_iter();
                match (sentences.next(), sentences.next()) {
                    (Some(s), None) => s,
                    _ => {
                        return Err(ReError::Instance {
                            id: record.id.clone(),
                            reason: "embedded parse must hold exactly one sentence".into(),
                        })
                    }
                }
            }
            (None, Some(map)) => map
                .get(&record.id)
                .cloned()
                .ok_or_else(|| ReError::MissingParse(record.id.clone()))?,
            (None, None) => return Err(ReError::MissingParse(record.id.clone())),
        };
        check_forms(&record.id, &record.tokens, &parse)?;
        Ok(RelationInstance::new(
            &record.id,
            record.subj_span,
            record.obj_span,
            &record.subj_type,
            &record.obj_type,
            record.relation.as_deref(),
            parse,
        )?
        .with_source_id(record.source_id.as_deref()))
    }
}

/// Read an instance JSON-lines file. `parses` supplies the trees of records
/// without an embedded `conllu` block.
pub fn read_instances(input: &str, parses: Option<&[Sentence]>) -> Result<Vec<RelationInstance>, ReError> {
    let by_id: Option<BTreeMap<String, Sentence>> =
        parses.map(|p| p.iter().map(|s| (s.sent_id().to_owned(), s.clone())).collect());
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: InstanceRecord = serde_json::from_str(line).map_err(|e| ReError::Line {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(ReError::DuplicateId(record.id));
        }
        out.push(RelationInstance::from_record(record, by_id.as_ref())?);
    }
    Ok(out)
}

pub fn write_instances(instances: &[RelationInstance], embed_parse: bool) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&serde_json::to_string(&inst.to_record(embed_parse)).expect("records serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence() -> Sentence {
        Sentence::from_rows(
            "r1",
            &[
                ("Ann", "PROPN", 2, "nsubj"),
                ("lives", "VERB", 0, "root"),
                ("in", "ADP", 4, "case"),
                ("Oslo", "PROPN", 2, "obl"),
            ],
        )
        .unwrap()
    }

    fn instance() -> RelationInstance {
        RelationInstance::new(
            "r1",
            Span::new(1, 1),
            Span::new(4, 4),
            "PERSON",
            "CITY",
            Some("per_residence"),
            sentence(),
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let s = sentence();
        let mk = |a: Span, b: Span| RelationInstance::new("x", a, b, "P", "C", None, s.clone());
        assert!(mk(Span::new(1, 2), Span::new(2, 3)).is_err());
        assert!(mk(Span::new(0, 1), Span::new(3, 3)).is_err());
        assert!(mk(Span::new(2, 1), Span::new(3, 3)).is_err());
        assert!(mk(Span::new(1, 1), Span::new(4, 5)).is_err());
        assert!(mk(Span::new(1, 2), Span::new(3, 4)).is_ok());
        assert!(RelationInstance::new("x", Span::new(1, 1), Span::new(2, 2), "P Q", "C", None, s).is_err());
    }

    #[test]
    fn jsonl_round_trip_embedded_and_sidecar() {
        let inst = instance().with_source_id(Some("src7"));
        let text = write_instances(std::slice::from_ref(&inst), true);
        assert_eq!(read_instances(&text, None).unwrap(), std::slice::from_ref(&inst));
        assert_eq!(inst.source_id(), "src7");

        let bare = write_instances(std::slice::from_ref(&inst), false);
        assert!(matches!(read_instances(&bare, None), Err(ReError::MissingParse(_))));
        assert_eq!(read_instances(&bare, Some(&[sentence()])).unwrap(), [inst]);
    }

    #[test]
    fn record_errors() {
        let line = r#"{"id":"r1","tokens":["Ann","sleeps"],"subj_span":[1,1],"obj_span":[2,2],"subj_type":"P","obj_type":"C"}"#;
        assert!(matches!(
            read_instances(line, Some(&[sentence()])),
            Err(ReError::Instance { .. })
        ));
        assert!(matches!(read_instances("{", None), Err(ReError::Line { line: 1, .. })));
        let ok = write_instances(&[instance()], true);
        assert!(matches!(
            read_instances(&format!("{ok}{ok}"), None),
            Err(ReError::DuplicateId(_))
        ));
    }

    #[test]
    fn variants_share_mentions() {
        let a = instance();
        let other = Sentence::from_rows(
            "r1",
            &[
                ("Ann", "PROPN", 2, "nsubj"),
                ("lives", "VERB", 0, "root"),
                ("in", "ADP", 4, "case"),
                ("Oslo", "PROPN", 2, "A"),
            ],
        )
        .unwrap();
        let b = a.with_parse(other).unwrap();
        assert!(a.same_mentions(&b));
        assert_ne!(a, b);
        assert!(a
            .with_parse(Sentence::from_rows("r1", &[("x", "X", 0, "root")]).unwrap())
            .is_err());
    }
}
