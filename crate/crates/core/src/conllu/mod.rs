//! CoNLL-U treebanks: tokens, dependency labels, validated sentences and
//! the tree utilities built on top of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod graph;
mod reader;

pub use graph::{shortest_path, Direction, FunctionWordConfig, Path, Step};
pub use reader::{
    parse_conllu, parse_str, serialize_conllu, write_conllu, Diagnostic, ParseError, ParseErrorKind, ParseMode,
    Treebank,
};

/// The universal POS inventory of UD v2.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ",
    "SYM", "VERB", "X",
];

pub fn is_valid_upos(upos: &str) -> bool {
    upos == "_" || UPOS_TAGS.contains(&upos)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("empty dependency relation")]
    Empty,
    #[error("invalid dependency relation `{0}`")]
    Invalid(String),
}

/// A dependency relation, split into its universal part and optional subtype.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DepLabel {
    universal: String,
    subtype: Option<String>,
}

impl DepLabel {
    pub fn new(universal: &str, subtype: Option<&str>) -> Result<Self, LabelError> {
        if universal.is_empty() {
            return Err(LabelError::Empty);
        }
        let bad = |s: &str| s.contains(':') || s.chars().any(char::is_whitespace);
        if bad(universal) || subtype.is_some_and(|s| s.is_empty() || s.chars().any(char::is_whitespace)) {
            return Err(LabelError::Invalid(match subtype {
                Some(s) => format!("{universal}:{s}"),
                None => universal.to_owned(),
            }));
        }
        Ok(DepLabel {
            universal: universal.to_owned(),
            subtype: subtype.map(str::to_owned),
        })
    }

    /// Label without subtype. Panics on malformed input; use `parse` for
    /// untrusted strings.
    pub fn plain(universal: &str) -> Self {
        DepLabel::new(universal, None).expect("invalid universal relation")
    }

    pub fn universal(&self) -> &str {
        &self.universal
    }

    pub fn subtype(&self) -> Option<&str> {
        self.subtype.as_deref()
    }

    pub fn is(&self, universal: &str) -> bool {
        self.universal == universal
    }

    pub fn strip_subtype(&self) -> DepLabel {
        DepLabel {
            universal: self.universal.clone(),
            subtype: None,
        }
    }
}

pub fn strip_subtype(label: &DepLabel) -> DepLabel {
    label.strip_subtype()
}

impl FromStr for DepLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((universal, subtype)) => DepLabel::new(universal, Some(subtype)),
            None => DepLabel::new(s, None),
        }
    }
}

impl fmt::Display for DepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subtype {
            Some(subtype) => write!(f, "{}:{}", self.universal, subtype),
            None => f.write_str(&self.universal),
        }
    }
}

impl Serialize for DepLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DepLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How two dependency labels are compared when scoring or classifying.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelPolicy {
    /// Compare the universal part only.
    #[default]
    Universal,
    /// Compare universal part and subtype.
    Exact,
}

impl LabelPolicy {
    pub fn matches(self, a: &DepLabel, b: &DepLabel) -> bool {
        match self {
            LabelPolicy::Universal => a.universal == b.universal,
            LabelPolicy::Exact => a == b,
        }
    }
}

/// One basic-tree token (a CoNLL-U word line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: Vec<(String, String)>,
    pub head: usize,
    pub deprel: DepLabel,
    /// Enhanced dependencies, kept verbatim.
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Token with only the fields relevant to tree logic filled in.
    pub fn new(id: usize, form: &str, upos: &str, head: usize, deprel: DepLabel) -> Self {
        Token {
            id,
            form: form.to_owned(),
            lemma: "_".to_owned(),
            upos: upos.to_owned(),
            xpos: None,
            feats: Vec::new(),
            head,
            deprel,
            deps: "_".to_owned(),
            misc: "_".to_owned(),
        }
    }
}

/// A multiword-token range or empty-node line. These are kept verbatim and
/// play no part in tree logic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InertLine {
    /// Number of basic tokens preceding the line.
    pub position: usize,
    pub line: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("sentence has no tokens")]
    Empty,
    #[error("expected token id {expected}, found {found}")]
    BadId { expected: usize, found: usize },
    #[error("token {0} is its own head")]
    SelfLoop(usize),
    #[error("token {id} has head {head} outside the sentence")]
    HeadOutOfRange { id: usize, head: usize },
    #[error("no token is attached to the root")]
    NoRoot,
    #[error("tokens {0} and {1} are both attached to the root")]
    MultipleRoots(usize, usize),
    #[error("root token {id} has relation `{label}` instead of `root`")]
    RootLabel { id: usize, label: String },
    #[error("head cycle through token {0}")]
    Cycle(usize),
    #[error("token {id} has invalid UPOS `{upos}`")]
    Upos { id: usize, upos: String },
}

/// A validated dependency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    sent_id: String,
    text: Option<String>,
    comments: Vec<String>,
    tokens: Vec<Token>,
    inert: Vec<InertLine>,
}

impl Sentence {
    pub fn new(sent_id: impl Into<String>, tokens: Vec<Token>) -> Result<Self, TreeError> {
        validate_tree(&tokens)?;
        Ok(Sentence {
            sent_id: sent_id.into(),
            text: None,
            comments: Vec::new(),
            tokens,
            inert: Vec::new(),
        })
    }

    /// Convenience constructor from parallel `(form, upos, head, deprel)` rows.
    pub fn from_rows(sent_id: &str, rows: &[(&str, &str, usize, &str)]) -> Result<Self, TreeError> {
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(i, &(form, upos, head, rel))| {
                let deprel = rel.parse().unwrap_or_else(|_| DepLabel::plain("dep"));
                Token::new(i + 1, form, upos, head, deprel)
            })
            .collect();
        Sentence::new(sent_id, tokens)
    }

    pub fn with_text(mut self, text: Option<String>) -> Self {
        self.text = text;
        self
    }

    pub(crate) fn with_annotations(mut self, comments: Vec<String>, inert: Vec<InertLine>) -> Self {
        self.comments = comments;
        self.inert = inert;
        self
    }

    pub fn sent_id(&self) -> &str {
        &self.sent_id
    }

    pub fn text(&self) -> Option<&str> {
        self.text.as_deref()
    }

    /// Comment lines other than `sent_id` and `text`, without the leading `#`.
    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn inert_lines(&self) -> &[InertLine] {
        &self.inert
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based id.
    pub fn token(&self, id: usize) -> Option<&Token> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn head_of(&self, id: usize) -> Option<usize> {
        self.token(id).map(|t| t.head)
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    /// Does the tree contain an edge `head -> dep`? `head` may be 0.
    pub fn has_edge(&self, head: usize, dep: usize) -> bool {
        self.head_of(dep) == Some(head)
    }

    /// One edge per token, including the attachment of the root token to 0.
    pub fn edges(&self) -> impl Iterator<Item = Edge<'_>> + '_ {
        self.tokens.iter().map(|t| Edge {
            head_id: t.head,
            dep_id: t.id,
            label: &t.deprel,
        })
    }

    /// Dependents of `id` (0 addresses the artificial root), in token order.
    pub fn dependents(&self, id: usize) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(move |t| t.head == id)
    }

    /// Returns a copy with every deprel replaced by `relabel(token)`. Heads
    /// and all other token fields are untouched.
    pub fn relabeled<F>(&self, mut relabel: F) -> Sentence
    where
        F: FnMut(&Token) -> DepLabel,
    {
        let mut out = self.clone();
        for (tok, orig) in out.tokens.iter_mut().zip(&self.tokens) {
            tok.deprel = relabel(orig);
        }
        out
    }
}

/// A view of one head -> dependent attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge<'a> {
    pub head_id: usize,
    pub dep_id: usize,
    pub label: &'a DepLabel,
}

fn validate_tree(tokens: &[Token]) -> Result<(), TreeError> {
    if tokens.is_empty() {
        return Err(TreeError::Empty);
    }
    let n = tokens.len();
    let mut root = None;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.id != i + 1 {
            return Err(TreeError::BadId {
                expected: i + 1,
                found: tok.id,
            });
        }
        if !is_valid_upos(&tok.upos) {
            return Err(TreeError::Upos {
                id: tok.id,
                upos: tok.upos.clone(),
            });
        }
        if tok.head == tok.id {
            return Err(TreeError::SelfLoop(tok.id));
        }
        if tok.head > n {
            return Err(TreeError::HeadOutOfRange {
                id: tok.id,
                head: tok.head,
            });
        }
        if tok.head == 0 {
            if let Some(first) = root {
                return Err(TreeError::MultipleRoots(first, tok.id));
            }
            if !tok.deprel.is("root") {
                return Err(TreeError::RootLabel {
                    id: tok.id,
                    label: tok.deprel.to_string(),
                });
            }
            root = Some(tok.id);
        }
    }
    if root.is_none() {
        return Err(TreeError::NoRoot);
    }

    // 0 = unvisited, 1 = on current walk, 2 = known to reach the root.
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut walk = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            walk.push(cur);
            cur = tokens[cur - 1].head;
        }
        if state[cur] == 1 {
            return Err(TreeError::Cycle(cur));
        }
        for id in walk {
            state[id] = 2;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parse_and_display() {
        let l: DepLabel = "nmod:poss".parse().unwrap();
        assert_eq!(l.universal(), "nmod");
        assert_eq!(l.subtype(), Some("poss"));
        assert_eq!(l.to_string(), "nmod:poss");
        assert_eq!("acl".parse::<DepLabel>().unwrap().to_string(), "acl");
        assert!("".parse::<DepLabel>().is_err());
        assert!("nmod:".parse::<DepLabel>().is_err());
        assert!(":poss".parse::<DepLabel>().is_err());
        // subtype may itself contain a colon (e.g. `obl:arg:foo` is rare but legal-ish)
        assert_eq!("a:b:c".parse::<DepLabel>().unwrap().subtype(), Some("b:c"));
    }

    #[test]
    fn strip_subtype_cases() {
        let poss: DepLabel = "nmod:poss".parse().unwrap();
        assert_eq!(strip_subtype(&poss), DepLabel::plain("nmod"));
        assert_eq!(strip_subtype(&DepLabel::plain("acl")), DepLabel::plain("acl"));
        assert_eq!(strip_subtype(&strip_subtype(&poss)), strip_subtype(&poss));
    }

    #[test]
    fn label_policy() {
        let a: DepLabel = "nmod:poss".parse().unwrap();
        let b: DepLabel = "nmod:tmod".parse().unwrap();
        assert!(LabelPolicy::Universal.matches(&a, &b));
        assert!(!LabelPolicy::Exact.matches(&a, &b));
    }

    #[test]
    fn tree_validation() {
        assert!(Sentence::from_rows("ok", &[("Japanese", "ADJ", 2, "amod"), ("company", "NOUN", 0, "root")]).is_ok());
        assert_eq!(
            Sentence::from_rows(
                "c",
                &[("a", "X", 2, "dep"), ("b", "X", 1, "dep"), ("c", "X", 0, "root")]
            ),
            Err(TreeError::Cycle(1))
        );
        assert_eq!(
            Sentence::from_rows("m", &[("a", "X", 0, "root"), ("b", "X", 0, "root")]),
            Err(TreeError::MultipleRoots(1, 2))
        );
        assert_eq!(
            Sentence::from_rows("n", &[("a", "X", 1, "dep")]),
            Err(TreeError::SelfLoop(1))
        );
        assert!(matches!(
            Sentence::from_rows("r", &[("a", "X", 0, "dep")]),
            Err(TreeError::RootLabel { .. })
        ));
        assert!(matches!(
            Sentence::from_rows("u", &[("a", "FOO", 0, "root")]),
            Err(TreeError::Upos { .. })
        ));
        assert_eq!(Sentence::new("e", vec![]), Err(TreeError::Empty));
    }

    #[test]
    fn relabel_keeps_topology() {
        let s = Sentence::from_rows("x", &[("Japanese", "ADJ", 2, "amod"), ("company", "NOUN", 0, "root")]).unwrap();
        let t = s.relabeled(|tok| {
            if tok.deprel.is("amod") {
                DepLabel::plain("acl")
            } else {
                tok.deprel.clone()
            }
        });
        assert_eq!(s.heads(), t.heads());
        assert_eq!(t.token(1).unwrap().deprel, DepLabel::plain("acl"));
    }
}
