use std::collections::{BTreeMap, BTreeSet};

use super::ReError;
use crate::conllu::Token;

/// Trigger words per trigger type, matched case-insensitively against a
/// token's form or lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriggerLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
}

fn fold(s: &str) -> String {
    s.to_lowercase()
}

impl TriggerLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, trigger_type: &str, surface: &str) -> Result<(), ReError> {
        let bad = |what: &str| ReError::Lexicon {
            line: 0,
            message: format!("{what}: `{trigger_type}`\t`{surface}`"),
        };
        if trigger_type.is_empty() || trigger_type.chars().any(|c| c.is_whitespace() || c == '"') {
            return Err(bad("trigger type must be a non-empty word without quotes"));
        }
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(bad("trigger surface must be a single non-empty token"));
        }
        self.entries
            .entry(trigger_type.to_owned())
            .or_default()
            .insert(fold(surface));
        Ok(())
    }

    /// Parse `trigger_type<TAB>surface` lines. Blank lines are skipped.
    pub fn from_tsv(input: &str) -> Result<Self, ReError> {
        let mut lexicon = TriggerLexicon::new();
        for (idx, raw) in input.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (ty, surface) = line.split_once('\t').ok_or_else(|| ReError::Lexicon {
                line: idx + 1,
                message: "expected trigger_type<TAB>surface".into(),
            })?;
            lexicon.insert(ty, surface).map_err(|e| match e {
                ReError::Lexicon { message, .. } => ReError::Lexicon { line: idx + 1, message },
                other => other,
            })?;
        }
        Ok(lexicon)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (ty, surfaces) in &self.entries {
            for s in surfaces {
                out.push_str(ty);
                out.push('\t');
                out.push_str(s);
                out.push('\n');
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn trigger_types(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    /// Trigger types matched by this token, in name order.
    pub fn matches<'a>(&'a self, token: &'a Token) -> impl Iterator<Item = &'a str> + 'a {
        let form = fold(&token.form);
        let lemma = (token.lemma != "_").then(|| fold(&token.lemma));
        self.entries
            .iter()
            .filter(move |(_, set)| set.contains(&form) || lemma.as_ref().is_some_and(|l| set.contains(l)))
            .map(|(ty, _)| ty.as_str())
    }
}
