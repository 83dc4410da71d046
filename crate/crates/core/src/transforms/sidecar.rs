//! JSON-lines annotations consumed by the predicate and oblique rewrites.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ProcessAnnotation, SnacsAnnotation, TransformError};

/// `{"sent_id": "...", "process_heads": [6, 9]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessRecord {
    pub sent_id: String,
    pub process_heads: BTreeSet<usize>,
}

/// `{"sent_id": "...", "supersenses": {"4": "p.Locus"}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnacsRecord {
    pub sent_id: String,
    pub supersenses: BTreeMap<usize, String>,
}

fn read_records<T: DeserializeOwned>(input: &str) -> Result<Vec<T>, TransformError> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| TransformError::Sidecar {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn zero_id(line_of: &str, ids: impl IntoIterator<Item = usize>) -> Result<(), TransformError> {
    if ids.into_iter().any(|id| id == 0) {
        return Err(TransformError::Sidecar {
            line: 0,
            message: format!("sentence {line_of}: token ids are 1-based"),
        });
    }
    Ok(())
}

pub fn read_process_sidecar(input: &str) -> Result<ProcessAnnotation, TransformError> {
    let mut out = ProcessAnnotation::new();
    for rec in read_records::<ProcessRecord>(input)? {
        zero_id(&rec.sent_id, rec.process_heads.iter().copied())?;
        if out.insert(rec.sent_id.clone(), rec.process_heads).is_some() {
            return Err(TransformError::DuplicateRecord(rec.sent_id));
        }
    }
    Ok(out)
}

pub fn read_snacs_sidecar(input: &str) -> Result<SnacsAnnotation, TransformError> {
    let mut out = SnacsAnnotation::new();
    for rec in read_records::<SnacsRecord>(input)? {
        zero_id(&rec.sent_id, rec.supersenses.keys().copied())?;
        if out.insert(rec.sent_id.clone(), rec.supersenses).is_some() {
            return Err(TransformError::DuplicateRecord(rec.sent_id));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn process_lines() {
        let a = read_process_sidecar(
            "{\"sent_id\":\"s1\",\"process_heads\":[6,2]}\n\n{\"sent_id\":\"s2\",\"process_heads\":[]}\n",
        )
        .unwrap();
        assert_eq!(a["s1"], BTreeSet::from([2, 6]));
        assert!(a["s2"].is_empty());
        assert!(matches!(
            read_process_sidecar(
                "{\"sent_id\":\"s1\",\"process_heads\":[1]}\n{\"sent_id\":\"s1\",\"process_heads\":[2]}"
            ),
            Err(TransformError::DuplicateRecord(_))
        ));
        assert!(matches!(
            read_process_sidecar("{\"sent_id\":\"s1\"}"),
            Err(TransformError::Sidecar { line: 1, .. })
        ));
        assert!(read_process_sidecar("{\"sent_id\":\"s1\",\"process_heads\":[0]}").is_err());
    }

    #[test]
    fn snacs_lines() {
        let a = read_snacs_sidecar(r#"{"sent_id":"s1","supersenses":{"2":"p.Locus","10":"Time"}}"#).unwrap();
        assert_eq!(a["s1"][&2], "p.Locus");
        assert_eq!(a["s1"][&10], "Time");
        assert!(read_snacs_sidecar(r#"{"sent_id":"s1","supersenses":{"x":"Time"}}"#).is_err());
    }
}
