//! Word alignments between a source and a target sentence.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::StabilityError;
use crate::conllu::Sentence;

/// A link between source token `src_id` and target token `tgt_id` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlignmentLink {
    pub src_id: usize,
    pub tgt_id: usize,
}

impl AlignmentLink {
    pub fn new(src_id: usize, tgt_id: usize) -> Self {
        AlignmentLink { src_id, tgt_id }
    }
}

/// Serialized as a `[src, tgt]` pair.
impl Serialize for AlignmentLink {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.src_id, self.tgt_id].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlignmentLink {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [src_id, tgt_id] = <[usize; 2]>::deserialize(deserializer)?;
        Ok(AlignmentLink { src_id, tgt_id })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceAlignment {
    pub src_sent_id: String,
    pub tgt_sent_id: String,
    pub links: BTreeSet<AlignmentLink>,
}

impl SentenceAlignment {
    pub fn new<I>(src_sent_id: &str, tgt_sent_id: &str, links: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        SentenceAlignment {
            src_sent_id: src_sent_id.to_owned(),
            tgt_sent_id: tgt_sent_id.to_owned(),
            links: links.into_iter().map(|(s, t)| AlignmentLink::new(s, t)).collect(),
        }
    }

    /// Same links with source and target swapped.
    pub fn inverted(&self) -> SentenceAlignment {
        SentenceAlignment {
            src_sent_id: self.tgt_sent_id.clone(),
            tgt_sent_id: self.src_sent_id.clone(),
            links: self
                .links
                .iter()
                .map(|l| AlignmentLink::new(l.tgt_id, l.src_id))
                .collect(),
        }
    }

    pub fn check_bounds(&self, src: &Sentence, tgt: &Sentence) -> Result<(), StabilityError> {
        for link in &self.links {
            if !(1..=src.len()).contains(&link.src_id) || !(1..=tgt.len()).contains(&link.tgt_id) {
                return Err(StabilityError::LinkOutOfRange {
                    src_sent_id: src.sent_id().to_owned(),
                    tgt_sent_id: tgt.sent_id().to_owned(),
                    src_id: link.src_id,
                    tgt_id: link.tgt_id,
                });
            }
        }
        Ok(())
    }
}

/// Index base of Pharaoh alignment files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexBase {
    Zero,
    #[default]
    One,
}

/// Parse one Pharaoh line (`i-j` pairs, source first) into 1-based links.
pub fn parse_pharaoh_line(line: &str, base: IndexBase) -> Result<Vec<AlignmentLink>, String> {
    line.split_whitespace()
        .map(|pair| {
            let (s, t) = pair
                .split_once('-')
                .ok_or_else(|| format!("`{pair}` is not an i-j pair"))?;
            let parse = |x: &str| -> Result<usize, String> {
                if x.is_empty() || !x.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(format!("`{pair}` has a non-numeric index"));
                }
                let v: usize = x.parse().map_err(|_| format!("`{pair}` index overflows"))?;
                match base {
                    IndexBase::Zero => v.checked_add(1).ok_or_else(|| format!("`{pair}` index overflows")),
                    IndexBase::One if v == 0 => Err(format!("`{pair}` has index 0 in a 1-based file")),
                    IndexBase::One => Ok(v),
                }
            };
            Ok(AlignmentLink::new(parse(s)?, parse(t)?))
        })
        .collect()
}

/// Read a Pharaoh file whose lines pair positionally with the sentences of
/// the two treebanks.
pub fn read_pharaoh<R: BufRead>(
    input: R,
    src: &[Sentence],
    tgt: &[Sentence],
    base: IndexBase,
) -> Result<Vec<SentenceAlignment>, StabilityError> {
    if src.len() != tgt.len() {
        return Err(StabilityError::Format(format!(
            "positional alignment needs equally long treebanks ({} source vs {} target sentences)",
            src.len(),
            tgt.len()
        )));
    }
    let mut out = Vec::with_capacity(tgt.len());
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| StabilityError::Format(e.to_string()))?;
        if idx >= tgt.len() {
            if line.trim().is_empty() {
                continue;
            }
            return Err(StabilityError::Format(format!(
                "alignment file has more lines than the {} sentence pairs",
                tgt.len()
            )));
        }
        let links = parse_pharaoh_line(&line, base)
            .map_err(|e| StabilityError::Format(format!("alignment line {}: {e}", idx + 1)))?;
        out.push(SentenceAlignment {
            src_sent_id: src[idx].sent_id().to_owned(),
            tgt_sent_id: tgt[idx].sent_id().to_owned(),
            links: links.into_iter().collect(),
        });
    }
    if out.len() != tgt.len() {
        return Err(StabilityError::Format(format!(
            "alignment file has {} lines for {} sentence pairs",
            out.len(),
            tgt.len()
        )));
    }
    Ok(out)
}

/// Read keyed alignments: JSON lines, or a single JSON array of records.
pub fn read_alignment_json(input: &str) -> Result<Vec<SentenceAlignment>, StabilityError> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| StabilityError::Format(e.to_string()));
    }
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| StabilityError::Format(format!("alignment line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_pharaoh(alignments: &[SentenceAlignment], base: IndexBase) -> String {
    let offset = usize::from(base == IndexBase::Zero);
    let mut out = String::new();
    for a in alignments {
        let line: Vec<String> = a
            .links
            .iter()
            .map(|l| format!("{}-{}", l.src_id - offset, l.tgt_id - offset))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
