//! Dependency-path patterns such as
//! `PERSON < nsubj "per_residence" > obj > compound CITY`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::conllu::{Direction, Path};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid pattern: {0}")]
pub struct PatternError(pub String);

/// One hop: `<` climbs from a dependent to its head, `>` descends to a
/// dependent. The label is always the universal relation of the dependent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternStep {
    pub direction: Direction,
    pub label: String,
}

impl PatternStep {
    pub fn up(label: &str) -> Self {
        PatternStep {
            direction: Direction::Up,
            label: label.to_owned(),
        }
    }

    pub fn down(label: &str) -> Self {
        PatternStep {
            direction: Direction::Down,
            label: label.to_owned(),
        }
    }
}

/// Convert a tree path, dropping label subtypes.
pub fn steps_of(path: &Path) -> Vec<PatternStep> {
    path.steps
        .iter()
        .map(|s| PatternStep {
            direction: s.direction,
            label: s.label.universal().to_owned(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriggerAnchor {
    pub trigger_type: String,
    /// Steps from the trigger to the object.
    pub steps: Vec<PatternStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    subj_type: String,
    /// Steps from the subject to the trigger, or to the object if untriggered.
    steps: Vec<PatternStep>,
    trigger: Option<TriggerAnchor>,
    obj_type: String,
}

fn is_atom(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

fn check_entity(s: &str) -> Result<(), PatternError> {
    if !is_atom(s) || s == "<" || s == ">" || s.starts_with('"') {
        return Err(PatternError(format!("`{s}` is not a valid entity type")));
    }
    Ok(())
}

fn check_label(s: &str) -> Result<(), PatternError> {
    if !is_atom(s) {
        return Err(PatternError(format!("`{s}` is not a valid label")));
    }
    Ok(())
}

fn check_trigger(s: &str) -> Result<(), PatternError> {
    if !is_atom(s) || s.contains('"') {
        return Err(PatternError(format!("`{s}` is not a valid trigger type")));
    }
    Ok(())
}

impl Pattern {
    pub fn new(
        subj_type: &str,
        steps: Vec<PatternStep>,
        trigger: Option<TriggerAnchor>,
        obj_type: &str,
    ) -> Result<Self, PatternError> {
        check_entity(subj_type)?;
        check_entity(obj_type)?;
        let trigger_steps = trigger.iter().flat_map(|t| &t.steps);
        for step in steps.iter().chain(trigger_steps) {
            check_label(&step.label)?;
        }
        if let Some(t) = &trigger {
            check_trigger(&t.trigger_type)?;
        }
        Ok(Pattern {
            subj_type: subj_type.to_owned(),
            steps,
            trigger,
            obj_type: obj_type.to_owned(),
        })
    }

    pub fn subj_type(&self) -> &str {
        &self.subj_type
    }

    pub fn obj_type(&self) -> &str {
        &self.obj_type
    }

    pub fn steps(&self) -> &[PatternStep] {
        &self.steps
    }

    pub fn trigger(&self) -> Option<&TriggerAnchor> {
        self.trigger.as_ref()
    }

    /// Total number of hops.
    pub fn hops(&self) -> usize {
        self.steps.len() + self.trigger.as_ref().map_or(0, |t| t.steps.len())
    }
}

fn write_steps(f: &mut fmt::Formatter<'_>, steps: &[PatternStep]) -> fmt::Result {
    for s in steps {
        let arrow = match s.direction {
            Direction::Up => '<',
            Direction::Down => '>',
        };
        write!(f, " {arrow} {}", s.label)?;
    }
    Ok(())
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.subj_type)?;
        write_steps(f, &self.steps)?;
        if let Some(t) = &self.trigger {
            write!(f, " \"{}\"", t.trigger_type)?;
            write_steps(f, &t.steps)?;
        }
        write!(f, " {}", self.obj_type)
    }
}

impl FromStr for Pattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let atoms: Vec<&str> = s.split_whitespace().collect();
        if atoms.len() < 2 {
            return Err(PatternError(format!("`{s}` needs a subject and an object type")));
        }
        let (subj, rest) = atoms.split_first().expect("two atoms");
        let (obj, middle) = rest.split_last().expect("one atom");

        let mut steps = Vec::new();
        let mut trigger: Option<TriggerAnchor> = None;
        let mut it = middle.iter();
        while let Some(&atom) = it.next() {
            let direction = match atom {
                "<" => Some(Direction::Up),
                ">" => Some(Direction::Down),
                _ => None,
            };
            if let Some(direction) = direction {
                let label = it
                    .next()
                    .ok_or_else(|| PatternError(format!("`{atom}` is missing its label")))?;
                let step = PatternStep {
                    direction,
                    label: (*label).to_owned(),
                };
                match &mut trigger {
                    Some(t) => t.steps.push(step),
                    None => steps.push(step),
                }
            } else if let Some(name) = atom.strip_prefix('"').and_then(|a| a.strip_suffix('"')) {
                if trigger.is_some() {
                    return Err(PatternError("more than one trigger".into()));
                }
                trigger = Some(TriggerAnchor {
                    trigger_type: name.to_owned(),
                    steps: Vec::new(),
                });
            } else {
                return Err(PatternError(format!("unexpected `{atom}`")));
            }
        }
        Pattern::new(subj, steps, trigger, obj)
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn footnote_shape_round_trips() {
        let text = "PERSON < nsubj \"per_residence\" > obj > compound CITY";
        let p: Pattern = text.parse().unwrap();
        assert_eq!(p.subj_type(), "PERSON");
        assert_eq!(p.steps(), [PatternStep::up("nsubj")]);
        let t = p.trigger().unwrap();
        assert_eq!(t.trigger_type, "per_residence");
        assert_eq!(t.steps, [PatternStep::down("obj"), PatternStep::down("compound")]);
        assert_eq!(p.hops(), 3);
        assert_eq!(p.to_string(), text);
    }

    #[test]
    fn untriggered_and_whitespace() {
        let p: Pattern = "ORG  > nmod\t< x  LOC".parse().unwrap();
        assert_eq!(p.to_string(), "ORG > nmod < x LOC");
        let bare: Pattern = "A B".parse().unwrap();
        assert_eq!(bare.hops(), 0);
        let anchored: Pattern = "A \"t\" B".parse().unwrap();
        assert!(anchored.trigger().unwrap().steps.is_empty());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "PERSON",
            "PERSON <",
            "PERSON < CITY",
            "P \"a\" \"b\" C",
            "P nsubj C",
            "P \"\" C",
            "< x C",
            "\"t\" C",
        ] {
            assert!(bad.parse::<Pattern>().is_err(), "{bad}");
        }
        assert!(Pattern::new("P", vec![PatternStep::up("has space")], None, "C").is_err());
    }

    #[test]
    fn serde_as_string() {
        let p: Pattern = "P < a \"t\" > b C".parse().unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"P < a \\\"t\\\" > b C\"");
        assert_eq!(serde_json::from_str::<Pattern>(&json).unwrap(), p);
    }
}
