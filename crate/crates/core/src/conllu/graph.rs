use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DepLabel, Sentence, Token};

/// UPOS tags treated as function words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionWordConfig {
    pub upos: BTreeSet<String>,
}

impl Default for FunctionWordConfig {
    fn default() -> Self {
        FunctionWordConfig {
            upos: ["ADP", "AUX", "CCONJ", "SCONJ", "DET", "PART", "PUNCT"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl FunctionWordConfig {
    pub fn new<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FunctionWordConfig {
            upos: tags.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_function_word(&self, token: &Token) -> bool {
        self.upos.contains(&token.upos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// From a dependent to its head.
    Up,
    /// From a head to one of its dependents.
    Down,
}

/// One hop of a tree path, labeled with the relation of the dependent end.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub direction: Direction,
    pub label: DepLabel,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Up => write!(f, "< {}", self.label),
            Direction::Down => write!(f, "> {}", self.label),
        }
    }
}

/// A path through the undirected tree: `nodes[i] -- steps[i] -- nodes[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    pub fn end(&self) -> usize {
        *self.nodes.last().expect("path has at least one node")
    }

    pub fn step_string(&self) -> String {
        self.steps.iter().map(Step::to_string).collect::<Vec<_>>().join(" ")
    }
}

fn neighbours<'a>(sentence: &'a Sentence, children: &'a [Vec<usize>], id: usize) -> impl Iterator<Item = usize> + 'a {
    let head = sentence.head_of(id).filter(|&h| h != 0);
    head.into_iter().chain(children[id].iter().copied())
}

/// Minimum-hop path between any `from` token and any `to` token, treating
/// the tree as undirected. The artificial root is not part of the graph.
///
/// Among equally short paths the one with the smallest `(from, to)` pair
/// wins; in a tree that pair determines the path. Overlapping sets give the
/// zero-length path at their smallest shared id. Returns `None` if either
/// set is empty or mentions an id outside the sentence.
pub fn shortest_path(sentence: &Sentence, from_ids: &[usize], to_ids: &[usize]) -> Option<Path> {
    let n = sentence.len();
    let valid = |ids: &[usize]| !ids.is_empty() && ids.iter().all(|&i| (1..=n).contains(&i));
    if !valid(from_ids) || !valid(to_ids) {
        return None;
    }
    let from: BTreeSet<usize> = from_ids.iter().copied().collect();
    let to: BTreeSet<usize> = to_ids.iter().copied().collect();

    if let Some(&shared) = from.intersection(&to).next() {
        return Some(Path {
            nodes: vec![shared],
            steps: Vec::new(),
        });
    }

    let mut children = vec![Vec::new(); n + 1];
    for tok in sentence.tokens() {
        if tok.head != 0 {
            children[tok.head].push(tok.id);
        }
    }

    let mut best: Option<(usize, usize, usize, Vec<usize>)> = None;
    let mut parent = vec![usize::MAX; n + 1];
    let mut dist = vec![usize::MAX; n + 1];
    for &a in &from {
        parent.fill(usize::MAX);
        dist.fill(usize::MAX);
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            for w in neighbours(sentence, &children, v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        for &b in &to {
            let d = dist[b];
            if best.as_ref().is_none_or(|(bd, ..)| d < *bd) {
                let mut nodes = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = parent[cur];
                    nodes.push(cur);
                }
                nodes.reverse();
                best = Some((d, a, b, nodes));
            }
        }
    }

    let (_, _, _, nodes) = best?;
    let steps = nodes
        .windows(2)
        .map(|w| {
            let (u, v) = (w[0], w[1]);
            if sentence.head_of(u) == Some(v) {
                Step {
                    direction: Direction::Up,
                    label: sentence.token(u).expect("node in sentence").deprel.clone(),
                }
            } else {
                Step {
                    direction: Direction::Down,
                    label: sentence.token(v).expect("node in sentence").deprel.clone(),
                }
            }
        })
        .collect();
    Some(Path { nodes, steps })
}
