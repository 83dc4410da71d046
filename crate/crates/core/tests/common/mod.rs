#![allow(dead_code)]

use proptest::prelude::*;
use udstab::conllu::Sentence;

/// Heads, labels and tags of a random tree with a single root.
#[derive(Debug, Clone)]
pub struct TreeSpec {
    pub heads: Vec<usize>,
    pub labels: Vec<&'static str>,
    pub upos: Vec<&'static str>,
}

impl TreeSpec {
    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn build(&self, sent_id: &str) -> Sentence {
        let forms: Vec<String> = (1..=self.len()).map(|i| format!("w{i}")).collect();
        let rows: Vec<_> = (0..self.len())
            .map(|i| (forms[i].as_str(), self.upos[i], self.heads[i], self.labels[i]))
            .collect();
        Sentence::from_rows(sent_id, &rows).expect("generated tree is valid")
    }
}

/// Head arrays from an attachment order: `order[0]` is the root and each later
/// token hangs off one that came before it.
fn heads_from(order: &[usize], picks: &[usize]) -> Vec<usize> {
    let mut heads = vec![0; order.len()];
    for k in 1..order.len() {
        heads[order[k] - 1] = order[picks[k] % k];
    }
    heads
}

pub fn tree(
    min: usize,
    max: usize,
    labels: &'static [&'static str],
    upos: &'static [&'static str],
) -> impl Strategy<Value = TreeSpec> {
    (min..=max).prop_flat_map(move |n| {
        (
            Just((1..=n).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(any::<usize>(), n),
            prop::collection::vec(prop::sample::select(labels), n),
            prop::collection::vec(prop::sample::select(upos), n),
        )
            .prop_map(|(order, picks, labels, upos)| {
                let heads = heads_from(&order, &picks);
                let labels = heads
                    .iter()
                    .zip(labels)
                    .map(|(&h, l)| if h == 0 { "root" } else { l })
                    .collect();
                TreeSpec { heads, labels, upos }
            })
    })
}

/// Undirected distance between two tokens through their lowest common ancestor.
pub fn tree_distance(s: &Sentence, a: usize, b: usize) -> usize {
    let ancestors = |mut v: usize| {
        let mut out = vec![v];
        while let Some(h) = s.head_of(v).filter(|&h| h != 0) {
            out.push(h);
            v = h;
        }
        out
    };
    let (pa, pb) = (ancestors(a), ancestors(b));
    for (i, x) in pa.iter().enumerate() {
        if let Some(j) = pb.iter().position(|y| y == x) {
            return i + j;
        }
    }
    unreachable!("tokens of one tree share the top node")
}
