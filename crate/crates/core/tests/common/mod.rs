//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnner_core::brown::NgramCounts;
use vnner_core::corpus::{Layout, Tag};
use vnner_core::crf::{AttributeIndex, Instance, LabelSet, Lattice};
use vnner_core::{CrfModel, FeatureConfig};

pub const LABELS: [&str; 4] = ["O", "B-PER", "I-PER", "B-LOC"];

/// A model with random weights plus a random instance and gold path.
pub struct RandomCase {
    pub model: CrfModel,
    pub instance: Instance,
    pub gold: Vec<usize>,
}

pub fn random_case(
    rng: &mut ChaCha8Rng,
    max_len: usize,
    max_labels: usize,
    max_attrs: usize,
    scale: f64,
) -> RandomCase {
    let l = rng.random_range(1..=max_labels);
    let m = rng.random_range(1..=max_attrs);
    let n = rng.random_range(1..=max_len);
    let labels: LabelSet = LABELS[..l].iter().map(|s| s.parse::<Tag>().unwrap()).collect();
    let attrs: AttributeIndex = (0..m).map(|a| format!("a{a}")).collect();
    let mut model = CrfModel::zeros(
        labels,
        attrs,
        FeatureConfig::none(),
        Layout::surface_label().without_label(),
    );
    for w in model
        .state_weights
        .iter_mut()
        .chain(model.transition_weights.iter_mut())
    {
        *w = rng.random_range(-scale..scale);
    }
    let positions = (0..n)
        .map(|_| {
            let k = rng.random_range(0..=m.min(4));
            let mut chosen: Vec<usize> = (0..m).collect();
            for i in 0..k {
                let j = rng.random_range(i..m);
                chosen.swap(i, j);
            }
            chosen[..k]
                .iter()
                .map(|&a| {
                    let v = if rng.random_bool(0.7) {
                        1.0
                    } else {
                        rng.random_range(-2.0..2.0)
                    };
                    (a, v)
                })
                .collect()
        })
        .collect();
    let gold = (0..n).map(|_| rng.random_range(0..l)).collect();
    RandomCase {
        model,
        instance: Instance { positions },
        gold,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Score of `path` summed straight from the weights.
pub fn direct_score(model: &CrfModel, inst: &Instance, path: &[usize]) -> f64 {
    let l = model.labels.len();
    let mut s = 0.0;
    for (i, attrs) in inst.positions.iter().enumerate() {
        for &(a, v) in attrs {
            s += v * model.state_weights[a * l + path[i]];
        }
        if i > 0 {
            s += model.transition_weights[path[i - 1] * l + path[i]];
        }
    }
    s
}

/// Every label sequence of length `n` over `l` labels.
pub fn all_paths(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..l).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

/// Score of `path` from the lattice's node and edge scores, left to right.
pub fn lattice_path_score(lat: &Lattice, path: &[usize]) -> f64 {
    let mut s = lat.state(0, path[0]);
    for i in 1..path.len() {
        s = s + lat.trans(path[i - 1], path[i]) + lat.state(i, path[i]);
    }
    s
}

/// The maximum lattice path score over every label sequence.
pub fn enumerated_max(lat: &Lattice) -> f64 {
    all_paths(lat.len(), lat.num_labels())
        .iter()
        .map(|p| lattice_path_score(lat, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub struct Enumerated {
    pub log_z: f64,
    /// Maximum of [`direct_score`] over all paths.
    pub best_score: f64,
    /// `[i][y]`
    pub state: Vec<Vec<f64>>,
    /// `[i][prev][y]` for the edge joining `i - 1` and `i`; index 0 unused.
    pub edges: Vec<Vec<Vec<f64>>>,
}

pub fn enumerate(model: &CrfModel, inst: &Instance) -> Enumerated {
    let l = model.labels.len();
    let n = inst.positions.len();
    let paths = all_paths(n, l);
    let scores: Vec<f64> = paths.iter().map(|p| direct_score(model, inst, p)).collect();
    let best_score = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - best_score).exp()).sum();
    let log_z = best_score + z.ln();
    let mut state = vec![vec![0.0; l]; n];
    let mut edges = vec![vec![vec![0.0; l]; l]; n];
    for (p, s) in paths.iter().zip(&scores) {
        let prob = (s - log_z).exp();
        for i in 0..n {
            state[i][p[i]] += prob;
            if i > 0 {
                edges[i][p[i - 1]][p[i]] += prob;
            }
        }
    }
    Enumerated {
        log_z,
        best_score,
        state,
        edges,
    }
}

/// Log-likelihood of `gold` by enumeration.
pub fn enumerated_log_likelihood(model: &CrfModel, inst: &Instance, gold: &[usize]) -> f64 {
    direct_score(model, inst, gold) - enumerate(model, inst).log_z
}

/// AMI from probabilities, summing over the symmetric class joint.
pub fn oracle_ami(partition: &[Vec<&str>], counts: &NgramCounts) -> f64 {
    let class: HashMap<&str, usize> = partition
        .iter()
        .enumerate()
        .flat_map(|(c, ws)| ws.iter().map(move |w| (*w, c)))
        .collect();
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for ((a, b), &n) in &counts.bigrams {
        if let (Some(&ca), Some(&cb)) = (class.get(a.as_str()), class.get(b.as_str())) {
            *joint.entry((ca, cb)).or_default() += n as f64;
            *joint.entry((cb, ca)).or_default() += n as f64;
        }
    }
    let total: f64 = joint.values().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut left = vec![0.0; partition.len()];
    let mut right = vec![0.0; partition.len()];
    for (&(c, d), &w) in &joint {
        left[c] += w / total;
        right[d] += w / total;
    }
    joint
        .iter()
        .map(|(&(c, d), &w)| {
            let p = w / total;
            p * (p / (left[c] * right[d])).ln()
        })
        .sum()
}

/// Every partition of `words` into exactly `k` non-empty blocks.
pub fn partitions<'a>(words: &[&'a str], k: usize) -> Vec<Vec<Vec<&'a str>>> {
    fn go<'a>(words: &[&'a str], k: usize, acc: &mut Vec<Vec<&'a str>>, out: &mut Vec<Vec<Vec<&'a str>>>) {
        let Some((first, rest)) = words.split_first() else {
            if acc.len() == k {
                out.push(acc.clone());
            }
            return;
        };
        for b in 0..acc.len() {
            acc[b].push(first);
            go(rest, k, acc, out);
            acc[b].pop();
        }
        if acc.len() < k {
            acc.push(vec![first]);
            go(rest, k, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(words, k, &mut Vec::new(), &mut out);
    out
}

/// The best `k`-partition of `words` by exhaustive search, with its AMI.
pub fn best_partition<'a>(words: &[&'a str], k: usize, counts: &NgramCounts) -> (Vec<Vec<&'a str>>, f64) {
    partitions(words, k)
        .into_iter()
        .map(|p| {
            let a = oracle_ami(&p, counts);
            (p, a)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Partition as a set of sorted word sets, for order-free comparison.
pub fn canonical(partition: &[Vec<&str>]) -> Vec<Vec<String>> {
    let mut blocks: Vec<Vec<String>> = partition
        .iter()
        .map(|b| {
            let mut v: Vec<String> = b.iter().map(|w| w.to_string()).collect();
            v.sort();
            v
        })
        .collect();
    blocks.sort();
    blocks
}

pub fn toy_counts() -> NgramCounts {
    let mut counts = NgramCounts::default();
    for line in ["a c", "a d", "b c", "b d", "c a", "c b", "d a", "d b"] {
        counts.add_line(line);
    }
    counts
}

/// Random text over `vocab` words with a few strong context patterns.
pub fn random_counts(rng: &mut ChaCha8Rng, vocab: usize, lines: usize) -> NgramCounts {
    let mut counts = NgramCounts::default();
    for _ in 0..lines {
        let len = rng.random_range(2..=8);
        let words: Vec<String> = (0..len).map(|_| format!("v{}", rng.random_range(0..vocab))).collect();
        counts.add_line(&words.join(" "));
    }
    counts
}

pub fn words_of(counts: &NgramCounts) -> Vec<&str> {
    let set: HashSet<&str> = counts.unigrams.keys().map(String::as_str).collect();
    let mut v: Vec<&str> = set.into_iter().collect();
    v.sort();
    v
}

/// State score of label `y` at position `i`, straight from the weights.
pub fn direct_score_at(model: &CrfModel, inst: &Instance, i: usize, y: usize) -> f64 {
    let l = model.labels.len();
    inst.positions[i]
        .iter()
        .map(|&(a, v)| v * model.state_weights[a * l + y])
        .sum()
}
