//! Brown clustering.
//!
//! Words are grouped to maximize the average mutual information (AMI) of a
//! class-bigram model, using the windowed greedy procedure: the `C` most
//! frequent words start as singleton clusters, every further word (in
//! frequency order) enters as cluster `C + 1` and the cheapest pair is
//! merged, and finally the `C` clusters are merged down to one root. The
//! merge history above the `C` leaves is a binary tree whose root-to-leaf
//! paths (left = `0`, right = `1`) name the clusters.
//!
//! Adjacent word pairs are counted in both orientations, so the class joint
//! distribution is symmetric:
//!
//! ```text
//! W(c, d) = n(c, d) + n(d, c)        S = Σ W(c, d)        w(c) = Σ_d W(c, d)
//! AMI     = Σ_{c,d} W(c, d)/S · ln( W(c, d) · S / (w(c) · w(d)) )
//! ```
//!
//! With `f(x) = x ln x` this is `(Σ f(W) − 2 Σ f(w)) / S + ln S`, which is
//! what the clusterer maintains incrementally. Merge losses are cached per
//! pair and updated in O(K) per step, giving O(K²) work per merge for
//! K = C + 1 active clusters.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::ClusterLexicon;

#[derive(Debug, Error)]
pub enum BrownError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("input text contains no tokens")]
    EmptyInput,
    #[error("vocabulary has {vocab} words with frequency >= {min_freq}, fewer than the {clusters} clusters requested")]
    VocabularyTooSmall {
        vocab: usize,
        clusters: usize,
        min_freq: u64,
    },
    #[error("cluster count must be at least 2, got {0}")]
    TooFewClusters(usize),
}

pub type Result<T> = std::result::Result<T, BrownError>;

/// Unigram and within-line bigram counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NgramCounts {
    pub unigrams: HashMap<String, u64>,
    pub bigrams: HashMap<(String, String), u64>,
    pub total: u64,
}

impl NgramCounts {
    /// Adds one whitespace-tokenized sentence.
    pub fn add_line(&mut self, line: &str) {
        let mut prev: Option<&str> = None;
        for word in line.split_whitespace() {
            *self.unigrams.entry(word.to_owned()).or_insert(0) += 1;
            self.total += 1;
            if let Some(p) = prev {
                *self.bigrams.entry((p.to_owned(), word.to_owned())).or_insert(0) += 1;
            }
            prev = Some(word);
        }
    }

    /// Counts restricted to `keep`: unigrams of kept words and bigrams whose
    /// words are both kept.
    pub fn restrict(&self, keep: &HashSet<&str>) -> NgramCounts {
        let unigrams: HashMap<String, u64> = self
            .unigrams
            .iter()
            .filter(|(w, _)| keep.contains(w.as_str()))
            .map(|(w, &c)| (w.clone(), c))
            .collect();
        let bigrams = self
            .bigrams
            .iter()
            .filter(|((a, b), _)| keep.contains(a.as_str()) && keep.contains(b.as_str()))
            .map(|(k, &c)| (k.clone(), c))
            .collect();
        NgramCounts {
            total: unigrams.values().sum(),
            unigrams,
            bigrams,
        }
    }

    /// Words sorted by descending count, ties by the word itself.
    pub fn vocabulary(&self, min_freq: u64) -> Vec<(&str, u64)> {
        let mut vocab: Vec<(&str, u64)> = self
            .unigrams
            .iter()
            .filter(|(_, &c)| c >= min_freq)
            .map(|(w, &c)| (w.as_str(), c))
            .collect();
        vocab.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        vocab
    }
}

/// Counts unigrams and bigrams of a text with one sentence per line.
/// Bigrams never cross a line boundary.
pub fn count_ngrams<R: BufRead>(reader: R) -> Result<NgramCounts> {
    let mut counts = NgramCounts::default();
    for line in reader.lines() {
        counts.add_line(&line?);
    }
    if counts.total == 0 {
        return Err(BrownError::EmptyInput);
    }
    Ok(counts)
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// AMI of the class-bigram model induced by `assignment` (word → cluster).
///
/// Only bigrams whose words are both assigned contribute; an empty model
/// has AMI 0.
pub fn ami(assignment: &HashMap<String, usize>, counts: &NgramCounts) -> f64 {
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for ((a, b), &n) in &counts.bigrams {
        let (Some(&ca), Some(&cb)) = (assignment.get(a), assignment.get(b)) else {
            continue;
        };
        *joint.entry((ca, cb)).or_insert(0.0) += n as f64;
        *joint.entry((cb, ca)).or_insert(0.0) += n as f64;
    }
    let total: f64 = joint.values().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut marginal: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(c, _), &w) in &joint {
        *marginal.entry(c).or_insert(0.0) += w;
    }
    joint
        .iter()
        .map(|(&(c, d), &w)| w / total * (w * total / (marginal[&c] * marginal[&d])).ln())
        .sum()
}

/// Parameters of a clustering run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRun {
    /// Number of leaf clusters.
    pub clusters: usize,
    /// Words seen fewer times are left unclustered.
    pub min_freq: u64,
    /// Recorded for provenance; the procedure itself makes no random choices.
    pub seed: u64,
}

impl Default for ClusterRun {
    fn default() -> Self {
        ClusterRun {
            clusters: 1000,
            min_freq: 1,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf { words: Vec<(String, u64)> },
    Internal { left: usize, right: usize },
}

/// Binary merge hierarchy over the leaf clusters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeTree {
    nodes: Vec<Node>,
    root: usize,
}

impl MergeTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Leaves with their bit-strings, in left-to-right order. A tree that is
    /// a single leaf names it `0`.
    pub fn leaves(&self) -> Vec<(String, &[(String, u64)])> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, String::new())];
        while let Some((node, path)) = stack.pop() {
            match &self.nodes[node] {
                Node::Leaf { words } => {
                    let bits = if path.is_empty() { "0".to_owned() } else { path };
                    out.push((bits, words.as_slice()));
                }
                Node::Internal { left, right } => {
                    stack.push((*right, format!("{path}1")));
                    stack.push((*left, format!("{path}0")));
                }
            }
        }
        out
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn lexicon(&self) -> ClusterLexicon {
        self.leaves()
            .into_iter()
            .flat_map(|(bits, words)| words.iter().map(move |(w, _)| (w.clone(), bits.clone())))
            .collect()
    }
}

/// Writes `bitstring<TAB>word<TAB>count` lines, leaves in bit-string order
/// and words by descending count.
pub fn write_paths<W: Write>(tree: &MergeTree, mut w: W) -> io::Result<()> {
    let mut leaves = tree.leaves();
    leaves.sort_by(|a, b| a.0.cmp(&b.0));
    for (bits, words) in leaves {
        let mut words = words.to_vec();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for (word, count) in words {
            writeln!(w, "{bits}\t{word}\t{count}")?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Merges while words are still being added.
    Window,
    /// Merges of the final clusters into the hierarchy.
    Hierarchy,
}

/// One greedy merge, recorded by [`cluster_traced`].
#[derive(Clone, Debug, PartialEq)]
pub struct MergeStep {
    pub phase: Phase,
    /// Active clusters (by cluster id) just before the merge.
    pub before: Vec<(usize, Vec<String>)>,
    /// Cluster ids merged, lower first.
    pub merged: (usize, usize),
    /// Incrementally maintained AMI before and after the merge.
    pub ami_before: f64,
    pub ami_after: f64,
}

/// Result of a clustering run.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub tree: MergeTree,
    pub lexicon: ClusterLexicon,
}

pub fn cluster(counts: &NgramCounts, run: &ClusterRun) -> Result<Clustering> {
    Clusterer::new(counts, run, false).map(Clusterer::run).map(|(c, _)| c)
}

/// [`cluster`], also returning every merge step.
pub fn cluster_traced(counts: &NgramCounts, run: &ClusterRun) -> Result<(Clustering, Vec<MergeStep>)> {
    Clusterer::new(counts, run, true).map(Clusterer::run)
}

struct Clusterer<'a> {
    vocab: Vec<(&'a str, u64)>,
    /// Symmetric co-occurrence with other vocabulary words.
    adjacency: Vec<Vec<(usize, f64)>>,
    /// `2 · n(u, u)`
    self_loops: Vec<f64>,
    capacity: usize,
    /// Slot data; a slot holds one active cluster.
    slot_id: Vec<usize>,
    slot_words: Vec<Vec<usize>>,
    slot_node: Vec<usize>,
    active: Vec<bool>,
    word_slot: Vec<Option<usize>>,
    /// `W` between slots, row-major `capacity × capacity`.
    joint: Vec<f64>,
    marginal: Vec<f64>,
    /// Cached `Σ_{d ∉ {i, j}} f(W_id + W_jd) − f(W_id) − f(W_jd)`.
    cross: Vec<f64>,
    sum_f_joint: f64,
    total: f64,
    next_id: usize,
    nodes: Vec<Node>,
    trace: Option<Vec<MergeStep>>,
}

impl<'a> Clusterer<'a> {
    fn new(counts: &'a NgramCounts, run: &ClusterRun, trace: bool) -> Result<Self> {
        if run.clusters < 2 {
            return Err(BrownError::TooFewClusters(run.clusters));
        }
        let vocab = counts.vocabulary(run.min_freq);
        if vocab.len() < run.clusters {
            return Err(BrownError::VocabularyTooSmall {
                vocab: vocab.len(),
                clusters: run.clusters,
                min_freq: run.min_freq,
            });
        }
        let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
        let mut neighbor: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vocab.len()];
        let mut self_loops = vec![0.0; vocab.len()];
        for ((a, b), &n) in &counts.bigrams {
            let (Some(&u), Some(&v)) = (index.get(a.as_str()), index.get(b.as_str())) else {
                continue;
            };
            if u == v {
                self_loops[u] += 2.0 * n as f64;
            } else {
                *neighbor[u].entry(v).or_insert(0.0) += n as f64;
                *neighbor[v].entry(u).or_insert(0.0) += n as f64;
            }
        }
        let adjacency = neighbor.into_iter().map(|m| m.into_iter().collect()).collect();
        let capacity = run.clusters + 1;
        Ok(Clusterer {
            adjacency,
            self_loops,
            capacity,
            slot_id: vec![usize::MAX; capacity],
            slot_words: vec![Vec::new(); capacity],
            slot_node: vec![usize::MAX; capacity],
            active: vec![false; capacity],
            word_slot: vec![None; vocab.len()],
            joint: vec![0.0; capacity * capacity],
            marginal: vec![0.0; capacity],
            cross: vec![0.0; capacity * capacity],
            sum_f_joint: 0.0,
            total: 0.0,
            next_id: 0,
            nodes: Vec::new(),
            trace: trace.then(Vec::new),
            vocab,
        })
    }

    fn w(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.capacity + j]
    }

    fn set_w(&mut self, i: usize, j: usize, v: f64) {
        self.joint[i * self.capacity + j] = v;
        self.joint[j * self.capacity + i] = v;
    }

    fn active_slots(&self) -> Vec<usize> {
        let mut slots: Vec<usize> = (0..self.capacity).filter(|&s| self.active[s]).collect();
        slots.sort_by_key(|&s| self.slot_id[s]);
        slots
    }

    fn ami(&self) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        let sum_f_marginal: f64 = (0..self.capacity)
            .filter(|&s| self.active[s])
            .map(|s| xlogx(self.marginal[s]))
            .sum();
        (self.sum_f_joint - 2.0 * sum_f_marginal) / self.total + self.total.ln()
    }

    /// `f(W_id + W_jd) − f(W_id) − f(W_jd)`
    fn cross_term(&self, i: usize, j: usize, d: usize) -> f64 {
        let (a, b) = (self.w(i, d), self.w(j, d));
        xlogx(a + b) - xlogx(a) - xlogx(b)
    }

    fn recompute_cross(&mut self, i: usize) {
        for j in 0..self.capacity {
            if j == i || !self.active[j] {
                continue;
            }
            let sum: f64 = (0..self.capacity)
                .filter(|&d| self.active[d] && d != i && d != j)
                .map(|d| self.cross_term(i, j, d))
                .sum();
            self.cross[i * self.capacity + j] = sum;
            self.cross[j * self.capacity + i] = sum;
        }
    }

    /// Change of `Σ f(W) − 2 Σ f(w)` if `i` and `j` were merged; the AMI
    /// loss is its negation divided by the total.
    fn merge_gain(&self, i: usize, j: usize) -> f64 {
        let (wii, wjj, wij) = (self.w(i, i), self.w(j, j), self.w(i, j));
        let d_joint = 2.0 * self.cross[i * self.capacity + j] + xlogx(wii + wjj + 2.0 * wij)
            - xlogx(wii)
            - xlogx(wjj)
            - 2.0 * xlogx(wij);
        let (mi, mj) = (self.marginal[i], self.marginal[j]);
        let d_marginal = xlogx(mi + mj) - xlogx(mi) - xlogx(mj);
        d_joint - 2.0 * d_marginal
    }

    fn add_word(&mut self, word: usize) {
        let slot = (0..self.capacity).find(|&s| !self.active[s]).expect("a free slot");
        let mut row = vec![0.0; self.capacity];
        for &(v, n) in &self.adjacency[word] {
            if let Some(s) = self.word_slot[v] {
                row[s] += n;
            }
        }
        row[slot] = self.self_loops[word];

        let others: Vec<usize> = (0..self.capacity).filter(|&s| self.active[s]).collect();
        for &d in &others {
            self.set_w(slot, d, row[d]);
            self.marginal[d] += row[d];
            self.sum_f_joint += 2.0 * xlogx(row[d]);
            self.total += 2.0 * row[d];
        }
        self.set_w(slot, slot, row[slot]);
        self.sum_f_joint += xlogx(row[slot]);
        self.total += row[slot];
        self.marginal[slot] = others.iter().map(|&d| row[d]).sum::<f64>() + row[slot];

        for (a, &i) in others.iter().enumerate() {
            for &j in &others[a + 1..] {
                let t = self.cross_term(i, j, slot);
                self.cross[i * self.capacity + j] += t;
                self.cross[j * self.capacity + i] += t;
            }
        }

        self.active[slot] = true;
        self.slot_id[slot] = self.next_id;
        self.next_id += 1;
        self.slot_words[slot] = vec![word];
        self.word_slot[word] = Some(slot);
        self.slot_node[slot] = usize::MAX;
        self.recompute_cross(slot);
    }

    /// Picks the pair with the largest gain; near-ties go to the smallest
    /// `(id, id)`.
    fn best_pair(&self) -> (usize, usize) {
        let slots = self.active_slots();
        let mut gains = Vec::with_capacity(slots.len() * slots.len() / 2);
        let mut max = f64::NEG_INFINITY;
        for (a, &i) in slots.iter().enumerate() {
            for &j in &slots[a + 1..] {
                let g = self.merge_gain(i, j);
                max = max.max(g);
                gains.push((g, i, j));
            }
        }
        let tol = 1e-9 * (1.0 + max.abs());
        let (_, i, j) = gains
            .into_iter()
            .find(|&(g, _, _)| g >= max - tol)
            .expect("at least two active clusters");
        (i, j)
    }

    fn partition(&self) -> Vec<(usize, Vec<String>)> {
        self.active_slots()
            .into_iter()
            .map(|s| {
                let words = self.slot_words[s].iter().map(|&w| self.vocab[w].0.to_owned()).collect();
                (self.slot_id[s], words)
            })
            .collect()
    }

    /// Merges slot `j` into slot `i`.
    fn merge(&mut self, i: usize, j: usize, phase: Phase) {
        let ami_before = self.ami();
        let before = self.trace.is_some().then(|| self.partition());
        let gain = self.merge_gain(i, j);
        let (mi, mj) = (self.marginal[i], self.marginal[j]);
        let d_marginal = xlogx(mi + mj) - xlogx(mi) - xlogx(mj);
        let d_joint = gain + 2.0 * d_marginal;

        let others: Vec<usize> = (0..self.capacity)
            .filter(|&s| self.active[s] && s != i && s != j)
            .collect();
        for (a, &p) in others.iter().enumerate() {
            for &q in &others[a + 1..] {
                let t = self.cross_term(p, q, i) + self.cross_term(p, q, j);
                self.cross[p * self.capacity + q] -= t;
                self.cross[q * self.capacity + p] -= t;
            }
        }
        let merged_self = self.w(i, i) + self.w(j, j) + 2.0 * self.w(i, j);
        for &d in &others {
            let v = self.w(i, d) + self.w(j, d);
            self.set_w(i, d, v);
        }
        self.set_w(i, i, merged_self);
        for d in 0..self.capacity {
            self.set_w(j, d, 0.0);
        }
        self.marginal[i] = mi + mj;
        self.marginal[j] = 0.0;
        self.active[j] = false;
        self.sum_f_joint += d_joint;
        for (a, &p) in others.iter().enumerate() {
            for &q in &others[a + 1..] {
                let t = self.cross_term(p, q, i);
                self.cross[p * self.capacity + q] += t;
                self.cross[q * self.capacity + p] += t;
            }
        }
        self.recompute_cross(i);

        let (id_i, id_j) = (self.slot_id[i], self.slot_id[j]);
        let moved = std::mem::take(&mut self.slot_words[j]);
        for &w in &moved {
            self.word_slot[w] = Some(i);
        }
        self.slot_words[i].extend(moved);
        if phase == Phase::Hierarchy {
            let (left, right) = if id_i < id_j { (i, j) } else { (j, i) };
            let node = self.nodes.len();
            self.nodes.push(Node::Internal {
                left: self.slot_node[left],
                right: self.slot_node[right],
            });
            self.slot_node[i] = node;
        }
        self.slot_id[i] = self.next_id;
        self.next_id += 1;

        let ami_after = self.ami();
        if let Some(trace) = &mut self.trace {
            trace.push(MergeStep {
                phase,
                before: before.expect("traced"),
                merged: (id_i.min(id_j), id_i.max(id_j)),
                ami_before,
                ami_after,
            });
        }
    }

    fn run(mut self) -> (Clustering, Vec<MergeStep>) {
        let c = self.capacity - 1;
        for word in 0..c {
            self.add_word(word);
        }
        for word in c..self.vocab.len() {
            self.add_word(word);
            let (i, j) = self.best_pair();
            self.merge(i, j, Phase::Window);
        }

        for s in self.active_slots() {
            let words = self.slot_words[s]
                .iter()
                .map(|&w| (self.vocab[w].0.to_owned(), self.vocab[w].1))
                .collect();
            self.slot_node[s] = self.nodes.len();
            self.nodes.push(Node::Leaf { words });
        }
        while self.active_slots().len() > 1 {
            let (i, j) = self.best_pair();
            self.merge(i, j, Phase::Hierarchy);
        }
        let root = self.slot_node[self.active_slots()[0]];
        let tree = MergeTree {
            nodes: self.nodes,
            root,
        };
        let lexicon = tree.lexicon();
        (Clustering { tree, lexicon }, self.trace.unwrap_or_default())
    }
}
