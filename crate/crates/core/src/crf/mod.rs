//! Linear-chain conditional random field.
//!
//! A label sequence `y` for observations `x` scores
//!
//! ```text
//! score(y, x) = Σ_i [ Σ_a v_a(x, i) · state[a, y_i] + trans[y_{i-1}, y_i] ]
//! P(y | x)    = exp(score(y, x)) / Z(x)
//! ```
//!
//! where `v_a(x, i)` is 1 for an active binary attribute, the raw value for
//! a numeric one, and 0 otherwise. All inference runs in the log domain.

mod gradient;
mod io;
mod lattice;
mod train;

use std::collections::BTreeMap;

use indexmap::IndexSet;
use thiserror::Error;

use crate::corpus::{repair_tags, CorpusError, Layout, Sentence, Tag};
use crate::features::{extract, ExtractedFeatures, FeatureConfig, FeatureError, Lexicons};

pub use gradient::{instance_gradient, log_likelihood, Gradient};
pub use io::{load_model, save_model, MAGIC, VERSION};
pub use lattice::{log_sum_exp, Lattice, Marginals};
pub use train::{train, EpochReport, TrainConfig, Trainer};

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("sentence {sentence}: token {position} has no label")]
    Unlabeled { sentence: usize, position: usize },
    #[error("sentence {sentence}: {source}")]
    Features {
        sentence: usize,
        #[source]
        source: FeatureError,
    },
    #[error(transparent)]
    FeatureConfig(#[from] FeatureError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unsupported model version {found} (expected {expected})")]
    Version { found: String, expected: u32 },
}

pub type Result<T> = std::result::Result<T, CrfError>;

/// Ordered, distinct output labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelSet {
    labels: IndexSet<Tag>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `tag`, registering it if new.
    pub fn insert(&mut self, tag: Tag) -> usize {
        self.labels.insert_full(tag).0
    }

    pub fn index(&self, tag: &Tag) -> Option<usize> {
        self.labels.get_index_of(tag)
    }

    pub fn get(&self, index: usize) -> Option<&Tag> {
        self.labels.get_index(index)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tag> {
        self.labels.iter()
    }
}

impl FromIterator<Tag> for LabelSet {
    fn from_iter<I: IntoIterator<Item = Tag>>(iter: I) -> Self {
        LabelSet {
            labels: iter.into_iter().collect(),
        }
    }
}

/// Attribute key → dense id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttributeIndex {
    keys: IndexSet<String>,
}

impl AttributeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>) -> usize {
        self.keys.insert_full(key.into()).0
    }

    pub fn id(&self, key: &str) -> Option<usize> {
        self.keys.get_index_of(key)
    }

    pub fn key(&self, id: usize) -> Option<&str> {
        self.keys.get_index(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }
}

impl FromIterator<String> for AttributeIndex {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        AttributeIndex {
            keys: iter.into_iter().collect(),
        }
    }
}

/// Features of one sentence resolved to attribute ids: per position, a list
/// of `(attribute id, value)`. Attributes unknown to the index are dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Instance {
    pub positions: Vec<Vec<(usize, f64)>>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn from_features(index: &AttributeIndex, feats: &ExtractedFeatures) -> Self {
        let positions = feats
            .positions
            .iter()
            .map(|p| {
                let binary = p.binary.iter().filter_map(|k| index.id(k).map(|id| (id, 1.0)));
                let numeric = p.numeric.iter().filter_map(|(k, v)| index.id(k).map(|id| (id, *v)));
                binary.chain(numeric).collect()
            })
            .collect();
        Instance { positions }
    }
}

/// A trained model.
///
/// `state_weights` is row-major `[attribute × label]`; `transition_weights`
/// is row-major `[previous label × label]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfModel {
    pub labels: LabelSet,
    pub attributes: AttributeIndex,
    pub state_weights: Vec<f64>,
    pub transition_weights: Vec<f64>,
    pub feature_config: FeatureConfig,
    /// Input columns expected at tagging time (no label column).
    pub layout: Layout,
    /// Free-form string metadata persisted with the model.
    pub metadata: BTreeMap<String, String>,
}

impl CrfModel {
    /// An all-zero model over the given labels and attributes.
    pub fn zeros(labels: LabelSet, attributes: AttributeIndex, feature_config: FeatureConfig, layout: Layout) -> Self {
        let l = labels.len();
        CrfModel {
            state_weights: vec![0.0; attributes.len() * l],
            transition_weights: vec![0.0; l * l],
            labels,
            attributes,
            feature_config,
            layout,
            metadata: BTreeMap::new(),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn state_weight(&self, attribute: usize, label: usize) -> f64 {
        self.state_weights[attribute * self.num_labels() + label]
    }

    pub fn state_weight_mut(&mut self, attribute: usize, label: usize) -> &mut f64 {
        let l = self.num_labels();
        &mut self.state_weights[attribute * l + label]
    }

    pub fn transition_weight(&self, prev: usize, label: usize) -> f64 {
        self.transition_weights[prev * self.num_labels() + label]
    }

    pub fn transition_weight_mut(&mut self, prev: usize, label: usize) -> &mut f64 {
        let l = self.num_labels();
        &mut self.transition_weights[prev * l + label]
    }

    /// Squared L2 norm of all weights.
    pub fn norm2(&self) -> f64 {
        self.state_weights
            .iter()
            .chain(&self.transition_weights)
            .map(|w| w * w)
            .sum()
    }

    pub fn instance(&self, feats: &ExtractedFeatures) -> Instance {
        Instance::from_features(&self.attributes, feats)
    }

    /// Per-position state scores and transition scores for `feats`.
    pub fn build_lattice(&self, feats: &ExtractedFeatures) -> Lattice {
        self.lattice(&self.instance(feats))
    }

    pub fn lattice(&self, instance: &Instance) -> Lattice {
        Lattice::from_weights(
            &self.state_weights,
            &self.transition_weights,
            1.0,
            self.num_labels(),
            instance,
        )
    }

    /// Label indices of `gold`, or `None` if it uses a label the model does
    /// not know.
    pub fn label_indices(&self, gold: &[Tag]) -> Option<Vec<usize>> {
        gold.iter().map(|t| self.labels.index(t)).collect()
    }

    /// Decodes the best label sequence for `sentence` and repairs it to a
    /// valid BIO sequence. Existing labels are ignored.
    pub fn tag(&self, sentence: &Sentence, lexicons: &Lexicons) -> Result<Sentence> {
        let feats = extract(sentence, &self.feature_config, lexicons)?;
        let (path, _) = self.build_lattice(&feats).viterbi();
        let tags: Vec<Tag> = path
            .into_iter()
            .map(|y| self.labels.get(y).expect("decoded label in range").clone())
            .collect();
        Ok(sentence.with_labels(repair_tags(&tags)))
    }
}

/// Free-function form of [`CrfModel::tag`].
pub fn tag(model: &CrfModel, sentence: &Sentence, lexicons: &Lexicons) -> Result<Sentence> {
    model.tag(sentence, lexicons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{validate_bio, Token};
    use crate::features::PositionFeatures;

    fn labels(names: &[&str]) -> LabelSet {
        names.iter().map(|n| n.parse::<Tag>().unwrap()).collect()
    }

    fn model(attrs: &[&str], names: &[&str]) -> CrfModel {
        CrfModel::zeros(
            labels(names),
            attrs.iter().map(|s| s.to_string()).collect(),
            FeatureConfig {
                word: true,
                ..FeatureConfig::none()
            },
            Layout::surface_label().without_label(),
        )
    }

    type Position<'a> = (Vec<&'a str>, Vec<(&'a str, f64)>);

    fn feats(positions: Vec<Position>) -> ExtractedFeatures {
        ExtractedFeatures {
            positions: positions
                .into_iter()
                .map(|(b, n)| PositionFeatures {
                    binary: b.into_iter().map(String::from).collect(),
                    numeric: n.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn zero_model_lattice_is_zero() {
        let m = model(&["a"], &["O", "B-PER"]);
        let lat = m.build_lattice(&feats(vec![(vec!["a"], vec![]), (vec!["zz"], vec![])]));
        assert!(lat.state_scores().iter().all(|&s| s == 0.0));
        assert!(lat.transition_scores().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn lattice_sums_binary_and_numeric_attributes() {
        let mut m = model(&["a", "e"], &["O", "B-PER"]);
        *m.state_weight_mut(0, 1) = 2.0;
        *m.state_weight_mut(1, 0) = 4.0;
        let lat = m.build_lattice(&feats(vec![(vec!["a", "unknown"], vec![("e", 0.5)])]));
        assert_eq!(lat.state(0, 1), 2.0);
        assert_eq!(lat.state(0, 0), 2.0);
    }

    #[test]
    fn empty_feature_model_tags_label_zero() {
        let m = model(&[], &["O", "B-PER", "I-PER"]);
        let s = Sentence::new(vec![Token::new("x").unwrap(), Token::new("y").unwrap()]).unwrap();
        let out = m.tag(&s, &Lexicons::none()).unwrap();
        assert_eq!(out.labels().unwrap(), vec![Tag::Outside, Tag::Outside]);
    }

    #[test]
    fn tag_output_is_repaired() {
        let mut m = model(&[], &["I-PER", "O"]);
        *m.transition_weight_mut(0, 0) = 1.0;
        let s = Sentence::new(vec![Token::new("x").unwrap(), Token::new("y").unwrap()]).unwrap();
        let out = m.tag(&s, &Lexicons::none()).unwrap();
        assert!(validate_bio(&out).unwrap().is_empty());
        assert_eq!(out.labels().unwrap()[0], "B-PER".parse().unwrap());
    }
}
