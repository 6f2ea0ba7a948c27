//! Stochastic gradient descent with L2 regularization.
//!
//! The maximized objective is
//!
//! ```text
//! Σ_n log P(y_n | x_n) − c2 · ‖w‖²
//! ```
//!
//! over the N training instances (reported divided by N). Each SGD step on
//! instance n applies `w ← (1 − η_t·λ)·w + η_t·∇ log P(y_n | x_n)` with
//! `λ = 2·c2 / N` and `η_t = η0 / (1 + t / T)`. The decay factor is kept as a
//! separate scalar so a step only touches the weights the instance fires.
//! When η0 is not given it is picked by trying candidate rates for one pass
//! over the first few instances and keeping the one with the lowest
//! regularized loss.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{accumulate, Coord};
use super::{AttributeIndex, CrfError, CrfModel, Instance, LabelSet, Lattice, Result};
use crate::corpus::{Corpus, Tag};
use crate::features::{extract, ExtractedFeatures, FeatureConfig, Lexicons};

const MIN_SCALE: f64 = 1e-20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// L2 coefficient.
    pub c2: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial learning rate; calibrated when absent.
    pub eta0: Option<f64>,
    /// Decay period T of the learning-rate schedule, in updates; defaults
    /// to the number of training instances.
    pub decay_period: Option<f64>,
    /// Instances used to calibrate η0.
    pub calibration_samples: usize,
    /// Attributes seen fewer times than this are dropped.
    pub min_count: usize,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c2: 3.2,
            epochs: 10,
            seed: 42,
            eta0: None,
            decay_period: None,
            calibration_samples: 16,
            min_count: 1,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CrfError::InvalidConfig(m.to_owned()));
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return bad("c2 must be finite and non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.eta0.is_some_and(|e| !(e > 0.0 && e.is_finite())) {
            return bad("eta0 must be positive");
        }
        if self.decay_period.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return bad("decay_period must be positive");
        }
        Ok(())
    }
}

/// Progress after one pass over the training data.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    /// 1-based.
    pub epoch: usize,
    /// Regularized objective divided by the number of instances.
    pub objective: f64,
    /// Mean per-instance log-likelihood.
    pub log_likelihood: f64,
    /// Learning rate of the last update.
    pub eta: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trainer {
    pub features: FeatureConfig,
    pub config: TrainConfig,
}

/// Training data resolved against a frozen label set and attribute index.
struct Prepared {
    labels: LabelSet,
    attributes: AttributeIndex,
    instances: Vec<Instance>,
    gold: Vec<Vec<usize>>,
}

/// Weights stored as `scale · values`.
struct ScaledWeights {
    state: Vec<f64>,
    trans: Vec<f64>,
    scale: f64,
}

impl ScaledWeights {
    fn zeros(state: usize, trans: usize) -> Self {
        ScaledWeights {
            state: vec![0.0; state],
            trans: vec![0.0; trans],
            scale: 1.0,
        }
    }

    fn fold(&mut self) {
        let s = self.scale;
        self.state.iter_mut().chain(self.trans.iter_mut()).for_each(|w| *w *= s);
        self.scale = 1.0;
    }

    fn norm2(&self) -> f64 {
        let raw: f64 = self.state.iter().chain(&self.trans).map(|w| w * w).sum();
        raw * self.scale * self.scale
    }

    fn lattice(&self, num_labels: usize, instance: &Instance) -> Lattice {
        Lattice::from_weights(&self.state, &self.trans, self.scale, num_labels, instance)
    }

    /// One SGD step; returns the log-likelihood before the step.
    fn step(&mut self, num_labels: usize, instance: &Instance, gold: &[usize], eta: f64, lambda: f64) -> f64 {
        let lattice = self.lattice(num_labels, instance);
        let decay = 1.0 - eta * lambda;
        if decay <= 0.0 {
            self.state.fill(0.0);
            self.trans.fill(0.0);
            self.scale = 1.0;
        } else {
            self.scale *= decay;
            if self.scale < MIN_SCALE {
                self.fold();
            }
        }
        let gain = eta / self.scale;
        let (state, trans) = (&mut self.state, &mut self.trans);
        accumulate(&lattice, instance, gold, |coord, g| match coord {
            Coord::State(k) => state[k] += gain * g,
            Coord::Transition(k) => trans[k] += gain * g,
        })
    }
}

impl Trainer {
    pub fn new(features: FeatureConfig, config: TrainConfig) -> Self {
        Trainer { features, config }
    }

    pub fn train(&self, corpus: &Corpus, lexicons: &Lexicons) -> Result<CrfModel> {
        self.train_with(corpus, lexicons, |_, _| {})
    }

    /// Trains and calls `on_epoch` after every epoch with the current model.
    pub fn train_with<F>(&self, corpus: &Corpus, lexicons: &Lexicons, mut on_epoch: F) -> Result<CrfModel>
    where
        F: FnMut(&EpochReport, &CrfModel),
    {
        self.config.validate()?;
        self.features.validate()?;
        let data = self.prepare(corpus, lexicons)?;
        let l = data.labels.len();
        let n = data.instances.len();
        let lambda = 2.0 * self.config.c2 / n as f64;
        let period = self.config.decay_period.unwrap_or(n as f64);
        let eta0 = match self.config.eta0 {
            Some(eta) => eta,
            None => self.calibrate(&data, lambda),
        };

        let mut model = CrfModel::zeros(
            data.labels,
            data.attributes,
            self.features.clone(),
            corpus.layout.without_label(),
        );
        let mut weights = ScaledWeights::zeros(model.state_weights.len(), model.transition_weights.len());
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0usize;
        for epoch in 1..=self.config.epochs {
            if self.config.shuffle {
                order.shuffle(&mut rng);
            }
            let mut eta = eta0;
            for &k in &order {
                eta = eta0 / (1.0 + t as f64 / period);
                weights.step(l, &data.instances[k], &data.gold[k], eta, lambda);
                t += 1;
            }
            weights.fold();
            model.state_weights.copy_from_slice(&weights.state);
            model.transition_weights.copy_from_slice(&weights.trans);

            let ll = total_log_likelihood(&model, &data.instances, &data.gold);
            let report = EpochReport {
                epoch,
                objective: (ll - self.config.c2 * model.norm2()) / n as f64,
                log_likelihood: ll / n as f64,
                eta,
            };
            on_epoch(&report, &model);
        }
        Ok(model)
    }

    fn prepare(&self, corpus: &Corpus, lexicons: &Lexicons) -> Result<Prepared> {
        if corpus.is_empty() {
            return Err(CrfError::EmptyCorpus);
        }
        let mut labels = LabelSet::new();
        let mut gold = Vec::with_capacity(corpus.len());
        for (s, sentence) in corpus.iter().enumerate() {
            let tags: Vec<Tag> = sentence.labels().map_err(|e| match e {
                crate::corpus::CorpusError::Unlabeled { position } => CrfError::Unlabeled { sentence: s, position },
                other => other.into(),
            })?;
            gold.push(tags.into_iter().map(|t| labels.insert(t)).collect::<Vec<_>>());
        }

        let feats: Vec<ExtractedFeatures> = corpus
            .sentences
            .par_iter()
            .enumerate()
            .map(|(s, sentence)| {
                extract(sentence, &self.features, lexicons).map_err(|source| CrfError::Features { sentence: s, source })
            })
            .collect::<Result<_>>()?;

        let attributes = index_attributes(&feats, self.config.min_count);
        let instances = feats
            .par_iter()
            .map(|f| Instance::from_features(&attributes, f))
            .collect();
        Ok(Prepared {
            labels,
            attributes,
            instances,
            gold,
        })
    }

    fn calibrate(&self, data: &Prepared, lambda: f64) -> f64 {
        const CANDIDATES: usize = 12;
        let samples = self.config.calibration_samples.clamp(1, data.instances.len());
        let n = data.instances.len() as f64;
        let l = data.labels.len();
        let reg = self.config.c2 * samples as f64 / n;
        let mut weights = ScaledWeights::zeros(data.attributes.len() * l, l * l);
        let mut best: Option<(f64, f64)> = None;
        for k in 0..CANDIDATES {
            let eta = 1.6 / f64::powi(2.0, k as i32);
            if eta * lambda >= 1.0 {
                continue;
            }
            weights.state.fill(0.0);
            weights.trans.fill(0.0);
            weights.scale = 1.0;
            for s in 0..samples {
                weights.step(l, &data.instances[s], &data.gold[s], eta, lambda);
            }
            let ll: f64 = (0..samples)
                .map(|s| {
                    let lat = weights.lattice(l, &data.instances[s]);
                    lat.path_score(&data.gold[s]) - lat.log_partition()
                })
                .sum();
            let loss = -ll + reg * weights.norm2();
            if loss.is_finite() && best.is_none_or(|(b, _)| loss < b) {
                best = Some((loss, eta));
            }
        }
        match best {
            Some((_, eta)) => eta,
            None => 0.5 / lambda,
        }
    }
}

/// Free-function form of [`Trainer::train`].
pub fn train(corpus: &Corpus, features: &FeatureConfig, config: &TrainConfig, lexicons: &Lexicons) -> Result<CrfModel> {
    Trainer::new(features.clone(), config.clone()).train(corpus, lexicons)
}

fn index_attributes(feats: &[ExtractedFeatures], min_count: usize) -> AttributeIndex {
    let keys = feats.iter().flat_map(|f| {
        f.positions
            .iter()
            .flat_map(|p| p.binary.iter().chain(p.numeric.iter().map(|(k, _)| k)))
    });
    if min_count <= 1 {
        return keys.cloned().collect();
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for k in keys.clone() {
        *counts.entry(k).or_insert(0) += 1;
    }
    keys.filter(|k| counts[k.as_str()] >= min_count).cloned().collect()
}

fn total_log_likelihood(model: &CrfModel, instances: &[Instance], gold: &[Vec<usize>]) -> f64 {
    let per: Vec<f64> = instances
        .par_iter()
        .zip(gold)
        .map(|(inst, g)| {
            let lat = model.lattice(inst);
            lat.path_score(g) - lat.log_partition()
        })
        .collect();
    per.iter().sum()
}
