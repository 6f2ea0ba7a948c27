//! Entity-level evaluation and the feature ablation harness.
//!
//! An entity counts as correct only when its type, first token and last
//! token all match a gold entity. Labels are repaired to valid BIO before
//! spans are read off, following the conlleval convention. Precision is 0
//! when nothing is predicted, recall is 0 when there is no gold entity, and
//! F1 is 0 when both are 0.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{repair_tags, spans_from_bio, Corpus, CorpusError, EntitySpan, Sentence, Tag};
use crate::crf::{CrfError, CrfModel, TrainConfig, Trainer};
use crate::features::{FeatureConfig, Lexicons};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold has {gold} sentences but prediction has {pred}")]
    SentenceCount { gold: usize, pred: usize },
    #[error("sentence {sentence}, token {token}: {detail}")]
    Misaligned {
        sentence: usize,
        token: usize,
        detail: String,
    },
    #[error("{side} sentence {sentence}: token {position} has no label")]
    Unlabeled {
        side: &'static str,
        sentence: usize,
        position: usize,
    },
    #[error("ablation variant names must be unique; `{0}` repeats")]
    DuplicateVariant(String),
    #[error("ablation row `{name}`: {source}")]
    Row {
        name: String,
        #[source]
        source: CrfError,
    },
    #[error(transparent)]
    Crf(#[from] CrfError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;

/// Entity counts for one type (or pooled over all types).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

impl Counts {
    /// Percent.
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.predicted)
    }

    /// Percent.
    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold)
    }

    /// Percent.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }

    fn add(&mut self, other: Counts) {
        self.gold += other.gold;
        self.predicted += other.predicted;
        self.correct += other.correct;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Per-type and micro-averaged scores.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScoreReport {
    pub per_type: BTreeMap<String, Counts>,
    pub overall: Counts,
}

impl ScoreReport {
    pub fn precision(&self) -> f64 {
        self.overall.precision()
    }

    pub fn recall(&self) -> f64 {
        self.overall.recall()
    }

    pub fn f1(&self) -> f64 {
        self.overall.f1()
    }

    fn add_sentence(&mut self, gold: &[EntitySpan], pred: &[EntitySpan]) {
        let gold_set: HashSet<&EntitySpan> = gold.iter().collect();
        for span in gold {
            self.per_type.entry(span.entity_type.clone()).or_default().gold += 1;
        }
        for span in pred {
            let entry = self.per_type.entry(span.entity_type.clone()).or_default();
            entry.predicted += 1;
            if gold_set.contains(span) {
                entry.correct += 1;
            }
        }
    }

    fn finish(mut self) -> Self {
        self.overall = Counts::default();
        for c in self.per_type.values() {
            self.overall.add(*c);
        }
        self
    }

    /// Rows of `(type, counts)` followed by `("overall", counts)`.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &Counts)> {
        self.per_type
            .iter()
            .map(|(t, c)| (t.as_str(), c))
            .chain(std::iter::once(("overall", &self.overall)))
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>9} {:>9} {:>9} {:>7} {:>7} {:>7}",
            "type", "precision", "recall", "f1", "gold", "pred", "correct"
        )?;
        for (name, c) in self.rows() {
            writeln!(
                f,
                "{:<10} {:>9.2} {:>9.2} {:>9.2} {:>7} {:>7} {:>7}",
                name,
                c.precision(),
                c.recall(),
                c.f1(),
                c.gold,
                c.predicted,
                c.correct
            )?;
        }
        Ok(())
    }
}

fn sentence_tags(sentence: &Sentence, side: &'static str, index: usize) -> Result<Vec<Tag>> {
    sentence.labels().map_err(|e| match e {
        CorpusError::Unlabeled { position } => EvalError::Unlabeled {
            side,
            sentence: index,
            position,
        },
        other => other.into(),
    })
}

/// Scores predicted labels against gold labels over aligned sentences.
pub fn score_sentences(gold: &[Sentence], pred: &[Sentence]) -> Result<ScoreReport> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut report = ScoreReport::default();
    for (s, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::Misaligned {
                sentence: s,
                token: g.len().min(p.len()),
                detail: format!("gold has {} tokens but prediction has {}", g.len(), p.len()),
            });
        }
        if let Some((t, (a, b))) = g.surfaces().zip(p.surfaces()).enumerate().find(|(_, (a, b))| a != b) {
            return Err(EvalError::Misaligned {
                sentence: s,
                token: t,
                detail: format!("gold token `{a}` differs from predicted `{b}`"),
            });
        }
        let gold_spans = spans_from_bio(&repair_tags(&sentence_tags(g, "gold", s)?))?;
        let pred_spans = spans_from_bio(&repair_tags(&sentence_tags(p, "predicted", s)?))?;
        report.add_sentence(&gold_spans, &pred_spans);
    }
    Ok(report.finish())
}

pub fn score(gold: &Corpus, pred: &Corpus) -> Result<ScoreReport> {
    score_sentences(&gold.sentences, &pred.sentences)
}

/// Tags every sentence of `test` with `model` and scores against its labels.
pub fn evaluate(model: &CrfModel, test: &Corpus, lexicons: &Lexicons) -> Result<ScoreReport> {
    let predicted = test
        .sentences
        .par_iter()
        .map(|s| model.tag(s, lexicons))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    score_sentences(&test.sentences, &predicted)
}

/// One named feature configuration of an ablation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationVariant {
    pub name: String,
    #[serde(default)]
    pub features: FeatureConfig,
}

/// Named feature configurations compared under one training setup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AblationSpec {
    variants: Vec<AblationVariant>,
}

impl AblationSpec {
    pub fn new(variants: Vec<AblationVariant>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &variants {
            if !seen.insert(v.name.as_str()) {
                return Err(EvalError::DuplicateVariant(v.name.clone()));
            }
        }
        Ok(AblationSpec { variants })
    }

    /// The word-representation ablation: everything, everything minus
    /// clusters and embeddings, and word + shapes alone, with embeddings,
    /// and with clusters.
    pub fn word_representations() -> Self {
        let all = FeatureConfig::all();
        let minimal = FeatureConfig::default();
        let variant = |name: &str, features: FeatureConfig| AblationVariant {
            name: name.to_owned(),
            features,
        };
        AblationSpec {
            variants: vec![
                variant("all", all.clone()),
                variant(
                    "all-cluster-w2v",
                    FeatureConfig {
                        cluster: false,
                        embeddings: false,
                        ..all
                    },
                ),
                variant("word+shapes", minimal.clone()),
                variant(
                    "word+shapes+w2v",
                    FeatureConfig {
                        embeddings: true,
                        ..minimal.clone()
                    },
                ),
                variant(
                    "word+shapes+cluster",
                    FeatureConfig {
                        cluster: true,
                        ..minimal
                    },
                ),
            ],
        }
    }

    pub fn variants(&self) -> &[AblationVariant] {
        &self.variants
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AblationRow {
    pub name: String,
    pub report: ScoreReport,
}

/// Seed of the ablation row `name` under the run seed `seed`: FNV-1a over
/// the name, mixed with the seed through a SplitMix64 finalizer.
pub fn row_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Trains one model per variant, tags `test` and scores it. Every row uses
/// `config` with its seed replaced by [`row_seed`], so a row does not
/// depend on which other rows run. Rows come back in variant order.
pub fn run_ablation(
    train: &Corpus,
    test: &Corpus,
    spec: &AblationSpec,
    config: &TrainConfig,
    lexicons: &Lexicons,
) -> Result<Vec<AblationRow>> {
    spec.variants
        .par_iter()
        .map(|v| {
            let row_err = |source: CrfError| EvalError::Row {
                name: v.name.clone(),
                source,
            };
            let config = TrainConfig {
                seed: row_seed(config.seed, &v.name),
                ..config.clone()
            };
            let model = Trainer::new(v.features.clone(), config)
                .train(train, lexicons)
                .map_err(row_err)?;
            let report = evaluate(&model, test, lexicons)?;
            Ok(AblationRow {
                name: v.name.clone(),
                report,
            })
        })
        .collect()
}

/// Aligned plain-text table with one line per row (overall scores).
pub fn render_table(rows: &[AblationRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(7);
    let mut out = format!(
        "{:<width$}  {:>9}  {:>9}  {:>9}\n",
        "setting", "precision", "recall", "f1"
    );
    for row in rows {
        out.push_str(&format!(
            "{:<width$}  {:>9.2}  {:>9.2}  {:>9.2}\n",
            row.name,
            row.report.precision(),
            row.report.recall(),
            row.report.f1()
        ));
    }
    out
}

/// One CSV record: `name,type,precision,recall,f1,gold,pred,correct`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub name: String,
    #[serde(rename = "type")]
    pub entity_type: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub pred: usize,
    pub correct: usize,
}

fn two_decimals(x: f64) -> f64 {
    format!("{x:.2}").parse().expect("formatted float parses")
}

pub fn write_csv<W: io::Write>(rows: &[AblationRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        for (ty, c) in row.report.rows() {
            w.serialize(CsvRecord {
                name: row.name.clone(),
                entity_type: ty.to_owned(),
                precision: two_decimals(c.precision()),
                recall: two_decimals(c.recall()),
                f1: two_decimals(c.f1()),
                gold: c.gold,
                pred: c.predicted,
                correct: c.correct,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(reader: R) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
