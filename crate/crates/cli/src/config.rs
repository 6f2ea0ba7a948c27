//! TOML run configuration.
//!
//! ```toml
//! layout = "surface,pos,chunk,label"
//!
//! [features]
//! word = true
//! word_shapes = true
//! cluster = true
//!
//! [train]
//! c2 = 3.2
//! epochs = 10
//!
//! [lexicons]
//! clusters = "paths.txt"       # relative to this file
//! embeddings = "vectors.txt"
//!
//! [[ablation]]
//! name = "word+shapes"
//! features = { word = true, word_shapes = true }
//! ```

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use vnner_core::eval::AblationVariant;
use vnner_core::{ClusterLexicon, Column, EmbeddingLexicon, FeatureConfig, Layout, Lexicons, TrainConfig};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub clusters: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_layout")]
    layout: String,
    #[serde(default)]
    features: FeatureConfig,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    lexicons: LexiconPaths,
    #[serde(default)]
    ablation: Vec<AblationVariant>,
}

fn default_layout() -> String {
    "surface,label".to_owned()
}

#[derive(Debug)]
pub struct RunConfig {
    /// Layout of labeled input files.
    pub layout: Layout,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    /// Absolute or cwd-relative paths, checked to exist.
    pub lexicons: LexiconPaths,
    pub ablation: Vec<AblationVariant>,
}

const STAGE: &str = "loading config";

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(STAGE, path, e))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| CliError::file(STAGE, path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: Option<PathBuf>| -> Result<Option<PathBuf>, CliError> {
            let Some(p) = p else { return Ok(None) };
            let full = base.join(p);
            if !full.is_file() {
                return Err(CliError::file(
                    STAGE,
                    path,
                    format!("lexicon `{}` does not exist", full.display()),
                ));
            }
            Ok(Some(full))
        };
        let layout: Layout = raw.layout.parse().map_err(|e| CliError::file(STAGE, path, e))?;
        if !layout.has(Column::Label) {
            return Err(CliError::file(STAGE, path, "layout must include a label column"));
        }
        let config = RunConfig {
            layout,
            features: raw.features,
            train: raw.train,
            lexicons: LexiconPaths {
                clusters: resolve(raw.lexicons.clusters)?,
                embeddings: resolve(raw.lexicons.embeddings)?,
            },
            ablation: raw.ablation,
        };
        config
            .check(&config.features, "[features]")
            .map_err(|m| CliError::file(STAGE, path, m))?;
        for v in &config.ablation {
            config
                .check(&v.features, &format!("ablation `{}`", v.name))
                .map_err(|m| CliError::file(STAGE, path, m))?;
        }
        config.train.validate().map_err(|e| CliError::file(STAGE, path, e))?;
        Ok(config)
    }

    /// Cross-checks toggles against the layout and lexicon paths.
    fn check(&self, f: &FeatureConfig, what: &str) -> Result<(), String> {
        f.validate().map_err(|e| format!("{what}: {e}"))?;
        let missing_column =
            |toggle: &str, col: &str| format!("{what}: `{toggle}` needs a `{col}` column in the layout");
        if f.pos && !self.layout.has(Column::Pos) {
            return Err(missing_column("pos", "pos"));
        }
        if f.chunk && !self.layout.has(Column::Chunk) {
            return Err(missing_column("chunk", "chunk"));
        }
        if f.cluster && self.lexicons.clusters.is_none() {
            return Err(format!("{what}: `cluster` needs [lexicons] clusters"));
        }
        if f.embeddings && self.lexicons.embeddings.is_none() {
            return Err(format!("{what}: `embeddings` needs [lexicons] embeddings"));
        }
        Ok(())
    }
}

/// Loads the lexicons any of `configs` needs.
pub fn load_lexicons<'a>(
    paths: &LexiconPaths,
    configs: impl IntoIterator<Item = &'a FeatureConfig>,
) -> Result<Lexicons, CliError> {
    let (mut clusters, mut embeddings) = (false, false);
    for f in configs {
        clusters |= f.cluster;
        embeddings |= f.embeddings;
    }
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .map_err(|e| CliError::file("loading lexicon", p, e))
    };
    let mut lex = Lexicons::none();
    if let (true, Some(p)) = (clusters, &paths.clusters) {
        lex.clusters = Some(ClusterLexicon::read(open(p)?).map_err(|e| CliError::file("loading lexicon", p, e))?);
    }
    if let (true, Some(p)) = (embeddings, &paths.embeddings) {
        lex.embeddings = Some(EmbeddingLexicon::read(open(p)?).map_err(|e| CliError::file("loading lexicon", p, e))?);
    }
    Ok(lex)
}
