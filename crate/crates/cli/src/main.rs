//! `vnner`: train, apply and evaluate CRF named-entity taggers.
//!
//! Progress and results go to stdout. Stderr carries only the final
//! diagnostic of a failed run, so the exit status is 0 exactly when stderr
//! stays empty.

mod config;

use std::fmt::Display;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;
use vnner_core::brown::{cluster, count_ngrams, write_paths, ClusterRun};
use vnner_core::corpus::{read_conll, words_to_syllables, write_conll};
use vnner_core::crf::{load_model, save_model};
use vnner_core::eval::{evaluate, render_table, run_ablation, score, write_csv};
use vnner_core::{AblationSpec, Column, Corpus, CrfModel, Layout, Trainer};

use config::{load_lexicons, LexiconPaths, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{stage}: {path}: {message}")]
    File {
        stage: &'static str,
        path: PathBuf,
        message: String,
    },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl CliError {
    pub fn file(stage: &'static str, path: &Path, message: impl Display) -> Self {
        CliError::File {
            stage,
            path: path.to_owned(),
            message: message.to_string(),
        }
    }

    pub fn stage(stage: &'static str, message: impl Display) -> Self {
        CliError::Stage {
            stage,
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "vnner", version, about = "CRF named-entity recognition toolkit")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, env = "VNNER_SEED", default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a labeled corpus.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        /// Labeled corpus scored after every epoch.
        #[arg(long)]
        dev: Option<PathBuf>,
    },
    /// Append a predicted label column to a corpus.
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Cluster paths file; defaults to the one recorded at training.
        #[arg(long)]
        clusters: Option<PathBuf>,
        /// Embeddings file; defaults to the one recorded at training.
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Score predictions (last column) against gold labels (last column).
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Brown-cluster the words of a one-sentence-per-line text.
    Cluster {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1000)]
        clusters: usize,
        #[arg(long, default_value_t = 1)]
        min_freq: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrite a word-segmented corpus.
    Convert {
        /// Split underscore-joined words into syllables.
        #[arg(long)]
        to_syllables: bool,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Column layout; guessed from the column count when absent.
        #[arg(long)]
        layout: Option<String>,
    },
    /// Train and score one model per `[[ablation]]` entry of the config.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value = "ablation.csv")]
        csv: PathBuf,
    },
}

/// Progress output, silenced by `VNNER_LOG=quiet`.
struct Log {
    quiet: bool,
}

impl Log {
    fn from_env() -> Self {
        let level = std::env::var("VNNER_LOG").unwrap_or_default();
        Log {
            quiet: matches!(level.to_ascii_lowercase().as_str(), "quiet" | "off" | "error" | "0"),
        }
    }

    fn info(&self, message: impl Display) {
        if !self.quiet {
            println!("{message}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log::from_env();
    match run(cli, &log) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli, log: &Log) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            train,
            model_out,
            dev,
        } => cmd_train(&config, &train, &model_out, dev.as_deref(), cli.seed, log),
        Command::Tag {
            model,
            input,
            output,
            clusters,
            embeddings,
        } => cmd_tag(&model, &input, &output, LexiconPaths { clusters, embeddings }, log),
        Command::Eval { gold, pred } => cmd_eval(&gold, &pred),
        Command::Cluster {
            corpus,
            clusters,
            min_freq,
            out,
        } => cmd_cluster(&corpus, clusters, min_freq, &out, cli.seed, log),
        Command::Convert {
            to_syllables,
            input,
            output,
            layout,
        } => cmd_convert(to_syllables, &input, &output, layout.as_deref(), log),
        Command::Ablate {
            config,
            train,
            test,
            csv,
        } => cmd_ablate(&config, &train, &test, &csv, cli.seed, log),
    }
}

fn open(stage: &'static str, path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::file(stage, path, e))
}

fn create(stage: &'static str, path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::file(stage, path, e))
}

fn read_text(stage: &'static str, path: &Path) -> Result<String> {
    let mut text = String::new();
    open(stage, path)?
        .read_to_string(&mut text)
        .map_err(|e| CliError::file(stage, path, e))?;
    Ok(text)
}

fn read_corpus(stage: &'static str, path: &Path, layout: &Layout) -> Result<Corpus> {
    read_conll(open(stage, path)?, layout).map_err(|e| CliError::file(stage, path, e))
}

fn is_blank(line: &str) -> bool {
    line.split([' ', '\t', '\r']).all(str::is_empty)
}

/// Column count of the first non-blank line.
fn arity(text: &str) -> Option<usize> {
    text.lines()
        .find(|l| !is_blank(l))
        .map(|l| l.split([' ', '\t', '\r']).filter(|f| !f.is_empty()).count())
}

/// `surface, _, …, label` for a file with `n` columns.
fn surface_last_label(n: usize) -> std::result::Result<Layout, String> {
    if n < 2 {
        return Err(format!("expected at least 2 columns, found {n}"));
    }
    let mut cols = vec![Column::Surface];
    cols.extend(std::iter::repeat_n(Column::Skip, n - 2));
    cols.push(Column::Label);
    Layout::new(cols).map_err(|e| e.to_string())
}

fn lexicon_paths_from_model(model: &CrfModel, overrides: LexiconPaths) -> LexiconPaths {
    let recorded = |key: &str| model.metadata.get(key).map(PathBuf::from);
    LexiconPaths {
        clusters: overrides.clusters.or_else(|| recorded("clusters")),
        embeddings: overrides.embeddings.or_else(|| recorded("embeddings")),
    }
}

fn cmd_train(config: &Path, train: &Path, model_out: &Path, dev: Option<&Path>, seed: u64, log: &Log) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let lex = load_lexicons(&cfg.lexicons, [&cfg.features])?;
    let corpus = read_corpus("reading training data", train, &cfg.layout)?;
    let dev = dev
        .map(|p| read_corpus("reading dev data", p, &cfg.layout))
        .transpose()?;
    let mut tcfg = cfg.train.clone();
    tcfg.seed = seed;
    log.info(format!(
        "training on {} sentences ({} tokens), {} epochs, seed {seed}",
        corpus.len(),
        corpus.token_count(),
        tcfg.epochs
    ));
    let mut dev_error = None;
    let trainer = Trainer::new(cfg.features.clone(), tcfg);
    let mut model = trainer
        .train_with(&corpus, &lex, |report, model| {
            let mut line = format!(
                "epoch {:>3}  objective {:.6}  log-likelihood {:.6}  eta {:.3e}",
                report.epoch, report.objective, report.log_likelihood, report.eta
            );
            if let Some(dev) = &dev {
                match evaluate(model, dev, &lex) {
                    Ok(r) => line.push_str(&format!("  dev f1 {:.2}", r.f1())),
                    Err(e) => {
                        dev_error.get_or_insert(e);
                    }
                }
            }
            log.info(line);
        })
        .map_err(|e| CliError::stage("training", e))?;
    if let Some(e) = dev_error {
        return Err(CliError::stage("scoring dev data", e));
    }
    model.layout = cfg.layout.without_label();
    for (key, path) in [
        ("clusters", &cfg.lexicons.clusters),
        ("embeddings", &cfg.lexicons.embeddings),
    ] {
        if let Some(p) = path {
            let abs = std::path::absolute(p).map_err(|e| CliError::file("recording lexicon", p, e))?;
            model.metadata.insert(key.to_owned(), abs.display().to_string());
        }
    }
    model.metadata.insert("seed".to_owned(), seed.to_string());
    let mut w = create("writing model", model_out)?;
    save_model(&model, &mut w).map_err(|e| CliError::file("writing model", model_out, e))?;
    w.flush().map_err(|e| CliError::file("writing model", model_out, e))?;
    log.info(format!(
        "wrote {} ({} labels, {} attributes)",
        model_out.display(),
        model.num_labels(),
        model.attributes.len()
    ));
    Ok(())
}

fn cmd_tag(model_path: &Path, input: &Path, output: &Path, overrides: LexiconPaths, log: &Log) -> Result<()> {
    let model =
        load_model(open("loading model", model_path)?).map_err(|e| CliError::file("loading model", model_path, e))?;
    let paths = lexicon_paths_from_model(&model, overrides);
    let lex = load_lexicons(&paths, [&model.feature_config])?;
    let text = read_text("reading input", input)?;
    // A trailing gold column is accepted and kept.
    let layout = match arity(&text) {
        Some(n) if n == model.layout.arity() + 1 => model.layout.with_appended_label(),
        Some(n) if n != model.layout.arity() => {
            return Err(CliError::file(
                "reading input",
                input,
                format!("model expects columns `{}` but the file has {n}", model.layout),
            ))
        }
        _ => model.layout.clone(),
    };
    let corpus = read_conll(text.as_bytes(), &layout).map_err(|e| CliError::file("reading input", input, e))?;
    let mut w = create("writing output", output)?;
    let mut lines = text.lines().filter(|l| !is_blank(l));
    for (k, sentence) in corpus.sentences.iter().enumerate() {
        let tagged = model
            .tag(sentence, &lex)
            .map_err(|e| CliError::stage("tagging", format!("sentence {k}: {e}")))?;
        for token in tagged.tokens() {
            let line = lines.next().expect("one line per token");
            let label = token.label.as_ref().expect("tagged token");
            writeln!(w, "{}\t{label}", line.trim_end()).map_err(|e| CliError::file("writing output", output, e))?;
        }
        writeln!(w).map_err(|e| CliError::file("writing output", output, e))?;
    }
    w.flush().map_err(|e| CliError::file("writing output", output, e))?;
    log.info(format!("tagged {} sentences into {}", corpus.len(), output.display()));
    Ok(())
}

fn read_labeled_last_column(stage: &'static str, path: &Path) -> Result<Corpus> {
    let text = read_text(stage, path)?;
    let layout = surface_last_label(arity(&text).unwrap_or(2)).map_err(|m| CliError::file(stage, path, m))?;
    read_conll(text.as_bytes(), &layout).map_err(|e| CliError::file(stage, path, e))
}

fn cmd_eval(gold: &Path, pred: &Path) -> Result<()> {
    let g = read_labeled_last_column("reading gold", gold)?;
    let p = read_labeled_last_column("reading predictions", pred)?;
    let report = score(&g, &p).map_err(|e| CliError::stage("scoring", e))?;
    print!("{report}");
    Ok(())
}

fn cmd_cluster(corpus: &Path, clusters: usize, min_freq: u64, out: &Path, seed: u64, log: &Log) -> Result<()> {
    let counts =
        count_ngrams(open("reading corpus", corpus)?).map_err(|e| CliError::file("reading corpus", corpus, e))?;
    let run = ClusterRun {
        clusters,
        min_freq,
        seed,
    };
    log.info(format!(
        "clustering {} word types ({} tokens) into {clusters} clusters",
        counts.vocabulary(min_freq).len(),
        counts.total
    ));
    let result = cluster(&counts, &run).map_err(|e| CliError::stage("clustering", e))?;
    let mut w = create("writing clusters", out)?;
    write_paths(&result.tree, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::file("writing clusters", out, e))?;
    log.info(format!("wrote {} words to {}", result.lexicon.len(), out.display()));
    Ok(())
}

fn guess_layout(n: usize) -> std::result::Result<Layout, String> {
    match n {
        3 => Ok("surface,pos,label".parse().expect("valid layout")),
        4 => Ok("surface,pos,chunk,label".parse().expect("valid layout")),
        _ => surface_last_label(n),
    }
}

fn cmd_convert(to_syllables: bool, input: &Path, output: &Path, layout: Option<&str>, log: &Log) -> Result<()> {
    if !to_syllables {
        return Err(CliError::stage(
            "converting",
            "no conversion requested (use --to-syllables)",
        ));
    }
    let text = read_text("reading input", input)?;
    let layout = match layout {
        Some(l) => l
            .parse::<Layout>()
            .map_err(|e| CliError::stage("parsing --layout", e))?,
        None => guess_layout(arity(&text).unwrap_or(2)).map_err(|m| CliError::file("reading input", input, m))?,
    };
    let corpus = read_conll(text.as_bytes(), &layout).map_err(|e| CliError::file("reading input", input, e))?;
    let sentences = corpus
        .sentences
        .iter()
        .enumerate()
        .map(|(k, s)| {
            words_to_syllables(s).map_err(|e| CliError::file("converting", input, format!("sentence {k}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let converted = Corpus::new(layout, sentences);
    let mut w = create("writing output", output)?;
    write_conll(&converted, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::file("writing output", output, e))?;
    log.info(format!(
        "converted {} words into {} syllables",
        corpus.token_count(),
        converted.token_count()
    ));
    Ok(())
}

fn cmd_ablate(config: &Path, train: &Path, test: &Path, csv: &Path, seed: u64, log: &Log) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    if cfg.ablation.is_empty() {
        return Err(CliError::file("loading config", config, "no [[ablation]] entries"));
    }
    let spec = AblationSpec::new(cfg.ablation.clone()).map_err(|e| CliError::file("loading config", config, e))?;
    let lex = load_lexicons(&cfg.lexicons, spec.variants().iter().map(|v| &v.features))?;
    let train_corpus = read_corpus("reading training data", train, &cfg.layout)?;
    let test_corpus = read_corpus("reading test data", test, &cfg.layout)?;
    let mut tcfg = cfg.train.clone();
    tcfg.seed = seed;
    log.info(format!("running {} ablation rows, seed {seed}", spec.len()));
    let rows =
        run_ablation(&train_corpus, &test_corpus, &spec, &tcfg, &lex).map_err(|e| CliError::stage("ablation", e))?;
    print!("{}", render_table(&rows));
    let mut w = create("writing csv", csv)?;
    write_csv(&rows, &mut w).map_err(|e| CliError::file("writing csv", csv, e))?;
    w.flush().map_err(|e| CliError::file("writing csv", csv, e))?;
    log.info(format!("wrote {}", csv.display()));
    Ok(())
}
