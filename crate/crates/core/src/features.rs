//! Attribute extraction.
//!
//! Every token position gets a set of binary attributes (string keys) and a
//! list of numeric attributes. Keys are namespaced as
//! `family[offset]=value` for unigrams and `family[o1|o2]=v1|v2` for
//! bigrams, so the same text in two roles never collides.
//!
//! | family   | toggle        | window            |
//! |----------|---------------|-------------------|
//! | `w`, `lw`| `word`        | unigram + bigram  |
//! | `preN`, `sufN` | `word`  | unigram           |
//! | `shape`, `flag` | `word_shapes` | unigram    |
//! | `shaped`, `type`, `fregex` | `word_shapes` | unigram + bigram |
//! | `pos`, `chunk` | `pos`, `chunk` | unigram + bigram |
//! | `bc`, `bcN` | `cluster`  | current token     |
//! | `emb:D` (numeric) | `embeddings` | current token |

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sentence;

pub const BOS: &str = "__BOS__";
pub const EOS: &str = "__EOS__";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("feature `{toggle}` is enabled but token {position} has no {column} value")]
    MissingColumn {
        toggle: &'static str,
        column: &'static str,
        position: usize,
    },
    #[error("feature `{0}` is enabled but no lexicon was provided")]
    MissingLexicon(&'static str),
    #[error("invalid feature config: {0}")]
    InvalidConfig(String),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, FeatureError>;

/// Which attribute families to extract, and their template parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub word: bool,
    pub word_shapes: bool,
    pub pos: bool,
    pub chunk: bool,
    pub cluster: bool,
    pub embeddings: bool,
    pub affix_max_len: usize,
    pub window_radius: usize,
    pub cluster_prefix_lengths: Vec<usize>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            word: true,
            word_shapes: true,
            pos: false,
            chunk: false,
            cluster: false,
            embeddings: false,
            affix_max_len: 4,
            window_radius: 2,
            cluster_prefix_lengths: vec![4, 6, 8, 10],
        }
    }
}

impl FeatureConfig {
    /// Every family disabled.
    pub fn none() -> Self {
        FeatureConfig {
            word: false,
            word_shapes: false,
            ..FeatureConfig::default()
        }
    }

    /// Every family enabled.
    pub fn all() -> Self {
        FeatureConfig {
            pos: true,
            chunk: true,
            cluster: true,
            embeddings: true,
            ..FeatureConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.affix_max_len == 0 {
            return Err(FeatureError::InvalidConfig("affix_max_len must be at least 1".into()));
        }
        let lens = &self.cluster_prefix_lengths;
        if lens.contains(&0) || lens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FeatureError::InvalidConfig(
                "cluster_prefix_lengths must be positive and ascending".into(),
            ));
        }
        Ok(())
    }
}

/// Word → Brown-cluster bit-string.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterLexicon {
    paths: HashMap<String, String>,
}

impl ClusterLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, bits: impl Into<String>) -> Result<()> {
        let bits = bits.into();
        if !is_bitstring(&bits) {
            return Err(FeatureError::InvalidConfig(format!("`{bits}` is not a bit-string")));
        }
        self.paths.insert(word.into(), bits);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.paths.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.paths.iter().map(|(w, b)| (w.as_str(), b.as_str()))
    }

    /// Loads a paths file: `bitstring<TAB>word<TAB>count` per line. The
    /// count column is optional and ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lex = ClusterLexicon::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |message: String| FeatureError::Lexicon { line: idx + 1, message };
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(['\t', ' ']).filter(|f| !f.is_empty()).collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(err(format!("expected 2 or 3 columns, found {}", fields.len())));
            }
            let (bits, word) = (fields[0], fields[1]);
            if !is_bitstring(bits) {
                return Err(err(format!("`{bits}` is not a bit-string")));
            }
            if lex.paths.insert(word.to_owned(), bits.to_owned()).is_some() {
                return Err(err(format!("duplicate word `{word}`")));
            }
        }
        Ok(lex)
    }
}

impl FromIterator<(String, String)> for ClusterLexicon {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        ClusterLexicon {
            paths: iter.into_iter().collect(),
        }
    }
}

fn is_bitstring(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b == b'0' || b == b'1')
}

/// Word → dense vector, all of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingLexicon {
    vectors: HashMap<String, Vec<f64>>,
    dim: usize,
}

impl EmbeddingLexicon {
    pub fn new(dim: usize) -> Self {
        EmbeddingLexicon {
            vectors: HashMap::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(FeatureError::InvalidConfig(format!(
                "vector has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::InvalidConfig("vector has a non-finite component".into()));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    /// Loads `word v1 v2 ... vd` lines. The dimension is taken from the
    /// first line and enforced on the rest. A leading word2vec header
    /// (`<count> <dim>`) is skipped.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lex: Option<EmbeddingLexicon> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if idx == 0 && is_word2vec_header(&line) {
                continue;
            }
            let err = |message: String| FeatureError::Lexicon { line: idx + 1, message };
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let vector = fields
                .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad value `{f}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if vector.is_empty() {
                return Err(err(format!("word `{word}` has no vector")));
            }
            let lex = lex.get_or_insert_with(|| EmbeddingLexicon::new(vector.len()));
            lex.insert(word, vector).map_err(|e| err(e.to_string()))?;
        }
        Ok(lex.unwrap_or_else(|| EmbeddingLexicon::new(0)))
    }
}

fn is_word2vec_header(line: &str) -> bool {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok())
}

/// Lexicons consulted by the cluster and embedding families.
#[derive(Clone, Debug, Default)]
pub struct Lexicons {
    pub clusters: Option<ClusterLexicon>,
    pub embeddings: Option<EmbeddingLexicon>,
}

impl Lexicons {
    pub fn none() -> Self {
        Self::default()
    }
}

/// Attributes of one token position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PositionFeatures {
    pub binary: Vec<String>,
    pub numeric: Vec<(String, f64)>,
}

impl PositionFeatures {
    pub fn len(&self) -> usize {
        self.binary.len() + self.numeric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExtractedFeatures {
    pub positions: Vec<PositionFeatures>,
}

impl ExtractedFeatures {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn is_upper(c: char) -> bool {
    c.is_alphabetic() && c.is_uppercase()
}

fn is_lower(c: char) -> bool {
    c.is_alphabetic() && c.is_lowercase()
}

/// The token without syllable joiners, unless it consists only of them.
fn body(surface: &str) -> std::borrow::Cow<'_, str> {
    if surface.contains('_') && surface.chars().any(char::is_alphanumeric) {
        surface.replace('_', "").into()
    } else {
        surface.into()
    }
}

/// Orthographic shape: `U` upper, `L` lower, `D` digit, anything else kept.
pub fn shape(surface: &str) -> String {
    surface
        .chars()
        .map(|c| {
            if is_upper(c) {
                'U'
            } else if is_lower(c) {
                'L'
            } else if c.is_numeric() {
                'D'
            } else {
                c
            }
        })
        .collect()
}

/// [`shape`] with runs of the same symbol collapsed.
pub fn shaped(surface: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in shape(surface).chars() {
        if last != Some(c) {
            out.push(c);
            last = Some(c);
        }
    }
    out
}

/// Coarse token category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenType {
    AllUpper,
    AllLower,
    AllDigit,
    InitUpper,
    Mixed,
    Punct,
    Other,
}

impl TokenType {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenType::AllUpper => "AllUpper",
            TokenType::AllLower => "AllLower",
            TokenType::AllDigit => "AllDigit",
            TokenType::InitUpper => "InitUpper",
            TokenType::Mixed => "Mixed",
            TokenType::Punct => "Punct",
            TokenType::Other => "Other",
        }
    }
}

impl fmt::Display for TokenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{P}+$").unwrap());

/// Categorizes a token; the first matching category wins, in declaration
/// order of [`TokenType`]. Syllable joiners are ignored.
pub fn token_type(surface: &str) -> TokenType {
    let b = body(surface);
    let all = |f: fn(char) -> bool| !b.is_empty() && b.chars().all(f);
    if all(is_upper) {
        TokenType::AllUpper
    } else if all(is_lower) {
        TokenType::AllLower
    } else if all(char::is_numeric) {
        TokenType::AllDigit
    } else if b.chars().next().is_some_and(is_upper) && all(char::is_alphabetic) {
        TokenType::InitUpper
    } else if all(char::is_alphanumeric) {
        TokenType::Mixed
    } else if PUNCT.is_match(&b) {
        TokenType::Punct
    } else {
        TokenType::Other
    }
}

/// Boolean orthographic predicates.
///
/// "Letters" are Unicode alphabetic characters and "digits" Unicode numeric
/// characters. Predicates marked *body* ignore `_` syllable joiners.
///
/// | flag  | test |
/// |-------|------|
/// | `mix` | a lowercase letter immediately followed by an uppercase one (`\p{Ll}\p{Lu}`) |
/// | `acr` | `^(\p{Lu}\p{Ll}*\.)+$` |
/// | `ed`  | body matches `^\p{L}+\p{N}+$` |
/// | `hyp` | contains `-` |
/// | `da`  | `^(0?[1-9]\|[12]\d\|3[01])[-/](0?[1-9]\|1[0-2])([-/](\d{2}\|\d{4}))?$` |
/// | `na`  | every `_`-separated syllable has type `InitUpper` |
/// | `co`  | body matches `^\p{N}+\p{Lu}+\p{N}*$` |
/// | `wei` | `(?i)^\p{N}+([.,]\p{N}+)?(mg\|g\|kg\|t\|tấn\|lb\|lbs\|oz)$` |
/// | `2d`, `4d` | `^\d{2}$`, `^\d{4}$` |
/// | `d&a` | contains a digit and a letter |
/// | `d&-`, `d&/`, `d&,`, `d&.` | contains a digit and `-`, `/` (or `\`), `,`, `.` |
/// | `up`  | `\p{Lu}\.` |
/// | `iu`  | first character is an uppercase letter |
/// | `au`, `al`, `ad` | body is all uppercase letters, all lowercase letters, all digits |
/// | `ao`  | no letters or digits |
/// | `cu`, `cl`, `ca`, `cd` | contains an uppercase letter, lowercase letter, letter, digit |
/// | `cs`  | body contains a character that is neither letter nor digit |
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    Mix,
    Acr,
    Ed,
    Hyp,
    Da,
    Na,
    Co,
    Wei,
    TwoDigit,
    FourDigit,
    DigitAlpha,
    DigitHyphen,
    DigitSlash,
    DigitComma,
    DigitPeriod,
    Up,
    Iu,
    Au,
    Al,
    Ad,
    Ao,
    Cu,
    Cl,
    Ca,
    Cd,
    Cs,
}

impl Flag {
    pub const ALL: [Flag; 26] = [
        Flag::Mix,
        Flag::Acr,
        Flag::Ed,
        Flag::Hyp,
        Flag::Da,
        Flag::Na,
        Flag::Co,
        Flag::Wei,
        Flag::TwoDigit,
        Flag::FourDigit,
        Flag::DigitAlpha,
        Flag::DigitHyphen,
        Flag::DigitSlash,
        Flag::DigitComma,
        Flag::DigitPeriod,
        Flag::Up,
        Flag::Iu,
        Flag::Au,
        Flag::Al,
        Flag::Ad,
        Flag::Ao,
        Flag::Cu,
        Flag::Cl,
        Flag::Ca,
        Flag::Cd,
        Flag::Cs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Flag::Mix => "mix",
            Flag::Acr => "acr",
            Flag::Ed => "ed",
            Flag::Hyp => "hyp",
            Flag::Da => "da",
            Flag::Na => "na",
            Flag::Co => "co",
            Flag::Wei => "wei",
            Flag::TwoDigit => "2d",
            Flag::FourDigit => "4d",
            Flag::DigitAlpha => "d&a",
            Flag::DigitHyphen => "d&-",
            Flag::DigitSlash => "d&/",
            Flag::DigitComma => "d&,",
            Flag::DigitPeriod => "d&.",
            Flag::Up => "up",
            Flag::Iu => "iu",
            Flag::Au => "au",
            Flag::Al => "al",
            Flag::Ad => "ad",
            Flag::Ao => "ao",
            Flag::Cu => "cu",
            Flag::Cl => "cl",
            Flag::Ca => "ca",
            Flag::Cd => "cd",
            Flag::Cs => "cs",
        }
    }

    pub fn from_name(name: &str) -> Option<Flag> {
        Flag::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Evaluates this predicate on `surface`.
    pub fn holds(self, surface: &str) -> bool {
        static MIX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{Ll}\p{Lu}").unwrap());
        static ACR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:\p{Lu}\p{Ll}*\.)+$").unwrap());
        static ED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{L}+\p{N}+$").unwrap());
        static DA: LazyLock<Regex> = LazyLock::new(|| {
            Regex::new(r"^(?:0?[1-9]|[12]\d|3[01])[-/](?:0?[1-9]|1[0-2])(?:[-/](?:\d{2}|\d{4}))?$").unwrap()
        });
        static CO: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{N}+\p{Lu}+\p{N}*$").unwrap());
        static WEI: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"(?i)^\p{N}+(?:[.,]\p{N}+)?(?:mg|g|kg|t|tấn|lb|lbs|oz)$").unwrap());
        static TWO: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d{2}$").unwrap());
        static FOUR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d{4}$").unwrap());
        static UP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{Lu}\.").unwrap());

        let b = body(surface);
        let has = |f: fn(char) -> bool| surface.chars().any(f);
        let has_digit = has(char::is_numeric);
        let body_all = |f: fn(char) -> bool| !b.is_empty() && b.chars().all(f);
        match self {
            Flag::Mix => MIX.is_match(surface),
            Flag::Acr => ACR.is_match(surface),
            Flag::Ed => ED.is_match(&b),
            Flag::Hyp => surface.contains('-'),
            Flag::Da => DA.is_match(surface),
            Flag::Na => surface
                .split('_')
                .all(|syl| !syl.is_empty() && token_type(syl) == TokenType::InitUpper),
            Flag::Co => CO.is_match(&b),
            Flag::Wei => WEI.is_match(surface),
            Flag::TwoDigit => TWO.is_match(surface),
            Flag::FourDigit => FOUR.is_match(surface),
            Flag::DigitAlpha => has_digit && has(char::is_alphabetic),
            Flag::DigitHyphen => has_digit && surface.contains('-'),
            Flag::DigitSlash => has_digit && surface.contains(['/', '\\']),
            Flag::DigitComma => has_digit && surface.contains(','),
            Flag::DigitPeriod => has_digit && surface.contains('.'),
            Flag::Up => UP.is_match(surface),
            Flag::Iu => surface.chars().next().is_some_and(is_upper),
            Flag::Au => body_all(is_upper),
            Flag::Al => body_all(is_lower),
            Flag::Ad => body_all(char::is_numeric),
            Flag::Ao => !has(char::is_alphanumeric),
            Flag::Cu => has(is_upper),
            Flag::Cl => has(is_lower),
            Flag::Ca => has(char::is_alphabetic),
            Flag::Cd => has_digit,
            Flag::Cs => b.chars().any(|c| !c.is_alphanumeric()),
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All predicates that hold for `surface`, in [`Flag::ALL`] order.
pub fn regex_flags(surface: &str) -> Vec<Flag> {
    Flag::ALL.into_iter().filter(|f| f.holds(surface)).collect()
}

/// Token type joined with the sorted names of the flags that hold,
/// e.g. `AllDigit:4d,ad,cd`.
pub fn fregex(surface: &str) -> String {
    let mut names: Vec<&str> = regex_flags(surface).into_iter().map(Flag::name).collect();
    names.sort_unstable();
    format!("{}:{}", token_type(surface), names.join(","))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffixKind {
    Prefix,
    Suffix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affix {
    pub kind: AffixKind,
    pub len: usize,
    pub text: String,
}

/// Character-level prefixes and suffixes of lengths `1..=min(max_len, len)`.
pub fn affixes(surface: &str, max_len: usize) -> Vec<Affix> {
    let chars: Vec<char> = surface.chars().collect();
    let n = max_len.min(chars.len());
    let prefixes = (1..=n).map(|len| Affix {
        kind: AffixKind::Prefix,
        len,
        text: chars[..len].iter().collect(),
    });
    let suffixes = (1..=n).map(|len| Affix {
        kind: AffixKind::Suffix,
        len,
        text: chars[chars.len() - len..].iter().collect(),
    });
    prefixes.chain(suffixes).collect()
}

fn at<S: AsRef<str>>(values: &[S], i: usize, offset: isize) -> &str {
    let j = i as isize + offset;
    if j < 0 {
        BOS
    } else if j as usize >= values.len() {
        EOS
    } else {
        values[j as usize].as_ref()
    }
}

/// Unigram keys at offsets `-radius..=radius` and bigram keys over adjacent
/// offsets, with sentinel values outside the sentence.
pub fn windowed<S: AsRef<str>>(base: &str, values: &[S], i: usize, radius: usize) -> Vec<String> {
    let mut keys = window_unigrams(base, values, i, radius);
    let r = radius as isize;
    for o in -r..r {
        keys.push(format!(
            "{base}[{o}|{}]={}|{}",
            o + 1,
            at(values, i, o),
            at(values, i, o + 1)
        ));
    }
    keys
}

fn window_unigrams<S: AsRef<str>>(base: &str, values: &[S], i: usize, radius: usize) -> Vec<String> {
    let r = radius as isize;
    (-r..=r).map(|o| format!("{base}[{o}]={}", at(values, i, o))).collect()
}

/// In-sentence offsets of the window around `i`.
fn window_positions(len: usize, i: usize, radius: usize) -> impl Iterator<Item = (isize, usize)> {
    let r = radius as isize;
    (-r..=r).filter_map(move |o| {
        let j = i as isize + o;
        (j >= 0 && (j as usize) < len).then_some((o, j as usize))
    })
}

/// Full bit-string plus its prefixes of the requested lengths, for the
/// current token only. Prefixes longer than the bit-string are skipped.
pub fn cluster_attrs(surface: &str, lex: &ClusterLexicon, prefix_lengths: &[usize]) -> Vec<String> {
    let Some(bits) = lex.get(surface) else {
        return Vec::new();
    };
    let mut keys = vec![format!("bc[0]={bits}")];
    for &len in prefix_lengths {
        if len <= bits.len() {
            keys.push(format!("bc{len}[0]={}", &bits[..len]));
        }
    }
    keys
}

/// One numeric attribute per embedding dimension, for the current token only.
pub fn embedding_attrs(surface: &str, lex: &EmbeddingLexicon) -> Vec<(String, f64)> {
    lex.get(surface)
        .map(|v| v.iter().enumerate().map(|(d, &x)| (format!("emb:{d}"), x)).collect())
        .unwrap_or_default()
}

struct TokenValues {
    surface: Vec<String>,
    lower: Vec<String>,
    shape: Vec<String>,
    shaped: Vec<String>,
    token_type: Vec<&'static str>,
    fregex: Vec<String>,
    flags: Vec<Vec<Flag>>,
    affixes: Vec<Vec<Affix>>,
    pos: Vec<String>,
    chunk: Vec<String>,
}

fn column_values(
    sentence: &Sentence,
    toggle: &'static str,
    column: &'static str,
    get: fn(&crate::corpus::Token) -> Option<&String>,
) -> Result<Vec<String>> {
    sentence
        .tokens()
        .iter()
        .enumerate()
        .map(|(position, t)| {
            get(t).cloned().ok_or(FeatureError::MissingColumn {
                toggle,
                column,
                position,
            })
        })
        .collect()
}

/// Extracts the attributes of every position of `sentence`.
pub fn extract(sentence: &Sentence, cfg: &FeatureConfig, lexicons: &Lexicons) -> Result<ExtractedFeatures> {
    cfg.validate()?;
    let n = sentence.len();
    let surfaces: Vec<String> = sentence.surfaces().map(str::to_owned).collect();
    let values = TokenValues {
        lower: if cfg.word {
            surfaces.iter().map(|s| s.to_lowercase()).collect()
        } else {
            Vec::new()
        },
        affixes: if cfg.word {
            surfaces.iter().map(|s| affixes(s, cfg.affix_max_len)).collect()
        } else {
            vec![Vec::new(); n]
        },
        shape: if cfg.word_shapes {
            surfaces.iter().map(|s| shape(s)).collect()
        } else {
            Vec::new()
        },
        shaped: if cfg.word_shapes {
            surfaces.iter().map(|s| shaped(s)).collect()
        } else {
            Vec::new()
        },
        token_type: if cfg.word_shapes {
            surfaces.iter().map(|s| token_type(s).as_str()).collect()
        } else {
            Vec::new()
        },
        fregex: if cfg.word_shapes {
            surfaces.iter().map(|s| fregex(s)).collect()
        } else {
            Vec::new()
        },
        flags: if cfg.word_shapes {
            surfaces.iter().map(|s| regex_flags(s)).collect()
        } else {
            vec![Vec::new(); n]
        },
        pos: if cfg.pos {
            column_values(sentence, "pos", "pos", |t| t.pos.as_ref())?
        } else {
            Vec::new()
        },
        chunk: if cfg.chunk {
            column_values(sentence, "chunk", "chunk", |t| t.chunk.as_ref())?
        } else {
            Vec::new()
        },
        surface: surfaces,
    };
    let clusters = match (cfg.cluster, &lexicons.clusters) {
        (false, _) => None,
        (true, Some(lex)) => Some(lex),
        (true, None) => return Err(FeatureError::MissingLexicon("cluster")),
    };
    let embeddings = match (cfg.embeddings, &lexicons.embeddings) {
        (false, _) => None,
        (true, Some(lex)) => Some(lex),
        (true, None) => return Err(FeatureError::MissingLexicon("embeddings")),
    };

    let r = cfg.window_radius;
    let positions = (0..n)
        .map(|i| {
            let mut binary = Vec::new();
            if cfg.word {
                binary.extend(windowed("w", &values.surface, i, r));
                binary.extend(windowed("lw", &values.lower, i, r));
                for (o, j) in window_positions(n, i, r) {
                    for a in &values.affixes[j] {
                        let kind = match a.kind {
                            AffixKind::Prefix => "pre",
                            AffixKind::Suffix => "suf",
                        };
                        binary.push(format!("{kind}{}[{o}]={}", a.len, a.text));
                    }
                }
            }
            if cfg.word_shapes {
                binary.extend(window_unigrams("shape", &values.shape, i, r));
                binary.extend(windowed("shaped", &values.shaped, i, r));
                binary.extend(windowed("type", &values.token_type, i, r));
                binary.extend(windowed("fregex", &values.fregex, i, r));
                for (o, j) in window_positions(n, i, r) {
                    binary.extend(values.flags[j].iter().map(|f| format!("flag[{o}]={f}")));
                }
            }
            if cfg.pos {
                binary.extend(windowed("pos", &values.pos, i, r));
            }
            if cfg.chunk {
                binary.extend(windowed("chunk", &values.chunk, i, r));
            }
            if let Some(lex) = clusters {
                binary.extend(cluster_attrs(&values.surface[i], lex, &cfg.cluster_prefix_lengths));
            }
            binary.sort_unstable();
            binary.dedup();
            let numeric = embeddings
                .map(|lex| embedding_attrs(&values.surface[i], lex))
                .unwrap_or_default();
            PositionFeatures { binary, numeric }
        })
        .collect();
    Ok(ExtractedFeatures { positions })
}
