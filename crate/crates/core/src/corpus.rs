//! Column-formatted corpora, BIO tags and entity spans.
//!
//! A corpus file holds one token per line with whitespace-separated
//! columns and a blank line after each sentence. Which columns are present,
//! and in which order, is declared by a [`Layout`].

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Joiner between syllables of a multi-syllable word, e.g. `Hà_Nội`.
pub const SYLLABLE_JOINER: char = '_';

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid label `{label}`")]
    BadLabel { line: usize, label: String },
    #[error("invalid label `{0}`: expected `O`, `B-<TYPE>` or `I-<TYPE>`")]
    InvalidTag(String),
    #[error("invalid surface `{0}`: must be non-empty and contain no whitespace")]
    InvalidSurface(String),
    #[error("invalid column layout: {0}")]
    InvalidLayout(String),
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("token {position} has no label")]
    Unlabeled { position: usize },
    #[error("invalid BIO sequence at position {position}: {description} (run repair_bio first)")]
    InvalidBio { position: usize, description: String },
    #[error("token `{0}` has an empty syllable")]
    EmptySyllable(String),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// A BIO label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Outside,
    Begin(String),
    Inside(String),
}

impl Tag {
    /// Entity type of a `B-` or `I-` tag.
    pub fn entity_type(&self) -> Option<&str> {
        match self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) => Some(t),
        }
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, Tag::Outside)
    }

    /// Whether `self` may directly follow `prev` in a valid sequence.
    /// `prev == None` means sentence start.
    pub fn may_follow(&self, prev: Option<&Tag>) -> bool {
        match self {
            Tag::Inside(t) => matches!(prev, Some(Tag::Begin(p)) | Some(Tag::Inside(p)) if p == t),
            _ => true,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Outside => f.write_str("O"),
            Tag::Begin(t) => write!(f, "B-{t}"),
            Tag::Inside(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for Tag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(Tag::Outside);
        }
        let bad = || CorpusError::InvalidTag(s.to_owned());
        let (prefix, ty) = s.split_once('-').ok_or_else(bad)?;
        if ty.is_empty() || !ty.chars().all(char::is_alphanumeric) {
            return Err(bad());
        }
        match prefix {
            "B" => Ok(Tag::Begin(ty.to_owned())),
            "I" => Ok(Tag::Inside(ty.to_owned())),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: Option<String>,
    pub chunk: Option<String>,
    pub label: Option<Tag>,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        check_value(&surface)?;
        Ok(Token {
            surface,
            pos: None,
            chunk: None,
            label: None,
        })
    }

    pub fn labeled(surface: impl Into<String>, label: Tag) -> Result<Self> {
        let mut token = Token::new(surface)?;
        token.label = Some(label);
        Ok(token)
    }

    pub fn with_pos(mut self, pos: impl Into<String>) -> Self {
        self.pos = Some(pos.into());
        self
    }

    pub fn with_chunk(mut self, chunk: impl Into<String>) -> Self {
        self.chunk = Some(chunk.into());
        self
    }
}

fn check_value(value: &str) -> Result<()> {
    if value.is_empty() || value.chars().any(char::is_whitespace) {
        return Err(CorpusError::InvalidSurface(value.to_owned()));
    }
    Ok(())
}

/// A non-empty sequence of tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        Ok(Sentence { tokens })
    }

    /// Builds a labeled sentence from `(surface, label)` pairs.
    pub fn from_pairs<S: AsRef<str>, L: AsRef<str>>(pairs: &[(S, L)]) -> Result<Self> {
        let tokens = pairs
            .iter()
            .map(|(s, l)| Token::labeled(s.as_ref(), l.as_ref().parse()?))
            .collect::<Result<Vec<_>>>()?;
        Sentence::new(tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// All labels, or the position of the first unlabeled token.
    pub fn labels(&self) -> Result<Vec<Tag>> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(position, t)| t.label.clone().ok_or(CorpusError::Unlabeled { position }))
            .collect()
    }

    /// Replaces every label; `labels` must have one entry per token.
    pub fn with_labels(&self, labels: Vec<Tag>) -> Sentence {
        assert_eq!(labels.len(), self.len(), "label count must match token count");
        let tokens = self
            .tokens
            .iter()
            .zip(labels)
            .map(|(t, l)| Token {
                label: Some(l),
                ..t.clone()
            })
            .collect();
        Sentence { tokens }
    }

    pub fn without_labels(&self) -> Sentence {
        let tokens = self
            .tokens
            .iter()
            .map(|t| Token {
                label: None,
                ..t.clone()
            })
            .collect();
        Sentence { tokens }
    }
}

/// One column of a corpus file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    Surface,
    Pos,
    Chunk,
    Label,
    /// Present in the file but ignored on read; written back as `_`.
    Skip,
}

impl Column {
    fn name(self) -> &'static str {
        match self {
            Column::Surface => "surface",
            Column::Pos => "pos",
            Column::Chunk => "chunk",
            Column::Label => "label",
            Column::Skip => "_",
        }
    }
}

impl FromStr for Column {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "surface" | "word" => Ok(Column::Surface),
            "pos" => Ok(Column::Pos),
            "chunk" => Ok(Column::Chunk),
            "label" | "ne" | "ner" => Ok(Column::Label),
            "_" | "skip" => Ok(Column::Skip),
            other => Err(CorpusError::InvalidLayout(format!("unknown column `{other}`"))),
        }
    }
}

/// Declared column order of a corpus file.
///
/// Exactly one surface column; at most one each of pos, chunk and label;
/// any number of skipped columns (e.g. nested-entity levels below the first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Column>", into = "Vec<Column>")]
pub struct Layout {
    columns: Vec<Column>,
}

impl Layout {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let count = |c| columns.iter().filter(|&&x| x == c).count();
        if count(Column::Surface) != 1 {
            return Err(CorpusError::InvalidLayout("exactly one surface column required".into()));
        }
        for c in [Column::Pos, Column::Chunk, Column::Label] {
            if count(c) > 1 {
                return Err(CorpusError::InvalidLayout(format!("duplicate `{}` column", c.name())));
            }
        }
        Ok(Layout { columns })
    }

    /// `surface label`
    pub fn surface_label() -> Self {
        Layout {
            columns: vec![Column::Surface, Column::Label],
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn has(&self, column: Column) -> bool {
        self.columns.contains(&column)
    }

    /// The same layout with the label column removed.
    pub fn without_label(&self) -> Layout {
        Layout {
            columns: self.columns.iter().copied().filter(|&c| c != Column::Label).collect(),
        }
    }

    /// The same layout with a label column appended (replacing any existing one
    /// by a skipped column).
    pub fn with_appended_label(&self) -> Layout {
        let mut columns: Vec<Column> = self
            .columns
            .iter()
            .map(|&c| if c == Column::Label { Column::Skip } else { c })
            .collect();
        columns.push(Column::Label);
        Layout { columns }
    }
}

impl TryFrom<Vec<Column>> for Layout {
    type Error = CorpusError;

    fn try_from(columns: Vec<Column>) -> Result<Self> {
        Layout::new(columns)
    }
}

impl From<Layout> for Vec<Column> {
    fn from(layout: Layout) -> Self {
        layout.columns
    }
}

impl FromStr for Layout {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        let columns = s.split(',').map(str::parse).collect::<Result<Vec<Column>>>()?;
        Layout::new(columns)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(c.name())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub layout: Layout,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(layout: Layout, sentences: Vec<Sentence>) -> Self {
        Corpus { layout, sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sentence> {
        self.sentences.iter()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Sentence;
    type IntoIter = std::slice::Iter<'a, Sentence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sentences.iter()
    }
}

/// Reads a column-formatted corpus.
///
/// Columns are separated by any run of spaces or tabs. Blank lines end a
/// sentence; repeated and trailing blank lines are ignored.
pub fn read_conll<R: BufRead>(reader: R, layout: &Layout) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split([' ', '\t', '\r']).filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            if !tokens.is_empty() {
                sentences.push(Sentence {
                    tokens: std::mem::take(&mut tokens),
                });
            }
            continue;
        }
        if fields.len() != layout.arity() {
            return Err(CorpusError::ColumnCount {
                line: lineno,
                expected: layout.arity(),
                found: fields.len(),
            });
        }
        let mut token = Token {
            surface: String::new(),
            pos: None,
            chunk: None,
            label: None,
        };
        for (&column, &value) in layout.columns().iter().zip(&fields) {
            match column {
                Column::Surface => token.surface = value.to_owned(),
                Column::Pos => token.pos = Some(value.to_owned()),
                Column::Chunk => token.chunk = Some(value.to_owned()),
                Column::Label => {
                    let tag = value.parse().map_err(|_| CorpusError::BadLabel {
                        line: lineno,
                        label: value.to_owned(),
                    })?;
                    token.label = Some(tag);
                }
                Column::Skip => {}
            }
        }
        tokens.push(token);
    }
    if !tokens.is_empty() {
        sentences.push(Sentence { tokens });
    }
    Ok(Corpus {
        layout: layout.clone(),
        sentences,
    })
}

/// Writes a corpus with single-tab separators and one blank line after
/// every sentence.
pub fn write_conll<W: Write>(corpus: &Corpus, mut writer: W) -> io::Result<()> {
    for sentence in &corpus.sentences {
        for token in sentence.tokens() {
            write_token(&mut writer, &corpus.layout, token)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

fn write_token<W: Write>(writer: &mut W, layout: &Layout, token: &Token) -> io::Result<()> {
    for (i, column) in layout.columns().iter().enumerate() {
        if i > 0 {
            writer.write_all(b"\t")?;
        }
        match column {
            Column::Surface => writer.write_all(token.surface.as_bytes())?,
            Column::Pos => writer.write_all(token.pos.as_deref().unwrap_or("_").as_bytes())?,
            Column::Chunk => writer.write_all(token.chunk.as_deref().unwrap_or("_").as_bytes())?,
            Column::Label => match &token.label {
                Some(tag) => write!(writer, "{tag}")?,
                None => writer.write_all(b"O")?,
            },
            Column::Skip => writer.write_all(b"_")?,
        }
    }
    writeln!(writer)
}

pub fn to_conll_string(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_conll(corpus, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("corpus values are UTF-8")
}

/// A position where a label sequence breaks the BIO scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BioViolation {
    pub position: usize,
    pub description: String,
}

/// Lists the BIO violations of a tag sequence.
pub fn bio_violations(tags: &[Tag]) -> Vec<BioViolation> {
    let mut violations = Vec::new();
    let mut prev: Option<&Tag> = None;
    for (position, tag) in tags.iter().enumerate() {
        if !tag.may_follow(prev) {
            let description = match prev {
                None => format!("{tag} at sentence start"),
                Some(Tag::Outside) => format!("{tag} follows O"),
                Some(p) => format!("{tag} follows {p} of a different type"),
            };
            violations.push(BioViolation { position, description });
        }
        prev = Some(tag);
    }
    violations
}

/// Lists the BIO violations of a labeled sentence.
pub fn validate_bio(sentence: &Sentence) -> Result<Vec<BioViolation>> {
    Ok(bio_violations(&sentence.labels()?))
}

/// Rewrites every `I-X` that does not continue a span of type X to `B-X`.
pub fn repair_tags(tags: &[Tag]) -> Vec<Tag> {
    let mut out: Vec<Tag> = Vec::with_capacity(tags.len());
    for tag in tags {
        let repaired = match tag {
            Tag::Inside(t) if !tag.may_follow(out.last()) => Tag::Begin(t.clone()),
            _ => tag.clone(),
        };
        out.push(repaired);
    }
    out
}

/// Applies [`repair_tags`] to a sentence's labels. Unlabeled tokens are left
/// alone and break any span like `O` does.
pub fn repair_bio(sentence: &Sentence) -> Sentence {
    let mut tokens = sentence.tokens.clone();
    let mut prev: Option<Tag> = None;
    for token in &mut tokens {
        if let Some(Tag::Inside(t)) = &token.label {
            if !token.label.as_ref().unwrap().may_follow(prev.as_ref()) {
                token.label = Some(Tag::Begin(t.clone()));
            }
        }
        prev = token.label.clone();
    }
    Sentence { tokens }
}

/// A typed, inclusive token interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub entity_type: String,
    pub start: usize,
    pub end: usize,
}

impl EntitySpan {
    pub fn new(entity_type: impl Into<String>, start: usize, end: usize) -> Self {
        EntitySpan {
            entity_type: entity_type.into(),
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Extracts maximal entity spans from a BIO-valid tag sequence.
pub fn spans_from_bio(tags: &[Tag]) -> Result<Vec<EntitySpan>> {
    if let Some(v) = bio_violations(tags).into_iter().next() {
        return Err(CorpusError::InvalidBio {
            position: v.position,
            description: v.description,
        });
    }
    let mut spans: Vec<EntitySpan> = Vec::new();
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            Tag::Begin(t) => spans.push(EntitySpan::new(t.clone(), i, i)),
            Tag::Inside(_) => spans.last_mut().expect("validated").end = i,
            Tag::Outside => {}
        }
    }
    Ok(spans)
}

/// Rebuilds a tag sequence of length `len` from non-overlapping spans.
pub fn tags_from_spans(len: usize, spans: &[EntitySpan]) -> Vec<Tag> {
    let mut tags = vec![Tag::Outside; len];
    for span in spans {
        tags[span.start] = Tag::Begin(span.entity_type.clone());
        for tag in &mut tags[span.start + 1..=span.end] {
            *tag = Tag::Inside(span.entity_type.clone());
        }
    }
    tags
}

/// Splits every word on [`SYLLABLE_JOINER`] into syllable tokens.
///
/// `B-X` becomes `B-X` on the first syllable and `I-X` on the rest; `I-X`
/// and `O` are copied to every syllable. PoS and chunk values are copied too.
pub fn words_to_syllables(sentence: &Sentence) -> Result<Sentence> {
    let mut tokens = Vec::with_capacity(sentence.len());
    for token in sentence.tokens() {
        let syllables: Vec<&str> = token.surface.split(SYLLABLE_JOINER).collect();
        if syllables.iter().any(|s| s.is_empty()) {
            return Err(CorpusError::EmptySyllable(token.surface.clone()));
        }
        for (k, syllable) in syllables.into_iter().enumerate() {
            let label = token.label.as_ref().map(|l| match l {
                Tag::Begin(t) if k > 0 => Tag::Inside(t.clone()),
                other => other.clone(),
            });
            tokens.push(Token {
                surface: syllable.to_owned(),
                pos: token.pos.clone(),
                chunk: token.chunk.clone(),
                label,
            });
        }
    }
    Ok(Sentence { tokens })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<Tag> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    fn sentence(labels: &str) -> Sentence {
        let tokens = tags(labels)
            .into_iter()
            .enumerate()
            .map(|(i, t)| Token::labeled(format!("w{i}"), t).unwrap())
            .collect();
        Sentence::new(tokens).unwrap()
    }

    #[test]
    fn tag_parsing() {
        assert_eq!("O".parse::<Tag>().unwrap(), Tag::Outside);
        assert_eq!("B-LOC".parse::<Tag>().unwrap(), Tag::Begin("LOC".into()));
        assert_eq!("I-MISC".parse::<Tag>().unwrap(), Tag::Inside("MISC".into()));
        for bad in ["", "B-", "X-LOC", "B_LOC", "I-L-C", "o"] {
            assert!(bad.parse::<Tag>().is_err(), "{bad}");
        }
    }

    #[test]
    fn read_single_token() {
        let corpus = read_conll("Hà_Nội B-LOC\n\n".as_bytes(), &Layout::surface_label()).unwrap();
        assert_eq!(corpus.len(), 1);
        let tok = &corpus.sentences[0].tokens()[0];
        assert_eq!(tok.surface, "Hà_Nội");
        assert_eq!(tok.label, Some(Tag::Begin("LOC".into())));
    }

    #[test]
    fn read_two_sentences() {
        let text = "a O\nb B-PER\n\nc O\n";
        let corpus = read_conll(text.as_bytes(), &Layout::surface_label()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.sentences[0].len(), 2);
    }

    #[test]
    fn read_tolerates_mixed_separators_and_blank_runs() {
        let text = "\n\na \t  O\n\n\n\nb\tB-PER\n\n\n";
        let corpus = read_conll(text.as_bytes(), &Layout::surface_label()).unwrap();
        assert_eq!(corpus.len(), 2);
    }

    #[test]
    fn read_arity_error_carries_line() {
        let err = read_conll("a b c\n".as_bytes(), &Layout::surface_label()).unwrap_err();
        match err {
            CorpusError::ColumnCount { line, expected, found } => {
                assert_eq!((line, expected, found), (1, 2, 3))
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = read_conll("a O\nb\n".as_bytes(), &Layout::surface_label()).unwrap_err();
        assert!(matches!(err, CorpusError::ColumnCount { line: 2, .. }));
    }

    #[test]
    fn read_bad_label() {
        let err = read_conll("a O\nb X-Y\n".as_bytes(), &Layout::surface_label()).unwrap_err();
        assert!(matches!(err, CorpusError::BadLabel { line: 2, .. }));
    }

    #[test]
    fn read_empty_stream() {
        let corpus = read_conll("".as_bytes(), &Layout::surface_label()).unwrap();
        assert!(corpus.is_empty());
    }

    #[test]
    fn read_skips_ignored_columns() {
        let layout: Layout = "surface,pos,label,_".parse().unwrap();
        let corpus = read_conll("Hà_Nội Np B-LOC B-ORG\n".as_bytes(), &layout).unwrap();
        let tok = &corpus.sentences[0].tokens()[0];
        assert_eq!(tok.pos.as_deref(), Some("Np"));
        assert_eq!(tok.label, Some(Tag::Begin("LOC".into())));
    }

    #[test]
    fn docstart_is_an_ordinary_token() {
        let corpus = read_conll("-DOCSTART- O\n\n".as_bytes(), &Layout::surface_label()).unwrap();
        assert_eq!(corpus.sentences[0].tokens()[0].surface, "-DOCSTART-");
    }

    #[test]
    fn write_empty_and_single() {
        let empty = Corpus::new(Layout::surface_label(), vec![]);
        assert_eq!(to_conll_string(&empty), "");
        let one = Corpus::new(Layout::surface_label(), vec![sentence("B-PER I-PER")]);
        assert_eq!(to_conll_string(&one), "w0\tB-PER\nw1\tI-PER\n\n");
    }

    #[test]
    fn layout_validation() {
        assert!("pos,label".parse::<Layout>().is_err());
        assert!("surface,pos,pos".parse::<Layout>().is_err());
        assert!("surface,bogus".parse::<Layout>().is_err());
        let l: Layout = "surface,pos,chunk,label".parse().unwrap();
        assert_eq!(l.to_string(), "surface,pos,chunk,label");
        assert_eq!(l.without_label().to_string(), "surface,pos,chunk");
        assert_eq!(l.with_appended_label().to_string(), "surface,pos,chunk,_,label");
    }

    #[test]
    fn validate_examples() {
        assert!(validate_bio(&sentence("O B-PER I-PER")).unwrap().is_empty());
        let v = validate_bio(&sentence("I-PER O")).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].position, 0);
        let v = validate_bio(&sentence("B-PER I-LOC")).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].position, 1);
    }

    #[test]
    fn validate_requires_labels() {
        let s = Sentence::new(vec![Token::new("a").unwrap()]).unwrap();
        assert!(matches!(validate_bio(&s), Err(CorpusError::Unlabeled { position: 0 })));
    }

    #[test]
    fn repair_examples() {
        assert_eq!(repair_tags(&tags("I-PER I-PER")), tags("B-PER I-PER"));
        assert_eq!(repair_tags(&tags("B-LOC I-PER")), tags("B-LOC B-PER"));
        let valid = tags("O B-PER I-PER O B-LOC");
        assert_eq!(repair_tags(&valid), valid);
        let s = repair_bio(&sentence("O I-ORG I-ORG I-LOC"));
        assert_eq!(s.labels().unwrap(), tags("O B-ORG I-ORG B-LOC"));
    }

    #[test]
    fn span_examples() {
        assert_eq!(
            spans_from_bio(&tags("B-LOC I-LOC O")).unwrap(),
            vec![EntitySpan::new("LOC", 0, 1)]
        );
        assert!(spans_from_bio(&tags("O O")).unwrap().is_empty());
        assert_eq!(
            spans_from_bio(&tags("B-PER B-PER")).unwrap(),
            vec![EntitySpan::new("PER", 0, 0), EntitySpan::new("PER", 1, 1)]
        );
        assert!(matches!(
            spans_from_bio(&tags("O I-PER")),
            Err(CorpusError::InvalidBio { position: 1, .. })
        ));
    }

    #[test]
    fn syllable_examples() {
        let s = Sentence::from_pairs(&[("Hà_Nội", "B-LOC")]).unwrap();
        let out = words_to_syllables(&s).unwrap();
        let pairs: Vec<(String, String)> = out
            .tokens()
            .iter()
            .map(|t| (t.surface.clone(), t.label.as_ref().unwrap().to_string()))
            .collect();
        assert_eq!(
            pairs,
            vec![("Hà".into(), "B-LOC".into()), ("Nội".into(), "I-LOC".into())]
        );

        let s = Sentence::from_pairs(&[("học", "O")]).unwrap();
        assert_eq!(words_to_syllables(&s).unwrap(), s);

        let s = Sentence::from_pairs(&[("Buôn_Mê_Thuột", "B-LOC")]).unwrap();
        let out = words_to_syllables(&s).unwrap();
        assert_eq!(out.labels().unwrap(), tags("B-LOC I-LOC I-LOC"));
        assert_eq!(spans_from_bio(&out.labels().unwrap()).unwrap().len(), 1);
    }

    #[test]
    fn syllables_continue_inside_words_and_copy_columns() {
        let tokens = vec![
            Token::labeled("Ủy_ban", "B-ORG".parse().unwrap())
                .unwrap()
                .with_pos("N"),
            Token::labeled("Nhân_dân", "I-ORG".parse().unwrap())
                .unwrap()
                .with_pos("N"),
        ];
        let out = words_to_syllables(&Sentence::new(tokens).unwrap()).unwrap();
        assert_eq!(out.labels().unwrap(), tags("B-ORG I-ORG I-ORG I-ORG"));
        assert!(out.tokens().iter().all(|t| t.pos.as_deref() == Some("N")));
    }

    #[test]
    fn syllables_reject_empty_parts() {
        for bad in ["_a", "a_", "a__b", "_"] {
            let s = Sentence::new(vec![Token::new(bad).unwrap()]).unwrap();
            assert!(
                matches!(words_to_syllables(&s), Err(CorpusError::EmptySyllable(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn syllables_without_labels_split_surfaces() {
        let s = Sentence::new(vec![Token::new("Việt_Nam").unwrap()]).unwrap();
        let out = words_to_syllables(&s).unwrap();
        assert_eq!(out.surfaces().collect::<Vec<_>>(), vec!["Việt", "Nam"]);
        assert!(out.tokens().iter().all(|t| t.label.is_none()));
    }
}
