//! Seeded synthetic corpora and lexicons for tests, benches and smoke runs.
//!
//! Every surface in the smoke vocabulary belongs to exactly one label, so a
//! tagger that sees word identity can fit the data perfectly.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Column, Corpus, Layout, Sentence, Tag, Token};
use crate::features::{ClusterLexicon, EmbeddingLexicon, Lexicons};

pub const ENTITY_TYPES: [&str; 4] = ["PER", "LOC", "ORG", "MISC"];

const BEGIN_WORDS: [&[&str]; 4] = [
    &["Nguyễn", "Trần", "Lê", "Phạm", "Hoàng", "Vũ"],
    &["Hà_Nội", "Huế", "Đà_Nẵng", "Sài_Gòn", "Cần_Thơ", "Hải_Phòng"],
    &["Vinamilk", "Viettel", "FPT", "Bộ", "Công_ty", "Ngân_hàng"],
    &["Tết", "SEA_Games", "iPhone", "Windows", "Trung_thu", "Phật_giáo"],
];

const INSIDE_WORDS: [&[&str]; 4] = [
    &["Văn", "Thị", "Minh", "Lan", "Hùng", "Dũng"],
    &["Nam", "Bắc", "Trung", "Tây", "Đông"],
    &["Giáo_dục", "Vietcombank", "Sữa", "Mobifone", "Y_tế"],
    &["31", "2024", "Nguyên_đán", "XP", "Pro"],
];

const OUTSIDE_WORDS: &[&str] = &[
    "đã",
    "đến",
    "và",
    "của",
    "là",
    "một",
    "người",
    "ở",
    "cho",
    "với",
    "được",
    "ngày",
    "hôm_nay",
    "năm",
    "rất",
    "nhiều",
    "đi",
    "làm",
    "việc",
    "tại",
    "có",
    "không",
    "này",
    ",",
    ".",
    "\"",
    "thành_phố",
    "ông",
    "bà",
    "nói",
];

const OUTSIDE_POS: [&str; 6] = ["V", "E", "C", "N", "A", "CH"];

/// Number of sentences in the smoke training split.
pub const SMOKE_SENTENCES: usize = 500;

fn token(surface: &str, tag: Tag, pos: &str, chunk: &str) -> Token {
    Token::labeled(surface, tag)
        .expect("synthetic surfaces are valid")
        .with_pos(pos)
        .with_chunk(chunk)
}

/// One smoke sentence: 3 to 14 tokens with 0 to 3 entities of 1 to 3 tokens.
pub fn smoke_sentence<R: Rng>(rng: &mut R) -> Sentence {
    let mut tokens = Vec::new();
    let target = rng.random_range(3..=14);
    while tokens.len() < target {
        if rng.random_bool(0.3) {
            let t = rng.random_range(0..ENTITY_TYPES.len());
            let ty = ENTITY_TYPES[t];
            let b = BEGIN_WORDS[t].choose(rng).unwrap();
            tokens.push(token(b, Tag::Begin(ty.into()), "Np", "B-NP"));
            for _ in 0..rng.random_range(0..=2) {
                let w = INSIDE_WORDS[t].choose(rng).unwrap();
                tokens.push(token(w, Tag::Inside(ty.into()), "Np", "I-NP"));
            }
        } else {
            let k = rng.random_range(0..OUTSIDE_WORDS.len());
            let pos = OUTSIDE_POS[k % OUTSIDE_POS.len()];
            let chunk = if pos == "CH" { "O" } else { "B-VP" };
            tokens.push(token(OUTSIDE_WORDS[k], Tag::Outside, pos, chunk));
        }
    }
    Sentence::new(tokens).expect("non-empty")
}

pub fn smoke_layout() -> Layout {
    Layout::new(vec![Column::Surface, Column::Pos, Column::Chunk, Column::Label]).expect("valid layout")
}

/// `n` smoke sentences drawn from `seed`.
pub fn smoke_corpus(seed: u64, n: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n).map(|_| smoke_sentence(&mut rng)).collect();
    Corpus::new(smoke_layout(), sentences)
}

/// Training and held-out splits over the same vocabulary.
pub fn smoke_split(seed: u64) -> (Corpus, Corpus) {
    (
        smoke_corpus(seed, SMOKE_SENTENCES),
        smoke_corpus(seed ^ 0x005e_ed0f_4e1d, SMOKE_SENTENCES / 5),
    )
}

/// Every smoke word with its class: `2t` for B-words of type `t`, `2t + 1`
/// for its I-words, and `8` for O-words.
pub fn smoke_vocabulary() -> Vec<(&'static str, usize)> {
    let mut out = Vec::new();
    for t in 0..ENTITY_TYPES.len() {
        out.extend(BEGIN_WORDS[t].iter().map(|w| (*w, 2 * t)));
        out.extend(INSIDE_WORDS[t].iter().map(|w| (*w, 2 * t + 1)));
    }
    out.extend(OUTSIDE_WORDS.iter().map(|w| (*w, 2 * ENTITY_TYPES.len())));
    out
}

/// Cluster paths and embeddings for the smoke vocabulary. Words with the
/// same label share a cluster prefix and lie near a shared centre.
pub fn smoke_lexicons(seed: u64, dim: usize) -> Lexicons {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = 2 * ENTITY_TYPES.len() + 1;
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut clusters = ClusterLexicon::new();
    let mut embeddings = EmbeddingLexicon::new(dim);
    for (i, (word, class)) in smoke_vocabulary().into_iter().enumerate() {
        let bits = format!("{:04b}{:06b}", class, i % 64);
        clusters.insert(word, bits).expect("bitstring");
        let v = centres[class].iter().map(|c| c + rng.random_range(-0.1..0.1)).collect();
        embeddings.insert(word, v).expect("finite vector");
    }
    Lexicons {
        clusters: Some(clusters),
        embeddings: Some(embeddings),
    }
}

const RANDOM_SYLLABLES: &[&str] = &[
    "a", "Hà", "Nội", "nguyễn", "TP", "HCM", "123", "3.5", "10/2", "x-y", "kg", "5kg", "U23", "iPhone", "ĐHQG", "đ",
    "ơ", "Ư", "G.", "..", "%", "(", ")", "1,5", "ABC", "Việt", "nam", "e", "2024", "Q1", "'", "ö",
];

/// A random sentence of 1 to `max_len` tokens with random surfaces, some of
/// them multi-syllable, and a random valid BIO labeling.
pub fn random_sentence<R: Rng>(rng: &mut R, max_len: usize) -> Sentence {
    let len = rng.random_range(1..=max_len.max(1));
    let mut prev: Option<Tag> = None;
    let tokens = (0..len)
        .map(|_| {
            let syllables = rng.random_range(1..=3);
            let surface: Vec<&str> = (0..syllables).map(|_| *RANDOM_SYLLABLES.choose(rng).unwrap()).collect();
            let ty = ENTITY_TYPES.choose(rng).unwrap().to_string();
            let tag = match rng.random_range(0..3) {
                0 => Tag::Outside,
                1 => Tag::Begin(ty),
                _ => match &prev {
                    Some(p @ (Tag::Begin(_) | Tag::Inside(_))) => Tag::Inside(p.entity_type().unwrap().into()),
                    _ => Tag::Begin(ty),
                },
            };
            prev = Some(tag.clone());
            token(&surface.join("_"), tag, "N", "B-NP")
        })
        .collect();
    Sentence::new(tokens).expect("non-empty")
}

/// `n` random sentences in the smoke layout.
pub fn random_corpus(seed: u64, n: usize, max_len: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n).map(|_| random_sentence(&mut rng, max_len)).collect();
    Corpus::new(smoke_layout(), sentences)
}

/// Plain-text lines of syllables drawn from a Zipf-like distribution over
/// `vocab` words, for cluster benchmarks.
pub fn random_text(seed: u64, lines: usize, vocab: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..lines {
        let n = rng.random_range(3..=15);
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            let u: f64 = rng.random();
            let w = ((vocab as f64).powf(u) as usize).min(vocab) - 1;
            out.push_str(&format!("w{w}"));
        }
        out.push('\n');
    }
    out
}
