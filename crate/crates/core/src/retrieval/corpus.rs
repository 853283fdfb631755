//! Plain-text corpus chunking and BM25 ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::sha256_hex;

pub const CHUNK_CHARS: usize = 1500;
pub const CHUNK_OVERLAP: usize = 200;
pub const DEFAULT_K: usize = 8;

const BM25_K1: f64 = 1.2;
const BM25_B: f64 = 0.75;

const STOPWORDS: [&str; 40] = [
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "how", "in", "is", "it", "its", "of", "on",
    "or", "that", "the", "this", "to", "was", "were", "what", "which", "with", "do", "does", "should", "used",
    "use", "we", "i", "you", "can", "into", "than", "these", "those",
];

/// Lowercased alphanumeric terms without stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub index: usize,
    /// Character offsets into the document text.
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl Chunk {
    pub fn locator(&self) -> String {
        format!("{}#{}", self.doc_id, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDoc {
    pub doc_id: String,
    pub title: String,
    pub source: String,
    pub chunks: Vec<Chunk>,
}

/// Splits text into windows of `size` characters overlapping by `overlap`.
pub fn chunk_text(text: &str, size: usize, overlap: usize) -> Vec<(usize, usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }
    let step = size.saturating_sub(overlap).max(1);
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + size).min(chars.len());
        out.push((start, end, chars[start..end].iter().collect()));
        if end == chars.len() {
            break;
        }
        start += step;
    }
    out
}

fn title_of(text: &str, fallback: &str) -> String {
    text.lines()
        .map(|l| l.trim().trim_start_matches('#').trim())
        .find(|l| !l.is_empty())
        .unwrap_or(fallback)
        .to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CorpusIndex {
    pub docs: Vec<CorpusDoc>,
    /// Files that could not be read as text.
    pub skipped: Vec<String>,
    #[serde(skip)]
    stats: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Stats {
    terms: Vec<BTreeMap<String, usize>>,
    lengths: Vec<usize>,
    df: BTreeMap<String, usize>,
    avg_len: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredChunk<'a> {
    pub chunk: &'a Chunk,
    pub score: f64,
}

impl CorpusIndex {
    /// Builds an index from (doc_id, source, text) triples.
    pub fn from_texts<I, S>(docs: I) -> Self
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: AsRef<str>,
    {
        let docs = docs
            .into_iter()
            .map(|(id, source, text)| {
                let id = id.as_ref().to_string();
                let text = text.as_ref();
                let chunks = chunk_text(text, CHUNK_CHARS, CHUNK_OVERLAP)
                    .into_iter()
                    .enumerate()
                    .map(|(index, (start, end, text))| Chunk { doc_id: id.clone(), index, start, end, text })
                    .collect();
                CorpusDoc { title: title_of(text, &id), doc_id: id, source: source.as_ref().to_string(), chunks }
            })
            .collect();
        let mut index = Self { docs, skipped: Vec::new(), stats: None };
        index.rebuild();
        index
    }

    /// Indexes every `.txt` and `.md` file in a directory, sorted by name.
    pub fn from_dir(dir: &Path) -> Result<Self, std::io::Error> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt" || x == "md"))
            .collect();
        paths.sort();
        let mut texts = Vec::new();
        let mut skipped = Vec::new();
        for path in paths {
            let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            match std::fs::read_to_string(&path) {
                Ok(text) => texts.push((id, path.display().to_string(), text)),
                Err(e) => {
                    log::warn!("skipping unreadable corpus file {}: {e}", path.display());
                    skipped.push(path.display().to_string());
                }
            }
        }
        let mut index = Self::from_texts(texts);
        index.skipped = skipped;
        Ok(index)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut index: Self = serde_json::from_str(&text).map_err(|e| format!("invalid index {}: {e}", path.display()))?;
        index.rebuild();
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<(), std::io::Error> {
        std::fs::write(path, self.to_json())
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    /// Content digest over document ids and chunks. Independent of where
    /// the corpus lives on disk.
    pub fn digest(&self) -> String {
        let content: Vec<(&str, &[Chunk])> = self.docs.iter().map(|d| (d.doc_id.as_str(), d.chunks.as_slice())).collect();
        sha256_hex(serde_json::to_string(&content).unwrap_or_default().as_bytes())
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.docs.iter().flat_map(|d| d.chunks.iter())
    }

    pub fn chunk(&self, doc_id: &str, index: usize) -> Option<&Chunk> {
        self.docs.iter().find(|d| d.doc_id == doc_id)?.chunks.get(index)
    }

    pub fn chunk_counts(&self) -> Vec<(String, usize)> {
        self.docs.iter().map(|d| (d.doc_id.clone(), d.chunks.len())).collect()
    }

    fn rebuild(&mut self) {
        let mut stats = Stats::default();
        for chunk in self.docs.iter().flat_map(|d| d.chunks.iter()) {
            let mut tf = BTreeMap::new();
            let tokens = tokenize(&chunk.text);
            for t in &tokens {
                *tf.entry(t.clone()).or_insert(0) += 1;
            }
            for t in tf.keys() {
                *stats.df.entry(t.clone()).or_insert(0) += 1;
            }
            stats.lengths.push(tokens.len());
            stats.terms.push(tf);
        }
        let n = stats.lengths.len().max(1) as f64;
        stats.avg_len = stats.lengths.iter().sum::<usize>() as f64 / n;
        self.stats = Some(stats);
    }

    /// Top `k` chunks with a positive BM25 score, best first; ties keep
    /// corpus order.
    pub fn search(&self, query: &str, k: usize) -> Vec<ScoredChunk<'_>> {
        let Some(stats) = &self.stats else {
            return Vec::new();
        };
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let n = stats.lengths.len() as f64;
        let mut scored: Vec<ScoredChunk<'_>> = self
            .chunks()
            .enumerate()
            .filter_map(|(i, chunk)| {
                let tf = &stats.terms[i];
                let len = stats.lengths[i] as f64;
                let score: f64 = terms
                    .iter()
                    .filter_map(|t| {
                        let f = *tf.get(t)? as f64;
                        let df = stats.df[t] as f64;
                        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                        let norm = 1.0 - BM25_B + BM25_B * len / stats.avg_len.max(1e-9);
                        Some(idf * f * (BM25_K1 + 1.0) / (f + BM25_K1 * norm))
                    })
                    .sum();
                (score > 0.0).then_some(ScoredChunk { chunk, score })
            })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score));
        scored.truncate(k);
        scored
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_corpus_finds_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let index = CorpusIndex::from_dir(dir.path()).unwrap();
        assert!(index.docs.is_empty());
        assert!(index.search("temperature", 8).is_empty());
    }

    #[test]
    fn dir_index_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [("a.txt", "alpha beta"), ("b.md", "# Title\ngamma"), ("c.txt", "delta")] {
            std::fs::write(dir.path().join(name), body).unwrap();
        }
        std::fs::write(dir.path().join("bad.txt"), [0xff, 0xfe, 0x00]).unwrap();
        let a = CorpusIndex::from_dir(dir.path()).unwrap();
        let b = CorpusIndex::from_dir(dir.path()).unwrap();
        assert_eq!(a.docs.len(), 3);
        assert_eq!(a.skipped.len(), 1);
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.docs[1].title, "Title");
        let path = dir.path().join("index.json");
        a.save(&path).unwrap();
        let loaded = CorpusIndex::load(&path).unwrap();
        assert_eq!(loaded.digest(), a.digest());
        assert_eq!(loaded.search("gamma", 8).len(), 1);
    }

    #[test]
    fn ranking_prefers_specific_terms() {
        let index = CorpusIndex::from_texts([
            ("x", "x", "trypsin simulation temperature 298.15 K"),
            ("y", "y", "simulation of lysozyme in water"),
        ]);
        let hits = index.search("trypsin temperature", 8);
        assert_eq!(hits[0].chunk.doc_id, "x");
        assert_eq!(hits.len(), 1);
        assert!(index.search("zebra", 8).is_empty());
    }

    proptest! {
        #[test]
        fn chunks_reconstruct_text(text in "[a-z .\n]{0,5000}", size in 50usize..400, overlap in 0usize..49) {
            let chunks = chunk_text(&text, size, overlap);
            let mut rebuilt = String::new();
            let mut covered = 0;
            for (start, end, body) in &chunks {
                prop_assert!(*start <= covered);
                let skip = covered - start;
                rebuilt.extend(body.chars().skip(skip));
                covered = *end;
                prop_assert!(body.chars().count() <= size);
            }
            prop_assert_eq!(rebuilt, text);
        }
    }
}
