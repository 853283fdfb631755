//! Cited answers synthesized only from retrieved chunks.

use std::collections::BTreeSet;
use std::sync::Arc;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::corpus::{tokenize, Chunk, CorpusIndex, DEFAULT_K};
use crate::gateway::{ChatBackend, GatewayError, Message};

pub const NO_PASSAGES: &str = "no relevant passages";

const MAX_SENTENCES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub doc_id: String,
    pub chunk: usize,
    /// Verbatim text from the cited chunk.
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedAnswer {
    pub question: String,
    /// Sentences each end with one or more `[n]` markers into `citations`.
    pub answer: String,
    pub citations: Vec<Citation>,
}

impl CitedAnswer {
    pub fn none(question: &str) -> Self {
        Self { question: question.to_string(), answer: NO_PASSAGES.to_string(), citations: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.citations.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.answer.clone();
        if !self.citations.is_empty() {
            out.push_str("\nSources:");
            for (i, c) in self.citations.iter().enumerate() {
                out.push_str(&format!("\n[{}] {}#{}: \"{}\"", i + 1, c.doc_id, c.chunk, c.excerpt));
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("answer synthesis failed: {0}")]
    Gateway(#[from] GatewayError),
}

/// Sentences of a text as verbatim substrings.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for i in 0..bytes.len() {
        let end_mark = matches!(bytes[i], b'.' | b'?' | b'!')
            && bytes.get(i + 1).is_none_or(|c| c.is_ascii_whitespace());
        let paragraph = bytes[i] == b'\n' && bytes.get(i + 1) == Some(&b'\n');
        if end_mark || paragraph {
            let s = text[start..=i].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + 1;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

fn overlap(a: &BTreeSet<String>, text: &str) -> usize {
    tokenize(text).into_iter().collect::<BTreeSet<_>>().intersection(a).count()
}

/// How answers are composed from retrieved chunks.
#[derive(Clone)]
pub enum Synthesizer {
    /// Deterministic: the best-matching retrieved sentences, each cited.
    Extractive,
    /// A model writes the answer from numbered excerpts; sentences without
    /// a valid `[n]` marker are dropped.
    Model(Arc<dyn ChatBackend>),
}

pub struct Literature {
    pub index: CorpusIndex,
    pub synthesizer: Synthesizer,
    pub k: usize,
}

impl Literature {
    pub fn new(index: CorpusIndex, synthesizer: Synthesizer) -> Self {
        Self { index, synthesizer, k: DEFAULT_K }
    }

    pub fn answer(&self, question: &str) -> Result<CitedAnswer, RetrievalError> {
        let hits: Vec<&Chunk> = self.index.search(question, self.k).into_iter().map(|h| h.chunk).collect();
        if hits.is_empty() {
            return Ok(CitedAnswer::none(question));
        }
        match &self.synthesizer {
            Synthesizer::Extractive => Ok(extractive(question, &hits)),
            Synthesizer::Model(backend) => model_answer(backend.as_ref(), question, &hits),
        }
    }
}

fn extractive(question: &str, hits: &[&Chunk]) -> CitedAnswer {
    let terms: BTreeSet<String> = tokenize(question).into_iter().collect();
    let mut candidates: Vec<(usize, usize, usize, &str)> = Vec::new();
    for (rank, chunk) in hits.iter().enumerate() {
        for (pos, s) in sentences(&chunk.text).into_iter().enumerate() {
            let score = overlap(&terms, s);
            if score > 0 {
                candidates.push((score, rank, pos, s));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let best = candidates.first().map(|c| c.0).unwrap_or(0);
    let mut answer = Vec::new();
    let mut citations = Vec::new();
    let mut seen = BTreeSet::new();
    for (score, rank, _, s) in candidates {
        if answer.len() == MAX_SENTENCES || 2 * score < best {
            break;
        }
        if !seen.insert(s) {
            continue;
        }
        let chunk = hits[rank];
        citations.push(Citation { doc_id: chunk.doc_id.clone(), chunk: chunk.index, excerpt: s.to_string() });
        answer.push(format!("{s} [{}]", citations.len()));
    }
    if answer.is_empty() {
        return CitedAnswer::none(question);
    }
    CitedAnswer { question: question.to_string(), answer: answer.join(" "), citations }
}

pub(crate) const SYNTHESIS_INSTRUCTIONS: &str = "Answer only from the excerpts; cite each. End every sentence with the bracketed number of the excerpt that supports it, for example [2]. If the excerpts do not answer the question, reply exactly: no relevant passages";

fn model_answer(backend: &dyn ChatBackend, question: &str, hits: &[&Chunk]) -> Result<CitedAnswer, RetrievalError> {
    let mut prompt = format!("Question: {question}\n\nExcerpts:\n");
    for (i, chunk) in hits.iter().enumerate() {
        prompt.push_str(&format!("[{}] ({})\n{}\n\n", i + 1, chunk.locator(), chunk.text));
    }
    let history = [Message::system(SYNTHESIS_INSTRUCTIONS), Message::user(prompt)];
    let reply = backend.complete(&history, &[])?;
    let marker = Regex::new(r"\[(\d+)\]").expect("valid regex");
    let mut answer = Vec::new();
    let mut citations: Vec<Citation> = Vec::new();
    for sentence in sentences(&reply.content) {
        let cited: Vec<usize> = marker
            .captures_iter(sentence)
            .filter_map(|c| c[1].parse::<usize>().ok())
            .filter(|n| (1..=hits.len()).contains(n))
            .collect();
        if cited.is_empty() {
            continue;
        }
        let claim = marker.replace_all(sentence, "").trim().to_string();
        let claim_terms: BTreeSet<String> = tokenize(&claim).into_iter().collect();
        let mut refs = Vec::new();
        for n in cited {
            let chunk = hits[n - 1];
            let excerpt = sentences(&chunk.text)
                .into_iter()
                .max_by_key(|s| overlap(&claim_terms, s))
                .unwrap_or(&chunk.text)
                .to_string();
            let citation = Citation { doc_id: chunk.doc_id.clone(), chunk: chunk.index, excerpt };
            let idx = match citations.iter().position(|c| *c == citation) {
                Some(i) => i,
                None => {
                    citations.push(citation);
                    citations.len() - 1
                }
            };
            refs.push(format!("[{}]", idx + 1));
        }
        answer.push(format!("{claim} {}", refs.join("")));
    }
    if answer.is_empty() {
        return Ok(CitedAnswer::none(question));
    }
    Ok(CitedAnswer { question: question.to_string(), answer: answer.join(" "), citations })
}

/// Citations that do not resolve to a chunk containing their excerpt,
/// plus answer sentences without a marker.
pub fn citation_violations(index: &CorpusIndex, answer: &CitedAnswer) -> Vec<String> {
    let mut problems = Vec::new();
    for c in &answer.citations {
        match index.chunk(&c.doc_id, c.chunk) {
            Some(chunk) if chunk.text.contains(&c.excerpt) => {}
            Some(_) => problems.push(format!("{}#{}: excerpt not in chunk", c.doc_id, c.chunk)),
            None => problems.push(format!("{}#{}: no such chunk", c.doc_id, c.chunk)),
        }
    }
    if answer.answer != NO_PASSAGES {
        let marker = Regex::new(r"\[(\d+)\]\s*$").expect("valid regex");
        for s in answer.answer.split_inclusive(']').filter(|s| !s.trim().is_empty()) {
            if let Some(cap) = marker.captures(s.trim_end()) {
                let n: usize = cap[1].parse().unwrap_or(0);
                if n == 0 || n > answer.citations.len() {
                    problems.push(format!("marker [{n}] has no citation"));
                }
            } else {
                problems.push(format!("uncited text: {}", s.trim()));
            }
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{Matcher, ScriptRule, ScriptedBackend, ScriptedPolicy, ScriptedResponse};

    fn corpus() -> CorpusIndex {
        CorpusIndex::from_texts([
            (
                "trypsin",
                "trypsin.txt",
                "Trypsin benzamidine complex. The molecular dynamics simulation temperature for the 3PTB protein was 298.15 K. Pressure was 1 bar.",
            ),
            ("lyso", "lyso.txt", "Lysozyme was simulated in TIP3P water with ff14SB."),
        ])
    }

    #[test]
    fn sentence_split_keeps_decimals() {
        let s = sentences("T was 298.15 K. Next one? Yes!\n\nTail");
        assert_eq!(s, ["T was 298.15 K.", "Next one?", "Yes!", "Tail"]);
    }

    #[test]
    fn extractive_answer_is_cited() {
        let lit = Literature::new(corpus(), Synthesizer::Extractive);
        let a = lit.answer("molecular dynamics simulation temperature for 3PTB protein").unwrap();
        assert!(a.answer.contains("298.15 K"), "{}", a.answer);
        assert!(citation_violations(&lit.index, &a).is_empty());
        let none = lit.answer("zebra giraffe").unwrap();
        assert_eq!(none.answer, NO_PASSAGES);
        assert!(none.citations.is_empty());
    }

    #[test]
    fn model_answer_keeps_only_cited_sentences() {
        let policy = ScriptedPolicy {
            policy_id: "synth".into(),
            description: String::new(),
            rules: vec![ScriptRule {
                when: Matcher::Always,
                respond: ScriptedResponse {
                    text: "The temperature was 298.15 K [1]. I also think it was humid. Bad ref [9].".into(),
                    ..Default::default()
                },
            }],
        };
        let lit = Literature::new(corpus(), Synthesizer::Model(Arc::new(ScriptedBackend::new(policy))));
        let a = lit.answer("3PTB temperature").unwrap();
        assert_eq!(a.citations.len(), 1);
        assert!(a.answer.starts_with("The temperature was 298.15 K"));
        assert!(!a.answer.contains("humid"));
        assert!(citation_violations(&lit.index, &a).is_empty());
    }
}
