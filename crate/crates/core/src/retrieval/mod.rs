//! Literature question answering over a local corpus and web search,
//! both exposed as agent tools.

mod answer;
mod corpus;
mod web;

pub use answer::{citation_violations, sentences, Citation, CitedAnswer, Literature, RetrievalError, Synthesizer, NO_PASSAGES};
pub use corpus::{chunk_text, tokenize, Chunk, CorpusDoc, CorpusIndex, ScoredChunk, CHUNK_CHARS, CHUNK_OVERLAP, DEFAULT_K};
pub use web::{GatewayWebSearch, Snippet, WebSearch};
