//! Provider-side web search pass-through.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gateway::{ChatBackend, Message};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub title: String,
    pub url: String,
    pub excerpt: String,
}

pub trait WebSearch: Send + Sync {
    fn search(&self, query: &str) -> Result<Vec<Snippet>, String>;
}

const SEARCH_INSTRUCTIONS: &str =
    "Search the web for the query and summarize what you find. Cite every source you use.";

/// Asks a backend whose requests carry the provider search flag and
/// returns the URL citations attached to its reply.
pub struct GatewayWebSearch {
    backend: Arc<dyn ChatBackend>,
}

impl GatewayWebSearch {
    pub fn new(backend: Arc<dyn ChatBackend>) -> Self {
        Self { backend }
    }
}

impl WebSearch for GatewayWebSearch {
    fn search(&self, query: &str) -> Result<Vec<Snippet>, String> {
        let history = [Message::system(SEARCH_INSTRUCTIONS), Message::user(query)];
        let reply = self.backend.complete(&history, &[]).map_err(|e| e.to_string())?;
        Ok(reply
            .citations
            .into_iter()
            .map(|c| Snippet { title: c.title, url: c.url, excerpt: c.excerpt })
            .collect())
    }
}
