mod common;

use std::sync::Arc;

use proptest::prelude::*;

use mdagent_core::gateway::{
    ChatBackend, Matcher, ScriptRule, ScriptedBackend, ScriptedPolicy, ScriptedResponse, UrlCitation,
};
use mdagent_core::retrieval::{
    chunk_text, citation_violations, CorpusIndex, GatewayWebSearch, Literature, Synthesizer, WebSearch, CHUNK_CHARS,
    CHUNK_OVERLAP, NO_PASSAGES,
};

fn corpus() -> CorpusIndex {
    CorpusIndex::from_dir(&common::fixtures().join("corpus")).unwrap()
}

fn literature() -> Literature {
    Literature::new(corpus(), Synthesizer::Extractive)
}

fn fixed_reply(text: &str) -> Arc<dyn ChatBackend> {
    Arc::new(ScriptedBackend::new(ScriptedPolicy {
        policy_id: "fixed".into(),
        description: String::new(),
        rules: vec![ScriptRule {
            when: Matcher::Always,
            respond: ScriptedResponse { text: text.into(), ..Default::default() },
        }],
    }))
}

#[test]
fn fifty_answers_have_no_citation_violations() {
    let lit = literature();
    let mut answered = 0;
    for q in common::corpus_questions() {
        let a = lit.answer(&q).unwrap();
        let problems = citation_violations(&lit.index, &a);
        assert!(problems.is_empty(), "{q}: {problems:?}\n{}", a.render());
        if !a.is_empty() {
            answered += 1;
            for c in &a.citations {
                let chunk = lit.index.chunk(&c.doc_id, c.chunk).unwrap();
                assert!(chunk.text.contains(&c.excerpt));
            }
        }
    }
    assert!(answered >= 45, "only {answered} answered");
}

#[test]
fn trypsin_temperature_is_found_with_citation() {
    let a = literature().answer("What is the MD simulation temperature for the 3PTB protein?").unwrap();
    assert!(a.answer.contains("298.15 K"), "{}", a.answer);
    assert!(a.citations.iter().any(|c| c.doc_id == "trypsin_benzamidine" && c.excerpt.contains("298.15 K")));
    assert!(a.answer.contains("[1]"));
}

#[test]
fn unrelated_question_has_no_passages() {
    let a = literature().answer("quokka zeppelin xylophone").unwrap();
    assert_eq!(a.answer, NO_PASSAGES);
    assert!(a.citations.is_empty());
    assert!(citation_violations(&corpus(), &a).is_empty());
}

#[test]
fn empty_corpus_has_no_passages() {
    let dir = tempfile::tempdir().unwrap();
    let lit = Literature::new(CorpusIndex::from_dir(dir.path()).unwrap(), Synthesizer::Extractive);
    assert_eq!(lit.answer("What temperature?").unwrap().answer, NO_PASSAGES);
}

#[test]
fn unreadable_files_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("good.md"), "Lysozyme was simulated at 300 K.").unwrap();
    std::fs::write(dir.path().join("bad.md"), [0xff, 0xfe, 0x00, 0x80]).unwrap();
    std::fs::write(dir.path().join("ignored.pdf"), "x").unwrap();
    let index = CorpusIndex::from_dir(dir.path()).unwrap();
    assert_eq!(index.chunk_counts(), vec![("good".to_string(), 1)]);
    assert_eq!(index.skipped.len(), 1);
}

#[test]
fn digest_is_stable_and_content_sensitive() {
    assert_eq!(corpus().digest(), corpus().digest());
    let dir = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(common::fixtures().join("corpus")).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    assert_eq!(CorpusIndex::from_dir(dir.path()).unwrap().digest(), corpus().digest());
    std::fs::write(dir.path().join("extra.md"), "One more note.").unwrap();
    assert_ne!(CorpusIndex::from_dir(dir.path()).unwrap().digest(), corpus().digest());
}

#[test]
fn saved_index_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    let index = corpus();
    index.save(&path).unwrap();
    let loaded = CorpusIndex::load(&path).unwrap();
    assert_eq!(loaded.digest(), index.digest());
    let q = "3PTB temperature";
    let a: Vec<_> = index.search(q, 3).iter().map(|h| h.chunk.locator()).collect();
    let b: Vec<_> = loaded.search(q, 3).iter().map(|h| h.chunk.locator()).collect();
    assert_eq!(a, b);
}

/// Chunk count for a text of `len` characters, computed by hand.
fn expected_chunks(len: usize) -> usize {
    if len == 0 {
        0
    } else if len <= CHUNK_CHARS {
        1
    } else {
        let step = CHUNK_CHARS - CHUNK_OVERLAP;
        (len - CHUNK_CHARS).div_ceil(step) + 1
    }
}

#[test]
fn chunk_counts_match_window_arithmetic() {
    let index = corpus();
    for (doc, n) in index.chunk_counts() {
        let text = std::fs::read_to_string(common::fixtures().join(format!("corpus/{doc}.md"))).unwrap();
        assert_eq!(n, expected_chunks(text.chars().count()), "{doc}");
    }
    let long = "lysozyme ".repeat(500);
    let index = CorpusIndex::from_texts([("long", "long.md", long.as_str())]);
    assert_eq!(index.chunk_counts(), vec![("long".to_string(), expected_chunks(4500))]);
    assert_eq!(expected_chunks(4500), 4);
}

#[test]
fn model_synthesis_drops_uncited_and_out_of_range_claims() {
    let reply = "The 3PTB system was simulated at 298.15 K [1]. Benzamidine is a purple dragon. \
                 The moon is made of cheese [42].";
    let lit = Literature::new(corpus(), Synthesizer::Model(fixed_reply(reply)));
    let a = lit.answer("What is the simulation temperature for 3PTB?").unwrap();
    assert!(citation_violations(&lit.index, &a).is_empty(), "{}", a.render());
    assert!(a.answer.contains("298.15 K"));
    assert!(!a.answer.contains("dragon"));
    assert!(!a.answer.contains("cheese"));
}

#[test]
fn model_synthesis_without_citations_is_no_passages() {
    let lit = Literature::new(corpus(), Synthesizer::Model(fixed_reply("I think it was about 300 K.")));
    assert_eq!(lit.answer("3PTB temperature").unwrap().answer, NO_PASSAGES);
}

#[test]
fn web_search_returns_provider_citations() {
    let backend: Arc<dyn ChatBackend> = Arc::new(ScriptedBackend::new(ScriptedPolicy {
        policy_id: "web".into(),
        description: String::new(),
        rules: vec![ScriptRule {
            when: Matcher::Always,
            respond: ScriptedResponse {
                text: "GAFF2 lacks a type for this chlorine name.".into(),
                citations: vec![UrlCitation {
                    url: "https://ambermd.org/".into(),
                    title: "AmberTools".into(),
                    excerpt: "atom types".into(),
                }],
                ..Default::default()
            },
        }],
    }));
    let found = GatewayWebSearch::new(backend).search("tleap does not have a type Cl1").unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].url, "https://ambermd.org/");
}

proptest! {
    #[test]
    fn chunks_cover_text_with_fixed_overlap(text in "[a-z ]{0,5000}") {
        let chunks = chunk_text(&text, CHUNK_CHARS, CHUNK_OVERLAP);
        let chars: Vec<char> = text.chars().collect();
        prop_assert_eq!(chunks.len(), expected_chunks(chars.len()));
        if let (Some(first), Some(last)) = (chunks.first(), chunks.last()) {
            prop_assert_eq!(first.0, 0);
            prop_assert_eq!(last.1, chars.len());
        }
        for w in chunks.windows(2) {
            prop_assert_eq!(w[0].1 - w[1].0, CHUNK_OVERLAP);
        }
        for (start, end, body) in &chunks {
            prop_assert_eq!(body.clone(), chars[*start..*end].iter().collect::<String>());
        }
    }

    #[test]
    fn arbitrary_questions_never_break_citations(q in "[a-zA-Z0-9 ?.]{0,60}") {
        let lit = literature();
        let a = lit.answer(&q).unwrap();
        prop_assert!(citation_violations(&lit.index, &a).is_empty());
    }
}
