use std::fs;
use std::path::PathBuf;

use factcheck_core::retrieval::{extract_article, SearchResult};
use factcheck_core::text::{build_vocabulary, content_tokens, segment_sentences, tokenize};
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn extraction_matches_golden_pages() {
    let dir = fixtures().join("extraction");
    let mut pages: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .collect();
    pages.sort();
    assert_eq!(pages.len(), 10);
    for page in pages {
        let html = fs::read_to_string(&page).unwrap();
        let golden = fs::read_to_string(page.with_extension("txt")).unwrap();
        let result = SearchResult {
            url: format!(
                "https://fixture.example/{}",
                page.file_name().unwrap().to_string_lossy()
            ),
            title: String::new(),
            raw_html: html,
            rank: 1,
        };
        let article = extract_article(&result).unwrap();
        assert_eq!(article.body_text(), golden.trim_end(), "{}", page.display());
        assert_eq!(article.domain, "fixture.example");
        assert!(article.publication_date.is_some(), "{}", page.display());
        assert!(article.authors.is_some());
    }
}

#[test]
fn segmentation_fixture() {
    let dir = fixtures().join("segmentation");
    let input = fs::read_to_string(dir.join("input.txt")).unwrap();
    let expected: Vec<String> = fs::read_to_string(dir.join("expected.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(expected.len(), 50);
    let got: Vec<String> = segment_sentences(&input).into_iter().map(|s| s.text).collect();
    assert_eq!(got, expected);
}

#[test]
fn segment_indices_are_positions() {
    let s = segment_sentences("One. Two? Three!");
    assert_eq!(s.iter().map(|x| x.index).collect::<Vec<_>>(), [0, 1, 2]);
}

proptest! {
    #[test]
    fn tokenizing_joined_tokens_is_idempotent(text in "[A-Za-z0-9 ,.!?'\"()-]{0,80}") {
        let once = tokenize(&text);
        let twice = tokenize(&once.join(" "));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn vocabulary_size_is_distinct_tokens_plus_specials(
        sentences in prop::collection::vec("[a-e ]{0,20}", 0..8)
    ) {
        let corpus: Vec<Vec<String>> = sentences.iter().map(|s| content_tokens(s)).collect();
        let distinct: std::collections::BTreeSet<&String> = corpus.iter().flatten().collect();
        let vocab = build_vocabulary(&corpus, 1);
        prop_assert_eq!(vocab.len(), distinct.len() + 2);
    }
}
