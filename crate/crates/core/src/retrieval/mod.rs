//! Evidence retrieval: search, article extraction and similarity filtering.

mod extract;
mod filter;
mod search;

pub use extract::{extract_article, visible_text, Article, ExtractError};
pub use filter::{cosine, filter_snippets, sentence_vector, DimensionMismatch, Snippet, SNIPPET_THRESHOLD};
pub use search::{
    search, BackendMode, FixtureIndex, LiveSearch, RetrievalError, SearchBackend, SearchResult, DEFAULT_TOP_K,
};

/// Articles retrieved for one claim, in search-rank order.
#[derive(Debug, Default)]
pub struct RetrievalBatch {
    pub articles: Vec<Article>,
    /// `(url, reason)` for every page that could not be fetched or extracted.
    pub failures: Vec<(String, String)>,
}

/// Extracted page, or the URL and reason it was skipped.
type PageOutcome = Result<Article, (String, String)>;

/// Searches for `claim_text` and extracts every returned page.
///
/// Pages are fetched (when the backend returned no body) and extracted
/// concurrently; a failing page is recorded and skipped. Only the search
/// call itself can fail the batch.
pub fn retrieve_articles(
    backend: &dyn SearchBackend,
    claim_text: &str,
    k: usize,
) -> Result<RetrievalBatch, RetrievalError> {
    let results = search(backend, claim_text, k)?;
    let mut outcomes: Vec<(usize, PageOutcome)> = std::thread::scope(|scope| {
        let handles: Vec<_> = results
            .into_iter()
            .map(|mut result| {
                scope.spawn(move || {
                    let rank = result.rank;
                    if result.raw_html.trim().is_empty() {
                        match backend.fetch(&result.url) {
                            Ok(body) => result.raw_html = body,
                            Err(e) => return (rank, Err((result.url, e.to_string()))),
                        }
                    }
                    let outcome = extract_article(&result).map_err(|e| (result.url.clone(), e.to_string()));
                    (rank, outcome)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction worker panicked"))
            .collect()
    });
    outcomes.sort_by_key(|(rank, _)| *rank);

    let mut batch = RetrievalBatch::default();
    for (_, outcome) in outcomes {
        match outcome {
            Ok(article) => batch.articles.push(article),
            Err(failure) => batch.failures.push(failure),
        }
    }
    Ok(batch)
}
