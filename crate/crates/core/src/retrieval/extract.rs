use chrono::NaiveDate;
use scraper::{ElementRef, Html, Node, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::search::SearchResult;
use crate::text::{segment_sentences, Sentence};

/// Extracted page text and metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub url: String,
    pub title: String,
    pub sentences: Vec<Sentence>,
    /// `YYYY-MM-DD`.
    pub publication_date: Option<String>,
    pub authors: Option<Vec<String>>,
    /// Lowercase host without a leading `www.`.
    pub domain: String,
}

impl Article {
    /// Wraps plain text that did not come from a search result.
    pub fn from_text(url: impl Into<String>, title: impl Into<String>, text: &str) -> Self {
        let url = url.into();
        let domain = domain_of(&url);
        Self {
            url,
            title: title.into(),
            sentences: segment_blocks(text.split("\n\n")),
            publication_date: None,
            authors: None,
            domain,
        }
    }

    /// Sentence texts joined by newlines.
    pub fn body_text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("no readable body text at {url}")]
    EmptyBody { url: String },
}

const SKIPPED: &[&str] = &["script", "style", "noscript", "template"];
const BOILERPLATE: &[&str] = &["nav", "header", "footer", "aside", "form"];
const AUTHOR_KEYS: &[&str] = &["author", "article:author", "dc.creator", "byl", "parsely-author"];
const DATE_KEYS: &[&str] = &[
    "article:published_time",
    "og:published_time",
    "datepublished",
    "date",
    "pubdate",
    "publishdate",
    "dc.date",
    "dc.date.issued",
    "parsely-pub-date",
];

fn selector(s: &str) -> Selector {
    Selector::parse(s).expect("static selector")
}

fn looks_like_html(raw: &str) -> bool {
    let t = raw.trim_start();
    t.starts_with('<') || t.contains("</")
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Elements whose boundaries separate words; inline elements such as
/// `<a>` or `<em>` join their text to the neighbours.
const BLOCKS: &[&str] = &[
    "address",
    "article",
    "blockquote",
    "br",
    "dd",
    "div",
    "dl",
    "dt",
    "figcaption",
    "figure",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "hr",
    "li",
    "main",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "td",
    "th",
    "tr",
    "ul",
    "nav",
    "header",
    "footer",
    "aside",
    "form",
    "title",
    "body",
];

/// Text under `el`, skipping subtrees rooted at any element in `skip`.
fn element_text(el: ElementRef<'_>, skip: &[&str]) -> String {
    fn walk(node: ego_tree::NodeRef<'_, Node>, skip: &[&str], out: &mut String) {
        match node.value() {
            Node::Text(t) => out.push_str(t),
            Node::Element(e) => {
                if skip.contains(&e.name()) {
                    return;
                }
                let block = BLOCKS.contains(&e.name());
                if block {
                    out.push(' ');
                }
                for child in node.children() {
                    walk(child, skip, out);
                }
                if block {
                    out.push(' ');
                }
            }
            _ => {
                for child in node.children() {
                    walk(child, skip, out);
                }
            }
        }
    }
    let mut out = String::new();
    walk(*el, skip, &mut out);
    collapse_ws(&out)
}

fn in_boilerplate(el: ElementRef<'_>) -> bool {
    el.ancestors()
        .any(|a| a.value().as_element().is_some_and(|e| BOILERPLATE.contains(&e.name())))
}

/// All visible text of a page (or the input itself when it is not HTML).
pub fn visible_text(raw: &str) -> String {
    if !looks_like_html(raw) {
        return collapse_ws(raw);
    }
    let doc = Html::parse_document(raw);
    element_text(doc.root_element(), SKIPPED)
}

fn segment_blocks<'a>(blocks: impl IntoIterator<Item = &'a str>) -> Vec<Sentence> {
    blocks
        .into_iter()
        .flat_map(segment_sentences)
        .enumerate()
        .map(|(index, s)| Sentence { index, ..s })
        .collect()
}

fn domain_of(url: &str) -> String {
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_lowercase))
        .map(|h| h.strip_prefix("www.").map(str::to_string).unwrap_or(h))
        .unwrap_or_default()
}

fn parse_date(raw: &str) -> Option<String> {
    let head: String = raw.trim().chars().take(10).collect();
    NaiveDate::parse_from_str(&head, "%Y-%m-%d")
        .ok()
        .map(|d| d.format("%Y-%m-%d").to_string())
}

/// Pulls title, body sentences, date and authors out of a fetched page.
///
/// Body text comes from `<p>` blocks outside navigation chrome; pages with
/// no paragraphs fall back to the visible text of `<body>`. Input that is
/// not HTML at all is treated as plain text with blank-line paragraphs.
pub fn extract_article(result: &SearchResult) -> Result<Article, ExtractError> {
    let raw = result.raw_html.as_str();
    let domain = domain_of(&result.url);
    let empty = || ExtractError::EmptyBody {
        url: result.url.clone(),
    };

    if !looks_like_html(raw) {
        let article = Article::from_text(result.url.clone(), result.title.clone(), raw);
        if article.sentences.is_empty() {
            return Err(empty());
        }
        return Ok(article);
    }

    let doc = Html::parse_document(raw);

    let title = doc
        .select(&selector("title"))
        .chain(doc.select(&selector("h1")))
        .chain(doc.select(&selector("h2")))
        .map(|e| element_text(e, SKIPPED))
        .find(|t| !t.is_empty())
        .unwrap_or_else(|| result.title.clone());

    let mut blocks: Vec<String> = doc
        .select(&selector("p"))
        .filter(|p| !in_boilerplate(*p))
        .map(|p| element_text(p, SKIPPED))
        .filter(|t| !t.is_empty())
        .collect();
    if blocks.is_empty() {
        let body = doc.select(&selector("body")).next();
        let mut skip = SKIPPED.to_vec();
        skip.extend_from_slice(BOILERPLATE);
        if let Some(body) = body {
            let text = element_text(body, &skip);
            if !text.is_empty() {
                blocks.push(text);
            }
        }
    }
    let sentences = segment_blocks(blocks.iter().map(String::as_str));
    if sentences.is_empty() {
        return Err(empty());
    }

    let mut authors: Vec<String> = Vec::new();
    let mut date = None;
    for meta in doc.select(&selector("meta")) {
        let attrs = meta.value();
        let key = ["name", "property", "itemprop"]
            .iter()
            .find_map(|a| attrs.attr(a))
            .map(str::to_lowercase);
        let (Some(key), Some(content)) = (key, attrs.attr("content")) else {
            continue;
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if AUTHOR_KEYS.contains(&key.as_str()) && !authors.iter().any(|a| a == content) {
            authors.push(content.to_string());
        } else if date.is_none() && DATE_KEYS.contains(&key.as_str()) {
            date = parse_date(content);
        }
    }
    if date.is_none() {
        date = doc
            .select(&selector("time[datetime]"))
            .find_map(|t| t.value().attr("datetime").and_then(parse_date));
    }

    Ok(Article {
        url: result.url.clone(),
        title,
        sentences,
        publication_date: date,
        authors: (!authors.is_empty()).then_some(authors),
        domain,
    })
}
