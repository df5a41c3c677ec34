use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::content_tokens;

/// Latent attribute kinds a claim may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AspectKind {
    Author,
    Topic,
    Domain,
}

impl AspectKind {
    pub const ALL: [AspectKind; 3] = [AspectKind::Author, AspectKind::Topic, AspectKind::Domain];

    pub fn as_str(self) -> &'static str {
        match self {
            AspectKind::Author => "author",
            AspectKind::Topic => "topic",
            AspectKind::Domain => "domain",
        }
    }
}

impl fmt::Display for AspectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AspectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "author" => Ok(AspectKind::Author),
            "topic" => Ok(AspectKind::Topic),
            "domain" => Ok(AspectKind::Domain),
            other => Err(format!("unknown aspect kind {other:?}")),
        }
    }
}

/// A statement under verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub text: String,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub aspects: BTreeMap<AspectKind, String>,
}

impl Claim {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = content_tokens(&text);
        Self {
            text,
            tokens,
            aspects: BTreeMap::new(),
        }
    }

    pub fn with_aspect(mut self, kind: AspectKind, value: impl Into<String>) -> Self {
        self.aspects.insert(kind, value.into());
        self
    }

    /// Kinds to run the model under: those present, or all of them.
    pub fn active_kinds(&self) -> Vec<AspectKind> {
        if self.aspects.is_empty() {
            AspectKind::ALL.to_vec()
        } else {
            self.aspects.keys().copied().collect()
        }
    }
}
