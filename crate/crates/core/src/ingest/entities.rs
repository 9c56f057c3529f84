use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::frames::Span;

/// Surface-form patterns per entity id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityLexicon {
    pub entries: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("entity `{0}` has no patterns")]
    NoPatterns(String),
    #[error("entity `{0}` has an empty pattern")]
    EmptyPattern(String),
}

impl EntityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, entity: &str, patterns: &[&str]) -> Self {
        self.entries
            .insert(entity.to_string(), patterns.iter().map(|p| p.to_string()).collect());
        self
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        for (id, pats) in &self.entries {
            if pats.is_empty() {
                return Err(LexiconError::NoPatterns(id.clone()));
            }
            if pats.iter().any(|p| pattern_tokens(p).is_empty()) {
                return Err(LexiconError::EmptyPattern(id.clone()));
            }
        }
        Ok(())
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.entries.contains_key(entity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub entity_id: String,
    pub span: Span,
}

/// Lowercases, trims surrounding punctuation and drops a possessive `'s`.
pub(crate) fn normalize_token(tok: &str) -> String {
    let lower = tok.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    let stripped = trimmed
        .strip_suffix("'s")
        .or_else(|| trimmed.strip_suffix("\u{2019}s"))
        .unwrap_or(trimmed);
    stripped
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

fn pattern_tokens(p: &str) -> Vec<String> {
    p.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Case-insensitive literal matching. At each position the longest pattern
/// wins (ties go to the smaller entity id); matches never overlap.
pub fn match_entities<S: AsRef<str>>(tokens: &[S], lexicon: &EntityLexicon) -> Vec<Mention> {
    let mut patterns: Vec<(Vec<String>, &str)> = lexicon
        .entries
        .iter()
        .flat_map(|(id, pats)| pats.iter().map(move |p| (pattern_tokens(p), id.as_str())))
        .filter(|(toks, _)| !toks.is_empty())
        .collect();
    patterns.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(b.1)));

    let norm: Vec<String> = tokens.iter().map(|t| normalize_token(t.as_ref())).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < norm.len() {
        let hit = patterns.iter().find(|(pat, _)| {
            i + pat.len() <= norm.len() && pat.iter().zip(&norm[i..]).all(|(p, t)| p == t)
        });
        match hit {
            Some((pat, id)) => {
                out.push(Mention {
                    entity_id: id.to_string(),
                    span: Span::new(i, i + pat.len() - 1),
                });
                i += pat.len();
            }
            None => i += 1,
        }
    }
    out
}
