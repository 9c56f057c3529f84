//! CoNLL-X style dependency parses.
//!
//! Only the index, form, head and relation columns are read. Ten-column
//! (or any 8+ column) rows use columns 1, 2, 7 and 8; four-column rows are
//! read as `index form head relation`. Blank lines separate sentences and
//! `#` lines are comments, except `# sent_id = ...` which names the sentence.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    /// 1-based head position, 0 for the root.
    pub head: usize,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyParse {
    pub sent_id: Option<String>,
    pub tokens: Vec<Token>,
}

impl DependencyParse {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head of the 1-based token `index`.
    pub fn head(&self, index: usize) -> usize {
        self.tokens[index - 1].head
    }

    pub fn forms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.form.clone()).collect()
    }

    /// 1-based indices of tokens attached to the artificial root.
    pub fn roots(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .filter(|t| t.head == 0)
            .map(|t| t.index)
            .collect()
    }

    /// Parsers sometimes emit several roots; they are tolerated but flagged.
    pub fn has_multiple_roots(&self) -> bool {
        self.roots().len() > 1
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ConllError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConllError {
    ConllError {
        line,
        message: message.into(),
    }
}

pub fn parse_conll(text: &str) -> Result<Vec<DependencyParse>, ConllError> {
    let mut out = Vec::new();
    let mut current = DependencyParse::default();
    // (line number, head) pairs to range-check once the sentence is complete.
    let mut heads: Vec<(usize, usize)> = Vec::new();

    let finish = |current: &mut DependencyParse,
                  heads: &mut Vec<(usize, usize)>,
                  out: &mut Vec<DependencyParse>|
     -> Result<(), ConllError> {
        let n = current.tokens.len();
        for &(line, head) in heads.iter() {
            if head > n {
                return Err(err(line, format!("head {head} outside sentence of {n} tokens")));
            }
        }
        heads.clear();
        if n > 0 {
            out.push(std::mem::take(current));
        } else {
            current.sent_id = None;
        }
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut current, &mut heads, &mut out)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("sent_id") {
                let id = rest.trim_start().trim_start_matches('=').trim();
                current.sent_id = Some(id.to_string());
            }
            continue;
        }
        let cols: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else {
            line.split_whitespace().collect()
        };
        let (index_col, form_col, head_col, rel_col) = match cols.len() {
            n if n >= 8 => (0, 1, 6, 7),
            4 => (0, 1, 2, 3),
            n => return Err(err(line_no, format!("expected 4 or at least 8 columns, found {n}"))),
        };
        let index: usize = cols[index_col]
            .parse()
            .map_err(|_| err(line_no, format!("non-integer token index `{}`", cols[index_col])))?;
        let expected = current.tokens.len() + 1;
        if index != expected {
            return Err(err(line_no, format!("token index {index}, expected {expected}")));
        }
        let head: usize = cols[head_col]
            .parse()
            .map_err(|_| err(line_no, format!("non-integer head `{}`", cols[head_col])))?;
        if head == index {
            return Err(err(line_no, format!("token {index} depends on itself")));
        }
        heads.push((line_no, head));
        current.tokens.push(Token {
            index,
            form: cols[form_col].to_string(),
            head,
            relation: cols[rel_col].to_string(),
        });
    }
    finish(&mut current, &mut heads, &mut out)?;
    Ok(out)
}
