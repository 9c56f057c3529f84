//! Frame-semantic annotations, one JSON object per sentence:
//!
//! ```json
//! {"sentence_id": "s1", "date": "2013-05-02", "document_id": "d7",
//!  "frames": [{"name": "Statement", "target": [12, 12],
//!              "elements": [{"name": "Speaker", "span": [13, 14]}]}]}
//! ```
//!
//! Spans are 0-based and inclusive. `date` and `document_id` are optional
//! here but `date` is required when building a corpus.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inclusive 0-based token range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn single(i: usize) -> Self {
        Span { start: i, end: i }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

impl From<[usize; 2]> for Span {
    fn from(a: [usize; 2]) -> Self {
        Span::new(a[0], a[1])
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementAnnotation {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    #[serde(rename = "name")]
    pub frame_name: String,
    pub target: Span,
    #[serde(default)]
    pub elements: Vec<ElementAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceFrames {
    pub sentence_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document_id: Option<String>,
    #[serde(default)]
    pub frames: Vec<FrameAnnotation>,
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("sentence `{sentence_id}`: frame `{frame}` has span {start}..={end} outside {tokens} tokens")]
    OutOfBounds {
        sentence_id: String,
        frame: String,
        start: usize,
        end: usize,
        tokens: usize,
    },
    #[error("sentence `{sentence_id}`: frame `{frame}` has reversed span {start}..={end}")]
    Reversed {
        sentence_id: String,
        frame: String,
        start: usize,
        end: usize,
    },
    #[error("{frames} frame records but {sentences} token counts")]
    CountMismatch { frames: usize, sentences: usize },
}

impl SentenceFrames {
    /// Every target and element span must be ordered and lie within
    /// `0..token_count`.
    pub fn check_bounds(&self, token_count: usize) -> Result<(), FrameError> {
        for f in &self.frames {
            let spans = std::iter::once(&f.target).chain(f.elements.iter().map(|e| &e.span));
            for s in spans {
                if s.end < s.start {
                    return Err(FrameError::Reversed {
                        sentence_id: self.sentence_id.clone(),
                        frame: f.frame_name.clone(),
                        start: s.start,
                        end: s.end,
                    });
                }
                if s.end >= token_count {
                    return Err(FrameError::OutOfBounds {
                        sentence_id: self.sentence_id.clone(),
                        frame: f.frame_name.clone(),
                        start: s.start,
                        end: s.end,
                        tokens: token_count,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses frame JSON Lines. With `token_counts`, the i-th record's spans are
/// checked against the i-th count.
pub fn parse_frames(text: &str, token_counts: Option<&[usize]>) -> Result<Vec<SentenceFrames>, FrameError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SentenceFrames =
            serde_json::from_str(line).map_err(|source| FrameError::Json { line: i + 1, source })?;
        out.push(rec);
    }
    if let Some(counts) = token_counts {
        if counts.len() != out.len() {
            return Err(FrameError::CountMismatch {
                frames: out.len(),
                sentences: counts.len(),
            });
        }
        for (rec, &n) in out.iter().zip(counts) {
            rec.check_bounds(n)?;
        }
    }
    Ok(out)
}
