//! Parsing multiset-label strings back into trees and rendering them as
//! Graphviz digraphs.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::NodeKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTree {
    pub kind: NodeKind,
    pub label: String,
    pub children: Vec<FeatureTree>,
}

impl FeatureTree {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(FeatureTree::node_count).sum::<usize>()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed feature at byte {at}: {message}")]
pub struct FeatureParseError {
    pub at: usize,
    pub message: String,
}

struct Parser<'a> {
    s: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, FeatureParseError> {
        Err(FeatureParseError {
            at: self.pos,
            message: message.into(),
        })
    }

    fn tree(&mut self) -> Result<FeatureTree, FeatureParseError> {
        let colon = match self.text[self.pos..].find(':') {
            Some(off) => self.pos + off,
            None => return self.err("expected `Kind:`"),
        };
        let kind_str = &self.text[self.pos..colon];
        let kind = match NodeKind::from_str(kind_str) {
            Ok(k) => k,
            Err(_) => return self.err(format!("unknown node kind `{kind_str}`")),
        };
        self.pos = colon + 1;

        let mut label = String::new();
        while self.pos < self.s.len() {
            match self.s[self.pos] {
                b'\\' => {
                    let Some(c) = self.text[self.pos + 1..].chars().next() else {
                        return self.err("dangling escape");
                    };
                    label.push(c);
                    self.pos += 1 + c.len_utf8();
                }
                b'{' | b'}' | b',' => break,
                _ => {
                    let c = self.text[self.pos..].chars().next().expect("in bounds");
                    label.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
        if label.is_empty() {
            return self.err("empty label");
        }

        let mut children = Vec::new();
        if self.s.get(self.pos) == Some(&b'{') {
            self.pos += 1;
            loop {
                children.push(self.tree()?);
                match self.s.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    Some(b'}') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.err("expected `,` or `}`"),
                }
            }
        }
        Ok(FeatureTree { kind, label, children })
    }
}

pub fn parse_feature(feature: &str) -> Result<FeatureTree, FeatureParseError> {
    let mut p = Parser {
        s: feature.as_bytes(),
        text: feature,
        pos: 0,
    };
    let t = p.tree()?;
    if p.pos != feature.len() {
        return p.err("trailing characters");
    }
    Ok(t)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn style(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::FrameName => "shape=box",
        NodeKind::FrameElement => "shape=diamond",
        NodeKind::DesignatedEntity | NodeKind::OtherEntity => "shape=ellipse",
        NodeKind::FrameTarget => "shape=box, style=rounded",
        NodeKind::LexicalItem => "shape=box, style=dashed",
    }
}

/// Renders a feature string as a digraph. Each node points at its
/// out-neighbors, matching the direction of the original edges.
pub fn feature_to_dot(feature: &str) -> Result<String, FeatureParseError> {
    let tree = parse_feature(feature)?;
    let mut out = String::from("digraph feature {\n");
    let mut next = 0usize;
    fn emit(t: &FeatureTree, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        let _ = writeln!(out, "  n{id} [label={}, {}];", quote(&t.label), style(t.kind));
        for c in &t.children {
            let cid = emit(c, next, out);
            let _ = writeln!(out, "  n{id} -> n{cid};");
        }
        id
    }
    emit(&tree, &mut next, &mut out);
    out.push_str("}\n");
    Ok(out)
}
