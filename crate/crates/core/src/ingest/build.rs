//! Sentence graph construction from a dependency parse, frame annotations
//! and entity mentions.
//!
//! 1. Each frame becomes a frame-name node, a frame-target node and one
//!    frame-element node per filled element (labels qualified as
//!    `Frame.Element`).
//! 2. Frame `a` gets a dependency edge to frame `b` when the head token of
//!    `a`'s target is attached directly to the head token of `b`'s target.
//! 3. One designated-entity node (if the entity is mentioned) fills every
//!    element whose span overlaps one of its mentions. Other lexicon
//!    entities get one other-entity node each, connected the same way.
//! 4. Tokens inside an element span that are neither entity mentions nor
//!    frame targets become lexical-item nodes, one per distinct lowercased
//!    form and element.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::conll::DependencyParse;
use super::entities::Mention;
use super::frames::{FrameAnnotation, Span};
use crate::graph::{GraphBuilder, NodeId, NodeKind, OmniGraph, OTHER_ENTITY_LABEL};

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltGraph {
    pub graph: OmniGraph,
    /// False when the designated entity is not mentioned; the graph then has
    /// no designated-entity node.
    pub has_designated: bool,
}

/// The token inside `span` whose head lies outside it (first such token),
/// falling back to the last token. Returns a 0-based index.
pub fn span_head(dep: &DependencyParse, span: Span) -> usize {
    for i in span.indices() {
        let head = dep.tokens[i].head;
        // heads are 1-based; 0 is the root and always outside
        if head == 0 || !span.contains(head - 1) {
            return i;
        }
    }
    span.end
}

/// Pairs `(i, j)` of frame positions where frame `i` depends on frame `j`.
pub fn frame_dependencies(dep: &DependencyParse, frames: &[FrameAnnotation]) -> Vec<(usize, usize)> {
    let heads: Vec<usize> = frames.iter().map(|f| span_head(dep, f.target)).collect();
    let mut out = Vec::new();
    for (i, &ti) in heads.iter().enumerate() {
        let parent = dep.tokens[ti].head;
        if parent == 0 {
            continue;
        }
        for (j, &tj) in heads.iter().enumerate() {
            if i != j && parent - 1 == tj {
                out.push((i, j));
            }
        }
    }
    out
}

/// Builds the sentence graph. Spans must already be within the sentence.
pub fn build_graph(
    sentence_id: &str,
    dep: &DependencyParse,
    frames: &[FrameAnnotation],
    mentions: &[Mention],
    designated_entity: &str,
) -> BuiltGraph {
    let mut b = GraphBuilder::new(sentence_id).tokens(dep.forms());

    // Step 1. Elements are (node, spans) so repeated element names in one
    // frame share a node.
    let mut frame_nodes: Vec<NodeId> = Vec::with_capacity(frames.len());
    let mut elements: Vec<(NodeId, Vec<Span>)> = Vec::new();
    for f in frames {
        let fname = b.add_node(NodeKind::FrameName, f.frame_name.as_str());
        let head = span_head(dep, f.target);
        let target = b.add_node(NodeKind::FrameTarget, dep.tokens[head].form.to_lowercase());
        b.connect(target, fname).expect("target evokes frame");
        frame_nodes.push(fname);

        let mut by_name: BTreeMap<&str, usize> = BTreeMap::new();
        for el in &f.elements {
            if let Some(&k) = by_name.get(el.name.as_str()) {
                elements[k].1.push(el.span);
                continue;
            }
            let fe = b.add_node(NodeKind::FrameElement, format!("{}.{}", f.frame_name, el.name));
            b.connect(fe, fname).expect("element of frame");
            by_name.insert(el.name.as_str(), elements.len());
            elements.push((fe, vec![el.span]));
        }
    }

    // Step 2.
    for (i, j) in frame_dependencies(dep, frames) {
        b.connect(frame_nodes[i], frame_nodes[j])
            .expect("frame dependency");
    }

    // Step 3.
    let mut by_entity: BTreeMap<&str, Vec<Span>> = BTreeMap::new();
    for m in mentions {
        by_entity.entry(m.entity_id.as_str()).or_default().push(m.span);
    }
    let has_designated = by_entity.contains_key(designated_entity);
    let mut entity_nodes: Vec<(NodeId, &Vec<Span>)> = Vec::new();
    if let Some(spans) = by_entity.get(designated_entity) {
        let de = b.add_node(NodeKind::DesignatedEntity, "");
        entity_nodes.push((de, spans));
    }
    for (id, spans) in &by_entity {
        if *id != designated_entity {
            let oe = b.add_node(NodeKind::OtherEntity, OTHER_ENTITY_LABEL);
            entity_nodes.push((oe, spans));
        }
    }
    for &(node, spans) in &entity_nodes {
        for (fe, fe_spans) in &elements {
            if spans.iter().any(|m| fe_spans.iter().any(|s| s.overlaps(m))) {
                b.connect(node, *fe).expect("entity fills role");
            }
        }
    }

    // Step 4.
    let blocked: HashSet<usize> = mentions
        .iter()
        .flat_map(|m| m.span.indices())
        .chain(frames.iter().flat_map(|f| f.target.indices()))
        .collect();
    let mut lexical: HashMap<(String, NodeId), NodeId> = HashMap::new();
    for (fe, spans) in &elements {
        for s in spans {
            for i in s.indices() {
                if blocked.contains(&i) {
                    continue;
                }
                let form = dep.tokens[i].form.to_lowercase();
                if lexical.contains_key(&(form.clone(), *fe)) {
                    continue;
                }
                let li = b.add_node(NodeKind::LexicalItem, form.clone());
                b.connect(li, *fe).expect("lexical fill");
                lexical.insert((form, *fe), li);
            }
        }
    }

    BuiltGraph {
        graph: b.finish(),
        has_designated,
    }
}
