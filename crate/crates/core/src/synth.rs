//! Synthetic instance forests with a planted discriminative subgraph.
//!
//! Every sentence carries the same three template frames (Statement,
//! Convey_importance, Capability) with the same elements, so node-level
//! label histograms do not depend on the class. A *planted* sentence wires
//! them as Capability -> Convey_importance -> Statement and lets the
//! designated entity fill only `Statement.Speaker`. A *decoy* sentence
//! keeps that chain half the time and otherwise picks one of four other
//! layouts; its designated entity fills a message role, two of them, or the
//! speaker together with the message. Every structure found only in decoys
//! thus shows up in at most a quarter of them, which keeps its mutual
//! information with the label well under the planted one. Each sentence of
//! a positive instance is planted with probability `p_plus`, each sentence
//! of a negative one with `p_minus`.
//!
//! Tokens are an unordered bag of the words behind the graph (targets,
//! lexical items, entity names), shuffled, so n-gram features carry no
//! structural signal.

use chrono::{Days, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphBuilder, Instance, Label, NodeId, NodeKind, OmniGraph};

pub const FRAME_INVENTORY: [&str; 40] = [
    "Statement",
    "Convey_importance",
    "Capability",
    "Leadership",
    "Assistance",
    "Change_position_on_a_scale",
    "Commerce_buy",
    "Commerce_sell",
    "Earnings_and_losses",
    "Hiring",
    "Firing",
    "Expansion",
    "Becoming",
    "Arriving",
    "Business_closure",
    "Competition",
    "Collaboration",
    "Quantity",
    "Calendric_unit",
    "Temporal_collocation",
    "Likelihood",
    "Intentionally_act",
    "Project",
    "Manufacturing",
    "Creating",
    "Request",
    "Reporting",
    "Judgment",
    "Desirability",
    "Importance",
    "Possession",
    "Losing",
    "Getting",
    "Risky_situation",
    "Success_or_failure",
    "Money",
    "Legality",
    "Being_employed",
    "Causation",
    "Change_of_leadership",
];

const TEMPLATE_FRAMES: [&str; 3] = ["Statement", "Convey_importance", "Capability"];
const STATEMENT_TARGETS: [&str; 4] = ["said", "stated", "announced", "noted"];
const CONVEY_TARGETS: [&str; 4] = ["underscores", "highlights", "stresses", "shows"];
const CAPABILITY_TARGETS: [&str; 4] = ["quality", "ability", "capacity", "strength"];
const DISTRACTOR_ROLES: [&str; 6] = ["Agent", "Theme", "Time", "Place", "Manner", "Degree"];

/// The designated-entity neighborhood every planted sentence contains and
/// no decoy sentence does.
pub const PLANTED_FEATURE: &str = "DesignatedEntity:Designated_Entity{FrameElement:Statement.Speaker}";
pub const PLANTED_DEPTH: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("need 0 <= p_minus < p_plus <= 1, got p_minus={p_minus}, p_plus={p_plus}")]
    Probabilities { p_plus: f64, p_minus: f64 },
    #[error("invalid spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub p_plus: f64,
    pub p_minus: f64,
    /// Fraction of instances labeled +1 (exact up to rounding).
    pub positive_fraction: f64,
    /// Inclusive range of sentences per instance.
    pub sentences: (usize, usize),
    /// Inclusive range of distractor frames per sentence.
    pub distractor_frames: (usize, usize),
    /// Number of distinct lexical items in the shared vocabulary.
    pub vocabulary: usize,
    pub entities: usize,
    /// Probability that a sentence also mentions another entity.
    pub other_entity_rate: f64,
    pub seed: u64,
}

impl Default for PlantSpec {
    fn default() -> Self {
        PlantSpec {
            p_plus: 0.9,
            p_minus: 0.1,
            positive_fraction: 0.5,
            sentences: (3, 5),
            distractor_frames: (0, 2),
            vocabulary: 60,
            entities: 10,
            other_entity_rate: 0.5,
            seed: 0,
        }
    }
}

impl PlantSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !(ok(self.p_plus) && ok(self.p_minus) && self.p_minus < self.p_plus) {
            return Err(SynthError::Probabilities {
                p_plus: self.p_plus,
                p_minus: self.p_minus,
            });
        }
        if !ok(self.positive_fraction) || !ok(self.other_entity_rate) {
            return Err(SynthError::Spec("fractions must lie in [0, 1]".into()));
        }
        if self.sentences.0 == 0 || self.sentences.0 > self.sentences.1 {
            return Err(SynthError::Spec("sentence range must be non-empty and start at 1 or more".into()));
        }
        if self.distractor_frames.0 > self.distractor_frames.1 {
            return Err(SynthError::Spec("distractor range is reversed".into()));
        }
        if self.vocabulary == 0 || self.entities == 0 {
            return Err(SynthError::Spec("vocabulary and entity counts must be positive".into()));
        }
        Ok(())
    }
}

/// Ground truth written next to a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: PlantSpec,
    pub n_instances: usize,
    pub n_positive: usize,
    pub planted_feature: String,
    pub planted_depth: usize,
    /// Per instance, how many of its sentences carry the pattern.
    pub planted_counts: Vec<usize>,
    pub frame_inventory: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub instances: Vec<Instance>,
    pub manifest: Manifest,
}

fn word(i: usize) -> String {
    const SYL: [&str; 12] = ["ka", "lo", "mi", "ren", "tu", "sa", "vor", "ne", "pi", "dal", "ro", "ge"];
    format!("{}{}", SYL[i % SYL.len()], SYL[(i / SYL.len()) % SYL.len()])
}

struct SentenceGen<'a> {
    rng: &'a mut ChaCha8Rng,
    spec: &'a PlantSpec,
    b: GraphBuilder,
    tokens: Vec<String>,
}

impl SentenceGen<'_> {
    fn frame(&mut self, name: &str, target: &str, roles: &[&str]) -> (NodeId, Vec<NodeId>) {
        let f = self.b.add_node(NodeKind::FrameName, name);
        let t = self.b.add_node(NodeKind::FrameTarget, target);
        self.b.connect(t, f).expect("target evokes frame");
        self.tokens.push(target.to_string());
        let fes = roles
            .iter()
            .map(|r| {
                let fe = self.b.add_node(NodeKind::FrameElement, format!("{name}.{r}"));
                self.b.connect(fe, f).expect("element of frame");
                fe
            })
            .collect();
        (f, fes)
    }

    fn lexical(&mut self, fe: NodeId) {
        let k = self.rng.random_range(1..=3);
        for _ in 0..k {
            let w = word(self.rng.random_range(0..self.spec.vocabulary));
            let li = self.b.add_node(NodeKind::LexicalItem, w.clone());
            self.b.connect(li, fe).expect("lexical fill");
            self.tokens.push(w);
        }
    }
}

fn sentence(
    rng: &mut ChaCha8Rng,
    spec: &PlantSpec,
    id: String,
    entity: &str,
    planted: bool,
) -> OmniGraph {
    let mut g = SentenceGen {
        rng,
        spec,
        b: GraphBuilder::new(id),
        tokens: Vec::new(),
    };
    let st_t = *STATEMENT_TARGETS.choose(g.rng).expect("non-empty");
    let ci_t = *CONVEY_TARGETS.choose(g.rng).expect("non-empty");
    let cap_t = *CAPABILITY_TARGETS.choose(g.rng).expect("non-empty");
    let (statement, st_fe) = g.frame("Statement", st_t, &["Speaker", "Message"]);
    let (convey, ci_fe) = g.frame("Convey_importance", ci_t, &["Message"]);
    let (capability, _) = g.frame("Capability", cap_t, &[]);
    let speaker = st_fe[0];
    let messages = [st_fe[1], ci_fe[0]];

    let de = g.b.add_node(NodeKind::DesignatedEntity, "");
    g.tokens.push(entity.to_lowercase());
    if planted {
        g.b.connect(capability, convey).expect("frame dependency");
        g.b.connect(convey, statement).expect("frame dependency");
        g.b.connect(de, speaker).expect("fills role");
    } else {
        // Half the decoys share the planted chain. The rest spread over four
        // other layouts so that no single decoy-only structure is common.
        let layout = if g.rng.random_bool(0.5) { 0 } else { g.rng.random_range(1..5) };
        let deps: &[(NodeId, NodeId)] = match layout {
            0 => &[(capability, convey), (convey, statement)],
            1 => &[],
            2 => &[(capability, convey)],
            3 => &[(convey, statement)],
            _ => &[(capability, statement), (convey, statement)],
        };
        for &(from, to) in deps {
            g.b.connect(from, to).expect("frame dependency");
        }
        let roles: &[NodeId] = match g.rng.random_range(0..4) {
            0 => &[messages[0]],
            1 => &[messages[1]],
            2 => &messages,
            _ => &[speaker, messages[0]],
        };
        for &r in roles {
            g.b.connect(de, r).expect("fills role");
        }
    }

    let mut all_fes = vec![speaker, messages[0], messages[1]];
    let n_distract = g.rng.random_range(spec.distractor_frames.0..=spec.distractor_frames.1);
    let pool: Vec<&str> = FRAME_INVENTORY
        .iter()
        .copied()
        .filter(|f| !TEMPLATE_FRAMES.contains(f))
        .collect();
    let mut distractors = Vec::new();
    for _ in 0..n_distract {
        let name = *pool.choose(g.rng).expect("non-empty");
        let target = word(g.rng.random_range(0..spec.vocabulary));
        let n_roles = g.rng.random_range(1..=2);
        let roles: Vec<&str> = DISTRACTOR_ROLES.choose_multiple(g.rng, n_roles).copied().collect();
        let (f, fes) = g.frame(name, &target, &roles);
        // distractors may depend on a template frame or an earlier distractor
        if g.rng.random_bool(0.3) {
            let mut heads = vec![statement, convey, capability];
            heads.extend(&distractors);
            let h = *heads.choose(g.rng).expect("non-empty");
            g.b.connect(f, h).expect("frame dependency");
        }
        distractors.push(f);
        all_fes.extend(fes);
    }

    if g.rng.random_bool(spec.other_entity_rate) {
        let oe = g.b.add_node(NodeKind::OtherEntity, crate::graph::OTHER_ENTITY_LABEL);
        let fe = *all_fes.choose(g.rng).expect("non-empty");
        g.b.connect(oe, fe).expect("fills role");
        g.tokens.push(format!("other{}", g.rng.random_range(0..spec.entities)));
    }
    for fe in all_fes {
        g.lexical(fe);
    }

    let SentenceGen { rng, b, mut tokens, .. } = g;
    tokens.shuffle(rng);
    b.tokens(tokens).finish()
}

/// Generates `n` instances; the same spec always yields the same corpus.
pub fn generate(spec: &PlantSpec, n: usize) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    Ok(generate_with(spec, n))
}

/// Control corpus: both classes are planted at rate `p_plus`, so nothing in
/// the graphs depends on the label. `p_minus` is ignored.
pub fn generate_null(spec: &PlantSpec, n: usize) -> Result<SynthCorpus, SynthError> {
    let probe = PlantSpec {
        p_minus: 0.0,
        p_plus: spec.p_plus.max(f64::MIN_POSITIVE),
        ..spec.clone()
    };
    probe.validate()?;
    let null = PlantSpec {
        p_minus: spec.p_plus,
        ..spec.clone()
    };
    Ok(generate_with(&null, n))
}

fn generate_with(spec: &PlantSpec, n: usize) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_pos = (spec.positive_fraction * n as f64).round() as usize;
    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < n_pos { Label::Positive } else { Label::Negative })
        .collect();
    labels.shuffle(&mut rng);

    let start = NaiveDate::from_ymd_opt(2012, 1, 2).expect("valid date");
    let mut instances = Vec::with_capacity(n);
    let mut planted_counts = Vec::with_capacity(n);
    for (j, &label) in labels.iter().enumerate() {
        let entity = format!("SYN{:02}", j % spec.entities);
        let date = start + Days::new((j / spec.entities) as u64);
        let p = match label {
            Label::Positive => spec.p_plus,
            Label::Negative => spec.p_minus,
        };
        let k = rng.random_range(spec.sentences.0..=spec.sentences.1);
        let mut graphs = Vec::with_capacity(k);
        let mut planted_here = 0;
        for s in 0..k {
            let planted = rng.random_bool(p);
            planted_here += usize::from(planted);
            graphs.push(sentence(&mut rng, spec, format!("{entity}-{date}-{s}"), &entity, planted));
        }
        planted_counts.push(planted_here);
        instances.push(Instance::new(entity, date, label, graphs).expect("k >= 1"));
    }
    SynthCorpus {
        instances,
        manifest: Manifest {
            spec: spec.clone(),
            n_instances: n,
            n_positive: n_pos,
            planted_feature: PLANTED_FEATURE.to_string(),
            planted_depth: PLANTED_DEPTH,
            planted_counts,
            frame_inventory: FRAME_INVENTORY.iter().map(|s| s.to_string()).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::feature_presence;
    use crate::kernel::KindMask;

    #[test]
    fn valid_and_deterministic() {
        let spec = PlantSpec {
            seed: 11,
            ..PlantSpec::default()
        };
        let a = generate(&spec, 30).unwrap();
        let b = generate(&spec, 30).unwrap();
        assert_eq!(a, b);
        for inst in &a.instances {
            inst.validate().unwrap();
        }
        assert_eq!(a.instances.iter().filter(|i| i.label == Label::Positive).count(), 15);
    }

    #[test]
    fn perfect_plant_separates() {
        let spec = PlantSpec {
            p_plus: 1.0,
            p_minus: 0.0,
            seed: 3,
            ..PlantSpec::default()
        };
        let c = generate(&spec, 40).unwrap();
        let pm = feature_presence(&c.instances, 1, KindMask::all());
        let col = pm.column(pm.find(PLANTED_DEPTH, PLANTED_FEATURE).expect("planted feature occurs"));
        for (present, inst) in col.iter().zip(&c.instances) {
            assert_eq!(*present, inst.label == Label::Positive);
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        let spec = PlantSpec {
            p_plus: 0.3,
            p_minus: 0.3,
            ..PlantSpec::default()
        };
        assert!(generate(&spec, 10).is_err());
    }
}
