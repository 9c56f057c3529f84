use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::build::build_graph;
use super::conll::{parse_conll, ConllError, DependencyParse};
use super::entities::{match_entities, EntityLexicon, Mention};
use super::frames::{parse_frames, FrameAnnotation, FrameError};
use super::prices::{label_instance, Exclusion, LabelOutcome, PriceSeries};
use crate::graph::{Instance, OmniGraph};

/// A parsed sentence together with its frames and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRecord {
    pub sentence_id: String,
    pub date: NaiveDate,
    pub document_id: Option<String>,
    pub parse: DependencyParse,
    pub frames: Vec<FrameAnnotation>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}: {source}")]
    Conll {
        file: String,
        #[source]
        source: ConllError,
    },
    #[error("{file}: {source}")]
    Frames {
        file: String,
        #[source]
        source: FrameError,
    },
    #[error("{file}: record {index} (`{sentence_id}`) has no date")]
    MissingDate {
        file: String,
        index: usize,
        sentence_id: String,
    },
    #[error("{file}: record {index} is `{frames}` but the parse block is `{parse}`")]
    IdMismatch {
        file: String,
        index: usize,
        frames: String,
        parse: String,
    },
}

/// Pairs CoNLL blocks with frame records by position. When a block carries
/// a `# sent_id` comment it must agree with the frame record.
pub fn pair_records(
    conll_text: &str,
    conll_name: &str,
    frames_text: &str,
    frames_name: &str,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let parses = parse_conll(conll_text).map_err(|source| CorpusError::Conll {
        file: conll_name.to_string(),
        source,
    })?;
    let counts: Vec<usize> = parses.iter().map(|p| p.len()).collect();
    let frames = parse_frames(frames_text, Some(&counts)).map_err(|source| CorpusError::Frames {
        file: frames_name.to_string(),
        source,
    })?;
    parses
        .into_iter()
        .zip(frames)
        .enumerate()
        .map(|(i, (parse, fr))| {
            if let Some(id) = &parse.sent_id {
                if *id != fr.sentence_id {
                    return Err(CorpusError::IdMismatch {
                        file: frames_name.to_string(),
                        index: i + 1,
                        frames: fr.sentence_id.clone(),
                        parse: id.clone(),
                    });
                }
            }
            let date = fr.date.ok_or_else(|| CorpusError::MissingDate {
                file: frames_name.to_string(),
                index: i + 1,
                sentence_id: fr.sentence_id.clone(),
            })?;
            Ok(SentenceRecord {
                sentence_id: fr.sentence_id,
                date,
                document_id: fr.document_id,
                parse,
                frames: fr.frames,
            })
        })
        .collect()
}

/// Why (entity, day) groups were dropped, and how many were kept.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BuildLog {
    pub sentences: usize,
    pub instances: usize,
    pub small_move: usize,
    pub not_a_trading_day: usize,
    pub no_next_trading_day: usize,
    pub no_prices: usize,
    /// Per-entity instance counts.
    pub per_entity: BTreeMap<String, usize>,
}

impl BuildLog {
    fn exclude(&mut self, e: Exclusion) {
        match e {
            Exclusion::SmallMove { .. } => self.small_move += 1,
            Exclusion::NotATradingDay => self.not_a_trading_day += 1,
            Exclusion::NoNextTradingDay => self.no_next_trading_day += 1,
        }
    }
}

/// Builds one instance per (entity, day) on which the entity is mentioned
/// and its next-day move clears `threshold`. `entities` restricts which
/// lexicon entries act as designated entities (all when `None`).
///
/// Output is ordered by entity, then date; each forest keeps input order.
pub fn build_corpus(
    records: &[SentenceRecord],
    lexicon: &EntityLexicon,
    prices: &BTreeMap<String, PriceSeries>,
    entities: Option<&[String]>,
    threshold: f64,
) -> (Vec<Instance>, BuildLog) {
    let mentions: Vec<Vec<Mention>> = records
        .par_iter()
        .map(|r| match_entities(&r.parse.forms(), lexicon))
        .collect();

    let targets: Vec<&String> = match entities {
        Some(list) => list.iter().collect(),
        None => lexicon.entries.keys().collect(),
    };

    let mut log = BuildLog {
        sentences: records.len(),
        ..Default::default()
    };
    let mut out = Vec::new();
    for entity in targets {
        let mut days: BTreeMap<NaiveDate, Vec<usize>> = BTreeMap::new();
        for (i, ms) in mentions.iter().enumerate() {
            if ms.iter().any(|m| &m.entity_id == entity) {
                days.entry(records[i].date).or_default().push(i);
            }
        }
        let Some(series) = prices.get(entity) else {
            log.no_prices += days.len();
            continue;
        };
        for (date, idx) in days {
            let label = match label_instance(series, date, threshold) {
                LabelOutcome::Labeled(l) => l,
                LabelOutcome::Excluded(e) => {
                    log.exclude(e);
                    continue;
                }
            };
            let graphs: Vec<OmniGraph> = idx
                .par_iter()
                .map(|&i| {
                    let r = &records[i];
                    build_graph(&r.sentence_id, &r.parse, &r.frames, &mentions[i], entity).graph
                })
                .collect();
            out.push(Instance::new(entity.clone(), date, label, graphs).expect("non-empty day"));
            *log.per_entity.entry(entity.clone()).or_default() += 1;
        }
    }
    log.instances = out.len();
    (out, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2012, 3, day).unwrap()
    }

    fn record(id: &str, day: u32, text: &str) -> SentenceRecord {
        let conll: String = text
            .split_whitespace()
            .enumerate()
            .map(|(i, w)| format!("{} {} {} dep\n", i + 1, w, if i == 0 { 0 } else { 1 }))
            .collect();
        SentenceRecord {
            sentence_id: id.into(),
            date: d(day),
            document_id: None,
            parse: parse_conll(&conll).unwrap().remove(0),
            frames: vec![],
        }
    }

    fn prices(entity: &str, closes: &[(u32, f64)]) -> (String, PriceSeries) {
        let pts = closes.iter().map(|&(day, c)| (d(day), c)).collect();
        (entity.to_string(), PriceSeries::new(entity, pts).unwrap())
    }

    #[test]
    fn groups_by_day() {
        let recs = vec![
            record("a", 1, "Acme rose"),
            record("b", 1, "Acme fell"),
            record("c", 1, "analysts like Acme"),
        ];
        let lex = EntityLexicon::new().with("ACME", &["Acme"]);
        let px: BTreeMap<_, _> = [prices("ACME", &[(1, 100.0), (2, 103.0)])].into();
        let (inst, log) = build_corpus(&recs, &lex, &px, None, 0.02);
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].graphs.len(), 3);
        assert_eq!(inst[0].label, Label::Positive);
        assert_eq!(log.instances, 1);
    }

    #[test]
    fn excluded_day_dropped() {
        let recs = vec![record("a", 1, "Acme rose")];
        let lex = EntityLexicon::new().with("ACME", &["Acme"]);
        let px: BTreeMap<_, _> = [prices("ACME", &[(1, 100.0), (2, 101.0)])].into();
        let (inst, log) = build_corpus(&recs, &lex, &px, None, 0.02);
        assert!(inst.is_empty());
        assert_eq!(log.small_move, 1);
    }

    #[test]
    fn two_entity_fixture() {
        // ACME: day 1 (s1,s3) up, day 2 (s4) down, day 3 (s6) flat
        // BETA: day 1 (s2,s3) down, day 2 none, day 3 (s5) up
        let recs = vec![
            record("s1", 1, "Acme wins"),
            record("s2", 1, "Beta loses"),
            record("s3", 1, "Acme beats Beta"),
            record("s4", 2, "Acme slips"),
            record("s5", 3, "Beta surges"),
            record("s6", 3, "Acme waits"),
        ];
        let lex = EntityLexicon::new().with("ACME", &["Acme"]).with("BETA", &["Beta"]);
        let px: BTreeMap<_, _> = [
            prices("ACME", &[(1, 100.0), (2, 105.0), (3, 100.0), (4, 100.5)]),
            prices("BETA", &[(1, 50.0), (2, 45.0), (3, 45.0), (4, 50.0)]),
        ]
        .into();
        let (inst, log) = build_corpus(&recs, &lex, &px, None, 0.02);
        assert_eq!(log.per_entity["ACME"], 2);
        assert_eq!(log.per_entity["BETA"], 2);
        assert_eq!(log.small_move, 1);
        let acme1 = &inst[0];
        assert_eq!((acme1.entity_id.as_str(), acme1.graphs.len()), ("ACME", 2));
        // s3 mentions both; as an ACME instance Beta is the other entity
        let s3 = &acme1.graphs[1];
        assert_eq!(s3.nodes_of_kind(crate::NodeKind::DesignatedEntity).count(), 1);
        assert_eq!(s3.nodes_of_kind(crate::NodeKind::OtherEntity).count(), 1);
        assert_eq!(inst[2].entity_id, "BETA");
        assert_eq!(inst[2].label, Label::Negative);
    }

    #[test]
    fn pairing_checks_ids_and_dates() {
        let conll = "# sent_id = s1\n1 Acme 0 root\n";
        let ok = r#"{"sentence_id":"s1","date":"2012-03-01","frames":[]}"#;
        assert_eq!(pair_records(conll, "c", ok, "f").unwrap().len(), 1);
        let wrong = r#"{"sentence_id":"s9","date":"2012-03-01","frames":[]}"#;
        assert!(matches!(pair_records(conll, "c", wrong, "f"), Err(CorpusError::IdMismatch { .. })));
        let undated = r#"{"sentence_id":"s1","frames":[]}"#;
        assert!(matches!(pair_records(conll, "c", undated, "f"), Err(CorpusError::MissingDate { .. })));
    }
}
