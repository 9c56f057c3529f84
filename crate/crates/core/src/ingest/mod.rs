//! From annotation files to labeled instance forests.

pub mod build;
pub mod conll;
pub mod corpus;
pub mod entities;
pub mod frames;
pub mod prices;

pub use build::{build_graph, frame_dependencies, span_head, BuiltGraph};
pub use conll::{parse_conll, ConllError, DependencyParse, Token};
pub use corpus::{build_corpus, pair_records, BuildLog, CorpusError, SentenceRecord};
pub use entities::{match_entities, EntityLexicon, LexiconError, Mention};
pub use frames::{parse_frames, ElementAnnotation, FrameAnnotation, FrameError, SentenceFrames, Span};
pub use prices::{label_from_closes, label_instance, Exclusion, LabelOutcome, PriceError, PriceSeries, DEFAULT_THRESHOLD};
