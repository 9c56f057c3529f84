//! Explicit WL features, mutual-information ranking and DOT rendering.

pub mod dot;
pub mod mi;

pub use dot::{feature_to_dot, parse_feature, FeatureParseError, FeatureTree};
pub use mi::{
    feature_presence, mi_from_counts, mutual_information, rank_features, ranking_tsv, FeatureKey, PresenceMatrix,
    RankedFeature, DEFAULT_MIN_SUPPORT,
};
