//! Variant-effect scoring and rescue-mutation scanning for proteins.
//!
//! Scores come from any [`Scorer`](scorer::Scorer) that maps a sequence to
//! per-position log-probabilities. On top of that the crate provides
//! wild-type-marginal variant scores, exhaustive secondary-mutation scans on
//! pathogenic backgrounds, alpha-carbon contact maps, CPD detection in
//! alignments, the rank statistics used to compare groups, and the pipeline
//! that writes all results as TSV and SVG files.

pub mod contacts;
pub mod cpd;
pub mod error;
pub mod model;
pub mod parse;
pub mod pipeline;
pub mod report;
pub mod rescue;
pub mod scorer;
pub mod scoring;
pub mod stats;

pub use contacts::{concordance, contact_map, ConcordanceReport, ContactMap};
pub use cpd::{cpd_score_comparison, detect_cpd, map_alignment_columns, ColumnMap, CpdComparison, CpdStatus};
pub use error::{Error, ParseErrorKind, Result};
pub use model::{
    aa_index, aa_letter, apply_mutation, ClinicalSignificance, ProteinRecord, SequenceRecord, VariantKey,
    VariantRecord, ALPHABET, ALPHABET_SIZE,
};
pub use pipeline::RunConfig;
pub use rescue::{build_rescue_matrix, position_summary, RescueMatrix, SecondaryScoreMatrix, ZAxis};
pub use scorer::{EnsembleSpace, LogitsMatrix, Scorer, ScorerSpec};
pub use scoring::{compare_scorers, score_variant_set, wt_marginal, AgreementReport, ScoredVariant};
pub use stats::{UTestMethod, UTestResult};
