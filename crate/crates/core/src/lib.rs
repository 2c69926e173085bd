//! Annotation tooling for argumentative hate-speech tweets.
//!
//! The crate reads standoff-annotated tweets, checks them against the
//! argumentation scheme (justification, conclusion, collective, property,
//! pivot, proposition types and counter-narratives), computes corpus
//! statistics and inter-annotator agreement, trains logistic-regression
//! baselines for each detection task and drafts template-based
//! counter-narrative prompts.

pub mod agreement;
pub mod corpus;
pub mod experiments;
pub mod linear;
pub mod scaffold;
pub mod scheme;
pub mod standoff;
pub mod synthetic;
pub mod tokens;

pub use agreement::{agreement_report, cohen_kappa, pairwise_f1, AgreementReport};
pub use scheme::{
    corpus_stats, from_raw, validate, AnnotatedTweet, CnType, Component, ComponentKind,
    CounterNarrative, MappingConfig, PropositionType, StatsReport, ValidationIssue,
};
pub use standoff::{Document, Lang, RawAnnotation, Span};
pub use tokens::{project, tokenize, Category, TokenLabeling, TokenizedTweet};
