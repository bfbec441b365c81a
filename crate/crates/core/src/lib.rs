//! Dialogue-act pattern mining for learner–chatbot transcripts.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`]: parse JSONL transcripts and split each user's turns into
//!    sessions wherever consecutive turns are 15 minutes or more apart.
//! 2. [`annotation`]: check act codes against a [`annotation::CodingScheme`]
//!    and turn each session into role-prefixed symbols such as `[t]Q`.
//! 3. [`spm`] and [`contrast`]: mine frequent gap-constrained symbol patterns
//!    and compare the frequent sets of two learner groups.
//! 4. [`predict`]: use pattern frequencies as features for a small decision
//!    tree, evaluated with leave-one-out.

pub mod annotation;
pub mod contrast;
pub mod corpus;
pub mod predict;
pub mod spm;

pub use annotation::{cohen_kappa, load_scheme, to_sequence, validate_annotations, CodingScheme, DASequence, DASymbol};
pub use contrast::{contrast, ContrastReport};
pub use corpus::{corpus_stats, parse_transcript, sessionize, sessionize_corpus, DialogueTurn, Role, Session};
pub use predict::{featurize, gini, loocv, predict_label, train_tree, FeatureMatrix, TreeModel, TreeParams};
pub use spm::{
    build_database, mine, mine_bruteforce, support_count, MiningParams, Pattern, PatternSet, SequenceDatabase,
};
