//! Unsupervised tokenization driven by character transition freedom, with
//! hyper-parameter self-tuning against human-independent fitness metrics.
//!
//! The pipeline is `corpus` → `model` → `tokenizer` → `metrics` → `search`:
//! count character N-grams, score inter-character positions by jumps in
//! transition freedom, cut where the score exceeds a threshold, and sweep the
//! `(N-set, t_mc, t_tm)` grid to see which unsupervised metric tracks the
//! supervised boundary F1.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod model;
pub mod search;
pub mod tokenizer;

pub use corpus::{Corpus, ReferenceLine, ReferenceSegmentation};
pub use error::{Error, Result};
pub use exec::Execution;
pub use metrics::{Correlation, Metric, MetricVector, ScoreTriple};
pub use model::{Direction, NGramModel, PruneThreshold};
pub use search::{GridOptions, GridRow, GridSpec, MetricSet, Report};
pub use tokenizer::{NSet, Tokenization, TokenizerParams};
