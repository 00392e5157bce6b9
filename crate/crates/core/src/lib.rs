//! Consistency-of-toxicity profiling for timeline corpora.
//!
//! The crate ingests JSON-lines timelines, attaches six misbehavior scores to
//! every tweet, picks out profiles whose scores are both high (median) and
//! steady (Gini), and characterizes those profiles against an equal-size
//! random baseline: shared URLs/domains/hashtags, topics, readability,
//! pairwise homogeneity and posting rhythm.
//!
//! Every stage is available as a plain function; [`pipeline`] wires them
//! together behind a single [`config::PipelineConfig`].

pub mod compare;
pub mod config;
pub mod consistency;
pub mod corpus;
mod error;
pub mod pipeline;
pub mod report;
pub mod scorer;
pub mod seed;
pub mod synth;
pub mod temporal;
pub mod textstats;
pub mod webcontent;

pub use corpus::{Corpus, TweetRecord};
pub use error::{Error, Result};
pub use scorer::{Dimension, ScoreVector, ScoredCorpus};
