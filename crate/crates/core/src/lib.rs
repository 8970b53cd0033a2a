//! Toolkit for probing how intent embedding models handle negation and
//! implicature, and for improving them with LLM-curated contrastive data.
//!
//! Evaluation lives in [`evaltasks`]; the data pipeline runs
//! [`benchgen`] → [`extract`] → [`curate`] → [`train`].

pub mod assets;
pub mod benchgen;
pub mod curate;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod evaltasks;
pub mod extract;
pub mod geometry;
pub mod io;
pub mod llm;
pub mod train;
pub mod transport;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    EmbeddingVector, IntentId, IntentLabel, Source, Split, TripletExample, TripletVariant, Utterance,
};
