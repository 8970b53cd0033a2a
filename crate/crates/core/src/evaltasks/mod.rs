//! Evaluation tasks: triplets, binary classification, clustering, prototype
//! classification, and cross-task analysis.

mod analysis;
mod binary;
mod cluster;
mod nmi;
mod prototype;
mod report;
mod runner;
mod triplet;
mod upper_bound;

use std::collections::HashMap;

pub use analysis::{pearson, rank_map, rank_models, task_correlation, CorrelationMatrix, ModelRank};
pub use binary::{binary_eval, binary_outcome, BinaryResult, NegatedNameMode, SplitRate};
pub use cluster::{
    agglomerative, agglomerative_rows, kmeans, kmeans_rows, ward_merges, ClusterAlgorithm,
    ClusterResult, Merge, KMEANS_MAX_ITER, KMEANS_REL_TOL,
};
pub use nmi::nmi;
pub use prototype::{accuracy, build_prototypes, classify, PrototypeModel};
pub use report::{
    comparison_table, correlation_csv, deltas, markdown_table, metrics_csv, percent, EvalReport,
    MetricKey,
};
pub use runner::{run_eval, EvalOptions, Task, TaskSet};
pub use triplet::{
    make_ori_imp_triplets, make_ori_ori_triplets, triplet_eval, triplet_outcome, triplet_rates,
    TripletBuild, TripletResult,
};
pub use upper_bound::{llm_upper_bound, parse_choice, UpperBoundResult, UPPER_BOUND_TEMPLATE};


use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::types::EmbeddingVector;

/// Embed each distinct text once and return a lookup table.
pub fn embed_unique<'a>(
    emb: &dyn Embedder,
    texts: &[&'a str],
) -> Result<HashMap<&'a str, EmbeddingVector>> {
    let mut seen = std::collections::HashSet::new();
    let unique: Vec<&'a str> = texts.iter().copied().filter(|t| seen.insert(*t)).collect();
    if unique.is_empty() {
        return Ok(HashMap::new());
    }
    let vectors = emb.embed_batch(&unique)?;
    if vectors.len() != unique.len() {
        return Err(Error::Protocol(format!(
            "embedder returned {} vectors for {} texts",
            vectors.len(),
            unique.len()
        )));
    }
    Ok(unique.into_iter().zip(vectors).collect())
}
