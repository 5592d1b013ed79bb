//! Maximum-entropy validation pipeline for firm hashtag networks.
//!
//! The library covers the full chain from raw tweet archives to analysis
//! tables: bipartite graph construction, hashtag typo normalisation, BiCM
//! (bipartite configuration model) fitting, statistically validated
//! monopartite projection with FDR control, Louvain community detection,
//! CSR dimension tagging and Spearman rank correlations. The `pipeline`
//! module and the `firmnet` binary orchestrate the stages with persisted
//! artifacts.

pub mod bicm;
pub mod communities;
pub mod csr;
pub mod graph;
pub mod ingest;
pub mod normalize;
pub mod pipeline;
pub mod ranks;
pub mod validation;

pub use bicm::{BicmModel, Multiplier, SolverConfig};
pub use communities::{louvain, modularity, CommunityPartition, UndirectedGraph};
pub use csr::{CsrDimension, CsrLexicon};
pub use graph::{BipartiteGraph, DegreeSequence};
pub use ingest::{PeriodFilter, TweetRecord};
pub use normalize::{MergeMap, NormalizationConfig};
pub use ranks::{spearman, CorrelationMatrix, FirmRecord};
pub use validation::{fdr_select, validate_projection, PvalueMode, ValidationReport};
