//! Stage implementations and the artifact/manifest plumbing.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bicm::{self, BicmModel};
use crate::communities::{louvain, UndirectedGraph};
use crate::csr::{self, CsrLexicon, EngagementMessage};
use crate::graph::BipartiteGraph;
use crate::ingest::{self, HashtagExtractor, TweetRecord};
use crate::normalize::{build_merge_map, NormalizationConfig};
use crate::ranks::{correlation_matrix, FirmRecord, DEFAULT_VARIABLES};
use crate::validation::{validate_projection, ValidatedProjection};

use super::config::PipelineConfig;
use super::graphml::write_graphml;
use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Normalize,
    Build,
    Fit,
    Validate,
    Communities,
    Csr,
    Correlations,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Normalize => "normalize",
            Stage::Build => "build",
            Stage::Fit => "fit",
            Stage::Validate => "validate",
            Stage::Communities => "communities",
            Stage::Csr => "csr",
            Stage::Correlations => "correlations",
            Stage::All => "all",
        }
    }

    const ORDER: [Stage; 8] = [
        Stage::Ingest,
        Stage::Normalize,
        Stage::Build,
        Stage::Fit,
        Stage::Validate,
        Stage::Communities,
        Stage::Csr,
        Stage::Correlations,
    ];
}

// artifact filenames, one source of truth
const TWEETS_WINDOW: &str = "tweets_window.jsonl";
const ACCOUNTS: &str = "accounts.txt";
const INGEST_REPORT: &str = "ingest_report.json";
const DESCRIPTIVE_STATS: &str = "descriptive_stats.json";
const METADATA_JOIN: &str = "metadata_join.json";
const MERGE_MAP: &str = "merge_map.json";
const MERGE_REVIEW: &str = "merge_review.csv";
const BIPARTITE_EDGES: &str = "bipartite_edges.tsv";
const MODEL: &str = "bicm_model.json";
const PVALUES: &str = "pvalues.csv";
const PROJECTION: &str = "projection.json";
const PROJECTION_EDGES: &str = "projection_edges.csv";
const COMMUNITIES: &str = "communities.csv";
const GRAPHML: &str = "projection.graphml";
const CSR_ACCOUNTS: &str = "csr_accounts.csv";
const CSR_OCCURRENCES: &str = "csr_occurrences.csv";
const CSR_ENGAGEMENT: &str = "csr_engagement.csv";
const CORRELATIONS: &str = "correlations.csv";
const CORRELATIONS_LONG: &str = "correlations_long.csv";

/// Write-temp-then-rename so a crashed stage never leaves a half artifact.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn sha256_hex(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path)?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

#[derive(Serialize)]
struct Manifest<'a> {
    stage: &'static str,
    input_hashes: BTreeMap<String, String>,
    artifacts: Vec<String>,
    config: &'a PipelineConfig,
    duration_ms: u128,
}

struct StageContext<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    stage: &'static str,
    inputs: Vec<PathBuf>,
    artifacts: Vec<String>,
    started: Instant,
}

impl<'a> StageContext<'a> {
    fn new(cfg: &'a PipelineConfig, stage: &'static str) -> Self {
        Self {
            cfg,
            out: cfg.output_dir.clone(),
            stage,
            inputs: Vec::new(),
            artifacts: Vec::new(),
            started: Instant::now(),
        }
    }

    fn artifact_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Record an external input file (hashed into the manifest).
    fn input(&mut self, path: &Path) -> PathBuf {
        self.inputs.push(path.to_path_buf());
        path.to_path_buf()
    }

    /// A prerequisite artifact from an earlier stage; missing file is a
    /// dependency error, not an I/O error.
    fn require(&mut self, name: &str, produced_by: &'static str) -> Result<PathBuf, PipelineError> {
        let path = self.artifact_path(name);
        if !path.exists() {
            return Err(PipelineError::StageDependency {
                stage: self.stage,
                missing: path,
                produced_by,
            });
        }
        self.inputs.push(path.clone());
        Ok(path)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        atomic_write(&self.artifact_path(name), bytes)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Manifest last, so its presence implies the stage completed.
    fn finish(self) -> Result<(), PipelineError> {
        let mut input_hashes = BTreeMap::new();
        for path in &self.inputs {
            input_hashes.insert(path.display().to_string(), sha256_hex(path)?);
        }
        let manifest = Manifest {
            stage: self.stage,
            input_hashes,
            artifacts: self.artifacts.clone(),
            config: self.cfg,
            duration_ms: self.started.elapsed().as_millis(),
        };
        let bytes = serde_json::to_vec_pretty(&manifest)?;
        atomic_write(
            &self.out.join(format!("manifest_{}.json", self.stage)),
            &bytes,
        )?;
        Ok(())
    }
}

pub fn run(stage: Stage, cfg: &PipelineConfig) -> Result<(), PipelineError> {
    match stage {
        Stage::Ingest => run_ingest(cfg),
        Stage::Normalize => run_normalize(cfg),
        Stage::Build => run_build(cfg),
        Stage::Fit => run_fit(cfg),
        Stage::Validate => run_validate(cfg),
        Stage::Communities => run_communities(cfg),
        Stage::Csr => run_csr(cfg),
        Stage::Correlations => run_correlations(cfg),
        Stage::All => {
            for s in Stage::ORDER {
                run(s, cfg)?;
            }
            Ok(())
        }
    }
}

fn read_window_tweets(path: &Path) -> Result<Vec<TweetRecord>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(PipelineError::from))
        .collect()
}

fn read_merge_map(path: &Path) -> Result<HashMap<String, String>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_firms(path: &Path) -> Result<Vec<FirmRecord>, PipelineError> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| PipelineError::Data(e.to_string()))?;
    reader
        .deserialize::<FirmRecord>()
        .map(|r| r.map_err(|e| PipelineError::Data(e.to_string())))
        .collect()
}

fn read_partition(path: &Path) -> Result<HashMap<String, usize>, PipelineError> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| PipelineError::Data(e.to_string()))?;
    let mut partition = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| PipelineError::Data(e.to_string()))?;
        let label = row
            .get(0)
            .ok_or_else(|| PipelineError::Data("communities.csv: missing label".into()))?;
        let community: usize = row
            .get(1)
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| PipelineError::Data("communities.csv: bad community id".into()))?;
        partition.insert(label.to_string(), community);
    }
    Ok(partition)
}

fn run_ingest(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "ingest");
    let tweets_path = ctx.input(&cfg.inputs.tweets);
    let firms_path = ctx.input(&cfg.inputs.firms);

    let (tweets, report) = ingest::load_tweets(&tweets_path)?;
    let (accounts, window) = ingest::filter_accounts(&tweets, &cfg.period)?;
    let stats = ingest::descriptive_stats(&window, 20);
    let join = ingest::load_firm_metadata(&firms_path, &accounts)?;

    let mut jsonl = Vec::new();
    for t in &window {
        serde_json::to_writer(&mut jsonl, t)?;
        jsonl.push(b'\n');
    }
    ctx.write(TWEETS_WINDOW, &jsonl)?;
    ctx.write(ACCOUNTS, (accounts.join("\n") + "\n").as_bytes())?;
    ctx.write(INGEST_REPORT, &serde_json::to_vec_pretty(&report)?)?;
    ctx.write(DESCRIPTIVE_STATS, &serde_json::to_vec_pretty(&stats)?)?;
    ctx.write(METADATA_JOIN, &serde_json::to_vec_pretty(&join)?)?;
    ctx.finish()
}

fn run_normalize(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "normalize");
    let window_path = ctx.require(TWEETS_WINDOW, "ingest")?;
    for w in &cfg.inputs.wordlists {
        ctx.input(w);
    }
    let tweets = read_window_tweets(&window_path)?;

    let extractor = HashtagExtractor::default();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in &tweets {
        for tag in t.effective_hashtags(&extractor) {
            *counts.entry(tag).or_insert(0) += 1;
        }
    }

    let mut ncfg = NormalizationConfig {
        relative_threshold: cfg.normalization.relative_threshold,
        enable_digit_strip: cfg.normalization.enable_digit_strip,
        ..Default::default()
    };
    ncfg.load_wordlists(&cfg.inputs.wordlists)?;
    let map = build_merge_map(&counts, &ncfg)?;

    let mut flat: BTreeMap<&str, &str> = BTreeMap::new();
    for (canonical, members) in map.clusters() {
        for raw in members {
            flat.insert(raw, canonical);
        }
    }
    ctx.write(MERGE_MAP, &serde_json::to_vec_pretty(&flat)?)?;
    let mut review = Vec::new();
    map.write_review(&mut review)?;
    ctx.write(MERGE_REVIEW, &review)?;
    ctx.finish()
}

fn run_build(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "build");
    let window_path = ctx.require(TWEETS_WINDOW, "ingest")?;
    let map_path = ctx.require(MERGE_MAP, "normalize")?;
    let tweets = read_window_tweets(&window_path)?;
    let map = read_merge_map(&map_path)?;

    let usage = ingest::account_usage(&tweets, |t| {
        map.get(t).cloned().unwrap_or_else(|| t.to_string())
    });
    let mut records: Vec<(String, String)> = usage
        .iter()
        .flat_map(|(account, tags)| {
            tags.keys().map(move |tag| (account.clone(), tag.clone()))
        })
        .collect();
    records.sort();
    if records.is_empty() {
        return Err(PipelineError::Data(
            "no account-hashtag pairs in the window".into(),
        ));
    }
    let graph = BipartiteGraph::build(&records)?;
    let mut edges = Vec::new();
    graph.write_edge_list(&mut edges)?;
    ctx.write(BIPARTITE_EDGES, &edges)?;
    ctx.finish()
}

fn run_fit(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "fit");
    let edges_path = ctx.require(BIPARTITE_EDGES, "build")?;
    let graph = BipartiteGraph::read_edge_list(&edges_path)?;
    let model = bicm::fit(&graph.degrees(), &cfg.solver)?;
    ctx.write(MODEL, &serde_json::to_vec_pretty(&model)?)?;
    ctx.finish()
}

fn run_validate(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "validate");
    let edges_path = ctx.require(BIPARTITE_EDGES, "build")?;
    let model_path = ctx.require(MODEL, "fit")?;
    let graph = BipartiteGraph::read_edge_list(&edges_path)?;
    let model = BicmModel::load(&model_path)?;
    let (report, projection) = validate_projection(
        &graph,
        &model,
        cfg.validation.alpha,
        cfg.validation.mode,
        cfg.validation.hypothesis_override,
    )?;

    let mut pvalues = Vec::new();
    report.write_csv(graph.top_labels(), &mut pvalues)?;
    ctx.write(PVALUES, &pvalues)?;
    ctx.write(PROJECTION, &serde_json::to_vec_pretty(&projection)?)?;
    let mut edge_csv = Vec::new();
    projection.write_edge_csv(&mut edge_csv)?;
    ctx.write(PROJECTION_EDGES, &edge_csv)?;
    ctx.finish()
}

fn run_communities(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "communities");
    let projection_path = ctx.require(PROJECTION, "validate")?;
    let firms_path = ctx.input(&cfg.inputs.firms);
    let projection: ValidatedProjection =
        serde_json::from_str(&std::fs::read_to_string(&projection_path)?)?;
    let graph = UndirectedGraph::new(projection.nodes.clone(), &projection.edges)?;
    let partition = louvain(&graph, cfg.communities.seed)?;
    let firms = load_firms(&firms_path)?;

    let mut communities = Vec::new();
    partition.write_csv(graph.labels(), &mut communities)?;
    ctx.write(COMMUNITIES, &communities)?;
    let mut xml = Vec::new();
    write_graphml(&graph, &partition.assignment, &firms, &mut xml)?;
    ctx.write(GRAPHML, &xml)?;
    ctx.finish()
}

fn run_csr(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "csr");
    let communities_path = ctx.require(COMMUNITIES, "communities")?;
    let window_path = ctx.require(TWEETS_WINDOW, "ingest")?;
    let map_path = ctx.require(MERGE_MAP, "normalize")?;
    let lexicon_path = ctx.input(&cfg.inputs.lexicon);

    let partition = read_partition(&communities_path)?;
    let tweets = read_window_tweets(&window_path)?;
    let map = read_merge_map(&map_path)?;
    let lexicon = CsrLexicon::load(&lexicon_path)?;

    // the tables cover the validated network, so restrict to its accounts
    let in_network: Vec<&TweetRecord> = tweets
        .iter()
        .filter(|t| partition.contains_key(&t.account_id))
        .collect();
    let canonical = |t: &str| map.get(t).cloned().unwrap_or_else(|| t.to_string());
    let extractor = HashtagExtractor::default();

    let mut usage: csr::AccountUsage = HashMap::new();
    let mut messages: Vec<EngagementMessage> = Vec::new();
    for t in &in_network {
        let tags: Vec<String> = t
            .effective_hashtags(&extractor)
            .iter()
            .map(|t| canonical(t))
            .collect();
        let bucket = usage.entry(t.account_id.clone()).or_default();
        for tag in &tags {
            *bucket.entry(tag.clone()).or_insert(0) += 1;
        }
        messages.push(EngagementMessage {
            account_id: t.account_id.clone(),
            hashtags: tags,
            like_count: t.like_count,
            retweet_count: t.retweet_count,
        });
    }
    usage.retain(|_, counts| !counts.is_empty());

    let account_stats = csr::community_csr_accounts(&partition, &usage, &lexicon)?;
    let (occ_network, occ_stats) = csr::community_csr_occurrences(&partition, &usage, &lexicon)?;
    let (eng_network, eng_stats) = csr::engagement(&messages, &partition, &lexicon)?;

    let mut buf = Vec::new();
    csr::write_account_table(&account_stats, &mut buf)?;
    ctx.write(CSR_ACCOUNTS, &buf)?;
    let mut buf = Vec::new();
    csr::write_occurrence_table(&occ_network, &occ_stats, &mut buf)?;
    ctx.write(CSR_OCCURRENCES, &buf)?;
    let mut buf = Vec::new();
    csr::write_engagement_table(&eng_network, &eng_stats, &mut buf)?;
    ctx.write(CSR_ENGAGEMENT, &buf)?;
    ctx.finish()
}

fn run_correlations(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut ctx = StageContext::new(cfg, "correlations");
    let accounts_path = ctx.require(ACCOUNTS, "ingest")?;
    let firms_path = ctx.input(&cfg.inputs.firms);
    let accounts: HashSet<String> = std::fs::read_to_string(&accounts_path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    let firms: Vec<FirmRecord> = load_firms(&firms_path)?
        .into_iter()
        .filter(|f| accounts.contains(&f.account_id))
        .collect();
    let matrix = correlation_matrix(&firms, DEFAULT_VARIABLES, None)?;

    let mut wide = Vec::new();
    matrix.write_csv(&mut wide)?;
    ctx.write(CORRELATIONS, &wide)?;
    let mut long = Vec::new();
    matrix.write_long_csv(&mut long)?;
    ctx.write(CORRELATIONS_LONG, &long)?;
    ctx.finish()
}
