//! V-motif counting, null p-values and the FDR-validated projection.
//!
//! For every pair of accounts the number of co-used hashtags (the V-motif
//! count) is compared against its null distribution under the fitted BiCM:
//! a sum of independent Bernoulli trials with probabilities `p_ia * p_ja`,
//! i.e. a Poisson-binomial variable, optionally approximated by a Poisson
//! with the same mean. Pairs whose observed count is significantly high
//! under Benjamini-Hochberg become edges of the validated projection.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;
use thiserror::Error;

use crate::bicm::{BicmError, BicmModel};
use crate::graph::BipartiteGraph;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("model dimensions {0}x{1} do not match graph {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("FDR level must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("hypothesis count {0} is smaller than the number of p-values {1}")]
    InvalidHypothesisCount(usize, usize),
    #[error(transparent)]
    Bicm(#[from] BicmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Null distribution used for the pairwise p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PvalueMode {
    /// Exact Poisson-binomial survival function by dynamic programming.
    Exact,
    /// Poisson approximation with the same mean; adequate in the sparse
    /// regime where all link probabilities are small.
    Poisson,
    /// Exact when the opposite layer has at most 5000 nodes, Poisson
    /// otherwise.
    #[default]
    Auto,
}

const AUTO_EXACT_LIMIT: usize = 5000;

impl PvalueMode {
    pub fn resolve(self, n_bottom: usize) -> PvalueMode {
        match self {
            PvalueMode::Auto if n_bottom <= AUTO_EXACT_LIMIT => PvalueMode::Exact,
            PvalueMode::Auto => PvalueMode::Poisson,
            other => other,
        }
    }
}

/// One tested account pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairTest {
    pub i: usize,
    pub j: usize,
    pub v_observed: u32,
    /// Null mean of the V-motif count.
    pub lambda: f64,
    pub p_value: f64,
    pub rejected: bool,
}

/// Full record of the validation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pairs: Vec<PairTest>,
    pub alpha: f64,
    pub hypothesis_count: usize,
    pub mode: PvalueMode,
}

impl ValidationReport {
    /// CSV export: (i_label, j_label, v, lambda, p_value, rejected).
    pub fn write_csv<W: Write>(&self, labels: &[String], out: W) -> Result<(), ValidationError> {
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record(["i_label", "j_label", "v", "lambda", "p_value", "rejected"])
            .map_err(std::io::Error::other)?;
        for pair in &self.pairs {
            writer
                .write_record([
                    labels[pair.i].as_str(),
                    labels[pair.j].as_str(),
                    &pair.v_observed.to_string(),
                    &format!("{:.12e}", pair.lambda),
                    &format!("{:.12e}", pair.p_value),
                    &pair.rejected.to_string(),
                ])
                .map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// The monopartite account network of FDR-significant co-occurrences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidatedProjection {
    pub nodes: Vec<String>,
    /// Undirected edges as (i, j) with i < j.
    pub edges: Vec<(usize, usize)>,
}

impl ValidatedProjection {
    /// Undirected edge-list CSV with node labels.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<(), ValidationError> {
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record(["source", "target"])
            .map_err(std::io::Error::other)?;
        for &(i, j) in &self.edges {
            writer
                .write_record([self.nodes[i].as_str(), self.nodes[j].as_str()])
                .map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Count common bottom-layer neighbours for every pair of top nodes.
/// Only pairs with a positive count are materialised.
pub fn v_motifs(g: &BipartiteGraph) -> BTreeMap<(usize, usize), u32> {
    let mut counts: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for a in 0..g.n_bottom() {
        let users = g.bottom_neighbors(a);
        for (idx, &i) in users.iter().enumerate() {
            for &j in &users[idx + 1..] {
                *counts.entry((i as usize, j as usize)).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Full probability mass function of a Poisson-binomial variable, by the
/// standard convolution recurrence. Used by tests against enumeration and
/// by the survival function below.
pub fn poisson_binomial_pmf(probabilities: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0f64; probabilities.len() + 1];
    pmf[0] = 1.0;
    for (trial, &p) in probabilities.iter().enumerate() {
        for k in (1..=trial + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf
}

/// Exact inclusive survival `P(V >= v)` of a Poisson-binomial variable.
///
/// The convolution is truncated at `v` counts: anything at or above the
/// threshold is lumped together, so the cost is `O(n * v)`.
pub fn poisson_binomial_pvalue(probabilities: &[f64], v_observed: u32) -> f64 {
    let v = v_observed as usize;
    if v == 0 {
        return 1.0;
    }
    // dp[k] = P(count == k) over processed trials, for k < v
    let mut dp = vec![0.0f64; v];
    dp[0] = 1.0;
    let mut tail = 0.0f64; // P(count >= v)
    for &p in probabilities {
        tail += dp[v - 1] * p;
        for k in (1..v).rev() {
            dp[k] = dp[k] * (1.0 - p) + dp[k - 1] * p;
        }
        dp[0] *= 1.0 - p;
    }
    tail.clamp(0.0, 1.0)
}

/// Inclusive survival `P(V >= v)` of a Poisson(lambda) variable, via the
/// regularized lower incomplete gamma function.
pub fn poisson_pvalue(lambda: f64, v_observed: u32) -> f64 {
    if v_observed == 0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    gamma_lr(v_observed as f64, lambda).clamp(0.0, 1.0)
}

/// Benjamini-Hochberg selection: indices of rejected hypotheses.
///
/// Sorts ascending (ties broken by index for determinism), finds the largest
/// rank `k` with `p_(k) <= k * alpha / m` and rejects the first `k`.
pub fn fdr_select(
    p_values: &[f64],
    alpha: f64,
    hypothesis_count: usize,
) -> Result<Vec<usize>, ValidationError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ValidationError::InvalidAlpha(alpha));
    }
    if hypothesis_count < p_values.len() {
        return Err(ValidationError::InvalidHypothesisCount(
            hypothesis_count,
            p_values.len(),
        ));
    }
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| {
        p_values[a]
            .partial_cmp(&p_values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut cutoff = 0usize;
    for (rank, &idx) in order.iter().enumerate() {
        let threshold = (rank + 1) as f64 * alpha / hypothesis_count as f64;
        if p_values[idx] <= threshold {
            cutoff = rank + 1;
        }
    }
    Ok(order[..cutoff].to_vec())
}

/// Compute all pairwise p-values on the top layer, apply FDR control and
/// assemble the validated projection.
///
/// The hypothesis count is the number of pairs with at least one observed
/// co-occurrence (pairs with none have p-value one and cannot be rejected);
/// `hypothesis_override` replaces it when the caller wants a stricter
/// denominator.
pub fn validate_projection(
    g: &BipartiteGraph,
    model: &BicmModel,
    alpha: f64,
    mode: PvalueMode,
    hypothesis_override: Option<usize>,
) -> Result<(ValidationReport, ValidatedProjection), ValidationError> {
    if g.n_top() != model.n_top() || g.n_bottom() != model.n_bottom() {
        return Err(ValidationError::DimensionMismatch(
            model.n_top(),
            model.n_bottom(),
            g.n_top(),
            g.n_bottom(),
        ));
    }
    let mode = mode.resolve(g.n_bottom());
    let motifs = v_motifs(g);
    let hypothesis_count = hypothesis_override.unwrap_or(motifs.len()).max(motifs.len());

    let rows: Vec<Vec<f64>> = (0..g.n_top())
        .map(|i| model.probability_row(i))
        .collect::<Result<_, _>>()?;

    let mut pairs: Vec<PairTest> = Vec::with_capacity(motifs.len());
    for (&(i, j), &v) in &motifs {
        let pair_probs: Vec<f64> = rows[i]
            .iter()
            .zip(&rows[j])
            .map(|(&pi, &pj)| pi * pj)
            .filter(|&p| p > 0.0)
            .collect();
        let lambda: f64 = pair_probs.iter().sum();
        let p_value = match mode {
            PvalueMode::Exact => poisson_binomial_pvalue(&pair_probs, v),
            PvalueMode::Poisson => poisson_pvalue(lambda, v),
            PvalueMode::Auto => unreachable!("mode resolved above"),
        };
        pairs.push(PairTest {
            i,
            j,
            v_observed: v,
            lambda,
            p_value,
            rejected: false,
        });
    }

    let p_values: Vec<f64> = pairs.iter().map(|p| p.p_value).collect();
    for idx in fdr_select(&p_values, alpha, hypothesis_count)? {
        pairs[idx].rejected = true;
    }

    let edges: Vec<(usize, usize)> = pairs
        .iter()
        .filter(|p| p.rejected)
        .map(|p| (p.i, p.j))
        .collect();
    let projection = ValidatedProjection {
        nodes: g.top_labels().to_vec(),
        edges,
    };
    let report = ValidationReport {
        pairs,
        alpha,
        hypothesis_count,
        mode,
    };
    Ok((report, projection))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicm::{fit, SolverConfig};
    use crate::graph::DegreeSequence;

    #[test]
    fn v_motifs_complete_3x3() {
        let mut records = Vec::new();
        for a in ["a1", "a2", "a3"] {
            for h in ["h1", "h2", "h3"] {
                records.push((a, h));
            }
        }
        let g = BipartiteGraph::build(&records).unwrap();
        let motifs = v_motifs(&g);
        assert_eq!(motifs.len(), 3);
        assert!(motifs.values().all(|&v| v == 3));
    }

    #[test]
    fn v_motifs_disjoint_stars() {
        let g = BipartiteGraph::build(&[("a", "h1"), ("a", "h2"), ("b", "h3"), ("b", "h4")]).unwrap();
        assert!(v_motifs(&g).is_empty());
    }

    #[test]
    fn v_motifs_set_intersection() {
        let g = BipartiteGraph::build(&[
            ("i", "h1"),
            ("i", "h2"),
            ("i", "h3"),
            ("j", "h2"),
            ("j", "h3"),
            ("j", "h4"),
        ])
        .unwrap();
        let motifs = v_motifs(&g);
        assert_eq!(motifs[&(0, 1)], 2);
    }

    #[test]
    fn poisson_binomial_two_fair_coins() {
        assert!((poisson_binomial_pvalue(&[0.5, 0.5], 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn poisson_binomial_v_zero_is_certain() {
        assert_eq!(poisson_binomial_pvalue(&[0.3, 0.9], 0), 1.0);
    }

    #[test]
    fn poisson_binomial_closed_form_complement() {
        let p = poisson_binomial_pvalue(&[0.25; 4], 1);
        assert!((p - 0.68359375).abs() < 1e-12);
    }

    #[test]
    fn poisson_survival_closed_form() {
        let p = poisson_pvalue(1.0, 1);
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert_eq!(poisson_pvalue(0.0, 1), 0.0);
        assert_eq!(poisson_pvalue(3.7, 0), 1.0);
    }

    #[test]
    fn pmf_matches_truncated_survival() {
        let probs = [0.1, 0.7, 0.25, 0.5, 0.03];
        let pmf = poisson_binomial_pmf(&probs);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for v in 0..=5u32 {
            let survival: f64 = pmf[v as usize..].iter().sum();
            assert!((poisson_binomial_pvalue(&probs, v) - survival).abs() < 1e-12);
        }
    }

    #[test]
    fn bh_rejects_two_smallest() {
        let rejected = fdr_select(&[0.001, 0.02, 0.5, 0.6], 0.05, 4).unwrap();
        assert_eq!(rejected, vec![0, 1]);
    }

    #[test]
    fn bh_rejects_nothing_on_unit_pvalues() {
        let rejected = fdr_select(&[1.0, 1.0, 1.0], 0.05, 3).unwrap();
        assert!(rejected.is_empty());
    }

    #[test]
    fn bh_boundary_equality_rejects() {
        let rejected = fdr_select(&[0.05], 0.05, 1).unwrap();
        assert_eq!(rejected, vec![0]);
    }

    #[test]
    fn complete_graph_validates_nothing() {
        let mut records = Vec::new();
        for a in ["a1", "a2", "a3"] {
            for h in ["h1", "h2", "h3"] {
                records.push((a, h));
            }
        }
        let g = BipartiteGraph::build(&records).unwrap();
        let model = fit(&g.degrees(), &SolverConfig::default()).unwrap();
        let (report, projection) =
            validate_projection(&g, &model, 0.05, PvalueMode::Exact, None).unwrap();
        assert!(projection.edges.is_empty());
        assert!(report.pairs.iter().all(|p| p.p_value == 1.0));
    }

    #[test]
    fn empty_cooccurrences_give_empty_projection() {
        let g = BipartiteGraph::build(&[("a", "h1"), ("b", "h2")]).unwrap();
        let model = fit(&g.degrees(), &SolverConfig::default()).unwrap();
        let (report, projection) =
            validate_projection(&g, &model, 0.05, PvalueMode::Exact, None).unwrap();
        assert!(report.pairs.is_empty());
        assert!(projection.edges.is_empty());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = BipartiteGraph::build(&[("a", "h1"), ("b", "h1")]).unwrap();
        let other = DegreeSequence {
            top: vec![1, 1, 1],
            bottom: vec![1, 1, 1],
        };
        let model = fit(&other, &SolverConfig::default()).unwrap();
        assert!(matches!(
            validate_projection(&g, &model, 0.05, PvalueMode::Exact, None),
            Err(ValidationError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn auto_mode_resolves_by_layer_size() {
        assert_eq!(PvalueMode::Auto.resolve(100), PvalueMode::Exact);
        assert_eq!(PvalueMode::Auto.resolve(100_000), PvalueMode::Poisson);
        assert_eq!(PvalueMode::Poisson.resolve(100), PvalueMode::Poisson);
    }
}
