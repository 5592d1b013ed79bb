//! Bipartite Configuration Model: the maximum-entropy ensemble of bipartite
//! graphs whose expected degree sequences match the observed ones.
//!
//! Each node carries an exponentiated Lagrange multiplier (`x_i` for the top
//! layer, `y_a` for the bottom layer) and links become independent with
//! probability `p_ia = x_i y_a / (1 + x_i y_a)`. The multipliers solve the
//! constraint system `<k_i> = k_i*` for every node, which is equivalent to
//! maximising the likelihood of the observed graph.
//!
//! Degenerate nodes (degree zero, or degree equal to the opposite layer
//! size) drive their multipliers to 0 or infinity and are peeled off before
//! the solve; their link probabilities are exactly 0 or 1.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BipartiteGraph, DegreeSequence};

#[derive(Debug, Error)]
pub enum BicmError {
    #[error("degree sums differ between layers: top {0}, bottom {1}")]
    InvalidDegrees(usize, usize),
    #[error("degree {0} exceeds opposite layer size {1}")]
    DegreeOutOfRange(usize, usize),
    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("node index {0} out of range for layer of size {1}")]
    IndexOutOfRange(usize, usize),
    #[error("graph dimensions {0}x{1} do not match model dimensions {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("model file error: {0}")]
    Persistence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Solver method for the multiplier system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Alternating fixed-point updates `x_i <- k_i / sum_a y_a/(1+x_i y_a)`.
    #[default]
    FixedPoint,
    /// Per-coordinate Newton steps on the degree constraints, alternating
    /// layers; more robust on skewed degree sequences.
    QuasiNewton,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence is measured on the maximum absolute degree residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub method: SolverMethod,
    /// Solve one multiplier per degree class instead of one per node.
    /// Results are identical; this only changes the system size.
    pub use_degree_classes: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            method: SolverMethod::FixedPoint,
            use_degree_classes: true,
        }
    }
}

/// Per-node multiplier state. `Zero` and `Saturated` are the peeled
/// degenerate limits (x -> 0 and x -> infinity). The peel round orders
/// degenerate pairs on opposite layers: a node saturated while the other was
/// still active forces the edge, a node that went to zero first forbids it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Multiplier {
    Zero { round: u32 },
    Saturated { round: u32 },
    Finite(f64),
}

/// Fitted Bipartite Configuration Model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BicmModel {
    top: Vec<Multiplier>,
    bottom: Vec<Multiplier>,
    /// Maximum absolute degree-constraint violation at the end of the fit.
    pub residual: f64,
    pub iterations: usize,
    pub config: SolverConfig,
}

/// Pairwise link probability from two multiplier states.
fn pair_probability(x: Multiplier, y: Multiplier) -> f64 {
    use Multiplier::*;
    match (x, y) {
        (Finite(x), Finite(y)) => {
            let xy = x * y;
            xy / (1.0 + xy)
        }
        // a saturated node connects with certainty to everything that was
        // still active when it was peeled, including the finite core
        (Saturated { .. }, Finite(_)) | (Finite(_), Saturated { .. }) => 1.0,
        (Zero { .. }, Finite(_)) | (Finite(_), Zero { .. }) => 0.0,
        (Saturated { .. }, Saturated { .. }) => 1.0,
        (Zero { .. }, Zero { .. }) => 0.0,
        (Saturated { round: rs }, Zero { round: rz })
        | (Zero { round: rz }, Saturated { round: rs }) => {
            if rs < rz {
                1.0
            } else {
                0.0
            }
        }
    }
}

impl BicmModel {
    pub fn n_top(&self) -> usize {
        self.top.len()
    }

    pub fn n_bottom(&self) -> usize {
        self.bottom.len()
    }

    pub fn top_multiplier(&self, i: usize) -> Multiplier {
        self.top[i]
    }

    pub fn bottom_multiplier(&self, a: usize) -> Multiplier {
        self.bottom[a]
    }

    /// Probability of a link between top node `i` and bottom node `a`.
    pub fn link_probability(&self, i: usize, a: usize) -> Result<f64, BicmError> {
        if i >= self.top.len() {
            return Err(BicmError::IndexOutOfRange(i, self.top.len()));
        }
        if a >= self.bottom.len() {
            return Err(BicmError::IndexOutOfRange(a, self.bottom.len()));
        }
        Ok(pair_probability(self.top[i], self.bottom[a]))
    }

    /// Row of link probabilities for one top node.
    pub fn probability_row(&self, i: usize) -> Result<Vec<f64>, BicmError> {
        if i >= self.top.len() {
            return Err(BicmError::IndexOutOfRange(i, self.top.len()));
        }
        Ok(self
            .bottom
            .iter()
            .map(|&y| pair_probability(self.top[i], y))
            .collect())
    }

    /// Expected degree sequence under the model.
    pub fn expected_degrees(&self) -> DegreeSequence {
        let mut top = vec![0.0f64; self.top.len()];
        let mut bottom = vec![0.0f64; self.bottom.len()];
        for (i, &x) in self.top.iter().enumerate() {
            for (a, &y) in self.bottom.iter().enumerate() {
                let p = pair_probability(x, y);
                top[i] += p;
                bottom[a] += p;
            }
        }
        // rounded only for the caller's convenience; use residual_against
        // for the exact violation
        DegreeSequence {
            top: top.iter().map(|&v| v.round() as usize).collect(),
            bottom: bottom.iter().map(|&v| v.round() as usize).collect(),
        }
    }

    /// Maximum absolute deviation between expected and observed degrees.
    pub fn residual_against(&self, degrees: &DegreeSequence) -> f64 {
        let mut top = vec![0.0f64; self.top.len()];
        let mut bottom = vec![0.0f64; self.bottom.len()];
        for (i, &x) in self.top.iter().enumerate() {
            for (a, &y) in self.bottom.iter().enumerate() {
                let p = pair_probability(x, y);
                top[i] += p;
                bottom[a] += p;
            }
        }
        let mut worst = 0.0f64;
        for (i, &k) in degrees.top.iter().enumerate() {
            worst = worst.max((top[i] - k as f64).abs());
        }
        for (a, &k) in degrees.bottom.iter().enumerate() {
            worst = worst.max((bottom[a] - k as f64).abs());
        }
        worst
    }

    /// Draw one graph from the ensemble; every pair is an independent
    /// Bernoulli trial. Reproducible under a fixed seed.
    pub fn sample_graph(&self, seed: u64, top_labels: &[String], bottom_labels: &[String]) -> BipartiteGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..self.top.len() {
            for a in 0..self.bottom.len() {
                let p = pair_probability(self.top[i], self.bottom[a]);
                if rng.gen::<f64>() < p {
                    edges.push((i as u32, a as u32));
                }
            }
        }
        BipartiteGraph::from_parts(top_labels.to_vec(), bottom_labels.to_vec(), edges)
            .expect("sampled edges are in range by construction")
    }

    /// Log-probability of a specific graph under the ensemble. Returns
    /// negative infinity when the graph contains an impossible edge (or is
    /// missing a certain one).
    pub fn graph_log_probability(&self, g: &BipartiteGraph) -> Result<f64, BicmError> {
        if g.n_top() != self.top.len() || g.n_bottom() != self.bottom.len() {
            return Err(BicmError::DimensionMismatch(
                g.n_top(),
                g.n_bottom(),
                self.top.len(),
                self.bottom.len(),
            ));
        }
        let mut log_p = 0.0f64;
        for i in 0..self.top.len() {
            for a in 0..self.bottom.len() {
                let p = pair_probability(self.top[i], self.bottom[a]);
                let present = g.has_edge(i, a);
                if present {
                    if p == 0.0 {
                        return Ok(f64::NEG_INFINITY);
                    }
                    log_p += p.ln();
                } else {
                    if p == 1.0 {
                        return Ok(f64::NEG_INFINITY);
                    }
                    log_p += (1.0 - p).ln();
                }
            }
        }
        Ok(log_p)
    }

    /// Persist the model as JSON. Multipliers are finite f64 values or
    /// explicit zero/saturated markers, so reload reproduces probabilities
    /// bit-identically.
    pub fn save(&self, path: &Path) -> Result<(), BicmError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| BicmError::Persistence(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BicmError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| BicmError::Persistence(e.to_string()))
    }
}

/// Fit the BiCM to an observed degree sequence.
pub fn fit(degrees: &DegreeSequence, cfg: &SolverConfig) -> Result<BicmModel, BicmError> {
    let n_top = degrees.top.len();
    let n_bottom = degrees.bottom.len();
    let top_sum: usize = degrees.top.iter().sum();
    let bottom_sum: usize = degrees.bottom.iter().sum();
    if top_sum != bottom_sum {
        return Err(BicmError::InvalidDegrees(top_sum, bottom_sum));
    }
    for &k in &degrees.top {
        if k > n_bottom {
            return Err(BicmError::DegreeOutOfRange(k, n_bottom));
        }
    }
    for &k in &degrees.bottom {
        if k > n_top {
            return Err(BicmError::DegreeOutOfRange(k, n_top));
        }
    }

    // Peel degenerate nodes. A saturated node forces an edge to every active
    // node on the other side, which lowers the effective degrees there; the
    // peel repeats until stable because saturation is relative to the
    // shrinking active set.
    let mut eff_top: Vec<i64> = degrees.top.iter().map(|&k| k as i64).collect();
    let mut eff_bottom: Vec<i64> = degrees.bottom.iter().map(|&k| k as i64).collect();
    let mut top_state: Vec<Option<Multiplier>> = vec![None; n_top];
    let mut bottom_state: Vec<Option<Multiplier>> = vec![None; n_bottom];

    let mut round: u32 = 0;
    loop {
        let mut changed = false;
        let active_bottom: Vec<usize> = (0..n_bottom).filter(|&a| bottom_state[a].is_none()).collect();
        let nb = active_bottom.len() as i64;
        let mut saturated_top = 0i64;
        for i in 0..n_top {
            if top_state[i].is_some() {
                continue;
            }
            if eff_top[i] == 0 {
                top_state[i] = Some(Multiplier::Zero { round });
                changed = true;
            } else if eff_top[i] == nb {
                top_state[i] = Some(Multiplier::Saturated { round });
                saturated_top += 1;
                changed = true;
            } else if eff_top[i] > nb || eff_top[i] < 0 {
                return Err(BicmError::DegreeOutOfRange(eff_top[i].max(0) as usize, nb as usize));
            }
        }
        if saturated_top > 0 {
            for &a in &active_bottom {
                eff_bottom[a] -= saturated_top;
            }
        }
        round += 1;

        let active_top: Vec<usize> = (0..n_top).filter(|&i| top_state[i].is_none()).collect();
        let nt = active_top.len() as i64;
        let mut saturated_bottom = 0i64;
        for a in 0..n_bottom {
            if bottom_state[a].is_some() {
                continue;
            }
            if eff_bottom[a] == 0 {
                bottom_state[a] = Some(Multiplier::Zero { round });
                changed = true;
            } else if eff_bottom[a] == nt {
                bottom_state[a] = Some(Multiplier::Saturated { round });
                saturated_bottom += 1;
                changed = true;
            } else if eff_bottom[a] > nt || eff_bottom[a] < 0 {
                return Err(BicmError::DegreeOutOfRange(eff_bottom[a].max(0) as usize, nt as usize));
            }
        }
        if saturated_bottom > 0 {
            for i in 0..n_top {
                if top_state[i].is_none() {
                    eff_top[i] -= saturated_bottom;
                }
            }
        }
        round += 1;

        if !changed {
            break;
        }
    }

    let active_top: Vec<usize> = (0..n_top).filter(|&i| top_state[i].is_none()).collect();
    let active_bottom: Vec<usize> = (0..n_bottom).filter(|&a| bottom_state[a].is_none()).collect();

    let (solved_top, solved_bottom, residual, iterations) = if active_top.is_empty() {
        (BTreeMap::new(), BTreeMap::new(), 0.0, 0)
    } else {
        solve_core(
            &active_top.iter().map(|&i| eff_top[i] as f64).collect::<Vec<_>>(),
            &active_bottom.iter().map(|&a| eff_bottom[a] as f64).collect::<Vec<_>>(),
            cfg,
        )?
    };

    let mut top = vec![Multiplier::Zero { round: 0 }; n_top];
    for (slot, &i) in active_top.iter().enumerate() {
        top[i] = Multiplier::Finite(solved_top[&slot]);
    }
    for (i, state) in top_state.iter().enumerate() {
        if let Some(m) = state {
            top[i] = *m;
        }
    }
    let mut bottom = vec![Multiplier::Zero { round: 0 }; n_bottom];
    for (slot, &a) in active_bottom.iter().enumerate() {
        bottom[a] = Multiplier::Finite(solved_bottom[&slot]);
    }
    for (a, state) in bottom_state.iter().enumerate() {
        if let Some(m) = state {
            bottom[a] = *m;
        }
    }

    let model = BicmModel {
        top,
        bottom,
        residual,
        iterations,
        config: cfg.clone(),
    };
    Ok(model)
}

/// Solve the non-degenerate core of the system. Input degrees are the
/// effective degrees of the active nodes; output maps active-slot index to
/// its finite multiplier.
type CoreSolution = (BTreeMap<usize, f64>, BTreeMap<usize, f64>, f64, usize);

fn solve_core(
    top_degrees: &[f64],
    bottom_degrees: &[f64],
    cfg: &SolverConfig,
) -> Result<CoreSolution, BicmError> {
    // group by degree: one unknown per class
    let (top_classes, top_slot_class) = classes_of(top_degrees, cfg.use_degree_classes);
    let (bottom_classes, bottom_slot_class) = classes_of(bottom_degrees, cfg.use_degree_classes);

    let edge_count: f64 = top_degrees.iter().sum();
    let sqrt_e = edge_count.sqrt().max(1.0);
    let mut x: Vec<f64> = top_classes.iter().map(|c| c.degree / sqrt_e).collect();
    let mut y: Vec<f64> = bottom_classes.iter().map(|c| c.degree / sqrt_e).collect();

    let residual = |x: &[f64], y: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for (ci, tc) in top_classes.iter().enumerate() {
            let mut expected = 0.0;
            for (cj, bc) in bottom_classes.iter().enumerate() {
                let xy = x[ci] * y[cj];
                expected += bc.multiplicity * xy / (1.0 + xy);
            }
            worst = worst.max((expected - tc.degree).abs());
        }
        for (cj, bc) in bottom_classes.iter().enumerate() {
            let mut expected = 0.0;
            for (ci, tc) in top_classes.iter().enumerate() {
                let xy = x[ci] * y[cj];
                expected += tc.multiplicity * xy / (1.0 + xy);
            }
            worst = worst.max((expected - bc.degree).abs());
        }
        worst
    };

    let mut res = residual(&x, &y);
    let mut iterations = 0usize;
    while res > cfg.tolerance {
        if iterations >= cfg.max_iterations {
            return Err(BicmError::SolverDiverged {
                iterations,
                residual: res,
            });
        }
        match cfg.method {
            SolverMethod::FixedPoint => {
                for (ci, tc) in top_classes.iter().enumerate() {
                    let mut denom = 0.0;
                    for (cj, bc) in bottom_classes.iter().enumerate() {
                        denom += bc.multiplicity * y[cj] / (1.0 + x[ci] * y[cj]);
                    }
                    x[ci] = tc.degree / denom;
                }
                for (cj, bc) in bottom_classes.iter().enumerate() {
                    let mut denom = 0.0;
                    for (ci, tc) in top_classes.iter().enumerate() {
                        denom += tc.multiplicity * x[ci] / (1.0 + x[ci] * y[cj]);
                    }
                    y[cj] = bc.degree / denom;
                }
            }
            SolverMethod::QuasiNewton => {
                for (ci, tc) in top_classes.iter().enumerate() {
                    let mut f = -tc.degree;
                    let mut df = 0.0;
                    for (cj, bc) in bottom_classes.iter().enumerate() {
                        let q = 1.0 + x[ci] * y[cj];
                        f += bc.multiplicity * x[ci] * y[cj] / q;
                        df += bc.multiplicity * y[cj] / (q * q);
                    }
                    if df > 0.0 {
                        x[ci] = (x[ci] - f / df).max(x[ci] * 1e-8);
                    }
                }
                for (cj, bc) in bottom_classes.iter().enumerate() {
                    let mut f = -bc.degree;
                    let mut df = 0.0;
                    for (ci, tc) in top_classes.iter().enumerate() {
                        let q = 1.0 + x[ci] * y[cj];
                        f += tc.multiplicity * x[ci] * y[cj] / q;
                        df += tc.multiplicity * x[ci] / (q * q);
                    }
                    if df > 0.0 {
                        y[cj] = (y[cj] - f / df).max(y[cj] * 1e-8);
                    }
                }
            }
        }
        iterations += 1;
        res = residual(&x, &y);
        if !res.is_finite() {
            return Err(BicmError::SolverDiverged {
                iterations,
                residual: res,
            });
        }
    }

    let mut top_out = BTreeMap::new();
    for (slot, &class) in top_slot_class.iter().enumerate() {
        top_out.insert(slot, x[class]);
    }
    let mut bottom_out = BTreeMap::new();
    for (slot, &class) in bottom_slot_class.iter().enumerate() {
        bottom_out.insert(slot, y[class]);
    }
    Ok((top_out, bottom_out, res, iterations))
}

struct DegreeClass {
    degree: f64,
    multiplicity: f64,
}

fn classes_of(degrees: &[f64], reduce: bool) -> (Vec<DegreeClass>, Vec<usize>) {
    if !reduce {
        let classes = degrees
            .iter()
            .map(|&d| DegreeClass {
                degree: d,
                multiplicity: 1.0,
            })
            .collect();
        return (classes, (0..degrees.len()).collect());
    }
    let mut by_degree: BTreeMap<u64, (f64, Vec<usize>)> = BTreeMap::new();
    for (slot, &d) in degrees.iter().enumerate() {
        let entry = by_degree.entry(d as u64).or_insert((d, Vec::new()));
        entry.1.push(slot);
    }
    let mut classes = Vec::with_capacity(by_degree.len());
    let mut slot_class = vec![0usize; degrees.len()];
    for (class_idx, (_, (degree, slots))) in by_degree.into_iter().enumerate() {
        for slot in &slots {
            slot_class[*slot] = class_idx;
        }
        classes.push(DegreeClass {
            degree,
            multiplicity: slots.len() as f64,
        });
    }
    (classes, slot_class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BipartiteGraph;

    fn seq(top: &[usize], bottom: &[usize]) -> DegreeSequence {
        DegreeSequence {
            top: top.to_vec(),
            bottom: bottom.to_vec(),
        }
    }

    fn labels(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn symmetric_2x2_gives_half_everywhere() {
        let model = fit(&seq(&[1, 1], &[1, 1]), &SolverConfig::default()).unwrap();
        for i in 0..2 {
            for a in 0..2 {
                assert!((model.link_probability(i, a).unwrap() - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn complete_graph_saturates() {
        let model = fit(&seq(&[3, 3, 3], &[3, 3, 3]), &SolverConfig::default()).unwrap();
        for i in 0..3 {
            for a in 0..3 {
                assert_eq!(model.link_probability(i, a).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn degree_zero_node_gets_zero_probability() {
        let model = fit(&seq(&[0, 1], &[1]), &SolverConfig::default()).unwrap();
        assert_eq!(model.link_probability(0, 0).unwrap(), 0.0);
        assert_eq!(model.link_probability(1, 0).unwrap(), 1.0);
    }

    #[test]
    fn constraints_hold_on_skewed_2x3() {
        let degrees = seq(&[3, 1], &[2, 1, 1]);
        let model = fit(&degrees, &SolverConfig::default()).unwrap();
        assert!(model.residual_against(&degrees) <= 1e-8);
        // top node 0 is saturated (degree equals opposite layer size)
        for a in 0..3 {
            assert_eq!(model.link_probability(0, a).unwrap(), 1.0);
        }
    }

    #[test]
    fn inconsistent_degree_sums_rejected() {
        assert!(matches!(
            fit(&seq(&[2, 1], &[1, 1]), &SolverConfig::default()),
            Err(BicmError::InvalidDegrees(3, 2))
        ));
    }

    #[test]
    fn degree_exceeding_layer_rejected() {
        assert!(matches!(
            fit(&seq(&[2, 2], &[3, 1]), &SolverConfig::default()),
            Err(BicmError::DegreeOutOfRange(3, 2))
        ));
    }

    #[test]
    fn quasi_newton_matches_fixed_point() {
        let degrees = seq(&[2, 2, 1], &[2, 2, 1]);
        let fp = fit(&degrees, &SolverConfig::default()).unwrap();
        let qn = fit(
            &degrees,
            &SolverConfig {
                method: SolverMethod::QuasiNewton,
                ..Default::default()
            },
        )
        .unwrap();
        for i in 0..3 {
            for a in 0..3 {
                let a1 = fp.link_probability(i, a).unwrap();
                let a2 = qn.link_probability(i, a).unwrap();
                assert!((a1 - a2).abs() < 1e-8, "{a1} vs {a2}");
            }
        }
    }

    #[test]
    fn degree_class_reduction_is_equivalent() {
        let degrees = seq(&[3, 3, 2, 1, 1], &[3, 3, 2, 1, 1]);
        let reduced = fit(&degrees, &SolverConfig::default()).unwrap();
        let full = fit(
            &degrees,
            &SolverConfig {
                use_degree_classes: false,
                ..Default::default()
            },
        )
        .unwrap();
        for i in 0..5 {
            for a in 0..5 {
                let p1 = reduced.link_probability(i, a).unwrap();
                let p2 = full.link_probability(i, a).unwrap();
                assert!((p1 - p2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sample_extremes() {
        let complete = fit(&seq(&[2, 2], &[2, 2]), &SolverConfig::default()).unwrap();
        let g = complete.sample_graph(7, &labels("a", 2), &labels("h", 2));
        assert_eq!(g.n_edges(), 4);

        let empty = fit(&seq(&[0, 0], &[0, 0]), &SolverConfig::default()).unwrap();
        let g = empty.sample_graph(7, &labels("a", 2), &labels("h", 2));
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let model = fit(&seq(&[1, 1], &[1, 1]), &SolverConfig::default()).unwrap();
        let g1 = model.sample_graph(99, &labels("a", 2), &labels("h", 2));
        let g2 = model.sample_graph(99, &labels("a", 2), &labels("h", 2));
        assert_eq!(g1, g2);
    }

    #[test]
    fn graph_log_probability_fair_coins() {
        let model = fit(&seq(&[1, 1], &[1, 1]), &SolverConfig::default()).unwrap();
        let g = BipartiteGraph::from_parts(labels("a", 2), labels("h", 2), vec![(0, 0), (1, 1)])
            .unwrap();
        let lp = model.graph_log_probability(&g).unwrap();
        assert!((lp - 4.0 * 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn graph_log_probability_certain_graph() {
        let model = fit(&seq(&[2, 2], &[2, 2]), &SolverConfig::default()).unwrap();
        let g = BipartiteGraph::from_parts(
            labels("a", 2),
            labels("h", 2),
            vec![(0, 0), (0, 1), (1, 0), (1, 1)],
        )
        .unwrap();
        assert_eq!(model.graph_log_probability(&g).unwrap(), 0.0);
        // a missing certain edge makes the graph impossible
        let g2 =
            BipartiteGraph::from_parts(labels("a", 2), labels("h", 2), vec![(0, 0), (0, 1), (1, 0)])
                .unwrap();
        assert_eq!(
            model.graph_log_probability(&g2).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn ensemble_probabilities_sum_to_one_2x2() {
        let model = fit(&seq(&[1, 1], &[1, 1]), &SolverConfig::default()).unwrap();
        let mut total = 0.0;
        for mask in 0u32..16 {
            let mut edges = Vec::new();
            for bit in 0..4 {
                if mask & (1 << bit) != 0 {
                    edges.push(((bit / 2) as u32, (bit % 2) as u32));
                }
            }
            let g = BipartiteGraph::from_parts(labels("a", 2), labels("h", 2), edges).unwrap();
            total += model.graph_log_probability(&g).unwrap().exp();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn persistence_round_trip_is_bit_identical() {
        let dir = std::env::temp_dir().join(format!("bicm_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let degrees = seq(&[3, 1], &[2, 1, 1]);
        let model = fit(&degrees, &SolverConfig::default()).unwrap();
        let path = dir.join("model.json");
        model.save(&path).unwrap();
        let reloaded = BicmModel::load(&path).unwrap();
        for i in 0..2 {
            for a in 0..3 {
                let p1 = model.link_probability(i, a).unwrap();
                let p2 = reloaded.link_probability(i, a).unwrap();
                assert_eq!(p1.to_bits(), p2.to_bits());
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn perturbing_multipliers_lowers_likelihood() {
        // local-maximum check of the likelihood at the fitted point
        let g = BipartiteGraph::build(&[
            ("a", "h1"),
            ("a", "h2"),
            ("b", "h2"),
            ("b", "h3"),
            ("c", "h3"),
        ])
        .unwrap();
        let degrees = g.degrees();
        let model = fit(&degrees, &SolverConfig::default()).unwrap();
        let base = model.graph_log_probability(&g).unwrap();
        for i in 0..model.n_top() {
            for factor in [0.99, 1.01] {
                let mut perturbed = model.clone();
                if let Multiplier::Finite(v) = perturbed.top[i] {
                    perturbed.top[i] = Multiplier::Finite(v * factor);
                    let lp = perturbed.graph_log_probability(&g).unwrap();
                    assert!(lp < base, "perturbation did not decrease likelihood");
                }
            }
        }
    }
}
