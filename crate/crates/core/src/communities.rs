//! Louvain modularity optimisation on the validated projection.
//!
//! Classic two-phase Louvain: local moves until no gain, then aggregation of
//! communities into super-nodes, repeated until a full pass yields zero
//! moves. Node visit order is shuffled by the seed each pass, which makes
//! runs deterministic under a fixed seed. Resolution is fixed at one.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("cannot detect communities on an empty graph")]
    EmptyGraph,
    #[error("node {0} has no community assignment")]
    InvalidPartition(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Simple undirected unweighted graph with labelled nodes.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    labels: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    n_edges: usize,
}

impl UndirectedGraph {
    /// Build from labels and undirected edges; self-loops and duplicate
    /// edges are ignored.
    pub fn new(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, CommunityError> {
        if labels.is_empty() {
            return Err(CommunityError::EmptyGraph);
        }
        let n = labels.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut seen: Vec<(usize, usize)> = edges
            .iter()
            .filter(|&&(u, v)| u != v && u < n && v < n)
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        seen.sort_unstable();
        seen.dedup();
        for &(u, v) in &seen {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for neighbors in &mut adjacency {
            neighbors.sort_unstable();
        }
        Ok(Self {
            labels,
            adjacency,
            n_edges: seen.len(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }
}

/// Node-to-community assignment with its modularity score.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition {
    /// Community ids, dense from zero, indexed by node.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub seed: u64,
    /// Modularity after each aggregation pass; non-decreasing.
    pub pass_modularities: Vec<f64>,
}

impl CommunityPartition {
    pub fn n_communities(&self) -> usize {
        self.assignment.iter().max().map_or(0, |&m| m + 1)
    }

    /// Members per community id.
    pub fn communities(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (node, &c) in self.assignment.iter().enumerate() {
            map.entry(c).or_default().push(node);
        }
        map
    }

    /// CSV export: (node_label, community_id).
    pub fn write_csv<W: Write>(&self, labels: &[String], out: W) -> Result<(), CommunityError> {
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record(["node_label", "community_id"])
            .map_err(std::io::Error::other)?;
        for (node, &c) in self.assignment.iter().enumerate() {
            writer
                .write_record([labels[node].as_str(), &c.to_string()])
                .map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Newman-Girvan modularity of a total assignment on an undirected
/// unweighted graph: `Q = sum_c [ e_c/E - (d_c/2E)^2 ]`.
pub fn modularity(g: &UndirectedGraph, assignment: &[usize]) -> Result<f64, CommunityError> {
    if assignment.len() < g.n_nodes() {
        return Err(CommunityError::InvalidPartition(assignment.len()));
    }
    if g.n_edges() == 0 {
        return Ok(0.0);
    }
    let n_comm = assignment.iter().max().unwrap() + 1;
    let mut internal = vec![0.0f64; n_comm]; // e_c
    let mut degree_sum = vec![0.0f64; n_comm]; // d_c
    for u in 0..g.n_nodes() {
        degree_sum[assignment[u]] += g.degree(u) as f64;
        for &v in g.neighbors(u) {
            if v > u && assignment[u] == assignment[v] {
                internal[assignment[u]] += 1.0;
            }
        }
    }
    let e = g.n_edges() as f64;
    let q = (0..n_comm)
        .map(|c| internal[c] / e - (degree_sum[c] / (2.0 * e)).powi(2))
        .sum();
    Ok(q)
}

// Weighted multigraph used for the aggregation phase.
struct LevelGraph {
    // neighbor -> weight per node; self-loop weight counts internal edges
    // twice, matching the 2E normalisation
    adjacency: Vec<BTreeMap<usize, f64>>,
    self_loops: Vec<f64>,
    total_weight: f64, // 2E
}

impl LevelGraph {
    fn weighted_degree(&self, u: usize) -> f64 {
        self.adjacency[u].values().sum::<f64>() + self.self_loops[u]
    }
}

/// Louvain community detection.
///
/// Each local-move pass never decreases modularity; isolated nodes end up in
/// singleton communities.
pub fn louvain(g: &UndirectedGraph, seed: u64) -> Result<CommunityPartition, CommunityError> {
    if g.n_nodes() == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut level = LevelGraph {
        adjacency: (0..g.n_nodes())
            .map(|u| g.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
            .collect(),
        self_loops: vec![0.0; g.n_nodes()],
        total_weight: 2.0 * g.n_edges() as f64,
    };
    // node -> community of the original graph, refined level by level
    let mut membership: Vec<usize> = (0..g.n_nodes()).collect();
    let mut pass_modularities = Vec::new();

    loop {
        let n = level.adjacency.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut community_degree: Vec<f64> = (0..n).map(|u| level.weighted_degree(u)).collect();
        let two_e = level.total_weight;

        let mut moved_any = false;
        if two_e > 0.0 {
            let mut order: Vec<usize> = (0..n).collect();
            loop {
                let mut moves = 0usize;
                order.shuffle(&mut rng);
                for &u in &order {
                    let current = community[u];
                    let k_u = level.weighted_degree(u);
                    community_degree[current] -= k_u;

                    // weight from u to each adjacent community
                    let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                    links.insert(current, 0.0);
                    for (&v, &w) in &level.adjacency[u] {
                        *links.entry(community[v]).or_insert(0.0) += w;
                    }

                    let mut best = current;
                    let mut best_gain = links[&current] - community_degree[current] * k_u / two_e;
                    for (&c, &w) in &links {
                        if c == current {
                            continue;
                        }
                        let gain = w - community_degree[c] * k_u / two_e;
                        if gain > best_gain + 1e-12 {
                            best = c;
                            best_gain = gain;
                        }
                    }
                    community_degree[best] += k_u;
                    if best != current {
                        community[u] = best;
                        moves += 1;
                    }
                }
                if moves == 0 {
                    break;
                }
                moved_any = true;
            }
        }

        // renumber communities densely
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &community {
            let next = remap.len();
            remap.entry(c).or_insert(next);
        }
        let community: Vec<usize> = community.iter().map(|&c| remap[&c]).collect();
        let n_comm = remap.len();

        for m in &mut membership {
            *m = community[*m];
        }
        pass_modularities.push(membership_modularity(g, &membership));

        if !moved_any || n_comm == n {
            let assignment = densify(&membership);
            let q = modularity(g, &assignment)?;
            return Ok(CommunityPartition {
                assignment,
                modularity: q,
                seed,
                pass_modularities,
            });
        }

        // aggregation: communities become super-nodes
        let mut adjacency: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n_comm];
        let mut self_loops = vec![0.0f64; n_comm];
        for u in 0..n {
            let cu = community[u];
            self_loops[cu] += level.self_loops[u];
            for (&v, &w) in &level.adjacency[u] {
                let cv = community[v];
                if cu == cv {
                    self_loops[cu] += w; // both endpoints visited: counts twice
                } else {
                    *adjacency[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        level = LevelGraph {
            adjacency,
            self_loops,
            total_weight: level.total_weight,
        };
    }
}

fn membership_modularity(g: &UndirectedGraph, membership: &[usize]) -> f64 {
    modularity(g, &densify(membership)).unwrap_or(0.0)
}

fn densify(membership: &[usize]) -> Vec<usize> {
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in membership {
        let next = remap.len();
        remap.entry(c).or_insert(next);
    }
    membership.iter().map(|&c| remap[&c]).collect()
}
