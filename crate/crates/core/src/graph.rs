//! Sparse binary bipartite graph between accounts (top layer) and hashtags
//! (bottom layer), with degree bookkeeping and degree-class reduction.
//!
//! The graph is immutable after construction. Both row-major and column-major
//! adjacency are kept so co-occurrence counting can iterate from either layer.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot build a graph from an empty record set")]
    EmptyGraph,
    #[error("empty label in record {0}")]
    EmptyLabel(usize),
    #[error("edge ({0}, {1}) out of bounds for layers of size {2}x{3}")]
    IndexOutOfBounds(u32, u32, usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("malformed edge-list line {0}: expected two delimited fields")]
    MalformedLine(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binary incidence structure between two node layers.
///
/// Labels are case-folded at construction time; duplicate incidence records
/// collapse to a single edge. Label order is lexicographic, so construction
/// is deterministic regardless of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    top_labels: Vec<String>,
    bottom_labels: Vec<String>,
    /// Sorted bottom-neighbour indices per top node.
    rows: Vec<Vec<u32>>,
    /// Sorted top-neighbour indices per bottom node.
    cols: Vec<Vec<u32>>,
    n_edges: usize,
}

/// Observed degrees of both layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
}

impl DegreeSequence {
    /// Both layer degree sums must equal the edge count.
    pub fn is_consistent(&self) -> bool {
        self.top.iter().sum::<usize>() == self.bottom.iter().sum::<usize>()
    }

    pub fn edge_count(&self) -> usize {
        self.top.iter().sum()
    }
}

/// Nodes grouped by degree. All members of a class share one Lagrange
/// multiplier in the BiCM solve, which shrinks the system considerably.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeClasses {
    pub top: BTreeMap<usize, Vec<usize>>,
    pub bottom: BTreeMap<usize, Vec<usize>>,
}

impl DegreeClasses {
    /// Expand the classes back into an explicit per-node degree sequence.
    pub fn to_degree_sequence(&self, n_top: usize, n_bottom: usize) -> DegreeSequence {
        let mut top = vec![0usize; n_top];
        let mut bottom = vec![0usize; n_bottom];
        for (&deg, members) in &self.top {
            for &i in members {
                top[i] = deg;
            }
        }
        for (&deg, members) in &self.bottom {
            for &a in members {
                bottom[a] = deg;
            }
        }
        DegreeSequence { top, bottom }
    }
}

fn group_by_degree(degrees: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &d) in degrees.iter().enumerate() {
        classes.entry(d).or_default().push(i);
    }
    classes
}

impl BipartiteGraph {
    /// Build a graph from raw (account, hashtag) incidence records.
    ///
    /// Labels are case-folded, duplicate records collapse to one edge and
    /// label order is lexicographic.
    pub fn build<S: AsRef<str>>(records: &[(S, S)]) -> Result<Self, GraphError> {
        if records.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut folded: Vec<(String, String)> = Vec::with_capacity(records.len());
        for (idx, (a, h)) in records.iter().enumerate() {
            let a = a.as_ref().trim().to_lowercase();
            let h = h.as_ref().trim().to_lowercase();
            if a.is_empty() || h.is_empty() {
                return Err(GraphError::EmptyLabel(idx));
            }
            folded.push((a, h));
        }
        let mut top_labels: Vec<String> = folded.iter().map(|(a, _)| a.clone()).collect();
        top_labels.sort();
        top_labels.dedup();
        let mut bottom_labels: Vec<String> = folded.iter().map(|(_, h)| h.clone()).collect();
        bottom_labels.sort();
        bottom_labels.dedup();

        let top_index = |label: &str| top_labels.binary_search_by(|l| l.as_str().cmp(label)).unwrap() as u32;
        let bottom_index =
            |label: &str| bottom_labels.binary_search_by(|l| l.as_str().cmp(label)).unwrap() as u32;

        let mut edges: Vec<(u32, u32)> = folded
            .iter()
            .map(|(a, h)| (top_index(a), bottom_index(h)))
            .collect();
        edges.sort_unstable();
        edges.dedup();

        Self::from_indexed(top_labels, bottom_labels, edges)
    }

    /// Assemble a graph from explicit layers and index pairs.
    ///
    /// Unlike [`BipartiteGraph::build`] this keeps isolated nodes, which is
    /// what ensemble sampling needs; labels are assumed already canonical.
    pub fn from_parts(
        top_labels: Vec<String>,
        bottom_labels: Vec<String>,
        mut edges: Vec<(u32, u32)>,
    ) -> Result<Self, GraphError> {
        if top_labels.is_empty() || bottom_labels.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        Self::from_indexed(top_labels, bottom_labels, edges)
    }

    fn from_indexed(
        top_labels: Vec<String>,
        bottom_labels: Vec<String>,
        edges: Vec<(u32, u32)>,
    ) -> Result<Self, GraphError> {
        let n_top = top_labels.len();
        let n_bottom = bottom_labels.len();
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n_top];
        let mut cols: Vec<Vec<u32>> = vec![Vec::new(); n_bottom];
        for &(i, a) in &edges {
            if i as usize >= n_top || a as usize >= n_bottom {
                return Err(GraphError::IndexOutOfBounds(i, a, n_top, n_bottom));
            }
            rows[i as usize].push(a);
            cols[a as usize].push(i);
        }
        // edges arrive sorted, so rows are sorted already; cols need it
        for col in &mut cols {
            col.sort_unstable();
        }
        Ok(Self {
            top_labels,
            bottom_labels,
            rows,
            cols,
            n_edges: edges.len(),
        })
    }

    pub fn n_top(&self) -> usize {
        self.top_labels.len()
    }

    pub fn n_bottom(&self) -> usize {
        self.bottom_labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn top_labels(&self) -> &[String] {
        &self.top_labels
    }

    pub fn bottom_labels(&self) -> &[String] {
        &self.bottom_labels
    }

    pub fn top_neighbors(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn bottom_neighbors(&self, a: usize) -> &[u32] {
        &self.cols[a]
    }

    pub fn has_edge(&self, i: usize, a: usize) -> bool {
        self.rows[i].binary_search(&(a as u32)).is_ok()
    }

    /// Degree-0 nodes are retained in the graph but must be excluded from
    /// the solver; this flags them for that purpose.
    pub fn is_isolated_top(&self, i: usize) -> bool {
        self.rows[i].is_empty()
    }

    pub fn is_isolated_bottom(&self, a: usize) -> bool {
        self.cols[a].is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&a| (i as u32, a)))
    }

    pub fn degrees(&self) -> DegreeSequence {
        DegreeSequence {
            top: self.rows.iter().map(Vec::len).collect(),
            bottom: self.cols.iter().map(Vec::len).collect(),
        }
    }

    /// Group nodes of equal degree, per layer.
    pub fn reduce_by_degree(&self) -> DegreeClasses {
        let degrees = self.degrees();
        DegreeClasses {
            top: group_by_degree(&degrees.top),
            bottom: group_by_degree(&degrees.bottom),
        }
    }

    /// Import a two-column delimited edge list (account, hashtag), one edge
    /// per line. Tab and comma are both accepted as delimiters.
    pub fn read_edge_list(path: &Path) -> Result<Self, GraphError> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut records: Vec<(String, String)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ['\t', ',']);
            let account = parts.next().unwrap_or("").trim();
            let hashtag = parts.next().unwrap_or("").trim();
            if account.is_empty() || hashtag.is_empty() {
                return Err(GraphError::MalformedLine(lineno + 1));
            }
            records.push((account.to_string(), hashtag.to_string()));
        }
        Self::build(&records)
    }

    /// Export the edge list as tab-delimited UTF-8 text, one edge per line,
    /// in deterministic (top, bottom) order.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<(), GraphError> {
        for (i, a) in self.edges() {
            writeln!(
                out,
                "{}\t{}",
                self.top_labels[i as usize], self.bottom_labels[a as usize]
            )?;
        }
        Ok(())
    }
}
