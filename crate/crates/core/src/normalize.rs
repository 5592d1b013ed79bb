//! Collapses typo and variant hashtags into canonical forms.
//!
//! Two hashtags are merged when their digit-stripped forms are close under a
//! relative edit distance and at least one of them is a recognised dictionary
//! word (so random acronym matches are not merged). Merge clusters are the
//! connected components of this relation; the canonical spelling is the most
//! frequent member of each cluster.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("edit distance requires non-empty operands")]
    InvalidInput,
    #[error("relative threshold must lie strictly between 0 and 1, got {0}")]
    InvalidThreshold(f64),
    #[error("failed to read wordlist {path}: {source}")]
    Wordlist {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    /// Two hashtags are merge candidates when their relative edit distance
    /// is strictly below this value.
    pub relative_threshold: f64,
    /// Dictionary words (Italian + English in the reference setup), already
    /// case-folded. A pair is only compared when at least one side is a
    /// recognised word, or both sides coincide after digit stripping.
    pub wordlists: HashSet<String>,
    /// Drop decimal digits before comparing, so date/anniversary variants of
    /// the same tag coincide.
    pub enable_digit_strip: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            relative_threshold: 0.20,
            wordlists: HashSet::new(),
            enable_digit_strip: true,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<(), NormalizeError> {
        if !(self.relative_threshold > 0.0 && self.relative_threshold < 1.0) {
            return Err(NormalizeError::InvalidThreshold(self.relative_threshold));
        }
        Ok(())
    }

    /// Load wordlists from plain UTF-8 files, one word per line.
    pub fn load_wordlists(&mut self, paths: &[impl AsRef<Path>]) -> Result<(), NormalizeError> {
        for path in paths {
            let path = path.as_ref();
            let text = std::fs::read_to_string(path).map_err(|source| NormalizeError::Wordlist {
                path: path.display().to_string(),
                source,
            })?;
            for line in text.lines() {
                let word = line.trim().to_lowercase();
                if !word.is_empty() {
                    self.wordlists.insert(word);
                }
            }
        }
        Ok(())
    }
}

/// Mapping from raw hashtags to their canonical spellings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeMap {
    canonical: HashMap<String, String>,
    clusters: BTreeMap<String, BTreeSet<String>>,
}

impl MergeMap {
    /// Canonical spelling for a hashtag; hashtags outside the corpus map to
    /// themselves.
    pub fn canonical<'a>(&'a self, raw: &'a str) -> &'a str {
        self.canonical.get(raw).map(String::as_str).unwrap_or(raw)
    }

    pub fn clusters(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    /// Export all proposed merges for human review: CSV of
    /// (raw, canonical, distance). Replaces the manual post-check step.
    pub fn write_review<W: Write>(&self, out: W) -> Result<(), NormalizeError> {
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record(["raw", "canonical", "distance"])
            .map_err(|e| NormalizeError::Io(std::io::Error::other(e)))?;
        for (canonical, members) in &self.clusters {
            for raw in members {
                if raw == canonical {
                    continue;
                }
                let d = relative_edit_distance(strip_digits(raw).as_str(), strip_digits(canonical).as_str())
                    .unwrap_or(0.0);
                writer
                    .write_record([raw.as_str(), canonical.as_str(), &format!("{d:.6}")])
                    .map_err(|e| NormalizeError::Io(std::io::Error::other(e)))?;
            }
        }
        writer
            .flush()
            .map_err(NormalizeError::Io)?;
        Ok(())
    }
}

/// Remove all decimal digits; the result may be empty (all-digit hashtags).
pub fn strip_digits(h: &str) -> String {
    h.chars().filter(|c| !c.is_ascii_digit()).collect()
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the longer operand's character length;
/// symmetric, zero iff the operands are equal.
pub fn relative_edit_distance(a: &str, b: &str) -> Result<f64, NormalizeError> {
    if a.is_empty() || b.is_empty() {
        return Err(NormalizeError::InvalidInput);
    }
    let max_len = a.chars().count().max(b.chars().count());
    Ok(levenshtein(a, b) as f64 / max_len as f64)
}

/// Decide whether two hashtags refer to the same subject.
pub fn is_mergeable(a: &str, b: &str, cfg: &NormalizationConfig) -> bool {
    let (sa, sb) = if cfg.enable_digit_strip {
        (strip_digits(a), strip_digits(b))
    } else {
        (a.to_string(), b.to_string())
    };
    if sa.is_empty() || sb.is_empty() {
        return false;
    }
    if sa == sb {
        return true;
    }
    // acronym exemption: unless one side is a recognised word the match is
    // treated as coincidental
    let recognised = cfg.wordlists.contains(&sa) || cfg.wordlists.contains(&sb);
    if !recognised {
        return false;
    }
    match relative_edit_distance(&sa, &sb) {
        Ok(d) => d < cfg.relative_threshold,
        Err(_) => false,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.parent[ri.max(rj)] = ri.min(rj);
        }
    }
}

/// Build the merge map for a corpus of hashtags with occurrence counts.
///
/// Clusters are connected components under [`is_mergeable`]; the canonical
/// representative is the most frequent member, ties broken by the
/// lexicographically smallest spelling.
pub fn build_merge_map(
    counts: &HashMap<String, u64>,
    cfg: &NormalizationConfig,
) -> Result<MergeMap, NormalizeError> {
    cfg.validate()?;
    let mut hashtags: Vec<&String> = counts.keys().collect();
    hashtags.sort();
    let stripped: Vec<String> = hashtags
        .iter()
        .map(|h| {
            if cfg.enable_digit_strip {
                strip_digits(h)
            } else {
                (*h).clone()
            }
        })
        .collect();
    let lens: Vec<usize> = stripped.iter().map(|s| s.chars().count()).collect();

    let mut uf = UnionFind::new(hashtags.len());
    for i in 0..hashtags.len() {
        for j in (i + 1)..hashtags.len() {
            // a length difference alone already exceeding the threshold
            // makes the pair impossible to merge
            let max_len = lens[i].max(lens[j]);
            if max_len == 0 {
                continue;
            }
            let diff = lens[i].abs_diff(lens[j]);
            if diff as f64 / max_len as f64 >= cfg.relative_threshold && stripped[i] != stripped[j] {
                continue;
            }
            if is_mergeable(hashtags[i], hashtags[j], cfg) {
                uf.union(i, j);
            }
        }
    }

    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..hashtags.len() {
        components.entry(uf.find(i)).or_default().push(i);
    }

    let mut map = MergeMap::default();
    for members in components.values() {
        let canonical = members
            .iter()
            .map(|&i| hashtags[i])
            .max_by(|a, b| {
                counts[*a]
                    .cmp(&counts[*b])
                    .then_with(|| b.cmp(a)) // ties: lexicographically smallest wins
            })
            .unwrap()
            .clone();
        let cluster: BTreeSet<String> = members.iter().map(|&i| hashtags[i].clone()).collect();
        for raw in &cluster {
            map.canonical.insert(raw.clone(), canonical.clone());
        }
        map.clusters.insert(canonical, cluster);
    }
    Ok(map)
}
