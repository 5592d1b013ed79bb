//! CSR (corporate social responsibility) tagging and community-level tables.
//!
//! Hashtags are matched against a keyword lexicon split into the three
//! triple-bottom-line dimensions (environmental, social, economic). Matching
//! happens after hashtag normalisation, so spelling variants hit the lexicon
//! through their canonical form.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsrError {
    #[error("account {0} missing from the community partition")]
    InvalidPartition(String),
    #[error("lexicon line {0}: unknown dimension {1:?}")]
    UnknownDimension(usize, String),
    #[error("lexicon keyword {0:?} mapped to more than one dimension")]
    ConflictingKeyword(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsrDimension {
    Environmental,
    Social,
    Economic,
}

pub const DIMENSIONS: [CsrDimension; 3] = [
    CsrDimension::Environmental,
    CsrDimension::Social,
    CsrDimension::Economic,
];

impl CsrDimension {
    pub fn label(self) -> &'static str {
        match self {
            CsrDimension::Environmental => "environmental",
            CsrDimension::Social => "social",
            CsrDimension::Economic => "economic",
        }
    }

    fn index(self) -> usize {
        match self {
            CsrDimension::Environmental => 0,
            CsrDimension::Social => 1,
            CsrDimension::Economic => 2,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_lowercase().as_str() {
            "environmental" | "env" => Some(CsrDimension::Environmental),
            "social" | "soc" => Some(CsrDimension::Social),
            "economic" | "econ" => Some(CsrDimension::Economic),
            _ => None,
        }
    }
}

/// Keyword-to-dimension map; each keyword belongs to exactly one dimension
/// and lookup is case-folded exact match on normalised hashtags.
#[derive(Debug, Clone, Default)]
pub struct CsrLexicon {
    entries: HashMap<String, CsrDimension>,
}

impl CsrLexicon {
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, CsrDimension)>,
    ) -> Result<Self, CsrError> {
        let mut map = HashMap::new();
        for (keyword, dim) in entries {
            let keyword = keyword.trim().to_lowercase();
            if let Some(&existing) = map.get(&keyword) {
                if existing != dim {
                    return Err(CsrError::ConflictingKeyword(keyword));
                }
                continue;
            }
            map.insert(keyword, dim);
        }
        Ok(Self { entries: map })
    }

    /// Load from CSV (keyword, dimension) with a header row.
    pub fn load(path: &Path) -> Result<Self, CsrError> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let (keyword, dim_str) = line.split_once(',').unwrap_or((line, ""));
            let dim = CsrDimension::parse(dim_str)
                .ok_or_else(|| CsrError::UnknownDimension(lineno + 1, dim_str.to_string()))?;
            entries.push((keyword.to_string(), dim));
        }
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact case-folded lookup; `None` when the hashtag is not CSR-related.
    pub fn tag(&self, hashtag: &str) -> Option<CsrDimension> {
        self.entries.get(&hashtag.to_lowercase()).copied()
    }
}

/// Account-level counts per community: how many
/// accounts used at least one hashtag of each dimension.
#[derive(Debug, Clone, Serialize)]
pub struct CommunityAccountStats {
    pub community: usize,
    pub account_count: usize,
    pub accounts_using_csr: usize,
    pub per_dimension: [usize; 3],
}

/// Occurrence-level shares per community, both
/// occurrence-weighted and distinct-hashtag fractions.
#[derive(Debug, Clone, Serialize)]
pub struct CommunityOccurrenceStats {
    pub community: usize,
    pub occurrences_total: u64,
    pub distinct_total: usize,
    /// Percent of hashtag occurrences per dimension.
    pub occurrence_pct: [f64; 3],
    /// Percent of distinct hashtags per dimension.
    pub distinct_pct: [f64; 3],
    pub empty: bool,
}

/// Engagement means per dimension.
#[derive(Debug, Clone, Copy, Serialize, Default)]
pub struct EngagementCell {
    pub mean_likes: f64,
    pub mean_retweets: f64,
    pub n_messages: usize,
    /// True when no message qualified; the means are zero by convention.
    pub empty: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommunityEngagement {
    pub community: Option<usize>, // None = whole validated network
    pub per_dimension: [EngagementCell; 3],
    /// Baseline over every message with at least one hashtag.
    pub all_hashtags: EngagementCell,
}

/// A message reduced to what engagement accounting needs. Hashtags must
/// already be canonical.
#[derive(Debug, Clone)]
pub struct EngagementMessage {
    pub account_id: String,
    pub hashtags: Vec<String>,
    pub like_count: u64,
    pub retweet_count: u64,
}

/// Per-account hashtag usage with repetition counts, hashtags canonical.
pub type AccountUsage = HashMap<String, HashMap<String, u64>>;

/// Account-level CSR counts per community. An account counts for a
/// dimension if it used at least one hashtag of that dimension.
pub fn community_csr_accounts(
    partition: &HashMap<String, usize>,
    usage: &AccountUsage,
    lexicon: &CsrLexicon,
) -> Result<Vec<CommunityAccountStats>, CsrError> {
    let mut by_community: BTreeMap<usize, Vec<&String>> = BTreeMap::new();
    for account in usage.keys() {
        let &community = partition
            .get(account)
            .ok_or_else(|| CsrError::InvalidPartition(account.clone()))?;
        by_community.entry(community).or_default().push(account);
    }
    // communities with no usage entries still get a row
    for &community in partition.values() {
        by_community.entry(community).or_default();
    }

    let mut stats = Vec::new();
    for (community, mut accounts) in by_community {
        accounts.sort();
        let account_count = partition.values().filter(|&&c| c == community).count();
        let mut using_csr = 0usize;
        let mut per_dimension = [0usize; 3];
        for account in accounts {
            let mut hit = [false; 3];
            for hashtag in usage[account].keys() {
                if let Some(dim) = lexicon.tag(hashtag) {
                    hit[dim.index()] = true;
                }
            }
            if hit.iter().any(|&h| h) {
                using_csr += 1;
            }
            for (d, &h) in hit.iter().enumerate() {
                if h {
                    per_dimension[d] += 1;
                }
            }
        }
        stats.push(CommunityAccountStats {
            community,
            account_count,
            accounts_using_csr: using_csr,
            per_dimension,
        });
    }
    Ok(stats)
}

fn occurrence_stats_for(
    counts: &HashMap<&String, u64>,
    lexicon: &CsrLexicon,
    community: usize,
) -> CommunityOccurrenceStats {
    let occurrences_total: u64 = counts.values().sum();
    let distinct_total = counts.len();
    let mut occ = [0u64; 3];
    let mut distinct = [0usize; 3];
    for (hashtag, &n) in counts {
        if let Some(dim) = lexicon.tag(hashtag) {
            occ[dim.index()] += n;
            distinct[dim.index()] += 1;
        }
    }
    let pct = |num: f64, den: f64| if den > 0.0 { 100.0 * num / den } else { 0.0 };
    CommunityOccurrenceStats {
        community,
        occurrences_total,
        distinct_total,
        occurrence_pct: [
            pct(occ[0] as f64, occurrences_total as f64),
            pct(occ[1] as f64, occurrences_total as f64),
            pct(occ[2] as f64, occurrences_total as f64),
        ],
        distinct_pct: [
            pct(distinct[0] as f64, distinct_total as f64),
            pct(distinct[1] as f64, distinct_total as f64),
            pct(distinct[2] as f64, distinct_total as f64),
        ],
        empty: occurrences_total == 0,
    }
}

/// Occurrence- and distinct-level CSR shares, per community plus a
/// network-wide aggregate returned as the first tuple element.
pub fn community_csr_occurrences(
    partition: &HashMap<String, usize>,
    usage: &AccountUsage,
    lexicon: &CsrLexicon,
) -> Result<(CommunityOccurrenceStats, Vec<CommunityOccurrenceStats>), CsrError> {
    let mut network: HashMap<&String, u64> = HashMap::new();
    let mut per_community: BTreeMap<usize, HashMap<&String, u64>> = BTreeMap::new();
    for &community in partition.values() {
        per_community.entry(community).or_default();
    }
    for (account, counts) in usage {
        let &community = partition
            .get(account)
            .ok_or_else(|| CsrError::InvalidPartition(account.clone()))?;
        let bucket = per_community.entry(community).or_default();
        for (hashtag, &n) in counts {
            *network.entry(hashtag).or_insert(0) += n;
            *bucket.entry(hashtag).or_insert(0) += n;
        }
    }
    let network_stats = occurrence_stats_for(&network, lexicon, usize::MAX);
    let community_stats = per_community
        .into_iter()
        .map(|(community, counts)| occurrence_stats_for(&counts, lexicon, community))
        .collect();
    Ok((network_stats, community_stats))
}

fn engagement_for<'a>(
    messages: impl Iterator<Item = &'a EngagementMessage>,
    lexicon: &CsrLexicon,
    community: Option<usize>,
) -> CommunityEngagement {
    let mut likes = [0u64; 3];
    let mut retweets = [0u64; 3];
    let mut counts = [0usize; 3];
    let mut base_likes = 0u64;
    let mut base_retweets = 0u64;
    let mut base_count = 0usize;
    for message in messages {
        if message.hashtags.is_empty() {
            continue;
        }
        base_likes += message.like_count;
        base_retweets += message.retweet_count;
        base_count += 1;
        let mut hit = [false; 3];
        for hashtag in &message.hashtags {
            if let Some(dim) = lexicon.tag(hashtag) {
                hit[dim.index()] = true;
            }
        }
        // a message with hashtags from several dimensions counts once in each
        for d in 0..3 {
            if hit[d] {
                likes[d] += message.like_count;
                retweets[d] += message.retweet_count;
                counts[d] += 1;
            }
        }
    }
    let cell = |likes: u64, retweets: u64, n: usize| EngagementCell {
        mean_likes: if n > 0 { likes as f64 / n as f64 } else { 0.0 },
        mean_retweets: if n > 0 { retweets as f64 / n as f64 } else { 0.0 },
        n_messages: n,
        empty: n == 0,
    };
    CommunityEngagement {
        community,
        per_dimension: [
            cell(likes[0], retweets[0], counts[0]),
            cell(likes[1], retweets[1], counts[1]),
            cell(likes[2], retweets[2], counts[2]),
        ],
        all_hashtags: cell(base_likes, base_retweets, base_count),
    }
}

/// Average likes and retweets per message containing a dimension hashtag,
/// per community and network wide.
pub fn engagement(
    messages: &[EngagementMessage],
    partition: &HashMap<String, usize>,
    lexicon: &CsrLexicon,
) -> Result<(CommunityEngagement, Vec<CommunityEngagement>), CsrError> {
    for message in messages {
        if !partition.contains_key(&message.account_id) {
            return Err(CsrError::InvalidPartition(message.account_id.clone()));
        }
    }
    let network = engagement_for(messages.iter(), lexicon, None);
    let mut ids: Vec<usize> = partition.values().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let per_community = ids
        .into_iter()
        .map(|community| {
            engagement_for(
                messages
                    .iter()
                    .filter(|m| partition[&m.account_id] == community),
                lexicon,
                Some(community),
            )
        })
        .collect();
    Ok((network, per_community))
}

pub fn write_account_table<W: Write>(
    stats: &[CommunityAccountStats],
    out: W,
) -> Result<(), CsrError> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["community", "accounts", "csr_total", "env", "soc", "econ"])
        .map_err(std::io::Error::other)?;
    for s in stats {
        writer
            .write_record([
                s.community.to_string(),
                s.account_count.to_string(),
                s.accounts_using_csr.to_string(),
                s.per_dimension[0].to_string(),
                s.per_dimension[1].to_string(),
                s.per_dimension[2].to_string(),
            ])
            .map_err(std::io::Error::other)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_occurrence_table<W: Write>(
    network: &CommunityOccurrenceStats,
    stats: &[CommunityOccurrenceStats],
    out: W,
) -> Result<(), CsrError> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record([
            "community",
            "hashtag_occurrences",
            "distinct_hashtags",
            "env_occurrence_pct",
            "soc_occurrence_pct",
            "econ_occurrence_pct",
            "env_distinct_pct",
            "soc_distinct_pct",
            "econ_distinct_pct",
        ])
        .map_err(std::io::Error::other)?;
    let mut write_row = |label: String, s: &CommunityOccurrenceStats| {
        writer
            .write_record([
                label,
                s.occurrences_total.to_string(),
                s.distinct_total.to_string(),
                format!("{:.4}", s.occurrence_pct[0]),
                format!("{:.4}", s.occurrence_pct[1]),
                format!("{:.4}", s.occurrence_pct[2]),
                format!("{:.4}", s.distinct_pct[0]),
                format!("{:.4}", s.distinct_pct[1]),
                format!("{:.4}", s.distinct_pct[2]),
            ])
            .map_err(std::io::Error::other)
    };
    write_row("validated_network".to_string(), network)?;
    for s in stats {
        write_row(s.community.to_string(), s)?;
    }
    Ok(())
}

pub fn write_engagement_table<W: Write>(
    network: &CommunityEngagement,
    stats: &[CommunityEngagement],
    out: W,
) -> Result<(), CsrError> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record([
            "community",
            "env_likes",
            "soc_likes",
            "econ_likes",
            "env_retweets",
            "soc_retweets",
            "econ_retweets",
            "all_likes",
            "all_retweets",
        ])
        .map_err(std::io::Error::other)?;
    let mut write_row = |label: String, e: &CommunityEngagement| {
        writer
            .write_record([
                label,
                format!("{:.4}", e.per_dimension[0].mean_likes),
                format!("{:.4}", e.per_dimension[1].mean_likes),
                format!("{:.4}", e.per_dimension[2].mean_likes),
                format!("{:.4}", e.per_dimension[0].mean_retweets),
                format!("{:.4}", e.per_dimension[1].mean_retweets),
                format!("{:.4}", e.per_dimension[2].mean_retweets),
                format!("{:.4}", e.all_hashtags.mean_likes),
                format!("{:.4}", e.all_hashtags.mean_retweets),
            ])
            .map_err(std::io::Error::other)
    };
    write_row("validated_network".to_string(), network)?;
    for e in stats {
        let label = e
            .community
            .map(|c| c.to_string())
            .unwrap_or_else(|| "validated_network".to_string());
        write_row(label, e)?;
    }
    Ok(())
}

/// Sanity check used by tests and the pipeline: occurrence shares over
/// {env, soc, econ, untagged} must cover everything.
pub fn occurrence_shares_cover(stats: &CommunityOccurrenceStats) -> bool {
    if stats.empty {
        return true;
    }
    let tagged: f64 = stats.occurrence_pct.iter().sum();
    (0.0..=100.0 + 1e-9).contains(&tagged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> CsrLexicon {
        CsrLexicon::from_entries([
            ("sostenibilità".to_string(), CsrDimension::Environmental),
            ("energia".to_string(), CsrDimension::Environmental),
            ("formazione".to_string(), CsrDimension::Social),
            ("diversity".to_string(), CsrDimension::Social),
            ("csr".to_string(), CsrDimension::Economic),
        ])
        .unwrap()
    }

    fn usage_of(entries: &[(&str, &[(&str, u64)])]) -> AccountUsage {
        entries
            .iter()
            .map(|(account, tags)| {
                (
                    account.to_string(),
                    tags.iter().map(|(h, n)| (h.to_string(), *n)).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn tag_lookup() {
        let lex = lexicon();
        assert_eq!(lex.tag("sostenibilità"), Some(CsrDimension::Environmental));
        assert_eq!(lex.tag("formazione"), Some(CsrDimension::Social));
        assert_eq!(lex.tag("covid"), None);
        // case-folded
        assert_eq!(lex.tag("CSR"), Some(CsrDimension::Economic));
    }

    #[test]
    fn conflicting_keyword_rejected() {
        let result = CsrLexicon::from_entries([
            ("energia".to_string(), CsrDimension::Environmental),
            ("energia".to_string(), CsrDimension::Social),
        ]);
        assert!(matches!(result, Err(CsrError::ConflictingKeyword(_))));
    }

    #[test]
    fn every_account_using_env_counts() {
        let lex = lexicon();
        let partition: HashMap<String, usize> =
            [("a".into(), 0), ("b".into(), 0), ("c".into(), 0)].into();
        let usage = usage_of(&[
            ("a", &[("sostenibilità", 3)]),
            ("b", &[("energia", 1), ("covid", 5)]),
            ("c", &[("sostenibilità", 1)]),
        ]);
        let stats = community_csr_accounts(&partition, &usage, &lex).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].account_count, 3);
        assert_eq!(stats[0].accounts_using_csr, 3);
        assert_eq!(stats[0].per_dimension, [3, 0, 0]);
    }

    #[test]
    fn community_without_lexicon_hits_is_all_zeros() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0), ("b".into(), 0)].into();
        let usage = usage_of(&[("a", &[("covid", 3)]), ("b", &[("lavoro", 1)])]);
        let stats = community_csr_accounts(&partition, &usage, &lex).unwrap();
        assert_eq!(stats[0].accounts_using_csr, 0);
        assert_eq!(stats[0].per_dimension, [0, 0, 0]);
    }

    #[test]
    fn hand_tallied_three_account_fixture() {
        let lex = lexicon();
        let partition: HashMap<String, usize> =
            [("a".into(), 0), ("b".into(), 0), ("c".into(), 1)].into();
        let usage = usage_of(&[
            ("a", &[("sostenibilità", 2), ("formazione", 1)]),
            ("b", &[("csr", 1)]),
            ("c", &[("diversity", 4), ("covid", 2)]),
        ]);
        let stats = community_csr_accounts(&partition, &usage, &lex).unwrap();
        // community 0: a -> env+soc, b -> econ
        assert_eq!(stats[0].per_dimension, [1, 1, 1]);
        assert_eq!(stats[0].accounts_using_csr, 2);
        // community 1: c -> soc
        assert_eq!(stats[1].per_dimension, [0, 1, 0]);
    }

    #[test]
    fn missing_account_in_partition_is_an_error() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        let usage = usage_of(&[("ghost", &[("covid", 1)])]);
        assert!(matches!(
            community_csr_accounts(&partition, &usage, &lex),
            Err(CsrError::InvalidPartition(_))
        ));
    }

    #[test]
    fn occurrence_share_two_percent() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        // 100 occurrences, 2 of them environmental
        let usage = usage_of(&[("a", &[("energia", 2), ("covid", 98)])]);
        let (network, _) = community_csr_occurrences(&partition, &usage, &lex).unwrap();
        assert_eq!(network.occurrences_total, 100);
        assert!((network.occurrence_pct[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_vs_occurrence_divergence() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        // one env hashtag repeated 50 times among 1000 occurrences,
        // 999 distinct untagged singletons
        let mut counts: HashMap<String, u64> =
            (0..950).map(|i| (format!("tag{i:04}"), 1)).collect();
        counts.insert("sostenibilità".to_string(), 50);
        let usage: AccountUsage = [("a".to_string(), counts)].into();
        let (network, _) = community_csr_occurrences(&partition, &usage, &lex).unwrap();
        assert_eq!(network.occurrences_total, 1000);
        assert_eq!(network.distinct_total, 951);
        assert!((network.occurrence_pct[0] - 5.0).abs() < 1e-12);
        assert!((network.distinct_pct[0] - 100.0 / 951.0).abs() < 1e-12);
    }

    #[test]
    fn empty_community_is_flagged() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0), ("b".into(), 1)].into();
        let usage = usage_of(&[("a", &[("covid", 1)])]);
        let (_, stats) = community_csr_occurrences(&partition, &usage, &lex).unwrap();
        assert_eq!(stats.len(), 2);
        assert!(stats[1].empty);
        assert_eq!(stats[1].occurrence_pct, [0.0, 0.0, 0.0]);
    }

    fn message(account: &str, hashtags: &[&str], likes: u64, retweets: u64) -> EngagementMessage {
        EngagementMessage {
            account_id: account.to_string(),
            hashtags: hashtags.iter().map(|h| h.to_string()).collect(),
            like_count: likes,
            retweet_count: retweets,
        }
    }

    #[test]
    fn single_env_message_engagement() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        let messages = vec![message("a", &["energia"], 10, 4)];
        let (network, _) = engagement(&messages, &partition, &lex).unwrap();
        assert_eq!(network.per_dimension[0].mean_likes, 10.0);
        assert_eq!(network.per_dimension[0].mean_retweets, 4.0);
        assert!(network.per_dimension[1].empty);
    }

    #[test]
    fn no_qualifying_messages_is_flagged_empty() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        let messages = vec![message("a", &["covid"], 3, 1)];
        let (network, _) = engagement(&messages, &partition, &lex).unwrap();
        for cell in network.per_dimension {
            assert!(cell.empty);
            assert_eq!(cell.mean_likes, 0.0);
        }
        assert_eq!(network.all_hashtags.mean_likes, 3.0);
    }

    #[test]
    fn mixed_dimension_fixture_hand_means() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0), ("b".into(), 0)].into();
        let messages = vec![
            message("a", &["energia"], 10, 2),
            message("a", &["energia", "formazione"], 4, 6), // counts in env AND soc
            message("b", &["formazione"], 2, 0),
            message("b", &["csr"], 7, 7),
            message("b", &["covid"], 100, 100),
        ];
        let (network, per_community) = engagement(&messages, &partition, &lex).unwrap();
        assert_eq!(network.per_dimension[0].mean_likes, 7.0); // (10+4)/2
        assert_eq!(network.per_dimension[1].mean_likes, 3.0); // (4+2)/2
        assert_eq!(network.per_dimension[2].mean_likes, 7.0);
        assert_eq!(network.per_dimension[1].mean_retweets, 3.0); // (6+0)/2
        assert_eq!(network.all_hashtags.mean_likes, 123.0 / 5.0);
        assert_eq!(per_community.len(), 1);
    }

    #[test]
    fn engagement_is_order_invariant() {
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        let mut messages = vec![
            message("a", &["energia"], 1, 1),
            message("a", &["energia"], 5, 3),
            message("a", &["csr"], 2, 2),
        ];
        let (fwd, _) = engagement(&messages, &partition, &lex).unwrap();
        messages.reverse();
        let (rev, _) = engagement(&messages, &partition, &lex).unwrap();
        assert_eq!(fwd.per_dimension[0].mean_likes, rev.per_dimension[0].mean_likes);
        assert_eq!(fwd.all_hashtags.mean_retweets, rev.all_hashtags.mean_retweets);
    }

    #[test]
    fn distinct_tagging_is_exclusive() {
        // each keyword maps to exactly one dimension, so summing distinct
        // counts over dimensions equals total lexicon-hit distinct hashtags
        let lex = lexicon();
        let partition: HashMap<String, usize> = [("a".into(), 0)].into();
        let usage = usage_of(&[(
            "a",
            &[("sostenibilità", 1), ("energia", 2), ("csr", 3), ("covid", 4)],
        )]);
        let (network, _) = community_csr_occurrences(&partition, &usage, &lex).unwrap();
        let distinct_hits: f64 = network.distinct_pct.iter().sum::<f64>() * network.distinct_total as f64 / 100.0;
        assert!((distinct_hits - 3.0).abs() < 1e-9);
    }
}
