//! Tweet archive and firm metadata loading.
//!
//! Ingestion starts from local files: a JSON Lines tweet archive and a CSV of
//! firm metadata. Accounts are filtered to those active both before and
//! inside the observation window, and dataset-level descriptive statistics
//! are computed for reporting.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranks::FirmRecord;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("{malformed} of {total} lines malformed (> 10%), aborting ingest")]
    AbortIngest { malformed: usize, total: usize },
    #[error("invalid period: start {0} is not before end {1}")]
    InvalidPeriod(NaiveDate, NaiveDate),
    #[error("firm metadata: {0}")]
    Metadata(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub account_id: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub text: String,
    /// Raw, pre-normalisation hashtags. When the archive lacks the field
    /// they are extracted from the text.
    #[serde(default)]
    pub hashtags: Option<Vec<String>>,
    #[serde(default)]
    pub is_retweet: bool,
    #[serde(default)]
    pub like_count: u64,
    #[serde(default)]
    pub retweet_count: u64,
    #[serde(default)]
    pub verified_account: bool,
}

impl TweetRecord {
    /// Case-folded hashtags, from the dedicated field when present, else
    /// extracted from the text by `#` followed by word characters.
    pub fn effective_hashtags(&self, extractor: &HashtagExtractor) -> Vec<String> {
        match &self.hashtags {
            Some(tags) => tags
                .iter()
                .map(|t| t.trim_start_matches('#').to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
            None => extractor.extract(&self.text),
        }
    }
}

pub struct HashtagExtractor {
    pattern: Regex,
}

impl Default for HashtagExtractor {
    fn default() -> Self {
        Self {
            pattern: Regex::new(r"#(\w+)").unwrap(),
        }
    }
}

impl HashtagExtractor {
    pub fn extract(&self, text: &str) -> Vec<String> {
        self.pattern
            .captures_iter(text)
            .map(|c| c[1].to_lowercase())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PeriodFilter {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub require_straddle: bool,
}

impl Default for PeriodFilter {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 11, 17).unwrap(),
            require_straddle: true,
        }
    }
}

impl PeriodFilter {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.start >= self.end {
            return Err(IngestError::InvalidPeriod(self.start, self.end));
        }
        Ok(())
    }

    fn in_window(&self, ts: &DateTime<Utc>) -> bool {
        let d = ts.date_naive();
        d >= self.start && d <= self.end
    }

    fn before_window(&self, ts: &DateTime<Utc>) -> bool {
        ts.date_naive() < self.start
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MalformedLine {
    pub line_number: usize,
    pub reason: String,
}

#[derive(Debug, Default, Serialize)]
pub struct IngestReport {
    pub total_lines: usize,
    pub parsed: usize,
    pub malformed: Vec<MalformedLine>,
    pub empty_input: bool,
}

/// Parse a JSON Lines tweet archive. Malformed lines are collected into the
/// report; more than 10% malformed aborts the ingest.
pub fn load_tweets(path: &Path) -> Result<(Vec<TweetRecord>, IngestReport), IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        report.total_lines += 1;
        match serde_json::from_str::<TweetRecord>(line) {
            Ok(record) => {
                records.push(record);
                report.parsed += 1;
            }
            Err(err) => report.malformed.push(MalformedLine {
                line_number: idx + 1,
                reason: err.to_string(),
            }),
        }
    }
    report.empty_input = report.total_lines == 0;
    if report.total_lines > 0 && report.malformed.len() * 10 > report.total_lines {
        return Err(IngestError::AbortIngest {
            malformed: report.malformed.len(),
            total: report.total_lines,
        });
    }
    Ok((records, report))
}

/// Apply the activity-window filter. With `require_straddle`, an account is
/// retained only with at least one tweet strictly before the window start
/// and at least one inside the window. Retained tweets are those inside the
/// window belonging to retained accounts, in input order.
pub fn filter_accounts(
    tweets: &[TweetRecord],
    filter: &PeriodFilter,
) -> Result<(Vec<String>, Vec<TweetRecord>), IngestError> {
    filter.validate()?;
    let mut before: HashSet<&str> = HashSet::new();
    let mut inside: HashSet<&str> = HashSet::new();
    for t in tweets {
        if filter.before_window(&t.timestamp) {
            before.insert(&t.account_id);
        } else if filter.in_window(&t.timestamp) {
            inside.insert(&t.account_id);
        }
    }
    let retained: HashSet<&str> = if filter.require_straddle {
        before.intersection(&inside).copied().collect()
    } else {
        inside
    };
    let mut accounts: Vec<String> = retained.iter().map(|s| s.to_string()).collect();
    accounts.sort();
    let kept = tweets
        .iter()
        .filter(|t| filter.in_window(&t.timestamp) && retained.contains(t.account_id.as_str()))
        .cloned()
        .collect();
    Ok((accounts, kept))
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptiveStats {
    pub n_tweets: usize,
    pub n_accounts: usize,
    pub retweet_fraction: f64,
    pub verified_account_fraction: f64,
    pub hashtag_using_account_fraction: f64,
    /// (hashtag, occurrences) in descending occurrence order, hashtag
    /// ascending on ties.
    pub top_hashtags: Vec<(String, u64)>,
}

pub fn descriptive_stats(tweets: &[TweetRecord], top_k: usize) -> DescriptiveStats {
    let extractor = HashtagExtractor::default();
    let n_tweets = tweets.len();
    let retweets = tweets.iter().filter(|t| t.is_retweet).count();
    let mut verified: HashMap<&str, bool> = HashMap::new();
    let mut uses_hashtags: HashMap<&str, bool> = HashMap::new();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in tweets {
        let tags = t.effective_hashtags(&extractor);
        let v = verified.entry(&t.account_id).or_insert(false);
        *v = *v || t.verified_account;
        let u = uses_hashtags.entry(&t.account_id).or_insert(false);
        *u = *u || !tags.is_empty();
        for tag in tags {
            *counts.entry(tag).or_insert(0) += 1;
        }
    }
    let n_accounts = verified.len();
    let frac = |num: usize, den: usize| if den > 0 { num as f64 / den as f64 } else { 0.0 };
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    DescriptiveStats {
        n_tweets,
        n_accounts,
        retweet_fraction: frac(retweets, n_tweets),
        verified_account_fraction: frac(verified.values().filter(|&&v| v).count(), n_accounts),
        hashtag_using_account_fraction: frac(
            uses_hashtags.values().filter(|&&u| u).count(),
            n_accounts,
        ),
        top_hashtags: ranked,
    }
}

#[derive(Debug, Serialize)]
pub struct MetadataJoin {
    pub firms: Vec<FirmRecord>,
    /// Accounts present in the tweet data but absent from the metadata.
    pub unmatched_accounts: Vec<String>,
    /// Metadata rows whose account never tweeted.
    pub unmatched_firms: Vec<String>,
}

/// Load firm metadata CSV and join it against the retained account list.
/// Unmatched entries on either side are reported, not dropped silently.
pub fn load_firm_metadata(path: &Path, accounts: &[String]) -> Result<MetadataJoin, IngestError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => IngestError::Unreadable {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => IngestError::Metadata(e.to_string()),
    })?;
    let mut firms = Vec::new();
    for row in reader.deserialize::<FirmRecord>() {
        firms.push(row.map_err(|e| IngestError::Metadata(e.to_string()))?);
    }
    let account_set: HashSet<&str> = accounts.iter().map(String::as_str).collect();
    let firm_set: HashSet<&str> = firms.iter().map(|f| f.account_id.as_str()).collect();
    let mut unmatched_accounts: Vec<String> = accounts
        .iter()
        .filter(|a| !firm_set.contains(a.as_str()))
        .cloned()
        .collect();
    unmatched_accounts.sort();
    let mut unmatched_firms: Vec<String> = firms
        .iter()
        .filter(|f| !account_set.contains(f.account_id.as_str()))
        .map(|f| f.account_id.clone())
        .collect();
    unmatched_firms.sort();
    Ok(MetadataJoin {
        firms,
        unmatched_accounts,
        unmatched_firms,
    })
}

/// Per-account canonical hashtag usage counts from in-window tweets,
/// applying a merge map from the normalizer.
pub fn account_usage(
    tweets: &[TweetRecord],
    canonical: impl Fn(&str) -> String,
) -> HashMap<String, HashMap<String, u64>> {
    let extractor = HashtagExtractor::default();
    let mut usage: HashMap<String, HashMap<String, u64>> = HashMap::new();
    for t in tweets {
        let bucket = usage.entry(t.account_id.clone()).or_default();
        for tag in t.effective_hashtags(&extractor) {
            *bucket.entry(canonical(&tag)).or_insert(0) += 1;
        }
    }
    usage.retain(|_, counts| !counts.is_empty());
    usage
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tweet(id: &str, account: &str, ts: &str, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.to_string(),
            account_id: account.to_string(),
            timestamp: ts.parse().unwrap(),
            text: text.to_string(),
            hashtags: None,
            is_retweet: false,
            like_count: 0,
            retweet_count: 0,
            verified_account: false,
        }
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn well_formed_three_line_file() {
        let f = write_lines(&[
            r#"{"tweet_id":"1","account_id":"a","timestamp":"2020-04-01T10:00:00Z","text":"hi #Covid"}"#,
            r#"{"tweet_id":"2","account_id":"b","timestamp":"2020-04-02T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"3","account_id":"a","timestamp":"2020-04-03T10:00:00Z","text":"","is_retweet":true}"#,
        ]);
        let (records, report) = load_tweets(f.path()).unwrap();
        assert_eq!(records.len(), 3);
        assert!(report.malformed.is_empty());
        assert!(records[2].is_retweet);
    }

    #[test]
    fn missing_account_id_goes_to_error_report() {
        let f = write_lines(&[
            r#"{"tweet_id":"1","account_id":"a","timestamp":"2020-04-01T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"2","timestamp":"2020-04-02T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"3","account_id":"a","timestamp":"2020-04-03T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"4","account_id":"a","timestamp":"2020-04-04T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"5","account_id":"a","timestamp":"2020-04-05T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"6","account_id":"a","timestamp":"2020-04-06T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"7","account_id":"a","timestamp":"2020-04-07T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"8","account_id":"a","timestamp":"2020-04-08T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"9","account_id":"a","timestamp":"2020-04-09T10:00:00Z","text":""}"#,
            r#"{"tweet_id":"10","account_id":"a","timestamp":"2020-04-10T10:00:00Z","text":""}"#,
        ]);
        let (records, report) = load_tweets(f.path()).unwrap();
        assert_eq!(records.len(), 9);
        assert_eq!(report.malformed.len(), 1);
        assert_eq!(report.malformed[0].line_number, 2);
    }

    #[test]
    fn over_ten_percent_malformed_aborts() {
        let f = write_lines(&[
            r#"{"tweet_id":"1","account_id":"a","timestamp":"2020-04-01T10:00:00Z","text":""}"#,
            "not json",
        ]);
        assert!(matches!(
            load_tweets(f.path()),
            Err(IngestError::AbortIngest { malformed: 1, total: 2 })
        ));
    }

    #[test]
    fn empty_file_is_empty_with_flag() {
        let f = write_lines(&[]);
        let (records, report) = load_tweets(f.path()).unwrap();
        assert!(records.is_empty());
        assert!(report.empty_input);
    }

    #[test]
    fn hashtag_extraction_case_folds() {
        let extractor = HashtagExtractor::default();
        assert_eq!(
            extractor.extract("Stay safe #Covid19 and #STAYHOME!"),
            vec!["covid19".to_string(), "stayhome".to_string()]
        );
    }

    #[test]
    fn dedicated_hashtag_field_wins_over_text() {
        let extractor = HashtagExtractor::default();
        let mut t = tweet("1", "a", "2020-04-01T10:00:00Z", "text #ignored");
        t.hashtags = Some(vec!["#Kept".to_string()]);
        assert_eq!(t.effective_hashtags(&extractor), vec!["kept".to_string()]);
    }

    #[test]
    fn straddle_filter_keeps_active_accounts() {
        let tweets = vec![
            tweet("1", "keep", "2020-02-29T12:00:00Z", ""),
            tweet("2", "keep", "2020-03-02T12:00:00Z", ""),
            tweet("3", "late", "2020-03-05T12:00:00Z", ""),
            tweet("4", "old", "2020-01-05T12:00:00Z", ""),
        ];
        let (accounts, kept) = filter_accounts(&tweets, &PeriodFilter::default()).unwrap();
        assert_eq!(accounts, vec!["keep".to_string()]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].tweet_id, "2");
    }

    #[test]
    fn account_tweeting_only_after_start_is_dropped() {
        let tweets = vec![tweet("1", "late", "2020-06-01T00:00:00Z", "")];
        let (accounts, kept) = filter_accounts(&tweets, &PeriodFilter::default()).unwrap();
        assert!(accounts.is_empty());
        assert!(kept.is_empty());
    }

    #[test]
    fn filter_is_idempotent() {
        let tweets = vec![
            tweet("1", "a", "2020-02-01T00:00:00Z", ""),
            tweet("2", "a", "2020-04-01T00:00:00Z", ""),
            tweet("3", "a", "2020-05-01T00:00:00Z", ""),
            tweet("4", "b", "2020-04-01T00:00:00Z", ""),
        ];
        let filter = PeriodFilter::default();
        let (_, once) = filter_accounts(&tweets, &filter).unwrap();
        // straddle evidence lives outside the filtered set, so rerun
        // without the straddle requirement
        let rerun = PeriodFilter {
            require_straddle: false,
            ..filter
        };
        let (_, twice) = filter_accounts(&once, &rerun).unwrap();
        assert_eq!(once.len(), twice.len());
        let ids: Vec<_> = once.iter().map(|t| &t.tweet_id).collect();
        let ids2: Vec<_> = twice.iter().map(|t| &t.tweet_id).collect();
        assert_eq!(ids, ids2);
    }

    #[test]
    fn invalid_period_rejected() {
        let filter = PeriodFilter {
            start: NaiveDate::from_ymd_opt(2020, 12, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
            require_straddle: true,
        };
        assert!(matches!(
            filter_accounts(&[], &filter),
            Err(IngestError::InvalidPeriod(_, _))
        ));
    }

    #[test]
    fn one_retweet_among_four_is_25_percent() {
        let mut tweets = vec![
            tweet("1", "a", "2020-04-01T00:00:00Z", ""),
            tweet("2", "a", "2020-04-02T00:00:00Z", ""),
            tweet("3", "b", "2020-04-03T00:00:00Z", ""),
            tweet("4", "b", "2020-04-04T00:00:00Z", ""),
        ];
        tweets[1].is_retweet = true;
        let stats = descriptive_stats(&tweets, 10);
        assert_eq!(stats.retweet_fraction, 0.25);
    }

    #[test]
    fn known_top_hashtag_ranked_first() {
        let tweets = vec![
            tweet("1", "a", "2020-04-01T00:00:00Z", "#covid #lavoro"),
            tweet("2", "b", "2020-04-02T00:00:00Z", "#covid"),
            tweet("3", "c", "2020-04-03T00:00:00Z", "#covid #energia"),
        ];
        let stats = descriptive_stats(&tweets, 2);
        assert_eq!(stats.top_hashtags[0], ("covid".to_string(), 3));
        assert_eq!(stats.top_hashtags.len(), 2);
        assert_eq!(stats.hashtag_using_account_fraction, 1.0);
    }

    #[test]
    fn all_verified_fixture_is_100_percent() {
        let mut tweets = vec![
            tweet("1", "a", "2020-04-01T00:00:00Z", ""),
            tweet("2", "b", "2020-04-02T00:00:00Z", ""),
        ];
        for t in &mut tweets {
            t.verified_account = true;
        }
        let stats = descriptive_stats(&tweets, 10);
        assert_eq!(stats.verified_account_fraction, 1.0);
    }

    #[test]
    fn stats_are_permutation_invariant() {
        let mut tweets = vec![
            tweet("1", "a", "2020-04-01T00:00:00Z", "#x #y"),
            tweet("2", "b", "2020-04-02T00:00:00Z", "#x"),
            tweet("3", "c", "2020-04-03T00:00:00Z", ""),
        ];
        tweets[0].is_retweet = true;
        tweets[2].verified_account = true;
        let fwd = descriptive_stats(&tweets, 10);
        tweets.reverse();
        let rev = descriptive_stats(&tweets, 10);
        assert_eq!(fwd.retweet_fraction, rev.retweet_fraction);
        assert_eq!(fwd.verified_account_fraction, rev.verified_account_fraction);
        assert_eq!(fwd.top_hashtags, rev.top_hashtags);
    }

    #[test]
    fn metadata_join_reports_unmatched() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "account_id,ateco_code,guo_type,total_assets,revenues,employees,followers,friends,messages,likes_per_message,retweets_per_message,hashtag_count"
        )
        .unwrap();
        writeln!(f, "a,28,company,100.0,50.0,10,1000,200,40,1.5,0.3,12").unwrap();
        writeln!(f, "ghost,10,state,,,,,,,,,").unwrap();
        let accounts = vec!["a".to_string(), "b".to_string()];
        let join = load_firm_metadata(f.path(), &accounts).unwrap();
        assert_eq!(join.firms.len(), 2);
        assert_eq!(join.unmatched_accounts, vec!["b".to_string()]);
        assert_eq!(join.unmatched_firms, vec!["ghost".to_string()]);
    }

    #[test]
    fn account_usage_applies_canonical_map() {
        let tweets = vec![
            tweet("1", "a", "2020-04-01T00:00:00Z", "#lavoroo #lavoro"),
            tweet("2", "a", "2020-04-02T00:00:00Z", "#lavoro"),
        ];
        let usage = account_usage(&tweets, |t| {
            if t == "lavoroo" { "lavoro".to_string() } else { t.to_string() }
        });
        assert_eq!(usage["a"]["lavoro"], 3);
    }
}
