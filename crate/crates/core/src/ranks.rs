//! Spearman rank correlations between online and financial firm variables,
//! with average-rank tie handling and pairwise missing-data deletion.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("need at least 3 complete pairs, got {0}")]
    InsufficientData(usize),
    #[error("input vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ownership category of a firm's Global Ultimate Owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuoType {
    State,
    Funds,
    Family,
    Company,
    Other,
}

impl std::fmt::Display for GuoType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GuoType::State => "state",
            GuoType::Funds => "funds",
            GuoType::Family => "family",
            GuoType::Company => "company",
            GuoType::Other => "other",
        };
        f.write_str(s)
    }
}

/// Per-firm record joining AIDA-style financials with Twitter activity.
/// Missing values stay missing and are handled by pairwise deletion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FirmRecord {
    pub account_id: String,
    pub ateco_code: Option<u8>,
    pub guo_type: Option<GuoType>,
    pub total_assets: Option<f64>,
    pub revenues: Option<f64>,
    pub employees: Option<f64>,
    pub followers: Option<f64>,
    pub friends: Option<f64>,
    pub messages: Option<f64>,
    pub likes_per_message: Option<f64>,
    pub retweets_per_message: Option<f64>,
    pub hashtag_count: Option<f64>,
}

impl FirmRecord {
    pub fn variable(&self, name: &str) -> Result<Option<f64>, RankError> {
        Ok(match name {
            "total_assets" => self.total_assets,
            "revenues" => self.revenues,
            "employees" => self.employees,
            "followers" => self.followers,
            "friends" => self.friends,
            "messages" => self.messages,
            "likes_per_message" => self.likes_per_message,
            "retweets_per_message" => self.retweets_per_message,
            "hashtag_count" => self.hashtag_count,
            other => return Err(RankError::UnknownVariable(other.to_string())),
        })
    }
}

/// All correlation variables, in the export order.
pub const DEFAULT_VARIABLES: &[&str] = &[
    "total_assets",
    "revenues",
    "employees",
    "followers",
    "friends",
    "messages",
    "likes_per_message",
    "retweets_per_message",
    "hashtag_count",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    pub rho: Vec<Vec<f64>>,
    pub p_values: Vec<Vec<f64>>,
    /// Pairwise sample sizes after missing-data removal.
    pub n_effective: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    /// Wide CSV with the variable names as header and row labels.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RankError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["variable".to_string()];
        header.extend(self.variables.iter().cloned());
        writer.write_record(&header).map_err(std::io::Error::other)?;
        for (i, name) in self.variables.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend(self.rho[i].iter().map(|r| format!("{r:.6}")));
            writer.write_record(&row).map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Long CSV: (var1, var2, rho, p, n).
    pub fn write_long_csv<W: Write>(&self, out: W) -> Result<(), RankError> {
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record(["var1", "var2", "rho", "p_value", "n"])
            .map_err(std::io::Error::other)?;
        for i in 0..self.variables.len() {
            for j in (i + 1)..self.variables.len() {
                writer
                    .write_record([
                        self.variables[i].as_str(),
                        self.variables[j].as_str(),
                        &format!("{:.6}", self.rho[i][j]),
                        &format!("{:.6}", self.p_values[i][j]),
                        &self.n_effective[i][j].to_string(),
                    ])
                    .map_err(std::io::Error::other)?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

/// Average ranks (1-based); tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = avg;
        }
        start = end + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman correlation with average-rank tie handling. P-value from the
/// t-distribution approximation on n-2 degrees of freedom.
///
/// Pairs where either coordinate is NaN are deleted before ranking.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64), RankError> {
    if x.len() != y.len() {
        return Err(RankError::LengthMismatch(x.len(), y.len()));
    }
    let complete: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    let n = complete.len();
    if n < 3 {
        return Err(RankError::InsufficientData(n));
    }
    let xs: Vec<f64> = complete.iter().map(|(a, _)| *a).collect();
    let ys: Vec<f64> = complete.iter().map(|(_, b)| *b).collect();
    let rho = pearson(&average_ranks(&xs), &average_ranks(&ys));

    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok((rho, p))
}

/// Exact permutation p-value, feasible for small samples (n < 10); two-sided
/// on |rho|.
pub fn spearman_permutation_pvalue(x: &[f64], y: &[f64]) -> Result<(f64, f64), RankError> {
    let (rho, _) = spearman(x, y)?;
    let complete: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    let xs: Vec<f64> = complete.iter().map(|(a, _)| *a).collect();
    let ys: Vec<f64> = complete.iter().map(|(_, b)| *b).collect();
    let rx = average_ranks(&xs);
    let ry = average_ranks(&ys);

    let mut perm: Vec<usize> = (0..ry.len()).collect();
    let mut at_least_as_extreme = 0usize;
    let mut total = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let permuted: Vec<f64> = p.iter().map(|&i| ry[i]).collect();
        if pearson(&rx, &permuted).abs() >= rho.abs() - 1e-12 {
            at_least_as_extreme += 1;
        }
        total += 1;
    });
    Ok((rho, at_least_as_extreme as f64 / total as f64))
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Pairwise-complete Spearman matrix over the chosen variables, optionally
/// restricted to one ATECO sector.
pub fn correlation_matrix(
    records: &[FirmRecord],
    variables: &[&str],
    ateco_filter: Option<u8>,
) -> Result<CorrelationMatrix, RankError> {
    let filtered: Vec<&FirmRecord> = records
        .iter()
        .filter(|r| ateco_filter.is_none() || r.ateco_code == ateco_filter)
        .collect();
    if filtered.len() < 3 {
        return Err(RankError::InsufficientData(filtered.len()));
    }

    let columns: Vec<Vec<f64>> = variables
        .iter()
        .map(|&v| {
            filtered
                .iter()
                .map(|r| r.variable(v).map(|o| o.unwrap_or(f64::NAN)))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let k = variables.len();
    let mut rho = vec![vec![0.0f64; k]; k];
    let mut p_values = vec![vec![0.0f64; k]; k];
    let mut n_effective = vec![vec![0usize; k]; k];
    for i in 0..k {
        rho[i][i] = 1.0;
        n_effective[i][i] = columns[i].iter().filter(|v| !v.is_nan()).count();
        for j in (i + 1)..k {
            let n = columns[i]
                .iter()
                .zip(&columns[j])
                .filter(|(a, b)| !a.is_nan() && !b.is_nan())
                .count();
            let (r, p) = spearman(&columns[i], &columns[j])?;
            rho[i][j] = r;
            rho[j][i] = r;
            p_values[i][j] = p;
            p_values[j][i] = p;
            n_effective[i][j] = n;
            n_effective[j][i] = n;
        }
    }
    Ok(CorrelationMatrix {
        variables: variables.iter().map(|v| v.to_string()).collect(),
        rho,
        p_values,
        n_effective,
    })
}
