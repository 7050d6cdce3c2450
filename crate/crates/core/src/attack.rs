//! Frontrunning attack estimation: how much of a snapshot can an attacker
//! poison by timing one malicious edit per article against a predicted
//! capture schedule?
//!
//! For each article the attacker plans an edit at `predicted + a`, where `a`
//! is one global adjustment applied to every article. The edit succeeds if
//! it lands before the article is captured *and* survives moderation until
//! capture. With only the inferred capture interval `[low, high]` and an
//! empirical revert-delay CDF available, both conditions are scored
//! pessimistically: the edit must beat the *lower* interval end to count as
//! in time, and it must survive all the way to the *upper* end. The result
//! is a lower bound on the attacker's true success rate.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reversion::EmpiricalCdf;

/// Default adjustment sweep: plus/minus six hours in one-minute steps.
pub const DEFAULT_SWEEP_MIN: i64 = -21_600;
pub const DEFAULT_SWEEP_MAX: i64 = 21_600;
pub const DEFAULT_SWEEP_STEP: i64 = 60;

/// Attack-relevant view of one article: the predicted capture epoch and the
/// inferred capture interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackArticle {
    pub article_id: u64,
    pub predicted: i64,
    pub low: i64,
    pub high: i64,
}

impl AttackArticle {
    pub fn validate(&self) -> Result<()> {
        if self.low > self.high {
            return Err(Error::invalid(format!(
                "article {}: interval low {} exceeds high {}",
                self.article_id, self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Pessimistic success score for one article at adjustment `a`.
///
/// With edit time `e = predicted + a`:
/// * if `e > low`, the edit may have missed the capture — score 0;
/// * otherwise the edit must survive moderation for at least `high - e`
///   seconds, which happens with probability `1 - cdf(high - e)`; an edit at
///   or after `high` is treated as certainly reverted in time.
pub fn article_success(article: &AttackArticle, a: i64, cdf: &EmpiricalCdf) -> f64 {
    let e = article.predicted + a;
    let late = if e > article.low { 1.0 } else { 0.0 };
    let p_rev = if e < article.high {
        cdf.evaluate((article.high - e) as f64)
    } else {
        1.0
    };
    (1.0 - p_rev) * (1.0 - late)
}

/// Estimated poisoned fraction at one adjustment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackEstimate {
    pub a: i64,
    pub n_articles: u64,
    /// Mean per-article success score: the expected fraction of articles
    /// poisoned in the snapshot.
    pub success_fraction: f64,
}

/// Score every article at adjustment `a` and average (in input order, so the
/// result is bit-stable regardless of parallelism settings).
pub fn estimate(articles: &[AttackArticle], a: i64, cdf: &EmpiricalCdf) -> Result<AttackEstimate> {
    if articles.is_empty() {
        return Err(Error::invalid("no articles to estimate over"));
    }
    for art in articles {
        art.validate()?;
    }
    let sum: f64 = articles
        .iter()
        .map(|art| article_success(art, a, cdf))
        .sum();
    Ok(AttackEstimate {
        a,
        n_articles: articles.len() as u64,
        success_fraction: sum / articles.len() as f64,
    })
}

/// Full sweep over an adjustment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub best_a: i64,
    pub best_success: f64,
    /// `(a, success_fraction)` for every grid point, ascending in `a`.
    pub curve: Vec<(i64, f64)>,
}

/// Evaluate the success fraction on the inclusive grid
/// `a_min, a_min+step, ... <= a_max` and report the maximising adjustment,
/// with ties broken toward the smallest `a`. Grid points are evaluated in
/// parallel; each point's mean is computed sequentially, so results do not
/// depend on the worker count.
pub fn sweep(
    articles: &[AttackArticle],
    cdf: &EmpiricalCdf,
    a_min: i64,
    a_max: i64,
    step: i64,
) -> Result<SweepResult> {
    if step <= 0 {
        return Err(Error::invalid("sweep step must be positive"));
    }
    if a_min > a_max {
        return Err(Error::invalid("sweep requires a_min <= a_max"));
    }
    if articles.is_empty() {
        return Err(Error::invalid("no articles to sweep over"));
    }
    for art in articles {
        art.validate()?;
    }
    let n_points = ((a_max - a_min) / step + 1) as usize;
    let curve: Vec<(i64, f64)> = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let a = a_min + k as i64 * step;
            let sum: f64 = articles
                .iter()
                .map(|art| article_success(art, a, cdf))
                .sum();
            (a, sum / articles.len() as f64)
        })
        .collect();
    let (mut best_a, mut best_success) = curve[0];
    for &(a, s) in &curve[1..] {
        if s > best_success {
            best_a = a;
            best_success = s;
        }
    }
    Ok(SweepResult {
        best_a,
        best_success,
        curve,
    })
}

#[derive(Debug, Deserialize, Serialize)]
struct AttackCsvRow {
    article: u64,
    predicted: i64,
    low: i64,
    high: i64,
}

/// Read attack inputs from CSV with header `article,predicted,low,high`.
pub fn read_attack_csv<R: Read>(reader: R) -> Result<Vec<AttackArticle>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<AttackCsvRow>() {
        let row = row.map_err(|e| Error::Csv {
            path: "<attack csv>".into(),
            source: e,
        })?;
        let article = AttackArticle {
            article_id: row.article,
            predicted: row.predicted,
            low: row.low,
            high: row.high,
        };
        article.validate()?;
        out.push(article);
    }
    Ok(out)
}

/// Read attack inputs from a file path.
pub fn read_attack_csv_path(path: &Path) -> Result<Vec<AttackArticle>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_attack_csv(std::io::BufReader::new(f))
}

/// Write attack inputs as CSV.
pub fn write_attack_csv<W: Write>(articles: &[AttackArticle], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for art in articles {
        wtr.serialize(AttackCsvRow {
            article: art.article_id,
            predicted: art.predicted,
            low: art.low,
            high: art.high,
        })
        .map_err(|e| Error::Csv {
            path: "<attack csv>".into(),
            source: e,
        })?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<attack csv>".into(),
        source: e,
    })?;
    Ok(())
}

/// Write a sweep curve as CSV with header `a,success`.
pub fn write_curve_csv<W: Write>(curve: &[(i64, f64)], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["a", "success"]).map_err(|e| Error::Csv {
        path: "<curve csv>".into(),
        source: e,
    })?;
    for &(a, s) in curve {
        wtr.write_record([a.to_string(), s.to_string()])
            .map_err(|e| Error::Csv {
                path: "<curve csv>".into(),
                source: e,
            })?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<curve csv>".into(),
        source: e,
    })?;
    Ok(())
}
