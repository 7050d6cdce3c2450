//! Reversion behaviour: how fast does a wiki community undo a bad edit?
//!
//! Revert events are recognised from edit comments via per-language marker
//! substrings, the delay of each revert is measured against the immediately
//! preceding revision of the same article, and the resulting duration
//! multiset is exposed as an empirical CDF. That CDF is the moderation model
//! used by the attack estimator and the defense evaluations.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timing::{validate_edit_order, EditRecord};

/// Substring markers that identify revert comments for one language.
///
/// Markers are stored case-folded; matching folds the comment the same way,
/// so classification is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevertMarkerSet {
    pub language_code: String,
    markers: Vec<String>,
}

impl RevertMarkerSet {
    /// Build a marker set, folding markers to lowercase. At least one marker
    /// is required and empty markers are rejected (an empty substring would
    /// match every comment).
    pub fn new(language_code: impl Into<String>, markers: Vec<String>) -> Result<Self> {
        if markers.is_empty() {
            return Err(Error::invalid(
                "marker set must contain at least one marker",
            ));
        }
        if markers.iter().any(|m| m.is_empty()) {
            return Err(Error::invalid("markers must be nonempty strings"));
        }
        Ok(RevertMarkerSet {
            language_code: language_code.into(),
            markers: markers.iter().map(|m| m.to_lowercase()).collect(),
        })
    }

    pub fn markers(&self) -> &[String] {
        &self.markers
    }

    /// The English marker set used throughout: the common edit-summary
    /// abbreviations for reverting vandalism plus the verbs themselves.
    /// Note `"rv "` keeps its trailing space so it does not fire inside
    /// ordinary words, while `"rvv"` matches with or without a follower.
    pub fn english_default() -> Self {
        RevertMarkerSet::new(
            "en",
            ["revert", "rv ", "rvv", "undid", "undo"]
                .into_iter()
                .map(String::from)
                .collect(),
        )
        .expect("default markers are valid")
    }
}

/// `true` when the case-folded comment contains any marker.
pub fn classify_reversion(comment: &str, markers: &RevertMarkerSet) -> bool {
    let folded = comment.to_lowercase();
    markers.markers.iter().any(|m| folded.contains(m.as_str()))
}

/// Load one marker set per file: one marker per line, `#`-prefixed lines are
/// comments, blank lines are skipped. Lines are *not* trimmed (beyond the
/// line terminator) because significant trailing spaces — as in `"rv "` —
/// are part of the marker.
pub fn read_marker_file<R: Read>(reader: R, language_code: &str) -> Result<RevertMarkerSet> {
    let mut markers = Vec::new();
    for line in std::io::BufReader::new(reader).lines() {
        let mut line = line.map_err(|e| Error::Io {
            path: "<marker file>".into(),
            source: e,
        })?;
        if line.ends_with('\r') {
            line.pop();
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        markers.push(line);
    }
    RevertMarkerSet::new(language_code, markers)
}

/// Read a marker file from disk; the language code defaults to the file stem.
pub fn read_marker_file_path(path: &Path) -> Result<RevertMarkerSet> {
    let lang = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unknown")
        .to_string();
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_marker_file(std::io::BufReader::new(f), &lang)
}

/// Outcome of a duration scan over an edit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversionScan {
    /// Delay in seconds of each detected revert, in scan order.
    pub durations: Vec<u64>,
    /// Reverts whose epoch preceded their predecessor's (clock skew in the
    /// log); these cannot yield a meaningful delay and are dropped.
    pub negative_dropped: u64,
    /// Reverts that were the first revision of their article; there is
    /// nothing on the article to measure against, so nothing is emitted.
    pub first_revision_reverts: u64,
}

/// Scan an edit log (sorted by article then revision) and measure, for every
/// revert comment, the delay since the immediately preceding revision of the
/// same article.
///
/// Pairing against the immediate predecessor is deliberate: when a revert
/// undoes an edit further back, the measured delay is an underestimate of
/// the true moderation latency, which biases every downstream survival
/// estimate toward *more* moderation — the cautious direction for an
/// attacker-feasibility bound.
pub fn reversion_durations(
    edits: &[EditRecord],
    markers: &RevertMarkerSet,
) -> Result<ReversionScan> {
    validate_edit_order(edits)?;
    let mut durations = Vec::new();
    let mut negative_dropped = 0u64;
    let mut first_revision_reverts = 0u64;
    let mut prev: Option<&EditRecord> = None;
    for edit in edits {
        let same_article = prev
            .map(|p| p.article_id == edit.article_id)
            .unwrap_or(false);
        if classify_reversion(&edit.comment, markers) {
            if same_article {
                let prev_epoch = prev.unwrap().edit_epoch;
                if edit.edit_epoch >= prev_epoch {
                    durations.push((edit.edit_epoch - prev_epoch) as u64);
                } else {
                    negative_dropped += 1;
                }
            } else {
                first_revision_reverts += 1;
            }
        }
        prev = Some(edit);
    }
    Ok(ReversionScan {
        durations,
        negative_dropped,
        first_revision_reverts,
    })
}

/// Empirical cumulative distribution over nonnegative integer durations.
///
/// `evaluate(t)` is the fraction of stored durations `d` with `d <= t`: a
/// right-continuous step function using the weak inequality, so evaluating
/// exactly at a stored duration includes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<u64>,
}

impl EmpiricalCdf {
    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_durations(&self) -> &[u64] {
        &self.sorted
    }

    /// Number of stored durations `d` with `d as f64 <= t`.
    pub fn count_le(&self, t: f64) -> usize {
        if t < 0.0 {
            return 0;
        }
        self.sorted.partition_point(|&d| d as f64 <= t)
    }

    /// Fraction of durations `<= t`; 0.0 for any `t` below the smallest
    /// duration (in particular all negative `t`), 1.0 at or above the largest.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.count_le(t) as f64 / self.sorted.len() as f64
    }

    /// `1 - evaluate(t)`: fraction of durations strictly greater than `t`.
    pub fn survival(&self, t: f64) -> f64 {
        (self.sorted.len() - self.count_le(t)) as f64 / self.sorted.len() as f64
    }
}

/// Sort a duration multiset into an [`EmpiricalCdf`]. At least one duration
/// is required — an empty CDF has no defined value anywhere.
pub fn build_cdf(mut durations: Vec<u64>) -> Result<EmpiricalCdf> {
    if durations.is_empty() {
        return Err(Error::invalid("cannot build a CDF from zero durations"));
    }
    durations.sort_unstable();
    Ok(EmpiricalCdf { sorted: durations })
}

/// Read a duration file: one nonnegative integer (seconds) per line, with
/// blank lines and `#` comments permitted.
pub fn read_durations<R: Read>(reader: R) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: "<durations>".into(),
            source: e,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let d: u64 = trimmed
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad duration {trimmed:?}", i + 1)))?;
        out.push(d);
    }
    Ok(out)
}

/// Read durations from a file path.
pub fn read_durations_path(path: &Path) -> Result<Vec<u64>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_durations(std::io::BufReader::new(f))
}

/// Write durations, one per line.
pub fn write_durations<W: Write>(durations: &[u64], mut writer: W) -> Result<()> {
    for d in durations {
        writeln!(writer, "{d}").map_err(|e| Error::Io {
            path: "<durations>".into(),
            source: e,
        })?;
    }
    Ok(())
}
