//! Dataset index handling: the distributed artifact of a web-scale dataset is
//! not the data itself but an *index* of (url, caption, content hash) rows.
//! This module loads such indices, recomputes content digests, and tallies
//! how much of the index still matches what the URLs serve today.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One row of a dataset index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    /// Position of the row in the published index (unique within an index).
    pub entry_ordinal: u64,
    /// Absolute URL the content was collected from.
    pub url: String,
    /// Caption or label text distributed with the entry.
    pub caption: String,
    /// Lowercase hex SHA-256 of the content, when the index publishes one.
    pub expected_hash: Option<String>,
}

/// A named dataset index: release metadata plus its entries, ordinal-sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub name: String,
    /// Unix epoch seconds at which this index was published.
    pub release_epoch: i64,
    pub entries: Vec<IndexEntry>,
}

/// What re-fetching one index entry revealed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerificationOutcome {
    /// Content present and its digest matches the published hash.
    Intact,
    /// Content present but its digest differs from the published hash.
    Modified,
    /// Nothing could be fetched for the entry.
    Missing,
    /// Content present but not decodable as the expected media type.
    InvalidContent,
    /// Content present but the index publishes no hash to compare against.
    Unverifiable,
}

impl fmt::Display for VerificationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerificationOutcome::Intact => "intact",
            VerificationOutcome::Modified => "modified",
            VerificationOutcome::Missing => "missing",
            VerificationOutcome::InvalidContent => "invalid-content",
            VerificationOutcome::Unverifiable => "unverifiable",
        };
        f.write_str(s)
    }
}

impl FromStr for VerificationOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intact" => Ok(VerificationOutcome::Intact),
            "modified" => Ok(VerificationOutcome::Modified),
            "missing" => Ok(VerificationOutcome::Missing),
            "invalid-content" => Ok(VerificationOutcome::InvalidContent),
            "unverifiable" => Ok(VerificationOutcome::Unverifiable),
            other => Err(Error::invalid(format!(
                "unknown verification outcome {other:?}"
            ))),
        }
    }
}

/// Aggregate verification tally over one index.
///
/// `live` counts entries whose content could be fetched at all, i.e.
/// everything except `missing`. The five outcome counts partition `total`,
/// and each `frac_*` field is the corresponding count over `total`
/// (zero when the index is empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub total: u64,
    pub live: u64,
    pub hash_match: u64,
    pub hash_mismatch: u64,
    pub missing: u64,
    pub invalid_content: u64,
    pub unverifiable: u64,
    pub frac_live: f64,
    pub frac_hash_match: f64,
    pub frac_hash_mismatch: f64,
    pub frac_missing: f64,
    pub frac_invalid_content: f64,
    pub frac_unverifiable: f64,
}

/// SHA-256 of `content`, rendered as 64 lowercase hex characters.
pub fn compute_content_hash(content: &[u8]) -> String {
    hex::encode(Sha256::digest(content))
}

fn is_valid_hash(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

fn validate_entry(entry: &IndexEntry) -> Result<()> {
    let parsed = url::Url::parse(&entry.url).map_err(|e| {
        Error::invalid(format!(
            "entry {}: bad url {:?}: {e}",
            entry.entry_ordinal, entry.url
        ))
    })?;
    if parsed.host().is_none() {
        return Err(Error::invalid(format!(
            "entry {}: url {:?} has no host",
            entry.entry_ordinal, entry.url
        )));
    }
    if let Some(h) = &entry.expected_hash {
        if !is_valid_hash(h) {
            return Err(Error::invalid(format!(
                "entry {}: expected_hash must be 64 lowercase hex chars, got {h:?}",
                entry.entry_ordinal
            )));
        }
    }
    Ok(())
}

impl DatasetIndex {
    /// Build an index from rows, sorting by ordinal and enforcing the row
    /// invariants (parseable absolute URL, well-formed hash, unique ordinal).
    pub fn new(
        name: impl Into<String>,
        release_epoch: i64,
        mut entries: Vec<IndexEntry>,
    ) -> Result<Self> {
        if release_epoch <= 0 {
            return Err(Error::invalid("release_epoch must be positive"));
        }
        for e in &entries {
            validate_entry(e)?;
        }
        entries.sort_by_key(|e| e.entry_ordinal);
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.entry_ordinal) {
                return Err(Error::invalid(format!(
                    "duplicate entry ordinal {}",
                    e.entry_ordinal
                )));
            }
        }
        Ok(DatasetIndex {
            name: name.into(),
            release_epoch,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Classify one entry given what a re-fetch returned.
///
/// `fetched` is `None` when nothing could be retrieved; `content_valid` says
/// whether the retrieved bytes decode as the expected media type (callers
/// that do not check content validity pass `true`). Precedence: missing,
/// then invalid content, then unverifiable, then the hash comparison.
pub fn verify_entry(
    entry: &IndexEntry,
    fetched: Option<&[u8]>,
    content_valid: bool,
) -> VerificationOutcome {
    let content = match fetched {
        None => return VerificationOutcome::Missing,
        Some(c) => c,
    };
    if !content_valid {
        return VerificationOutcome::InvalidContent;
    }
    let expected = match &entry.expected_hash {
        None => return VerificationOutcome::Unverifiable,
        Some(h) => h,
    };
    if compute_content_hash(content) == *expected {
        VerificationOutcome::Intact
    } else {
        VerificationOutcome::Modified
    }
}

/// Tally per-entry outcomes into an [`IntegrityReport`].
///
/// `outcomes` must be aligned with `index.entries` (same length, same order).
pub fn integrity_report(
    index: &DatasetIndex,
    outcomes: &[VerificationOutcome],
) -> Result<IntegrityReport> {
    if index.entries.len() != outcomes.len() {
        return Err(Error::invalid(format!(
            "outcome count {} does not match index size {}",
            outcomes.len(),
            index.entries.len()
        )));
    }
    let mut hash_match = 0u64;
    let mut hash_mismatch = 0u64;
    let mut missing = 0u64;
    let mut invalid_content = 0u64;
    let mut unverifiable = 0u64;
    for o in outcomes {
        match o {
            VerificationOutcome::Intact => hash_match += 1,
            VerificationOutcome::Modified => hash_mismatch += 1,
            VerificationOutcome::Missing => missing += 1,
            VerificationOutcome::InvalidContent => invalid_content += 1,
            VerificationOutcome::Unverifiable => unverifiable += 1,
        }
    }
    let total = outcomes.len() as u64;
    let live = total - missing;
    let frac = |n: u64| {
        if total == 0 {
            0.0
        } else {
            n as f64 / total as f64
        }
    };
    Ok(IntegrityReport {
        total,
        live,
        hash_match,
        hash_mismatch,
        missing,
        invalid_content,
        unverifiable,
        frac_live: frac(live),
        frac_hash_match: frac(hash_match),
        frac_hash_mismatch: frac(hash_mismatch),
        frac_missing: frac(missing),
        frac_invalid_content: frac(invalid_content),
        frac_unverifiable: frac(unverifiable),
    })
}

#[derive(Debug, Deserialize, Serialize)]
struct IndexCsvRow {
    ordinal: u64,
    url: String,
    caption: String,
    sha256: String,
}

/// Read an index from CSV with header `ordinal,url,caption,sha256` (RFC 4180,
/// so captions may contain commas/quotes/newlines). An empty `sha256` field
/// means the index publishes no hash for that entry.
pub fn read_index_csv<R: Read>(reader: R, name: &str, release_epoch: i64) -> Result<DatasetIndex> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut entries = Vec::new();
    for row in rdr.deserialize::<IndexCsvRow>() {
        let row = row.map_err(|e| Error::Csv {
            path: "<index csv>".into(),
            source: e,
        })?;
        entries.push(IndexEntry {
            entry_ordinal: row.ordinal,
            url: row.url,
            caption: row.caption,
            expected_hash: if row.sha256.is_empty() {
                None
            } else {
                Some(row.sha256)
            },
        });
    }
    DatasetIndex::new(name, release_epoch, entries)
}

/// Read an index CSV from a file path.
pub fn read_index_csv_path(path: &Path, name: &str, release_epoch: i64) -> Result<DatasetIndex> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_index_csv(std::io::BufReader::new(f), name, release_epoch)
}

/// Write an index back out in the same CSV format `read_index_csv` accepts.
pub fn write_index_csv<W: Write>(index: &DatasetIndex, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for e in &index.entries {
        let row = IndexCsvRow {
            ordinal: e.entry_ordinal,
            url: e.url.clone(),
            caption: e.caption.clone(),
            sha256: e.expected_hash.clone().unwrap_or_default(),
        };
        wtr.serialize(row).map_err(|e| Error::Csv {
            path: "<index csv>".into(),
            source: e,
        })?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<index csv>".into(),
        source: e,
    })?;
    Ok(())
}

/// Read a per-entry outcome CSV with header `ordinal,outcome`, aligned
/// against `index` (every index ordinal present exactly once). Returns the
/// outcomes in index order.
pub fn read_outcomes_csv<R: Read>(
    reader: R,
    index: &DatasetIndex,
) -> Result<Vec<VerificationOutcome>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut by_ordinal = std::collections::BTreeMap::new();
    for row in rdr.deserialize::<(u64, String)>() {
        let (ordinal, outcome) = row.map_err(|e| Error::Csv {
            path: "<outcomes csv>".into(),
            source: e,
        })?;
        let outcome: VerificationOutcome = outcome.parse()?;
        if by_ordinal.insert(ordinal, outcome).is_some() {
            return Err(Error::invalid(format!(
                "duplicate outcome for ordinal {ordinal}"
            )));
        }
    }
    index
        .entries
        .iter()
        .map(|e| {
            by_ordinal.get(&e.entry_ordinal).copied().ok_or_else(|| {
                Error::invalid(format!("no outcome for ordinal {}", e.entry_ordinal))
            })
        })
        .collect()
}

/// Write per-entry outcomes as CSV with header `ordinal,outcome`.
pub fn write_outcomes_csv<W: Write>(
    index: &DatasetIndex,
    outcomes: &[VerificationOutcome],
    writer: W,
) -> Result<()> {
    if index.entries.len() != outcomes.len() {
        return Err(Error::invalid("outcome count does not match index size"));
    }
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["ordinal", "outcome"])
        .map_err(|e| Error::Csv {
            path: "<outcomes csv>".into(),
            source: e,
        })?;
    for (e, o) in index.entries.iter().zip(outcomes) {
        wtr.write_record([e.entry_ordinal.to_string(), o.to_string()])
            .map_err(|e| Error::Csv {
                path: "<outcomes csv>".into(),
                source: e,
            })?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<outcomes csv>".into(),
        source: e,
    })?;
    Ok(())
}

/// Write an [`IntegrityReport`] as a single-row CSV (header + one data row).
pub fn write_report_csv<W: Write>(report: &IntegrityReport, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.serialize(report).map_err(|e| Error::Csv {
        path: "<report csv>".into(),
        source: e,
    })?;
    wtr.flush().map_err(|e| Error::Io {
        path: "<report csv>".into(),
        source: e,
    })?;
    Ok(())
}
