//! Server-side detection of dataset downloads from access logs.
//!
//! An operator who controls (or trap-registers) domains listed in a dataset
//! index can watch for clients that fetch the listed URLs nearly
//! exhaustively — the signature of a dataset download tool rather than a
//! browser. This module parses access logs, splits them into per-client
//! sessions, and flags sessions whose coverage of the owned URLs crosses
//! the configured thresholds.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One parsed access-log entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub epoch: i64,
    /// Whatever identifies the client in the log — an IP, a hashed IP, a
    /// subscriber id. Sessions never span client keys.
    pub client_key: String,
    /// The request target exactly as logged. Owned-URL matching is exact
    /// string comparison, so logs must carry absolute URLs (the native CSV
    /// format always does; NCSA logs only when recorded behind a proxy).
    pub url: String,
    pub user_agent: String,
    pub status: u16,
}

/// Parse result: the usable records plus a count of lines that were not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLog {
    pub records: Vec<AccessRecord>,
    pub skipped: u64,
}

/// The URLs the operator controls, in dataset-index order, plus the
/// registrable domains they live under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnedUrlSet {
    pub domains: Vec<String>,
    pub urls: Vec<String>,
}

impl OwnedUrlSet {
    pub fn new(domains: Vec<String>, urls: Vec<String>) -> Result<Self> {
        if domains.is_empty() || urls.is_empty() {
            return Err(Error::invalid(
                "owned set needs at least one domain and one url",
            ));
        }
        let mut seen = BTreeSet::new();
        for u in &urls {
            if !seen.insert(u.as_str()) {
                return Err(Error::invalid(format!("duplicate owned url {u:?}")));
            }
            let parsed =
                url::Url::parse(u).map_err(|e| Error::invalid(format!("owned url {u:?}: {e}")))?;
            let host = parsed
                .host_str()
                .ok_or_else(|| Error::invalid(format!("owned url {u:?} has no host")))?;
            let covered = domains
                .iter()
                .any(|d| host == d || host.ends_with(&format!(".{d}")));
            if !covered {
                return Err(Error::invalid(format!(
                    "owned url {u:?} is not under any owned domain"
                )));
            }
        }
        Ok(OwnedUrlSet { domains, urls })
    }

    /// Registrable domain each owned url belongs to, by url position.
    fn url_domains(&self) -> Vec<usize> {
        self.urls
            .iter()
            .map(|u| {
                let parsed = url::Url::parse(u).expect("validated at construction");
                let host = parsed.host_str().expect("validated at construction");
                self.domains
                    .iter()
                    .position(|d| host == d || host.ends_with(&format!(".{d}")))
                    .expect("validated at construction")
            })
            .collect()
    }
}

/// Read an owned set from JSON: `{"domains": [...], "urls": [...]}` with
/// urls in index order.
pub fn read_owned_set<R: Read>(reader: R) -> Result<OwnedUrlSet> {
    #[derive(Deserialize)]
    struct Raw {
        domains: Vec<String>,
        urls: Vec<String>,
    }
    let raw: Raw = serde_json::from_reader(reader).map_err(|e| Error::Json {
        path: "<owned set>".into(),
        source: e,
    })?;
    OwnedUrlSet::new(raw.domains, raw.urls)
}

const CSV_HEADER: &str = "epoch,client_key,url,user_agent,status";

fn parse_csv_log(text: &str) -> ParsedLog {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    let mut skipped = 0u64;
    for row in reader.records() {
        let Ok(row) = row else {
            skipped += 1;
            continue;
        };
        if row.len() != 5 {
            skipped += 1;
            continue;
        }
        let (Ok(epoch), Ok(status)) = (row[0].parse::<i64>(), row[4].parse::<u16>()) else {
            skipped += 1;
            continue;
        };
        records.push(AccessRecord {
            epoch,
            client_key: row[1].to_string(),
            url: row[2].to_string(),
            user_agent: row[3].to_string(),
            status,
        });
    }
    ParsedLog { records, skipped }
}

fn parse_ncsa_log(text: &str) -> ParsedLog {
    // NCSA common log format, optionally extended with the combined
    // format's quoted referer and user-agent.
    let line_re = regex::Regex::new(
        r#"^(\S+) \S+ \S+ \[([^\]]+)\] "([^"]*)" (\d{3}) \S+(?: "(?:[^"]*)" "([^"]*)")?\s*$"#,
    )
    .expect("static regex");
    let mut records = Vec::new();
    let mut skipped = 0u64;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let Some(caps) = line_re.captures(line) else {
            skipped += 1;
            continue;
        };
        let Ok(when) = chrono::DateTime::parse_from_str(&caps[2], "%d/%b/%Y:%H:%M:%S %z") else {
            skipped += 1;
            continue;
        };
        let request: Vec<&str> = caps[3].split_whitespace().collect();
        if request.len() < 2 {
            skipped += 1;
            continue;
        }
        let Ok(status) = caps[4].parse::<u16>() else {
            skipped += 1;
            continue;
        };
        records.push(AccessRecord {
            epoch: when.timestamp(),
            client_key: caps[1].to_string(),
            url: request[1].to_string(),
            user_agent: caps.get(5).map(|m| m.as_str()).unwrap_or("").to_string(),
            status,
        });
    }
    ParsedLog { records, skipped }
}

/// Parse an access log, auto-detecting the format from the first non-empty
/// line: the native CSV header `epoch,client_key,url,user_agent,status`, or
/// otherwise NCSA common/combined. Unparseable lines are skipped and
/// counted; a log with no parseable records is rejected.
pub fn parse_log<R: BufRead>(mut reader: R) -> Result<ParsedLog> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| Error::Io {
        path: "<access log>".into(),
        source: e,
    })?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let parsed = match first {
        Some(line) if line.trim() == CSV_HEADER => parse_csv_log(&text),
        Some(_) => parse_ncsa_log(&text),
        None => return Err(Error::invalid("access log is empty")),
    };
    if parsed.records.is_empty() {
        return Err(Error::invalid(format!(
            "no parseable records in access log ({} lines skipped)",
            parsed.skipped
        )));
    }
    Ok(parsed)
}

pub fn parse_log_path(path: &Path) -> Result<ParsedLog> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_log(std::io::BufReader::new(f))
}

/// Write records in the native CSV format.
pub fn write_log_csv<W: Write>(records: &[AccessRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let wrap = |e| Error::Csv {
        path: "<access log>".into(),
        source: e,
    };
    wtr.write_record(CSV_HEADER.split(',')).map_err(wrap)?;
    for r in records {
        wtr.write_record([
            r.epoch.to_string(),
            r.client_key.clone(),
            r.url.clone(),
            r.user_agent.clone(),
            r.status.to_string(),
        ])
        .map_err(wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<access log>".into(),
        source: e,
    })?;
    Ok(())
}

/// Qualification thresholds for flagging a session as a dataset download.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionThresholds {
    /// Minimum fraction of distinct owned urls the session must request
    /// (inclusive).
    pub min_recall: f64,
    /// Minimum fraction of the session's requests that hit owned urls
    /// (inclusive).
    pub min_precision: f64,
    /// A quiet gap longer than this starts a new session.
    pub session_gap_seconds: i64,
}

impl Default for DetectionThresholds {
    fn default() -> Self {
        DetectionThresholds {
            min_recall: 0.9,
            min_precision: 0.5,
            session_gap_seconds: 86_400,
        }
    }
}

impl DetectionThresholds {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_recall) || !(0.0..=1.0).contains(&self.min_precision) {
            return Err(Error::invalid("detection thresholds must be in 0..=1"));
        }
        if self.session_gap_seconds <= 0 {
            return Err(Error::invalid("session gap must be positive"));
        }
        Ok(())
    }
}

/// Per-session coverage statistics for a flagged session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSession {
    pub client_key: String,
    pub start_epoch: i64,
    pub end_epoch: i64,
    pub n_requests: u64,
    pub n_owned_requests: u64,
    pub distinct_owned_urls: u64,
    pub recall: f64,
    pub precision: f64,
    /// Spearman rank correlation between request order and index order of
    /// the owned urls hit; `None` below two owned requests or when the hit
    /// sequence has no rank variance.
    pub spearman: Option<f64>,
    /// Whether the correlation exceeds 0.95 — a near-sequential sweep, the
    /// signature of naive index-order downloaders. Advisory only; it never
    /// gates flagging.
    pub sequential: Option<bool>,
}

/// Detector output over a whole log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub n_records: u64,
    pub n_clients: u64,
    pub n_sessions: u64,
    pub flagged: Vec<FlaggedSession>,
}

/// Spearman rank correlation of `values` against their observed order,
/// with average ranks for ties in `values`.
fn spearman_against_order(values: &[usize]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    // Rank the values with ties averaged.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    // Position ranks are 1..=n with no ties.
    let mean_pos = (n as f64 + 1.0) / 2.0;
    let mean_rank = ranks.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (pos, &rank) in ranks.iter().enumerate() {
        let dx = (pos + 1) as f64 - mean_pos;
        let dy = rank - mean_rank;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Split every client's records into sessions and flag the ones whose
/// owned-URL coverage looks like a dataset download. Records may arrive in
/// any order; sessions are computed on sorted copies.
pub fn detect_downloads(
    records: &[AccessRecord],
    owned: &OwnedUrlSet,
    thresholds: &DetectionThresholds,
) -> Result<DetectionReport> {
    thresholds.validate()?;
    if records.is_empty() {
        return Err(Error::invalid("no access records"));
    }
    let url_index: HashMap<&str, usize> = owned
        .urls
        .iter()
        .enumerate()
        .map(|(i, u)| (u.as_str(), i))
        .collect();
    let url_domains = owned.url_domains();

    let mut by_client: BTreeMap<&str, Vec<&AccessRecord>> = BTreeMap::new();
    for r in records {
        by_client.entry(&r.client_key).or_default().push(r);
    }

    let mut n_sessions = 0u64;
    let mut flagged = Vec::new();
    for (client, mut rows) in by_client {
        rows.sort_by_key(|r| r.epoch);
        let mut start = 0;
        for end in 1..=rows.len() {
            let boundary = end == rows.len()
                || rows[end].epoch - rows[end - 1].epoch > thresholds.session_gap_seconds;
            if !boundary {
                continue;
            }
            let session = &rows[start..end];
            start = end;
            n_sessions += 1;

            let mut hit_urls = BTreeSet::new();
            let mut hit_domains = BTreeSet::new();
            let mut owned_seq = Vec::new();
            for r in session {
                if let Some(&ord) = url_index.get(r.url.as_str()) {
                    hit_urls.insert(ord);
                    hit_domains.insert(url_domains[ord]);
                    owned_seq.push(ord);
                }
            }
            let recall = hit_urls.len() as f64 / owned.urls.len() as f64;
            let precision = owned_seq.len() as f64 / session.len() as f64;
            let all_domains = hit_domains.len() == owned.domains.len();
            if recall >= thresholds.min_recall
                && precision >= thresholds.min_precision
                && all_domains
            {
                let spearman = spearman_against_order(&owned_seq);
                flagged.push(FlaggedSession {
                    client_key: client.to_string(),
                    start_epoch: session[0].epoch,
                    end_epoch: session[session.len() - 1].epoch,
                    n_requests: session.len() as u64,
                    n_owned_requests: owned_seq.len() as u64,
                    distinct_owned_urls: hit_urls.len() as u64,
                    recall,
                    precision,
                    spearman,
                    sequential: spearman.map(|r| r > 0.95),
                });
            }
        }
    }
    Ok(DetectionReport {
        n_records: records.len() as u64,
        n_clients: by_client_len(records),
        n_sessions,
        flagged,
    })
}

fn by_client_len(records: &[AccessRecord]) -> u64 {
    records
        .iter()
        .map(|r| r.client_key.as_str())
        .collect::<BTreeSet<_>>()
        .len() as u64
}

/// One user agent's share of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UaCount {
    pub user_agent: String,
    pub requests: u64,
    pub fraction: f64,
}

/// Request counts per user agent, descending, ties broken by name. Empty
/// user agents report as `(none)`.
pub fn user_agent_summary(records: &[AccessRecord]) -> Result<Vec<UaCount>> {
    if records.is_empty() {
        return Err(Error::invalid("no access records"));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        let ua = if r.user_agent.is_empty() {
            "(none)"
        } else {
            &r.user_agent
        };
        *counts.entry(ua).or_default() += 1;
    }
    let total = records.len() as f64;
    let mut out: Vec<UaCount> = counts
        .into_iter()
        .map(|(ua, n)| UaCount {
            user_agent: ua.to_string(),
            requests: n,
            fraction: n as f64 / total,
        })
        .collect();
    out.sort_by(|a, b| {
        b.requests
            .cmp(&a.requests)
            .then_with(|| a.user_agent.cmp(&b.user_agent))
    });
    Ok(out)
}

/// Request volume over time: `(bin_start_epoch, requests)` per occupied
/// bin, ascending.
pub fn timeline(records: &[AccessRecord], bin_width_seconds: i64) -> Result<Vec<(i64, u64)>> {
    if bin_width_seconds <= 0 {
        return Err(Error::invalid("bin width must be positive"));
    }
    if records.is_empty() {
        return Err(Error::invalid("no access records"));
    }
    let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
    for r in records {
        *bins
            .entry(r.epoch.div_euclid(bin_width_seconds) * bin_width_seconds)
            .or_default() += 1;
    }
    Ok(bins.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn owned_two_domains() -> OwnedUrlSet {
        // 20 urls in index order: 19 under pics.example, 1 under cdn.example.
        let mut urls: Vec<String> = (0..19)
            .map(|i| format!("http://img.pics.example/{i}.jpg"))
            .collect();
        urls.push("http://cdn.example/last.jpg".to_string());
        OwnedUrlSet::new(
            vec!["pics.example".to_string(), "cdn.example".to_string()],
            urls,
        )
        .unwrap()
    }

    fn rec(epoch: i64, client: &str, url: &str) -> AccessRecord {
        AccessRecord {
            epoch,
            client_key: client.to_string(),
            url: url.to_string(),
            user_agent: "img2dataset/1.41".to_string(),
            status: 200,
        }
    }

    #[test]
    fn owned_set_validates_urls_against_domains() {
        assert!(OwnedUrlSet::new(vec!["a.example".into()], vec![]).is_err());
        assert!(OwnedUrlSet::new(vec![], vec!["http://a.example/x".into()]).is_err());
        assert!(OwnedUrlSet::new(
            vec!["a.example".into()],
            vec!["http://other.example/x".into()]
        )
        .is_err());
        assert!(OwnedUrlSet::new(
            vec!["a.example".into()],
            vec!["http://a.example/x".into(), "http://a.example/x".into()]
        )
        .is_err());
        // Subdomains are covered.
        assert!(OwnedUrlSet::new(
            vec!["a.example".into()],
            vec!["http://deep.sub.a.example/x".into()]
        )
        .is_ok());

        let parsed = read_owned_set(
            r#"{"domains": ["a.example"], "urls": ["http://a.example/1"]}"#.as_bytes(),
        )
        .unwrap();
        assert_eq!(parsed.urls.len(), 1);
    }

    #[test]
    fn csv_log_parses_and_counts_skips() {
        let text = "\
epoch,client_key,url,user_agent,status
100,10.0.0.1,http://a.example/1,img2dataset/1.41,200
not-a-number,10.0.0.1,http://a.example/2,ua,200
200,10.0.0.2,\"http://a.example/3?x=1,2\",Mozilla/5.0,404
";
        let parsed = parse_log(text.as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.skipped, 1);
        assert_eq!(parsed.records[1].url, "http://a.example/3?x=1,2");
        assert_eq!(parsed.records[1].status, 404);

        assert!(parse_log("".as_bytes()).is_err());
        let junk = "epoch,client_key,url,user_agent,status\nbad,row\n";
        assert!(parse_log(junk.as_bytes()).is_err());
    }

    #[test]
    fn ncsa_log_parses_common_and_combined() {
        let text = "\
127.0.0.1 - frank [10/Oct/2000:13:55:36 -0700] \"GET http://a.example/apache_pb.gif HTTP/1.0\" 200 2326
10.0.0.9 - - [10/Oct/2000:13:55:40 -0700] \"GET http://a.example/x.png HTTP/1.1\" 404 153 \"http://referrer.example/\" \"img2dataset/1.41\"
garbled line without structure
10.0.0.9 - - [99/Nope/2000:13:55:40 -0700] \"GET http://a.example/y.png HTTP/1.1\" 200 1
";
        let parsed = parse_log(text.as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.skipped, 2);
        // 2000-10-10T13:55:36-07:00 is 971211336 unix time.
        assert_eq!(parsed.records[0].epoch, 971_211_336);
        assert_eq!(parsed.records[0].client_key, "127.0.0.1");
        assert_eq!(parsed.records[0].url, "http://a.example/apache_pb.gif");
        assert_eq!(parsed.records[0].user_agent, "");
        assert_eq!(parsed.records[1].user_agent, "img2dataset/1.41");
    }

    #[test]
    fn log_csv_round_trips() {
        let records = vec![
            rec(100, "c1", "http://a.example/1"),
            rec(200, "c2", "http://a.example/2"),
        ];
        let mut buf = Vec::new();
        write_log_csv(&records, &mut buf).unwrap();
        let parsed = parse_log(buf.as_slice()).unwrap();
        assert_eq!(parsed.records, records);
        assert_eq!(parsed.skipped, 0);
    }

    #[test]
    fn sessions_split_only_on_gaps_beyond_threshold() {
        let owned =
            OwnedUrlSet::new(vec!["a.example".into()], vec!["http://a.example/1".into()]).unwrap();
        // Second burst exactly 86_400 s later: still one session.
        let records = vec![
            rec(0, "c", "http://a.example/1"),
            rec(86_400, "c", "http://a.example/1"),
        ];
        let report = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        assert_eq!(report.n_sessions, 1);
        // One second beyond the gap: two sessions.
        let records = vec![
            rec(0, "c", "http://a.example/1"),
            rec(86_401, "c", "http://a.example/1"),
        ];
        let report = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        assert_eq!(report.n_sessions, 2);
    }

    #[test]
    fn detector_flags_planted_crawler_and_spares_near_misses() {
        let owned = owned_two_domains();
        let mut records = Vec::new();
        // Planted crawler: 19 of 20 urls (recall 0.95) including the lone
        // cdn.example url, no extra requests (precision 1.0).
        for (i, u) in owned.urls.iter().enumerate().skip(1) {
            records.push(rec(1000 + i as i64, "crawler", u));
        }
        // Near miss 1: recall 17/20 = 0.85.
        for (i, u) in owned.urls.iter().enumerate().skip(3) {
            records.push(rec(1000 + i as i64, "partial", u));
        }
        // Near miss 2: full recall but diluted precision (20 owned, 21
        // junk: 20/41 < 0.5).
        for (i, u) in owned.urls.iter().enumerate() {
            records.push(rec(1000 + i as i64, "diluted", u));
        }
        for i in 0..21 {
            records.push(rec(2000 + i, "diluted", "http://unrelated.example/page"));
        }
        // Near miss 3: 19 of 20 urls but missing the cdn.example one, so a
        // whole owned domain goes unvisited.
        for (i, u) in owned.urls.iter().enumerate().take(19) {
            records.push(rec(1000 + i as i64, "onedomain", u));
        }
        // Browser noise.
        for i in 0..50 {
            records.push(rec(
                5000 + i,
                &format!("browser{i}"),
                "http://unrelated.example/",
            ));
        }

        let report = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        let flagged: Vec<&str> = report
            .flagged
            .iter()
            .map(|f| f.client_key.as_str())
            .collect();
        assert_eq!(flagged, vec!["crawler"]);
        let f = &report.flagged[0];
        assert_eq!(f.distinct_owned_urls, 19);
        assert_eq!(f.recall, 0.95);
        assert_eq!(f.precision, 1.0);
        // The crawl ran in index order.
        assert_eq!(f.spearman, Some(1.0));
        assert_eq!(f.sequential, Some(true));
    }

    #[test]
    fn qualification_boundaries_are_inclusive() {
        let owned = owned_two_domains();
        // Exactly recall 0.9 (18/20, keeping the cdn url) and exactly
        // precision 0.5 (18 owned + 18 junk).
        let mut records = Vec::new();
        for (i, u) in owned.urls.iter().enumerate().skip(2) {
            records.push(rec(1000 + i as i64, "edge", u));
        }
        for i in 0..18 {
            records.push(rec(3000 + i, "edge", "http://unrelated.example/x"));
        }
        let report = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        assert_eq!(report.flagged.len(), 1);
        assert_eq!(report.flagged[0].recall, 0.9);
        assert_eq!(report.flagged[0].precision, 0.5);
    }

    #[test]
    fn detection_is_invariant_to_record_order() {
        let owned = owned_two_domains();
        let mut records = Vec::new();
        for (i, u) in owned.urls.iter().enumerate() {
            records.push(rec(1000 + i as i64, "crawler", u));
        }
        for i in 0..5 {
            records.push(rec(4000 + i, "other", "http://unrelated.example/"));
        }
        let forward = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        records.reverse();
        let reversed = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn stricter_thresholds_only_shrink_the_flag_set() {
        let owned = owned_two_domains();
        let mut records = Vec::new();
        for (i, u) in owned.urls.iter().enumerate().skip(1) {
            records.push(rec(1000 + i as i64, "crawler", u));
        }
        let loose = DetectionThresholds::default();
        let tight = DetectionThresholds {
            min_recall: 0.99,
            ..loose
        };
        let loose_flags = detect_downloads(&records, &owned, &loose)
            .unwrap()
            .flagged
            .len();
        let tight_flags = detect_downloads(&records, &owned, &tight)
            .unwrap()
            .flagged
            .len();
        assert_eq!(loose_flags, 1);
        assert_eq!(tight_flags, 0);

        assert!(detect_downloads(
            &records,
            &owned,
            &DetectionThresholds {
                min_recall: 1.5,
                ..loose
            }
        )
        .is_err());
        assert!(detect_downloads(&[], &owned, &loose).is_err());
    }

    #[test]
    fn spearman_scores_order_and_handles_ties() {
        assert_eq!(spearman_against_order(&[0, 1, 2, 3]), Some(1.0));
        assert_eq!(spearman_against_order(&[3, 2, 1, 0]), Some(-1.0));
        assert_eq!(spearman_against_order(&[5]), None);
        assert_eq!(spearman_against_order(&[2, 2, 2]), None);
        // A shuffled sweep scores well below the sequential cutoff.
        let shuffled = [9, 1, 7, 0, 5, 3, 8, 2, 6, 4];
        let rho = spearman_against_order(&shuffled).unwrap();
        assert!(rho < 0.5, "{rho}");
        // Reversed crawl is flagged but not sequential.
        let owned = owned_two_domains();
        let mut records = Vec::new();
        for (i, u) in owned.urls.iter().enumerate().rev() {
            records.push(rec(1000 + (owned.urls.len() - i) as i64, "rev", u));
        }
        let report = detect_downloads(&records, &owned, &DetectionThresholds::default()).unwrap();
        assert_eq!(report.flagged[0].spearman, Some(-1.0));
        assert_eq!(report.flagged[0].sequential, Some(false));
    }

    #[test]
    fn ua_summary_matches_known_shares() {
        let mut records = Vec::new();
        for i in 0..77 {
            records.push(rec(i, "c", "http://a.example/x"));
        }
        for i in 0..23 {
            let mut r = rec(100 + i, "c", "http://a.example/x");
            r.user_agent = String::new();
            records.push(r);
        }
        let summary = user_agent_summary(&records).unwrap();
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[0].user_agent, "img2dataset/1.41");
        assert_eq!(summary[0].requests, 77);
        assert_eq!(summary[0].fraction, 0.77);
        assert_eq!(summary[1].user_agent, "(none)");
        assert_eq!(summary[1].fraction, 0.23);
        assert!(user_agent_summary(&[]).is_err());
    }

    #[test]
    fn timeline_bins_floor_correctly() {
        let records = vec![
            rec(-1, "c", "u"),
            rec(0, "c", "u"),
            rec(59, "c", "u"),
            rec(60, "c", "u"),
        ];
        let bins = timeline(&records, 60).unwrap();
        assert_eq!(bins, vec![(-60, 1), (0, 2), (60, 1)]);
        assert!(timeline(&records, 0).is_err());
    }
}
