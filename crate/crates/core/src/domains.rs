//! Domain-level audit of a dataset index: which registrable domains back the
//! index's URLs, which of them have lapsed, what re-registering them would
//! cost, and how much of the index an attacker's budget buys.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{DatasetIndex, VerificationOutcome};

/// Result of a single DNS probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeResult {
    Resolved,
    Nxdomain,
    Timeout,
}

impl std::str::FromStr for ProbeResult {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resolved" => Ok(ProbeResult::Resolved),
            "nxdomain" => Ok(ProbeResult::Nxdomain),
            "timeout" => Ok(ProbeResult::Timeout),
            other => Err(Error::invalid(format!("unknown probe result {other:?}"))),
        }
    }
}

impl std::fmt::Display for ProbeResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProbeResult::Resolved => "resolved",
            ProbeResult::Nxdomain => "nxdomain",
            ProbeResult::Timeout => "timeout",
        })
    }
}

/// One DNS lookup of `domain` from a named vantage point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolverProbe {
    pub domain: String,
    pub vantage: String,
    pub probe_epoch: i64,
    pub result: ProbeResult,
}

/// Expiration verdict for one domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpirationClass {
    Live,
    Expired,
    Inconclusive,
}

impl std::fmt::Display for ExpirationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExpirationClass::Live => "live",
            ExpirationClass::Expired => "expired",
            ExpirationClass::Inconclusive => "inconclusive",
        })
    }
}

/// Evidence thresholds for calling a domain expired. The defaults demand
/// four NXDOMAIN answers spread over at least two vantage points and two
/// distinct UTC days — one resolver hiccup or one bad day must not flag a
/// live domain.
#[derive(Debug, Clone, Copy)]
pub struct ExpirationPolicy {
    pub min_probes: usize,
    pub min_vantages: usize,
    pub min_days: usize,
}

impl Default for ExpirationPolicy {
    fn default() -> Self {
        ExpirationPolicy {
            min_probes: 4,
            min_vantages: 2,
            min_days: 2,
        }
    }
}

/// Classify one domain's probes.
///
/// Any successful resolution means `Live`. `Expired` requires *every* probe
/// to be NXDOMAIN and the evidence to meet the policy thresholds; anything
/// else (timeouts mixed in, too few probes, too little spread) is
/// `Inconclusive`.
pub fn classify_expiration(
    probes: &[ResolverProbe],
    policy: ExpirationPolicy,
) -> Result<ExpirationClass> {
    if probes.is_empty() {
        return Err(Error::invalid("no probes for domain"));
    }
    let domain = &probes[0].domain;
    if probes.iter().any(|p| p.domain != *domain) {
        return Err(Error::invalid(
            "classify_expiration expects probes for a single domain",
        ));
    }
    if probes.iter().any(|p| p.result == ProbeResult::Resolved) {
        return Ok(ExpirationClass::Live);
    }
    let all_nx = probes.iter().all(|p| p.result == ProbeResult::Nxdomain);
    let vantages: BTreeSet<&str> = probes.iter().map(|p| p.vantage.as_str()).collect();
    let days: BTreeSet<i64> = probes
        .iter()
        .map(|p| p.probe_epoch.div_euclid(86_400))
        .collect();
    if all_nx
        && probes.len() >= policy.min_probes
        && vantages.len() >= policy.min_vantages
        && days.len() >= policy.min_days
    {
        Ok(ExpirationClass::Expired)
    } else {
        Ok(ExpirationClass::Inconclusive)
    }
}

/// Group probes by domain and classify each group.
pub fn audit_domains(
    probes: &[ResolverProbe],
    policy: ExpirationPolicy,
) -> Result<Vec<(String, ExpirationClass)>> {
    let mut by_domain: BTreeMap<&str, Vec<ResolverProbe>> = BTreeMap::new();
    for p in probes {
        by_domain
            .entry(p.domain.as_str())
            .or_default()
            .push(p.clone());
    }
    by_domain
        .into_iter()
        .map(|(d, ps)| Ok((d.to_string(), classify_expiration(&ps, policy)?)))
        .collect()
}

/// Registration status of a domain in a purchase survey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainStatus {
    Live,
    Expired,
    Buyable,
}

impl std::str::FromStr for DomainStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(DomainStatus::Live),
            "expired" => Ok(DomainStatus::Expired),
            "buyable" => Ok(DomainStatus::Buyable),
            other => Err(Error::invalid(format!("unknown domain status {other:?}"))),
        }
    }
}

impl std::fmt::Display for DomainStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DomainStatus::Live => "live",
            DomainStatus::Expired => "expired",
            DomainStatus::Buyable => "buyable",
        })
    }
}

/// One domain backing part of a dataset index. `price_usd_cents` is present
/// exactly when a registrar explicitly lists the domain for sale
/// (`Buyable`); merely-expired domains in squatter limbo carry no price.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub domain: String,
    /// How many index entries point at this domain (at least one, or the
    /// record would not exist).
    pub image_count: u64,
    pub status: DomainStatus,
    pub price_usd_cents: Option<u64>,
}

impl DomainRecord {
    pub fn validate(&self) -> Result<()> {
        if self.image_count == 0 {
            return Err(Error::invalid(format!(
                "domain {}: image_count must be at least 1",
                self.domain
            )));
        }
        match (self.status, self.price_usd_cents) {
            (DomainStatus::Buyable, None) => Err(Error::invalid(format!(
                "domain {}: buyable records need a price",
                self.domain
            ))),
            (DomainStatus::Buyable, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::invalid(format!(
                "domain {}: only buyable records carry a price",
                self.domain
            ))),
            (_, None) => Ok(()),
        }
    }
}

/// Outcome of budget-constrained domain shopping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurchasePlan {
    pub selected: Vec<DomainRecord>,
    pub total_cost_cents: u64,
    pub controlled_images: u64,
    /// `controlled_images / index_size`.
    pub controlled_fraction: f64,
}

/// Descending images-per-dollar order, with lexicographic domain order as
/// the deterministic tiebreak. Compared by cross-multiplication so zero
/// prices (infinite value) and large counts stay exact.
fn value_order(a: &DomainRecord, b: &DomainRecord) -> std::cmp::Ordering {
    let pa = a.price_usd_cents.unwrap_or(0) as u128;
    let pb = b.price_usd_cents.unwrap_or(0) as u128;
    let lhs = a.image_count as u128 * pb; // a's value * b's denominator
    let rhs = b.image_count as u128 * pa;
    rhs.cmp(&lhs).then_with(|| a.domain.cmp(&b.domain))
}

/// Spend `budget_cents` on buyable domains, preferring the most images per
/// dollar and skipping (not stopping at) anything unaffordable.
///
/// `index_size` is the total entry count of the audited index and must be at
/// least the records' combined image count.
pub fn plan_purchase(
    records: &[DomainRecord],
    index_size: u64,
    budget_cents: u64,
) -> Result<PurchasePlan> {
    if index_size == 0 {
        return Err(Error::invalid("index_size must be positive"));
    }
    for r in records {
        r.validate()?;
    }
    let covered: u64 = records
        .iter()
        .map(|r| r.image_count)
        .try_fold(0u64, |acc, c| acc.checked_add(c))
        .ok_or_else(|| Error::invalid("image counts overflow"))?;
    if covered > index_size {
        return Err(Error::invalid(format!(
            "records cover {covered} images but the index only has {index_size} entries"
        )));
    }

    let mut buyable: Vec<&DomainRecord> = records
        .iter()
        .filter(|r| r.status == DomainStatus::Buyable)
        .collect();
    buyable.sort_by(|a, b| value_order(a, b));

    let mut selected = Vec::new();
    let mut total_cost = 0u64;
    let mut images = 0u64;
    for r in buyable {
        let price = r.price_usd_cents.expect("buyable implies priced");
        if total_cost + price <= budget_cents {
            total_cost += price;
            images += r.image_count;
            selected.push(r.clone());
        }
    }
    Ok(PurchasePlan {
        selected,
        total_cost_cents: total_cost,
        controlled_images: images,
        controlled_fraction: images as f64 / index_size as f64,
    })
}

/// Evaluate [`plan_purchase`] over an ascending budget grid, yielding
/// `(budget_cents, controlled_fraction)` points.
pub fn cost_curve(
    records: &[DomainRecord],
    index_size: u64,
    budgets: &[u64],
) -> Result<Vec<(u64, f64)>> {
    if budgets.is_empty() {
        return Err(Error::invalid("budget grid is empty"));
    }
    if !budgets.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("budget grid must be strictly ascending"));
    }
    budgets
        .iter()
        .map(|&b| {
            Ok((
                b,
                plan_purchase(records, index_size, b)?.controlled_fraction,
            ))
        })
        .collect()
}

/// A domain whose modified content coincides with an ownership change after
/// the index was released — the forensic signature of a split-view attack,
/// as opposed to benign rot (re-encoded images, lapsed-and-renewed DNS under
/// the same owner).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedDomain {
    pub domain: String,
    pub modified_count: u64,
    pub purchase_epoch: i64,
}

/// Cross-reference per-entry verification outcomes with domain whois
/// purchase dates: flag every registrable domain serving modified content
/// that changed hands *after* the index release. Sorted by modified count
/// descending, then domain.
pub fn attack_signature_scan(
    index: &DatasetIndex,
    outcomes: &[VerificationOutcome],
    whois_purchase: &BTreeMap<String, i64>,
    rules: &SuffixRules,
) -> Result<Vec<FlaggedDomain>> {
    if index.entries.len() != outcomes.len() {
        return Err(Error::invalid("outcomes must align with index entries"));
    }
    let mut modified_per_domain: BTreeMap<String, u64> = BTreeMap::new();
    for (entry, outcome) in index.entries.iter().zip(outcomes) {
        if *outcome != VerificationOutcome::Modified {
            continue;
        }
        // The index validated URL syntax already; hosts that are themselves
        // public suffixes have no registrable domain and cannot be traded,
        // so they cannot carry this signature.
        if let Ok(domain) = extract_registrable_domain(&entry.url, rules) {
            *modified_per_domain.entry(domain).or_insert(0) += 1;
        }
    }
    let mut flagged: Vec<FlaggedDomain> = modified_per_domain
        .into_iter()
        .filter_map(|(domain, count)| {
            whois_purchase.get(&domain).and_then(|&purchase_epoch| {
                (purchase_epoch > index.release_epoch).then_some(FlaggedDomain {
                    domain,
                    modified_count: count,
                    purchase_epoch,
                })
            })
        })
        .collect();
    flagged.sort_by(|a, b| {
        b.modified_count
            .cmp(&a.modified_count)
            .then_with(|| a.domain.cmp(&b.domain))
    });
    Ok(flagged)
}

/// Fraction of each upstream corpus that `poison_bytes` of attacker text
/// represents, clamped to 1.0. Curated subsets of a crawl can be vastly
/// smaller than the crawl itself, so the same payload is amplified in any
/// model trained on the subset.
pub fn amplification(poison_bytes: u64, corpora: &[(String, u64)]) -> Result<Vec<(String, f64)>> {
    corpora
        .iter()
        .map(|(name, size)| {
            if *size == 0 {
                return Err(Error::invalid(format!("corpus {name} has zero size")));
            }
            let frac = (poison_bytes as f64 / *size as f64).min(1.0);
            Ok((name.clone(), frac))
        })
        .collect()
}

/// Minimal public-suffix rule set: exact rules, `*.` wildcards, and `!`
/// exceptions, matched per the standard prevailing-rule algorithm (longest
/// match wins, exceptions beat wildcards, unknown TLDs fall back to the
/// one-label default rule).
#[derive(Debug, Clone, Default)]
pub struct SuffixRules {
    exact: BTreeSet<String>,
    /// `"ck"` here means the rule `*.ck`.
    wildcard_bases: BTreeSet<String>,
    exceptions: BTreeSet<String>,
}

impl SuffixRules {
    pub fn new(rules: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut out = SuffixRules::default();
        for raw in rules {
            let rule = raw.trim().to_lowercase();
            if rule.is_empty() {
                continue;
            }
            if rule.split('.').any(|l| l.is_empty() && l != "*") {
                return Err(Error::invalid(format!("malformed suffix rule {raw:?}")));
            }
            if let Some(rest) = rule.strip_prefix('!') {
                if rest.is_empty() {
                    return Err(Error::invalid("empty exception rule"));
                }
                out.exceptions.insert(rest.to_string());
            } else if let Some(base) = rule.strip_prefix("*.") {
                if base.is_empty() {
                    return Err(Error::invalid("wildcard rule needs a base"));
                }
                out.wildcard_bases.insert(base.to_string());
            } else {
                out.exact.insert(rule);
            }
        }
        Ok(out)
    }

    /// Compact built-in subset of the public-suffix list: the TLDs that
    /// dominate web-scale image datasets plus the classic multi-label and
    /// wildcard cases, enough for tests and synthetic corpora. Real audits
    /// should load the full list with [`read_suffix_rules`].
    pub fn builtin() -> Self {
        let rules = [
            "com", "net", "org", "edu", "gov", "mil", "int", "io", "co", "ai", "app", "dev",
            "info", "biz", "us", "eu", "uk", "co.uk", "org.uk", "ac.uk", "gov.uk", "de", "fr",
            "nl", "it", "es", "pl", "se", "ch", "ca", "ru", "jp", "co.jp", "ne.jp", "au", "com.au",
            "br", "com.br", "cn", "com.cn", "*.ck", "!www.ck",
        ];
        SuffixRules::new(rules.into_iter().map(String::from)).expect("builtin rules are valid")
    }

    /// Number of labels in the prevailing public suffix for `labels`
    /// (host split on dots, in order), or `None` if no rule matches and the
    /// default one-label rule applies.
    fn suffix_len(&self, labels: &[&str]) -> usize {
        // Exceptions first: an exception rule matching the host makes its
        // *parent* the public suffix.
        for take in (1..=labels.len()).rev() {
            let candidate = labels[labels.len() - take..].join(".");
            if self.exceptions.contains(&candidate) {
                return take - 1;
            }
        }
        let mut best = 0usize;
        for take in 1..=labels.len() {
            let candidate = labels[labels.len() - take..].join(".");
            if self.exact.contains(&candidate) {
                best = best.max(take);
            }
        }
        // A wildcard `*.base` matches base plus exactly one more label.
        for take in 1..labels.len() {
            let base = labels[labels.len() - take..].join(".");
            if self.wildcard_bases.contains(&base) {
                best = best.max(take + 1);
            }
        }
        if best == 0 {
            // Default rule `*`: the rightmost label is the suffix.
            best = 1;
        }
        best
    }
}

/// Extract the registrable domain (public suffix plus one label) from an
/// absolute URL. IP-literal hosts are returned verbatim. URLs that do not
/// parse, have no host, or whose host *is* a public suffix are rejected.
pub fn extract_registrable_domain(url_str: &str, rules: &SuffixRules) -> Result<String> {
    let parsed = url::Url::parse(url_str)
        .map_err(|e| Error::invalid(format!("bad url {url_str:?}: {e}")))?;
    let host = match parsed.host() {
        None => return Err(Error::invalid(format!("url {url_str:?} has no host"))),
        Some(url::Host::Ipv4(ip)) => return Ok(ip.to_string()),
        Some(url::Host::Ipv6(ip)) => return Ok(ip.to_string()),
        Some(url::Host::Domain(d)) => d.to_lowercase(),
    };
    let host = host.trim_end_matches('.');
    if host.is_empty() {
        return Err(Error::invalid(format!("url {url_str:?} has an empty host")));
    }
    let labels: Vec<&str> = host.split('.').collect();
    let suffix_len = rules.suffix_len(&labels);
    if labels.len() <= suffix_len {
        return Err(Error::invalid(format!(
            "host {host:?} is a public suffix; it has no registrable domain"
        )));
    }
    Ok(labels[labels.len() - suffix_len - 1..].join("."))
}

/// Read suffix rules, one per line; `//` and `#` start comments (the
/// public-suffix list's own format uses `//`).
pub fn read_suffix_rules<R: Read>(reader: R) -> Result<SuffixRules> {
    let mut rules = Vec::new();
    for line in std::io::BufReader::new(reader).lines() {
        let line = line.map_err(|e| Error::Io {
            path: "<suffix rules>".into(),
            source: e,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("//") || trimmed.starts_with('#') {
            continue;
        }
        rules.push(trimmed.to_string());
    }
    SuffixRules::new(rules)
}

#[derive(Debug, Deserialize, Serialize)]
struct ProbeCsvRow {
    domain: String,
    vantage: String,
    epoch: i64,
    result: String,
}

/// Read resolver probes from CSV with header `domain,vantage,epoch,result`.
pub fn read_probes_csv<R: Read>(reader: R) -> Result<Vec<ResolverProbe>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<ProbeCsvRow>() {
        let row = row.map_err(|e| Error::Csv {
            path: "<probes csv>".into(),
            source: e,
        })?;
        out.push(ResolverProbe {
            domain: row.domain,
            vantage: row.vantage,
            probe_epoch: row.epoch,
            result: row.result.parse()?,
        });
    }
    Ok(out)
}

#[derive(Debug, Deserialize, Serialize)]
struct DomainCsvRow {
    domain: String,
    image_count: u64,
    status: String,
    price_cents: Option<u64>,
}

/// Read domain records from CSV with header
/// `domain,image_count,status,price_cents` (price empty unless buyable).
pub fn read_domain_records_csv<R: Read>(reader: R) -> Result<Vec<DomainRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<DomainCsvRow>() {
        let row = row.map_err(|e| Error::Csv {
            path: "<domain records csv>".into(),
            source: e,
        })?;
        let record = DomainRecord {
            domain: row.domain,
            image_count: row.image_count,
            status: row.status.parse()?,
            price_usd_cents: row.price_cents,
        };
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

/// Read whois ownership-change dates from CSV with header
/// `domain,purchase_epoch`.
pub fn read_whois_csv<R: Read>(reader: R) -> Result<BTreeMap<String, i64>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for row in rdr.deserialize::<(String, i64)>() {
        let (domain, epoch) = row.map_err(|e| Error::Csv {
            path: "<whois csv>".into(),
            source: e,
        })?;
        if out.insert(domain.clone(), epoch).is_some() {
            return Err(Error::invalid(format!("duplicate whois row for {domain}")));
        }
    }
    Ok(out)
}

/// Read corpus sizes from CSV with header `corpus,bytes`.
pub fn read_corpora_csv<R: Read>(reader: R) -> Result<Vec<(String, u64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<(String, u64)>() {
        let pair = row.map_err(|e| Error::Csv {
            path: "<corpora csv>".into(),
            source: e,
        })?;
        out.push(pair);
    }
    if out.is_empty() {
        return Err(Error::invalid("corpora csv has no rows"));
    }
    Ok(out)
}

/// Write a purchase plan: one CSV row per selected domain, then use the
/// plan's scalar fields separately.
pub fn write_plan_csv<W: Write>(plan: &PurchasePlan, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["domain", "image_count", "price_cents"])
        .map_err(|e| Error::Csv {
            path: "<plan csv>".into(),
            source: e,
        })?;
    for r in &plan.selected {
        wtr.write_record([
            r.domain.clone(),
            r.image_count.to_string(),
            r.price_usd_cents.unwrap_or(0).to_string(),
        ])
        .map_err(|e| Error::Csv {
            path: "<plan csv>".into(),
            source: e,
        })?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<plan csv>".into(),
        source: e,
    })?;
    Ok(())
}

/// Read suffix rules from a file path.
pub fn read_suffix_rules_path(path: &Path) -> Result<SuffixRules> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_suffix_rules(std::io::BufReader::new(f))
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn record_strategy() -> impl Strategy<Value = DomainRecord> {
        ("[a-j]{1,6}", 1u64..2000, proptest::option::of(0u64..5000)).prop_map(
            |(name, images, price)| DomainRecord {
                domain: format!("{name}.com"),
                image_count: images,
                status: if price.is_some() {
                    DomainStatus::Buyable
                } else {
                    DomainStatus::Expired
                },
                price_usd_cents: price,
            },
        )
    }

    /// Characterisation oracle for the skip-walk: walk the value ordering
    /// and check set membership by re-deriving affordability from scratch
    /// with rational arithmetic on a subset bitmask search.
    fn oracle_selection(records: &[DomainRecord], budget: u64) -> Vec<String> {
        let mut buyable: Vec<&DomainRecord> = records
            .iter()
            .filter(|r| r.status == DomainStatus::Buyable)
            .collect();
        // Independent ordering implementation: sort by (-count/price, domain)
        // using f64 with an exact integer tiebreak fallback.
        buyable.sort_by(|a, b| {
            let va = (a.image_count as u128, a.price_usd_cents.unwrap() as u128);
            let vb = (b.image_count as u128, b.price_usd_cents.unwrap() as u128);
            // a before b iff va.0/va.1 > vb.0/vb.1  <=>  va.0*vb.1 > vb.0*va.1
            (vb.0 * va.1)
                .cmp(&(va.0 * vb.1))
                .then(a.domain.cmp(&b.domain))
        });
        let mut spent = 0u64;
        let mut out = Vec::new();
        for r in buyable {
            let p = r.price_usd_cents.unwrap();
            if spent + p <= budget {
                spent += p;
                out.push(r.domain.clone());
            }
        }
        out
    }

    proptest! {
        #[test]
        fn plan_never_exceeds_budget_and_matches_oracle(
            mut records in proptest::collection::vec(record_strategy(), 0..12),
            budget in 0u64..20_000,
        ) {
            // De-duplicate domains; the map keeps the last occurrence.
            let mut by_name = std::collections::BTreeMap::new();
            for r in records.drain(..) {
                by_name.insert(r.domain.clone(), r);
            }
            let records: Vec<DomainRecord> = by_name.into_values().collect();
            let total_images: u64 = records.iter().map(|r| r.image_count).sum();
            let index_size = total_images.max(1);
            let plan = plan_purchase(&records, index_size, budget).unwrap();
            prop_assert!(plan.total_cost_cents <= budget);
            let got: Vec<String> = plan.selected.iter().map(|r| r.domain.clone()).collect();
            prop_assert_eq!(got, oracle_selection(&records, budget));
            let images: u64 = plan.selected.iter().map(|r| r.image_count).sum();
            prop_assert_eq!(images, plan.controlled_images);
        }

        #[test]
        fn controlled_fraction_is_monotone_in_budget(
            records in proptest::collection::vec(record_strategy(), 1..10),
            budgets in proptest::collection::btree_set(0u64..10_000, 2..6),
        ) {
            let mut by_name = std::collections::BTreeMap::new();
            for r in records {
                by_name.insert(r.domain.clone(), r);
            }
            let records: Vec<DomainRecord> = by_name.into_values().collect();
            let total_images: u64 = records.iter().map(|r| r.image_count).sum();
            let grid: Vec<u64> = budgets.into_iter().collect();
            let curve = cost_curve(&records, total_images.max(1), &grid).unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1].1 >= w[0].1);
            }
        }
    }
}
