//! Snapshot-time inference: recovering *when* each article of a periodic
//! dump was captured, using nothing but the public edit log and the dump's
//! captured revision ids.
//!
//! The capture process is modelled as a handful of parallel jobs, each
//! crawling its contiguous article-id shard linearly in id order. For every
//! article the edit log brackets the capture instant: the latest edit that
//! made it into the snapshot happened before capture, the earliest edit that
//! missed it happened after. Because each job moves forward in id order,
//! those per-article brackets can be tightened across neighbours into a
//! monotone envelope, fitted with a line per job, and extrapolated to the
//! next snapshot.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One revision from an edit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    #[serde(rename = "article")]
    pub article_id: u64,
    #[serde(rename = "rev")]
    pub revision_id: u64,
    #[serde(rename = "epoch")]
    pub edit_epoch: i64,
    pub comment: String,
}

/// Metadata of one snapshot: when the capture started, how the article-id
/// space was sharded into jobs, and which revision of each article was
/// captured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub snapshot_id: String,
    pub start_epoch: i64,
    /// Ascending article-id cut points. `k` cut points split the id space
    /// into `k + 1` jobs: job 0 is every id below `boundaries[0]`, the last
    /// job every id at or above `boundaries[k-1]`.
    pub boundaries: Vec<u64>,
    /// Captured revision id per article. Articles absent from the map were
    /// not captured at all.
    pub captured: BTreeMap<u64, u64>,
}

impl SnapshotMeta {
    pub fn validate(&self) -> Result<()> {
        if !self.boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("job boundaries must be strictly ascending"));
        }
        Ok(())
    }

    pub fn job_count(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn job_index(&self, article_id: u64) -> usize {
        job_index(&self.boundaries, article_id)
    }
}

/// Index of the job whose shard contains `article_id`.
pub fn job_index(boundaries: &[u64], article_id: u64) -> usize {
    boundaries.partition_point(|&b| b <= article_id)
}

/// Whether one edit made it into a given snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    /// The revision is at or below the article's captured revision.
    Included,
    /// The article was captured, but at an earlier revision.
    Excluded,
    /// The article does not appear in the snapshot at all.
    ArticleAbsent,
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Membership::Included => "included",
            Membership::Excluded => "excluded",
            Membership::ArticleAbsent => "article-absent",
        };
        f.write_str(s)
    }
}

/// Check the edit-log ordering contract: ascending `article_id`, strictly
/// ascending `revision_id` within an article (so no duplicate revisions).
pub(crate) fn validate_edit_order(edits: &[EditRecord]) -> Result<()> {
    for w in edits.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let ordered = a.article_id < b.article_id
            || (a.article_id == b.article_id && a.revision_id < b.revision_id);
        if !ordered {
            return Err(Error::invalid(format!(
                "edit log not sorted by (article, revision) at article {} revision {}",
                b.article_id, b.revision_id
            )));
        }
    }
    Ok(())
}

/// Classify every edit against a snapshot. Output is aligned with `edits`,
/// which must follow the (article, revision) ordering contract.
pub fn classify_membership(edits: &[EditRecord], meta: &SnapshotMeta) -> Result<Vec<Membership>> {
    validate_edit_order(edits)?;
    Ok(edits
        .iter()
        .map(|e| match meta.captured.get(&e.article_id) {
            None => Membership::ArticleAbsent,
            Some(&cap) if e.revision_id <= cap => Membership::Included,
            Some(_) => Membership::Excluded,
        })
        .collect())
}

/// Inferred bracket on one article's capture time.
///
/// `low <= t_capture <= high` always holds for the true capture instant.
/// The `*_seeded` flags record whether the corresponding side was determined
/// only by a seed value (the snapshot start below, the upper cap above)
/// rather than by any edit evidence in the job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleInterval {
    pub article_id: u64,
    pub job_index: usize,
    pub low: i64,
    pub high: i64,
    pub low_seeded: bool,
    pub high_seeded: bool,
}

/// Infer per-article capture intervals from classified edits.
///
/// Within each job, ordered by article id, the lower bound is the running
/// maximum of each article's latest included edit (seeded with the snapshot
/// start) and the upper bound is the suffix minimum of each article's
/// earliest excluded edit. The upper seed is the next snapshot's start when
/// the caller knows it; otherwise the largest observed edit epoch plus one
/// is used and the affected intervals carry `high_seeded = true`.
///
/// Intervals are produced for exactly the captured articles. Articles with
/// no edits inherit their whole bracket from neighbours. If any article's
/// evidence is self-contradictory — its earliest excluded edit precedes its
/// latest included one, or the cross-article envelope empties an interval —
/// the inference rejects with [`Error::Contradiction`].
pub fn infer_intervals(
    edits: &[EditRecord],
    memberships: &[Membership],
    meta: &SnapshotMeta,
    next_start: Option<i64>,
) -> Result<Vec<ArticleInterval>> {
    if edits.len() != memberships.len() {
        return Err(Error::invalid(format!(
            "{} memberships for {} edits",
            memberships.len(),
            edits.len()
        )));
    }
    meta.validate()?;
    if meta.captured.is_empty() {
        return Err(Error::invalid(
            "snapshot captured no articles; nothing to infer",
        ));
    }

    // Per-article constraints from the edit evidence.
    let mut latest_included: BTreeMap<u64, i64> = BTreeMap::new();
    let mut earliest_excluded: BTreeMap<u64, i64> = BTreeMap::new();
    let mut max_epoch: Option<i64> = None;
    for (e, m) in edits.iter().zip(memberships) {
        max_epoch = Some(max_epoch.map_or(e.edit_epoch, |x: i64| x.max(e.edit_epoch)));
        match m {
            Membership::Included => {
                latest_included
                    .entry(e.article_id)
                    .and_modify(|v| *v = (*v).max(e.edit_epoch))
                    .or_insert(e.edit_epoch);
            }
            Membership::Excluded => {
                earliest_excluded
                    .entry(e.article_id)
                    .and_modify(|v| *v = (*v).min(e.edit_epoch))
                    .or_insert(e.edit_epoch);
            }
            Membership::ArticleAbsent => {}
        }
    }
    for (id, &inc) in &latest_included {
        if let Some(&exc) = earliest_excluded.get(id) {
            if exc < inc {
                return Err(Error::contradiction(format!(
                    "article {id}: earliest excluded edit (epoch {exc}) precedes its latest included edit (epoch {inc})"
                )));
            }
        }
    }

    let cap = match next_start {
        Some(t) => t,
        None => match max_epoch {
            Some(t) => t + 1,
            None => return Err(Error::invalid(
                "cannot seed the upper bound: no edits observed and no next snapshot start given",
            )),
        },
    };

    // Captured articles, ascending, grouped into contiguous job runs.
    let articles: Vec<u64> = meta.captured.keys().copied().collect();
    let mut out: Vec<ArticleInterval> = Vec::with_capacity(articles.len());
    let mut i = 0;
    while i < articles.len() {
        let job = job_index(&meta.boundaries, articles[i]);
        let mut j = i;
        while j < articles.len() && job_index(&meta.boundaries, articles[j]) == job {
            j += 1;
        }
        let shard = &articles[i..j];

        // Forward pass: running max of included constraints.
        let mut lows = Vec::with_capacity(shard.len());
        let mut cur_low = meta.start_epoch;
        let mut low_data = false;
        for &id in shard {
            if let Some(&inc) = latest_included.get(&id) {
                cur_low = cur_low.max(inc);
                low_data = true;
            }
            lows.push((cur_low, !low_data));
        }
        // Backward pass: suffix min of excluded constraints.
        let mut highs = vec![(cap, true); shard.len()];
        let mut cur_high = cap;
        let mut high_data = false;
        for (k, &id) in shard.iter().enumerate().rev() {
            if let Some(&exc) = earliest_excluded.get(&id) {
                cur_high = cur_high.min(exc);
                high_data = true;
            }
            highs[k] = (cur_high, !high_data);
        }

        for (k, &id) in shard.iter().enumerate() {
            let (low, low_seeded) = lows[k];
            let (high, high_seeded) = highs[k];
            if low > high {
                return Err(Error::contradiction(format!(
                    "article {id}: inferred capture interval is empty ({low} > {high}); edit log and snapshot metadata are inconsistent"
                )));
            }
            out.push(ArticleInterval {
                article_id: id,
                job_index: job,
                low,
                high,
                low_seeded,
                high_seeded,
            });
        }
        i = j;
    }
    Ok(out)
}

/// Options for the per-job line fit.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Regression weight given to intervals with only one evidence-backed
    /// side (their finite endpoint serves as the target).
    pub single_sided_weight: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            single_sided_weight: 0.5,
        }
    }
}

/// Least-squares line through one job's capture intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobFit {
    pub job_index: usize,
    /// Seconds of capture time per unit of article id. Positive: the crawl
    /// moves forward.
    pub slope: f64,
    /// Fitted capture epoch at article id 0.
    pub intercept: f64,
    /// Mean over two-sided intervals of the distance from the fitted value
    /// to the farther interval endpoint — an upper bound on the mean true
    /// error, since the capture instant lies inside the interval.
    pub mean_abs_bound_error: f64,
    pub n_two_sided: u64,
    pub n_single_sided: u64,
}

impl JobFit {
    /// Fitted capture epoch for an article id.
    pub fn at(&self, article_id: u64) -> f64 {
        self.slope * article_id as f64 + self.intercept
    }
}

/// Fit one job's intervals with weighted least squares on the interval
/// midpoints. Intervals with exactly one evidence-backed side contribute
/// that endpoint at `single_sided_weight`; intervals with neither side
/// backed by evidence are skipped. At least two two-sided intervals are
/// required, and the fitted slope must come out positive.
pub fn fit_job(intervals: &[ArticleInterval], options: FitOptions) -> Result<JobFit> {
    if intervals.is_empty() {
        return Err(Error::invalid("no intervals to fit"));
    }
    let job = intervals[0].job_index;
    if intervals.iter().any(|iv| iv.job_index != job) {
        return Err(Error::invalid(
            "fit_job expects intervals from a single job",
        ));
    }
    if !(options.single_sided_weight.is_finite() && options.single_sided_weight >= 0.0) {
        return Err(Error::invalid(
            "single_sided_weight must be finite and nonnegative",
        ));
    }

    let mut points: Vec<(f64, f64, f64)> = Vec::with_capacity(intervals.len());
    let mut n_two_sided = 0u64;
    let mut n_single_sided = 0u64;
    for iv in intervals {
        match (iv.low_seeded, iv.high_seeded) {
            (false, false) => {
                n_two_sided += 1;
                points.push((
                    iv.article_id as f64,
                    (iv.low as f64 + iv.high as f64) / 2.0,
                    1.0,
                ));
            }
            (true, false) => {
                n_single_sided += 1;
                points.push((
                    iv.article_id as f64,
                    iv.high as f64,
                    options.single_sided_weight,
                ));
            }
            (false, true) => {
                n_single_sided += 1;
                points.push((
                    iv.article_id as f64,
                    iv.low as f64,
                    options.single_sided_weight,
                ));
            }
            (true, true) => {}
        }
    }
    if n_two_sided < 2 {
        return Err(Error::invalid(format!(
            "job {job}: need at least 2 two-sided intervals to fit, have {n_two_sided}"
        )));
    }

    let w_sum: f64 = points.iter().map(|p| p.2).sum();
    let mean_x: f64 = points.iter().map(|p| p.0 * p.2).sum::<f64>() / w_sum;
    let mean_y: f64 = points.iter().map(|p| p.1 * p.2).sum::<f64>() / w_sum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y, w) in &points {
        sxx += w * (x - mean_x) * (x - mean_x);
        sxy += w * (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::invalid(format!(
            "job {job}: all weighted intervals share one article id; slope undefined"
        )));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    if slope.is_nan() || slope <= 0.0 {
        return Err(Error::invalid(format!(
            "job {job}: fitted slope {slope} is not positive; capture order evidence is degenerate"
        )));
    }

    let mut err_sum = 0.0;
    for iv in intervals {
        if !iv.low_seeded && !iv.high_seeded {
            let fitted = slope * iv.article_id as f64 + intercept;
            err_sum += (fitted - iv.low as f64)
                .abs()
                .max((fitted - iv.high as f64).abs());
        }
    }
    Ok(JobFit {
        job_index: job,
        slope,
        intercept,
        mean_abs_bound_error: err_sum / n_two_sided as f64,
        n_two_sided,
        n_single_sided,
    })
}

/// Fit every job present in `intervals` (which must be grouped or sortable
/// by job). Fails if any represented job cannot be fitted.
pub fn fit_all_jobs(intervals: &[ArticleInterval], options: FitOptions) -> Result<Vec<JobFit>> {
    let mut by_job: BTreeMap<usize, Vec<ArticleInterval>> = BTreeMap::new();
    for iv in intervals {
        by_job.entry(iv.job_index).or_default().push(*iv);
    }
    by_job
        .into_values()
        .map(|ivs| fit_job(&ivs, options))
        .collect()
}

/// Predicted capture times for the next snapshot.
///
/// Predictions are whole seconds: the fractional fit offset is rounded once,
/// so shifting `next_start_epoch` by any integer shifts every prediction by
/// exactly that amount.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulePrediction {
    pub prev_start_epoch: i64,
    pub next_start_epoch: i64,
    /// (article_id, predicted capture epoch), ascending by article id.
    pub predictions: Vec<(u64, i64)>,
}

impl SchedulePrediction {
    pub fn get(&self, article_id: u64) -> Option<i64> {
        self.predictions
            .binary_search_by_key(&article_id, |&(id, _)| id)
            .ok()
            .map(|i| self.predictions[i].1)
    }
}

/// Extrapolate the previous snapshot's fits to the next one: each article is
/// predicted at the same offset from the next start that its fitted capture
/// had from the previous start.
///
/// `boundaries_override` lets the caller supply the next snapshot's job
/// boundaries when they are known to differ; by default the previous
/// sharding is assumed to repeat.
pub fn predict_next(
    prev_fits: &[JobFit],
    prev_meta: &SnapshotMeta,
    next_start_epoch: i64,
    articles: &[u64],
    boundaries_override: Option<&[u64]>,
) -> Result<SchedulePrediction> {
    let boundaries = boundaries_override.unwrap_or(&prev_meta.boundaries);
    let fit_by_job: BTreeMap<usize, &JobFit> = prev_fits.iter().map(|f| (f.job_index, f)).collect();
    let mut predictions = Vec::with_capacity(articles.len());
    for &id in articles {
        let job = job_index(boundaries, id);
        let fit = fit_by_job.get(&job).ok_or_else(|| {
            Error::invalid(format!("article {id} falls in job {job}, which has no fit"))
        })?;
        let offset = fit.at(id) - prev_meta.start_epoch as f64;
        predictions.push((id, next_start_epoch + offset.round() as i64));
    }
    predictions.sort_by_key(|&(id, _)| id);
    predictions.dedup_by_key(|&mut (id, _)| id);
    Ok(SchedulePrediction {
        prev_start_epoch: prev_meta.start_epoch,
        next_start_epoch,
        predictions,
    })
}

/// Signed prediction errors against a post-hoc fit of the realised snapshot,
/// plus their histogram. Positive error: the prediction ran later than the
/// realised capture (we overestimated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDistribution {
    pub bin_width: i64,
    pub n: u64,
    pub mean_error: f64,
    /// bin index -> count; a bin `k` covers `[k*bin_width, (k+1)*bin_width)`.
    pub bins: BTreeMap<i64, u64>,
    /// (article_id, error seconds) for every predicted article.
    pub errors: Vec<(u64, f64)>,
}

/// Compare predictions with a post-hoc per-job fit of the snapshot that
/// actually happened. Every predicted article must fall in a fitted job of
/// `next_meta`'s sharding.
pub fn prediction_error_distribution(
    prediction: &SchedulePrediction,
    posthoc_fits: &[JobFit],
    next_meta: &SnapshotMeta,
    bin_width: i64,
) -> Result<ErrorDistribution> {
    if bin_width <= 0 {
        return Err(Error::invalid("bin_width must be positive"));
    }
    if prediction.predictions.is_empty() {
        return Err(Error::invalid("no predictions to score"));
    }
    let fit_by_job: BTreeMap<usize, &JobFit> =
        posthoc_fits.iter().map(|f| (f.job_index, f)).collect();
    let mut errors = Vec::with_capacity(prediction.predictions.len());
    let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
    let mut sum = 0.0;
    for &(id, predicted) in &prediction.predictions {
        let job = next_meta.job_index(id);
        let fit = fit_by_job.get(&job).ok_or_else(|| {
            Error::invalid(format!(
                "article {id} falls in job {job}, which has no post-hoc fit"
            ))
        })?;
        let err = predicted as f64 - fit.at(id);
        sum += err;
        *bins
            .entry((err / bin_width as f64).floor() as i64)
            .or_insert(0) += 1;
        errors.push((id, err));
    }
    Ok(ErrorDistribution {
        bin_width,
        n: errors.len() as u64,
        mean_error: sum / errors.len() as f64,
        bins,
        errors,
    })
}

/// Recover job boundaries from classified edits alone: scan the per-article
/// earliest-excluded epochs in ascending article order and report each
/// article id where that upper-envelope evidence falls back by more than
/// `drop_threshold` seconds — the signature of a fresh job restarting at the
/// snapshot start.
pub fn detect_job_boundaries(
    edits: &[EditRecord],
    memberships: &[Membership],
    drop_threshold: i64,
) -> Result<Vec<u64>> {
    if edits.len() != memberships.len() {
        return Err(Error::invalid("memberships must align with edits"));
    }
    if drop_threshold <= 0 {
        return Err(Error::invalid("drop_threshold must be positive"));
    }
    let mut earliest_excluded: BTreeMap<u64, i64> = BTreeMap::new();
    for (e, m) in edits.iter().zip(memberships) {
        if *m == Membership::Excluded {
            earliest_excluded
                .entry(e.article_id)
                .and_modify(|v| *v = (*v).min(e.edit_epoch))
                .or_insert(e.edit_epoch);
        }
    }
    let mut boundaries = Vec::new();
    let mut prev: Option<i64> = None;
    for (&id, &epoch) in &earliest_excluded {
        if let Some(p) = prev {
            if epoch < p - drop_threshold {
                boundaries.push(id);
            }
        }
        prev = Some(epoch);
    }
    Ok(boundaries)
}

const MAX_IN_MEMORY_SORT: usize = 10_000_000;

fn read_edit_log_with_limit<R: Read>(reader: R, limit: usize) -> Result<Vec<EditRecord>> {
    let mut edits: Vec<EditRecord> = Vec::new();
    for (i, line) in std::io::BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: "<edit log>".into(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EditRecord = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: format!("<edit log> line {}", i + 1),
            source: e,
        })?;
        if record.revision_id == 0 {
            return Err(Error::invalid(format!(
                "<edit log> line {}: revision ids start at 1",
                i + 1
            )));
        }
        edits.push(record);
    }
    if validate_edit_order(&edits).is_err() {
        if edits.len() > limit {
            return Err(Error::invalid(format!(
                "edit log has {} records and is not sorted by (article, rev); resort it externally (e.g. `sort -t, ...` or a disk-backed merge) — in-memory sorting is capped at {limit} records",
                edits.len()
            )));
        }
        edits.sort_by_key(|e| (e.article_id, e.revision_id));
        // A duplicate (article, revision) pair survives sorting; catch it.
        validate_edit_order(&edits)?;
    }
    Ok(edits)
}

/// Read a JSONL edit log (`{"article":…,"rev":…,"epoch":…,"comment":"…"}`
/// per line). Input unsorted by (article, rev) is sorted in memory up to ten
/// million records; larger unsorted logs are rejected with instructions to
/// resort externally.
pub fn read_edit_log<R: Read>(reader: R) -> Result<Vec<EditRecord>> {
    read_edit_log_with_limit(reader, MAX_IN_MEMORY_SORT)
}

/// Read an edit log from a file path.
pub fn read_edit_log_path(path: &Path) -> Result<Vec<EditRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_edit_log(std::io::BufReader::new(f))
}

/// Write an edit log as JSONL.
pub fn write_edit_log<W: Write>(edits: &[EditRecord], mut writer: W) -> Result<()> {
    for e in edits {
        let line = serde_json::to_string(e).map_err(|err| Error::Json {
            path: "<edit log>".into(),
            source: err,
        })?;
        writeln!(writer, "{line}").map_err(|err| Error::Io {
            path: "<edit log>".into(),
            source: err,
        })?;
    }
    Ok(())
}

/// Read snapshot metadata JSON.
pub fn read_snapshot_meta<R: Read>(reader: R) -> Result<SnapshotMeta> {
    let meta: SnapshotMeta = serde_json::from_reader(reader).map_err(|e| Error::Json {
        path: "<snapshot meta>".into(),
        source: e,
    })?;
    meta.validate()?;
    Ok(meta)
}

/// Read snapshot metadata from a file path.
pub fn read_snapshot_meta_path(path: &Path) -> Result<SnapshotMeta> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_snapshot_meta(std::io::BufReader::new(f))
}

/// Write snapshot metadata JSON.
pub fn write_snapshot_meta<W: Write>(meta: &SnapshotMeta, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, meta).map_err(|e| Error::Json {
        path: "<snapshot meta>".into(),
        source: e,
    })
}
