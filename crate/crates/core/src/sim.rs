//! Discrete-event simulator: a synthetic wiki with a known capture schedule,
//! used as ground truth to validate every analytic estimate in this crate.
//!
//! The simulated world has `n_articles` articles crawled by `n_jobs`
//! parallel jobs in ascending id order at a constant per-job rate, twice
//! (two snapshots). Benign edits arrive per article as a Poisson process
//! over the simulated window; each non-initial edit may instead be a revert
//! of its predecessor, in which case its timestamp is the predecessor's
//! plus a delay drawn from the configured distribution — so the delays a
//! scan of the synthetic log learns are true samples of that distribution.
//!
//! Randomness: Xoshiro256++ seeded from the config's 64-bit seed via
//! SplitMix64 (the `rand_xoshiro` implementation), with all variate
//! transformations written out here (multiply-shift range reduction,
//! inverse-CDF exponential, chunked Knuth Poisson). Identical seeds give
//! byte-identical worlds across platforms and releases.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::attack::{sweep, AttackArticle, SweepResult};
use crate::error::{Error, Result};
use crate::reversion::{build_cdf, reversion_durations, RevertMarkerSet};
use crate::timing::{
    classify_membership, fit_all_jobs, infer_intervals, predict_next,
    prediction_error_distribution, ArticleInterval, EditRecord, FitOptions, JobFit,
    SchedulePrediction, SnapshotMeta,
};

/// Revert-delay model for the simulated moderators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DelayDistribution {
    Exponential {
        mean_seconds: f64,
    },
    /// Sampled uniformly with replacement from an observed multiset.
    Empirical {
        durations: Vec<u64>,
    },
}

impl DelayDistribution {
    fn validate(&self) -> Result<()> {
        match self {
            DelayDistribution::Exponential { mean_seconds } => {
                if !(mean_seconds.is_finite() && *mean_seconds > 0.0) {
                    return Err(Error::invalid("exponential delay mean must be positive"));
                }
            }
            DelayDistribution::Empirical { durations } => {
                if durations.is_empty() {
                    return Err(Error::invalid(
                        "empirical delay distribution needs at least one duration",
                    ));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn sample(&self, rng: &mut Xoshiro256PlusPlus) -> f64 {
        match self {
            DelayDistribution::Exponential { mean_seconds } => exponential(rng, *mean_seconds),
            DelayDistribution::Empirical { durations } => {
                durations[uniform_below(rng, durations.len() as u64) as usize] as f64
            }
        }
    }
}

/// Full simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_articles: u64,
    pub n_jobs: u64,
    /// Articles crawled per second by each job in the first snapshot.
    pub crawl_rate: f64,
    /// Fractional rate change for the second snapshot: the second crawl
    /// runs at `crawl_rate * (1 + rate_drift)`.
    pub rate_drift: f64,
    /// Mean benign edits per article per inter-snapshot period.
    pub edit_rate: f64,
    /// Probability that a non-initial edit is a revert of its predecessor.
    pub revert_probability: f64,
    pub reversion_delay: DelayDistribution,
    /// Start epochs of the two snapshots.
    pub snapshot_starts: (i64, i64),
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_articles == 0 {
            return Err(Error::invalid("n_articles must be positive"));
        }
        if self.n_jobs == 0 || self.n_jobs > self.n_articles {
            return Err(Error::invalid("n_jobs must be in 1..=n_articles"));
        }
        if !(self.crawl_rate.is_finite() && self.crawl_rate > 0.0) {
            return Err(Error::invalid("crawl_rate must be positive"));
        }
        if !(self.rate_drift.is_finite() && self.rate_drift > -1.0) {
            return Err(Error::invalid("rate_drift must exceed -1"));
        }
        if !(self.edit_rate.is_finite() && (0.0..=1000.0).contains(&self.edit_rate)) {
            return Err(Error::invalid("edit_rate must be in 0..=1000"));
        }
        if !(0.0..=1.0).contains(&self.revert_probability) {
            return Err(Error::invalid("revert_probability must be in 0..=1"));
        }
        self.reversion_delay.validate()?;
        let (s1, s2) = self.snapshot_starts;
        if s2 <= s1 {
            return Err(Error::invalid("second snapshot must start after the first"));
        }
        let period = (s2 - s1) as f64;
        let max_chunk = self.n_articles.div_ceil(self.n_jobs) as f64;
        if max_chunk / self.crawl_rate > period {
            return Err(Error::invalid(
                "first crawl would not finish before the second starts; raise crawl_rate or spread the snapshots",
            ));
        }
        if max_chunk / (self.crawl_rate * (1.0 + self.rate_drift)) > period {
            return Err(Error::invalid(
                "second crawl would not finish within one period after its start",
            ));
        }
        Ok(())
    }

    fn period(&self) -> i64 {
        self.snapshot_starts.1 - self.snapshot_starts.0
    }
}

/// A generated world: the synthetic edit log, both snapshots' metadata, and
/// the ground-truth capture times the analyses never get to see.
#[derive(Debug, Clone, PartialEq)]
pub struct SimWorld {
    pub config: SimConfig,
    pub edits: Vec<EditRecord>,
    pub meta1: SnapshotMeta,
    pub meta2: SnapshotMeta,
    /// True capture epoch per article id in snapshot 1 / snapshot 2.
    pub truth1: Vec<f64>,
    pub truth2: Vec<f64>,
    /// End of the simulated window (one period after the second snapshot
    /// starts); valid as an upper seed for second-snapshot inference.
    pub horizon: i64,
}

// ---- pinned variate transformations -------------------------------------

/// Uniform in [0, 1): the top 53 bits of one generator word.
pub(crate) fn uniform_f64(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in [0, n) by 128-bit multiply-shift on one word.
pub(crate) fn uniform_below(rng: &mut Xoshiro256PlusPlus, n: u64) -> u64 {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

/// Uniform integer in [lo, hi).
fn uniform_range(rng: &mut Xoshiro256PlusPlus, lo: i64, hi: i64) -> i64 {
    debug_assert!(lo < hi);
    lo + uniform_below(rng, (hi - lo) as u64) as i64
}

/// Inverse-CDF exponential with the given mean.
fn exponential(rng: &mut Xoshiro256PlusPlus, mean: f64) -> f64 {
    -mean * (1.0 - uniform_f64(rng)).ln()
}

/// Poisson by Knuth's product method, splitting large means into chunks of
/// at most 30 (a sum of independent Poissons is Poisson, and small chunks
/// keep `exp(-lambda)` comfortably inside f64 range).
fn poisson(rng: &mut Xoshiro256PlusPlus, mut lambda: f64) -> u64 {
    debug_assert!(lambda >= 0.0);
    let mut total = 0u64;
    while lambda > 0.0 {
        let chunk = lambda.min(30.0);
        lambda -= chunk;
        let limit = (-chunk).exp();
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= uniform_f64(rng);
            if p <= limit {
                break;
            }
            k += 1;
        }
        total += k;
    }
    total
}

const REVERT_COMMENTS: [&str; 5] = [
    "rv vandalism",
    "Reverted edits by anonymous user",
    "Undid revision by linkspammer",
    "rvv",
    "undo unsourced change",
];

const BENIGN_COMMENTS: [&str; 5] = [
    "copyedit",
    "add citation",
    "expand section",
    "fix typo",
    "update infobox",
];

fn job_chunks(n_articles: u64, n_jobs: u64) -> Vec<(u64, u64)> {
    // Contiguous chunks, sizes differing by at most one.
    let base = n_articles / n_jobs;
    let rem = n_articles % n_jobs;
    let mut chunks = Vec::with_capacity(n_jobs as usize);
    let mut start = 0u64;
    for j in 0..n_jobs {
        let size = base + u64::from(j < rem);
        chunks.push((start, start + size));
        start += size;
    }
    chunks
}

fn capture_times(chunks: &[(u64, u64)], n_articles: u64, start: i64, rate: f64) -> Vec<f64> {
    let mut truth = vec![0.0; n_articles as usize];
    for &(lo, hi) in chunks {
        for id in lo..hi {
            truth[id as usize] = start as f64 + (id - lo + 1) as f64 / rate;
        }
    }
    truth
}

/// Generate a world from a validated config. Deterministic in the seed.
pub fn generate_world(config: &SimConfig) -> Result<SimWorld> {
    config.validate()?;
    let (s1, s2) = config.snapshot_starts;
    let period = config.period();
    let horizon = s2 + period;

    let chunks = job_chunks(config.n_articles, config.n_jobs);
    let boundaries: Vec<u64> = chunks.iter().skip(1).map(|&(lo, _)| lo).collect();
    let rate2 = config.crawl_rate * (1.0 + config.rate_drift);
    let truth1 = capture_times(&chunks, config.n_articles, s1, config.crawl_rate);
    let truth2 = capture_times(&chunks, config.n_articles, s2, rate2);

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.seed);
    let lambda = config.edit_rate * 2.0; // the window spans two periods
    let mut edits = Vec::new();
    let mut captured1 = BTreeMap::new();
    let mut captured2 = BTreeMap::new();
    for id in 0..config.n_articles {
        let k = poisson(&mut rng, lambda);
        if k == 0 {
            continue;
        }
        let mut intended: Vec<i64> = (0..k)
            .map(|_| uniform_range(&mut rng, s1, s1 + 2 * period))
            .collect();
        intended.sort_unstable();
        let mut epochs: Vec<i64> = Vec::with_capacity(k as usize);
        let mut reverts: Vec<bool> = Vec::with_capacity(k as usize);
        for (i, &t) in intended.iter().enumerate() {
            let is_revert = i > 0 && uniform_f64(&mut rng) < config.revert_probability;
            let prev = epochs.last().copied().unwrap_or(t);
            let epoch = if is_revert {
                // The revert follows its predecessor after a sampled delay,
                // so the measured predecessor gap *is* the sampled delay.
                prev + config.reversion_delay.sample(&mut rng).round().max(0.0) as i64
            } else {
                t.max(prev)
            };
            epochs.push(epoch);
            reverts.push(is_revert);
        }
        for (i, (&epoch, &is_revert)) in epochs.iter().zip(&reverts).enumerate() {
            let pool = if is_revert {
                &REVERT_COMMENTS
            } else {
                &BENIGN_COMMENTS
            };
            let comment = pool[uniform_below(&mut rng, pool.len() as u64) as usize];
            edits.push(EditRecord {
                article_id: id,
                revision_id: i as u64 + 1,
                edit_epoch: epoch,
                comment: comment.to_string(),
            });
        }
        // Captured revision: the last one at or before the capture instant
        // (epochs are non-decreasing in revision order by construction).
        let t1 = truth1[id as usize];
        let t2 = truth2[id as usize];
        let c1 = epochs.partition_point(|&e| e as f64 <= t1);
        if c1 > 0 {
            captured1.insert(id, c1 as u64);
        }
        let c2 = epochs.partition_point(|&e| e as f64 <= t2);
        if c2 > 0 {
            captured2.insert(id, c2 as u64);
        }
    }

    Ok(SimWorld {
        config: config.clone(),
        edits,
        meta1: SnapshotMeta {
            snapshot_id: "sim-1".into(),
            start_epoch: s1,
            boundaries: boundaries.clone(),
            captured: captured1,
        },
        meta2: SnapshotMeta {
            snapshot_id: "sim-2".into(),
            start_epoch: s2,
            boundaries,
            captured: captured2,
        },
        truth1,
        truth2,
        horizon,
    })
}

/// Replayed attack against the second snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSimOutcome {
    pub a: i64,
    pub n_attacked: u64,
    pub n_captured: u64,
    pub success_fraction: f64,
    /// `(article_id, edit_epoch, revert_epoch, captured)` per attacked article.
    pub outcomes: Vec<(u64, i64, f64, bool)>,
}

/// Moderation response delays for the attack edits, one per predicted
/// article. These depend on the world seed but not on `a`: the moderator's
/// reaction latency is a property of the community, not of when the attack
/// lands, so a sweep over `a` reuses the same delays.
pub fn sample_attack_delays(world: &SimWorld, n: usize) -> Vec<f64> {
    // Salted so the attack stream is independent of the generation stream.
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(world.config.seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..n)
        .map(|_| world.config.reversion_delay.sample(&mut rng))
        .collect()
}

fn attack_captured(edit_epoch: i64, revert_epoch: f64, true_capture: f64) -> bool {
    edit_epoch as f64 <= true_capture && revert_epoch > true_capture
}

/// Place one attack edit per predicted article at `predicted + a` and replay
/// the second crawl: the edit is baked into the snapshot iff it lands at or
/// before the article's true capture instant and its revert lands after.
pub fn run_attack(
    world: &SimWorld,
    predictions: &SchedulePrediction,
    a: i64,
) -> Result<AttackSimOutcome> {
    if predictions.predictions.is_empty() {
        return Err(Error::invalid("no predicted articles to attack"));
    }
    let delays = sample_attack_delays(world, predictions.predictions.len());
    let mut outcomes = Vec::with_capacity(predictions.predictions.len());
    let mut n_captured = 0u64;
    for (&(id, predicted), &delay) in predictions.predictions.iter().zip(&delays) {
        let truth = *world
            .truth2
            .get(id as usize)
            .ok_or_else(|| Error::invalid(format!("prediction for unknown article {id}")))?;
        let e = predicted + a;
        let revert_epoch = e as f64 + delay;
        let captured = attack_captured(e, revert_epoch, truth);
        n_captured += u64::from(captured);
        outcomes.push((id, e, revert_epoch, captured));
    }
    Ok(AttackSimOutcome {
        a,
        n_attacked: outcomes.len() as u64,
        n_captured,
        success_fraction: n_captured as f64 / outcomes.len() as f64,
        outcomes,
    })
}

/// Empirical success fraction over an inclusive adjustment grid, reusing one
/// delay sample per article across the whole grid (see
/// [`sample_attack_delays`]).
pub fn run_attack_grid(
    world: &SimWorld,
    predictions: &SchedulePrediction,
    a_min: i64,
    a_max: i64,
    step: i64,
) -> Result<Vec<(i64, f64)>> {
    if step <= 0 || a_min > a_max {
        return Err(Error::invalid("bad attack grid"));
    }
    if predictions.predictions.is_empty() {
        return Err(Error::invalid("no predicted articles to attack"));
    }
    let delays = sample_attack_delays(world, predictions.predictions.len());
    let truths: Vec<f64> = predictions
        .predictions
        .iter()
        .map(|&(id, _)| {
            world
                .truth2
                .get(id as usize)
                .copied()
                .ok_or_else(|| Error::invalid(format!("prediction for unknown article {id}")))
        })
        .collect::<Result<_>>()?;
    let n = predictions.predictions.len() as f64;
    let mut curve = Vec::new();
    let mut a = a_min;
    while a <= a_max {
        let mut captured = 0u64;
        for ((&(_, predicted), &delay), &truth) in
            predictions.predictions.iter().zip(&delays).zip(&truths)
        {
            let e = predicted + a;
            captured += u64::from(attack_captured(e, e as f64 + delay, truth));
        }
        curve.push((a, captured as f64 / n));
        a += step;
    }
    Ok(curve)
}

/// Fraction of intervals containing the true capture time.
pub fn containment_fraction(intervals: &[ArticleInterval], truth: &[f64]) -> f64 {
    if intervals.is_empty() {
        return 0.0;
    }
    let contained = intervals
        .iter()
        .filter(|iv| {
            truth
                .get(iv.article_id as usize)
                .map(|&t| iv.low as f64 <= t && t <= iv.high as f64)
                .unwrap_or(false)
        })
        .count();
    contained as f64 / intervals.len() as f64
}

/// Everything the end-to-end oracle run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n_attacked: u64,
    /// Fraction of inferred intervals containing the true capture time, per
    /// snapshot. Anything below 1.0 is an inference bug.
    pub containment1: f64,
    pub containment2: f64,
    pub mean_width1: f64,
    pub fits1: Vec<JobFit>,
    pub fits2: Vec<JobFit>,
    /// Mean signed prediction error against the post-hoc fit (positive:
    /// predictions ran late / overestimated).
    pub prediction_mean_error: f64,
    pub learned_reverts: u64,
    pub analytic: SweepResult,
    pub empirical_curve: Vec<(i64, f64)>,
    /// max over the grid of (analytic - empirical); conservative estimates
    /// keep this near or below zero up to sampling noise.
    pub max_conservativeness_gap: f64,
}

/// Run the whole analysis chain against a simulated world and score it:
/// infer the first snapshot's schedule from the synthetic edit log, predict
/// the second, learn the revert-delay CDF from marked comments, sweep the
/// analytic estimate over `[a_min, a_max]`, and replay the real attack on
/// the same grid.
pub fn oracle_pipeline(
    world: &SimWorld,
    a_min: i64,
    a_max: i64,
    step: i64,
) -> Result<OracleReport> {
    let markers = RevertMarkerSet::english_default();
    let (s1, s2) = world.config.snapshot_starts;

    let members1 = classify_membership(&world.edits, &world.meta1)?;
    let intervals1 = infer_intervals(&world.edits, &members1, &world.meta1, Some(s2))?;
    let fits1 = fit_all_jobs(&intervals1, FitOptions::default())?;

    let members2 = classify_membership(&world.edits, &world.meta2)?;
    let intervals2 = infer_intervals(&world.edits, &members2, &world.meta2, Some(world.horizon))?;
    let fits2 = fit_all_jobs(&intervals2, FitOptions::default())?;

    let articles: Vec<u64> = intervals1.iter().map(|iv| iv.article_id).collect();
    let prediction = predict_next(&fits1, &world.meta1, s2, &articles, None)?;
    let errors = prediction_error_distribution(&prediction, &fits2, &world.meta2, 300)?;

    let scan = reversion_durations(&world.edits, &markers)?;
    let cdf = build_cdf(scan.durations.clone())?;

    // Attack inputs: the prediction plus the first snapshot's interval
    // translated forward by one period — all the attacker can know.
    let delta = s2 - s1;
    let attack_articles: Vec<AttackArticle> = intervals1
        .iter()
        .map(|iv| {
            let predicted = prediction
                .get(iv.article_id)
                .expect("predictions cover interval articles");
            AttackArticle {
                article_id: iv.article_id,
                predicted,
                low: iv.low + delta,
                high: iv.high + delta,
            }
        })
        .collect();
    let analytic = sweep(&attack_articles, &cdf, a_min, a_max, step)?;
    let empirical_curve = run_attack_grid(world, &prediction, a_min, a_max, step)?;

    let max_gap = analytic
        .curve
        .iter()
        .zip(&empirical_curve)
        .map(|(&(_, est), &(_, obs))| est - obs)
        .fold(f64::NEG_INFINITY, f64::max);

    let mean_width1 = intervals1
        .iter()
        .map(|iv| (iv.high - iv.low) as f64)
        .sum::<f64>()
        / intervals1.len() as f64;

    Ok(OracleReport {
        n_attacked: attack_articles.len() as u64,
        containment1: containment_fraction(&intervals1, &world.truth1),
        containment2: containment_fraction(&intervals2, &world.truth2),
        mean_width1,
        fits1,
        fits2,
        prediction_mean_error: errors.mean_error,
        learned_reverts: scan.durations.len() as u64,
        analytic,
        empirical_curve,
        max_conservativeness_gap: max_gap,
    })
}

/// Parse a flat `key = value` config file. Unknown keys are rejected; every
/// key except `rate_drift` (default 0) is required. `reversion_delay` takes
/// `exponential:<mean-seconds>` or `empirical:<durations-file>`, the latter
/// resolved against `base_dir`.
pub fn read_sim_config<R: Read>(reader: R, base_dir: Option<&Path>) -> Result<SimConfig> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for (i, line) in std::io::BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: "<sim config>".into(),
            source: e,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("line {}: expected key = value", i + 1)))?;
        if fields
            .insert(key.trim().to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::invalid(format!(
                "duplicate config key {:?}",
                key.trim()
            )));
        }
    }
    fn take(fields: &mut BTreeMap<String, String>, key: &str) -> Result<String> {
        fields
            .remove(key)
            .ok_or_else(|| Error::invalid(format!("missing config key {key:?}")))
    }
    fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::invalid(format!("config key {key:?}: bad value {v:?}")))
    }

    let n_articles = parse("n_articles", &take(&mut fields, "n_articles")?)?;
    let n_jobs = parse("n_jobs", &take(&mut fields, "n_jobs")?)?;
    let crawl_rate = parse("crawl_rate", &take(&mut fields, "crawl_rate")?)?;
    let rate_drift = match fields.remove("rate_drift") {
        Some(v) => parse("rate_drift", &v)?,
        None => 0.0,
    };
    let edit_rate = parse("edit_rate", &take(&mut fields, "edit_rate")?)?;
    let revert_probability = parse(
        "revert_probability",
        &take(&mut fields, "revert_probability")?,
    )?;
    let delay_spec = take(&mut fields, "reversion_delay")?;
    let reversion_delay = match delay_spec.split_once(':') {
        Some(("exponential", mean)) => DelayDistribution::Exponential {
            mean_seconds: parse("reversion_delay", mean)?,
        },
        Some(("empirical", path)) => {
            let path = match base_dir {
                Some(dir) => dir.join(path),
                None => Path::new(path).to_path_buf(),
            };
            DelayDistribution::Empirical {
                durations: crate::reversion::read_durations_path(&path)?,
            }
        }
        _ => {
            return Err(Error::invalid(format!(
                "reversion_delay must be exponential:<mean> or empirical:<file>, got {delay_spec:?}"
            )))
        }
    };
    let snapshot_starts = (
        parse("snapshot_start_1", &take(&mut fields, "snapshot_start_1")?)?,
        parse("snapshot_start_2", &take(&mut fields, "snapshot_start_2")?)?,
    );
    let seed = parse("seed", &take(&mut fields, "seed")?)?;
    if let Some(unknown) = fields.keys().next() {
        return Err(Error::invalid(format!("unknown config key {unknown:?}")));
    }
    let config = SimConfig {
        n_articles,
        n_jobs,
        crawl_rate,
        rate_drift,
        edit_rate,
        revert_probability,
        reversion_delay,
        snapshot_starts,
        seed,
    };
    config.validate()?;
    Ok(config)
}

/// Read a sim config from a file path, resolving empirical-delay files
/// against the config's directory.
pub fn read_sim_config_path(path: &Path) -> Result<SimConfig> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_sim_config(std::io::BufReader::new(f), path.parent())
}

/// Write ground-truth capture times as CSV `article,true1,true2`.
pub fn write_truth_csv<W: Write>(world: &SimWorld, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["article", "true1", "true2"])
        .map_err(|e| Error::Csv {
            path: "<truth csv>".into(),
            source: e,
        })?;
    for id in 0..world.config.n_articles {
        wtr.write_record([
            id.to_string(),
            world.truth1[id as usize].to_string(),
            world.truth2[id as usize].to_string(),
        ])
        .map_err(|e| Error::Csv {
            path: "<truth csv>".into(),
            source: e,
        })?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: "<truth csv>".into(),
        source: e,
    })?;
    Ok(())
}
