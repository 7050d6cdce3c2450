//! Defenses against snapshot frontrunning and split-view poisoning, scored
//! two ways: closed-form protection estimates for operators deciding what
//! to deploy, and simulator replays that check those closed forms against a
//! ground-truth world.

use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::IntegrityReport;
use crate::reversion::EmpiricalCdf;
use crate::sim::{sample_attack_delays, uniform_below, SimWorld};
use crate::timing::SchedulePrediction;

/// Expected fraction of articles protected when per-article capture times
/// are drawn uniformly from a randomization window of `window_seconds`
/// instead of following the published schedule: an attacker whose edits
/// stay live only `response_delay_seconds` before reversion overlaps the
/// unknown capture instant with probability `delay / window`, clamped.
pub fn randomized_order_protection(
    response_delay_seconds: f64,
    window_seconds: f64,
) -> Result<f64> {
    if !(window_seconds.is_finite() && window_seconds > 0.0) {
        return Err(Error::invalid("randomization window must be positive"));
    }
    if !(response_delay_seconds.is_finite() && response_delay_seconds >= 0.0) {
        return Err(Error::invalid("response delay must be non-negative"));
    }
    Ok((1.0 - response_delay_seconds / window_seconds).max(0.0))
}

/// How much surviving vandalism a pre-publication hold eliminates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGateReduction {
    pub baseline_window_seconds: u64,
    pub hold_seconds: u64,
    pub n_delays: u64,
    /// Observed reverts slower than the baseline window / than the hold.
    pub surviving_baseline: u64,
    pub surviving_held: u64,
    pub survival_baseline: f64,
    pub survival_held: f64,
    /// surviving_baseline / surviving_held; `None` when the hold eliminates
    /// every observed delay.
    pub reduction_factor: Option<f64>,
}

/// Score a time gate against an observed revert-delay distribution: only
/// vandalism outliving the gate still reaches the published snapshot. The
/// factor is a ratio of survivor counts, so distributions built from round
/// numbers give round factors.
pub fn time_gate_reduction(
    cdf: &EmpiricalCdf,
    baseline_window_seconds: u64,
    hold_seconds: u64,
) -> Result<TimeGateReduction> {
    let n = cdf.n() as u64;
    let surviving_baseline = n - cdf.count_le(baseline_window_seconds as f64) as u64;
    let surviving_held = n - cdf.count_le(hold_seconds as f64) as u64;
    if surviving_baseline == 0 {
        return Err(Error::invalid(
            "no observed delay outlives the baseline window; there is nothing to reduce",
        ));
    }
    Ok(TimeGateReduction {
        baseline_window_seconds,
        hold_seconds,
        n_delays: n,
        surviving_baseline,
        surviving_held,
        survival_baseline: surviving_baseline as f64 / n as f64,
        survival_held: surviving_held as f64 / n as f64,
        reduction_factor: (surviving_held > 0)
            .then(|| surviving_baseline as f64 / surviving_held as f64),
    })
}

/// What enforcing cryptographic hashes costs a consumer of the index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashDefenseCost {
    pub total_entries: u64,
    pub live_entries: u64,
    pub hash_mismatches: u64,
    /// Fraction of still-live entries rejected because their content
    /// drifted benignly since the index was hashed.
    pub broken_fraction: f64,
    /// Fraction of swapped content the defense stops: all of it, since a
    /// replaced payload cannot match its recorded digest.
    pub protection: f64,
}

/// Derive the hash-enforcement trade-off from an integrity report: perfect
/// protection, paid for by discarding every live entry whose bytes no
/// longer match the recorded digest.
pub fn hash_defense_cost(report: &IntegrityReport) -> Result<HashDefenseCost> {
    if report.live == 0 {
        return Err(Error::invalid("integrity report has no live entries"));
    }
    Ok(HashDefenseCost {
        total_entries: report.total,
        live_entries: report.live,
        hash_mismatches: report.hash_mismatch,
        broken_fraction: report.hash_mismatch as f64 / report.live as f64,
        protection: 1.0,
    })
}

/// A deployable defense for the simulator to stress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Defense {
    /// Capture articles in a random order: each article's true capture time
    /// is swapped with another's, uniformly.
    RandomizedOrder,
    /// Hold the snapshot for `hold_seconds` after capture and drop any
    /// article whose poisoned revision was reverted during the hold.
    TimeGate { hold_seconds: i64 },
}

impl Defense {
    pub fn label(&self) -> String {
        match self {
            Defense::RandomizedOrder => "randomized-order".into(),
            Defense::TimeGate { hold_seconds } => format!("time-gate:{hold_seconds}"),
        }
    }
}

/// Simulated attack outcome with and without a defense in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseSimOutcome {
    pub defense: String,
    pub a: i64,
    pub n_attacked: u64,
    pub undefended_success: f64,
    pub defended_success: f64,
    /// 1 - defended_success: the share of attacked articles the defense
    /// keeps clean.
    pub protected_fraction: f64,
}

fn shuffled_indices(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(rng, (i + 1) as u64) as usize;
        idx.swap(i, j);
    }
    idx
}

/// Replay the attack `predicted + a` against a simulated world twice — once
/// undefended, once with `defense` active — using one shared draw of
/// moderation delays so the comparison is paired. The permutation for
/// [`Defense::RandomizedOrder`] is drawn from `seed`.
pub fn simulate_defense(
    world: &SimWorld,
    predictions: &SchedulePrediction,
    a: i64,
    defense: Defense,
    seed: u64,
) -> Result<DefenseSimOutcome> {
    let n = predictions.predictions.len();
    if n == 0 {
        return Err(Error::invalid("no predicted articles to attack"));
    }
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
    let delays = sample_attack_delays(world, n);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);

    let captured = |e: i64, revert: f64, truth: f64| e as f64 <= truth && revert > truth;
    let mut undefended = 0u64;
    let mut defended = 0u64;
    match defense {
        Defense::RandomizedOrder => {
            let perm = shuffled_indices(&mut rng, n);
            for (i, (&(_, predicted), &delay)) in
                predictions.predictions.iter().zip(&delays).enumerate()
            {
                let e = predicted + a;
                let revert = e as f64 + delay;
                undefended += u64::from(captured(e, revert, truths[i]));
                defended += u64::from(captured(e, revert, truths[perm[i]]));
            }
        }
        Defense::TimeGate { hold_seconds } => {
            for (i, (&(_, predicted), &delay)) in
                predictions.predictions.iter().zip(&delays).enumerate()
            {
                let e = predicted + a;
                let revert = e as f64 + delay;
                undefended += u64::from(captured(e, revert, truths[i]));
                defended += u64::from(captured(e, revert, truths[i] + hold_seconds as f64));
            }
        }
    }
    let defended_success = defended as f64 / n as f64;
    Ok(DefenseSimOutcome {
        defense: defense.label(),
        a,
        n_attacked: n as u64,
        undefended_success: undefended as f64 / n as f64,
        defended_success,
        protected_fraction: 1.0 - defended_success,
    })
}
