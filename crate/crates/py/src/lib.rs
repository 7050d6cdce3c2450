//! Python bindings for the poisonscan core.
//!
//! The module mirrors the library surface rather than the CLI: functions take
//! paths or plain Python values, scalar results come back as native types,
//! and structured reports come back as dicts (serialized through the same
//! code paths as the CLI's JSON output, so the two never disagree on shape).
//!
//! Build with `cargo build -p poisonscan-py --release` and rename the cdylib
//! to `poisonscan_py.so` (see `python/smoke_test.py`), or point maturin at
//! this crate.

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use poisonscan::attack::{self, AttackArticle};
use poisonscan::defense;
use poisonscan::domains::{self, DomainRecord, DomainStatus};
use poisonscan::error::Error;
use poisonscan::index;
use poisonscan::reversion::{self, EmpiricalCdf, RevertMarkerSet};
use poisonscan::sim;
use poisonscan::timing;
use poisonscan::traffic;

/// Convert a core error into a Python exception, keeping the error kind
/// visible (`invalid-input: ...`, `contradiction: ...`).
fn to_py_err(e: Error) -> PyErr {
    PyValueError::new_err(format!("{}: {}", e.kind(), e))
}

/// Serialize any report struct to a Python object via JSON, so Python sees
/// exactly the shapes documented in `docs/formats.md`.
fn report_to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<PyObject> {
    let text = serde_json::to_string(value)
        .map_err(|e| PyValueError::new_err(format!("serialization failed: {e}")))?;
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

/// Empirical distribution of reversion delays: the step CDF over an observed
/// multiset of delays in seconds.
#[pyclass(frozen)]
struct Cdf {
    inner: EmpiricalCdf,
}

#[pymethods]
impl Cdf {
    #[new]
    fn new(durations: Vec<u64>) -> PyResult<Self> {
        let inner = reversion::build_cdf(durations).map_err(to_py_err)?;
        Ok(Cdf { inner })
    }

    /// P(delay <= t).
    fn evaluate(&self, t: f64) -> f64 {
        self.inner.evaluate(t)
    }

    /// P(delay > t).
    fn survival(&self, t: f64) -> f64 {
        self.inner.survival(t)
    }

    /// Number of observed delays at or below `t`.
    fn count_le(&self, t: f64) -> usize {
        self.inner.count_le(t)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn durations(&self) -> Vec<u64> {
        self.inner.sorted_durations().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Cdf(n={})", self.inner.n())
    }
}

/// SHA-256 of raw content bytes, lowercase hex — the digest stored in
/// dataset indices.
#[pyfunction]
fn content_hash(data: &Bound<'_, PyBytes>) -> String {
    index::compute_content_hash(data.as_bytes())
}

/// Verify an index CSV against a directory of downloaded blobs (one file per
/// ordinal). Returns the integrity report as a dict.
#[pyfunction]
#[pyo3(signature = (index_csv, content_dir, name = "dataset", release_epoch = 1))]
fn verify_index(
    py: Python<'_>,
    index_csv: &str,
    content_dir: &str,
    name: &str,
    release_epoch: i64,
) -> PyResult<PyObject> {
    let idx =
        index::read_index_csv_path(Path::new(index_csv), name, release_epoch).map_err(to_py_err)?;
    let dir = Path::new(content_dir);
    let mut outcomes = Vec::with_capacity(idx.entries.len());
    for entry in &idx.entries {
        let content = match std::fs::read(dir.join(entry.entry_ordinal.to_string())) {
            Ok(bytes) => Some(bytes),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => {
                return Err(to_py_err(Error::Io {
                    path: dir
                        .join(entry.entry_ordinal.to_string())
                        .display()
                        .to_string(),
                    source: e,
                }))
            }
        };
        outcomes.push(index::verify_entry(entry, content.as_deref(), true));
    }
    let report = index::integrity_report(&idx, &outcomes).map_err(to_py_err)?;
    report_to_py(py, &report)
}

/// Extract revert delays (seconds) from an edit log, using the built-in
/// English marker set or a custom list of marker substrings.
#[pyfunction]
#[pyo3(signature = (edits_jsonl, markers = None))]
fn revert_delays(edits_jsonl: &str, markers: Option<Vec<String>>) -> PyResult<Vec<u64>> {
    let marker_set = match markers {
        Some(list) => RevertMarkerSet::new("custom", list).map_err(to_py_err)?,
        None => RevertMarkerSet::english_default(),
    };
    let edits = timing::read_edit_log_path(Path::new(edits_jsonl)).map_err(to_py_err)?;
    let scan = reversion::reversion_durations(&edits, &marker_set).map_err(to_py_err)?;
    Ok(scan.durations)
}

/// Run the schedule-inference chain on an edit log and snapshot metadata:
/// returns `{"intervals": [...], "fits": [...]}` with per-article capture
/// intervals and per-job linear fits.
#[pyfunction]
#[pyo3(signature = (edits_jsonl, snapshot_json, next_start = None))]
fn infer_schedule(
    py: Python<'_>,
    edits_jsonl: &str,
    snapshot_json: &str,
    next_start: Option<i64>,
) -> PyResult<PyObject> {
    let edits = timing::read_edit_log_path(Path::new(edits_jsonl)).map_err(to_py_err)?;
    let meta = timing::read_snapshot_meta_path(Path::new(snapshot_json)).map_err(to_py_err)?;
    let memberships = timing::classify_membership(&edits, &meta).map_err(to_py_err)?;
    let intervals =
        timing::infer_intervals(&edits, &memberships, &meta, next_start).map_err(to_py_err)?;
    let fits =
        timing::fit_all_jobs(&intervals, timing::FitOptions::default()).map_err(to_py_err)?;
    #[derive(serde::Serialize)]
    struct Out<'a> {
        intervals: &'a [timing::ArticleInterval],
        fits: &'a [timing::JobFit],
    }
    report_to_py(
        py,
        &Out {
            intervals: &intervals,
            fits: &fits,
        },
    )
}

/// Predict per-article capture epochs for the snapshot starting at
/// `next_start`, from the schedule learned on the previous one.
#[pyfunction]
fn predict_schedule(
    py: Python<'_>,
    edits_jsonl: &str,
    snapshot_json: &str,
    next_start: i64,
) -> PyResult<PyObject> {
    let edits = timing::read_edit_log_path(Path::new(edits_jsonl)).map_err(to_py_err)?;
    let meta = timing::read_snapshot_meta_path(Path::new(snapshot_json)).map_err(to_py_err)?;
    let memberships = timing::classify_membership(&edits, &meta).map_err(to_py_err)?;
    let intervals = timing::infer_intervals(&edits, &memberships, &meta, Some(next_start))
        .map_err(to_py_err)?;
    let fits =
        timing::fit_all_jobs(&intervals, timing::FitOptions::default()).map_err(to_py_err)?;
    let articles: Vec<u64> = intervals.iter().map(|iv| iv.article_id).collect();
    let prediction =
        timing::predict_next(&fits, &meta, next_start, &articles, None).map_err(to_py_err)?;
    report_to_py(py, &prediction)
}

fn articles_from_tuples(articles: Vec<(u64, i64, i64, i64)>) -> PyResult<Vec<AttackArticle>> {
    articles
        .into_iter()
        .map(|(article_id, predicted, low, high)| {
            let a = AttackArticle {
                article_id,
                predicted,
                low,
                high,
            };
            a.validate().map_err(to_py_err)?;
            Ok(a)
        })
        .collect()
}

/// Expected poisoning success at timing adjustment `a`, over articles given
/// as `(article_id, predicted, low, high)` tuples.
#[pyfunction]
fn estimate_attack(articles: Vec<(u64, i64, i64, i64)>, a: i64, cdf: &Cdf) -> PyResult<f64> {
    let articles = articles_from_tuples(articles)?;
    let est = attack::estimate(&articles, a, &cdf.inner).map_err(to_py_err)?;
    Ok(est.success_fraction)
}

/// Sweep the adjustment grid and return
/// `{"best_a", "best_success", "curve"}`.
#[pyfunction]
#[pyo3(signature = (articles, cdf, a_min = attack::DEFAULT_SWEEP_MIN, a_max = attack::DEFAULT_SWEEP_MAX, a_step = attack::DEFAULT_SWEEP_STEP))]
fn sweep_attack(
    py: Python<'_>,
    articles: Vec<(u64, i64, i64, i64)>,
    cdf: &Cdf,
    a_min: i64,
    a_max: i64,
    a_step: i64,
) -> PyResult<PyObject> {
    let articles = articles_from_tuples(articles)?;
    let result = attack::sweep(&articles, &cdf.inner, a_min, a_max, a_step).map_err(to_py_err)?;
    report_to_py(py, &result)
}

/// Fraction of poisoned articles a randomized crawl order protects, given
/// the defender's response delay and the crawl window (both seconds).
#[pyfunction]
fn randomized_order_protection(response_delay: f64, window: f64) -> PyResult<f64> {
    defense::randomized_order_protection(response_delay, window).map_err(to_py_err)
}

/// How much a time gate shrinks surviving vandalism relative to a baseline
/// review window; dict with integer survivor counts and the reduction factor.
#[pyfunction]
fn time_gate_reduction(
    py: Python<'_>,
    cdf: &Cdf,
    baseline_window: u64,
    hold: u64,
) -> PyResult<PyObject> {
    let r = defense::time_gate_reduction(&cdf.inner, baseline_window, hold).map_err(to_py_err)?;
    report_to_py(py, &r)
}

/// Greedy purchase plan over domain records given as
/// `(domain, image_count, status, price_cents)` tuples; price must be given
/// iff status is "buyable". Returns the plan as a dict.
#[pyfunction]
fn plan_purchase(
    py: Python<'_>,
    records: Vec<(String, u64, String, Option<u64>)>,
    index_size: u64,
    budget_cents: u64,
) -> PyResult<PyObject> {
    let records: Vec<DomainRecord> = records
        .into_iter()
        .map(|(domain, image_count, status, price)| {
            let status: DomainStatus = status.parse().map_err(to_py_err)?;
            Ok(DomainRecord {
                domain,
                image_count,
                status,
                price_usd_cents: price,
            })
        })
        .collect::<PyResult<_>>()?;
    let plan = domains::plan_purchase(&records, index_size, budget_cents).map_err(to_py_err)?;
    report_to_py(py, &plan)
}

/// Poisoned fraction each downstream corpus inherits from a payload of
/// `poison_bytes`, over `(corpus, total_bytes)` pairs.
#[pyfunction]
fn amplification(poison_bytes: u64, corpora: Vec<(String, u64)>) -> PyResult<Vec<(String, f64)>> {
    domains::amplification(poison_bytes, &corpora).map_err(to_py_err)
}

/// Sessionize an access log and flag dataset-download sessions; returns the
/// detection report as a dict.
#[pyfunction]
#[pyo3(signature = (log_path, owned_json, recall = 0.9, precision = 0.5, gap = 86_400))]
fn detect_downloads(
    py: Python<'_>,
    log_path: &str,
    owned_json: &str,
    recall: f64,
    precision: f64,
    gap: i64,
) -> PyResult<PyObject> {
    let parsed = traffic::parse_log_path(Path::new(log_path)).map_err(to_py_err)?;
    let file = std::fs::File::open(owned_json).map_err(|e| {
        to_py_err(Error::Io {
            path: owned_json.to_string(),
            source: e,
        })
    })?;
    let owned = traffic::read_owned_set(file).map_err(to_py_err)?;
    let thresholds = traffic::DetectionThresholds {
        min_recall: recall,
        min_precision: precision,
        session_gap_seconds: gap,
    };
    let report =
        traffic::detect_downloads(&parsed.records, &owned, &thresholds).map_err(to_py_err)?;
    report_to_py(py, &report)
}

/// Generate a synthetic world from a simulator config file, run the full
/// inference chain against it, and score the analytic estimate on the
/// simulator's ground truth. Returns the oracle report as a dict.
#[pyfunction]
#[pyo3(signature = (config_path, a_min = attack::DEFAULT_SWEEP_MIN, a_max = attack::DEFAULT_SWEEP_MAX, a_step = attack::DEFAULT_SWEEP_STEP, seed = None))]
fn oracle(
    py: Python<'_>,
    config_path: &str,
    a_min: i64,
    a_max: i64,
    a_step: i64,
    seed: Option<u64>,
) -> PyResult<PyObject> {
    let mut config = sim::read_sim_config_path(Path::new(config_path)).map_err(to_py_err)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let world = sim::generate_world(&config).map_err(to_py_err)?;
    let report = sim::oracle_pipeline(&world, a_min, a_max, a_step).map_err(to_py_err)?;
    report_to_py(py, &report)
}

#[pymodule]
fn poisonscan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Cdf>()?;
    m.add_function(wrap_pyfunction!(content_hash, m)?)?;
    m.add_function(wrap_pyfunction!(verify_index, m)?)?;
    m.add_function(wrap_pyfunction!(revert_delays, m)?)?;
    m.add_function(wrap_pyfunction!(infer_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(predict_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_attack, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_attack, m)?)?;
    m.add_function(wrap_pyfunction!(randomized_order_protection, m)?)?;
    m.add_function(wrap_pyfunction!(time_gate_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(plan_purchase, m)?)?;
    m.add_function(wrap_pyfunction!(amplification, m)?)?;
    m.add_function(wrap_pyfunction!(detect_downloads, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add("DEFAULT_SWEEP_MIN", attack::DEFAULT_SWEEP_MIN)?;
    m.add("DEFAULT_SWEEP_MAX", attack::DEFAULT_SWEEP_MAX)?;
    m.add("DEFAULT_SWEEP_STEP", attack::DEFAULT_SWEEP_STEP)?;
    Ok(())
}
