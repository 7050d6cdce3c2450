//! `poisonscan`: every analysis pipeline in this crate as a subcommand with
//! file-based I/O.
//!
//! Conventions shared by all subcommands:
//! - exit 0 on success, 1 on input problems, 2 when the inputs contradict
//!   each other; errors are one `error[kind]: message` line on stderr.
//! - output files are never overwritten unless `--force` is passed.
//! - every run that writes an output also writes a run manifest (JSON with
//!   the resolved parameters, SHA-256 digests of the inputs, the output
//!   paths, and wall time) next to the first output, or wherever
//!   `--manifest` points. Manifests are run logs and do overwrite.
//! - nothing reads a clock for logic (only for the manifest's wall time)
//!   and all randomness flows from explicit seeds.

use std::collections::BTreeMap;
use std::io::{BufWriter, Read as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use poisonscan::attack::{
    estimate, read_attack_csv_path, sweep, write_curve_csv, DEFAULT_SWEEP_MAX, DEFAULT_SWEEP_MIN,
    DEFAULT_SWEEP_STEP,
};
use poisonscan::defense::{
    hash_defense_cost, randomized_order_protection, simulate_defense, time_gate_reduction, Defense,
};
use poisonscan::domains::{
    amplification, attack_signature_scan, audit_domains, cost_curve, plan_purchase,
    read_corpora_csv, read_domain_records_csv, read_probes_csv, read_suffix_rules_path,
    read_whois_csv, write_plan_csv, ExpirationPolicy, SuffixRules,
};
use poisonscan::index::{
    integrity_report, read_index_csv_path, read_outcomes_csv, verify_entry, write_outcomes_csv,
    write_report_csv,
};
use poisonscan::reversion::{
    build_cdf, read_durations_path, read_marker_file_path, reversion_durations, RevertMarkerSet,
};
use poisonscan::sim::{
    generate_world, oracle_pipeline, read_sim_config_path, write_truth_csv, SimWorld,
};
use poisonscan::timing::{
    classify_membership, detect_job_boundaries, fit_all_jobs, infer_intervals, predict_next,
    prediction_error_distribution, read_edit_log_path, read_snapshot_meta_path, write_edit_log,
    write_snapshot_meta, FitOptions, SchedulePrediction,
};
use poisonscan::traffic::{
    detect_downloads, parse_log_path, read_owned_set, timeline, user_agent_summary,
    DetectionThresholds,
};
use poisonscan::{Error, Result};

/// Print a line to stdout, tolerating a closed pipe (`poisonscan ... | head`
/// must not panic). Other stdout failures are real I/O errors.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if let Err(e) = writeln!(std::io::stdout(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            eprintln!("error[io]: stdout: {e}");
            std::process::exit(1);
        }
    }};
}

#[derive(Parser)]
#[command(
    name = "poisonscan",
    version,
    about = "Audit web-scale dataset indices for split-view and snapshot-frontrunning poisoning",
    propagate_version = true
)]
struct Cli {
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads for parallel computation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Base seed override for randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the run manifest here instead of next to the first output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hash-verify fetched content blobs against a dataset index.
    Verify(VerifyArgs),
    /// Recompute an integrity report from stored per-entry outcomes.
    IntegrityReport(IntegrityReportArgs),
    /// Classify domain liveness from resolver probe logs.
    AuditDomains(AuditDomainsArgs),
    /// Plan expired-domain purchases under a budget.
    PlanPurchase(PlanPurchaseArgs),
    /// Controlled index fraction across an ascending budget grid.
    CostCurve(CostCurveArgs),
    /// Flag domains serving modified content after an ownership change.
    SignatureScan(SignatureScanArgs),
    /// Corpus fraction a poison payload represents, per corpus.
    Amplify(AmplifyArgs),
    /// Infer per-article capture intervals and per-job linear fits.
    InferSchedule(InferScheduleArgs),
    /// Predict the next snapshot's per-article capture times.
    Predict(PredictArgs),
    /// Score predictions against the snapshot that actually happened.
    PredictionErrors(PredictionErrorsArgs),
    /// Learn the revert-delay distribution from an edit log.
    Revcdf(RevcdfArgs),
    /// Expected poisoning success for one timing adjustment.
    EstimateAttack(EstimateAttackArgs),
    /// Expected poisoning success across a grid of timing adjustments.
    Sweep(SweepArgs),
    /// Score defenses, closed-form or replayed in the simulator.
    DefenseEval(DefenseEvalArgs),
    /// Flag dataset-download sessions in an access log.
    DetectDownloads(DetectDownloadsArgs),
    /// Request share per user agent in an access log.
    UaSummary(UaSummaryArgs),
    /// Request volume over time in an access log.
    Timeline(TimelineArgs),
    /// Generate a synthetic wiki world with known capture times.
    Simulate(SimulateArgs),
    /// Run the full analysis chain against simulated ground truth.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Index CSV (`ordinal,url,caption,sha256`).
    #[arg(long)]
    index: PathBuf,
    /// Directory of fetched blobs, one file per entry named by its ordinal.
    #[arg(long)]
    content_dir: PathBuf,
    /// Dataset name recorded in the report.
    #[arg(long, default_value = "dataset")]
    name: String,
    /// Index release epoch (only recorded; use signature-scan to act on it).
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    release_epoch: i64,
    /// Write per-entry outcomes CSV here.
    #[arg(long)]
    out_outcomes: Option<PathBuf>,
    /// Write the report as JSON here (it always prints to stdout).
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the report as a one-row CSV here.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrityReportArgs {
    #[arg(long)]
    index: PathBuf,
    /// Per-entry outcomes CSV (`ordinal,outcome`), aligned with the index.
    #[arg(long)]
    outcomes: PathBuf,
    #[arg(long, default_value = "dataset")]
    name: String,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    release_epoch: i64,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct AuditDomainsArgs {
    /// Resolver probes CSV (`domain,vantage,epoch,result`).
    #[arg(long)]
    probes: PathBuf,
    /// Minimum NXDOMAIN probes to call a domain expired.
    #[arg(long, default_value_t = 4)]
    min_probes: usize,
    /// Minimum distinct vantage points among those probes.
    #[arg(long, default_value_t = 2)]
    min_vantages: usize,
    /// Minimum distinct UTC days among those probes.
    #[arg(long, default_value_t = 2)]
    min_days: usize,
    /// Output CSV (`domain,class`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlanPurchaseArgs {
    /// Domain records CSV (`domain,image_count,status,price_cents`).
    #[arg(long)]
    domains: PathBuf,
    /// Total entry count of the audited index.
    #[arg(long)]
    index_size: u64,
    /// Budget in integer USD cents.
    #[arg(long)]
    budget_cents: u64,
    /// Output CSV (`domain,image_count,price_cents`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CostCurveArgs {
    #[arg(long)]
    domains: PathBuf,
    #[arg(long)]
    index_size: u64,
    /// Comma-separated ascending budgets in cents, e.g. `1000,10000,1000000`.
    #[arg(long)]
    budgets: String,
    /// Output CSV (`budget_cents,controlled_fraction`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SignatureScanArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, default_value = "dataset")]
    name: String,
    /// Epoch the index was released; purchases after it are suspicious.
    #[arg(long, allow_negative_numbers = true)]
    release_epoch: i64,
    #[arg(long)]
    outcomes: PathBuf,
    /// Whois CSV (`domain,purchase_epoch`).
    #[arg(long)]
    whois: PathBuf,
    /// Public-suffix rules file (one rule per line); default: built-in subset.
    #[arg(long)]
    suffix_rules: Option<PathBuf>,
    /// Output CSV (`domain,modified_count,purchase_epoch`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AmplifyArgs {
    /// Poison payload size in bytes.
    #[arg(long)]
    poison_bytes: u64,
    /// Corpus sizes CSV (`corpus,bytes`).
    #[arg(long)]
    corpora: PathBuf,
    /// Output CSV (`corpus,poisoned_fraction`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InferScheduleArgs {
    /// Edit log JSONL (`article`, `rev`, `epoch`, `comment` per line).
    #[arg(long)]
    edits: PathBuf,
    /// Snapshot metadata JSON.
    #[arg(long)]
    snapshot: PathBuf,
    /// Start epoch of the following snapshot, if known: caps open intervals.
    #[arg(long, allow_negative_numbers = true)]
    next_start: Option<i64>,
    /// Weight for single-sided intervals in the fit.
    #[arg(long, default_value_t = 0.5)]
    single_sided_weight: f64,
    /// Also scan for job-boundary resets and print them (threshold seconds).
    #[arg(long)]
    detect_reset_threshold: Option<i64>,
    /// Output CSV of intervals
    /// (`article,job,low,high,low_seeded,high_seeded`).
    #[arg(long)]
    out_intervals: PathBuf,
    /// Output CSV of fits
    /// (`job,slope,intercept,mean_abs_bound_error,n_two_sided,n_single_sided`).
    #[arg(long)]
    out_fits: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    edits: PathBuf,
    #[arg(long)]
    snapshot: PathBuf,
    /// Start epoch of the snapshot being predicted.
    #[arg(long, allow_negative_numbers = true)]
    next_start: i64,
    /// Cap for open intervals when fitting (defaults to --next-start).
    #[arg(long, allow_negative_numbers = true)]
    cap: Option<i64>,
    /// Comma-separated job boundaries for the next snapshot, if they differ.
    #[arg(long)]
    boundaries: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    single_sided_weight: f64,
    /// Output JSON holding the prediction set.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictionErrorsArgs {
    /// Prediction JSON written by `predict`.
    #[arg(long)]
    predictions: PathBuf,
    /// Edit log covering the snapshot that actually happened.
    #[arg(long)]
    edits: PathBuf,
    /// Metadata of the snapshot that actually happened.
    #[arg(long)]
    snapshot: PathBuf,
    /// Epoch that capped the realised snapshot's open intervals, if known.
    #[arg(long, allow_negative_numbers = true)]
    next_start: Option<i64>,
    #[arg(long, default_value_t = 300)]
    bin_width: i64,
    /// Output CSV (`article,error_seconds`).
    #[arg(long)]
    out: PathBuf,
    /// Output CSV of the histogram (`bin_start_seconds,count`).
    #[arg(long)]
    out_bins: Option<PathBuf>,
}

#[derive(Args)]
struct RevcdfArgs {
    #[arg(long)]
    edits: PathBuf,
    /// Revert marker file (one marker per line); default: English markers.
    #[arg(long)]
    markers: Option<PathBuf>,
    /// Output file: one revert delay (seconds) per line, ascending.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateAttackArgs {
    /// Attack articles CSV (`article,predicted,low,high`).
    #[arg(long)]
    input: PathBuf,
    /// Revert delays file (one per line) defining the CDF.
    #[arg(long)]
    cdf: PathBuf,
    /// Timing adjustment in seconds.
    #[arg(long, allow_negative_numbers = true)]
    a: i64,
    /// Optional JSON output; the result always prints to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    cdf: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SWEEP_MIN, allow_negative_numbers = true)]
    a_min: i64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_MAX, allow_negative_numbers = true)]
    a_max: i64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_STEP)]
    a_step: i64,
    /// Output CSV (`a,success`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DefenseEvalArgs {
    #[command(subcommand)]
    command: DefenseCommand,
}

#[derive(Subcommand)]
enum DefenseCommand {
    /// Closed-form protection from randomizing capture order.
    RandomizedOrder {
        /// Typical attacker exposure before reversion, seconds.
        #[arg(long)]
        response_delay: f64,
        /// Randomization window, seconds.
        #[arg(long)]
        window: f64,
        /// Optional JSON output; the result always prints to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Survivor reduction from holding snapshots before publication.
    TimeGate {
        /// Revert delays file defining the CDF.
        #[arg(long)]
        durations: PathBuf,
        /// How long vandalism had to survive to be captured with no gate.
        #[arg(long)]
        baseline_window: u64,
        /// Hold length, seconds.
        #[arg(long)]
        hold: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Utility cost of enforcing content hashes.
    HashCost {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long, default_value = "dataset")]
        name: String,
        #[arg(long, default_value_t = 1)]
        release_epoch: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a defense in the simulator against a fully informed attacker.
    Simulate {
        /// Simulation config file.
        #[arg(long)]
        config: PathBuf,
        /// `randomized-order` or `time-gate:<hold-seconds>`.
        #[arg(long)]
        defense: String,
        /// Timing adjustment applied to the attacker's (perfect) predictions.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        a: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DetectDownloadsArgs {
    /// Access log: native CSV or NCSA common/combined (auto-detected).
    #[arg(long)]
    log: PathBuf,
    /// Owned URL set JSON (`{"domains": [...], "urls": [...]}`).
    #[arg(long)]
    owned: PathBuf,
    /// Minimum coverage of the owned set for a session to qualify.
    #[arg(long = "recall", alias = "min-recall", default_value_t = 0.9)]
    min_recall: f64,
    /// Minimum owned share of the session's requests.
    #[arg(long = "precision", alias = "min-precision", default_value_t = 0.5)]
    min_precision: f64,
    /// Idle seconds that split a client's requests into sessions.
    #[arg(long = "gap", alias = "session-gap", default_value_t = 86_400)]
    session_gap: i64,
    /// Output CSV of flagged sessions.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct UaSummaryArgs {
    #[arg(long)]
    log: PathBuf,
    /// Output CSV (`user_agent,requests,fraction`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TimelineArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value_t = 3600)]
    bin_width: i64,
    /// Output CSV (`bin_start_epoch,requests`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation config file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for edits.jsonl, snapshot1.json, snapshot2.json,
    /// truth.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of seeded replicates (seeds base, base+1, ...).
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_MIN, allow_negative_numbers = true)]
    a_min: i64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_MAX, allow_negative_numbers = true)]
    a_max: i64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_STEP)]
    a_step: i64,
    /// JSON output: one full report per seed.
    #[arg(long)]
    out: PathBuf,
}

// ---- run manifest plumbing ------------------------------------------------

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    parameters: BTreeMap<String, String>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    wall_time_seconds: f64,
}

struct Run {
    started: Instant,
    force: bool,
    manifest_override: Option<PathBuf>,
    default_manifest: Option<PathBuf>,
    manifest: RunManifest,
}

impl Run {
    fn new(subcommand: &str, cli: &Cli) -> Run {
        Run {
            started: Instant::now(),
            force: cli.force,
            manifest_override: cli.manifest.clone(),
            default_manifest: None,
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                parameters: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                wall_time_seconds: 0.0,
            },
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.manifest
            .parameters
            .insert(key.to_string(), value.to_string());
    }

    /// Record an input file with its SHA-256 digest.
    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: digest_file(path)?,
        });
        Ok(())
    }

    /// Open an output file for writing, honouring `--force`.
    fn create(&mut self, path: &Path) -> Result<BufWriter<std::fs::File>> {
        if path.exists() && !self.force {
            return Err(Error::invalid(format!(
                "refusing to overwrite {} (pass --force)",
                path.display()
            )));
        }
        let f = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if self.default_manifest.is_none() {
            let mut name = path.as_os_str().to_owned();
            name.push(".manifest.json");
            self.default_manifest = Some(PathBuf::from(name));
        }
        self.manifest.outputs.push(path.display().to_string());
        Ok(BufWriter::new(f))
    }

    /// Put the default manifest inside `dir` (for directory outputs).
    fn manifest_in_dir(&mut self, dir: &Path) {
        self.default_manifest = Some(dir.join("manifest.json"));
    }

    /// Write the manifest (if there is anywhere to write it) and finish.
    fn finish(mut self) -> Result<()> {
        self.manifest.wall_time_seconds = self.started.elapsed().as_secs_f64();
        let path = self
            .manifest_override
            .clone()
            .or(self.default_manifest.clone());
        if let Some(path) = path {
            let f = std::fs::File::create(&path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            serde_json::to_writer_pretty(BufWriter::new(f), &self.manifest).map_err(|e| {
                Error::Json {
                    path: path.display().to_string(),
                    source: e,
                }
            })?;
        }
        Ok(())
    }
}

fn digest_file(path: &Path) -> Result<String> {
    let wrap = |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut f = std::fs::File::open(path).map_err(wrap)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = f.read(&mut buf).map_err(wrap)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(std::io::BufReader::new(f))
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::invalid(format!("bad list entry {p:?}")))
        })
        .collect()
}

fn parse_defense(label: &str) -> Result<Defense> {
    if label == "randomized-order" {
        return Ok(Defense::RandomizedOrder);
    }
    if let Some(hold) = label.strip_prefix("time-gate:") {
        let hold = hold
            .parse::<i64>()
            .map_err(|_| Error::invalid(format!("bad hold in {label:?}")))?;
        if hold < 0 {
            return Err(Error::invalid("hold must be non-negative"));
        }
        return Ok(Defense::TimeGate { hold_seconds: hold });
    }
    Err(Error::invalid(format!(
        "unknown defense {label:?} (expected randomized-order or time-gate:<seconds>)"
    )))
}

/// JSON output with a trailing newline, pretty-printed for human diffing.
fn write_json<W: std::io::Write, T: Serialize>(mut w: W, value: &T, path: &Path) -> Result<()> {
    let wrap_json = |e| Error::Json {
        path: path.display().to_string(),
        source: e,
    };
    serde_json::to_writer_pretty(&mut w, value).map_err(wrap_json)?;
    writeln!(w).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.display().to_string(),
        source: e,
    }
}

/// The informed attacker used for defense replays: predictions at the floor
/// of each article's true second-snapshot capture time.
fn informed_predictions(world: &SimWorld) -> SchedulePrediction {
    SchedulePrediction {
        prev_start_epoch: world.config.snapshot_starts.0,
        next_start_epoch: world.config.snapshot_starts.1,
        predictions: (0..world.config.n_articles)
            .map(|id| (id, world.truth2[id as usize].floor() as i64))
            .collect(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::invalid("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::invalid(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Verify(args) => cmd_verify(&cli, args),
        Command::IntegrityReport(args) => cmd_integrity_report(&cli, args),
        Command::AuditDomains(args) => cmd_audit_domains(&cli, args),
        Command::PlanPurchase(args) => cmd_plan_purchase(&cli, args),
        Command::CostCurve(args) => cmd_cost_curve(&cli, args),
        Command::SignatureScan(args) => cmd_signature_scan(&cli, args),
        Command::Amplify(args) => cmd_amplify(&cli, args),
        Command::InferSchedule(args) => cmd_infer_schedule(&cli, args),
        Command::Predict(args) => cmd_predict(&cli, args),
        Command::PredictionErrors(args) => cmd_prediction_errors(&cli, args),
        Command::Revcdf(args) => cmd_revcdf(&cli, args),
        Command::EstimateAttack(args) => cmd_estimate_attack(&cli, args),
        Command::Sweep(args) => cmd_sweep(&cli, args),
        Command::DefenseEval(args) => cmd_defense_eval(&cli, args),
        Command::DetectDownloads(args) => cmd_detect_downloads(&cli, args),
        Command::UaSummary(args) => cmd_ua_summary(&cli, args),
        Command::Timeline(args) => cmd_timeline(&cli, args),
        Command::Simulate(args) => cmd_simulate(&cli, args),
        Command::Oracle(args) => cmd_oracle(&cli, args),
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<()> {
    let mut run = Run::new("verify", cli);
    run.param("name", &args.name);
    run.param("release_epoch", args.release_epoch);
    run.param("content_dir", args.content_dir.display());
    run.input(&args.index)?;

    let index = read_index_csv_path(&args.index, &args.name, args.release_epoch)?;
    let mut outcomes = Vec::with_capacity(index.entries.len());
    for entry in &index.entries {
        let blob_path = args.content_dir.join(entry.entry_ordinal.to_string());
        let fetched = match std::fs::read(&blob_path) {
            Ok(bytes) => Some(bytes),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => {
                return Err(Error::Io {
                    path: blob_path.display().to_string(),
                    source: e,
                })
            }
        };
        // Offline verification has no media decoder; content validity is
        // the fetcher's concern, so everything retrievable counts as valid.
        outcomes.push(verify_entry(entry, fetched.as_deref(), true));
    }
    let report = integrity_report(&index, &outcomes)?;

    if let Some(path) = &args.out_outcomes {
        let w = run.create(path)?;
        write_outcomes_csv(&index, &outcomes, w)?;
    }
    if let Some(path) = &args.out_json {
        let w = run.create(path)?;
        write_json(w, &report, path)?;
    }
    if let Some(path) = &args.out_csv {
        let w = run.create(path)?;
        write_report_csv(&report, w)?;
    }
    outln!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| Error::Json {
            path: "<stdout>".into(),
            source: e,
        })?
    );
    run.finish()
}

fn cmd_integrity_report(cli: &Cli, args: &IntegrityReportArgs) -> Result<()> {
    let mut run = Run::new("integrity-report", cli);
    run.param("name", &args.name);
    run.input(&args.index)?;
    run.input(&args.outcomes)?;

    let index = read_index_csv_path(&args.index, &args.name, args.release_epoch)?;
    let outcomes = read_outcomes_csv(open(&args.outcomes)?, &index)?;
    let report = integrity_report(&index, &outcomes)?;

    if let Some(path) = &args.out_json {
        let w = run.create(path)?;
        write_json(w, &report, path)?;
    }
    if let Some(path) = &args.out_csv {
        let w = run.create(path)?;
        write_report_csv(&report, w)?;
    }
    outln!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| Error::Json {
            path: "<stdout>".into(),
            source: e,
        })?
    );
    run.finish()
}

fn cmd_audit_domains(cli: &Cli, args: &AuditDomainsArgs) -> Result<()> {
    let mut run = Run::new("audit-domains", cli);
    run.param("min_probes", args.min_probes);
    run.param("min_vantages", args.min_vantages);
    run.param("min_days", args.min_days);
    run.input(&args.probes)?;

    let probes = read_probes_csv(open(&args.probes)?)?;
    let policy = ExpirationPolicy {
        min_probes: args.min_probes,
        min_vantages: args.min_vantages,
        min_days: args.min_days,
    };
    let classes = audit_domains(&probes, policy)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["domain", "class"]).map_err(&wrap)?;
    let mut tallies: BTreeMap<String, u64> = BTreeMap::new();
    for (domain, class) in &classes {
        wtr.write_record([domain.as_str(), &class.to_string()])
            .map_err(&wrap)?;
        *tallies.entry(class.to_string()).or_default() += 1;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    let summary: Vec<String> = tallies.iter().map(|(c, n)| format!("{c}={n}")).collect();
    outln!("{} domains: {}", classes.len(), summary.join(" "));
    run.finish()
}

fn cmd_plan_purchase(cli: &Cli, args: &PlanPurchaseArgs) -> Result<()> {
    let mut run = Run::new("plan-purchase", cli);
    run.param("index_size", args.index_size);
    run.param("budget_cents", args.budget_cents);
    run.input(&args.domains)?;

    let records = read_domain_records_csv(open(&args.domains)?)?;
    let plan = plan_purchase(&records, args.index_size, args.budget_cents)?;
    let w = run.create(&args.out)?;
    write_plan_csv(&plan, w)?;
    outln!(
        "selected {} domains for {} cents: {} images, {:.6} of the index",
        plan.selected.len(),
        plan.total_cost_cents,
        plan.controlled_images,
        plan.controlled_fraction
    );
    run.finish()
}

fn cmd_cost_curve(cli: &Cli, args: &CostCurveArgs) -> Result<()> {
    let mut run = Run::new("cost-curve", cli);
    run.param("index_size", args.index_size);
    run.param("budgets", &args.budgets);
    run.input(&args.domains)?;

    let records = read_domain_records_csv(open(&args.domains)?)?;
    let budgets = parse_u64_list(&args.budgets)?;
    let curve = cost_curve(&records, args.index_size, &budgets)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["budget_cents", "controlled_fraction"])
        .map_err(&wrap)?;
    for (budget, fraction) in &curve {
        wtr.write_record([budget.to_string(), fraction.to_string()])
            .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    outln!("cost curve over {} budgets written", curve.len());
    run.finish()
}

fn cmd_signature_scan(cli: &Cli, args: &SignatureScanArgs) -> Result<()> {
    let mut run = Run::new("signature-scan", cli);
    run.param("name", &args.name);
    run.param("release_epoch", args.release_epoch);
    run.input(&args.index)?;
    run.input(&args.outcomes)?;
    run.input(&args.whois)?;

    let index = read_index_csv_path(&args.index, &args.name, args.release_epoch)?;
    let outcomes = read_outcomes_csv(open(&args.outcomes)?, &index)?;
    let whois = read_whois_csv(open(&args.whois)?)?;
    let rules = match &args.suffix_rules {
        Some(path) => {
            run.input(path)?;
            read_suffix_rules_path(path)?
        }
        None => SuffixRules::builtin(),
    };
    let flagged = attack_signature_scan(&index, &outcomes, &whois, &rules)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["domain", "modified_count", "purchase_epoch"])
        .map_err(&wrap)?;
    for f in &flagged {
        wtr.write_record([
            f.domain.clone(),
            f.modified_count.to_string(),
            f.purchase_epoch.to_string(),
        ])
        .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    outln!("{} domains flagged", flagged.len());
    run.finish()
}

fn cmd_amplify(cli: &Cli, args: &AmplifyArgs) -> Result<()> {
    let mut run = Run::new("amplify", cli);
    run.param("poison_bytes", args.poison_bytes);
    run.input(&args.corpora)?;

    let corpora = read_corpora_csv(open(&args.corpora)?)?;
    let fractions = amplification(args.poison_bytes, &corpora)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["corpus", "poisoned_fraction"])
        .map_err(&wrap)?;
    for (corpus, fraction) in &fractions {
        wtr.write_record([corpus.clone(), format!("{fraction:e}")])
            .map_err(&wrap)?;
        outln!("{corpus}: {fraction:e}");
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    run.finish()
}

fn cmd_infer_schedule(cli: &Cli, args: &InferScheduleArgs) -> Result<()> {
    let mut run = Run::new("infer-schedule", cli);
    if let Some(n) = args.next_start {
        run.param("next_start", n);
    }
    run.param("single_sided_weight", args.single_sided_weight);
    run.input(&args.edits)?;
    run.input(&args.snapshot)?;

    let edits = read_edit_log_path(&args.edits)?;
    let meta = read_snapshot_meta_path(&args.snapshot)?;
    let memberships = classify_membership(&edits, &meta)?;
    if let Some(threshold) = args.detect_reset_threshold {
        let resets = detect_job_boundaries(&edits, &memberships, threshold)?;
        if resets.is_empty() {
            outln!("no job-boundary resets detected (threshold {threshold} s)");
        } else {
            let list: Vec<String> = resets.iter().map(|b| b.to_string()).collect();
            outln!("job-boundary resets at articles: {}", list.join(","));
        }
    }
    let intervals = infer_intervals(&edits, &memberships, &meta, args.next_start)?;
    let options = FitOptions {
        single_sided_weight: args.single_sided_weight,
    };
    let fits = fit_all_jobs(&intervals, options)?;

    let w = run.create(&args.out_intervals)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out_intervals);
    wtr.write_record(["article", "job", "low", "high", "low_seeded", "high_seeded"])
        .map_err(&wrap)?;
    for iv in &intervals {
        wtr.write_record([
            iv.article_id.to_string(),
            iv.job_index.to_string(),
            iv.low.to_string(),
            iv.high.to_string(),
            iv.low_seeded.to_string(),
            iv.high_seeded.to_string(),
        ])
        .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out_intervals.display().to_string(),
        source: e,
    })?;

    if let Some(path) = &args.out_fits {
        let w = run.create(path)?;
        let mut wtr = csv_writer(w);
        let wrap = csv_err(path);
        wtr.write_record([
            "job",
            "slope",
            "intercept",
            "mean_abs_bound_error",
            "n_two_sided",
            "n_single_sided",
        ])
        .map_err(&wrap)?;
        for fit in &fits {
            wtr.write_record([
                fit.job_index.to_string(),
                fit.slope.to_string(),
                fit.intercept.to_string(),
                fit.mean_abs_bound_error.to_string(),
                fit.n_two_sided.to_string(),
                fit.n_single_sided.to_string(),
            ])
            .map_err(&wrap)?;
        }
        wtr.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }

    outln!("{} intervals across {} jobs", intervals.len(), fits.len());
    for fit in &fits {
        outln!(
            "job {}: slope {:.6} s/article, intercept {:.1}, mean bound error {:.1} s ({} two-sided, {} single-sided)",
            fit.job_index, fit.slope, fit.intercept, fit.mean_abs_bound_error, fit.n_two_sided, fit.n_single_sided
        );
    }
    run.finish()
}

fn cmd_predict(cli: &Cli, args: &PredictArgs) -> Result<()> {
    let mut run = Run::new("predict", cli);
    run.param("next_start", args.next_start);
    run.param("single_sided_weight", args.single_sided_weight);
    run.input(&args.edits)?;
    run.input(&args.snapshot)?;

    let edits = read_edit_log_path(&args.edits)?;
    let meta = read_snapshot_meta_path(&args.snapshot)?;
    let memberships = classify_membership(&edits, &meta)?;
    let cap = args.cap.unwrap_or(args.next_start);
    let intervals = infer_intervals(&edits, &memberships, &meta, Some(cap))?;
    let options = FitOptions {
        single_sided_weight: args.single_sided_weight,
    };
    let fits = fit_all_jobs(&intervals, options)?;
    let articles: Vec<u64> = intervals.iter().map(|iv| iv.article_id).collect();
    let boundaries = match &args.boundaries {
        Some(list) => Some(parse_u64_list(list)?),
        None => None,
    };
    let prediction = predict_next(
        &fits,
        &meta,
        args.next_start,
        &articles,
        boundaries.as_deref(),
    )?;

    let w = run.create(&args.out)?;
    write_json(w, &prediction, &args.out)?;
    outln!(
        "predicted {} articles for the snapshot starting at {}",
        prediction.predictions.len(),
        args.next_start
    );
    run.finish()
}

fn cmd_prediction_errors(cli: &Cli, args: &PredictionErrorsArgs) -> Result<()> {
    let mut run = Run::new("prediction-errors", cli);
    run.param("bin_width", args.bin_width);
    run.input(&args.predictions)?;
    run.input(&args.edits)?;
    run.input(&args.snapshot)?;

    let prediction: SchedulePrediction = serde_json::from_reader(open(&args.predictions)?)
        .map_err(|e| Error::Json {
            path: args.predictions.display().to_string(),
            source: e,
        })?;
    let edits = read_edit_log_path(&args.edits)?;
    let meta = read_snapshot_meta_path(&args.snapshot)?;
    let memberships = classify_membership(&edits, &meta)?;
    let intervals = infer_intervals(&edits, &memberships, &meta, args.next_start)?;
    let fits = fit_all_jobs(&intervals, FitOptions::default())?;
    let dist = prediction_error_distribution(&prediction, &fits, &meta, args.bin_width)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["article", "error_seconds"])
        .map_err(&wrap)?;
    for (id, err) in &dist.errors {
        wtr.write_record([id.to_string(), err.to_string()])
            .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;

    if let Some(path) = &args.out_bins {
        let w = run.create(path)?;
        let mut wtr = csv_writer(w);
        let wrap = csv_err(path);
        wtr.write_record(["bin_start_seconds", "count"])
            .map_err(&wrap)?;
        for (bin, count) in &dist.bins {
            wtr.write_record([(bin * dist.bin_width).to_string(), count.to_string()])
                .map_err(&wrap)?;
        }
        wtr.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    outln!(
        "{} predictions scored: mean error {:.1} s",
        dist.n,
        dist.mean_error
    );
    run.finish()
}

fn cmd_revcdf(cli: &Cli, args: &RevcdfArgs) -> Result<()> {
    let mut run = Run::new("revcdf", cli);
    run.input(&args.edits)?;

    let markers = match &args.markers {
        Some(path) => {
            run.input(path)?;
            read_marker_file_path(path)?
        }
        None => RevertMarkerSet::english_default(),
    };
    let edits = read_edit_log_path(&args.edits)?;
    let scan = reversion_durations(&edits, &markers)?;
    let cdf = build_cdf(scan.durations.clone())?;

    let w = run.create(&args.out)?;
    poisonscan::reversion::write_durations(cdf.sorted_durations(), w)?;
    outln!(
        "{} revert delays ({} negative dropped, {} first-revision reverts); within 30 min: {:.3}, beyond: {:.3}",
        cdf.n(),
        scan.negative_dropped,
        scan.first_revision_reverts,
        cdf.evaluate(1800.0),
        cdf.survival(1800.0)
    );
    run.finish()
}

fn cmd_estimate_attack(cli: &Cli, args: &EstimateAttackArgs) -> Result<()> {
    let mut run = Run::new("estimate-attack", cli);
    run.param("a", args.a);
    run.input(&args.input)?;
    run.input(&args.cdf)?;

    let articles = read_attack_csv_path(&args.input)?;
    let cdf = build_cdf(read_durations_path(&args.cdf)?)?;
    let est = estimate(&articles, args.a, &cdf)?;
    if let Some(path) = &args.out {
        let w = run.create(path)?;
        write_json(w, &est, path)?;
    }
    outln!(
        "a={} expected success {:.6} over {} articles",
        est.a,
        est.success_fraction,
        est.n_articles
    );
    run.finish()
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let mut run = Run::new("sweep", cli);
    run.param("a_min", args.a_min);
    run.param("a_max", args.a_max);
    run.param("a_step", args.a_step);
    run.input(&args.input)?;
    run.input(&args.cdf)?;

    let articles = read_attack_csv_path(&args.input)?;
    let cdf = build_cdf(read_durations_path(&args.cdf)?)?;
    let result = sweep(&articles, &cdf, args.a_min, args.a_max, args.a_step)?;

    let w = run.create(&args.out)?;
    write_curve_csv(&result.curve, w)?;
    outln!(
        "a*={} with expected success {:.6} ({} grid points)",
        result.best_a,
        result.best_success,
        result.curve.len()
    );
    run.finish()
}

fn cmd_defense_eval(cli: &Cli, args: &DefenseEvalArgs) -> Result<()> {
    match &args.command {
        DefenseCommand::RandomizedOrder {
            response_delay,
            window,
            out,
        } => {
            let mut run = Run::new("defense-eval randomized-order", cli);
            run.param("response_delay", response_delay);
            run.param("window", window);
            let protection = randomized_order_protection(*response_delay, *window)?;
            #[derive(Serialize)]
            struct Report {
                response_delay_seconds: f64,
                window_seconds: f64,
                protected_fraction: f64,
            }
            let report = Report {
                response_delay_seconds: *response_delay,
                window_seconds: *window,
                protected_fraction: protection,
            };
            if let Some(path) = out {
                let w = run.create(path)?;
                write_json(w, &report, path)?;
            }
            outln!("randomized-order protection: {protection:.6}");
            run.finish()
        }
        DefenseCommand::TimeGate {
            durations,
            baseline_window,
            hold,
            out,
        } => {
            let mut run = Run::new("defense-eval time-gate", cli);
            run.param("baseline_window", baseline_window);
            run.param("hold", hold);
            run.input(durations)?;
            let cdf = build_cdf(read_durations_path(durations)?)?;
            let reduction = time_gate_reduction(&cdf, *baseline_window, *hold)?;
            if let Some(path) = out {
                let w = run.create(path)?;
                write_json(w, &reduction, path)?;
            }
            match reduction.reduction_factor {
                Some(factor) => {
                    outln!(
                    "time-gate {}s: surviving vandalism {:.4} -> {:.4} ({factor:.2}x reduction)",
                    hold, reduction.survival_baseline, reduction.survival_held
                )
                }
                None => outln!(
                    "time-gate {}s: surviving vandalism {:.4} -> 0 (eliminated)",
                    hold,
                    reduction.survival_baseline
                ),
            }
            run.finish()
        }
        DefenseCommand::HashCost {
            index,
            outcomes,
            name,
            release_epoch,
            out,
        } => {
            let mut run = Run::new("defense-eval hash-cost", cli);
            run.param("name", name);
            run.input(index)?;
            run.input(outcomes)?;
            let idx = read_index_csv_path(index, name, *release_epoch)?;
            let outs = read_outcomes_csv(open(outcomes)?, &idx)?;
            let report = integrity_report(&idx, &outs)?;
            let cost = hash_defense_cost(&report)?;
            if let Some(path) = out {
                let w = run.create(path)?;
                write_json(w, &cost, path)?;
            }
            outln!(
                "hash enforcement: protection {:.2}, rejects {:.4} of live entries",
                cost.protection,
                cost.broken_fraction
            );
            run.finish()
        }
        DefenseCommand::Simulate {
            config,
            defense,
            a,
            out,
        } => {
            let mut run = Run::new("defense-eval simulate", cli);
            run.param("defense", defense);
            run.param("a", a);
            run.input(config)?;
            let mut sim_config = read_sim_config_path(config)?;
            if let Some(seed) = cli.seed {
                sim_config.seed = seed;
            }
            run.param("seed", sim_config.seed);
            let defense = parse_defense(defense)?;
            let world = generate_world(&sim_config)?;
            let predictions = informed_predictions(&world);
            let outcome = simulate_defense(
                &world,
                &predictions,
                *a,
                defense,
                sim_config.seed.wrapping_add(1),
            )?;
            if let Some(path) = out {
                let w = run.create(path)?;
                write_json(w, &outcome, path)?;
            }
            outln!(
                "{}: undefended success {:.4}, defended {:.4}, protected {:.4}",
                outcome.defense,
                outcome.undefended_success,
                outcome.defended_success,
                outcome.protected_fraction
            );
            run.finish()
        }
    }
}

fn cmd_detect_downloads(cli: &Cli, args: &DetectDownloadsArgs) -> Result<()> {
    let mut run = Run::new("detect-downloads", cli);
    run.param("min_recall", args.min_recall);
    run.param("min_precision", args.min_precision);
    run.param("session_gap", args.session_gap);
    run.input(&args.log)?;
    run.input(&args.owned)?;

    let parsed = parse_log_path(&args.log)?;
    let owned = read_owned_set(open(&args.owned)?)?;
    let thresholds = DetectionThresholds {
        min_recall: args.min_recall,
        min_precision: args.min_precision,
        session_gap_seconds: args.session_gap,
    };
    let report = detect_downloads(&parsed.records, &owned, &thresholds)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record([
        "client_key",
        "start_epoch",
        "end_epoch",
        "n_requests",
        "n_owned_requests",
        "distinct_owned_urls",
        "recall",
        "precision",
        "spearman",
        "sequential",
    ])
    .map_err(&wrap)?;
    for f in &report.flagged {
        wtr.write_record([
            f.client_key.clone(),
            f.start_epoch.to_string(),
            f.end_epoch.to_string(),
            f.n_requests.to_string(),
            f.n_owned_requests.to_string(),
            f.distinct_owned_urls.to_string(),
            f.recall.to_string(),
            f.precision.to_string(),
            f.spearman.map(|s| s.to_string()).unwrap_or_default(),
            f.sequential.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    outln!(
        "{} records ({} skipped), {} clients, {} sessions, {} flagged",
        report.n_records,
        parsed.skipped,
        report.n_clients,
        report.n_sessions,
        report.flagged.len()
    );
    run.finish()
}

fn cmd_ua_summary(cli: &Cli, args: &UaSummaryArgs) -> Result<()> {
    let mut run = Run::new("ua-summary", cli);
    run.input(&args.log)?;

    let parsed = parse_log_path(&args.log)?;
    let summary = user_agent_summary(&parsed.records)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["user_agent", "requests", "fraction"])
        .map_err(&wrap)?;
    for ua in &summary {
        wtr.write_record([
            ua.user_agent.clone(),
            ua.requests.to_string(),
            ua.fraction.to_string(),
        ])
        .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    for ua in summary.iter().take(5) {
        outln!(
            "{:>7} requests {:.4}  {}",
            ua.requests,
            ua.fraction,
            ua.user_agent
        );
    }
    run.finish()
}

fn cmd_timeline(cli: &Cli, args: &TimelineArgs) -> Result<()> {
    let mut run = Run::new("timeline", cli);
    run.param("bin_width", args.bin_width);
    run.input(&args.log)?;

    let parsed = parse_log_path(&args.log)?;
    let bins = timeline(&parsed.records, args.bin_width)?;

    let w = run.create(&args.out)?;
    let mut wtr = csv_writer(w);
    let wrap = csv_err(&args.out);
    wtr.write_record(["bin_start_epoch", "requests"])
        .map_err(&wrap)?;
    for (bin, count) in &bins {
        wtr.write_record([bin.to_string(), count.to_string()])
            .map_err(&wrap)?;
    }
    wtr.flush().map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    outln!("{} occupied bins of {} s", bins.len(), args.bin_width);
    run.finish()
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let mut run = Run::new("simulate", cli);
    run.input(&args.config)?;

    let mut config = read_sim_config_path(&args.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    run.param("seed", config.seed);
    let world = generate_world(&config)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::Io {
        path: args.out_dir.display().to_string(),
        source: e,
    })?;
    run.manifest_in_dir(&args.out_dir);

    let w = run.create(&args.out_dir.join("edits.jsonl"))?;
    write_edit_log(&world.edits, w)?;
    let w = run.create(&args.out_dir.join("snapshot1.json"))?;
    write_snapshot_meta(&world.meta1, w)?;
    let w = run.create(&args.out_dir.join("snapshot2.json"))?;
    write_snapshot_meta(&world.meta2, w)?;
    let w = run.create(&args.out_dir.join("truth.csv"))?;
    write_truth_csv(&world, w)?;

    outln!(
        "world seed {}: {} articles, {} edits, captured {} / {} articles in snapshots 1 / 2",
        config.seed,
        config.n_articles,
        world.edits.len(),
        world.meta1.captured.len(),
        world.meta2.captured.len()
    );
    run.finish()
}

fn cmd_oracle(cli: &Cli, args: &OracleArgs) -> Result<()> {
    let mut run = Run::new("oracle", cli);
    run.param("seeds", args.seeds);
    run.param("a_min", args.a_min);
    run.param("a_max", args.a_max);
    run.param("a_step", args.a_step);
    run.input(&args.config)?;

    if args.seeds == 0 {
        return Err(Error::invalid("--seeds must be at least 1"));
    }
    let mut config = read_sim_config_path(&args.config)?;
    let base_seed = cli.seed.unwrap_or(config.seed);
    run.param("seed", base_seed);

    outln!("seed  contain1  contain2  best_a  analytic  empirical  max_gap");
    let mut reports = Vec::with_capacity(args.seeds as usize);
    for i in 0..args.seeds {
        config.seed = base_seed + i;
        let world = generate_world(&config)?;
        let report = oracle_pipeline(&world, args.a_min, args.a_max, args.a_step)?;
        let empirical_best = report
            .empirical_curve
            .iter()
            .map(|&(_, s)| s)
            .fold(0.0, f64::max);
        outln!(
            "{:<5} {:<9.4} {:<9.4} {:<7} {:<9.4} {:<10.4} {:+.4}",
            config.seed,
            report.containment1,
            report.containment2,
            report.analytic.best_a,
            report.analytic.best_success,
            empirical_best,
            report.max_conservativeness_gap
        );
        reports.push(report);
    }
    let w = run.create(&args.out)?;
    write_json(w, &reports, &args.out)?;
    run.finish()
}
