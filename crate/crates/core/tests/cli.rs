//! End-to-end tests of the `poisonscan` binary: the full simulate →
//! infer → predict → sweep chain, the integrity pipeline, exit codes, the
//! overwrite guard, and run-manifest contents.

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_poisonscan");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "poisonscan {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, content: &str) {
    std::fs::write(dir.join(name), content).unwrap();
}

const SIM_CONF: &str = "\
n_articles = 300\n\
n_jobs = 2\n\
crawl_rate = 0.01\n\
edit_rate = 6\n\
revert_probability = 0.3\n\
reversion_delay = exponential:900\n\
snapshot_start_1 = 1000000\n\
snapshot_start_2 = 1040000\n\
seed = 11\n";

#[test]
fn the_full_analysis_chain_runs_from_the_command_line() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "sim.conf", SIM_CONF);

    let out = run_ok(
        dir,
        &["simulate", "--config", "sim.conf", "--out-dir", "world"],
    );
    assert!(out.contains("world seed 11"), "{out}");
    for f in [
        "edits.jsonl",
        "snapshot1.json",
        "snapshot2.json",
        "truth.csv",
        "manifest.json",
    ] {
        assert!(dir.join("world").join(f).exists(), "missing world/{f}");
    }

    let out = run_ok(
        dir,
        &[
            "infer-schedule",
            "--edits",
            "world/edits.jsonl",
            "--snapshot",
            "world/snapshot1.json",
            "--next-start",
            "1040000",
            "--out-intervals",
            "intervals.csv",
            "--out-fits",
            "fits.csv",
        ],
    );
    assert!(out.contains("intervals across 2 jobs"), "{out}");
    let intervals = std::fs::read_to_string(dir.join("intervals.csv")).unwrap();
    assert!(intervals.starts_with("article,job,low,high,low_seeded,high_seeded"));

    run_ok(
        dir,
        &[
            "predict",
            "--edits",
            "world/edits.jsonl",
            "--snapshot",
            "world/snapshot1.json",
            "--next-start",
            "1040000",
            "--out",
            "pred.json",
        ],
    );
    let pred: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("pred.json")).unwrap()).unwrap();
    assert_eq!(pred["next_start_epoch"], 1_040_000);
    assert!(pred["predictions"].as_array().unwrap().len() > 100);

    let out = run_ok(
        dir,
        &[
            "revcdf",
            "--edits",
            "world/edits.jsonl",
            "--out",
            "delays.txt",
        ],
    );
    assert!(out.contains("revert delays"), "{out}");

    // Build the attack input from intervals + predictions with plain string
    // munging — the CLI's own files must be enough to connect the stages.
    let mut by_id = std::collections::BTreeMap::new();
    for line in intervals.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        by_id.insert(
            cols[0].to_string(),
            (cols[2].to_string(), cols[3].to_string()),
        );
    }
    let mut attack = String::from("article,predicted,low,high\n");
    for p in pred["predictions"].as_array().unwrap() {
        let id = p[0].to_string();
        let predicted = p[1].to_string();
        if let Some((low, high)) = by_id.get(&id) {
            attack.push_str(&format!("{id},{predicted},{low},{high}\n"));
        }
    }
    write(dir, "attack.csv", &attack);

    let out = run_ok(
        dir,
        &[
            "sweep",
            "--input",
            "attack.csv",
            "--cdf",
            "delays.txt",
            "--a-min",
            "-3600",
            "--a-max",
            "3600",
            "--a-step",
            "60",
            "--out",
            "curve.csv",
        ],
    );
    assert!(out.starts_with("a*="), "{out}");
    let curve = std::fs::read_to_string(dir.join("curve.csv")).unwrap();
    assert_eq!(
        curve.lines().count(),
        1 + 121,
        "one row per grid point plus header"
    );

    let out = run_ok(
        dir,
        &[
            "estimate-attack",
            "--input",
            "attack.csv",
            "--cdf",
            "delays.txt",
            "--a",
            "-600",
        ],
    );
    assert!(out.contains("a=-600 expected success"), "{out}");
}

#[test]
fn simulate_is_deterministic_and_seed_overridable() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "sim.conf", SIM_CONF);
    run_ok(dir, &["simulate", "--config", "sim.conf", "--out-dir", "a"]);
    run_ok(dir, &["simulate", "--config", "sim.conf", "--out-dir", "b"]);
    run_ok(
        dir,
        &[
            "simulate",
            "--config",
            "sim.conf",
            "--out-dir",
            "c",
            "--seed",
            "12",
        ],
    );
    let a = std::fs::read(dir.join("a/edits.jsonl")).unwrap();
    let b = std::fs::read(dir.join("b/edits.jsonl")).unwrap();
    let c = std::fs::read(dir.join("c/edits.jsonl")).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical worlds");
    assert_ne!(a, c, "--seed must override the config seed");
}

#[test]
fn verify_reports_and_outcomes_match_the_planted_corruption() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::create_dir(dir.join("blobs")).unwrap();
    std::fs::write(dir.join("blobs/0"), b"intact bytes").unwrap();
    std::fs::write(dir.join("blobs/1"), b"swapped bytes").unwrap();
    // Ordinal 2 has no blob at all.
    let good = hex::encode(Sha256::digest(b"intact bytes"));
    let expected_elsewhere = hex::encode(Sha256::digest(b"original bytes"));
    write(
        dir,
        "index.csv",
        &format!(
            "ordinal,url,caption,sha256\n\
             0,http://a.example/0.jpg,zero,{good}\n\
             1,http://b.example/1.jpg,one,{expected_elsewhere}\n\
             2,http://c.example/2.jpg,two,{good}\n"
        ),
    );
    let out = run_ok(
        dir,
        &[
            "verify",
            "--index",
            "index.csv",
            "--content-dir",
            "blobs",
            "--out-outcomes",
            "outcomes.csv",
            "--out-json",
            "report.json",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["total"], 3);
    assert_eq!(report["hash_match"], 1);
    assert_eq!(report["hash_mismatch"], 1);
    assert_eq!(report["missing"], 1);
    let outcomes = std::fs::read_to_string(dir.join("outcomes.csv")).unwrap();
    assert_eq!(
        outcomes,
        "ordinal,outcome\n0,intact\n1,modified\n2,missing\n"
    );

    // The written JSON must round-trip the stdout report.
    let disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(disk, report);

    // And integrity-report over the stored outcomes reproduces it.
    let again = run_ok(
        dir,
        &[
            "integrity-report",
            "--index",
            "index.csv",
            "--outcomes",
            "outcomes.csv",
        ],
    );
    let again: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(again, report);
}

#[test]
fn errors_are_one_line_with_contracted_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();

    // Unknown subcommand: usage error, exit 1.
    let out = run(dir, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    // Missing input file: io error, exit 1, single stderr line.
    let out = run(dir, &["revcdf", "--edits", "nope.jsonl", "--out", "x.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.starts_with("error[io]:"), "stderr: {stderr}");

    // Mutually inconsistent inputs: an edit that missed the snapshot happened
    // before one it captured. Contradiction, exit 2.
    write(
        dir,
        "edits.jsonl",
        "{\"article\":1,\"rev\":1,\"epoch\":500,\"comment\":\"a\"}\n\
         {\"article\":1,\"rev\":2,\"epoch\":100,\"comment\":\"b\"}\n",
    );
    write(
        dir,
        "meta.json",
        "{\"snapshot_id\":\"s1\",\"start_epoch\":50,\"boundaries\":[],\"captured\":{\"1\":1}}",
    );
    let out = run(
        dir,
        &[
            "infer-schedule",
            "--edits",
            "edits.jsonl",
            "--snapshot",
            "meta.json",
            "--out-intervals",
            "iv.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.starts_with("error[contradiction]:"),
        "stderr: {stderr}"
    );
    assert_eq!(stderr.lines().count(), 1);

    // Help exits 0.
    let out = run(dir, &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    // --jobs 0 is rejected.
    let out = run(
        dir,
        &["--jobs", "0", "timeline", "--log", "x", "--out", "y"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_never_overwritten_without_force() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(
        dir,
        "log.csv",
        "epoch,client_key,url,user_agent,status\n100,c1,http://a.example/x,ua,200\n",
    );
    run_ok(
        dir,
        &[
            "timeline",
            "--log",
            "log.csv",
            "--bin-width",
            "60",
            "--out",
            "tl.csv",
        ],
    );
    let out = run(
        dir,
        &[
            "timeline",
            "--log",
            "log.csv",
            "--bin-width",
            "60",
            "--out",
            "tl.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("refusing to overwrite"), "stderr: {stderr}");
    run_ok(
        dir,
        &[
            "--force",
            "timeline",
            "--log",
            "log.csv",
            "--bin-width",
            "60",
            "--out",
            "tl.csv",
        ],
    );
}

#[test]
fn manifests_record_digests_parameters_and_outputs() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let log = "epoch,client_key,url,user_agent,status\n\
               100,c1,http://a.example/x,ua,200\n\
               250,c2,http://a.example/y,ua,200\n";
    write(dir, "log.csv", log);
    run_ok(
        dir,
        &[
            "timeline",
            "--log",
            "log.csv",
            "--bin-width",
            "60",
            "--out",
            "tl.csv",
        ],
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("tl.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["subcommand"], "timeline");
    assert_eq!(manifest["parameters"]["bin_width"], "60");
    assert_eq!(manifest["outputs"][0], "tl.csv");
    assert_eq!(
        manifest["inputs"][0]["sha256"],
        hex::encode(Sha256::digest(log.as_bytes())),
        "manifest digest must match the input bytes"
    );
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);

    // Same run again: identical manifest except for wall time.
    run_ok(
        dir,
        &[
            "--force",
            "timeline",
            "--log",
            "log.csv",
            "--bin-width",
            "60",
            "--out",
            "tl.csv",
        ],
    );
    let mut second: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("tl.csv.manifest.json")).unwrap())
            .unwrap();
    let mut first = manifest;
    first["wall_time_seconds"] = 0.into();
    second["wall_time_seconds"] = 0.into();
    assert_eq!(
        first, second,
        "manifest must be idempotent modulo wall time"
    );

    // --manifest redirects it.
    run_ok(
        dir,
        &[
            "--force",
            "--manifest",
            "custom.json",
            "timeline",
            "--log",
            "log.csv",
            "--bin-width",
            "60",
            "--out",
            "tl.csv",
        ],
    );
    assert!(dir.join("custom.json").exists());
}

#[test]
fn detect_downloads_flags_the_obvious_crawler() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let mut log = String::from("epoch,client_key,url,user_agent,status\n");
    for i in 0..20 {
        log.push_str(&format!(
            "{},bot,http://img.example/f{i}.jpg,crawler,200\n",
            1000 + i * 5
        ));
    }
    log.push_str("2000,person,http://elsewhere.example/,browser,200\n");
    write(dir, "access.csv", &log);
    let urls: Vec<String> = (0..20)
        .map(|i| format!("\"http://img.example/f{i}.jpg\""))
        .collect();
    write(
        dir,
        "owned.json",
        &format!(
            "{{\"domains\":[\"img.example\"],\"urls\":[{}]}}",
            urls.join(",")
        ),
    );
    let out = run_ok(
        dir,
        &[
            "detect-downloads",
            "--log",
            "access.csv",
            "--owned",
            "owned.json",
            "--out",
            "hits.csv",
        ],
    );
    assert!(out.contains("1 flagged"), "{out}");
    let hits = std::fs::read_to_string(dir.join("hits.csv")).unwrap();
    let mut lines = hits.lines();
    assert_eq!(
        lines.next().unwrap(),
        "client_key,start_epoch,end_epoch,n_requests,n_owned_requests,distinct_owned_urls,recall,precision,spearman,sequential"
    );
    let row = lines.next().unwrap();
    assert!(
        row.starts_with("bot,1000,1095,20,20,20,1,1,1,true"),
        "{row}"
    );
}

#[test]
fn defense_eval_subcommands_emit_their_scores() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let out = run_ok(
        dir,
        &[
            "defense-eval",
            "randomized-order",
            "--response-delay",
            "9000",
            "--window",
            "86400",
        ],
    );
    assert!(out.contains("0.895833"), "{out}");

    write(
        dir,
        "delays.txt",
        "10\n20\n30\n40\n50\n3600\n7200\n10800\n14400\n100000\n",
    );
    let out = run_ok(
        dir,
        &[
            "defense-eval",
            "time-gate",
            "--durations",
            "delays.txt",
            "--baseline-window",
            "300",
            "--hold",
            "86400",
        ],
    );
    assert!(out.contains("5.00x reduction"), "{out}");

    write(dir, "sim.conf", SIM_CONF);
    let out = run_ok(
        dir,
        &[
            "defense-eval",
            "simulate",
            "--config",
            "sim.conf",
            "--defense",
            "time-gate:0",
            "--a",
            "0",
        ],
    );
    // A zero-second gate defends nothing: both numbers equal on one line.
    let line = out.lines().next().unwrap();
    assert!(line.contains("time-gate:0"), "{out}");
    let nums: Vec<f64> = line
        .split(|c: char| !(c.is_ascii_digit() || c == '.'))
        .filter(|s| s.contains('.'))
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(
        nums[0], nums[1],
        "undefended and defended success differ: {out}"
    );
}
