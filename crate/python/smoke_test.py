#!/usr/bin/env python3
"""Smoke test for the poisonscan Python bindings.

Builds nothing itself: run `cargo build -p poisonscan-py --release` first.
The script stages the compiled cdylib under its importable name, imports it,
and pushes a small fixture through every exposed function, checking known
values along the way.

    cargo build -p poisonscan-py --release
    python3 python/smoke_test.py
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module(stage_dir: Path):
    """Import poisonscan_py, staging the cdylib from target/ if needed."""
    try:
        import poisonscan_py  # already installed (e.g. via maturin)

        return poisonscan_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        built = REPO / "target" / profile / "libpoisonscan_py.so"
        if built.exists():
            shutil.copy2(built, stage_dir / "poisonscan_py.so")
            sys.path.insert(0, str(stage_dir))
            import poisonscan_py

            return poisonscan_py
    sys.exit("cdylib not found: run `cargo build -p poisonscan-py --release` first")


checks = 0


def check(label: str, ok: bool, detail: str = ""):
    global checks
    checks += 1
    if not ok:
        sys.exit(f"FAIL {label}{': ' + detail if detail else ''}")
    print(f"ok {label}")


def main():
    tmp = Path(tempfile.mkdtemp(prefix="poisonscan-smoke-"))
    ps = load_module(tmp)

    # --- hashing -----------------------------------------------------------
    check(
        "content_hash empty input",
        ps.content_hash(b"")
        == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
    )
    check(
        "content_hash abc",
        ps.content_hash(b"abc")
        == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
    )

    # --- dataset verification ---------------------------------------------
    blobs = tmp / "blobs"
    blobs.mkdir()
    (blobs / "0").write_bytes(b"intact bytes")
    (blobs / "1").write_bytes(b"swapped bytes")
    good = ps.content_hash(b"intact bytes")
    other = ps.content_hash(b"original bytes")
    (tmp / "index.csv").write_text(
        "ordinal,url,caption,sha256\n"
        f"0,http://a.example/0.jpg,zero,{good}\n"
        f"1,http://b.example/1.jpg,one,{other}\n"
        f"2,http://c.example/2.jpg,two,{good}\n"
    )
    report = ps.verify_index(str(tmp / "index.csv"), str(blobs))
    check(
        "verify_index outcome counts",
        (report["total"], report["hash_match"], report["hash_mismatch"], report["missing"])
        == (3, 1, 1, 1),
        json.dumps(report),
    )

    # --- reversion CDF -----------------------------------------------------
    cdf = ps.Cdf([10, 20, 30, 40, 50, 3600, 7200, 10800, 14400, 100000])
    check("cdf size", cdf.n == 10 and len(cdf) == 10)
    check("cdf evaluate", cdf.evaluate(50.0) == 0.5 and cdf.evaluate(9.0) == 0.0)
    check("cdf survival", cdf.survival(300.0) == 0.5)
    check("cdf count_le", cdf.count_le(86400.0) == 9)
    check("cdf durations sorted", cdf.durations()[0] == 10 and cdf.durations()[-1] == 100000)

    # --- defenses -----------------------------------------------------------
    p = ps.randomized_order_protection(9000.0, 86400.0)
    check("randomized-order closed form", abs(p - 0.8958333333) < 5e-4, str(p))
    gate = ps.time_gate_reduction(cdf, 300, 86400)
    check(
        "time-gate reduction factor",
        gate["surviving_baseline"] == 5
        and gate["surviving_held"] == 1
        and gate["reduction_factor"] == 5.0,
        json.dumps(gate),
    )

    # --- attack estimation ---------------------------------------------------
    slow = ps.Cdf([10000])
    check(
        "estimate_attack in-window edit sticks",
        ps.estimate_attack([(1, 0, 0, 7200)], 0, slow) == 1.0,
    )
    check(
        "estimate_attack late edit misses",
        ps.estimate_attack([(1, 0, 0, 7200)], 1, slow) == 0.0,
    )
    fast = ps.Cdf([60])
    check(
        "estimate_attack fast reverts win",
        ps.estimate_attack([(1, 0, 0, 7200)], 0, fast) == 0.0,
    )
    swept = ps.sweep_attack([(1, 0, 0, 7200)], slow, a_min=-600, a_max=600, a_step=60)
    check(
        "sweep_attack finds the window",
        swept["best_success"] == 1.0 and swept["best_a"] <= 0,
        json.dumps(swept)[:200],
    )
    check("sweep grid size", len(swept["curve"]) == 21)

    # --- purchase planning and amplification --------------------------------
    plan = ps.plan_purchase(
        [
            ("cheap.example", 1000, "buyable", 100),
            ("pricey.example", 1000, "buyable", 10000),
            ("taken.example", 50000, "live", None),
        ],
        index_size=100000,
        budget_cents=150,
    )
    check(
        "plan_purchase picks the bargain",
        [r["domain"] for r in plan["selected"]] == ["cheap.example"]
        and plan["total_cost_cents"] == 100
        and plan["controlled_fraction"] == 0.01,
        json.dumps(plan),
    )
    amp = ps.amplification(1_000_000, [("web-text", 400_000_000_000_000)])
    check("amplification exact", amp == [("web-text", 2.5e-9)], str(amp))

    # --- schedule inference on a handmade crawl ------------------------------
    # Articles 0..19 captured at 1010, 1020, ... (10 s per article from a
    # snapshot starting at 1000); each has one edit just before capture and
    # one just after.
    lines = []
    captured = {}
    for i in range(20):
        t = 1010 + 10 * i
        lines.append({"article": i, "rev": 2 * i + 1, "epoch": t - 2, "comment": "tweak"})
        lines.append({"article": i, "rev": 2 * i + 2, "epoch": t + 2, "comment": "more"})
        captured[str(i)] = 2 * i + 1
    (tmp / "edits.jsonl").write_text("\n".join(json.dumps(l) for l in lines) + "\n")
    (tmp / "snap.json").write_text(
        json.dumps(
            {"snapshot_id": "s1", "start_epoch": 1000, "boundaries": [], "captured": captured}
        )
    )
    sched = ps.infer_schedule(str(tmp / "edits.jsonl"), str(tmp / "snap.json"), next_start=2000)
    check("infer_schedule interval count", len(sched["intervals"]) == 20)
    slope = sched["fits"][0]["slope"]
    check("infer_schedule slope", abs(slope - 10.0) < 1e-6, str(slope))
    pred = ps.predict_schedule(str(tmp / "edits.jsonl"), str(tmp / "snap.json"), 2000)
    firsts = dict(pred["predictions"])
    check(
        "predict_schedule shifts the schedule",
        firsts[0] == 2010 and firsts[19] == 2200,
        json.dumps(pred["predictions"][:3]),
    )

    # --- revert extraction ----------------------------------------------------
    (tmp / "vandal.jsonl").write_text(
        json.dumps({"article": 5, "rev": 1, "epoch": 1000, "comment": "bad edit"})
        + "\n"
        + json.dumps({"article": 5, "rev": 2, "epoch": 1042, "comment": "Reverted vandalism"})
        + "\n"
    )
    check("revert_delays", ps.revert_delays(str(tmp / "vandal.jsonl")) == [42])

    # --- traffic detection ------------------------------------------------------
    log = ["epoch,client_key,url,user_agent,status"]
    urls = [f"http://img.example/f{i}.jpg" for i in range(20)]
    for i, u in enumerate(urls):
        log.append(f"{1000 + 5 * i},bot,{u},crawler,200")
    log.append("2000,person,http://elsewhere.example/,browser,200")
    (tmp / "access.csv").write_text("\n".join(log) + "\n")
    (tmp / "owned.json").write_text(json.dumps({"domains": ["img.example"], "urls": urls}))
    det = ps.detect_downloads(str(tmp / "access.csv"), str(tmp / "owned.json"))
    check(
        "detect_downloads flags the crawler",
        [f["client_key"] for f in det["flagged"]] == ["bot"]
        and det["flagged"][0]["recall"] == 1.0
        and det["flagged"][0]["sequential"] is True,
        json.dumps(det)[:300],
    )

    # --- simulator oracle --------------------------------------------------------
    (tmp / "sim.conf").write_text(
        "n_articles = 400\n"
        "n_jobs = 2\n"
        "crawl_rate = 0.01\n"
        "edit_rate = 6\n"
        "revert_probability = 0.3\n"
        "reversion_delay = exponential:900\n"
        "snapshot_start_1 = 1000000\n"
        "snapshot_start_2 = 1080000\n"
        "seed = 7\n"
    )
    rep = ps.oracle(str(tmp / "sim.conf"), a_min=-1800, a_max=1800, a_step=300)
    check(
        "oracle containment is total",
        rep["containment1"] == 1.0 and rep["containment2"] == 1.0,
        json.dumps({k: rep[k] for k in ("containment1", "containment2")}),
    )
    check(
        "oracle analytic estimate stays conservative",
        rep["max_conservativeness_gap"] <= 0.02,
        str(rep["max_conservativeness_gap"]),
    )
    again = ps.oracle(str(tmp / "sim.conf"), a_min=-1800, a_max=1800, a_step=300, seed=7)
    check("oracle is deterministic", again == rep)

    check("module constants", ps.DEFAULT_SWEEP_STEP == 60 and ps.DEFAULT_SWEEP_MIN < 0)

    print(f"\nall {checks} checks passed")


if __name__ == "__main__":
    main()
