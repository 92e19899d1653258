"""End-to-end checks of the salab command line tool.

usage: check_cli.py <salab-binary> <report.schema.json> <scratch-dir>
"""
import csv
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema

BIN, SCHEMA, SCRATCH = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
schema = json.loads(SCHEMA.read_text())
failures = []


def run(*args, expect=0):
    out_dir = SCRATCH / "runs"
    proc = subprocess.run([BIN, *args, "--out-dir", str(out_dir)], capture_output=True, text=True)
    if proc.returncode != expect:
        failures.append(f"{args}: exit {proc.returncode}, expected {expect}: {proc.stderr.strip()}")
        return None, None
    if not proc.stdout.strip():
        return None, None
    run_dir = Path(proc.stdout.strip().splitlines()[-1])
    report = json.loads((run_dir / "report.json").read_text())
    try:
        jsonschema.validate(report, schema)
    except jsonschema.ValidationError as e:
        failures.append(f"{args}: schema: {e.message}")
    if not (run_dir / "timing.json").exists():
        failures.append(f"{args}: timing.json missing")
    for t in report["tables"].values():
        if not (run_dir / t["file"]).exists():
            failures.append(f"{args}: table {t['file']} missing")
    return report, run_dir


def table(run_dir, name):
    with open(run_dir / f"{name}.csv", newline="") as f:
        return list(csv.DictReader(f))


def check(cond, msg):
    if not cond:
        failures.append(msg)


shutil.rmtree(SCRATCH, ignore_errors=True)
SCRATCH.mkdir(parents=True)

# spectrum
rep, _ = run("spectrum", "--model", "pinned", "--domain", "dirichlet", "--count", "3", "--truncation", "0")
if rep:
    for k, lam in enumerate(rep["results"]["eigenvalues"], 1):
        check(abs(lam - (k * math.pi) ** 2) < 1e-10 * (k * math.pi) ** 2, f"dirichlet eigenvalue {k}: {lam}")

rep, rd = run("spectrum", "--domain", "robin(5,1)", "--count", "3", "--oracle", "--truncation", "0")
if rep:
    ev = rep["results"]["eigenvalues"]
    check(sum(1 for x in ev if x < 0) == 1, "robin(5,1) negative count")
    check(abs(ev[0] - (-24.995456292233193604)) < 1e-9, f"robin(5,1) lowest {ev[0]}")
    check(rep["results"]["oracle"]["failures"] == 0, "robin(5,1) oracle disagreement")
    check("oracle_lambda" in table(rd, "eigenvalues")[0], "oracle column missing")

rep, _ = run("spectrum", "--domain", "robin(1,0.001)", "--count", "2", "--truncation", "0")
if rep:
    lam = rep["results"]["eigenvalues"][0]
    check(abs(lam + 1e6) < 1e-3 * 1e6, f"robin(1,0.001) dive {lam}")

rep, rd = run("spectrum", "--model", "synthetic", "--count", "5", "--truncation", "2000")
if rep:
    check(rep["results"]["regularity"]["d1_dim"] == 1, "synthetic c_k ~ k should be divergent at s = 1/2")
    check({"c0_re", "c0_im"} <= set(table(rd, "eigenvalues")[0]), "complex columns missing")
    check(rep["diagnostics"]["f_conjugation_residual"] < 1e-8, "synthetic F conjugation symmetry")

# flow
rep, rd = run("flow")
if rep:
    check(rep["results"]["monotone_decreasing"], "flow gaps not monotone")
    rows = table(rd, "flow")
    check(float(rows[-1]["lambda"]) == -1e4 and float(rows[-1]["gap"]) < 1e-2, "flow final gap")
rep, rd = run("flow", "--base", "robin(5,1)", "--lambda-grid", "-10,-24.995456292233193604,-100")
if rep:
    rows = table(rd, "flow")
    check(all(r["ok"] == "true" for r in rows), "flow through an eigenvalue of the base")
    check(all((r["route"] == "direct") == bool(r["reason"]) for r in rows), "fallback rows carry a reason")

# instability
rep, rd = run("instability", "--domain", "dirichlet")
if rep:
    check(rep["results"]["verdict"] == "unstable", "dirichlet verdict")
    rows = table(rd, "curve")
    check({"lambda", "gap_to_base", "secular_residual", "hermitian_residual"} <= set(rows[0]), "curve columns")
    check(all(r["accepted"] == "true" for r in rows), "curve certificates")
rep, _ = run("instability", "--domain", "neumann")
if rep:
    check(rep["results"]["verdict"] == "stable", "neumann verdict")

# certify
rep, _ = run("certify", "--base", "friedrichs", "--M", "5")
if rep:
    check(rep["results"]["zeta"] < 0 and rep["results"]["violations"] == 0, "certificate at M = 5")
rep, _ = run("certify", "--base", "friedrichs", "--M", "0")
if rep:
    check("zeta" in rep["results"], "certificate at M = 0")
rep, _ = run("certify", "--base", "friedrichs", "--domain", "neumann", "--M", "5")
if rep:
    check(rep["results"]["violations"] == 0, "certificate around the Neumann line")
rep, _ = run("certify", "--model", "full", "--base", "dirichlet-neumann", "--M", "50", expect=4)
if rep:
    check(rep["status"] == "not_certifiable", "unstable base status")

# audit and determinism
rep_a, rd_a = run("audit", "--model", "pinned", "--samples", "200", "--seed", "42")
rep_b, rd_b = run("audit", "--model", "pinned", "--samples", "200", "--seed", "42")
if rep_a and rep_b:
    check(rep_a["results"]["max_count"] == 1 and rep_a["results"]["violations"] == 0, "pinned audit")
    check(rd_a != rd_b, "run directories should differ")
    check((rd_a / "report.json").read_bytes() == (rd_b / "report.json").read_bytes(), "report bytes differ")
    check((rd_a / "counts.csv").read_bytes() == (rd_b / "counts.csv").read_bytes(), "table bytes differ")
    w = table(rd_a, "witness")[0]
    check(float(w["lambda"]) == -1000 and float(w["selfadjoint_residual"]) < 1e-8, "witness row")

# config file and overrides
cfg = SCRATCH / "run.json"
cfg.write_text(json.dumps({"model": "pinned", "domain": "neumann", "count": 5, "truncation": 0}))
rep, _ = run("spectrum", "--config", str(cfg), "--count", "2")
if rep:
    check(rep["config"]["count"] == 2 and rep["config"]["domain"] == "neumann", "flag override")
    check(len(rep["results"]["eigenvalues"]) == 2, "override count")
bad = SCRATCH / "bad.json"
bad.write_text(json.dumps({"modle": "pinned"}))
run("spectrum", "--config", str(bad), expect=2)
run("spectrum", "--domain", "trace-matrix(-1i,1)", expect=2)
run("flow", "--model", "synthetic", expect=2)
run("spectrum", "--count", "notanumber", expect=2)

for f in failures:
    print("FAIL", f)
print("cli checks:", "FAIL" if failures else "PASS")
sys.exit(1 if failures else 0)
