"""Acceptance criteria at full scale.  Each test prints one PASS/FAIL line.

The whole module takes about 27 minutes on a single core.
"""
import os
import time

import numpy as np
import pytest

from symgue.core import SymmetryClass
from symgue.lab.config import default_config
from symgue.lab.experiments import run_experiment

THREADS = os.cpu_count() or 1
P, F1, C2, R3, Q4 = (SymmetryClass.PLAIN, SymmetryClass.FLIP1, SymmetryClass.CENTRAL2,
                     SymmetryClass.ROWMIRROR3, SymmetryClass.QUARTER4)


def run(name, **kw):
    kw.setdefault("threads", THREADS)
    t0 = time.perf_counter()
    rep = run_experiment(default_config(name, **kw))
    return rep, time.perf_counter() - t0


def verdict(log, number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    log.append(line)
    print(line)
    assert ok, line


def rows(rep, table):
    t = rep.tables[table]
    return [dict(zip(t.columns, r)) for r in t.rows]


def test_criterion_1_exact_identities(acceptance_log):
    rep, secs = run("identities", sizes=(32,), replicates=50, probes=(1 + 2j, 2j, -1 + 3j))
    table = rows(rep, "identities")
    worst = max(r["value"] for r in table if r["kind"] == "residual")
    sym = max(r["value"] for r in table if r["kind"] == "exact")
    listed = {r["class"] for r in table if r["identity"] == "resolvent_symmetry"}
    required = {("RowMirror3", "antidiagonal"), ("RowMirror3", "ghat_minus_g")}
    present = {(r["class"], r["identity"]) for r in table}
    ok = (rep.status == "pass" and sym == 0.0 and worst <= 1e-10 and secs < 10
          and listed == {"Flip1", "Central2", "RowMirror3"} and required <= present)
    verdict(acceptance_log, 1, "exact identities", ok,
            f"max residual {worst:.2e}, symmetry deviation {sym}, {secs:.1f}s")


def test_criterion_2_law_solver(acceptance_log):
    rep, secs = run("laws")
    failed = rep.failures()
    ok = rep.status == "pass" and secs < 5
    verdict(acceptance_log, 2, "law solver", ok,
            f"{sum(c.asserted for c in rep.criteria)} checks, failures {failed}, {secs:.2f}s")


def test_criterion_3_semicircle_ncm(acceptance_log):
    rep, secs = run("ncm", classes=(P, F1, C2, Q4), sizes=(512,), replicates=200)
    ks = {r["class"]: r["ks_distance"] for r in rows(rep, "ncm")}
    ok = len(ks) == 4 and all(v < 0.02 for v in ks.values())
    detail = ", ".join(f"{k} {v:.4f}" for k, v in ks.items())
    verdict(acceptance_log, 3, "semicircle NCM", ok, f"KS {detail}, {secs:.0f}s")


def test_criterion_4_case3_atom(acceptance_log):
    rep, secs = run("atom", sizes=(512,), replicates=50)
    t = rows(rep, "atom")
    fracs = [r["zero_fraction"] for r in t]
    diff = max(r["block_max_diff"] for r in t)
    ok = len(t) == 50 and all(f == 0.5 for f in fracs) and diff <= 1e-8
    verdict(acceptance_log, 4, "case-3 atom and block equivalence", ok,
            f"zero fractions {min(fracs)}..{max(fracs)}, block diff {diff:.1e}, {secs:.0f}s")


def test_criterion_5_case3_adjudication(acceptance_log):
    rep, secs = run("adjudicate3", sizes=(512,), replicates=2000, probes=(1j,))
    t = rows(rep, "adjudication")
    g = [r for r in t if r["item"] == "im_g"]
    edge = [r for r in t if r["item"] == "max_abs_eigenvalue"]
    est, se = g[0]["estimate"], g[0]["stderr"]
    g_in = [r["candidate"] for r in g if abs(est - r["candidate_value"]) <= 3 * se + 0.01]
    e_est = edge[0]["estimate"]
    e_in = [r["candidate"] for r in edge if abs(e_est - r["candidate_value"]) <= 0.05]
    winners = {r["item"]: r["candidate"] for r in t if r["winner"] == "yes"}
    ok = se < 0.002 and len(g_in) == 1 and len(e_in) == 1 and len(winners) == 3
    verdict(acceptance_log, 5, "case-3 adjudication", ok,
            f"Im g(i) = {est:.5f} +- {se:.5f} -> {g_in}; mean max|lambda| = {e_est:.4f} -> "
            f"{e_in}; winners {winners}, {secs:.0f}s")


def test_criterion_6_variance_scaling(acceptance_log):
    rep, secs = run("variance", sizes=(64, 128, 256, 512), replicates=4000, probes=(3j,))
    slopes = {r["class"]: r["slope"] for r in rows(rep, "slope")}
    bounds = [r["abs_1p2g"] for r in rows(rep, "variance")]
    ok = (len(slopes) == 5 and all(-2.3 <= s <= -1.7 for s in slopes.values())
          and all(b > 0.5 for b in bounds))
    detail = ", ".join(f"{k} {v:.3f}" for k, v in slopes.items())
    verdict(acceptance_log, 6, "variance scaling", ok,
            f"slopes {detail}; min |1+2g/z| {min(bounds):.3f}, {secs:.0f}s")


def test_criterion_7_correlator(acceptance_log):
    rep, secs = run("correlator", sizes=(256,), replicates=20000, probes=(2j, 3j))
    t = {r["class"]: r for r in rows(rep, "correlator")}
    est = {k: complex(r["re_est"], r["im_est"]) for k, r in t.items()}
    rel = {k: abs(est[k] - complex(r["re_theory"], r["im_theory"]))
           / abs(complex(r["re_theory"], r["im_theory"])) for k, r in t.items()}
    goe, gue = 0.019419, 0.0097095
    checks = {
        "Flip1": abs(est["Flip1"] - goe) <= 0.15 * goe,
        "Central2": abs(est["Central2"] - goe) <= 0.15 * goe,
        "Quarter4": abs(est["Quarter4"] - gue) <= 0.15 * gue,
        "Plain": abs(est["Plain"] - gue) <= 0.15 * gue,
        "ratio Flip1/Quarter4": abs(est["Flip1"] / est["Quarter4"] - 2) <= 0.2,
        "ratio Central2/Quarter4": abs(est["Central2"] / est["Quarter4"] - 2) <= 0.2,
        "RowMirror3 rel. stderr": t["RowMirror3"]["stderr"] / abs(est["RowMirror3"]) < 0.10,
    }
    ok = all(checks.values())
    detail = "; ".join(f"{k} {est[k].real:.5f} (rel {rel[k]:.2f})" for k in est)
    failed = [k for k, v in checks.items() if not v]
    verdict(acceptance_log, 7, "correlator asymptotics", ok,
            f"{detail}; failed {failed}, {secs:.0f}s")


def test_criterion_8_structured_speed(acceptance_log):
    rep, secs = run("bench", classes=(R3, C2), sizes=(1024,), replicates=5)
    speed = {b["class"]: b["speedup"] for b in rep.timing["bench"]}
    diffs = [r["spectra_max_diff"] for r in rows(rep, "bench")]
    ok = speed["RowMirror3"] >= 3 and speed["Central2"] >= 2 and max(diffs) <= 1e-8
    verdict(acceptance_log, 8, "structured solver speed", ok,
            f"speedups RowMirror3 {speed['RowMirror3']:.1f}x, Central2 "
            f"{speed['Central2']:.1f}x, spectra diff {max(diffs):.1e}, {secs:.0f}s")


REPRO = [
    ("identities", {}),
    ("laws", {}),
    ("ncm", dict(sizes=(64,), replicates=20)),
    ("atom", dict(sizes=(64,), replicates=10)),
    ("adjudicate3", dict(sizes=(64,), replicates=100)),
    ("correlator", dict(sizes=(32,), replicates=300)),
    ("variance", dict(sizes=(16, 32, 64), replicates=200)),
    ("bench", dict(sizes=(256,), replicates=5)),
]


def test_criterion_9_reproducibility(acceptance_log):
    mismatched = []
    for name, kw in REPRO:
        texts = {th: run(name, threads=th, **kw)[0].to_json(include_timing=False)
                 for th in (1, 2, 8)}
        if len(set(texts.values())) != 1:
            mismatched.append(name)
    ok = not mismatched
    verdict(acceptance_log, 9, "reproducibility", ok,
            f"{len(REPRO)} experiments x threads (1, 2, 8); mismatched {mismatched}")
