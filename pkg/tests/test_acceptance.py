"""Acceptance criteria 1-10, one PASS/FAIL line each (shown in the terminal summary)."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from gic.channel import ChannelParams
from gic.corners import corner_points, costa_corner, sato_corner, strong_corners
from gic.distributions import DistributionSpec
from gic.lemmas import ExperimentConfig, run_converse_chain, run_lemmas
from gic.measures import entropy, entropy_quad
from gic.transport import (
    build_knothe_map,
    entropy_change_of_variables_check,
    evaluate_map,
    jacobian_diagnostics,
    jacobian_diagonal,
    pushforward_ks,
    stein_identity_check,
)
from oracles import FROZEN, corner_oracle, gaussian_entropy, mixture_entropy


def record(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _draws(rng, regime, count):
    p1, p2, n = (10 ** rng.uniform(-2, 2, count) for _ in range(3))
    top = 1 + p2 / n
    if regime == "weak":
        a = rng.uniform(0, 1, count)
        a[a == 0] = 0.5
    elif regime == "strong":
        a = 1 + rng.uniform(0, 1, count) * (top - 1)
        a = np.minimum(a, np.nextafter(top, 0))
    else:
        a = top * rng.uniform(1, 3, count)
    return list(zip(p1, p2, n, a))


def test_criterion_01_corner_formulas_vs_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    elapsed = 0.0
    count = 0
    for regime in ("weak", "strong", "very_strong"):
        draws = _draws(rng, regime, 1000)
        params = [ChannelParams(*map(float, d)) for d in draws]
        t0 = time.perf_counter()
        got = [corner_points(p) for p in params]
        elapsed += time.perf_counter() - t0
        for d, cp in zip(draws, got):
            name, *vals = corner_oracle(*d)
            assert cp.regime.value == name
            for g, w in zip((cp.c1, cp.c2, cp.c1_prime, cp.c2_prime), vals):
                w = float(w)
                worst = max(worst, abs(g - w) / abs(w))
            count += 1
    record(1, worst <= 1e-12 and elapsed < 1.0,
           f"{count} draws, worst relative error {worst:.2e} (<= 1e-12), library time {elapsed:.3f}s (< 1s)")


def test_criterion_02_regime_continuity():
    rng = np.random.default_rng(7)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        p1, p2, n = (float(10 ** rng.uniform(-2, 2)) for _ in range(3))
        at_one = ChannelParams(p1, p2, n, 1.0)
        s = strong_corners(at_one, enforce_regime=False)
        c1w = costa_corner(at_one, enforce_regime=False)
        c2w = sato_corner(at_one, enforce_regime=False)
        worst = max(worst, abs(s.c1_prime - c1w) / c1w, abs(s.c2_prime - c2w) / c2w)
        top = ChannelParams(p1, p2, n, 1 + p2 / n)
        s = strong_corners(top, enforce_regime=False)
        worst = max(worst, abs(s.c2_prime - s.c2) / s.c2)
    elapsed = time.perf_counter() - t0
    record(2, worst <= 1e-12 and elapsed < 1.0,
           f"100 draws, worst relative mismatch {worst:.2e} (<= 1e-12), {elapsed:.3f}s")


def test_criterion_03_entropy_calibration():
    t0 = time.perf_counter()
    errs = [abs(entropy(DistributionSpec.gaussian(0, 1)) - FROZEN["gaussian_entropy_1"]),
            abs(entropy(DistributionSpec.centered_uniform(1.0)) - FROZEN["uniform_entropy_var1"])]
    rng = np.random.default_rng(11)
    mixes = []
    for _ in range(10):
        w = rng.uniform(0.1, 0.9)
        m = rng.uniform(-3, 3, 2)
        v = rng.uniform(0.05, 2.0, 2)
        mixes.append((w, m, v))
        d = DistributionSpec.mixture([w, 1 - w], [[m[0]], [m[1]]], [[v[0]], [v[1]]])
        h = entropy(d)
        doubled = entropy_quad(d, points=2 * (2**14) + 1).value
        errs.append(abs(h - doubled))
    elapsed = time.perf_counter() - t0
    # independent tanh-sinh reference, outside the timed section
    ref = max(abs(entropy(DistributionSpec.mixture([w, 1 - w], [[m[0]], [m[1]]], [[v[0]], [v[1]]]))
                  - mixture_entropy([w, 1 - w], m, v)) for w, m, v in mixes)
    worst = max(errs)
    record(3, worst <= 1e-6 and ref <= 1e-6 and elapsed < 10,
           f"worst |error| {worst:.2e} vs closed form/doubled grid, {ref:.2e} vs mpmath (<= 1e-6), {elapsed:.2f}s")


def test_criterion_04_fork_identity():
    t0 = time.perf_counter()
    rep = run_lemmas(["fork"], ExperimentConfig())[0]
    elapsed = time.perf_counter() - t0
    record(4, rep.passed and -rep.worst_gap <= 1e-5 and rep.instances_run >= 8 and elapsed < 30,
           f"{rep.instances_run} pairs, worst |gap| {-rep.worst_gap:.2e} (<= 1e-5), {elapsed:.1f}s (< 30s)")


def test_criterion_05_monotonicity_and_concavity():
    t0 = time.perf_counter()
    reps = run_lemmas(["3", "7"], ExperimentConfig())
    elapsed = time.perf_counter() - t0
    lemma7 = reps[1]
    inst = [d for d in lemma7.diagnostics if d["input"].startswith("sqrt(a)")]
    worst = min(r.worst_gap for r in reps)
    record(5, worst >= -1e-5 and len(inst) >= 1 and elapsed < 60,
           f"worst gap {worst:.3e} (>= -1e-5) over {sum(r.instances_run for r in reps)} checks incl. "
           f"{len(inst)} (aN, N, P2+N) instances, {elapsed:.1f}s")


def test_criterion_06_ag_preservation_and_weak_epi():
    t0 = time.perf_counter()
    dpi, epi = run_lemmas(["4"], ExperimentConfig())
    elapsed = time.perf_counter() - t0
    record(6, dpi.worst_gap >= -1e-5 and epi.worst_gap >= -1e-4 and elapsed < 60,
           f"divergence form worst {dpi.worst_gap:.2e} (>= -1e-5), weak-EPI worst {epi.worst_gap:.2e} "
           f"(>= -1e-4), {elapsed:.1f}s")


def _mixture_1d():
    return DistributionSpec.mixture([0.3, 0.7], [[-1.0], [0.8]], [[0.3], [0.5]])


def _product_2d():
    a = DistributionSpec.mixture([0.5, 0.5], [[-1.0], [1.0]], [[0.4], [0.4]])
    b = DistributionSpec.mixture([0.2, 0.8], [[-1.5], [0.4]], [[0.5], [0.3]])
    w = np.outer(a.weights, b.weights).ravel()
    means = [[ma[0], mb[0]] for ma in a.means for mb in b.means]
    var = [[va[0], vb[0]] for va in a.variances for vb in b.variances]
    return DistributionSpec.mixture(w, means, var)


def test_criterion_07_knothe_suite():
    t0 = time.perf_counter()
    notes = []
    ok = True
    # identity
    worst_id = 0.0
    for dim in (1, 2, 3):
        tmap = build_knothe_map(DistributionSpec.gaussian([0.0] * dim, [1.5] * dim))
        pts = tmap.source.sample(1000, np.random.default_rng(dim))
        worst_id = max(worst_id, float(np.abs(evaluate_map(tmap, pts) - pts).max()))
        jd = jacobian_diagnostics(tmap, 10_000, seed=dim)
        worst_id = max(worst_id, abs(jd.mean_trace_over_n - 1), abs(jd.mean_nth_root_det - 1),
                       abs(jd.rho_empirical - 1), abs(jd.mean_log_det))
    ok &= worst_id <= 1e-6
    notes.append(f"identity {worst_id:.1e}")
    maps = {
        "uniform": build_knothe_map(DistributionSpec.centered_uniform(1.0)),
        "mixture": build_knothe_map(_mixture_1d()),
        "product2d": build_knothe_map(_product_2d()),
    }
    # Stein identity at 1e6 samples, 3 standard errors
    for name, tmap in maps.items():
        tol = 5e-3 if name == "product2d" else 0.0
        rep = stein_identity_check(tmap, tol=tol, samples=1_000_000, seed=42)
        d = rep.diagnostics[0]
        ok &= rep.passed
        notes.append(f"stein[{name}] {abs(d['difference']) / d['stderr']:.2f}se")
    # change of variables
    for name in ("uniform", "mixture", "product2d"):
        rep = entropy_change_of_variables_check(maps[name], tol=1e-3)
        ok &= rep.passed
        notes.append(f"cov[{name}] {abs(rep.worst_gap):.1e}")
    # AM-GM pointwise on a genuinely triangular map and in 3D
    corr = build_knothe_map(DistributionSpec.mixture([0.5, 0.5], [[-1.0, -0.8], [1.0, 0.8]],
                                                     [[0.3, 0.4], [0.3, 0.4]]))
    cube = build_knothe_map(DistributionSpec.centered_uniform(1.0, dim=3))
    worst_amgm = math.inf
    for tmap in (corr, cube, maps["product2d"]):
        diag = jacobian_diagonal(tmap, tmap.source.sample(100_000, np.random.default_rng(9)))
        ok &= bool(np.all(diag > 0))
        slack = diag.mean(axis=1) - np.exp(np.log(diag).mean(axis=1))
        worst_amgm = min(worst_amgm, float(slack.min()))
    ok &= worst_amgm >= -1e-12
    notes.append(f"amgm min {worst_amgm:.1e}")
    ks = max(pushforward_ks(t, 100_000, seed=5) for t in (*maps.values(), corr, cube))
    ok &= ks <= 0.01
    notes.append(f"ks {ks:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    record(7, ok, ", ".join(notes) + f", {elapsed:.1f}s (< 300s)")


def test_criterion_08_entropy_gap_bound():
    t0 = time.perf_counter()
    rep = run_lemmas(["5"], ExperimentConfig(tolerance=1e-4))[0]
    elapsed = time.perf_counter() - t0
    non_gauss = [d for d in rep.diagnostics if not d["input"].endswith("|gaussian")]
    bounded = [d for d in non_gauss if not d["input"].startswith("zero")]
    worst = min(d["rhs"] - d["lhs"] for d in non_gauss)
    record(8, rep.passed and worst >= -1e-4 and len(bounded) >= 5 and elapsed < 300,
           f"{len(non_gauss)} (bounded X, non-Gaussian Y) instances, worst rhs-lhs {worst:.3e} "
           f"(>= -1e-4), {elapsed:.1f}s")


def test_criterion_09_converse_chains():
    t0 = time.perf_counter()
    reps = [run_converse_chain(ChannelParams(1, 1, 1, 1.5), "strong"),
            run_converse_chain(ChannelParams(1, 1, 1, 0.5), "sato"),
            run_converse_chain(ChannelParams(1, 1, 1, 0.5), "costa")]
    elapsed = time.perf_counter() - t0
    end = max(abs(d["chain_value"] - d["corner_value"]) for r in reps for d in r.diagnostics)
    links = sum(len(d["links"]) for r in reps for d in r.diagnostics)
    record(9, all(r.passed for r in reps) and end <= 1e-12 and elapsed < 1.0,
           f"{links} links over 4 chains, worst end mismatch {end:.1e} (<= 1e-12), {elapsed:.4f}s")


@pytest.mark.slow
def test_criterion_10_determinism(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        res = subprocess.run([sys.executable, "-m", "gic.cli", "verify", "--lemma", "all", "--seed", "42",
                              "--json", str(path)], capture_output=True, text=True)
        assert res.returncode in (0, 1), res.stdout
        outs.append(path.read_bytes())
    record(10, outs[0] == outs[1] and len(outs[0]) > 0,
           f"two runs of verify --lemma all --seed 42: {len(outs[0])} bytes each, identical={outs[0] == outs[1]}")
