"""The ten acceptance criteria, each at its stated tolerance and budget.

Every test records one pass/fail line (printed in the terminal summary)
before asserting.
"""

import time

import numpy as np
import pytest

from nalab.cli import execute, parse_config
from nalab.construction import (
    ConstructionConfig,
    build_space,
    p_dual,
    p_norm,
    r_apply,
    r_m_apply,
    r_star_apply,
)
from nalab.experiments import SubspaceSpec, lemma_a_suite, proximinality_probe, segment_probe
from nalab.experiments import strict_convexity_probe
from nalab.norms import (
    PhiSequence,
    SmoothBaseNormSpec,
    SumNormSpec,
    base_norm,
    primal_norm_phi,
    w_norm,
)
from nalab.seeding import stream_rng

from . import oracles
from .conftest import ACCEPTANCE, tc1_config

pytestmark = pytest.mark.acceptance


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _phi_family(dim, k):
    """Weight sequences of several shapes with l1 mass below one."""
    if k % 3 == 0:
        return PhiSequence.dyadic(dim)
    w = np.random.default_rng(100 * dim + k).uniform(0.1, 1.0, dim)
    mass = 0.9 if k % 3 == 1 else 0.3
    return PhiSequence(w * mass / w.sum())


# dims spanning 2..64, 1000 trials in total
_C1_PLAN = [(2, 150), (3, 150), (4, 150), (5, 50), (8, 100), (12, 50), (16, 100),
            (24, 50), (32, 100), (48, 50), (64, 50)]


def test_c1_dual_closed_form_exact():
    start = time.perf_counter()
    trials, fails, brute = 0, [], 0
    for k, (dim, count) in enumerate(_C1_PLAN):
        rep = lemma_a_suite(_phi_family(dim, k), count, seed=k)
        trials += rep.checks["a.conic"]
        brute += rep.checks.get("a.brute", 0)
        fails += [c for c, _ in rep.failures if c.startswith("a.")]
    el = time.perf_counter() - start
    ok = trials == 1000 and brute == 450 and not fails and el <= 120
    record(1, ok, f"{trials} conic, {brute} brute-force, {len(fails)} failures, {el:.1f}s")


def test_c2_inequality_chains():
    start = time.perf_counter()
    n, fails = 0, 0
    for k, dim in enumerate((2, 4, 8, 16, 32, 64, 7, 13, 24, 50)):
        phi = _phi_family(dim, k)
        spec, w, mass = SumNormSpec(phi), phi.weights, phi.l1_mass
        rng = stream_rng(k, "lemma_a")
        for _ in range(100):
            f, x = rng.standard_normal((2, dim)) * 10.0 ** rng.uniform(-2, 2)
            cf = np.abs(f).max() + np.linalg.norm(w * f)
            fi = np.abs(f).max()
            px = primal_norm_phi(x, spec)
            l1 = np.abs(x).sum()
            slack = min(cf - fi, fi - (1 - mass) * cf, l1 - px, (1 + mass) * px - l1)
            fails += slack < -1e-8 * max(cf, l1)
            n += 1
    el = time.perf_counter() - start
    record(2, n == 1000 and fails == 0 and el <= 60, f"{n} vectors each, {fails} violations, {el:.1f}s")


def test_c3_strictness_and_sign():
    start = time.perf_counter()
    strict, sign, fails, low = 0, 0, [], np.inf
    for k, dim in enumerate((2, 3, 4, 8, 16)):
        rep = lemma_a_suite(_phi_family(dim, k), 100, seed=50 + k, brute_force_dim=0)
        strict += rep.checks["d.strict"]
        sign += rep.checks["e.attain"]
        low = min(low, rep.margins_summary["min"])
        fails += [c for c, _ in rep.failures if c[0] in "de"]
    el = time.perf_counter() - start
    ok = strict == 500 and sign == 500 and not fails and el <= 120
    record(3, ok, f"{strict} strict pairs (min margin {low:.3g}), {sign} attaining pairs, "
                  f"{len(fails)} failures, {el:.1f}s")


def test_c4_adjoint_and_coordinates():
    start = time.perf_counter()
    worst = 0.0
    for mode in ("plain", "smooth"):
        space = build_space(tc1_config(mode))
        cfg = space.config
        rng = stream_rng(4, 100 + len(mode))
        for _ in range(250):
            w = rng.standard_normal((cfg.m_max, cfg.n_max))
            x = rng.standard_normal(cfg.ambient_dim)
            ref = r_star_apply(space, w)
            lhs = ref @ x
            rhs = float(np.sum(w * r_apply(space, x)))
            manual = sum(
                w[m - 1, n - 1] * (m / 2 ** m) * 2.0 ** -n * space.v(n, m)
                for m in range(1, cfg.m_max + 1) for n in range(1, cfg.n_max + 1)
            )
            worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)),
                        np.abs(manual - ref).max() / max(1, np.abs(ref).max()))
    el = time.perf_counter() - start
    record(4, worst <= 1e-10 and el <= 30, f"500 pairs, worst relative error {worst:.2e}, {el:.1f}s")


def test_c5_bounds():
    start = time.perf_counter()
    bad = 0
    for decay in ("none", "sigma"):
        space = build_space(tc1_config("smooth", decay=decay))
        cfg = space.config
        const = sum(m / 2 ** m for m in range(1, cfg.m_max + 1))
        rng = stream_rng(5, 100 + len(decay))
        for _ in range(250):
            x = rng.standard_normal(cfg.ambient_dim) * 10.0 ** rng.uniform(-2, 2)
            bx = base_norm(x, space.base)
            for m in range(1, cfg.m_max + 1):
                bad += np.abs(r_m_apply(space, x, m)).sum() > (m / 2 ** m) * bx * (1 + 1e-12)
            bad += w_norm(r_apply(space, x), space.sum_specs) > const * bx * (1 + 1e-12)
    el = time.perf_counter() - start
    record(5, bad == 0 and const <= 2 and el <= 30, f"500 vectors, {bad} violations, {el:.1f}s")


def test_c6_anchors(tc1_spec, tc1_space):
    e1 = np.eye(4)[0]
    got = (primal_norm_phi(e1, tc1_spec), p_norm(tc1_space, e1), p_dual(tc1_space, e1).value)
    want = (0.8, 64 / 45, 45 / 64)
    err = max(abs(a - b) for a, b in zip(got, want))
    record(6, err <= 1e-6, "values " + ", ".join(f"{v:.9f}" for v in got) + f", worst error {err:.1e}")


def test_c7_segment_mechanism():
    start = time.perf_counter()
    space = build_space(ConstructionConfig(8, 16, 6, 0.05, SmoothBaseNormSpec("smooth", 8)))
    rng = stream_rng(0, "segment")
    tol = 1e-9
    probed, admissible, margins, bad = 0, 0, [], []
    while probed < 100:
        f, g = rng.standard_normal((2, 8))
        rec = segment_probe(space, f, g, tol=tol)
        probed += 1
        margins += rec.margins
        bad += rec.violations
        if rec.chosen_m is not None:
            admissible += 1
            low, slack = rec.interval_low, 10 * tol
            t = rec.mid_t
            comb = t * rec.xi_n + (1 - t) * rec.zeta_n
            if not all(low - slack <= v <= 1 + slack for v in (rec.xi_n, rec.zeta_n)):
                bad.append("xi/zeta outside interval")
            if not abs(rec.p_mid * rec.u_n) < low + slack or comb < low - slack:
                bad.append("interval separation")
    el = time.perf_counter() - start
    ok = min(margins) > 0 and not bad and el <= 600
    record(7, ok, f"{probed} pairs, {admissible} admissible, min margin {min(margins):.3g}, "
                  f"{len(bad)} violations, {el:.1f}s")


def test_c8_strict_convexity():
    space = build_space(ConstructionConfig(10, 40, 6, 0.05, SmoothBaseNormSpec("smooth", 10), decay="none"))
    rep = strict_convexity_probe(space, 500, seed=0, margin_floor=1e-8, colinear_tol=1e-10)
    ok = rep.checks["strict"] == 500 and rep.checks["colinear"] == 500 and rep.passed
    record(8, ok, f"500 pairs, min margin {rep.margins_summary['min']:.3g}, "
                  f"{len(rep.failures)} failures")


def test_c9_proximinality():
    start = time.perf_counter()
    worst, lift_fail, cases = 0.0, 0, 0
    for dim in (3, 4, 5, 6):
        cfg = ConstructionConfig(dim, 2 * dim, 3, 0.5, SmoothBaseNormSpec("smooth", dim))
        space = build_space(cfg)
        rng = stream_rng(dim, "proximinality")
        count = 13 if dim < 6 else 11
        M = SubspaceSpec(annihilators=rng.standard_normal((2, dim)))
        pts = list(rng.standard_normal((count, dim)))
        rep = proximinality_probe(space, M, count, seed=dim, points=pts)
        lift_fail += sum(1 for c, _ in rep.failures if c == "lifting")
        for x, row in zip(pts, rep.diagnostics["samples"]):
            radius = 4 * np.linalg.norm(x) * np.sqrt(dim)
            ref, _ = oracles.zoom_grid_distance(x, M.basis, space.norm.value_many, radius)
            worst = max(worst, abs(ref - row["distance"]))
            lift_fail += row.get("lifting_error", 0) > 1e-6
            cases += 1
    el = time.perf_counter() - start
    ok = cases == 50 and worst <= 1e-4 and lift_fail == 0
    record(9, ok, f"{cases} cases, worst oracle gap {worst:.2e}, {lift_fail} lifting failures, {el:.1f}s")


_C10_CONFIG = """
command: {command}
seed: 17
trials: 4
samples: 4
construction: {{ambient_dim: 6, n_max: 10, m_max: 4}}
output: {{dir: {out}}}
"""


def test_c10_reproducible(tmp_path):
    same = []
    for command in ("lemma-a", "build", "segment", "convexity", "proximinality"):
        cfg = parse_config(_C10_CONFIG.format(command=command, out=tmp_path / command))
        runs = []
        for _ in range(2):
            status, paths = execute(cfg)
            runs.append({p: open(p, "rb").read() for p in paths})
        same.append(status in (0, 1) and runs[0] == runs[1] and len(runs[0]) == 2)
    record(10, all(same), f"{sum(same)}/{len(same)} commands byte-identical across two runs")
