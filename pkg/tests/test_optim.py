import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nalab.errors import DependenceError, DimensionError
from nalab.norms import PhiSequence, SmoothBaseNormSpec, SumNormSpec, dual_norm_phi
from nalab.optim import (
    DEFAULT_TOL,
    BaseNorm,
    LpNorm,
    SumPhiNorm,
    WSumNorm,
    distance_to_subspace,
    gauge_eval,
    support_maximize,
)

from . import oracles

TOL = DEFAULT_TOL


def families(dim=4):
    phi = SumNormSpec(PhiSequence.dyadic(dim))
    return {
        "l1": LpNorm(1, dim),
        "l2": LpNorm(2, dim),
        "linf": LpNorm(np.inf, dim),
        "phi": SumPhiNorm(phi),
        "base-plain": BaseNorm(SmoothBaseNormSpec("plain", dim)),
        "base-smooth": BaseNorm(SmoothBaseNormSpec("smooth", dim)),
        "w-sum": WSumNorm([phi, SumNormSpec(PhiSequence(0.5 * phi.phi.weights))]),
    }


FAMILIES = families()


# ---- examples


def test_support_maximize_examples():
    r = support_maximize(LpNorm(1, 2), [2.0, -1.0])
    assert r.value == 2 and np.array_equal(r.witness, [1.0, 0.0])
    phi = SumPhiNorm(SumNormSpec(PhiSequence.dyadic(4)))
    for method in ("auto", "iterative", "conic"):
        r = support_maximize(phi, np.eye(4)[0], method=method)
        assert abs(r.value - 1.25) <= 1e-8
    for nm in FAMILIES.values():
        r = support_maximize(nm, np.zeros(nm.dim))
        assert r.value == 0 and not np.any(r.witness)


def test_gauge_eval_examples():
    assert gauge_eval(LpNorm(np.inf, 2), [1.0, -2.0]).value == 2
    r = gauge_eval(FAMILIES["phi"], np.eye(4)[0])
    assert abs(r.value - 0.8) <= 1e-12 and r.residual <= TOL
    for nm in FAMILIES.values():
        assert gauge_eval(nm, np.zeros(nm.dim)).value == 0


def test_distance_examples():
    r = distance_to_subspace([1.0, 1.0], [[1.0, 0.0]], LpNorm(2, 2))
    assert abs(r.value - 1) <= 1e-9
    np.testing.assert_allclose(r.witness, [1, 0], atol=1e-8)

    ref, _ = oracles.grid_min_1d(lambda t: abs(1 - t) + abs(1 + t), -3, 3)
    r = distance_to_subspace([1.0, 1.0], [[1.0, -1.0]], LpNorm(1, 2))
    assert abs(r.value - 2) <= 1e-9 and abs(r.value - ref) <= 1e-9

    ref, t = oracles.grid_min_1d(lambda t: max(abs(1 - t), abs(1 + t)), -3, 3)
    r = distance_to_subspace([1.0, 1.0], [[1.0, -1.0]], LpNorm(np.inf, 2))
    assert abs(r.value - 1) <= 1e-9 and abs(r.value - ref) <= 1e-9
    np.testing.assert_allclose(r.witness, [0, 0], atol=1e-8)


def test_distance_errors():
    with pytest.raises(DependenceError):
        distance_to_subspace([1.0, 1.0], [[1.0, 0.0], [2.0, 0.0]], LpNorm(2, 2))
    with pytest.raises(DimensionError):
        distance_to_subspace([1.0, 1.0], [[1.0, 0.0, 0.0]], LpNorm(2, 2))
    with pytest.raises(ValueError):
        support_maximize(LpNorm(2, 2), [1.0, 0.0], method="newton")


# ---- properties


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_support_gauge_consistency(name):
    nm = FAMILIES[name]
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(500):
        x = rng.standard_normal(nm.dim)
        g = gauge_eval(nm, x)
        f = g.witness
        assert abs(f @ x - g.value) <= 2 * TOL * g.value
        s = support_maximize(nm, f)
        assert abs(s.value - 1) <= 2 * TOL
        assert nm.value(s.witness) <= 1 + 2 * TOL
        assert abs(f @ s.witness - s.value) <= 2 * TOL


@pytest.mark.parametrize("name", ["phi", "base-smooth", "w-sum", "linf"])
def test_iterative_support_matches_closed_form(name):
    nm = FAMILIES[name]
    rng = np.random.default_rng(7)
    for _ in range(30):
        f = rng.standard_normal(nm.dim)
        it = support_maximize(nm, f, method="iterative")
        closed = nm.dual(f)
        assert abs(it.value - closed) <= 1e-9 * closed
        assert it.residual <= TOL * it.value


def test_phi_support_closed_form_against_high_precision():
    nm = FAMILIES["phi"]
    w = nm.spec.phi.weights
    rng = np.random.default_rng(8)
    for _ in range(1000):
        f = rng.standard_normal(4) * 10 ** rng.uniform(-3, 3)
        r = support_maximize(nm, f)
        ref = oracles.dual_phi_hp(f, w)
        assert abs(r.value - ref) <= 1e-9 * ref
        assert abs(f @ r.witness - ref) <= 1e-9 * ref


@pytest.mark.parametrize("name", ["l1", "linf", "phi", "base-smooth", "base-plain"])
def test_distance_zero_iff_in_span(name):
    nm = FAMILIES[name]
    rng = np.random.default_rng(9)
    for _ in range(20):
        B = rng.standard_normal((2, nm.dim))
        inside = rng.standard_normal(2) @ B
        outside = inside + rng.standard_normal(nm.dim)
        in_span = np.linalg.matrix_rank(np.vstack([B, outside])) == 2
        assert distance_to_subspace(inside, B, nm).value <= 1e-8 * max(1, nm.value(inside))
        d = distance_to_subspace(outside, B, nm)
        assert (d.value <= 1e-8) == in_span
        assert d.residual <= TOL * max(d.value, 1e-300) + 1e-15
        # the dual certificate vanishes on the subspace
        assert np.abs(B @ d.dual).max() <= 1e-8 * np.abs(d.dual).max()


@pytest.mark.parametrize("name", sorted(FAMILIES))
@given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 2**31))
def test_homogeneity(name, c, seed):
    nm = FAMILIES[name]
    rng = np.random.default_rng(seed)
    x, f = rng.standard_normal((2, nm.dim))
    assert abs(gauge_eval(nm, c * x).value - c * gauge_eval(nm, x).value) <= 1e-9 * c * nm.value(x)
    sx = support_maximize(nm, f).value
    assert abs(support_maximize(nm, c * f).value - c * sx) <= 1e-9 * c * sx
    B = rng.standard_normal((1, nm.dim))
    dx = distance_to_subspace(x, B, nm).value
    assert abs(distance_to_subspace(c * x, B, nm).value - c * dx) <= 1e-8 * c * max(dx, 1e-12)


def test_distance_against_grid_oracle():
    rng = np.random.default_rng(10)
    for nm in (FAMILIES["phi"], FAMILIES["base-smooth"], FAMILIES["base-plain"]):
        for _ in range(5):
            x = rng.standard_normal(4)
            B = rng.standard_normal((2, 4))
            r = distance_to_subspace(x, B, nm)
            ref, _ = oracles.zoom_grid_distance(x, B, nm.value_many, radius=10 * np.abs(x).sum())
            assert ref >= r.value - 1e-9 * ref
            assert ref - r.value <= 1e-6 * ref


def test_concurrent_solves_match_serial():
    nm = SumPhiNorm(SumNormSpec(PhiSequence.dyadic(6)))
    rng = np.random.default_rng(11)
    F = rng.standard_normal((16, 6))
    serial = [support_maximize(nm, f, method="conic").value for f in F]
    out = [None] * len(F)

    def work(i):
        out[i] = support_maximize(nm, F[i], method="conic").value

    threads = [threading.Thread(target=work, args=(i,)) for i in range(len(F))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    np.testing.assert_allclose(out, serial, rtol=1e-8)
    np.testing.assert_allclose(serial, [dual_norm_phi(f, nm.spec) for f in F], rtol=1e-8)
