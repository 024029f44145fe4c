import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nalab import kernels

BACKENDS = kernels.backends()
names = sorted(BACKENDS)

dims = st.integers(1, 12)


def vec_and_weights(scale_lo=-6, scale_hi=6):
    return dims.flatmap(
        lambda n: st.tuples(
            arrays(float, n, elements=st.floats(-1e3, 1e3, allow_nan=False)),
            arrays(float, n, elements=st.floats(1e-3, 1.0)),
        )
    )


def test_compiled_backend_is_available():
    # the package is built with the extension; the fallback is opt-in
    assert "cython" in BACKENDS
    assert kernels.BACKEND == ("python" if os.environ.get("NALAB_PURE_PYTHON", "") not in ("", "0") else "cython")


@pytest.mark.parametrize("env, expected", [("1", "python"), ("0", "cython")])
def test_backend_selection_by_env(env, expected):
    out = subprocess.run(
        [sys.executable, "-c", "from nalab import kernels; print(kernels.BACKEND)"],
        env={**os.environ, "NALAB_PURE_PYTHON": env},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected


@pytest.mark.parametrize("backend", names)
@given(data=vec_and_weights())
def test_phi_gauge_certificate(backend, data):
    y, phi = data
    phi = phi / (phi.sum() * 1.01) if phi.sum() >= 1 else phi
    val, f, upper = BACKENDS[backend].phi_gauge(y, phi)
    if not np.any(y):
        assert val == 0 and upper == 0
        return
    assert abs(f @ y - val) <= 1e-10 * val
    assert abs(np.abs(f).max() + np.linalg.norm(phi * f) - 1) <= 1e-10
    assert val * (1 - 1e-12) <= upper <= val * (1 + 1e-8)
    # gauge bounds of the Minkowski ball
    l1 = np.abs(y).sum()
    assert val <= l1 * (1 + 1e-12) and l1 <= (1 + phi.sum()) * val * (1 + 1e-12)


@pytest.mark.parametrize("backend", names)
@given(data=vec_and_weights())
def test_box_gauge_certificate(backend, data):
    x, d = data
    val, f, upper = BACKENDS[backend].box_gauge(x, d)
    if not np.any(x):
        assert val == 0 and upper == 0
        return
    assert abs(f @ x - val) <= 1e-10 * val
    assert abs(np.abs(f).sum() + np.linalg.norm(d * f) - 1) <= 1e-10
    assert val * (1 - 1e-12) <= upper <= val * (1 + 1e-8)
    # the value solves sum((|x| - lam)_+^2 / d^2) = lam^2
    sx = np.abs(x).max()
    lam = val / sx
    lhs = np.sum(np.maximum(np.abs(x) / sx - lam, 0) ** 2 / d ** 2)
    assert abs(np.sqrt(lhs) - lam) <= 1e-8
    assert val <= np.abs(x).max() * (1 + 1e-12)


@pytest.mark.parametrize("kernel", ["phi_gauge", "box_gauge"])
def test_backends_agree(kernel):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(3)
    cases = []
    for n in (1, 2, 5, 17, 64):
        w = 2.0 ** -(np.arange(1, n + 1) + 1)
        cases += [(rng.standard_normal(n) * 10 ** rng.uniform(-8, 8), w) for _ in range(40)]
        cases.append((np.ones(n), w))
        cases.append((np.eye(n)[0], w))
        cases.append((np.zeros(n), w))
    for y, w in cases:
        a = getattr(BACKENDS["python"], kernel)(y, w)
        b = getattr(BACKENDS["cython"], kernel)(y, w)
        assert abs(a[0] - b[0]) <= 1e-12 * max(a[0], 1e-300)
        np.testing.assert_allclose(a[1], b[1], rtol=1e-9, atol=1e-12 * np.abs(a[1]).max(initial=0))


@pytest.mark.parametrize("backend", names)
def test_many_matches_single(backend):
    mod = BACKENDS[backend]
    rng = np.random.default_rng(4)
    Y = rng.standard_normal((20, 6))
    w = 2.0 ** -(np.arange(1, 7) + 1)
    np.testing.assert_array_equal(mod.phi_gauge_many(Y, w), [mod.phi_gauge(y, w)[0] for y in Y])
    np.testing.assert_array_equal(mod.box_gauge_many(Y, w), [mod.box_gauge(y, w)[0] for y in Y])


@pytest.mark.parametrize("backend", names)
def test_axis_values(backend):
    mod = BACKENDS[backend]
    w = 2.0 ** -(np.arange(1, 5) + 1)
    assert abs(mod.phi_gauge(np.eye(4)[0], w)[0] - 0.8) <= 1e-15
    assert abs(mod.box_gauge(np.eye(3)[0], 0.1 * 2.0 ** -np.arange(1, 4))[0] - 1 / 1.05) <= 1e-15
