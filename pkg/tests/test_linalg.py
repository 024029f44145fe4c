import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nalab.errors import DimensionError
from nalab.linalg import GridIndex, as_coords, is_independent, lp_norm, pair_index, unpair_index

finite = st.floats(-1e6, 1e6, allow_nan=False)
vec = st.integers(1, 12).flatmap(lambda n: arrays(float, n, elements=finite))


@pytest.mark.parametrize("idx, expected", [((1, 1), 1), ((1, 2), 2), ((2, 1), 3), ((1, 3), 4), ((3, 1), 6)])
def test_pair_index_examples(idx, expected):
    assert pair_index(GridIndex(*idx)) == expected
    assert pair_index(*idx) == expected


def test_pair_index_bijective_on_antidiagonals():
    seen = {pair_index(n, s - n) for s in range(2, 31) for n in range(1, s)}
    k = 29 * 30 // 2
    assert seen == set(range(1, k + 1))


@given(st.integers(1, 500), st.integers(1, 500))
def test_unpair_inverts_pair(n, m):
    assert unpair_index(pair_index(n, m)) == (n, m)


@pytest.mark.parametrize("bad", [(0, 1), (1, 0), (-2, 3)])
def test_pair_index_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        pair_index(*bad)


@pytest.mark.parametrize("x, p, expected", [((3, 4), 2, 5.0), ((1, -1, 1), 1, 3.0), ((1, -2), np.inf, 2.0)])
def test_lp_norm_examples(x, p, expected):
    assert lp_norm(x, p) == expected


def test_lp_norm_rejects_other_p():
    with pytest.raises(ValueError):
        lp_norm([1.0], 3)


@pytest.mark.parametrize("p", [1, 2, np.inf])
@given(data=st.data())
def test_lp_norm_homogeneity_and_triangle(p, data):
    n = data.draw(st.integers(1, 10))
    x = data.draw(arrays(float, n, elements=finite))
    y = data.draw(arrays(float, n, elements=finite))
    c = data.draw(st.floats(-1e3, 1e3, allow_nan=False))
    scale = max(lp_norm(x, p), lp_norm(y, p), 1.0)
    assert abs(lp_norm(c * x, p) - abs(c) * lp_norm(x, p)) <= 1e-12 * max(1.0, abs(c)) * scale
    assert lp_norm(x + y, p) <= lp_norm(x, p) + lp_norm(y, p) + 1e-12 * scale


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_lp_norm_random_pairs(p):
    rng = np.random.default_rng(1)
    for _ in range(1000):
        x, y = rng.standard_normal((2, 7))
        c = rng.uniform(-5, 5)
        assert abs(lp_norm(c * x, p) - abs(c) * lp_norm(x, p)) <= 1e-12 * max(1, abs(c)) * lp_norm(x, p)
        assert lp_norm(x + y, p) <= lp_norm(x, p) + lp_norm(y, p) + 1e-12


def test_as_coords_validates():
    with pytest.raises(DimensionError):
        as_coords([1.0, 2.0], 3)
    with pytest.raises(DimensionError):
        as_coords([[1.0]])
    with pytest.raises(ValueError):
        as_coords([np.nan])
    assert as_coords((1, 2)).dtype == float


def test_is_independent():
    assert is_independent([[1, 0], [0, 1]])
    assert not is_independent([[1, 2], [2, 4]])
    assert not is_independent([[1, 0], [0, 1], [1, 1]])
