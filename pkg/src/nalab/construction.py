"""The truncated space: dense dual net, v-table, operators R_m, R, R* and the norm p.

At truncation the space is R^ambient_dim with a base norm, and the grid
``N x N`` is cut to ``n = 1..n_max``, ``m = 1..m_max``.  Each level ``m``
stores the matrix ``A_m`` whose ``n``-th row is ``(m/2^m)(1/2^n) v*_{n,m}``,
so that ``R_m x = A_m x`` and ``R* w* = sum_m A_m^T w*_m``.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import cvxpy as cp
import numpy as np

from . import kernels
from .errors import (
    AmbiguousSupportError,
    AttainmentError,
    ConfigError,
    DimensionError,
    SeparationError,
)
from .linalg import as_coords, pair_index
from .norms import (
    PhiSequence,
    SmoothBaseNormSpec,
    SumNormSpec,
    base_dual_norm,
)
from .optim import DEFAULT_TOL, BaseNorm, Norm, SumPhiNorm, support_maximize
from .seeding import stream_rng

__all__ = [
    "ConstructionConfig",
    "TruncatedSpace",
    "ComposedNorm",
    "build_net",
    "build_space",
    "r_m_apply",
    "r_apply",
    "r_star_apply",
    "p_norm",
    "p_dual",
    "decompose_dual",
]

# smallest phi^2 the gauge kernels handle without underflow
_PHI2_FLOOR = 1e-290


@dataclass(frozen=True)
class ConstructionConfig:
    """Truncation parameters.

    Parameters
    ----------
    ambient_dim : int
        Dimension of the truncated c_0.
    n_max, m_max : int
        Grid truncation; ``n_max >= ambient_dim`` so each level separates points.
    delta : float
        Weight of the W-term in ``p = |||.||| + delta ||R.||_W``.
    base : SmoothBaseNormSpec
        Base norm; its dimension must equal ``ambient_dim``.
    net_eps : float
        Covering radius requested from :func:`build_net`, in ``(0, 1]``.
    seed : int
        Seed of the net candidates.
    net : str or sequence
        ``"eps"`` (greedy net), ``"canonical"`` (canonical dual basis only)
        or an explicit list of dual vectors.
    decay : str
        ``"sigma"`` scales ``v*_{n,m}`` by ``2^-sigma(n,m)``; ``"none"`` keeps
        the unit net vectors.
    """

    ambient_dim: int
    n_max: int
    m_max: int
    delta: float
    base: SmoothBaseNormSpec
    net_eps: float = 0.25
    seed: int = 0
    net: object = "eps"
    decay: str = "sigma"

    def __post_init__(self):
        for name in ("ambient_dim", "n_max", "m_max"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val or int(val) < 1:
                raise ConfigError(f"{name} must be a positive integer, got {val!r}", name)
            object.__setattr__(self, name, int(val))
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ConfigError(f"delta must be positive, got {self.delta!r}", "delta")
        if not (0 < self.net_eps <= 1):
            raise ConfigError(f"net_eps must lie in (0, 1], got {self.net_eps!r}", "net_eps")
        if self.n_max < self.ambient_dim:
            raise ConfigError("n_max must be at least ambient_dim", "n_max")
        if self.n_max > 50 or self.m_max > 50:
            raise ConfigError("grid sizes above 50 are not supported", "n_max" if self.n_max > 50 else "m_max")
        if not isinstance(self.base, SmoothBaseNormSpec) or self.base.dim != self.ambient_dim:
            raise ConfigError("base must be a SmoothBaseNormSpec of dimension ambient_dim", "base")
        if self.decay not in ("sigma", "none"):
            raise ConfigError(f"decay must be 'sigma' or 'none', got {self.decay!r}", "decay")
        if isinstance(self.net, str):
            if self.net not in ("eps", "canonical"):
                raise ConfigError(f"net must be 'eps', 'canonical' or a list, got {self.net!r}", "net")
        else:
            arr = np.asarray(self.net, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != self.ambient_dim or arr.shape[0] == 0:
                raise ConfigError("explicit net must be a non-empty list of ambient_dim vectors", "net")
            if not np.all(np.isfinite(arr)) or np.any(~arr.any(axis=1)):
                raise ConfigError("explicit net vectors must be finite and nonzero", "net")
            object.__setattr__(self, "net", tuple(tuple(float(v) for v in row) for row in arr))


def _dual_distance(S, N, base):
    """Base-dual distance from each row of S to the nearest of +-N."""
    out = np.full(S.shape[0], np.inf)
    d = base.smoothing_weights
    for w in N:
        for sgn in (1.0, -1.0):
            diff = S - sgn * w
            dist = np.abs(diff).sum(axis=1)
            if d is not None:
                dist += np.linalg.norm(diff * d, axis=1)
            np.minimum(out, dist, out=out)
    return out


def build_net(dim, eps, base, seed, max_size=None, candidates=4096):
    """Greedy dual net of base-dual-unit vectors.

    The list starts with the normalised canonical dual basis, then adds,
    farthest first, seeded random candidates from the dual unit sphere
    until every candidate lies within ``0.9 * eps`` of the net or its
    negation.  In low dimension this is an ``eps``-net of the sphere; in
    high dimension the covering is only as good as the candidate cloud,
    and ``max_size`` caps the list (the farthest-first order keeps the
    head well spread).
    """
    if not (0 < eps <= 1):
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    dim = int(dim)
    if base.dim != dim:
        raise DimensionError(f"base norm has dimension {base.dim}, expected {dim}")
    net = [np.eye(dim)[i] / base_dual_norm(np.eye(dim)[i], base) for i in range(dim)]
    if dim == 1:
        return net
    rng = stream_rng(seed, "net", dim)
    S = rng.standard_normal((int(candidates), dim))
    S /= np.array([base_dual_norm(s, base) for s in S])[:, None]
    dist = _dual_distance(S, net, base)
    cap = np.inf if max_size is None else int(max_size)
    while len(net) < cap:
        j = int(np.argmax(dist))
        if dist[j] <= 0.9 * eps:
            break
        net.append(S[j].copy())
        np.minimum(dist, _dual_distance(S, [S[j]], base), out=dist)
    return net


class ComposedNorm(Norm):
    """``p(x) = |||x||| + delta * sum_m |A_m x|_m``."""

    kind = "composed-p"

    def __init__(self, base, A, specs, delta):
        super().__init__(base.dim)
        self.base = BaseNorm(base)
        self.smooth = self.base.smooth
        self.A = A
        self.blocks = [SumPhiNorm(s) for s in specs]
        self.delta = float(delta)

    def _parts(self, x):
        v0, f0, u0 = self.base.certify(x)
        vals, gs, ups = [], [], []
        for Am, nm in zip(self.A, self.blocks):
            v, g, u = nm.certify(Am @ x)
            vals.append(v)
            gs.append(g)
            ups.append(u)
        return (v0, f0, u0), (vals, gs, ups)

    def certify(self, x):
        x = as_coords(x, self.dim)
        (v0, f0, u0), (vals, gs, ups) = self._parts(x)
        f = f0 + self.delta * sum(Am.T @ g for Am, g in zip(self.A, gs))
        return v0 + self.delta * sum(vals), f, u0 + self.delta * sum(ups)

    def certificate(self, x):
        x = as_coords(x, self.dim)
        (v0, f0, _), (vals, gs, _) = self._parts(x)
        f = f0 + self.delta * sum(Am.T @ g for Am, g in zip(self.A, gs))
        return v0 + self.delta * sum(vals), f, (f0, gs)

    def sup_split(self, y):
        if self.smooth:
            return None
        gs = [nm.certify(Am @ y)[1] for Am, nm in zip(self.A, self.blocks)]
        grad = self.delta * sum(Am.T @ g for Am, g in zip(self.A, gs))
        return grad, lambda g0: (g0, gs)

    def value(self, x):
        x = as_coords(x, self.dim)
        val = self.base.value(x)
        for Am, nm in zip(self.A, self.blocks):
            val += self.delta * nm.value(Am @ x)
        return val

    def value_many(self, X):
        X = np.atleast_2d(X)
        out = self.base.value_many(X)
        for Am, nm in zip(self.A, self.blocks):
            out = out + self.delta * nm.value_many(X @ Am.T)
        return out

    def dual_upper(self, g, hint=None):
        """Bound from a decomposition ``g = g0 + delta sum A_m^T g_m``.

        With no hint the trivial split ``g0 = g`` is used.  A hint
        ``(f_ref, (f0, gs))`` describes a split of ``f_ref``; the residual
        ``g - f_ref`` is absorbed into ``g0``.
        """
        g = as_coords(g, self.dim, "g")
        best = self.base.dual(g)
        if hint is not None:
            f_ref, (f0, gs) = hint
            g0 = f0 + (g - f_ref)
            bound = self.base.dual(g0)
            for nm, gm in zip(self.blocks, gs):
                bound = max(bound, nm.dual(gm))
            best = min(best, bound)
        return best

    def dual_point(self, f):
        return support_maximize(self, f).witness

    def cvx_epigraph(self, expr):
        t0, cons = self.base.cvx_epigraph(expr)
        ts = [t0]
        for Am, nm in zip(self.A, self.blocks):
            t, c = nm.cvx_epigraph(Am @ expr)
            ts.append(self.delta * t)
            cons += c
        t = cp.Variable()
        return t, cons + [cp.sum(cp.hstack(ts)) <= t]

    def cvx_dual_ball(self, g):
        g0 = cp.Variable(self.dim)
        gms = [cp.Variable(Am.shape[0]) for Am in self.A]
        cons = self.base.cvx_dual_ball(g0)[0]
        for nm, gm in zip(self.blocks, gms):
            cons += nm.cvx_dual_ball(gm)[0]
        recon = g0 + self.delta * sum(Am.T @ gm for Am, gm in zip(self.A, gms))
        return cons + [g == recon], (g0, gms)

    def hint_values(self, hint_vars):
        g0, gms = hint_vars
        if g0.value is None:
            return None
        return np.asarray(g0.value, dtype=float), [np.asarray(gm.value, dtype=float) for gm in gms]


@dataclass(frozen=True, eq=False)
class TruncatedSpace:
    """Assembled truncated space; immutable after :func:`build_space`.

    ``v_table[m-1][n-1]`` is ``v*_{n,m}``; ``v_dual_norms`` caches their
    base-dual norms; ``A[m-1]`` is the matrix of ``R_m``.
    """

    config: ConstructionConfig
    net: tuple
    v_table: np.ndarray
    v_dual_norms: np.ndarray
    phi_m: tuple
    sum_specs: tuple
    A: tuple = field(repr=False)

    @property
    def dim(self):
        return self.config.ambient_dim

    @property
    def delta(self):
        return self.config.delta

    @property
    def base(self):
        return self.config.base

    def v(self, n, m):
        return self.v_table[m - 1, n - 1]

    @cached_property
    def norm(self):
        return ComposedNorm(self.base, self.A, self.sum_specs, self.delta)

    @cached_property
    def base_norm(self):
        return BaseNorm(self.base)


def _dense_list(net, dim):
    """Signed list ``e_1..e_d, -e_1..-e_d, w_{d+1}, -w_{d+1}, ...``."""
    head = [np.asarray(w) for w in net[:dim]]
    out = head + [-w for w in head]
    for w in net[dim:]:
        out += [np.asarray(w), -np.asarray(w)]
    return out


def build_space(config):
    """Assemble and audit the truncated space for ``config``."""
    cfg = config
    d, base = cfg.ambient_dim, cfg.base
    if isinstance(cfg.net, str) and cfg.net == "canonical":
        net = [np.eye(d)[i] / base_dual_norm(np.eye(d)[i], base) for i in range(d)]
        L = net
    elif isinstance(cfg.net, str):
        # each level only ever sees n_max entries of the signed list
        net = build_net(d, cfg.net_eps, base, cfg.seed, max_size=max(d, d + (cfg.n_max - 2 * d + 1) // 2))
        L = _dense_list(net, d)
    else:
        net = [np.asarray(w, dtype=float) for w in cfg.net]
        net = [w / base_dual_norm(w, base) for w in net]
        L = net
    size = len(L)
    V = np.empty((cfg.m_max, cfg.n_max, d))
    for m in range(1, cfg.m_max + 1):
        for n in range(1, cfg.n_max + 1):
            w = L[(n - 1) % size]
            scale = 2.0 ** -pair_index(n, m) if cfg.decay == "sigma" else 1.0
            V[m - 1, n - 1] = scale * w
    norms = np.array([[base_dual_norm(V[m, n], base) for n in range(cfg.n_max)] for m in range(cfg.m_max)])
    if np.any(norms <= 0):
        raise SeparationError("a v-table entry is zero")
    for m in range(cfg.m_max):
        if np.linalg.matrix_rank(V[m] / norms[m][:, None]) < d:
            raise SeparationError(f"level m={m + 1} of the v-table does not separate points")
    n_idx = np.arange(1, cfg.n_max + 1)
    phis, specs, A = [], [], []
    for m in range(1, cfg.m_max + 1):
        weights = 2.0 ** -m * 2.0 ** -n_idx * norms[m - 1]
        if np.any(weights ** 2 < _PHI2_FLOOR):
            raise ConfigError("phi_m underflows at this truncation; use smaller n_max/m_max", "n_max")
        try:
            phi = PhiSequence(weights)
        except ValueError as exc:
            raise ConfigError(f"phi_{m}: {exc}", "m_max") from exc
        phis.append(phi)
        specs.append(SumNormSpec(phi))
        Am = (m * 2.0 ** -m) * (2.0 ** -n_idx)[:, None] * V[m - 1]
        Am.setflags(write=False)
        A.append(Am)
    V.setflags(write=False)
    norms.setflags(write=False)
    return TruncatedSpace(cfg, tuple(net), V, norms, tuple(phis), tuple(specs), tuple(A))


def r_m_apply(space, x, m):
    """``[R_m x](n) = (m/2^m)(1/2^n) v*_{n,m}(x)`` for ``n = 1..n_max``."""
    x = as_coords(x, space.dim)
    if int(m) != m or not 1 <= m <= space.config.m_max:
        raise ValueError(f"m must lie in 1..{space.config.m_max}, got {m!r}")
    return space.A[int(m) - 1] @ x


def r_apply(space, x):
    """All blocks ``R_m x`` stacked as rows."""
    x = as_coords(x, space.dim)
    return np.stack([Am @ x for Am in space.A])


def r_star_apply(space, wstar):
    """``sum_{n,m} w*_m(n) (m/2^m)(1/2^n) v*_{n,m}``."""
    w = np.atleast_2d(np.asarray(wstar, dtype=float))
    if w.shape != (space.config.m_max, space.config.n_max):
        raise DimensionError(
            f"wstar has shape {w.shape}, expected ({space.config.m_max}, {space.config.n_max})"
        )
    return sum(Am.T @ wm for Am, wm in zip(space.A, w))


def p_norm(space, x):
    """``|||x||| + delta * ||R x||_W``."""
    return space.norm.value(x)


def p_dual(space, f, tol=DEFAULT_TOL):
    """Dual norm of ``p`` at ``f``; the witness is a point of the unit sphere where ``f`` attains."""
    return support_maximize(space.norm, f, tol=tol)


def decompose_dual(space, f, x, tol=1e-6, f_dual=None):
    """Split an attaining pair as ``f = x0* + delta * R*(w*)``.

    ``w*_m`` is the norming functional of ``|.|_m`` at ``R_m x`` and
    ``x0*`` the remainder, which must be a base-dual-unit functional
    norming ``x``.  Pass ``f_dual`` to skip recomputing the dual norm.

    Returns
    -------
    x0star : ndarray
    wstar : ndarray, shape (m_max, n_max)
    """
    f = as_coords(f, space.dim, "f")
    x = as_coords(x, space.dim)
    fd = p_dual(space, f).value if f_dual is None else float(f_dual)
    px = p_norm(space, x)
    fx = float(f @ x)
    if abs(fd - 1) > tol or abs(px - 1) > tol or abs(fx - 1) > tol:
        raise AttainmentError(f"not an attaining pair: p*(f)={fd:.9g}, p(x)={px:.9g}, f(x)={fx:.9g}")
    if not space.base.smooth:
        ax = np.abs(x)
        top = np.flatnonzero(ax >= ax.max() * (1 - 1e-9))
        if top.size > 1:
            raise AmbiguousSupportError(
                f"plain base norm is not smooth at x: |x| peaks at coordinates {list(top + 1)}"
            )
    wstar = np.stack([
        kernels.phi_gauge(Am @ x, s.phi.weights)[1] for Am, s in zip(space.A, space.sum_specs)
    ])
    x0star = f - space.delta * r_star_apply(space, wstar)
    nb = base_dual_norm(x0star, space.base)
    if abs(nb - 1) > tol:
        raise AttainmentError(f"remainder has base-dual norm {nb:.9g}, expected 1")
    return x0star, wstar
