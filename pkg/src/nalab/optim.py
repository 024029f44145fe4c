"""Support maximisation, gauge evaluation and best approximation.

Every norm family is a :class:`Norm` subclass that knows how to evaluate
itself exactly, produce a norming functional, bound its dual norm, and
describe itself to cvxpy.  Solves that need iteration (the dual of the
composed norm, distances to subspaces) go through a conic warm start,
Newton polishing when the norm is smooth, and a final certificate built
from exact evaluations only, so the reported gap never depends on the
conic solver's own accuracy claims.
"""

from dataclasses import dataclass, field
import logging
import threading
import warnings

import cvxpy as cp
import numpy as np

from . import kernels
from .errors import DependenceError, DimensionError, SolverError
from .linalg import as_coords
from .norms import (
    base_dual_norm,
    base_support_point,
    dual_norm_phi,
    support_point_phi,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolveResult",
    "Norm",
    "LpNorm",
    "SumPhiNorm",
    "BaseNorm",
    "WSumNorm",
    "support_maximize",
    "gauge_eval",
    "distance_to_subspace",
    "minimize_affine",
    "DEFAULT_TOL",
    "MAX_ITER",
]

DEFAULT_TOL = 1e-9
MAX_ITER = 100_000
# entries below this fraction of the largest are left out of conic models
_CVX_FLOOR = 1e-13
# cached cvxpy problems hold shared parameters; assignment + solve is a critical section
_CVX_LOCK = threading.RLock()


@dataclass
class SolveResult:
    """Value plus witness and a certified gap (``residual``)."""

    value: float
    witness: np.ndarray
    residual: float
    iterations: int = 0
    dual: np.ndarray = None
    lower: float = None
    upper: float = None
    info: dict = field(default_factory=dict)


class Norm:
    """A norm on R^dim with exact evaluation and a conic description."""

    kind = "abstract"
    smooth = False

    def __init__(self, dim):
        self.dim = int(dim)
        self._cache = {}

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        return self.certify(x)[0]

    def value_many(self, X):
        return np.array([self.value(row) for row in np.atleast_2d(X)])

    def certify(self, x):
        """``(value, f, upper)`` with ``f @ x == value`` and dual norm of f <= 1."""
        raise NotImplementedError

    def certificate(self, x):
        """``(value, f, hint)``; ``hint`` helps :meth:`dual_upper` near ``f``."""
        value, f, _ = self.certify(x)
        return value, f, None

    def sup_split(self, y):
        """For norms of the form ``max_i |y_i| + h(y)`` with ``h`` smooth.

        Returns ``(grad_h, hint_fn)`` where ``hint_fn(g0)`` builds the
        :meth:`dual_upper` hint for the functional ``g0 + grad_h``, or None
        when the norm does not have this shape.
        """
        return None

    def dual(self, f):
        """Closed-form dual norm, or None when not available."""
        return None

    def dual_point(self, f):
        """Point of the unit ball where ``f`` attains its dual norm."""
        raise NotImplementedError

    def dual_upper(self, g, hint=None):
        """A certified upper bound on the dual norm of ``g``."""
        val = self.dual(g)
        if val is None:
            raise NotImplementedError
        return val

    def cvx_epigraph(self, expr):
        """``(t, constraints)`` modelling ``norm(expr) <= t``."""
        raise NotImplementedError

    def cvx_dual_ball(self, g):
        """``(constraints, hint_vars)`` modelling ``dual_norm(g) <= 1``."""
        raise NotImplementedError

    def hint_values(self, hint_vars):
        return None


class LpNorm(Norm):
    kind = "lp"

    def __init__(self, p, dim):
        super().__init__(dim)
        if p in ("inf", "∞"):
            p = np.inf
        if p not in (1, 2, np.inf):
            raise ValueError(f"unsupported p={p!r}; use 1, 2 or inf")
        self.p = p
        self.smooth = p == 2

    def certify(self, x):
        x = as_coords(x, self.dim)
        f = np.zeros_like(x)
        if self.p == 1:
            f = np.sign(x)
        elif self.p == 2:
            nrm = np.linalg.norm(x)
            if nrm > 0:
                f = x / nrm
        elif np.any(x):
            i = int(np.argmax(np.abs(x)))
            f[i] = np.sign(x[i])
        value = float(f @ x)
        return value, f, value

    def value(self, x):
        x = as_coords(x, self.dim)
        return float(np.linalg.norm(x, self.p))

    def value_many(self, X):
        return np.linalg.norm(np.atleast_2d(X), self.p, axis=1)

    def dual(self, f):
        f = as_coords(f, self.dim, "f")
        q = {1: np.inf, 2: 2, np.inf: 1}[self.p]
        return float(np.linalg.norm(f, q))

    def dual_point(self, f):
        f = as_coords(f, self.dim, "f")
        x = np.zeros_like(f)
        if self.p == np.inf:
            x = np.sign(f)
        elif self.p == 2:
            if np.any(f):
                x = f / np.linalg.norm(f)
        elif np.any(f):
            i = int(np.argmax(np.abs(f)))
            x[i] = np.sign(f[i])
        return x

    def sup_split(self, y):
        if self.p != np.inf:
            return None
        return np.zeros(self.dim), lambda g0: None

    def cvx_epigraph(self, expr):
        t = cp.Variable()
        return t, [cp.norm(expr, self.p) <= t]

    def cvx_dual_ball(self, g):
        q = {1: "inf", 2: 2, np.inf: 1}[self.p]
        return [cp.norm(g, q) <= 1], None


def _phi_epigraph(expr, phi):
    """Model ``gauge_{B_l1 + phi B_l2}(expr) <= t``; tiny phi entries drop the l2 part."""
    t = cp.Variable()
    n = phi.size
    keep = np.flatnonzero(phi >= _CVX_FLOOR * phi.max())
    u = cp.Variable(n)
    cons = [cp.norm1(u) <= t]
    if keep.size:
        v = cp.Variable(keep.size)
        P = np.zeros((n, keep.size))
        P[keep, np.arange(keep.size)] = phi[keep]
        cons += [expr == u + P @ v, cp.norm2(v) <= t]
    else:
        cons += [expr == u]
    return t, cons


class SumPhiNorm(Norm):
    """Gauge of ``B_l1 + S_phi(B_l2)``."""

    kind = "sum-norm-phi"
    smooth = True

    def __init__(self, spec):
        super().__init__(spec.dim)
        self.spec = spec
        self.phi = spec.phi.weights

    def certify(self, x):
        x = as_coords(x, self.dim)
        return kernels.phi_gauge(x, self.phi)

    def value_many(self, X):
        return kernels.phi_gauge_many(X, self.phi)

    def dual(self, f):
        return dual_norm_phi(f, self.spec)

    def dual_point(self, f):
        f = as_coords(f, self.dim, "f")
        if not np.any(f):
            return np.zeros_like(f)
        return support_point_phi(f, self.spec)[0]

    def cvx_epigraph(self, expr):
        return _phi_epigraph(expr, self.phi)

    def cvx_dual_ball(self, g):
        return [cp.norm(g, "inf") + cp.norm2(cp.multiply(self.phi, g)) <= 1], None

    def conic_support(self, f, tol):
        """``max f(u + phi*v)`` over ``||u||_1 <= 1``, ``||v||_2 <= 1``, one compile per dimension."""
        with _CVX_LOCK:
            prob, pf, pphi, x = _minkowski_support_problem(self.dim)
            pf.value = f
            pphi.value = self.phi
            _solve(prob, tol)
            return prob, x.value


class BaseNorm(Norm):
    """The base norm of the truncated c_0 (plain sup norm or smooth renorming)."""

    kind = "base"

    def __init__(self, spec):
        super().__init__(spec.dim)
        self.spec = spec
        self.smooth = spec.smooth
        self.d = spec.smoothing_weights

    def certify(self, x):
        x = as_coords(x, self.dim)
        if self.smooth:
            return kernels.box_gauge(x, self.d)
        f = np.zeros_like(x)
        if np.any(x):
            i = int(np.argmax(np.abs(x)))
            f[i] = np.sign(x[i])
        value = float(np.abs(x).max())
        return value, f, value

    def value_many(self, X):
        if self.smooth:
            return kernels.box_gauge_many(X, self.d)
        return np.abs(np.atleast_2d(X)).max(axis=1)

    def dual(self, f):
        return base_dual_norm(f, self.spec)

    def sup_split(self, y):
        if self.smooth:
            return None
        return np.zeros(self.dim), lambda g0: None

    def dual_point(self, f):
        return base_support_point(f, self.spec)

    def cvx_epigraph(self, expr):
        t = cp.Variable()
        if not self.smooth:
            return t, [cp.norm(expr, "inf") <= t]
        u = cp.Variable(self.dim)
        v = cp.Variable(self.dim)
        return t, [expr == u + cp.multiply(self.d, v), cp.norm(u, "inf") <= t, cp.norm2(v) <= t]

    def cvx_dual_ball(self, g):
        if not self.smooth:
            return [cp.norm1(g) <= 1], None
        return [cp.norm1(g) + cp.norm2(cp.multiply(self.d, g)) <= 1], None


class WSumNorm(Norm):
    """l_1-sum of ``|.|_phi`` blocks acting on the flattened block vector."""

    kind = "w-sum"

    def __init__(self, specs):
        specs = list(specs)
        if not specs:
            raise ValueError("w-sum needs at least one block")
        self.block = specs[0].dim
        if any(s.dim != self.block for s in specs):
            raise DimensionError("all W blocks must share one dimension")
        super().__init__(self.block * len(specs))
        self.specs = specs
        self.norms = [SumPhiNorm(s) for s in specs]

    def _split(self, x):
        return as_coords(x, self.dim).reshape(len(self.specs), self.block)

    def certify(self, x):
        z = self._split(x)
        value = upper = 0.0
        f = np.zeros_like(z)
        for m, nm in enumerate(self.norms):
            v, fm, up = nm.certify(z[m])
            value += v
            upper += up
            f[m] = fm
        return value, f.ravel(), upper

    def value_many(self, X):
        X = np.atleast_2d(X)
        out = np.zeros(X.shape[0])
        for m, nm in enumerate(self.norms):
            out += nm.value_many(X[:, m * self.block:(m + 1) * self.block])
        return out

    def dual(self, f):
        z = self._split(f)
        return max(nm.dual(z[m]) for m, nm in enumerate(self.norms))

    def dual_point(self, f):
        z = self._split(f)
        duals = [nm.dual(z[m]) for m, nm in enumerate(self.norms)]
        x = np.zeros_like(z)
        m = int(np.argmax(duals))
        x[m] = self.norms[m].dual_point(z[m])
        return x.ravel()

    def cvx_epigraph(self, expr):
        ts, cons = [], []
        for m, nm in enumerate(self.norms):
            t, c = nm.cvx_epigraph(expr[m * self.block:(m + 1) * self.block])
            ts.append(t)
            cons += c
        return cp.sum(cp.hstack(ts)), cons

    def cvx_dual_ball(self, g):
        cons = []
        for m, nm in enumerate(self.norms):
            cons += nm.cvx_dual_ball(g[m * self.block:(m + 1) * self.block])[0]
        return cons, None


# ---------------------------------------------------------------------------
# conic helpers


def _solve(problem, tol):
    kw = dict(tol_gap_abs=tol * 1e-2, tol_gap_rel=tol * 1e-2, tol_feas=tol * 1e-2, max_iter=500)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            problem.solve(solver=cp.CLARABEL, **kw)
        except cp.error.SolverError:
            problem.solve(solver=cp.SCS, eps_abs=tol, eps_rel=tol, max_iters=MAX_ITER)
    return problem


_MINKOWSKI = {}


def _minkowski_support_problem(dim):
    if dim not in _MINKOWSKI:
        f = cp.Parameter(dim)
        phi = cp.Parameter(dim, nonneg=True)
        u = cp.Variable(dim)
        v = cp.Variable(dim)
        x = u + cp.multiply(phi, v)
        prob = cp.Problem(cp.Maximize(f @ x), [cp.norm1(u) <= 1, cp.norm2(v) <= 1])
        _MINKOWSKI[dim] = (prob, f, phi, x)
    return _MINKOWSKI[dim]


def _support_problem(norm):
    key = ("support",)
    if key not in norm._cache:
        f = cp.Parameter(norm.dim)
        x = cp.Variable(norm.dim)
        t, cons = norm.cvx_epigraph(x)
        prob = cp.Problem(cp.Maximize(f @ x), cons + [t <= 1])
        norm._cache[key] = (prob, f, x)
    return norm._cache[key]


def _affine_problem(norm, k):
    key = ("affine", k)
    if key not in norm._cache:
        x0 = cp.Parameter(norm.dim)
        Z = cp.Parameter((norm.dim, k))
        c = cp.Variable(k)
        t, cons = norm.cvx_epigraph(x0 + Z @ c)
        prob = cp.Problem(cp.Minimize(t), cons)
        norm._cache[key] = (prob, x0, Z, c)
    return norm._cache[key]


def _dual_problem(norm, k):
    """max g @ x0  s.t.  Z^T g == 0, dual norm of g <= 1."""
    key = ("dual", k)
    if key not in norm._cache:
        x0 = cp.Parameter(norm.dim)
        Zt = cp.Parameter((k, norm.dim))
        g = cp.Variable(norm.dim)
        cons, hint = norm.cvx_dual_ball(g)
        prob = cp.Problem(cp.Maximize(x0 @ g), cons + [Zt @ g == 0])
        norm._cache[key] = (prob, x0, Zt, g, hint)
    return norm._cache[key]


def _orthonormal(B):
    """Orthonormal basis (columns) of the span of the columns of ``B``."""
    Q, _ = np.linalg.qr(B)
    return Q


def _project_out(g, Q):
    if Q.shape[1] == 0:
        return g
    return g - Q @ (Q.T @ g)


def _newton_polish(norm, x0, Z, c, max_iter=200, done=None):
    """Levenberg-Marquardt damped Newton on ``c -> norm(x0 + Z c)``.

    The Hessian is a central finite difference of the analytic gradient;
    the damping ``mu`` shrinks after full steps and grows after rejected
    ones, so flat (locally linear) pieces of the gauge cannot produce
    runaway steps.  ``done(c)`` is an optional certified stopping test.
    """
    k = Z.shape[1]

    def evaluate(cc):
        v, f, _ = norm.certify(x0 + Z @ cc)
        return v, Z.T @ f

    v, g = evaluate(c)
    mu = 1e-3
    it = 0
    while it < max_iter and mu < 1e8:
        it += 1
        if np.linalg.norm(g) <= 1e-15 or (done is not None and done(c)):
            break
        scale = max(np.linalg.norm(x0 + Z @ c), 1e-12)
        h = 1e-7 * scale
        H = np.empty((k, k))
        for j in range(k):
            e = np.zeros(k)
            e[j] = h
            H[:, j] = (evaluate(c + e)[1] - evaluate(c - e)[1]) / (2 * h)
        w, V = np.linalg.eigh(0.5 * (H + H.T))
        step = -V @ ((V.T @ g) / (np.maximum(w, 0.0) + mu / scale))
        slope = g @ step
        t = 1.0
        accepted = False
        while t > 1e-6:
            v_new, g_new = evaluate(c + t * step)
            if v_new <= v + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            mu *= 100.0
            continue
        mu = max(mu * (0.1 if t == 1.0 else 4.0), 1e-14)
        improvement = v - v_new
        c, v, g = c + t * step, v_new, g_new
        if improvement <= 1e-16 * v and t == 1.0 and mu <= 1e-12:
            break
    return c, it


def _active_set_polish(norm, x0, Q, c, max_iter=30):
    """Newton on the KKT system of ``min max_i |y_i| + h(y)``, ``y = x0 + Q c``.

    The active set ``I`` (coordinates tying for the max) is guessed from
    the warm start at a few thresholds.  Unknowns are ``c``, multipliers
    ``lam`` on ``I`` and the common level ``t``:

        s_i y_i = t (i in I),   Q^T (E_I^T (lam * s) + grad h(y)) = 0,   sum lam = 1.

    Returns the best ``c`` found (or None), dual candidates for the
    certificate, and the iteration count.
    """
    k = Q.shape[1]
    best_c, best_v, extras, total = None, np.inf, [], 0
    y0 = x0 + Q @ c
    for thresh in (1e-6, 1e-9, 1e-4, 1e-3):
        ay = np.abs(y0)
        I = np.flatnonzero(ay >= ay.max() * (1 - thresh))
        sgn = np.sign(y0[I])
        sgn[sgn == 0] = 1.0
        if I.size > k + 1:
            continue
        cc = c.copy()
        lam = np.full(I.size, 1.0 / I.size)
        t = float(np.max(sgn * y0[I]))
        QI = Q[I]
        for _ in range(max_iter):
            total += 1
            y = x0 + Q @ cc
            gh = norm.sup_split(y)[0]
            F = np.concatenate([sgn * y[I] - t, Q.T @ (_scatter(I, lam * sgn, y.size) + gh), [lam.sum() - 1]])
            if np.linalg.norm(F, np.inf) < 1e-15:
                break
            h = 1e-7 * max(np.linalg.norm(y), 1e-12)
            H = np.empty((k, k))
            for j in range(k):
                H[:, j] = Q.T @ (norm.sup_split(y + h * Q[:, j])[0] - norm.sup_split(y - h * Q[:, j])[0]) / (2 * h)
            J = np.zeros((I.size + k + 1, k + I.size + 1))
            J[:I.size, :k] = sgn[:, None] * QI
            J[:I.size, -1] = -1.0
            J[I.size:I.size + k, :k] = 0.5 * (H + H.T)
            J[I.size:I.size + k, k:k + I.size] = (QI * sgn[:, None]).T
            J[-1, k:k + I.size] = 1.0
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
            cc, lam, t = cc + step[:k], lam + step[k:k + I.size], t + step[-1]
            if np.linalg.norm(step, np.inf) < 1e-16 * max(1.0, np.abs(cc).max(initial=0.0)):
                break
        if not np.all(np.isfinite(cc)) or np.any(lam < -1e-12):
            continue
        y = x0 + Q @ cc
        gh, hint_fn = norm.sup_split(y)
        lam = np.clip(lam, 0.0, None)
        if lam.sum() <= 0:
            continue
        g0 = _scatter(I, lam * sgn / lam.sum(), y.size)
        extras.append((g0 + gh, hint_fn(g0)))
        v = norm.value(y)
        if v < best_v:
            best_c, best_v = cc, v
    return best_c, extras, total


def _gap_ok(norm, x0, Q, c, target):
    y = x0 + Q @ c
    v = norm.value(y)
    return v - _certify_affine(norm, x0, Q, y)[0] <= target * v


def _scatter(I, vals, n):
    out = np.zeros(n)
    out[I] = vals
    return out


def _certify_affine(norm, x0, Q, y, extra_duals=()):
    """Lower bound on ``min norm(x0 + span Q)`` from dual functionals orthogonal to Q."""
    best = (0.0, np.zeros_like(x0))
    _, f, hint = norm.certificate(y)
    candidates = [(f, hint)]
    candidates.extend(extra_duals)
    for g, hint in candidates:
        if g is None or not np.any(g):
            continue
        g = np.asarray(g, dtype=float)
        gp = _project_out(g, Q)
        try:
            ub = norm.dual_upper(gp, hint=None if hint is None else (g, hint))
        except NotImplementedError:
            continue
        if ub <= 0:
            continue
        lower = float(gp @ x0) / ub
        if lower > best[0]:
            best = (lower, gp / ub)
    return best


def minimize_affine(norm, x0, Z, tol=DEFAULT_TOL, raise_on_gap=True):
    """Minimise ``norm(x0 + Z c)`` over ``c``.

    Returns a :class:`SolveResult` whose ``value`` is attained at
    ``witness = x0 + Z c``, ``lower`` is a certified lower bound, ``dual``
    is a functional vanishing on ``span Z`` with dual norm at most one,
    and ``residual = value - lower``.
    """
    x0 = as_coords(x0, norm.dim, "x0")
    Z = np.asarray(Z, dtype=float).reshape(norm.dim, -1)
    k = Z.shape[1]
    ref = norm.value(x0)
    if ref == 0.0:
        return SolveResult(0.0, x0.copy(), 0.0, 0, np.zeros_like(x0), 0.0, 0.0)
    if k == 0:
        val, f, hint = norm.certificate(x0)
        lower = float(f @ x0) / norm.dual_upper(f, hint=None if hint is None else (f, hint))
        return SolveResult(val, x0.copy(), val - lower, 0, f, lower, val)
    Q = _orthonormal(Z)
    # work in orthonormal coordinates, scaled so that x0 has unit size
    s = ref
    u0 = x0 / s
    target = tol * 0.5
    best_y, value, lower, g, iterations = u0, 1.0, 0.0, np.zeros_like(u0), 0

    def consider(cc, extra=()):
        nonlocal best_y, value, lower, g
        y = u0 + Q @ cc
        v = norm.value(y)
        if v < value:
            best_y, value = y, v
        lo, gg = _certify_affine(norm, u0, Q, best_y, extra_duals=extra)
        if lo > lower:
            lower, g = lo, gg
        return value - lower <= target * value

    done = False
    if norm.smooth:
        # deterministic start at the zero vector, no conic solve needed
        cc, nit = _newton_polish(norm, u0, Q, np.zeros(k), done=lambda cc: _gap_ok(norm, u0, Q, cc, target))
        iterations += nit
        done = consider(cc)
    if not done:
        with _CVX_LOCK:
            prob, px0, pZ, c = _affine_problem(norm, k)
            px0.value = u0
            pZ.value = Q
            _solve(prob, tol)
            iterations += int(prob.solver_stats.num_iters or 0) if prob.solver_stats else 0
            cc = np.zeros(k) if c.value is None else np.asarray(c.value, dtype=float)
        if not np.all(np.isfinite(cc)) or norm.value(u0 + Q @ cc) > 1.0:
            cc = np.zeros(k)
        extra = []
        if norm.smooth:
            cc, nit = _newton_polish(norm, u0, Q, cc, done=lambda cc: _gap_ok(norm, u0, Q, cc, target))
            iterations += nit
        elif norm.sup_split(u0) is not None:
            c2, extra, nit = _active_set_polish(norm, u0, Q, cc)
            iterations += nit
            if c2 is not None and norm.value(u0 + Q @ c2) <= norm.value(u0 + Q @ cc):
                cc = c2
        done = consider(cc, extra)
    if not done:
        with _CVX_LOCK:
            dprob, dx0, dZt, gvar, hint = _dual_problem(norm, k)
            dx0.value = u0
            dZt.value = Q.T
            _solve(dprob, tol)
            gval = None if gvar.value is None else np.asarray(gvar.value, dtype=float)
            dual_hint = None if gval is None else norm.hint_values(hint)
        if gval is not None:
            consider(Q.T @ (best_y - u0), [(gval, dual_hint)])
    y = best_y
    value, lower = value * s, lower * s
    gap = max(value - lower, 0.0)
    res = SolveResult(value, y * s, gap, iterations, g, lower, value)
    # absolute floor: a few ulps of the problem scale (x0 in span Z gives value ~ eps * ref)
    if raise_on_gap and gap > tol * value + 16 * np.finfo(float).eps * ref:
        raise SolverError(
            f"{norm.kind}: certified gap {gap:.3e} exceeds tolerance at value {value:.12g}",
            value=value,
            gap=gap,
        )
    return res


# ---------------------------------------------------------------------------
# public operations


def support_maximize(norm, f, tol=DEFAULT_TOL, method="auto"):
    """``sup { f(x) : norm(x) <= 1 }`` with a feasible witness.

    ``method`` is one of

    * ``"auto"``: the closed-form dual norm when the family has one,
      otherwise ``"iterative"``;
    * ``"iterative"``: ``1 / min{ norm(x) : f(x) = 1 }`` by the certified
      affine minimiser, which only evaluates the primal gauge;
    * ``"conic"``: a single conic solve over the primal unit ball, to
      solver accuracy (a cross-check independent of both the above).
    """
    f = as_coords(f, norm.dim, "f")
    if not np.any(f):
        return SolveResult(0.0, np.zeros_like(f), 0.0, 0, lower=0.0, upper=0.0)
    if method not in ("auto", "iterative", "conic"):
        raise ValueError(f"unknown method {method!r}")
    closed = norm.dual(f)
    if method == "auto" and closed is not None:
        x = norm.dual_point(f)
        nx = norm.value(x)
        if nx > 1.0:
            x = x / nx
        attained = float(f @ x)
        return SolveResult(closed, x, abs(closed - attained), 0, lower=attained, upper=closed)
    if method == "conic":
        scale = np.abs(f).max()
        if hasattr(norm, "conic_support"):
            prob, xval = norm.conic_support(f / scale, tol)
        else:
            with _CVX_LOCK:
                prob, pf, xv = _support_problem(norm)
                pf.value = f / scale
                _solve(prob, tol)
                xval = xv.value
        if xval is None:
            raise SolverError(f"{norm.kind}: conic support solve failed ({prob.status})")
        x = np.asarray(xval, dtype=float)
        x = x / max(1.0, norm.value(x))
        value = float(f @ x)
        upper = closed if closed is not None else value
        return SolveResult(
            value, x, abs(upper - value), int(prob.solver_stats.num_iters or 0),
            lower=value, upper=upper,
        )
    # dual norm of f equals 1 / min{ norm(x) : f @ x == 1 }
    nf2 = float(f @ f)
    x0 = f / nf2
    Z = np.linalg.svd(f[None, :])[2][1:].T
    res = minimize_affine(norm, x0, Z, tol=tol, raise_on_gap=False)
    value = 1.0 / res.value
    upper = np.inf if res.lower <= 0 else 1.0 / res.lower
    gap = upper - value
    witness = res.witness / res.value
    out = SolveResult(value, witness, gap, res.iterations, res.dual, value, upper)
    if gap > tol * value:
        raise SolverError(
            f"{norm.kind}: certified gap {gap:.3e} exceeds tolerance", value=value, gap=gap
        )
    return out


def gauge_eval(norm, x, tol=DEFAULT_TOL):
    """Gauge of the unit ball at ``x`` with its norming functional as witness."""
    x = as_coords(x, norm.dim)
    if not np.any(x):
        return SolveResult(0.0, np.zeros_like(x), 0.0, 0, lower=0.0, upper=0.0)
    value, f, upper = norm.certify(x)
    return SolveResult(value, f, max(upper - value, 0.0), 0, dual=f, lower=value, upper=upper)


def distance_to_subspace(x, basis, norm, tol=DEFAULT_TOL):
    """``min { norm(x - m) : m in span(basis) }`` with a nearest point as witness.

    ``dual`` in the result is a functional vanishing on the subspace with
    dual norm at most one; ``dual @ x`` is the certified lower bound.
    """
    x = as_coords(x, norm.dim)
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.size == 0:
        B = np.zeros((0, norm.dim))
    if B.shape[1] != norm.dim:
        raise DimensionError(f"basis vectors have dimension {B.shape[1]}, expected {norm.dim}")
    if B.shape[0]:
        sv = np.linalg.svd(B, compute_uv=False)
        if B.shape[0] > norm.dim or sv[-1] <= 1e-10 * sv[0]:
            raise DependenceError("basis vectors are linearly dependent")
    res = minimize_affine(norm, x, -B.T, tol=tol)
    nearest = x - res.witness
    return SolveResult(res.value, nearest, res.residual, res.iterations, res.dual, res.lower, res.upper)
