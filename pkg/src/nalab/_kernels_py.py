"""Pure-numpy gauge kernels.

Reference implementation of the two Minkowski-sum gauges used by every
norm in the package.  The compiled module ``nalab._ckernels`` exposes the
same functions with the same signatures; ``nalab.kernels`` picks one at
import time.

Both gauges are evaluated exactly (up to rounding) by an active-set sweep
over sorted breakpoints, and both return a dual certificate together with
a primal upper bound, so every value comes with its own gap.
"""

import numpy as np

__all__ = [
    "phi_gauge",
    "box_gauge",
    "phi_gauge_many",
    "box_gauge_many",
]

# relative window inside which two candidate values count as tied
_TIE = 1e-12


def _phi_candidate(y, phi2, a, r):
    u = np.minimum(1.0, np.where(a > 0, r * np.where(a > 0, a, 1.0), 0.0))
    f = np.sign(y) * u
    dual = np.abs(f).max() + np.sqrt(phi2 @ (f * f))
    f = f / dual
    return f, float(f @ y)


def _phi_upper(y, phi, f, value):
    pf = phi * f
    nr = np.sqrt(pf @ pf)
    b = y / value - phi * (pf / nr)
    return value * max(np.abs(b).sum(), 1.0)


def _row_scales(Y):
    """Largest magnitude per row, with 1 for all-zero rows."""
    s = np.abs(Y).max(axis=1)
    return np.where(s > 0, s, 1.0)


def phi_gauge(y, phi):
    """Gauge of ``B_l1 + diag(phi) B_l2`` at ``y``; see :func:`_phi_unit`.

    Returns ``(value, cert, upper)``.  The input is rescaled to unit sup
    norm first so that squares neither underflow nor overflow.
    """
    y = np.asarray(y, dtype=float)
    s = np.abs(y).max() if y.size else 0.0
    if s == 0:
        return 0.0, np.zeros_like(y), 0.0
    # breakpoints 1/a may overflow to inf for subnormal coordinates, by design
    with np.errstate(over="ignore"):
        value, f, upper = _phi_unit(y / s, phi)
    return value * s, f, upper * s


def _phi_unit(y, phi):
    """Gauge of ``B_l1 + diag(phi) B_l2`` at ``y``.

    Returns ``(value, cert, upper)`` where ``cert`` has dual norm
    ``max|cert| + ||phi*cert||_2 == 1`` and ``cert @ y == value``, and
    ``upper`` is the gauge bound read off an explicit decomposition
    ``y = upper * (b + phi*a)``.

    The maximiser over the dual ball has the form
    ``sign(y) * min(1, r*|y|/phi**2)`` up to scaling, so the problem
    reduces to maximising a ratio in the single parameter ``r``.  On each
    piece between consecutive breakpoints the ratio is
    ``(X + r Q) / (1 + sqrt(S + r^2 Q))`` and its stationary point solves a
    quadratic.
    """
    y = np.asarray(y, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ay = np.abs(y)
    nz = np.flatnonzero(ay > 0)
    if nz.size == 0:
        return 0.0, np.zeros_like(y), 0.0
    phi2 = phi * phi
    a = np.zeros_like(y)
    a[nz] = ay[nz] / phi2[nz]
    order = nz[np.argsort(-a[nz], kind="stable")]
    a_s = a[order]
    y_s = ay[order]
    p_s = phi2[order]
    X = np.cumsum(y_s)
    S = np.cumsum(p_s)
    # suffix sums of y^2/phi^2 over the not-yet-saturated tail
    tail = (y_s * a_s)[::-1].cumsum()[::-1]
    Q = np.append(tail[1:], 0.0)

    K = order.size
    rs, vals = [], []
    for k in range(K):
        lo = 1.0 / a_s[k] if a_s[k] > 0 else np.inf
        hi = 1.0 / a_s[k + 1] if k + 1 < K and a_s[k + 1] > 0 else np.inf
        Xk, Sk, Qk = X[k], S[k], Q[k]
        rs.append(lo)
        if Qk > 0.0:
            vals.append((Xk + lo * Qk) / (1.0 + np.sqrt(Sk + lo * (lo * Qk))))
        else:
            # saturated piece; also keeps lo = inf (subnormal y) out of 0*inf
            vals.append(Xk / (1.0 + np.sqrt(Sk)))
        qa = Xk * Xk - Qk
        if Qk > 0.0 and qa > 0.0:
            qc = Sk * Sk - Sk
            r = (Xk * Sk + np.sqrt(max(Xk * Xk * Sk * Sk - qa * qc, 0.0))) / qa
            if lo < r < hi:
                rs.append(r)
                vals.append((Xk + r * Qk) / (1.0 + np.sqrt(Sk + r * (r * Qk))))
    vals = np.asarray(vals)
    best = vals.max()
    pick = np.flatnonzero(vals >= best * (1.0 - _TIE))

    out = None
    for i in pick:
        f, value = _phi_candidate(y, phi2, a, rs[i])
        upper = _phi_upper(y, phi, f, value)
        if out is None or upper - value < out[2] - out[0]:
            out = (value, f, upper)
    return out


def box_gauge(x, d):
    """Gauge of ``B_linf + diag(d) B_l2`` at ``x``; see :func:`_box_unit`.

    Rescales to unit sup norm first, as :func:`phi_gauge`.
    """
    x = np.asarray(x, dtype=float)
    s = np.abs(x).max() if x.size else 0.0
    if s == 0:
        return 0.0, np.zeros_like(x), 0.0
    value, f, upper = _box_unit(x / s, d)
    return value * s, f, upper * s


def _box_unit(x, d):
    """Gauge of ``B_linf + diag(d) B_l2`` at ``x``.

    The value is the root ``lam`` of
    ``sum((|x_i| - lam)_+^2 / d_i^2) == lam^2``; it is found by locating
    the active set from the sorted magnitudes and solving the quadratic on
    that piece.  Returns ``(value, cert, upper)`` as :func:`phi_gauge`,
    with dual norm ``||cert||_1 + ||d*cert||_2``.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    ax = np.abs(x)
    nz = np.flatnonzero(ax > 0)
    if nz.size == 0:
        return 0.0, np.zeros_like(x), 0.0
    order = nz[np.argsort(-ax[nz], kind="stable")]
    t = ax[order]
    w = 1.0 / (d[order] * d[order])
    W = np.cumsum(w)
    T = np.cumsum(w * t)
    U = np.cumsum(w * t * t)

    K = order.size
    k = 1
    while k < K:
        tk = t[k]
        F = U[k - 1] - 2.0 * tk * T[k - 1] + tk * tk * (W[k - 1] - 1.0)
        if F >= 0.0:
            break
        k += 1
    Wk, Tk, Uk = W[k - 1], T[k - 1], U[k - 1]
    lam = Uk / (Tk + np.sqrt(max(Tk * Tk - (Wk - 1.0) * Uk, 0.0)))

    excess = np.maximum(ax - lam, 0.0)
    f = np.sign(x) * excess / (d * d)
    if not f.any():
        # lam rounded up to max|x| (tiny d): norm with the largest coordinate
        i = int(np.argmax(ax))
        f[i] = np.sign(x[i])
    dual = np.abs(f).sum() + np.sqrt(((d * f) ** 2).sum())
    f = f / dual
    value = float(f @ x)

    df = d * f
    nr = np.sqrt(df @ df)
    s = x / value - d * (df / nr)
    upper = value * max(np.abs(s).max(), 1.0)
    return value, f, upper


def phi_gauge_many(Y, phi):
    """Row-wise :func:`phi_gauge` values of a 2-D array."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    s = _row_scales(Y)
    with np.errstate(over="ignore"):
        vals = [_phi_unit(row, phi)[0] if row.any() else 0.0 for row in Y / s[:, None]]
    return np.array(vals) * s


def box_gauge_many(X, d):
    """Row-wise :func:`box_gauge` values of a 2-D array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    s = _row_scales(X)
    return np.array([_box_unit(row, d)[0] if row.any() else 0.0 for row in X / s[:, None]]) * s
