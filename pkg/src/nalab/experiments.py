"""Probes of the lemma-level and theorem-level statements at truncation.

Finite-dimensional spaces are reflexive, so every functional attains its
norm; the probes therefore check the quantitative mechanism of each
argument (strictness margins, sign conditions, interval separation,
lifting identities) rather than the infinite-dimensional conclusions.
Every suite returns a :class:`SuiteReport`; the segment probe returns a
:class:`SegmentProbeRecord`.  :func:`report_emit` writes either to disk
in a byte-stable format.
"""

from dataclasses import dataclass, field, fields, is_dataclass
import csv
import hashlib
import io
import json
import math
import time

import numpy as np

from . import kernels
from .construction import decompose_dual, p_dual, r_m_apply
from .errors import ConfigError, DependenceError, ReportError
from .linalg import as_coords, is_independent
from .norms import PhiSequence, SumNormSpec, dual_norm_phi, support_point_phi
from .optim import DEFAULT_TOL, SumPhiNorm, distance_to_subspace, support_maximize
from .seeding import stream_rng

__all__ = [
    "SCHEMA_VERSION",
    "SuiteReport",
    "SegmentProbeRecord",
    "SubspaceSpec",
    "lemma_a_suite",
    "segment_probe",
    "strict_convexity_probe",
    "proximinality_probe",
    "sphere_grid",
    "report_emit",
    "to_plain",
]

SCHEMA_VERSION = 1


def _digest(*arrays):
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]


def _summary(values):
    if not values:
        return {}
    v = np.asarray(values, dtype=float)
    return {"min": float(v.min()), "median": float(np.median(v))}


@dataclass
class SuiteReport:
    """Outcome of a randomized suite.

    ``checks`` counts evaluations per check id; ``failures`` lists
    ``(check_id, input_digest)`` pairs.  ``runtime`` is informational and
    is left out of emitted artifacts so that reports stay byte-stable.
    """

    name: str
    trials: int
    failures: list = field(default_factory=list)
    margins_summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    runtime: float = field(default=0.0, compare=False)

    @property
    def passed(self):
        return not self.failures

    def _check(self, check_id, ok, *inputs):
        self.checks[check_id] = self.checks.get(check_id, 0) + 1
        if not ok:
            self.failures.append((check_id, _digest(*inputs)))
        return ok

    def to_dict(self):
        return {
            "kind": "suite",
            "name": self.name,
            "trials": self.trials,
            "failures": [list(f) for f in self.failures],
            "margins_summary": dict(self.margins_summary),
            "checks": dict(self.checks),
            "diagnostics": self.diagnostics,
        }


@dataclass
class SegmentProbeRecord:
    """Everything measured along one segment of attaining functionals."""

    f: np.ndarray
    g: np.ndarray
    t_grid: list
    margins: list
    attain_x: np.ndarray
    attain_z: np.ndarray
    sep_functional: np.ndarray
    sep_delta: float
    mid_t: float
    p_mid: float
    chosen_m: int = None
    chosen_n: int = None
    xi_n: float = None
    zeta_n: float = None
    u_n: float = None
    interval_low: float = None
    n_threshold: float = None
    identity_residual: float = None
    coordinate_checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["kind"] = "segment"
        return out


@dataclass(frozen=True, eq=False)
class SubspaceSpec:
    """Finite-codimension subspace ``M`` of R^dim.

    Give either ``annihilators`` (``M`` is the intersection of their
    kernels) or ``spanning`` vectors of ``M`` together with ``dim``.
    """

    annihilators: np.ndarray = None
    spanning: np.ndarray = None
    dim: int = None

    def __post_init__(self):
        if (self.annihilators is None) == (self.spanning is None):
            raise ValueError("give exactly one of annihilators or spanning")
        if self.annihilators is not None:
            F = np.atleast_2d(np.asarray(self.annihilators, dtype=float))
            dim = F.shape[1] if self.dim is None else int(self.dim)
            if F.shape[1] != dim:
                raise ValueError(f"annihilators have dimension {F.shape[1]}, expected {dim}")
            if not is_independent(F):
                raise DependenceError("annihilators are linearly dependent")
            _, _, Vt = np.linalg.svd(F)
            B = Vt[F.shape[0]:]
        else:
            B = np.atleast_2d(np.asarray(self.spanning, dtype=float))
            if self.dim is None:
                raise ValueError("dim is required with a spanning set")
            dim = int(self.dim)
            if B.size and B.shape[1] != dim:
                raise ValueError(f"spanning vectors have dimension {B.shape[1]}, expected {dim}")
            if B.size and not is_independent(B):
                raise DependenceError("spanning vectors are linearly dependent")
            _, _, Vt = np.linalg.svd(B, full_matrices=True)
            F = Vt[B.shape[0]:]
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_F", F)
        object.__setattr__(self, "_B", B)

    @property
    def codim(self):
        return self._F.shape[0]

    @property
    def functionals(self):
        """Rows annihilating ``M``."""
        return self._F

    @property
    def basis(self):
        """Rows spanning ``M``."""
        return self._B

    def quotient_coords(self, x):
        return self._F @ as_coords(x, self.dim)

    def lift(self, q):
        """Minimal-l_2 representative of the coset with quotient coordinates ``q``."""
        return np.linalg.pinv(self._F) @ np.asarray(q, dtype=float)


# ---------------------------------------------------------------------------
# lemma A


def sphere_grid(dim, per_edge):
    """Unit-l_2 points from a cube-surface grid with ``per_edge`` nodes per edge."""
    ticks = np.linspace(-1.0, 1.0, per_edge)
    pts = []
    for axis in range(dim):
        for side in (-1.0, 1.0):
            mesh = np.meshgrid(*([ticks] * (dim - 1)), indexing="ij")
            face = np.stack([m.ravel() for m in mesh], axis=1) if dim > 1 else np.zeros((1, 0))
            P = np.insert(face, axis, side, axis=1)
            pts.append(P)
    P = np.unique(np.concatenate(pts), axis=0)
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def _sign_violations(x, f, phi, gauge):
    """Coordinates where the sign condition fails for the attaining pair (x, f)."""
    fn = np.abs(f).max()
    big = np.abs(x) > phi * gauge * (1 + 1e-9)
    bad = big & (np.abs(f - np.sign(x) * fn) > 1e-9 * max(fn, 1e-300))
    return np.flatnonzero(bad), int(big.sum())


def lemma_a_suite(phi, trials, seed, brute_force_dim=4, grid_edge=None):
    """Randomized checks of every part of the Phi-renorming lemma.

    Check ids: ``a.conic`` (closed-form dual versus a conic solve over the
    explicit Minkowski ball, relative 1e-8), ``a.brute`` (versus a
    discretized ball, relative 1e-3, only when ``dim <= brute_force_dim``),
    ``b.chain``, ``c.chain`` and ``c.duality`` (tolerance 1e-8), ``d.strict``
    (midpoint margin above 1e-6), ``e.attain`` and ``e.sign`` (sign
    condition on attaining pairs), ``iii.coord`` (``|f(n)| <= |f|*``).
    """
    if not isinstance(phi, PhiSequence):
        phi = PhiSequence(phi)
    trials = int(trials)
    if trials < 0:
        raise ValueError("trials must be non-negative")
    start = time.perf_counter()
    spec = SumNormSpec(phi)
    nm = SumPhiNorm(spec)
    w, mass, d = phi.weights, phi.l1_mass, spec.dim
    rep = SuiteReport("lemma-a", trials)
    rng = stream_rng(seed, "lemma_a")
    grid = None
    if trials and d <= brute_force_dim:
        grid = sphere_grid(d, grid_edge or {1: 2, 2: 4001, 3: 301, 4: 41}.get(d, 21))
    margins, sign_coords = [], 0
    for _ in range(trials):
        scale = 10.0 ** rng.uniform(-2, 2)
        f = rng.standard_normal(d) * scale
        x = rng.standard_normal(d) * scale
        g = rng.standard_normal(d)

        # (a) closed form against support maximization
        cf = dual_norm_phi(f, spec)
        sol = support_maximize(nm, f, method="conic")
        rep._check("a.conic", abs(sol.value - cf) <= 1e-8 * cf and nm.value(sol.witness) <= 1 + 1e-12, f, w)
        if grid is not None:
            brute = np.abs(f).max() + float(np.max(grid @ (w * f)))
            rep._check("a.brute", abs(brute - cf) <= 1e-3 * cf, f, w)

        # (b), (c) and duality consistency
        fi = np.abs(f).max()
        rep._check("b.chain", cf - fi >= -1e-8 * cf and fi - (1 - mass) * cf >= -1e-8 * cf, f, w)
        px, cert, _ = kernels.phi_gauge(x, w)
        l1 = np.abs(x).sum()
        rep._check("c.chain", l1 - px >= -1e-8 * l1 and (1 + mass) * px - l1 >= -1e-8 * l1, x, w)
        rep._check(
            "c.duality",
            abs(cert @ x - px) <= 1e-8 * px and abs(dual_norm_phi(cert, spec) - 1) <= 1e-8,
            x, w,
        )

        # (d) strict convexity of the dual norm
        fu, gu = f / cf, g / dual_norm_phi(g, spec)
        if is_independent([fu, gu]):
            margin = 1 - dual_norm_phi(0.5 * (fu + gu), spec)
            margins.append(margin)
            rep._check("d.strict", margin > 1e-6, fu, gu, w)

        # (e) sign condition on attaining pairs from both directions
        bad, k = _sign_violations(x, cert, w, px)
        sign_coords += k
        rep._check("e.sign", bad.size == 0, x, w)
        xs, _, _ = support_point_phi(f, spec)
        rep._check("e.attain", abs(f @ xs - cf) <= 1e-12 * cf and nm.value(xs) <= 1 + 1e-12, f, w)
        bad, k = _sign_violations(xs, fu, w, nm.value(xs))
        sign_coords += k
        rep._check("e.sign", bad.size == 0, f, w)
        rep._check("iii.coord", bool(np.all(np.abs(fu) <= 1 + 1e-12)), f, w)

    rep.margins_summary = _summary(margins)
    rep.diagnostics = {"dim": d, "l1_mass": mass, "sign_condition_coordinates": sign_coords}
    rep.runtime = time.perf_counter() - start
    return rep


# ---------------------------------------------------------------------------
# segment mechanism


def _require_smooth(space, what):
    if not space.base.smooth:
        raise ConfigError(f"{what} needs the smooth base norm", "base")


def _block_checks(space, x, W, label, tol, violations):
    """Sign/interval checks at every (m, n) where the coordinate condition holds."""
    count = 0
    for m in range(1, space.config.m_max + 1):
        y = r_m_apply(space, x, m)
        phi = space.phi_m[m - 1].weights
        gauge = kernels.phi_gauge(y, phi)[0]
        wm = W[m - 1]
        top = np.abs(wm).max()
        for n in np.flatnonzero(np.abs(y) > phi * gauge * (1 + 1e-9)):
            count += 1
            if abs(wm[n] - np.sign(y[n]) * top) > tol:
                violations.append(f"{label}.sign(m={m},n={n + 1})")
            if not (1 - 2.0 ** -m - tol <= top <= 1 + tol):
                violations.append(f"{label}.interval(m={m},n={n + 1})")
    return count


def segment_probe(space, f, g, t_grid=(0.25, 0.5, 0.75), mid_t=0.5, tol=DEFAULT_TOL):
    """Probe the segment between two attaining functionals of ``p``.

    ``f`` and ``g`` are rescaled to ``p``-dual norm one here.  The record
    holds the interior margins, the separating functional of the two
    attaining points, the first admissible grid position ``(m, n)``
    (if the truncated grid has one) with the decomposition coefficients
    there, and every mechanism violation found.
    """
    _require_smooth(space, "segment probe")
    f = as_coords(f, space.dim, "f")
    g = as_coords(g, space.dim, "g")
    if not is_independent([f, g]):
        raise DependenceError("f and g are linearly dependent")
    if not 0 < mid_t < 1:
        raise ValueError("mid_t must lie in (0, 1)")
    check_tol = 10 * tol
    rf, rg = p_dual(space, f, tol=tol), p_dual(space, g, tol=tol)
    f, g = f / rf.value, g / rg.value
    x, z = rf.witness, rg.witness
    violations = []

    margins = []
    for t in t_grid:
        t = float(t)
        if not 0 <= t <= 1:
            raise ValueError(f"t_grid values must lie in [0, 1], got {t}")
        if t in (0.0, 1.0):
            margins.append(0.0)
            continue
        mval = 1 - p_dual(space, t * f + (1 - t) * g, tol=tol).value
        margins.append(mval)
        if not mval > 0:
            violations.append(f"margin(t={t!r})")
    mid = mid_t * f + (1 - mid_t) * g
    rmid = p_dual(space, mid, tol=tol)
    p_mid = rmid.value
    u = rmid.witness

    # separating functional: norming functional of dist(x, R(x - z))
    dres = distance_to_subspace(x, [x - z], space.base_norm, tol=tol)
    phi = dres.dual
    if phi @ x < 0:
        phi = -phi
    sep_delta = float(min(phi @ x, phi @ z))

    x0, Xi = decompose_dual(space, f, x, f_dual=1.0)
    z0, Theta = decompose_dual(space, g, z, f_dual=1.0)
    u0, Ups = decompose_dual(space, mid / p_mid, u, f_dual=1.0)
    count = _block_checks(space, x, Xi, "xi", check_tol, violations)
    count += _block_checks(space, z, Theta, "zeta", check_tol, violations)
    count += _block_checks(space, u, Ups, "u", check_tol, violations)

    rec = SegmentProbeRecord(
        f=f, g=g, t_grid=[float(t) for t in t_grid], margins=margins, attain_x=x, attain_z=z,
        sep_functional=phi, sep_delta=sep_delta, mid_t=float(mid_t), p_mid=p_mid,
        coordinate_checks=count, violations=violations,
    )
    for m in range(1, space.config.m_max + 1):
        if 1 / m < sep_delta and p_mid < 1 - 2.0 ** -m:
            break
    else:
        return rec
    rec.chosen_m = m
    rec.interval_low = 1 - 2.0 ** -m
    # any threshold strictly between 1/m and sep_delta works; sep_delta itself
    # is generically unreachable since it is the largest such value
    thr = 0.5 * (1 / m + sep_delta)
    rec.n_threshold = thr
    for n in range(1, space.config.n_max + 1):
        v = space.v(n, m)
        nv = space.v_dual_norms[m - 1, n - 1]
        if v @ x > thr * nv and v @ z > thr * nv:
            break
    else:
        return rec
    rec.chosen_n = n
    phi_mn = space.phi_m[m - 1].weights[n - 1]
    rx, rz = r_m_apply(space, x, m)[n - 1], r_m_apply(space, z, m)[n - 1]
    gx = kernels.phi_gauge(r_m_apply(space, x, m), space.phi_m[m - 1].weights)[0]
    gz = kernels.phi_gauge(r_m_apply(space, z, m), space.phi_m[m - 1].weights)[0]
    if not (rx > phi_mn * gx and rz > phi_mn * gz):
        violations.append(f"coordinate-condition(m={m},n={n})")
        return rec
    rec.xi_n = float(Xi[m - 1, n - 1])
    rec.zeta_n = float(Theta[m - 1, n - 1])
    rec.u_n = float(Ups[m - 1, n - 1])
    lhs = mid_t * rec.xi_n + (1 - mid_t) * rec.zeta_n
    rhs = p_mid * rec.u_n
    rec.identity_residual = abs(lhs - rhs)
    low = rec.interval_low
    for name, val, W in (("xi", rec.xi_n, Xi), ("zeta", rec.zeta_n, Theta)):
        if not (low - check_tol <= val <= 1 + check_tol):
            violations.append(f"{name}-interval")
        if abs(val - np.abs(W[m - 1]).max()) > check_tol:
            violations.append(f"{name}-sup")
    if not abs(rhs) < low + check_tol:
        violations.append("separation-rhs")
    if not lhs >= low - check_tol:
        violations.append("separation-lhs")
    if not rec.identity_residual >= (lhs - abs(rhs)) - check_tol:
        violations.append("identity-residual")
    return rec


# ---------------------------------------------------------------------------
# strict convexity and proximinality


def strict_convexity_probe(space, trials, seed, margin_floor=1e-8, colinear_tol=1e-10):
    """Triangle inequality strictness for random independent pairs, equality for colinear ones."""
    _require_smooth(space, "strict convexity probe")
    trials = int(trials)
    if trials < 0:
        raise ValueError("trials must be non-negative")
    start = time.perf_counter()
    rep = SuiteReport("convexity", trials)
    rng = stream_rng(seed, "convexity")
    norm = space.norm
    margins = []
    for _ in range(trials):
        x = rng.standard_normal(space.dim)
        z = rng.standard_normal(space.dim)
        x, z = x / norm.value(x), z / norm.value(z)
        if is_independent([x, z]):
            margin = 2 - norm.value(x + z)
            margins.append(margin)
            rep._check("strict", margin > margin_floor, x, z)
        c = rng.uniform(0.1, 10.0)
        lhs, rhs = norm.value(x + c * x), norm.value(x) + norm.value(c * x)
        rep._check("colinear", abs(lhs - rhs) <= colinear_tol * rhs, x)
    rep.margins_summary = _summary(margins)
    rep.runtime = time.perf_counter() - start
    return rep


def _localization(space, r):
    """Where along the index ``n`` the coordinates ``A_m r`` carry mass."""
    a = sum(np.abs(Am @ r) for Am in space.A)
    l1 = a.sum()
    half = a.size // 2
    return {
        "tail_mass": float(a[half:].sum() / l1),
        "participation": float(l1 ** 2 / (a.size * (a @ a))),
        "peak": int(np.argmax(a)) + 1,
    }


def proximinality_probe(space, M, samples, seed, points=None, tol=DEFAULT_TOL, lift_tol=1e-6):
    """Distances to a codimension-two subspace under ``p`` and the lifting identity.

    Points are either given (``points``) or sampled as minimal-l_2
    representatives of ``(cos theta, sin theta)`` in the quotient
    coordinates of ``M``.  For each point ``x`` with nearest point ``m*``,
    the normalized remainder ``(x - m*)/p(x - m*)`` must have distance one
    to ``M`` (checked by a fresh solve).  Diagnostics record distances and
    localization statistics of the remainders.
    """
    if not isinstance(M, SubspaceSpec):
        raise TypeError("M must be a SubspaceSpec")
    if M.codim != 2:
        raise ConfigError(f"proximinality probe needs codimension 2, got {M.codim}", "annihilators")
    if M.dim != space.dim:
        raise ConfigError(f"subspace lives in dimension {M.dim}, space has {space.dim}", "annihilators")
    samples = int(samples)
    if samples < 1 and points is None:
        raise ValueError("samples must be at least 1")
    start = time.perf_counter()
    norm = space.norm
    if points is None:
        rng = stream_rng(seed, "proximinality")
        thetas = rng.uniform(0, 2 * np.pi, samples)
        points = [M.lift((np.cos(th), np.sin(th))) for th in thetas]
    points = [as_coords(p, space.dim) for p in points]
    rep = SuiteReport("proximinality", len(points))
    rows, dists = [], []
    for x in points:
        res = distance_to_subspace(x, M.basis, norm, tol=tol)
        mstar = res.witness
        inside = np.abs(M.functionals @ mstar).max() <= 1e-9 * max(1.0, np.abs(mstar).max())
        rep._check("witness-in-M", inside, x)
        q = M.quotient_coords(x)
        in_M = np.abs(q).max() <= 1e-12 * max(1.0, np.abs(x).max())
        if in_M:
            rep._check("zero-distance", res.value <= 1e-8 * max(1.0, norm.value(x)), x)
            rows.append({"distance": res.value, "in_M": True})
            continue
        rep._check("positive-distance", res.value > 0, x)
        r = x - mstar
        pr = norm.value(r)
        again = distance_to_subspace(r / pr, M.basis, norm, tol=tol)
        lift_err = abs(again.value - 1)
        rep._check("lifting", lift_err <= lift_tol, x)
        dists.append(res.value)
        row = {
            "distance": res.value,
            "gap": res.residual,
            "lifting_error": lift_err,
            "pinv_excess": norm.value(x) / res.value - 1,
            "in_M": False,
        }
        row.update(_localization(space, r))
        rows.append(row)
    rep.margins_summary = _summary(dists)
    tails = [r["tail_mass"] for r in rows if "tail_mass" in r]
    rep.diagnostics = {
        "n_max": space.config.n_max,
        "samples": rows,
        "mean_tail_mass": float(np.mean(tails)) if tails else None,
    }
    rep.runtime = time.perf_counter() - start
    return rep


# ---------------------------------------------------------------------------
# reports


def to_plain(obj):
    """Recursively convert records, arrays and numpy scalars to plain Python."""
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if is_dataclass(obj):
        return to_plain({f.name: getattr(obj, f.name) for f in fields(obj)})
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def _json(obj, indent=0):
    """JSON text with sorted keys and 17-significant-digit floats."""
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{_escape(k)}": {_json(obj[k], indent + 2)}' for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 2) for v in obj) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    return f'"{_escape(str(obj))}"'


def _escape(s):
    return json.dumps(s)[1:-1]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, list):
        return ";".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return ";".join(f"{k}={_cell(v[k])}" for k in sorted(v))
    return str(v)


def report_emit(records, path, format="structured", allow_empty=False, meta=None):
    """Write records to ``path`` deterministically.

    ``format="structured"`` writes one JSON document (sorted keys, floats
    with 17 significant digits, a ``schema_version`` field);
    ``format="rows"`` writes comma-separated rows, one per record, with a
    header line.  Identical inputs give byte-identical files.
    """
    if format not in ("structured", "rows"):
        raise ValueError(f"format must be 'structured' or 'rows', got {format!r}")
    records = [to_plain(r) for r in records]
    if not records and not allow_empty:
        raise ValueError("no records to emit (pass allow_empty=True for a header-only artifact)")
    if format == "structured":
        doc = {"schema_version": SCHEMA_VERSION, "records": records}
        if meta:
            doc["meta"] = to_plain(meta)
        text = _json(doc) + "\n"
    else:
        keys = sorted({k for r in records for k in r}) if records else ["kind"]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for r in records:
            writer.writerow([_cell(r.get(k)) for k in keys])
        text = buf.getvalue()
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc
    return path
