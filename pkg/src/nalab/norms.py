"""Concrete norm families.

* ``|.|_phi`` on l_1 whose unit ball is ``B_l1 + S_phi(B_l2)``, where
  ``S_phi`` is the diagonal operator ``a -> phi * a``.  Its dual norm has
  the closed form ``||f||_inf + ||phi * f||_2``.
* The base norm on the truncation of c_0: either the plain sup norm or a
  smooth renorming whose unit ball is ``B_linf + D(B_l2)``, i.e. whose
  dual norm is ``||f||_1 + ||D f||_2``.  A strictly convex dual makes the
  primal norm smooth.
* The l_1-sum ``W`` of finitely many ``|.|_phi`` blocks.

Primal gauges are evaluated on the dual side by the exact kernels in
:mod:`nalab.kernels`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError
from .linalg import as_coords

__all__ = [
    "PhiSequence",
    "SumNormSpec",
    "SmoothBaseNormSpec",
    "dual_norm_phi",
    "primal_norm_phi",
    "support_point_phi",
    "base_norm",
    "base_dual_norm",
    "base_support_point",
    "w_norm",
    "w_dual_norm",
]


@dataclass(frozen=True)
class PhiSequence:
    """Positive weights with l_1 mass strictly below one."""

    weights: np.ndarray
    l1_mass: float = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("phi weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("phi weights must be finite and strictly positive")
        mass = float(np.sum(w))
        if not mass < 1.0:
            raise ValueError(f"phi must have l1 mass < 1, got {mass!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "l1_mass", mass)

    @classmethod
    def dyadic(cls, dim, shift=1):
        """``phi(n) = 2**-(n + shift)`` for ``n = 1..dim``."""
        return cls(2.0 ** -(np.arange(1, dim + 1) + shift))

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True)
class SumNormSpec:
    phi: PhiSequence

    @property
    def dim(self):
        return len(self.phi)


@dataclass(frozen=True)
class SmoothBaseNormSpec:
    """Base norm on R^dim.

    ``mode="plain"`` is the sup norm.  ``mode="smooth"`` is the gauge of
    ``B_linf + diag(smoothing_weights) B_l2``; the weights default to
    ``0.1 / n``.
    """

    mode: str
    dim: int
    smoothing_weights: np.ndarray = None

    def __post_init__(self):
        if self.mode not in ("plain", "smooth"):
            raise ValueError(f"base mode must be 'plain' or 'smooth', got {self.mode!r}")
        if int(self.dim) < 1:
            raise ValueError("base dimension must be positive")
        object.__setattr__(self, "dim", int(self.dim))
        if self.mode == "smooth":
            w = self.smoothing_weights
            if w is None:
                w = 0.1 / np.arange(1, self.dim + 1)
            w = np.array(w, dtype=float)
            if w.shape != (self.dim,):
                raise DimensionError(
                    f"smoothing_weights has shape {w.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("smoothing weights must be finite and strictly positive")
            w.setflags(write=False)
            object.__setattr__(self, "smoothing_weights", w)
        else:
            object.__setattr__(self, "smoothing_weights", None)

    @property
    def smooth(self):
        return self.mode == "smooth"


def dual_norm_phi(f, spec):
    """``||f||_inf + ||phi * f||_2``."""
    f = as_coords(f, spec.dim, "f")
    return float(np.abs(f).max() + np.linalg.norm(spec.phi.weights * f))


def primal_norm_phi(x, spec):
    """Gauge of ``B_l1 + S_phi(B_l2)`` at ``x``."""
    x = as_coords(x, spec.dim)
    return kernels.phi_gauge(x, spec.phi.weights)[0]


def support_point_phi(f, spec):
    """Point ``x = x0 + phi*a0`` of the unit sphere at which ``f`` attains.

    ``x0 = sign(f[n0]) e_{n0}`` with ``n0`` the first index where
    ``|f|`` is maximal and ``a0 = phi*f / ||phi*f||_2``.
    """
    f = as_coords(f, spec.dim, "f")
    if not np.any(f):
        raise ValueError("support point of the zero functional is undefined")
    phi = spec.phi.weights
    n0 = int(np.argmax(np.abs(f)))
    x0 = np.zeros_like(f)
    x0[n0] = np.sign(f[n0])
    pf = phi * f
    a0 = pf / np.linalg.norm(pf)
    return x0 + phi * a0, x0, a0


def base_norm(x, spec):
    """Base norm: sup norm (plain) or the smooth box-plus-ellipsoid gauge."""
    x = as_coords(x, spec.dim)
    if spec.mode == "plain":
        return float(np.abs(x).max())
    return kernels.box_gauge(x, spec.smoothing_weights)[0]


def base_dual_norm(f, spec):
    """``||f||_1`` (plain) or ``||f||_1 + ||D f||_2`` (smooth)."""
    f = as_coords(f, spec.dim, "f")
    val = np.abs(f).sum()
    if spec.mode == "smooth":
        val += np.linalg.norm(spec.smoothing_weights * f)
    return float(val)


def base_support_point(f, spec):
    """A point of the base unit ball at which ``f`` attains its dual norm."""
    f = as_coords(f, spec.dim, "f")
    x = np.sign(f)
    if spec.mode == "smooth" and np.any(f):
        df = spec.smoothing_weights * f
        x = x + spec.smoothing_weights * df / np.linalg.norm(df)
    return x


def _blocks(z, specs):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if z.shape[0] != len(specs):
        raise DimensionError(f"{z.shape[0]} blocks but {len(specs)} norm specs")
    for m, spec in enumerate(specs):
        if z.shape[1] != spec.dim:
            raise DimensionError(f"block {m + 1} has dimension {z.shape[1]}, expected {spec.dim}")
    return z


def w_norm(z, specs):
    """l_1-sum ``sum_m |z_m|_m`` of a block vector (rows are blocks)."""
    z = _blocks(z, specs)
    return float(sum(kernels.phi_gauge(z[m], s.phi.weights)[0] for m, s in enumerate(specs)))


def w_dual_norm(zstar, specs):
    """Dual of the l_1-sum: the largest blockwise dual norm."""
    zstar = _blocks(zstar, specs)
    return max(dual_norm_phi(zstar[m], s) for m, s in enumerate(specs))
