"""Backend selection for the gauge kernels.

The compiled extension ``nalab._ckernels`` is used when it imports; the
numpy module ``nalab._kernels_py`` is used otherwise, or always when the
environment variable ``NALAB_PURE_PYTHON`` is set to a non-empty value
other than ``0``.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("NALAB_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_py:
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

phi_gauge = _impl.phi_gauge
box_gauge = _impl.box_gauge
phi_gauge_many = _impl.phi_gauge_many
box_gauge_many = _impl.box_gauge_many


def backends():
    """Mapping of every importable backend name to its module."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
