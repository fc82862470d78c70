"""Hot time-stepping loops, compiled when available.

The Cython extension ``_core`` is used when it was built at install time;
otherwise the numpy versions in ``_fallback`` are used. Setting the
environment variable ``CONVARB_PURE_PYTHON=1`` forces the fallback.

All kernels accept 1-D (single path) or 2-D ``(n_paths, n_steps)`` inputs.
"""

import os

import numpy as np

from . import _fallback

_compiled = None
if os.environ.get("CONVARB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

__all__ = ["BACKEND", "backend", "ou_euler", "kalman_bucy", "absorb_scan", "doleans"]


def backend(name=None):
    """Return the kernel module for ``name`` ('cython', 'python' or the active one)."""
    if name is None:
        return _compiled if _compiled is not None else _fallback
    if name == "python":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def _as2d(a):
    a = np.ascontiguousarray(a, dtype=float)
    return (a[None, :], True) if a.ndim == 1 else (a, False)


def ou_euler(initial, coeff, dt, dW, impl=None):
    dW2, single = _as2d(dW)
    out = backend(impl).ou_euler(np.asarray(initial, dtype=float), float(coeff),
                                 np.ascontiguousarray(dt, dtype=float), dW2)
    return out[0] if single else out


def kalman_bucy(x, dW_obs, gain, dt, y0, impl=None):
    dW2, single = _as2d(dW_obs)
    x2, _ = _as2d(x)
    yhat, innov = backend(impl).kalman_bucy(x2, dW2, np.ascontiguousarray(gain, dtype=float),
                                            np.ascontiguousarray(dt, dtype=float), float(y0))
    return (yhat[0], innov[0]) if single else (yhat, innov)


def absorb_scan(x0, y0, dX, dY, impl=None):
    dX2, single = _as2d(dX)
    dY2, _ = _as2d(dY)
    out = backend(impl).absorb_scan(np.asarray(x0, dtype=float), np.asarray(y0, dtype=float), dX2, dY2)
    return out[0] if single else out


def doleans(cont, qv, jumps, impl=None):
    c2, single = _as2d(cont)
    q2, _ = _as2d(qv)
    j2, _ = _as2d(jumps)
    out = backend(impl).doleans(c2, q2, j2)
    return out[0] if single else out
