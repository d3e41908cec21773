"""Finite-difference gradient oracle, independent of the autodiff path.

Only forward evaluations are used: central differences with eps=1e-3 on a
64-bit shadow copy of the parameters. The comparison metric is
``max|a - n| / max(1, max|n|)`` so the 1e-4 bound is relative for large
gradients and a 1e-4 absolute bound for small ones, comfortably above the
~1e-6 truncation noise of central differences at this eps.
"""

from __future__ import annotations

import numpy as np

from frozenclf.tensor import Tensor


def to_float64(tensors: list[Tensor]) -> None:
    for t in tensors:
        t.data = t.data.astype(np.float64)


def _scalar(value) -> float:
    if isinstance(value, Tensor):
        return float(value.data)
    return float(value)


def numeric_gradient(f, params: list[Tensor], eps: float = 1e-3) -> list[np.ndarray]:
    """Central-difference gradients of the scalar ``f()`` w.r.t. each param."""
    grads = []
    for p in params:
        g = np.zeros(p.data.shape, dtype=np.float64)
        flat_p = p.data.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            f_plus = _scalar(f())
            flat_p[i] = orig - eps
            f_minus = _scalar(f())
            flat_p[i] = orig
            flat_g[i] = (f_plus - f_minus) / (2.0 * eps)
        grads.append(g)
    return grads


def rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64)
    scale = max(1.0, float(np.abs(numeric).max(initial=0.0)))
    return float(np.abs(analytic - numeric).max(initial=0.0)) / scale
