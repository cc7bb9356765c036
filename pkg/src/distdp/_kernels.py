"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The single hot loop of the whole engine is the mixture-CDF evaluation

    out[q] = sum_t tw[t] * sum_j zw[j] * F_t(queries[q] - gamma * z[j]),

where t ranges over the reachable transitions of a state and j over the
particles of the successor-state return approximation.  Reward CDFs F_t are
encoded by a family code plus parameters so the inner loop stays allocation
free.

Backend selection: environment variable DISTDP_BACKEND in {auto, numba,
numpy}; "auto" (the default) uses numba when it imports, else numpy.
"""

from __future__ import annotations

import math
import os

import numpy as np

# family codes shared by both backends and the pack builder in bellman.py
DIRAC, FINITE, NORMAL, CAUCHY, UNIFORM, EXPONENTIAL = 0, 1, 2, 3, 4, 5

_SQRT2 = math.sqrt(2.0)


def _resolve_backend() -> str:
    choice = os.environ.get("DISTDP_BACKEND", "auto").lower()
    if choice == "numpy":
        return "numpy"
    if choice not in ("auto", "numba"):
        raise ValueError(f"DISTDP_BACKEND must be auto, numba or numpy, got {choice!r}")
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


ACTIVE_BACKEND = _resolve_backend()


# ---------------------------------------------------------------------------
# numpy backend

def _family_cdf_numpy(kind, p0, p1, ax, ac, x):
    """Vectorized reward CDF for one transition; mirrors distributions.py."""
    if kind == DIRAC:
        return (x >= p0).astype(float)
    if kind == FINITE:
        idx = np.searchsorted(ax, x, side="right")
        out = np.where(idx == 0, 0.0, ac[np.maximum(idx, 1) - 1])
        return out
    if kind == NORMAL:
        from scipy.special import ndtr

        return ndtr((x - p0) / p1)
    if kind == CAUCHY:
        t = (x - p0) / p1
        out = np.full(t.shape, 0.5)
        pos = t > 0
        neg = t < 0
        out[pos] = 1.0 - np.arctan(1.0 / t[pos]) / math.pi
        out[neg] = np.arctan(-1.0 / t[neg]) / math.pi
        return out
    if kind == UNIFORM:
        return np.clip((x - p0) / (p1 - p0), 0.0, 1.0)
    if kind == EXPONENTIAL:
        return np.where(x < 0.0, 0.0, -np.expm1(-p0 * np.maximum(x, 0.0)))
    raise ValueError(f"unknown family code {kind}")


def _mixture_cdf_numpy(queries, gamma, tw, kind, p0, p1, aoff, ax, ac, zoff, z, zw,
                       chunk: int = 256):
    out = np.zeros(queries.size)
    for t in range(tw.size):
        atoms_x = ax[aoff[t]:aoff[t + 1]]
        atoms_c = ac[aoff[t]:aoff[t + 1]]
        zs = z[zoff[t]:zoff[t + 1]]
        zws = zw[zoff[t]:zoff[t + 1]]
        for lo in range(0, zs.size, chunk):
            zc = zs[lo:lo + chunk]
            wc = zws[lo:lo + chunk]
            shifted = queries[None, :] - gamma * zc[:, None]
            vals = _family_cdf_numpy(kind[t], p0[t], p1[t], atoms_x, atoms_c, shifted)
            out += tw[t] * (wc @ vals)
    return out


# ---------------------------------------------------------------------------
# numba backend

if ACTIVE_BACKEND == "numba":
    from numba import njit

    @njit(cache=True, nogil=True)
    def _cdf_scalar(kind, p0, p1, ax, ac, a0, a1, x):
        if kind == 0:  # dirac
            return 1.0 if x >= p0 else 0.0
        if kind == 1:  # finite
            idx = np.searchsorted(ax[a0:a1], x, side="right")
            if idx == 0:
                return 0.0
            return ac[a0 + idx - 1]
        if kind == 2:  # normal
            return 0.5 * math.erfc(-(x - p0) / (p1 * _SQRT2))
        if kind == 3:  # cauchy
            t = (x - p0) / p1
            if t > 0.0:
                return 1.0 - math.atan(1.0 / t) / math.pi
            if t < 0.0:
                return math.atan(-1.0 / t) / math.pi
            return 0.5
        if kind == 4:  # uniform
            if x <= p0:
                return 0.0
            if x >= p1:
                return 1.0
            return (x - p0) / (p1 - p0)
        # exponential
        if x < 0.0:
            return 0.0
        return -math.expm1(-p0 * x)

    @njit(cache=True, nogil=True)
    def _mixture_cdf_numba(queries, gamma, tw, kind, p0, p1, aoff, ax, ac, zoff, z, zw):
        out = np.zeros(queries.size)
        for t in range(tw.size):
            k = kind[t]
            q0 = p0[t]
            q1 = p1[t]
            a0 = aoff[t]
            a1 = aoff[t + 1]
            for j in range(zoff[t], zoff[t + 1]):
                shift = gamma * z[j]
                wj = tw[t] * zw[j]
                for q in range(queries.size):
                    out[q] += wj * _cdf_scalar(k, q0, q1, ax, ac, a0, a1, queries[q] - shift)
        return out


def mixture_cdf(queries, gamma, tw, kind, p0, p1, aoff, ax, ac, zoff, z, zw,
                backend: str | None = None) -> np.ndarray:
    """Evaluate the transition-mixture CDF at the given query points."""
    queries = np.ascontiguousarray(queries, dtype=float)
    if queries.size == 0:
        return np.zeros(0)
    which = ACTIVE_BACKEND if backend is None else backend
    if which == "numba":
        return _mixture_cdf_numba(queries, gamma, tw, kind, p0, p1, aoff, ax, ac, zoff, z, zw)
    return _mixture_cdf_numpy(queries, gamma, tw, kind, p0, p1, aoff, ax, ac, zoff, z, zw)
