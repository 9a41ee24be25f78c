"""Orlicz (Luxemburg-type) norm of a nonnegative vector.

For ``f >= 0`` and an Orlicz function ``phi`` the norm is the unique
``lam > 0`` with ``sum_i phi(f_i / lam) = 1`` (zero when ``f = 0``).
The root lies in ``[max f, sum f]``: at ``max f`` one term is already
``phi(1) = 1``, and at ``sum f`` every argument is at most one, where
``phi(t) <= t``.
"""

from __future__ import annotations

import numpy as np

from .phi import OrliczFunction

MAX_ITER = 60
RTOL = 1e-12


class NegativeInput(ValueError):
    pass


def orlicz_norm(f, phi: OrliczFunction) -> float:
    """Norm of a single nonnegative vector (bisection on ``[max f, sum f]``)."""
    vals = [float(x) for x in np.ravel(f)]
    if any(x < 0 for x in vals):
        raise NegativeInput("orlicz_norm needs a nonnegative vector")
    pos = [x for x in vals if x > 0]
    if not pos:
        return 0.0
    lo, hi = max(pos), sum(pos)
    if len(pos) == 1 or hi <= lo:
        return lo
    ev = phi.scalar
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        s = 0.0
        for x in pos:
            s += ev(x / mid)
        if s > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= RTOL * lo:
            break
    return 0.5 * (lo + hi)


def orlicz_norm_many(F, phi: OrliczFunction) -> np.ndarray:
    """Row-wise norms of a ``(k, m)`` nonnegative array."""
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[None, :]
    if np.any(F < 0):
        raise NegativeInput("orlicz_norm_many needs a nonnegative array")
    lo = F.max(axis=1)
    hi = F.sum(axis=1)
    out = lo.copy()
    active = (hi > lo) & ((F > 0).sum(axis=1) > 1)
    if not np.any(active):
        return out
    Fa, lo_a, hi_a = F[active], lo[active], hi[active]
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo_a + hi_a)
        s = phi._eval_array(Fa / mid[:, None]).sum(axis=1)
        big = s > 1.0
        lo_a = np.where(big, mid, lo_a)
        hi_a = np.where(big, hi_a, mid)
        if np.all(hi_a - lo_a <= RTOL * lo_a):
            break
    out[active] = 0.5 * (lo_a + hi_a)
    return out


def luxemburg_sum(f, phi: OrliczFunction, lam: float) -> float:
    """``sum_i phi(f_i / lam)``; the quantity whose level set defines the norm."""
    f = np.asarray(f, dtype=float)
    return float(phi._eval_array(f / lam).sum())
