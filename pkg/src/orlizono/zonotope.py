"""Asymmetric Orlicz zonotopes.

The support function of ``Z = Z_phi^+ Lambda`` at ``u`` is the Orlicz norm
of the positive parts ``<v_i, u>_+`` (one entry per copy of ``v_i``).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import multisets as ms
from .multisets import VectorMultiset
from .norm import orlicz_norm, orlicz_norm_many
from .phi import OrliczFunction, identity, make_phi

MAX_SUBSETS = 200_000
FD_STEP = 1e-6
ROUNDOFF = 1e-12


class ZeroSupport(ValueError):
    pass


class NotSpanning(ValueError):
    pass


class L1VolumeFallback(UserWarning):
    """Subset enumeration was too large; the volume is a Monte Carlo estimate."""


@dataclass(frozen=True, eq=False)
class OrliczZonotope:
    lam: VectorMultiset
    phi: OrliczFunction

    def __post_init__(self):
        object.__setattr__(self, "phi", make_phi(self.phi))
        if not ms.is_spanning(self.lam):
            raise NotSpanning("the generating multiset must span R^n")
        gens = self.lam.normalize().expanded()
        gens.setflags(write=False)
        object.__setattr__(self, "_gens", gens)

    @property
    def dimension(self) -> int:
        return self.lam.dimension

    @property
    def generators(self) -> np.ndarray:
        return self._gens

    def support(self, u):
        """Support value at ``u`` (``(n,)``) or at each row of ``u`` (``(k, n)``)."""
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            return orlicz_norm(np.maximum(self._gens @ u, 0.0), self.phi)
        return orlicz_norm_many(np.maximum(u @ self._gens.T, 0.0), self.phi)

    def support_point(self, u, method: str = "analytic"):
        """A boundary point ``x`` with ``<x, u> = h(u)``.

        ``analytic`` differentiates the norm equation implicitly; ``fd``
        takes central differences of ``h`` with step 1e-6.
        """
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        U = u[None, :] if single else u
        if method == "fd":
            X = fd_support_points(self.support, U)
        else:
            X = self._analytic_points(U)
        if np.any(np.isnan(X)):
            raise ZeroSupport("h(u) = 0: the body is flat at the origin in this direction")
        return X[0] if single else X

    def _analytic_points(self, U: np.ndarray) -> np.ndarray:
        """Gradient of h from the implicit equation ``sum phi(f_i / h) = 1``.

        Any subgradient of phi gives a point of the supporting face.
        """
        F = np.maximum(U @ self._gens.T, 0.0)
        # products at roundoff level are zeros; keeping them makes the rescale
        # below a ratio of two rounding errors at directions normal to a generator
        lengths = np.linalg.norm(self._gens, axis=1)[None, :] * np.linalg.norm(U, axis=1)[:, None]
        F[F <= ROUNDOFF * lengths] = 0.0
        H = orlicz_norm_many(F, self.phi)
        X = np.full(U.shape, np.nan)
        ok = H > 0
        if np.any(ok):
            arg = F[ok] / H[ok, None]
            w = np.where(F[ok] > 0, self.phi.derivative(arg), 0.0)
            G = w @ self._gens
            scale = H[ok] / np.einsum("ij,ij->i", G, U[ok])
            X[ok] = G * scale[:, None]
        return X

    def critical_directions(self) -> np.ndarray:
        """Unit normals of hyperplanes spanned by n-1 generators, both signs.

        Flat faces of the body can only have these normals, so adding them
        to a direction set makes polyhedral parts exact.
        """
        return critical_directions(self._gens)

    def oracle(self):
        from .body import SupportOracle

        def points(U):
            # the origin lies in every Z_phi^+ and supports it wherever h = 0
            return np.nan_to_num(self._analytic_points(np.atleast_2d(U)), nan=0.0)

        return SupportOracle(
            dimension=self.dimension,
            h=self.support,
            point=points,
            critical=self.critical_directions(),
            label=f"Z[{self.phi.label}]",
        )


def support(z: OrliczZonotope, u):
    return z.support(u)


def support_point(z: OrliczZonotope, u, method: str = "analytic"):
    return z.support_point(u, method=method)


def fd_support_points(h, U: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradients of a 1-homogeneous ``h``, projected so that
    ``<x, u> = h(u)``. Rows with ``h(u) = 0`` come back as NaN."""
    U = np.asarray(U, dtype=float)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    k, n = U.shape
    H = np.asarray(h(U), dtype=float)
    G = np.empty((k, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        G[:, i] = (np.asarray(h(U + e)) - np.asarray(h(U - e))) / (2 * step)
    G += (H - np.einsum("ij,ij->i", G, U))[:, None] * U
    G[H <= 0] = np.nan
    return G


def critical_directions(gens: np.ndarray) -> np.ndarray:
    gens = np.asarray(gens, dtype=float)
    n = gens.shape[1]
    dirs = [np.eye(n), -np.eye(n)]
    uniq = np.unique(gens / np.linalg.norm(gens, axis=1, keepdims=True), axis=0)
    for combo in itertools.combinations(range(len(uniq)), n - 1):
        A = uniq[list(combo)]
        if n == 2:
            nv = np.array([-A[0, 1], A[0, 0]])
        elif n == 3:
            nv = np.cross(A[0], A[1])
        else:
            _, s, vt = np.linalg.svd(A)
            nv = vt[-1]
            if s[-1] < 1e-12:
                continue
        norm = np.linalg.norm(nv)
        if norm < 1e-12:
            continue
        nv = nv / norm
        dirs.append(np.vstack([nv, -nv]))
    return np.vstack(dirs)


def l1_volume(m: VectorMultiset, samples: int = 200_000, seed: int = 0) -> float:
    """Volume of the L1 zonotope: sum of ``|det|`` over all n-subsets."""
    vecs = m.normalize().expanded()
    n = m.dimension
    if len(vecs) < n or not ms.is_spanning(m.normalize()):
        return 0.0
    count = math.comb(len(vecs), n)
    if count > MAX_SUBSETS:
        warnings.warn(
            f"{count} subsets exceed {MAX_SUBSETS}; using a Monte Carlo estimate",
            L1VolumeFallback,
            stacklevel=2,
        )
        from .body import monte_carlo_volume

        z = OrliczZonotope(m, identity())
        return monte_carlo_volume(z.oracle(), samples=samples, seed=seed)[0]
    idx = np.array(list(itertools.combinations(range(len(vecs)), n)))
    dets = np.linalg.det(vecs[idx])
    return float(np.abs(dets).sum())


def symmetrize(m: VectorMultiset) -> VectorMultiset:
    """``Lambda`` united with ``-Lambda``; generates the symmetric zonotope."""
    neg = VectorMultiset(-m.vectors, m.multiplicities)
    return ms.combine(m, neg, "union")
