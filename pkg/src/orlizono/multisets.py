"""Finite multisets of vectors in R^n.

A multiset is stored through its multiplicity function: distinct vectors
(in first-appearance order) plus a positive integer count for each.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PARALLEL_TOL = 1e-10
OBTUSE_TOL = 1e-10
RANK_RTOL = 1e-10
SINGULAR_TOL = 1e-10


class MultisetError(ValueError):
    pass


class DimensionMismatch(MultisetError):
    pass


class SingularMatrix(MultisetError):
    pass


class NotObtuse(MultisetError):
    pass


class NotABasis(MultisetError):
    pass


@dataclass(frozen=True, eq=False)
class VectorMultiset:
    vectors: np.ndarray  # (k, n) distinct entries
    multiplicities: np.ndarray  # (k,) positive ints

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=float, copy=True)
        mult = np.array(self.multiplicities, dtype=int, copy=True)
        if vecs.ndim != 2:
            raise MultisetError("vectors must be a 2-d array")
        if mult.shape != (vecs.shape[0],):
            raise MultisetError("one multiplicity per vector is required")
        if np.any(mult < 1):
            raise MultisetError("multiplicities must be positive integers")
        vecs.setflags(write=False)
        mult.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_vectors(cls, vectors, multiplicities=None, dimension=None, drop_zero=False):
        """Collect a list of vectors, merging exact duplicates."""
        vecs = np.asarray(vectors, dtype=float)
        if vecs.size == 0:
            if dimension is None:
                raise MultisetError("dimension is required for an empty multiset")
            return cls(np.zeros((0, dimension)), np.zeros(0, dtype=int))
        if vecs.ndim == 1:
            vecs = vecs[:, None] if dimension == 1 else vecs[None, :]
        if dimension is not None and vecs.shape[1] != dimension:
            raise DimensionMismatch(f"expected dimension {dimension}, got {vecs.shape[1]}")
        mult = np.ones(len(vecs), dtype=int) if multiplicities is None else np.asarray(multiplicities)
        counts: dict[tuple, int] = {}
        for v, k in zip(vecs, mult):
            if drop_zero and not np.any(v):
                continue
            key = tuple(float(x) + 0.0 for x in v)  # + 0.0 folds -0.0 into 0.0
            counts[key] = counts.get(key, 0) + int(k)
        counts = {key: c for key, c in counts.items() if c > 0}
        n = vecs.shape[1]
        if not counts:
            return cls(np.zeros((0, n)), np.zeros(0, dtype=int))
        return cls(np.array(list(counts.keys())), np.array(list(counts.values())))

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    @property
    def cardinality(self) -> int:
        return int(self.multiplicities.sum())

    def __len__(self):
        return len(self.vectors)

    def expanded(self) -> np.ndarray:
        """All vectors, each repeated according to its multiplicity."""
        return np.repeat(self.vectors, self.multiplicities, axis=0)

    def normalize(self) -> "VectorMultiset":
        """Drop zero vectors."""
        keep = np.any(self.vectors != 0, axis=1)
        return VectorMultiset(self.vectors[keep], self.multiplicities[keep])

    def as_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "vectors": self.vectors.tolist(),
            "multiplicities": self.multiplicities.tolist(),
        }

    def _items(self):
        return {tuple(v.tolist()): int(k) for v, k in zip(self.vectors, self.multiplicities)}

    def __eq__(self, other):
        if not isinstance(other, VectorMultiset):
            return NotImplemented
        return self.dimension == other.dimension and self._items() == other._items()

    def __hash__(self):
        return hash(frozenset(self._items().items()))

    def allclose(self, other: "VectorMultiset", atol: float = 1e-10) -> bool:
        """Equality of multiplicity functions up to ``atol`` per component."""
        if self.dimension != other.dimension or self.cardinality != other.cardinality:
            return False
        a = self.expanded()
        b = list(other.expanded())
        for v in a:
            for j, w in enumerate(b):
                if np.all(np.abs(v - w) <= atol):
                    del b[j]
                    break
            else:
                return False
        return True

    def __repr__(self):
        parts = []
        for v, k in zip(self.vectors, self.multiplicities):
            s = "(" + ", ".join(f"{x:.6g}" for x in v) + ")"
            parts.append(s if k == 1 else f"{s}x{k}")
        return "VectorMultiset{" + ", ".join(parts) + "}"


def canonical_basis(n: int) -> VectorMultiset:
    return VectorMultiset(np.eye(n), np.ones(n, dtype=int))


def load_instance(path) -> VectorMultiset:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return from_instance(data)


def from_instance(data: dict) -> VectorMultiset:
    n = int(data["dimension"])
    vecs = np.asarray(data["vectors"], dtype=float).reshape(-1, n)
    mult = data.get("multiplicities")
    return VectorMultiset.from_vectors(vecs, mult, dimension=n)


def combine(a: VectorMultiset, b: VectorMultiset, op: str = "union") -> VectorMultiset:
    """Multiset union (adds multiplicities) or difference (``max(0, a - b)``)."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"dimensions {a.dimension} and {b.dimension} differ")
    if op == "union":
        return VectorMultiset.from_vectors(
            np.vstack([a.vectors, b.vectors]),
            np.concatenate([a.multiplicities, b.multiplicities]),
            dimension=a.dimension,
        )
    if op == "difference":
        sub = b._items()
        keep_v, keep_k = [], []
        for v, k in zip(a.vectors, a.multiplicities):
            left = int(k) - sub.get(tuple(v.tolist()), 0)
            if left > 0:
                keep_v.append(v)
                keep_k.append(left)
        return VectorMultiset.from_vectors(keep_v, keep_k, dimension=a.dimension)
    raise ValueError(f"unknown multiset operation {op!r}")


def rank(vectors, rtol: float = RANK_RTOL) -> int:
    """Rank by Gaussian elimination with complete pivoting."""
    A = np.array(vectors, dtype=float, copy=True)
    if A.size == 0:
        return 0
    thresh = rtol * np.abs(A).max()
    r = 0
    rows, cols = A.shape
    while r < min(rows, cols):
        sub = np.abs(A[r:, r:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= thresh:
            break
        i += r
        j += r
        A[[r, i]] = A[[i, r]]
        A[:, [r, j]] = A[:, [j, r]]
        A[r + 1:] -= np.outer(A[r + 1:, r] / A[r, r], A[r])
        r += 1
    return r


def is_spanning(m: VectorMultiset) -> bool:
    return rank(m.vectors) == m.dimension


def gl_apply(M, m: VectorMultiset) -> VectorMultiset:
    """Image of every vector under ``M``; multiplicities are kept."""
    M = np.asarray(M, dtype=float)
    if M.shape != (m.dimension, m.dimension):
        raise DimensionMismatch(f"matrix shape {M.shape} does not act on R^{m.dimension}")
    if abs(np.linalg.det(M)) <= SINGULAR_TOL:
        raise SingularMatrix("matrix is (numerically) singular")
    return VectorMultiset.from_vectors(m.vectors @ M.T, m.multiplicities, dimension=m.dimension)


def _same_direction(u: np.ndarray, v: np.ndarray) -> bool:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    return 1.0 - float(u @ v) / (nu * nv) <= PARALLEL_TOL


def merge_parallel(m: VectorMultiset) -> VectorMultiset:
    """Replace each class of positively proportional vectors by its sum."""
    reps: list[np.ndarray] = []
    sums: list[np.ndarray] = []
    for v in m.normalize().expanded():
        for i, r in enumerate(reps):
            if _same_direction(r, v):
                sums[i] = sums[i] + v
                break
        else:
            reps.append(v)
            sums.append(v.copy())
    return VectorMultiset.from_vectors(sums, dimension=m.dimension)


def is_obtuse(m: VectorMultiset) -> bool:
    if np.any(m.multiplicities != 1):
        return False
    G = m.vectors @ m.vectors.T
    iu = np.triu_indices(len(m), 1)
    return bool(np.all(G[iu] <= OBTUSE_TOL))


def basis_coordinates(m: VectorMultiset, basis_indices) -> np.ndarray:
    """Coordinates of every distinct entry with respect to the chosen basis."""
    idx = list(basis_indices)
    n = m.dimension
    if len(idx) != n or len(set(idx)) != n or not all(0 <= i < len(m) for i in idx):
        raise NotABasis(f"need {n} distinct entry indices, got {idx}")
    B = m.vectors[idx]
    if rank(B) < n:
        raise NotABasis(f"entries {idx} are linearly dependent")
    # rows of B are basis vectors: x = c @ B
    return np.linalg.solve(B.T, m.vectors.T).T


@dataclass(frozen=True)
class StructureReport:
    basis_indices: tuple[int, ...]
    remainder_indices: tuple[int, ...]
    coordinates: np.ndarray  # remainder coordinates in the basis, one row each
    pairwise_orthogonal: bool
    nonpositive: bool
    disjoint_supports: bool
    supports: tuple[tuple[int, ...], ...]  # the index sets I_j
    mu: dict  # basis index -> positive coefficient

    @property
    def ok(self) -> bool:
        return self.pairwise_orthogonal and self.nonpositive and self.disjoint_supports


def obtuse_structure(m: VectorMultiset, basis_indices, tol: float = 1e-10) -> StructureReport:
    """Normal form of a spanning obtuse set relative to a basis it contains.

    Every remaining vector is expressed as ``-sum_{i in I_j} mu_i b_i``
    with disjoint index sets ``I_j``.
    """
    if not is_obtuse(m):
        raise NotObtuse("multiset is not obtuse")
    coords = basis_coordinates(m, basis_indices)
    idx = tuple(int(i) for i in basis_indices)
    rest = tuple(i for i in range(len(m)) if i not in idx)
    C = coords[list(rest)] if rest else np.zeros((0, m.dimension))
    V = m.vectors[list(rest)] if rest else np.zeros((0, m.dimension))
    G = V @ V.T
    off = G[np.triu_indices(len(rest), 1)]
    orthogonal = bool(np.all(np.abs(off) <= tol))
    nonpositive = bool(np.all(C <= tol))
    supports = tuple(tuple(int(i) for i in np.nonzero(np.abs(row) > tol)[0]) for row in C)
    flat = [i for s in supports for i in s]
    disjoint = len(flat) == len(set(flat)) and all(supports)
    mu = {}
    for row, sup in zip(C, supports):
        for i in sup:
            mu[idx[i]] = float(-row[i])
    return StructureReport(idx, rest, C, orthogonal, nonpositive, disjoint, supports, mu)


def is_gl_obtuse(m: VectorMultiset) -> bool:
    """Whether ``m`` is a linear image of a spanning obtuse set.

    A spanning obtuse set mapped so that it contains the canonical basis
    stays obtuse, so it is enough to test one basis drawn from ``m``.
    """
    if not is_spanning(m) or np.any(m.multiplicities != 1):
        return False
    basis = _greedy_basis(m.vectors)
    coords = basis_coordinates(m, basis)
    return is_obtuse(VectorMultiset.from_vectors(coords, dimension=m.dimension))


def is_gl_canonical(m: VectorMultiset) -> bool:
    """Whether ``m`` is a linear image of the canonical basis."""
    return m.cardinality == m.dimension and is_spanning(m)


def line_classes(m: VectorMultiset) -> int:
    """Number of distinct lines through the origin spanned by the entries."""
    reps: list[np.ndarray] = []
    for v in m.normalize().vectors:
        u = v / np.linalg.norm(v)
        if not any(abs(abs(float(u @ r)) - 1.0) <= PARALLEL_TOL for r in reps):
            reps.append(u)
    return len(reps)


def is_parallelepiped_generating(m: VectorMultiset) -> bool:
    """Whether the L1 zonotope of ``m`` is a parallelepiped (n lines, spanning)."""
    return is_spanning(m) and line_classes(m) == m.dimension


def _greedy_basis(vectors: np.ndarray) -> list[int]:
    chosen: list[int] = []
    for i in range(len(vectors)):
        if rank(vectors[chosen + [i]]) == len(chosen) + 1:
            chosen.append(i)
        if len(chosen) == vectors.shape[1]:
            break
    return chosen


def random_multiset(n: int, m: int, seed: int) -> VectorMultiset:
    """``m`` random vectors: uniform directions, log-normal(0, 0.5) lengths."""
    if m < n:
        raise MultisetError(f"need at least n = {n} vectors to span, got m = {m}")
    rng = np.random.default_rng(seed)
    while True:
        d = rng.standard_normal((m, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        vecs = d * rng.lognormal(0.0, 0.5, size=(m, 1))
        ms = VectorMultiset.from_vectors(vecs, dimension=n)
        if is_spanning(ms):
            return ms


def random_matrix(n: int, rng: np.random.Generator, max_cond: float = 10.0) -> np.ndarray:
    """A random well-conditioned matrix with determinant of either sign."""
    while True:
        M = rng.standard_normal((n, n))
        if np.linalg.cond(M) <= max_cond:
            return M


def random_obtuse(n: int, rng: np.random.Generator, extra: int | None = None) -> VectorMultiset:
    """Canonical basis plus vectors ``-sum_{i in I_j} mu_i e_i`` on disjoint ``I_j``."""
    perm = rng.permutation(n)
    k = int(rng.integers(0, n + 1)) if extra is None else extra
    if k == 0:
        return canonical_basis(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    groups = np.split(perm, cuts)
    vecs = list(np.eye(n))
    for g in groups:
        v = np.zeros(n)
        v[g] = -rng.uniform(0.3, 2.0, size=len(g))
        vecs.append(v)
    return VectorMultiset.from_vectors(vecs, dimension=n)


def subsets(m: VectorMultiset, size: int):
    """All ``size``-element sub-multisets by expanded index."""
    vecs = m.expanded()
    for combo in itertools.combinations(range(len(vecs)), size):
        yield combo, VectorMultiset.from_vectors(vecs[list(combo)], dimension=m.dimension)
