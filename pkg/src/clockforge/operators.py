"""Labeled sparse operators on qubit/qutrit chains.

Basis states are ordered by the integer value of their digit string read
left to right, most significant first, so site 1 is the leftmost character
of each label. Terms are added as projectors onto patterns or onto the
difference of two patterns (the "transition projectors" used throughout the
clock constructions).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import NotConserved, SizeError

DEFAULT_MAX_DIM = 2 ** 20


def max_dim() -> int:
    env = os.environ.get("CLOCKFORGE_MAX_DIM")
    return int(env) if env else DEFAULT_MAX_DIM


def check_dim(dim: int, cap: int | None = None) -> None:
    # the environment variable overrides both the default and module-specific caps
    if os.environ.get("CLOCKFORGE_MAX_DIM") or cap is None:
        cap = max_dim()
    if dim > cap:
        raise SizeError(f"dimension {dim} exceeds cap {cap} (set CLOCKFORGE_MAX_DIM to raise it)")


@dataclass(frozen=True)
class LabeledSparseOperator:
    """Real symmetric operator stored as its upper triangle (row <= col)."""

    dimension: int
    labels: tuple
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @classmethod
    def from_matrix(cls, matrix, labels: Sequence[str]) -> "LabeledSparseOperator":
        m = sp.csr_matrix(matrix, dtype=float)
        m.sum_duplicates()
        if m.nnz and abs(m - m.T).max() > 1e-12:
            raise ValueError("operator is not symmetric")
        upper = sp.triu(m).tocoo()
        keep = upper.data != 0
        order = np.lexsort((upper.col[keep], upper.row[keep]))
        return cls(m.shape[0], tuple(labels), upper.row[keep][order].astype(np.int64),
                   upper.col[keep][order].astype(np.int64), upper.data[keep][order])

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(r), int(c), float(v)) for r, c, v in zip(self.rows, self.cols, self.values)]

    @property
    def nnz(self) -> int:
        return len(self.values)

    def to_sparse(self) -> sp.csr_matrix:
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.values, self.values[off]])
        return sp.csr_matrix((v, (r, c)), shape=(self.dimension, self.dimension))

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.dimension)
        on = self.rows == self.cols
        d[self.rows[on]] = self.values[on]
        return d

    def __add__(self, other: "LabeledSparseOperator") -> "LabeledSparseOperator":
        if self.labels != other.labels:
            raise ValueError("operators live on different bases")
        return LabeledSparseOperator.from_matrix(self.to_sparse() + other.to_sparse(), self.labels)

    def to_json(self) -> str:
        return json.dumps({"dimension": self.dimension, "labels": list(self.labels),
                           "entries": [[r, c, v] for r, c, v in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> "LabeledSparseOperator":
        data = json.loads(text)
        n = data["dimension"]
        ent = np.array(data["entries"], dtype=float).reshape(-1, 3)
        r, c = ent[:, 0].astype(int), ent[:, 1].astype(int)
        if np.any(r > c):
            raise ValueError("entries must satisfy row <= col")
        off = r != c
        m = sp.csr_matrix((np.concatenate([ent[:, 2], ent[off, 2]]),
                           (np.concatenate([r, c[off]]), np.concatenate([c, r[off]]))),
                          shape=(n, n))
        return cls.from_matrix(m, data["labels"])


class ChainBuilder:
    """Accumulates projector terms on a chain of `n_sites` sites with `base` levels.

    Sites are numbered from 1 to match the usual clock notation.
    """

    def __init__(self, n_sites: int, base: int = 2, cap: int | None = None):
        dim = base ** n_sites
        check_dim(dim, cap)
        self.n_sites, self.base, self.dim = n_sites, base, dim
        states = np.arange(dim, dtype=np.int64)
        self.weights = base ** np.arange(n_sites - 1, -1, -1, dtype=np.int64)
        self.digits = ((states[:, None] // self.weights[None, :]) % base).astype(np.int8)
        self._r: list[np.ndarray] = []
        self._c: list[np.ndarray] = []
        self._v: list[np.ndarray] = []
        self.terms: list[tuple[float, str, str, tuple]] = []

    def labels(self) -> list[str]:
        chars = np.array(list("0123456789"))[self.digits]
        return ["".join(row) for row in chars]

    def _match(self, sites: Sequence[int], pattern: str) -> np.ndarray:
        cols = [s - 1 for s in sites]
        target = np.array([int(ch) for ch in pattern], dtype=np.int8)
        return np.nonzero(np.all(self.digits[:, cols] == target, axis=1))[0]

    def _shift(self, sites: Sequence[int], src: str, dst: str) -> int:
        return int(sum((int(b) - int(a)) * self.weights[s - 1]
                       for s, a, b in zip(sites, src, dst)))

    def _add(self, r, c, v) -> None:
        self._r.append(np.asarray(r, dtype=np.int64))
        self._c.append(np.asarray(c, dtype=np.int64))
        self._v.append(np.broadcast_to(np.asarray(v, dtype=float), np.shape(r)).copy())

    def projector(self, sites: Sequence[int], pattern: str, coeff: float = 1.0) -> None:
        """coeff * |pattern><pattern| on the given sites."""
        idx = self._match(sites, pattern)
        self._add(idx, idx, coeff)
        self.terms.append((coeff, pattern, pattern, tuple(sites)))

    def hop(self, sites: Sequence[int], a: str, b: str, coeff: float = 1.0) -> None:
        """coeff * (|b><a| + |a><b|) on the given sites."""
        src = self._match(sites, a)
        dst = src + self._shift(sites, a, b)
        self._add(dst, src, coeff)
        self._add(src, dst, coeff)
        self.terms.append((coeff, a, b, tuple(sites)))
        self.terms.append((coeff, b, a, tuple(sites)))

    def transition(self, sites: Sequence[int], a: str, b: str, coeff: float = 1.0) -> None:
        """coeff * (|a> - |b>)(<a| - <b|): the projector term of a legal transition."""
        self.projector(sites, a, coeff)
        self.projector(sites, b, coeff)
        self.hop(sites, a, b, -coeff)

    def matrix(self) -> sp.csr_matrix:
        if not self._r:
            return sp.csr_matrix((self.dim, self.dim))
        r, c, v = (np.concatenate(x) for x in (self._r, self._c, self._v))
        return sp.csr_matrix((v, (r, c)), shape=(self.dim, self.dim))

    def build(self) -> LabeledSparseOperator:
        return LabeledSparseOperator.from_matrix(self.matrix(), self.labels())

    def audit(self) -> list[str]:
        """Term list, one line per rewriting rule: 'coeff : bra -> ket @ sites'."""
        return [f"{c:g} : {a} -> {b} @ {','.join(map(str, s))}" for c, a, b, s in self.terms]


@dataclass(frozen=True)
class SectorDecomposition:
    key_name: str
    sectors: dict

    def sizes(self) -> dict:
        return {k: len(v) for k, v in sorted(self.sectors.items())}


def sector_decompose(op: LabeledSparseOperator, key: Callable[[str], int],
                     key_name: str | None = None) -> SectorDecomposition:
    keys = np.array([key(lab) for lab in op.labels])
    bad = np.nonzero(keys[op.rows] != keys[op.cols])[0]
    if len(bad):
        j = bad[0]
        r, c = int(op.rows[j]), int(op.cols[j])
        raise NotConserved(r, c, float(op.values[j]), int(keys[r]), int(keys[c]))
    sectors = {int(k): np.nonzero(keys == k)[0].tolist() for k in np.unique(keys)}
    return SectorDecomposition(key_name or getattr(key, "__name__", "key"), sectors)


def restrict(op: LabeledSparseOperator, indices: Iterable[int]) -> tuple[np.ndarray, list[str]]:
    """Principal submatrix in the given order, with its labels."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        raise IndexError("indices must be distinct")
    for i in idx:
        if not 0 <= i < op.dimension:
            raise IndexError(f"index {i} out of range")
    sub = op.to_sparse()[idx][:, idx].toarray()
    return sub, [op.labels[i] for i in idx]


def popcount(label: str) -> int:
    return label.count("1")


def count_pattern(pattern: str) -> Callable[[str], int]:
    def key(label: str) -> int:
        return sum(label.startswith(pattern, i) for i in range(len(label)))
    key.__name__ = f"count_{pattern}"
    return key
