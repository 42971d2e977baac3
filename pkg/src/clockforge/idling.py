"""Idling-chain clock: a unary clock whose last state feeds a cascade of
extra/idling qubit pairs, so that most of the legal states have the
computation finished.

Labels are written d|e|i: N+1 unary bits c_1..c_{N+1}, C extra unary bits
(which continue the domain wall) and C idling bits underneath them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, log2

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ConvergenceFailure, DomainError, PathInvalid, SizeError
from .operators import ChainBuilder, LabeledSparseOperator

DENSE_LIMIT = 10_000


@dataclass(frozen=True)
class IdlingSpec:
    n_unary: int
    n_extra: int

    def __post_init__(self):
        if self.n_unary < 1 or self.n_extra < 1:
            raise DomainError("need N >= 1 and C >= 1")

    @property
    def padding(self) -> int:
        """A = 2^(C+1) - 2 extra legal states."""
        return 2 ** (self.n_extra + 1) - 2

    @property
    def z(self) -> Fraction:
        return Fraction(self.padding + 1, self.n_unary)

    @property
    def n_states(self) -> int:
        return self.n_unary + 1 + self.padding

    @property
    def n_qubits(self) -> int:
        return self.n_unary + 1 + 2 * self.n_extra

    @classmethod
    def with_half_done(cls, n: int) -> "IdlingSpec":
        """Smallest C giving done-overlap >= 1/2."""
        return cls(n, max(1, ceil(log2((n + 2) / 2))))


@dataclass(frozen=True)
class LegalStateGraph:
    vertices: tuple
    edges: tuple

    @property
    def index(self) -> dict:
        return {v: k for k, v in enumerate(self.vertices)}

    def degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.vertices), dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def laplacian(self) -> sp.csr_matrix:
        m = len(self.vertices)
        u = np.array([e[0] for e in self.edges])
        v = np.array([e[1] for e in self.edges])
        adj = sp.csr_matrix((np.ones(len(u)), (u, v)), shape=(m, m))
        adj = adj + adj.T
        return (sp.diags(np.asarray(adj.sum(axis=1)).ravel()) - adj).tocsr()

    def edge_list(self) -> str:
        return "\n".join(f"{self.vertices[u]} {self.vertices[v]} {k}" for u, v, k in self.edges)


def _label(spec: IdlingSpec, k: int, j: int, ibits: tuple) -> str:
    n, c = spec.n_unary, spec.n_extra
    d = "1" * k + "0" * (n + 1 - k)
    e = "1" * j + "0" * (c - j)
    i = "".join(map(str, ibits)) + "0" * (c - len(ibits))
    return f"{d}|{e}|{i}"


def _idle_states(spec: IdlingSpec):
    """(j, ibits) for the idling part, j = number of extra bits on; j = 0 is s'."""
    out = [(0, ())]
    for j in range(1, spec.n_extra + 1):
        for m in range(2 ** j):
            out.append((j, tuple(int(b) for b in format(m, f"0{j}b"))))
    return out


def enumerate_legal_states(spec: IdlingSpec) -> LegalStateGraph:
    if spec.n_states > 10 ** 6:
        raise SizeError("legal graph limited to 10^6 vertices")
    n = spec.n_unary
    labels = [_label(spec, k, 0, ()) for k in range(1, n + 2)]
    idle = _idle_states(spec)
    labels += [_label(spec, n + 1, j, ib) for j, ib in idle[1:]]
    order = sorted(range(len(labels)), key=lambda k: labels[k].replace("|", ""))
    labels = [labels[k] for k in order]
    index = {lab: k for k, lab in enumerate(labels)}

    edges = []
    for k in range(1, n + 1):
        edges.append((index[_label(spec, k, 0, ())], index[_label(spec, k + 1, 0, ())], "unary"))
    for j, ib in idle:
        here = index[_label(spec, n + 1, j, ib)]
        if j < spec.n_extra:
            edges.append((here, index[_label(spec, n + 1, j + 1, ib + (0,))], "extra"))
        for m in range(j):
            if ib[m] == 0:
                flipped = ib[:m] + (1,) + ib[m + 1:]
                edges.append((here, index[_label(spec, n + 1, j, flipped)], "idling"))
    edges = tuple(sorted((min(u, v), max(u, v), kind) for u, v, kind in edges))
    return LegalStateGraph(tuple(labels), edges)


def _site_layout(spec: IdlingSpec) -> tuple[list[int], list[int]]:
    """Chain sites (1-based) of c_1..c_{N+1+C} and of i_1..i_C."""
    top = spec.n_unary + 1 + spec.n_extra
    return list(range(1, top + 1)), list(range(top + 1, top + 1 + spec.n_extra))


def build_clock_check(spec: IdlingSpec) -> ChainBuilder:
    c, i = _site_layout(spec)
    b = ChainBuilder(spec.n_qubits, cap=2 ** 20)
    b.projector((c[0],), "0")
    for k in range(len(c) - 1):
        b.projector((c[k], c[k + 1]), "01")
    n = spec.n_unary
    for j in range(1, spec.n_extra + 1):
        b.projector((c[n + j], i[j - 1]), "01")
    return b


def build_idling_hamiltonian(spec: IdlingSpec, mode: str = "legal_graph") -> LabeledSparseOperator:
    if mode == "legal_graph":
        g = enumerate_legal_states(spec)
        return LabeledSparseOperator.from_matrix(g.laplacian(), g.vertices)
    if mode != "full_space":
        raise DomainError("mode must be 'legal_graph' or 'full_space'")
    if spec.n_qubits > 20:
        raise SizeError("full-space idling chain limited to 20 qubits")
    n, cc = spec.n_unary, spec.n_extra
    c, i = _site_layout(spec)
    b = build_clock_check(spec)
    for j in range(1, n + 1):
        b.transition((c[j - 1], c[j], c[j + 1]), "100", "110")
    for j in range(1, cc):
        b.transition((i[j - 1], c[n + j - 1], c[n + j], c[n + j + 1]), "0100", "0110")
    b.transition((i[cc - 1], c[n + cc - 1], c[n + cc]), "010", "011")
    for j in range(1, cc + 1):
        b.transition((c[n + j], i[j - 1]), "11", "10")
    op = b.build()
    top = len(c)
    labels = tuple(f"{lab[:n + 1]}|{lab[n + 1:top]}|{lab[top:]}" for lab in op.labels)
    return LabeledSparseOperator(op.dimension, labels, op.rows, op.cols, op.values)


def done_overlap(spec: IdlingSpec) -> Fraction:
    """Weight of the uniform legal superposition on states with the unary part all ones."""
    g = enumerate_legal_states(spec)
    done = sum(lab.split("|")[0] == "1" * (spec.n_unary + 1) for lab in g.vertices)
    return Fraction(done, len(g.vertices))


def stochastic_matrix(spec: IdlingSpec) -> np.ndarray:
    lap = enumerate_legal_states(spec).laplacian().toarray()
    return np.eye(lap.shape[0]) - lap / (2 * (spec.n_extra + 1))


# -- canonical paths ----------------------------------------------------------

@dataclass(frozen=True)
class CanonicalPathReport:
    max_path_length: int
    max_edge_load: int
    congestion: float
    gap_lower_bound: float
    numeric_gap: float
    loads: dict


def _decode(label: str) -> tuple[int, tuple, tuple]:
    d, e, i = label.split("|")
    return d.count("1"), tuple(int(x) for x in e), tuple(int(x) for x in i)


def _idle_walk(spec: IdlingSpec, e, i, e_t, i_t) -> list[str]:
    """Left-to-right repair of the extra/idling strings; returns visited labels."""
    n = spec.n_unary
    e, i = list(e), list(i)
    seq = []

    def emit():
        seq.append(f"{'1' * (n + 1)}|{''.join(map(str, e))}|{''.join(map(str, i))}")

    for k in range(spec.n_extra):
        if e[k] != e_t[k]:
            e[k] = e_t[k]
            emit()
        if i[k] != i_t[k]:
            i[k] = i_t[k]
            emit()
    return seq


def canonical_path(spec: IdlingSpec, s: str, t: str) -> list[str]:
    """Vertex sequence from s to t (s < t in the vertex order)."""
    n = spec.n_unary
    ks, es, is_ = _decode(s)
    kt, et, it = _decode(t)
    seq = [s]
    zeros = (0,) * spec.n_extra
    stop = kt if kt <= n else n + 1
    for k in range(ks + 1, stop + 1):
        seq.append(f"{'1' * k}{'0' * (n + 1 - k)}|{''.join(map(str, zeros))}|{''.join(map(str, zeros))}")
    if kt == n + 1:
        seq += _idle_walk(spec, es, is_, et, it)
    return seq


def canonical_paths(spec: IdlingSpec, numeric_gap: float | None = None) -> CanonicalPathReport:
    m = spec.n_states
    if m * m > 10 ** 8:
        raise SizeError("too many path pairs")
    g = enumerate_legal_states(spec)
    index = g.index
    edge_id = {(u, v): k for k, (u, v, _) in enumerate(g.edges)}
    loads = np.zeros(len(g.edges), dtype=np.int64)
    longest = 0
    for a in range(m):
        for b in range(a + 1, m):
            seq = canonical_path(spec, g.vertices[a], g.vertices[b])
            if seq[-1] != g.vertices[b]:
                raise PathInvalid(g.vertices[a], g.vertices[b], len(seq) - 1)
            longest = max(longest, len(seq) - 1)
            for step, (x, y) in enumerate(zip(seq[:-1], seq[1:])):
                u, v = sorted((index.get(x, -1), index.get(y, -1)))
                k = edge_id.get((u, v))
                if k is None:
                    raise PathInvalid(g.vertices[a], g.vertices[b], step)
                # the reversed path t -> s uses the same edges
                loads[k] += 2
    p_edge = 1 / (2 * (spec.n_extra + 1))
    max_load = int(loads.max()) if len(loads) else 0
    rho = max_load * (1 / m) ** 2 / ((1 / m) * p_edge)
    bound = 2 * (spec.n_extra + 1) / (rho * longest)
    if numeric_gap is None:
        numeric_gap = legal_gap(spec)
    return CanonicalPathReport(longest, max_load, rho, bound, numeric_gap,
                               {g.edges[k]: int(x) for k, x in enumerate(loads)})


def unary_edge_load(spec: IdlingSpec, a: int) -> int:
    """Closed-form load of the unary edge that sets bit a (a = 2..N+1)."""
    return 2 * (a - 1) * (spec.n_states - (a - 1))


def legal_gap(spec: IdlingSpec) -> float:
    lap = enumerate_legal_states(spec).laplacian()
    m = lap.shape[0]
    if m <= DENSE_LIMIT:
        return float(np.diff(eigh(lap.toarray(), eigvals_only=True, subset_by_index=[0, 1]))[0])
    try:
        w = eigsh(lap, k=2, sigma=-1e-3, which="LM", tol=1e-10, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise ConvergenceFailure(str(exc)) from exc
    w = np.sort(w)
    return float(w[1] - w[0])


def analytic_gap_bound(spec: IdlingSpec) -> float:
    """(z + 1)/(8 z N^2)."""
    z = float(spec.z)
    return (z + 1) / (8 * z * spec.n_unary ** 2)


def gap_check(spec: IdlingSpec) -> tuple[float, float]:
    return legal_gap(spec), analytic_gap_bound(spec)
