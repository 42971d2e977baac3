"""Tuned pulse clock: the Laplacian pulse chain plus a frustrated tuning term
that selects the single-excitation superposition as the unique ground state.

    H = sum_x (|01> - |10>)(<01| - <10|)_{x,x+1}
        + V I - V sum_x |1><1|_x + sum_x |11><11|_{x,x+1}

on a chain of N qubits (N - 1 bonds). Both parts conserve the number z of
excitations, so everything below works sector by sector. Bit x of a sector
mask is qubit x+1 counted from the right end of the label string.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ConvergenceFailure, DomainError
from .operators import ChainBuilder, LabeledSparseOperator

DENSE_SECTOR = 2500
V_RULES = ("cubic", "threehalves")


@dataclass(frozen=True)
class TuningSpec:
    n: int
    v: float | None = None

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("tuned pulse chain needs N >= 3")
        if self.v is None:
            object.__setattr__(self, "v", float(self.n) ** -3)
        if not self.v > 0:
            raise DomainError("tuning strength V must be positive")


def v_from_rule(rule: str, n: int) -> float:
    """'cubic' -> N^-3, 'threehalves' -> N^-3/2, 'const:<x>' -> x."""
    if rule == "cubic":
        return float(n) ** -3
    if rule == "threehalves":
        return float(n) ** -1.5
    if rule.startswith("const:"):
        return float(rule.split(":", 1)[1])
    raise DomainError(f"unknown V rule {rule!r}")


def build_tuned(spec: TuningSpec) -> LabeledSparseOperator:
    n, v = spec.n, spec.v
    b = ChainBuilder(n)
    for x in range(1, n):
        b.transition((x, x + 1), "01", "10")
        b.projector((x, x + 1), "11")
    for x in range(1, n + 1):
        b.projector((x,), "1", -v)
    op = b.build()
    m = op.to_sparse() + v * sp.identity(op.dimension)
    return LabeledSparseOperator.from_matrix(m, op.labels)


def count_no11(n: int, z: int) -> int:
    """Number of n-bit strings with z ones and no two adjacent ones."""
    if not 0 <= z <= n:
        raise DomainError("need 0 <= z <= N")
    return comb(n - z + 1, z)


def count_no11_enumerated(n: int, z: int) -> int:
    return sum(1 for c in combinations(range(n), z)
               if all(b - a > 1 for a, b in zip(c[:-1], c[1:])))


# -- sector operators ---------------------------------------------------------

def sector_masks(n: int, z: int) -> np.ndarray:
    """Sorted bit masks of all n-bit strings with z ones (rank = position)."""
    if not 0 <= z <= n:
        raise DomainError("need 0 <= z <= N")
    masks = np.array([sum(1 << b for b in c) for c in combinations(range(n), z)], dtype=np.int64)
    return np.sort(masks)


def _adjacent_ones(masks: np.ndarray) -> np.ndarray:
    m = masks & (masks >> 1)
    return np.array([int(x).bit_count() for x in m], dtype=float)


def sector_parts(n: int, z: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """Pulse Laplacian A on the z sector and the diagonal of the |11><11| terms."""
    masks = sector_masks(n, z)
    size = len(masks)
    rows, cols, vals = [], [], []
    diag = np.zeros(size)
    for x in range(n - 1):
        pair = (1 << x) | (1 << (x + 1))
        bits = masks & pair
        differ = (bits != 0) & (bits != pair)
        src = np.nonzero(differ)[0]
        diag[src] += 1
        dst = np.searchsorted(masks, masks[src] ^ pair)
        rows.append(src)
        cols.append(dst)
        vals.append(-np.ones(len(src)))
    r = np.concatenate(rows + [np.arange(size)])
    c = np.concatenate(cols + [np.arange(size)])
    v = np.concatenate(vals + [diag])
    a = sp.csr_matrix((v, (r, c)), shape=(size, size))
    return a, _adjacent_ones(masks)


def sector_hamiltonian(n: int, z: int, v: float) -> sp.csr_matrix:
    a, b = sector_parts(n, z)
    return (a + sp.diags(b + v - z * v)).tocsr()


def lowest_eigenvalues(m: sp.csr_matrix, k: int = 1) -> np.ndarray:
    size = m.shape[0]
    k = min(k, size)
    if size <= DENSE_SECTOR:
        return eigh(m.toarray(), eigvals_only=True, subset_by_index=[0, k - 1])
    # seeded start vector: a symmetric one would never see the excited states of A
    v0 = np.random.default_rng(size).standard_normal(size)
    try:
        w = eigsh(m, k=k, which="SA", tol=1e-12, v0=v0, ncv=min(size, max(4 * k, 40)),
                  maxiter=50 * size, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return np.sort(w)


# -- geometric bound ----------------------------------------------------------

@dataclass(frozen=True)
class GeometricBound:
    n: int
    z: int
    cos_theta: float
    sin2_half: float
    lambda1_a: float
    lambda1_b: float
    bound: float

    @property
    def sin2_floor(self) -> float:
        """z/(4N), claimed for 2 <= z < (N+1)/2."""
        return self.z / (4 * self.n)


@lru_cache(maxsize=512)
def geometric_bound(n: int, z: int) -> GeometricBound:
    """Lower bound on the lowest eigenvalue of A + B in the z sector.

    A is the pulse Laplacian (kernel: the symmetric state), B the |11><11|
    count (kernel: strings without adjacent ones). Above z = (N+1)/2 the
    kernel of B is empty; cos theta is then 0 and lambda1_b is the smallest
    value of B.
    """
    if n < 3:
        raise DomainError("need N >= 3")
    if not 2 <= z <= n:
        raise DomainError("need 2 <= z <= N")
    a, b = sector_parts(n, z)
    cos_t = float(np.sqrt(count_no11(n, z) / comb(n, z)))
    sin2 = (1 - cos_t) / 2
    lam_a = float(lowest_eigenvalues(a, 2)[-1]) if a.shape[0] > 1 else np.inf
    positive = b[b > 0]
    lam_b = float(positive.min()) if len(positive) else np.inf
    return GeometricBound(n, z, cos_t, sin2, lam_a, lam_b, min(lam_a, lam_b) * sin2)


# -- sector study -------------------------------------------------------------

@dataclass(frozen=True)
class SectorStudy:
    n: int
    v: float
    energies: dict
    ground_energy: float
    ground_overlap: float
    single_sector_gap: float
    gap: float
    bounds: dict

    def rows(self) -> list[tuple]:
        return [(self.n, self.v, z, e) for z, e in sorted(self.energies.items())]

    @property
    def bound_satisfied(self) -> bool:
        """Lemma inequality E_z + (z-1)V >= bound in every z >= 2 sector studied."""
        return all(self.energies[z] + (z - 1) * self.v >= b.bound - 1e-10
                   for z, b in self.bounds.items())


def sector_spectrum_study(n: int, v: float | None = None, z_max: int | None = None,
                          with_bounds: bool = True) -> SectorStudy:
    """Ground energy of every excitation sector and the global gap above |~1>.

    `z_max` truncates the sectors studied (all of them by default).
    """
    spec = TuningSpec(n, v)
    v = spec.v
    top = n if z_max is None else min(z_max, n)
    energies = {}
    for z in range(0, top + 1):
        if z == 1:
            continue
        energies[z] = float(lowest_eigenvalues(sector_hamiltonian(n, z, v))[0])
    h1 = sector_hamiltonian(n, 1, v).toarray()
    w, vec = eigh(h1, subset_by_index=[0, 1])
    energies[1] = float(w[0])
    overlap = float(abs(vec[:, 0].sum()) ** 2 / n)
    others = [e for z, e in energies.items() if z != 1]
    gap = min([float(w[1])] + others) - float(w[0])
    bounds = {z: geometric_bound(n, z) for z in range(2, top + 1)} if with_bounds else {}
    return SectorStudy(n, v, energies, float(w[0]), overlap, float(w[1] - w[0]), gap, bounds)
