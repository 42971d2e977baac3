"""Qutrit surfer clocks: a surfer "2" riding a domain wall on a line or a
cycle, and C synchronized cycles ("cogs") whose joint legal states form a
walk of (2L)^C steps.

Sites of cog c (1-based) are (c-1)L+1 .. cL. A cycle's (L, 1) pair is the
wrap-around bond, written with site L first.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh

from .errors import DomainError, SizeError
from .operators import ChainBuilder, LabeledSparseOperator, restrict

MAX_QUTRITS = 13
LINE_CHECK = ("01", "10", "21", "02", "22")
CYCLE_CHECK = ("01", "10", "22")
BOUNDARY_CHECK = ("00", "11", "22")


@dataclass(frozen=True)
class Rule:
    """One term: a check projector (a == b) or a transition (|a> - |b>)(<a| - <b|)."""

    sites: tuple
    a: str
    b: str

    @property
    def is_check(self) -> bool:
        return self.a == self.b

    def audit(self) -> str:
        return f"1 : {self.a} -> {self.b} @ {','.join(map(str, self.sites))}"


def _assemble(n_sites: int, rules: list[Rule]) -> LabeledSparseOperator:
    if n_sites > MAX_QUTRITS:
        raise SizeError(f"full-space qutrit builds limited to {MAX_QUTRITS} sites")
    b = ChainBuilder(n_sites, base=3, cap=3 ** MAX_QUTRITS)
    for r in rules:
        if r.is_check:
            b.projector(r.sites, r.a)
        else:
            b.transition(r.sites, r.a, r.b)
    return b.build()


def _check_length(length: int) -> None:
    if length < 3:
        raise DomainError("surfer length L must be at least 3")


# -- line ---------------------------------------------------------------------

def surfer_line_rules(length: int) -> list[Rule]:
    _check_length(length)
    rules = [Rule((1,), "0", "0"), Rule((length,), "1", "1")]
    for i in range(1, length):
        rules += [Rule((i, i + 1), p, p) for p in LINE_CHECK]
    rules += [Rule((i, i + 1), "20", "12") for i in range(1, length)]
    return rules


def surfer_line_states(length: int) -> list[str]:
    return ["1" * t + "2" + "0" * (length - 1 - t) for t in range(length)]


def build_surfer_line(length: int, dynamics: bool = True) -> LabeledSparseOperator:
    rules = surfer_line_rules(length)
    if not dynamics:
        rules = [r for r in rules if r.is_check]
    return _assemble(length, rules)


# -- cycle --------------------------------------------------------------------

def cog_states(length: int) -> list[str]:
    """The 2L single-surfer states of one cog in the order the surfer visits them."""
    first = ["1" * t + "2" + "0" * (length - 1 - t) for t in range(length)]
    second = ["0" * t + "2" + "1" * (length - 1 - t) for t in range(length)]
    return first + second


def cog_steps(length: int, offset: int = 0) -> list[Rule]:
    """Transitions of one cog in revolution order; the last one is the wrap."""
    s = [Rule((offset + i, offset + i + 1), "20", "12") for i in range(1, length)]
    s.append(Rule((offset + length, offset + 1), "21", "12"))
    s += [Rule((offset + i, offset + i + 1), "21", "02") for i in range(1, length)]
    s.append(Rule((offset + length, offset + 1), "20", "02"))
    return s


def cog_checks(length: int, offset: int = 0, include_22: bool = True) -> list[Rule]:
    pats = CYCLE_CHECK if include_22 else CYCLE_CHECK[:2]
    bpats = BOUNDARY_CHECK if include_22 else BOUNDARY_CHECK[:2]
    rules = [Rule((offset + length, offset + 1), p, p) for p in bpats]
    for i in range(1, length):
        rules += [Rule((offset + i, offset + i + 1), p, p) for p in pats]
    return rules


def surfer_cycle_rules(length: int, include_22: bool = True) -> list[Rule]:
    _check_length(length)
    return cog_checks(length, 0, include_22) + cog_steps(length)


def build_surfer_cycle(length: int, include_22: bool = True) -> LabeledSparseOperator:
    return _assemble(length, surfer_cycle_rules(length, include_22))


def walk_laplacian(m: int, cyclic: bool) -> np.ndarray:
    """Laplacian of a path (or cycle) of m vertices."""
    lap = 2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    lap[0, 0] = lap[-1, -1] = 1
    if cyclic and m > 2:
        lap[0, 0] = lap[-1, -1] = 2
        lap[0, -1] = lap[-1, 0] = -1
    return lap


def legal_restriction(op: LabeledSparseOperator, states: list[str]) -> np.ndarray:
    idx = {lab: k for k, lab in enumerate(op.labels)}
    return restrict(op, [idx[s] for s in states])[0]


def lowest_gap(matrix: np.ndarray) -> float:
    w = eigh(matrix, eigvals_only=True, subset_by_index=[0, 1])
    return float(w[1] - w[0])


# -- surfer-number sectors ----------------------------------------------------

def surfer_sectors(op: LabeledSparseOperator) -> dict:
    counts = np.array([lab.count("2") for lab in op.labels])
    return {int(k): np.nonzero(counts == k)[0] for k in np.unique(counts)}


def sector_minima(length: int) -> dict:
    """Lowest eigenvalue of the surfer cycle in every surfer-number sector."""
    h = build_surfer_cycle(length).to_sparse()
    out = {}
    for k, idx in surfer_sectors(build_surfer_cycle(length)).items():
        block = h[idx][:, idx].toarray()
        out[k] = float(eigh(block, eigvals_only=True, subset_by_index=[0, 0])[0])
    return out


def count_no_adjacent(length: int, k: int) -> int:
    """k-subsets of the L-cycle with no two cyclically adjacent members (enumeration)."""
    n = 0
    for sub in combinations(range(length), k):
        s = set(sub)
        if all((x + 1) % length not in s for x in sub):
            n += 1
    return n


@dataclass(frozen=True)
class SectorAngleBound:
    length: int
    k: int
    n_all: int
    n_no22: int
    cos_theta: float
    sin2_half: float
    lambda1_r: float
    lambda1_22: float
    bound: float
    cos_theta_numeric: float
    bound_numeric: float
    sector_minimum: float

    @property
    def sin2_floor(self) -> float:
        return 1 / (4 * (self.length - 1))


def _null_basis(block: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    w, v = eigh(block)
    null = v[:, w < tol]
    above = w[w >= tol]
    return null, float(above[0]) if len(above) else np.inf


def sector_angle_bound(length: int, k: int) -> SectorAngleBound:
    """Geometric-lemma bound on the k-surfer sector of the surfer cycle (k odd).

    H_22 collects the |22><22| checks, H_r everything else. The counted angle
    uses the fraction of surfer placements without adjacent pairs; the
    numeric angle is the smallest principal angle between the two kernels
    in the sector.
    """
    _check_length(length)
    if k % 2 == 0:
        raise DomainError("the angle bound applies to odd surfer numbers")
    if not 1 < k <= length:
        raise DomainError("need 1 < k <= L")
    full = build_surfer_cycle(length)
    rest = build_surfer_cycle(length, include_22=False)
    idx = surfer_sectors(full)[k]
    h = full.to_sparse()[idx][:, idx].toarray()
    h_r = rest.to_sparse()[idx][:, idx].toarray()
    h_22 = h - h_r
    n_all = comb(length, k)
    n_no22 = count_no_adjacent(length, k)
    cos_t = float(np.sqrt(n_no22 / n_all))
    sin2 = (1 - cos_t) / 2
    null_r, lam_r = _null_basis(h_r)
    null_22, lam_22 = _null_basis(h_22)
    if null_r.shape[1] and null_22.shape[1]:
        cos_num = float(np.linalg.svd(null_r.T @ null_22, compute_uv=False)[0])
    else:
        cos_num = 0.0
    cos_num = min(cos_num, 1.0)
    lam = min(lam_r, lam_22)
    sector_min = float(eigh(h, eigvals_only=True, subset_by_index=[0, 0])[0])
    return SectorAngleBound(length, k, n_all, n_no22, cos_t, sin2, lam_r, lam_22,
                            lam * sin2, cos_num, lam * (1 - cos_num) / 2, sector_min)


# -- multicog -----------------------------------------------------------------

MODES = ("stopped", "cycle")


@dataclass(frozen=True)
class MulticogClock:
    n_cogs: int
    length: int
    mode: str
    rules: tuple

    @property
    def n_steps(self) -> int:
        return (2 * self.length) ** self.n_cogs

    @property
    def n_sites(self) -> int:
        return self.n_cogs * self.length

    def legal_states(self) -> list[str]:
        """Mixed-radix order with cog 1 fastest: consecutive states differ by one rule."""
        per = cog_states(self.length)
        base = 2 * self.length
        out = []
        for n in range(self.n_steps):
            digits = [(n // base ** c) % base for c in range(self.n_cogs)]
            out.append("".join(per[d] for d in digits))
        return out

    def audit(self) -> list[str]:
        return [r.audit() for r in self.rules]

    def site_degree(self, site: int) -> int:
        return sum(site in r.sites for r in self.rules)

    def sync_degree(self, site: int) -> int:
        return sum(site in r.sites and len(r.sites) > 2 for r in self.rules)

    def operator(self) -> LabeledSparseOperator:
        return _assemble(self.n_sites, list(self.rules))

    def legal_operator(self) -> LabeledSparseOperator:
        lap = walk_laplacian(self.n_steps, self.mode == "cycle")
        return LabeledSparseOperator.from_matrix(sp.csr_matrix(lap), self.legal_states())


def multicog_rules(n_cogs: int, length: int, mode: str = "stopped") -> list[Rule]:
    """Checks for every cog, free steps for cog 1, and synchronized steps for the rest.

    A step of cog k > 1 happens together with the wrap of every lower cog
    (all of them sitting at 2|0 and jumping to 0|2). In "cycle" mode the last
    cog's wrap is synchronized in the same way and the walk closes up.
    """
    _check_length(length)
    if n_cogs < 1:
        raise DomainError("need at least one cog")
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    rules = []
    for c in range(n_cogs):
        rules += cog_checks(length, c * length)
    for c in range(n_cogs):
        steps = cog_steps(length, c * length)
        last = c == n_cogs - 1
        if not (last and mode == "cycle"):
            steps = steps[:-1]
        lower = [cog_steps(length, j * length)[-1] for j in range(c)]
        for st in steps:
            sites = sum((w.sites for w in lower), ()) + st.sites
            rules.append(Rule(sites, "20" * c + st.a, "02" * c + st.b))
    return rules


def build_multicog(n_cogs: int, length: int, mode: str = "stopped") -> MulticogClock:
    return MulticogClock(n_cogs, length, mode, tuple(multicog_rules(n_cogs, length, mode)))
