"""Three-section adiabatic schedule in the reduced (N+1)-dimensional basis.

Section 1 switches on the propagation term next to an end-point bias that
pins the walker at |0>; section 2 swaps the bias from the left to the right
end; section 3 switches propagation off again, leaving the walker at |N>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh

from .errors import DomainError, IntegratorTolerance, RangeError
from .walk import WalkSpec, build_walk_matrix


@dataclass(frozen=True)
class ScheduleSpec:
    n: int
    t1: float = 1.0
    t2: float = 100.0
    # optional monotone piecewise-linear table of (u, s) with u = (t - T1)/T2 in [0, 1]
    s_table: tuple | None = field(default=None)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("N must be positive")
        if self.t1 <= 0 or self.t2 < 0:
            raise DomainError("need T1 > 0 and T2 >= 0")
        if self.s_table is not None:
            u, s = np.asarray(self.s_table, dtype=float).T
            if u[0] != 0 or u[-1] != 1 or s[0] != 0 or s[-1] != 1:
                raise DomainError("schedule table must run from (0, 0) to (1, 1)")
            if np.any(np.diff(u) <= 0) or np.any(np.diff(s) < 0):
                raise DomainError("schedule table must be monotone")

    @property
    def total(self) -> float:
        return 2 * self.t1 + self.t2

    def s(self, t: float) -> float:
        u = (t - self.t1) / self.t2 if self.t2 > 0 else 1.0
        u = min(max(u, 0.0), 1.0)
        if self.s_table is None:
            return u
        uu, ss = np.asarray(self.s_table, dtype=float).T
        return float(np.interp(u, uu, ss))


def slowdown_table(width: float = 0.1, weight: float = 0.5) -> tuple:
    """Schedule spending `weight` of the middle section within +-width/2 of s = 1/2."""
    lo, hi = 0.5 - width / 2, 0.5 + width / 2
    rest = (1 - weight) / 2
    return ((0.0, 0.0), (rest, lo), (rest + weight, hi), (1.0, 1.0))


@lru_cache(maxsize=64)
def h_ends(n: int) -> np.ndarray:
    d = np.zeros(n + 1)
    d[0], d[-1] = -1.0, 1.0
    h = np.diag(d)
    h.flags.writeable = False
    return h


@lru_cache(maxsize=64)
def h_prop(n: int) -> np.ndarray:
    h = 2 * np.eye(n + 1) + build_walk_matrix(WalkSpec(n, 1, 1))
    h.flags.writeable = False
    return h


def reduced_hamiltonian(spec: ScheduleSpec, t: float) -> np.ndarray:
    """Propagation weight ramps 0 -> 1 over section 1 and back over section 3.

    With T1 = 1 the ramps are exactly H_ends + t H_prop and
    -H_ends + (2T1 + T2 - t) H_prop.
    """
    if not -1e-12 <= t <= spec.total + 1e-12:
        raise RangeError(f"t = {t} outside [0, {spec.total}]")
    n, t1, t2 = spec.n, spec.t1, spec.t2
    if t <= t1:
        return h_ends(n) + (t / t1) * h_prop(n)
    if t <= t1 + t2:
        return (1 - 2 * spec.s(t)) * h_ends(n) + h_prop(n)
    return -h_ends(n) + ((2 * t1 + t2 - t) / t1) * h_prop(n)


def section2_offset(s: float) -> float:
    """x = (2s - 1)/4."""
    return (2 * s - 1) / 4


def gap_profile(spec: ScheduleSpec, grid_points: int = 201) -> list[tuple[float, float, float]]:
    """(t, gap, E0) on a grid covering each section with `grid_points` points."""
    if grid_points < 3:
        raise DomainError("need at least 3 grid points")
    t1, t2 = spec.t1, spec.t2
    ts = np.unique(np.concatenate([np.linspace(0, t1, grid_points),
                                   np.linspace(t1, t1 + t2, grid_points),
                                   np.linspace(t1 + t2, spec.total, grid_points)]))
    out = []
    for t in ts:
        w = eigh(reduced_hamiltonian(spec, t), eigvals_only=True, subset_by_index=[0, 1])
        out.append((float(t), float(w[1] - w[0]), float(w[0])))
    return out


def section_of(spec: ScheduleSpec, t: float) -> int:
    if t < spec.t1:
        return 1
    if t <= spec.t1 + spec.t2:
        return 2
    return 3


@dataclass(frozen=True)
class IntegrationResult:
    fidelity: float
    norm_error: float
    refinement_delta: float


def _propagate(spec: ScheduleSpec, rtol: float, atol: float) -> np.ndarray:
    n = spec.n
    psi0 = np.zeros(n + 1, dtype=complex)
    psi0[0] = 1.0
    # integrate section by section so the kinks of H(t) sit on step boundaries
    bounds = [0.0, spec.t1, spec.t1 + spec.t2, spec.total]
    psi = psi0
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b <= a:
            continue

        def rhs(t, y, a=a, b=b):
            return -1j * (reduced_hamiltonian(spec, min(max(t, a), b)) @ y)

        sol = solve_ivp(rhs, (a, b), psi, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegratorTolerance(sol.message)
        psi = sol.y[:, -1]
    return psi


def integrate_schedule(spec: ScheduleSpec, rtol: float = 1e-9,
                       check_tol: float = 1e-6) -> IntegrationResult:
    """Schroedinger evolution from |0>; returns |<N|psi(T)>|^2.

    The run is repeated with a tolerance 1/16 as large; disagreement above
    `check_tol` raises IntegratorTolerance.
    """
    coarse = _propagate(spec, rtol, rtol * 1e-2)
    fine = _propagate(spec, rtol / 16, rtol * 1e-2 / 16)
    f_coarse = abs(coarse[-1]) ** 2
    f_fine = abs(fine[-1]) ** 2
    delta = abs(f_coarse - f_fine)
    if delta > check_tol:
        raise IntegratorTolerance(f"fidelity changed by {delta:.2e} under refinement")
    return IntegrationResult(float(f_fine), float(abs(np.linalg.norm(fine) - 1)), float(delta))
