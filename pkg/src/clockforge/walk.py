"""Walks on a line with endpoint loops, H^(L,R)_N = -L|0><0| - R|N><N| + H^walk_N.

Spectra are computed two ways. The analytic route solves the quantization
conditions for plane-wave (goniometric) and exponential (hyperbolic) modes;
the numeric route hands the tridiagonal matrix to LAPACK.

Conventions: sites 0..N, off-diagonal hopping -1, a goniometric mode with
momentum p has energy -2 cos p, a hyperbolic mode with rate q has energy
-2 cosh q. Loops with strength below -1 produce "alternating" hyperbolic modes
(p = pi + i q) with energy +2 cosh q above the band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal, LinAlgError

from .errors import BracketingFailure, ConvergenceFailure, DomainError

DEFAULT_TOL = 1e-10
EDGE_TOL = 1e-9
_CLOSED_FORM_SWITCH = 1e-9


@dataclass(frozen=True)
class WalkSpec:
    n_links: int
    left_loop: float = 0.0
    right_loop: float = 0.0

    def __post_init__(self):
        if int(self.n_links) != self.n_links or self.n_links < 1:
            raise DomainError(f"n_links must be a positive integer, got {self.n_links!r}")
        if not (math.isfinite(self.left_loop) and math.isfinite(self.right_loop)):
            raise DomainError("loop strengths must be finite")
        object.__setattr__(self, "n_links", int(self.n_links))
        object.__setattr__(self, "left_loop", float(self.left_loop))
        object.__setattr__(self, "right_loop", float(self.right_loop))

    @property
    def dim(self) -> int:
        return self.n_links + 1


@dataclass(frozen=True)
class GoniometricMode:
    momentum: float
    energy: float
    amplitude_a: complex | None = None
    amplitude_b: complex | None = None


@dataclass(frozen=True)
class HyperbolicMode:
    rate: float
    energy: float
    amplitude_c: float | None = None
    amplitude_d: float | None = None
    alternating: bool = False


Mode = GoniometricMode | HyperbolicMode


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    modes: tuple
    gap: float
    method: str
    closed_form: str | None = None
    cross_check: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def n_hyperbolic(self) -> int:
        return sum(isinstance(m, HyperbolicMode) for m in self.modes)

    @property
    def n_hyperbolic_below(self) -> int:
        return sum(isinstance(m, HyperbolicMode) and not m.alternating for m in self.modes)

    @property
    def n_hyperbolic_above(self) -> int:
        return sum(isinstance(m, HyperbolicMode) and m.alternating for m in self.modes)


def build_walk_matrix(spec: WalkSpec) -> np.ndarray:
    n = spec.dim
    h = np.zeros((n, n))
    idx = np.arange(n - 1)
    h[idx, idx + 1] = -1.0
    h[idx + 1, idx] = -1.0
    h[0, 0] -= spec.left_loop
    h[-1, -1] -= spec.right_loop
    return h


def case_table_count(spec: WalkSpec) -> int:
    """Number of modes below the band predicted for large N."""
    return int(spec.left_loop > 1) + int(spec.right_loop > 1)


# -- goniometric roots --------------------------------------------------------

def _theta(x: float, p: np.ndarray) -> np.ndarray:
    # continuous on (0, pi) with values in (0, pi): no branch bookkeeping needed
    return np.arctan2(np.sin(p), x - np.cos(p))


def phase_function(spec: WalkSpec, p) -> np.ndarray:
    """G(p) = N p - theta_R(p) - theta_L(p); eigenmodes sit where G is a multiple of pi."""
    p = np.asarray(p, dtype=float)
    return spec.n_links * p - _theta(spec.right_loop, p) - _theta(spec.left_loop, p)


def _bisect(f, lo: np.ndarray, hi: np.ndarray, tol: float) -> np.ndarray:
    lo = lo.copy()
    hi = hi.copy()
    flo = f(lo)
    for _ in range(200):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _scan_grid(n: int, refine: int) -> np.ndarray:
    m = 8 * (n + 1) * refine
    # irrational offset keeps grid points away from exact rational roots
    uniform = np.pi * (np.arange(m) + 0.3819660112501051) / m
    edge = np.pi * np.logspace(-11, -3, 17)
    return np.unique(np.concatenate([edge, uniform, np.pi - edge]))


def _goniometric_roots(spec: WalkSpec, tol: float, refine: int) -> np.ndarray:
    grid = _scan_grid(spec.n_links, refine)
    g = phase_function(spec, grid)
    # drop points whose level assignment is within rounding of a multiple of pi
    resid = np.abs(g / np.pi - np.round(g / np.pi))
    keep = resid > 1e-13 * (1 + spec.n_links)
    grid, g = grid[keep], g[keep]
    k = np.floor(g / np.pi)
    lo_list, hi_list, lev_list = [], [], []
    for j in np.nonzero(np.diff(k))[0]:
        a, b = int(k[j]), int(k[j + 1])
        if abs(a - b) > 1:
            return None
        lo_list.append(grid[j])
        hi_list.append(grid[j + 1])
        lev_list.append(max(a, b))
    if not lo_list:
        return np.zeros(0)
    lev = np.array(lev_list, dtype=float)
    roots = _bisect(lambda p: phase_function(spec, p) - lev * np.pi,
                    np.array(lo_list), np.array(hi_list), min(tol, 1e-12) * 1e-2)
    return np.sort(roots)


def _edge_linear(n: int, a: float, b: float) -> bool:
    # E = -2 is an eigenvalue iff N a b = a + b with a = L-1, b = R-1
    lhs = n * a * b
    return abs(lhs - a - b) <= 1e-12 * max(1.0, abs(lhs), abs(a) + abs(b))


def _plane_wave_amplitudes(spec: WalkSpec, p: float) -> tuple[complex, complex]:
    n, left = spec.n_links, spec.left_loop
    if p == 0.0 or p == np.pi:
        return complex(1.0), complex(0.0)
    r = (left - np.exp(1j * p)) / (np.exp(-1j * p) - left)
    x = np.arange(n + 1)
    v = np.exp(-1j * p * x) + r * np.exp(1j * p * x)
    phase = np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    norm = np.linalg.norm(v)
    return complex(phase / norm), complex(r * phase / norm)


def solve_goniometric_momenta(spec: WalkSpec, tol: float = DEFAULT_TOL,
                              _refine: int = 1) -> list[GoniometricMode]:
    """All modes with energy in [-2, 2], ascending in momentum."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    n, left, right = spec.n_links, spec.left_loop, spec.right_loop
    roots = None
    refine = _refine
    while roots is None:
        roots = _goniometric_roots(spec, tol, refine)
        refine *= 4
        if refine > 256:
            raise BracketingFailure(f"could not isolate momenta for {spec}")
    ps = list(roots)
    if _edge_linear(n, left - 1.0, right - 1.0):
        ps.insert(0, 0.0)
    if _edge_linear(n, -left - 1.0, -right - 1.0):
        ps.append(float(np.pi))
    modes = []
    for p in ps:
        a, b = _plane_wave_amplitudes(spec, p)
        modes.append(GoniometricMode(float(p), float(-2.0 * np.cos(p)), a, b))
    return modes


# -- hyperbolic roots ---------------------------------------------------------

def _hyperbolic_lower(n: int, left: float, right: float, refine: int):
    """Roots q > 0 of the boundary condition for modes below -2 (None on ambiguity)."""
    if max(left, right) <= 1.0:
        return []
    qmax = math.log(max(left, right)) + 0.5
    pts = [np.logspace(-9, math.log10(qmax), 60 * refine),
           np.linspace(0, qmax, 8 * (n + 1) * refine + 1)[1:]]
    for x in (left, right):
        if x > 1:
            lx = math.log(x)
            pts.append(lx + np.array([-1e-3, -1e-6, -1e-9, 0.0, 1e-9, 1e-6, 1e-3]) * lx)
    grid = np.unique(np.concatenate(pts))
    grid = grid[grid > 0]

    if left == right:
        # (R-y) = s y^-N (R - 1/y): symmetric/antisymmetric pair, one root each
        funcs = [(s, lambda q, s=s: (right - np.exp(q))
                  - s * np.exp(-n * q) * (right - np.exp(-q))) for s in (1.0, -1.0)]
    else:
        funcs = [(0.0, lambda q: (right - np.exp(q)) * (left - np.exp(q))
                  - np.exp(-2 * n * q) * (right - np.exp(-q)) * (left - np.exp(-q)))]
    out = []
    for s, f in funcs:
        vals = f(grid)
        # sign flips buried in rounding noise next to the trivial root y = 1
        noise = 1e-13 * (1 + abs(left)) * (1 + abs(right))
        vals = np.where(np.abs(vals) < noise, 0.0, vals)
        keep = vals != 0
        g, vals = grid[keep], vals[keep]
        sg = np.sign(vals)
        idx = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
        if len(idx):
            qs = _bisect(f, g[idx], g[idx + 1], 1e-15)
            out.extend((float(q), s) for q in qs)
    if len(out) > 2:
        return None
    return sorted(out)


def _hyperbolic_coefficients(n: int, left: float, right: float, q: float,
                             s: float) -> tuple[float, float]:
    """(alpha, beta) of v(x) = alpha e^{-qx} + beta e^{-q(N-x)}, normalized."""
    y = math.exp(q)
    damp = math.exp(-n * q)
    if s != 0.0:
        alpha, beta = 1.0, -s
    else:
        from_left = np.array([damp * (1 / y - left), left - y])
        from_right = np.array([right - y, damp * (1 / y - right)])
        alpha, beta = max((from_left, from_right), key=np.linalg.norm)
    x = np.arange(n + 1)
    v = alpha * np.exp(-q * x) + beta * np.exp(-q * (n - x))
    norm = np.linalg.norm(v)
    return float(alpha / norm), float(beta / norm)


def solve_hyperbolic_rates(spec: WalkSpec, tol: float = DEFAULT_TOL,
                           _refine: int = 1) -> list[HyperbolicMode]:
    """Modes outside [-2, 2]: below the band for loops > 1, above it for loops < -1."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    n, left, right = spec.n_links, spec.left_loop, spec.right_loop
    modes = []
    for sign in (1.0, -1.0):
        roots = _hyperbolic_lower(n, sign * left, sign * right, _refine)
        if roots is None:
            raise BracketingFailure(f"more than two hyperbolic roots bracketed for {spec}")
        for q, s in roots:
            alpha, beta = _hyperbolic_coefficients(n, sign * left, sign * right, q, s)
            c, d = alpha, beta * math.exp(-n * q)
            modes.append(HyperbolicMode(q, -sign * 2.0 * math.cosh(q), c, d,
                                        alternating=sign < 0))
    return sorted(modes, key=lambda m: m.energy)


# -- closed forms -------------------------------------------------------------

def _near(x: float, target: float) -> bool:
    return abs(x - target) < _CLOSED_FORM_SWITCH


def closed_form_case(spec: WalkSpec) -> str | None:
    left, right = spec.left_loop, spec.right_loop
    if _near(left, 1) and _near(right, 1):
        return "(1,1)"
    if _near(left, -1) and _near(right, -1):
        return "(-1,-1)"
    if (_near(left, 1) and right == 0) or (left == 0 and _near(right, 1)):
        return "(1,0)"
    if left == 0 and right == 0:
        return "(0,0)"
    if max(left, right) > 1 and abs(left * right - 1) < 1e-12:
        return "(B,1/B)"
    return None


def closed_form_modes(spec: WalkSpec) -> list[Mode] | None:
    case = closed_form_case(spec)
    if case is None:
        return None
    n = spec.n_links
    if case == "(1,1)":
        ps = [k * np.pi / (n + 1) for k in range(n + 1)]
    elif case == "(-1,-1)":
        ps = [k * np.pi / (n + 1) for k in range(1, n + 2)]
    elif case == "(1,0)":
        ps = [np.pi * (2 * k + 1) / (2 * n + 3) for k in range(n + 1)]
    elif case == "(0,0)":
        ps = [np.pi * k / (n + 2) for k in range(1, n + 2)]
    else:
        ps = [k * np.pi / (n + 1) for k in range(1, n + 1)]
    modes: list[Mode] = []
    for p in ps:
        a, b = _plane_wave_amplitudes(spec, p)
        modes.append(GoniometricMode(float(p), float(-2.0 * np.cos(p)), a, b))
    if case == "(B,1/B)":
        bias = max(spec.left_loop, spec.right_loop)
        q = math.log(bias)
        left, right = spec.left_loop, spec.right_loop
        alpha, beta = _hyperbolic_coefficients(n, left, right, q, 0.0)
        modes.append(HyperbolicMode(q, -(bias + 1.0 / bias), alpha,
                                    beta * math.exp(-n * q)))
    return sorted(modes, key=lambda m: m.energy)


# -- reports ------------------------------------------------------------------

def _report(modes, method, **kw) -> SpectralReport:
    modes = tuple(sorted(modes, key=lambda m: m.energy))
    ev = np.array([m.energy for m in modes])
    gap = float(ev[1] - ev[0]) if len(ev) > 1 else 0.0
    return SpectralReport(ev, modes, max(gap, 0.0), method, **kw)


def _root_modes(spec: WalkSpec, tol: float) -> list[Mode]:
    for refine in (1, 4, 16, 64):
        modes = (solve_goniometric_momenta(spec, tol, refine)
                 + solve_hyperbolic_rates(spec, tol, refine))
        if len(modes) == spec.dim:
            return modes
    raise BracketingFailure(
        f"{spec}: found {len(modes)} modes, expected {spec.dim}; tolerance too coarse")


def analytic_spectrum(spec: WalkSpec, tol: float = DEFAULT_TOL) -> SpectralReport:
    if tol <= 0:
        raise DomainError("tol must be positive")
    closed = closed_form_modes(spec)
    if closed is None:
        return _report(_root_modes(spec, tol), "analytic")
    exact_case = closed_form_case(spec)
    try:
        found = _root_modes(spec, tol)
    except BracketingFailure:
        # near L, R -> 1 the condition is singular; the closed form stands alone
        return _report(closed, "analytic", closed_form=exact_case)
    a = np.sort([m.energy for m in closed])
    b = np.sort([m.energy for m in found])
    return _report(closed, "analytic", closed_form=exact_case,
                   cross_check=float(np.max(np.abs(a - b))))


def _is_tridiagonal(h: np.ndarray) -> bool:
    n = h.shape[0]
    if n < 3:
        return True
    return not np.any(np.triu(h, 2)) and not np.any(np.tril(h, -2))


def numeric_spectrum(matrix) -> SpectralReport:
    """Eigenvalue oracle: LAPACK on the matrix, modes tagged by energy alone."""
    h = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("matrix must be square")
    if not np.allclose(h, h.T, atol=1e-12):
        raise DomainError("matrix must be symmetric")
    try:
        if _is_tridiagonal(h) and h.shape[0] > 1:
            ev = eigh_tridiagonal(np.diag(h).copy(), np.diag(h, 1).copy(), eigvals_only=True)
        else:
            ev = eigh(h, eigvals_only=True)
    except LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    modes: list[Mode] = []
    for e in np.sort(ev):
        if e < -2 - EDGE_TOL:
            modes.append(HyperbolicMode(float(np.arccosh(-e / 2)), float(e)))
        elif e > 2 + EDGE_TOL:
            modes.append(HyperbolicMode(float(np.arccosh(e / 2)), float(e), alternating=True))
        else:
            modes.append(GoniometricMode(float(np.arccos(np.clip(-e / 2, -1, 1))), float(e)))
    return _report(modes, "numeric")


# -- eigenvectors -------------------------------------------------------------

def mode_vector(spec: WalkSpec, mode: Mode) -> np.ndarray:
    """Normalized real eigenvector for an analytic mode."""
    n = spec.n_links
    x = np.arange(n + 1)
    if isinstance(mode, GoniometricMode):
        p = mode.momentum
        if p == 0.0:
            v = 1.0 + (1.0 - spec.left_loop) * x
        elif p == np.pi:
            v = (-1.0) ** x * (1.0 + (1.0 + spec.left_loop) * x)
        else:
            a, b = mode.amplitude_a, mode.amplitude_b
            if a is None:
                a, b = _plane_wave_amplitudes(spec, p)
            v = np.real(a * np.exp(-1j * p * x) + b * np.exp(1j * p * x))
    else:
        q = mode.rate
        c, d = mode.amplitude_c, mode.amplitude_d
        # d e^{qx} written as (d e^{qN}) e^{-q(N-x)} to avoid overflow
        beta = d * math.exp(n * q) if d != 0.0 else 0.0
        v = c * np.exp(-q * x) + beta * np.exp(-q * (n - x))
        if mode.alternating:
            v = v * (-1.0) ** x
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    return v if v[np.argmax(np.abs(v))] > 0 else -v


def mode_residual(spec: WalkSpec, mode: Mode) -> float:
    v = mode_vector(spec, mode)
    return float(np.linalg.norm(build_walk_matrix(spec) @ v - mode.energy * v))


def endpoint_amplitudes(spec: WalkSpec, mode_index: int,
                        tol: float = DEFAULT_TOL) -> tuple[float, float]:
    report = analytic_spectrum(spec, tol)
    if not -len(report.modes) <= mode_index < len(report.modes):
        raise IndexError(f"mode index {mode_index} out of range for {len(report.modes)} modes")
    v = mode_vector(spec, report.modes[mode_index])
    return float(v[0]), float(v[-1])


def biased_walk(n: int, bias: float) -> tuple[np.ndarray, np.ndarray]:
    """Sum over links of the rank-one terms (B|x> - |x+1>)(B<x| - <x+1|)."""
    if not bias > 1:
        raise DomainError(f"bias must exceed 1, got {bias!r}")
    h = np.zeros((n + 1, n + 1))
    for x in range(n):
        w = np.zeros(n + 1)
        w[x], w[x + 1] = bias, -1.0
        h += np.outer(w, w)
    ground = bias ** (np.arange(n + 1) - n)
    return h, ground / np.linalg.norm(ground)
