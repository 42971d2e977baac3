"""Two-projector block analysis of the propagation Hamiltonian with init/out penalties.

P penalizes badly initialized ancillas, Q = U^dag |0><0|_out U penalizes
rejection. Jordan's lemma splits the data space into 1D and 2D blocks
invariant under both; in the clock-extended basis |t> U_t..U_1 |v> every
block turns into a small walk on a line (or two coupled lines).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, null_space

from .errors import Case1Error, DegeneracyWarning, DomainError, NotNoInstance, SizeError
from .feynman import GateSequence, build_prop, circuit_unitary, path_basis
from .walk import WalkSpec, build_walk_matrix

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class VerifierInstance:
    circuit: GateSequence
    ancillas: tuple = ()
    out: int = 0
    epsilon: float = 0.1

    def __post_init__(self):
        d = self.circuit.data_qubits
        anc = tuple(sorted(int(a) for a in self.ancillas))
        if any(not 0 <= a < d for a in anc) or not 0 <= self.out < d:
            raise DomainError("ancilla and output indices must name data qubits")
        if not 0 <= self.epsilon < 1:
            raise DomainError("epsilon must lie in [0, 1)")
        object.__setattr__(self, "ancillas", anc)

    @classmethod
    def from_dict(cls, data: dict) -> "VerifierInstance":
        return cls(GateSequence.from_dict(data["circuit"]), tuple(data.get("ancillas", ())),
                   int(data.get("out", 0)), float(data.get("epsilon", 0.1)))


def _qubit_projector(d: int, qubit: int, value: int) -> np.ndarray:
    idx = np.arange(2 ** d)
    bit = (idx >> (d - 1 - qubit)) & 1
    return np.diag((bit == value).astype(float))


def build_projectors(instance: VerifierInstance) -> tuple[np.ndarray, np.ndarray]:
    d = instance.circuit.data_qubits
    if 2 ** d > 2 ** 12:
        raise SizeError("projectors limited to 12 data qubits")
    dim = 2 ** d
    idx = np.arange(dim)
    good = np.ones(dim, dtype=bool)
    for a in instance.ancillas:
        good &= ((idx >> (d - 1 - a)) & 1) == 0
    p = np.eye(dim) - np.diag(good.astype(float)) if instance.ancillas else np.zeros((dim, dim))
    u = circuit_unitary(instance.circuit)
    q = u.conj().T @ _qubit_projector(d, instance.out, 0) @ u
    return p.astype(complex), q


@dataclass(frozen=True)
class JordanBlock:
    kind: str
    case: int | None = None
    p_v: float | None = None
    v: np.ndarray = field(default=None, repr=False)
    v_perp: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return 1 if self.kind == "1d" else 2


def _orth(vectors: np.ndarray) -> np.ndarray:
    if vectors.shape[1] == 0:
        return vectors
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, s > 1e-8]


def jordan_decompose(p: np.ndarray, q: np.ndarray, tol: float = DEFAULT_TOL) -> list[JordanBlock]:
    """Blocks ordered: ker P part (cases 1, 2 and 2D) first, then cases 3 and 4."""
    dim = p.shape[0]
    wp, vp = eigh(p)
    ker, rng = vp[:, wp < 0.5], vp[:, wp >= 0.5]
    blocks: list[JordanBlock] = []
    perps = []
    if ker.shape[1]:
        mu, w = eigh(ker.conj().T @ q @ ker)
        for m, col in zip(mu, w.T):
            v = ker @ col
            dist = min(m, 1 - m)
            if 1e-12 < dist <= tol:
                warnings.warn(f"Jordan block with p_v = {1 - m:.3e} treated as degenerate",
                              DegeneracyWarning, stacklevel=2)
            if m <= tol:
                blocks.append(JordanBlock("1d", case=1, v=v))
            elif m >= 1 - tol:
                blocks.append(JordanBlock("1d", case=2, v=v))
            else:
                perp = (q @ v - m * v) / np.sqrt(m * (1 - m))
                perps.append(perp)
                blocks.append(JordanBlock("2d", p_v=float(1 - m), v=v, v_perp=perp))
    if rng.shape[1]:
        rest = rng
        if perps:
            used = np.column_stack(perps)
            rest = _orth(rng - used @ (used.conj().T @ rng))
        if rest.shape[1]:
            lam, w = eigh(rest.conj().T @ q @ rest)
            for m, col in zip(lam, w.T):
                if min(m, 1 - m) > 1e-6:
                    raise ArithmeticError(f"range(P) remainder not Q-invariant (eigenvalue {m})")
                blocks.append(JordanBlock("1d", case=4 if m > 0.5 else 3, v=rest @ col))
    if sum(b.dim for b in blocks) != dim:
        raise ArithmeticError("Jordan blocks do not span the space")
    return blocks


def reassemble(blocks: list[JordanBlock]) -> tuple[np.ndarray, np.ndarray]:
    """P and Q rebuilt from the block data alone."""
    dim = len(blocks[0].v)
    p = np.zeros((dim, dim), dtype=complex)
    q = np.zeros((dim, dim), dtype=complex)
    for b in blocks:
        if b.kind == "1d":
            pv, qv = {1: (0, 0), 2: (0, 1), 3: (1, 0), 4: (1, 1)}[b.case]
            outer = np.outer(b.v, b.v.conj())
            p += pv * outer
            q += qv * outer
        else:
            basis = np.column_stack([b.v, b.v_perp])
            p += basis @ np.diag([0.0, 1.0]) @ basis.conj().T
            q += basis @ q_block(b.p_v) @ basis.conj().T
    return p, q


def q_block(p_v: float) -> np.ndarray:
    """Q in the (|v>, |v_perp>) basis: |v><v| - sqrt(p)(sqrt(p) Z - sqrt(1-p) X)."""
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.diag([1.0, 0.0]) - np.sqrt(p_v) * (np.sqrt(p_v) * z - np.sqrt(1 - p_v) * x)


def _laplacian(n: int) -> np.ndarray:
    return 2 * np.eye(n + 1) + build_walk_matrix(WalkSpec(n, 1, 1))


def block_hamiltonian(block: JordanBlock, n: int, allow_case1: bool = False) -> np.ndarray:
    if n < 1:
        raise DomainError("N must be positive")
    if block.kind == "1d":
        loops = {2: (1, 0), 3: (0, 1), 4: (0, 0), 1: (1, 1)}[block.case]
        if block.case == 1 and not allow_case1:
            raise Case1Error("case-1 block: a valid input is accepted with certainty")
        return 2 * np.eye(n + 1) + build_walk_matrix(WalkSpec(n, *loops))
    # basis |v>_0..|v>_N followed by |v_perp>_0..|v_perp>_N
    h = np.zeros((2 * (n + 1), 2 * (n + 1)))
    h[: n + 1, : n + 1] = _laplacian(n)
    h[n + 1:, n + 1:] = _laplacian(n)
    h[n + 1, n + 1] += 1.0
    pair = [n, 2 * n + 1]
    h[np.ix_(pair, pair)] += q_block(block.p_v)
    return h


def block_spectra(blocks: list[JordanBlock], n: int, allow_case1: bool = True) -> np.ndarray:
    return np.sort(np.concatenate([eigh(block_hamiltonian(b, n, allow_case1), eigvals_only=True)
                                   for b in blocks]))


def acceptance_probabilities(instance: VerifierInstance) -> dict:
    """Exact maximum acceptance over valid inputs and the basis-input brute force."""
    p, q = build_projectors(instance)
    d = instance.circuit.data_qubits
    valid = np.nonzero(np.abs(np.diag(p)) < 0.5)[0]
    accept_op = np.eye(2 ** d) - q
    basis = {format(i, f"0{d}b"): float(accept_op[i, i].real) for i in valid}
    ker = np.eye(2 ** d)[:, valid]
    exact = float(eigh(ker.T @ accept_op @ ker, eigvals_only=True)[-1])
    return {"basis_inputs": basis, "max_basis": max(basis.values()), "max_exact": exact}


def _clock_length(instance: VerifierInstance, n: int | None) -> GateSequence:
    circuit = instance.circuit
    return circuit if n is None else circuit.padded(n)


def no_case_bound(instance: VerifierInstance, n: int | None = None,
                  tol: float = DEFAULT_TOL) -> float:
    """Smallest ground energy over all Jordan blocks of a no-instance."""
    acc = acceptance_probabilities(instance)
    if acc["max_exact"] > instance.epsilon + 1e-10:
        raise NotNoInstance(f"acceptance {acc['max_exact']:.3e} exceeds epsilon {instance.epsilon}")
    circuit = _clock_length(instance, n)
    blocks = jordan_decompose(*build_projectors(instance), tol)
    seen: dict = {}
    for b in blocks:
        key = (b.kind, b.case, None if b.p_v is None else round(b.p_v, 12))
        if key not in seen:
            seen[key] = eigh(block_hamiltonian(b, circuit.n_gates), eigvals_only=True)[0]
    return float(min(seen.values()))


def full_hamiltonian(instance: VerifierInstance, n: int | None = None,
                     init: str = "modified") -> sp.csr_matrix:
    """H_prop + H_init + H_out on clock (x) data, built without the Jordan blocks."""
    circuit = _clock_length(instance, n)
    steps, d = circuit.n_gates, circuit.data_qubits
    if (steps + 1) * 2 ** d > 2 ** 16:
        raise SizeError("full cross-check limited to 2^16 dimensions")
    first = sp.csr_matrix(([1.0], ([0], [0])), shape=(steps + 1, steps + 1))
    last = sp.csr_matrix(([1.0], ([steps], [steps])), shape=(steps + 1, steps + 1))
    if init == "modified":
        p, _ = build_projectors(instance)
        h_init = sp.kron(first, sp.csr_matrix(p))
    elif init == "per_ancilla":
        h_init = sum((sp.kron(first, sp.csr_matrix(_qubit_projector(d, a, 1)))
                      for a in instance.ancillas), sp.csr_matrix(((steps + 1) * 2 ** d,) * 2))
    else:
        raise DomainError("init must be 'modified' or 'per_ancilla'")
    h_out = sp.kron(last, sp.csr_matrix(_qubit_projector(d, instance.out, 0)))
    return (build_prop(circuit) + h_init + h_out).tocsr()


@dataclass(frozen=True)
class CrossCheckReport:
    full_spectrum: np.ndarray
    block_spectrum: np.ndarray
    max_mismatch: float
    full_spectrum_match: bool
    lowest: float
    history_energy: float
    yes_bound: float
    block_kinds: tuple

    def to_dict(self) -> dict:
        return {"blocks": list(self.block_kinds), "lowest": self.lowest,
                "history_energy": self.history_energy, "yes_bound": self.yes_bound,
                "max_mismatch": self.max_mismatch,
                "full_spectrum_match": self.full_spectrum_match}


def best_history_energy(instance: VerifierInstance, h: sp.csr_matrix, circuit: GateSequence) -> float:
    """Rayleigh quotient of the history state built on the most accepted valid witness."""
    p, q = build_projectors(instance)
    d = circuit.data_qubits
    valid = np.nonzero(np.abs(np.diag(p)) < 0.5)[0]
    ker = np.eye(2 ** d)[:, valid]
    _, w = eigh(ker.T @ (np.eye(2 ** d) - q) @ ker)
    phi = ker @ w[:, -1]
    psi = path_basis(circuit, phi).sum(axis=1)
    psi /= np.linalg.norm(psi)
    return float(np.vdot(psi, h @ psi).real)


def full_cross_check(instance: VerifierInstance, n: int | None = None,
                     tol: float = DEFAULT_TOL, atol: float = 1e-8) -> CrossCheckReport:
    circuit = _clock_length(instance, n)
    h = full_hamiltonian(instance, n)
    full = np.sort(eigh(h.toarray(), eigvals_only=True))
    blocks = jordan_decompose(*build_projectors(instance), tol)
    from_blocks = block_spectra(blocks, circuit.n_gates)
    mismatch = float(np.max(np.abs(full - from_blocks)))
    kinds = tuple(f"2d(p={b.p_v:.6g})" if b.kind == "2d" else f"case{b.case}" for b in blocks)
    return CrossCheckReport(full, from_blocks, mismatch, mismatch <= atol, float(full[0]),
                            best_history_energy(instance, h, circuit),
                            instance.epsilon / circuit.n_gates, kinds)


# -- toy verifiers --------------------------------------------------------------

def rotation_verifier(n: int, epsilon: float, controlled: bool = False,
                      accept: bool = False) -> VerifierInstance:
    """Ancilla rotated in n equal slices so that a valid witness is accepted with
    probability epsilon (or 1 - epsilon when `accept`).

    Uncontrolled: qubits (witness, ancilla=out). Controlled: qubits
    (witness, ancilla=out, ancilla); the rotation fires only on witness 1, so
    witness 0 is rejected with certainty.
    """
    from .feynman import Gate, ry

    target = 1 - epsilon if accept else epsilon
    angle = 2 * np.arcsin(np.sqrt(target))
    if controlled:
        r = ry(angle / n)
        cr = np.eye(4, dtype=complex)
        cr[2:, 2:] = r
        gates = tuple(Gate(cr, (0, 1)) for _ in range(n))
        return VerifierInstance(GateSequence(3, gates), (1, 2), 1, epsilon)
    gates = tuple(Gate(ry(angle / n), (1,)) for _ in range(n))
    return VerifierInstance(GateSequence(2, gates), (1,), 1, epsilon)
