"""Feynman and propagation Hamiltonians for toy circuits on an abstract clock.

Joint basis index = t * 2^d + data, with data qubit 0 the most significant bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .operators import check_dim

SQ2 = 1 / np.sqrt(2)
NAMED_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": SQ2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}
MAX_DATA_QUBITS = 6


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    matrix: np.ndarray
    targets: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.targets)
        if k not in (1, 2) or m.shape != (2 ** k, 2 ** k):
            raise DomainError("gates act on one or two qubits")
        if len(set(self.targets)) != k:
            raise DomainError("gate targets must be distinct")
        if not np.allclose(m.conj().T @ m, np.eye(2 ** k), atol=1e-12):
            raise DomainError("gate matrix is not unitary")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))


@dataclass(frozen=True)
class GateSequence:
    data_qubits: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.data_qubits <= MAX_DATA_QUBITS:
            raise DomainError(f"data_qubits must be in 1..{MAX_DATA_QUBITS}")
        gates = tuple(self.gates)
        if not gates:
            raise DomainError("a circuit needs at least one gate")
        for g in gates:
            if max(g.targets) >= self.data_qubits:
                raise DomainError(f"gate target {g.targets} outside {self.data_qubits} qubits")
        object.__setattr__(self, "gates", gates)

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    @classmethod
    def from_names(cls, d: int, names: list) -> "GateSequence":
        """Shorthand: [("X", 0), ("CNOT", 0, 1), ...]."""
        return cls(d, tuple(Gate(NAMED_GATES[n], tuple(t)) for n, *t in names))

    @classmethod
    def identity(cls, d: int, n: int) -> "GateSequence":
        return cls(d, tuple(Gate(NAMED_GATES["I"], (0,)) for _ in range(n)))

    @classmethod
    def from_dict(cls, data: dict) -> "GateSequence":
        gates = []
        for g in data["gates"]:
            if "name" in g:
                m = NAMED_GATES[g["name"]]
            else:
                m = np.array([[complex(*z) if isinstance(z, list) else complex(z) for z in row]
                              for row in g["matrix"]])
            gates.append(Gate(m, tuple(g["targets"])))
        return cls(int(data["qubits"]), tuple(gates))

    @classmethod
    def from_json(cls, text: str) -> "GateSequence":
        return cls.from_dict(json.loads(text))

    def padded(self, total: int) -> "GateSequence":
        """Append identity gates until the circuit has `total` steps."""
        if total < self.n_gates:
            raise DomainError("cannot pad to fewer steps than gates")
        extra = tuple(Gate(NAMED_GATES["I"], (0,)) for _ in range(total - self.n_gates))
        return GateSequence(self.data_qubits, self.gates + extra)


def gate_unitary(gate: Gate, d: int) -> np.ndarray:
    """Full 2^d x 2^d unitary of a gate embedded among d qubits."""
    rest = [q for q in range(d) if q not in gate.targets]
    full = np.kron(gate.matrix, np.eye(2 ** len(rest)))
    # full acts on qubit order targets + rest; permute back to 0..d-1
    order = list(gate.targets) + rest
    t = full.reshape([2] * (2 * d))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [d + i for i in inv])
    return t.reshape(2 ** d, 2 ** d)


def step_unitaries(circuit: GateSequence, padding: int = 0) -> list[np.ndarray]:
    d = circuit.data_qubits
    us = [gate_unitary(g, d) for g in circuit.gates]
    return us + [np.eye(2 ** d, dtype=complex)] * padding


def circuit_unitary(circuit: GateSequence) -> np.ndarray:
    return reduce(lambda acc, u: u @ acc, step_unitaries(circuit), np.eye(2 ** circuit.data_qubits))


def _dims(circuit: GateSequence, padding: int) -> tuple[int, int]:
    if padding < 0:
        raise DomainError("padding must be nonnegative")
    steps = circuit.n_gates + padding
    check_dim((steps + 1) * 2 ** circuit.data_qubits)
    return steps, 2 ** circuit.data_qubits


def _clock_op(n_clock: int, i: int, j: int) -> sp.csr_matrix:
    return sp.csr_matrix(([1.0], ([i], [j])), shape=(n_clock, n_clock))


def build_feynman(circuit: GateSequence, padding: int = 0) -> sp.csr_matrix:
    """H_F = sum_t |t><t-1| (x) U_t + h.c. (positive hopping amplitudes)."""
    steps, dd = _dims(circuit, padding)
    h = sp.csr_matrix(((steps + 1) * dd, (steps + 1) * dd), dtype=complex)
    for t, u in enumerate(step_unitaries(circuit, padding), start=1):
        term = sp.kron(_clock_op(steps + 1, t, t - 1), sp.csr_matrix(u), format="csr")
        h = h + term + term.conj().T
    return h.tocsr()


def build_prop(circuit: GateSequence, padding: int = 0) -> sp.csr_matrix:
    """H_prop = sum_t (|t-1><t-1| + |t><t|) (x) I - |t><t-1| (x) U_t - h.c."""
    steps, dd = _dims(circuit, padding)
    eye = sp.identity(dd, format="csr", dtype=complex)
    h = sp.csr_matrix(((steps + 1) * dd, (steps + 1) * dd), dtype=complex)
    for t, u in enumerate(step_unitaries(circuit, padding), start=1):
        diag = _clock_op(steps + 1, t - 1, t - 1) + _clock_op(steps + 1, t, t)
        hop = sp.kron(_clock_op(steps + 1, t, t - 1), sp.csr_matrix(u), format="csr")
        h = h + sp.kron(diag, eye, format="csr") - hop - hop.conj().T
    return h.tocsr()


@dataclass(frozen=True)
class HistoryState:
    amplitudes: np.ndarray
    n_steps: int
    padding: int
    data_qubits: int

    def clock_block(self, t: int) -> np.ndarray:
        dd = 2 ** self.data_qubits
        return self.amplitudes[t * dd:(t + 1) * dd]

    def weight_from(self, t0: int) -> float:
        dd = 2 ** self.data_qubits
        return float(np.sum(np.abs(self.amplitudes[t0 * dd:]) ** 2))


def basis_state(bits, d: int) -> np.ndarray:
    bits = [int(b) for b in bits]
    if len(bits) != d:
        raise DomainError(f"input must have {d} bits")
    v = np.zeros(2 ** d, dtype=complex)
    v[int("".join(map(str, bits)), 2)] = 1.0
    return v


def computational_path(circuit: GateSequence, phi: np.ndarray, padding: int = 0) -> list[np.ndarray]:
    """|phi_t> = U_t ... U_1 |phi> for t = 0..N+A."""
    states = [np.asarray(phi, dtype=complex)]
    for u in step_unitaries(circuit, padding):
        states.append(u @ states[-1])
    return states


def path_basis(circuit: GateSequence, phi: np.ndarray, padding: int = 0) -> np.ndarray:
    """Columns |t>|phi_t>: the invariant subspace H_0 of the Feynman dynamics."""
    path = computational_path(circuit, phi, padding)
    dd = len(path[0])
    cols = np.zeros((len(path) * dd, len(path)), dtype=complex)
    for t, v in enumerate(path):
        cols[t * dd:(t + 1) * dd, t] = v
    return cols


def history_state(circuit: GateSequence, bits, padding: int = 0) -> HistoryState:
    phi = basis_state(bits, circuit.data_qubits)
    basis = path_basis(circuit, phi, padding)
    psi = basis.sum(axis=1) / np.sqrt(basis.shape[1])
    return HistoryState(psi, circuit.n_gates, padding, circuit.data_qubits)


def _initial(circuit: GateSequence, bits, padding: int) -> np.ndarray:
    steps = circuit.n_gates + padding
    psi = np.zeros((steps + 1) * 2 ** circuit.data_qubits, dtype=complex)
    psi[: 2 ** circuit.data_qubits] = basis_state(bits, circuit.data_qubits)
    return psi


def evolve(h, psi0: np.ndarray, times) -> np.ndarray:
    """Rows e^{-iHt} psi0 for each t, via full eigendecomposition."""
    hd = h.toarray() if sp.issparse(h) else np.asarray(h)
    w, v = np.linalg.eigh(hd)
    coef = v.conj().T @ psi0
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return (v @ (coef[:, None] * np.exp(-1j * np.outer(w, times)))).T


def cesaro_success(circuit: GateSequence, bits, t_max: float, samples: int,
                   padding: int = 0, from_step: int | None = None) -> float:
    """Time average of the probability of finding the clock at the final step.

    `from_step` widens the target to every clock value >= from_step (the
    "computation done" window of the padded clock).
    """
    if t_max <= 0 or samples < 1:
        raise DomainError("need t_max > 0 and samples >= 1")
    steps = circuit.n_gates + padding
    lo = steps if from_step is None else from_step
    dd = 2 ** circuit.data_qubits
    psi = evolve(build_feynman(circuit, padding), _initial(circuit, bits, padding),
                 np.linspace(0.0, t_max, samples))
    return float(np.mean(np.sum(np.abs(psi[:, lo * dd:]) ** 2, axis=1)))


def cesaro_limit(circuit: GateSequence, bits, padding: int = 0,
                 from_step: int | None = None, degeneracy_tol: float = 1e-9) -> float:
    """Infinite-time average: sum over eigenspaces of |P_E psi0|^2 restricted to the target."""
    steps = circuit.n_gates + padding
    lo = steps if from_step is None else from_step
    dd = 2 ** circuit.data_qubits
    w, v = np.linalg.eigh(build_feynman(circuit, padding).toarray())
    coef = v.conj().T @ _initial(circuit, bits, padding)
    total = 0.0
    start = 0
    for j in range(1, len(w) + 1):
        if j == len(w) or w[j] - w[j - 1] > degeneracy_tol:
            proj = v[lo * dd:, start:j] @ coef[start:j]
            total += float(np.vdot(proj, proj).real)
            start = j
    return total
