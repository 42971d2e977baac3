"""Pulse and domain-wall clocks as explicit qubit-chain operators."""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .operators import ChainBuilder, LabeledSparseOperator, check_dim

VARIANTS = ("hopping", "laplacian")


def _variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return variant


def build_pulse_clock(chain_length: int, variant: str = "hopping") -> LabeledSparseOperator:
    """Single excitation hopping along a chain of qubits.

    hopping:   -sum_x (|01><10| + |10><01|) on (x, x+1)
    laplacian:  sum_x (|01> - |10>)(<01| - <10|)
    """
    if chain_length < 2:
        raise DomainError("chain_length must be at least 2")
    _variant(variant)
    b = ChainBuilder(chain_length)
    for x in range(1, chain_length):
        if variant == "hopping":
            b.hop((x, x + 1), "01", "10", -1.0)
        else:
            b.transition((x, x + 1), "01", "10")
    return b.build()


def pulse_states(chain_length: int) -> list[int]:
    """Indices of |10..0>, |010..0>, ..., |0..01> ordered by excitation position."""
    return [1 << (chain_length - 1 - x) for x in range(chain_length)]


def domain_wall_chain(n: int) -> int:
    return n + 2


def domain_wall_states(n: int) -> list[int]:
    """Good states 1^k 0^(N+2-k), k = 1..N+1, ordered by wall position."""
    m = domain_wall_chain(n)
    return [int("1" * k + "0" * (m - k), 2) for k in range(1, n + 2)]


def build_domain_wall_clock(n: int, variant: str = "laplacian",
                            with_clock_check: bool = False) -> LabeledSparseOperator:
    """Unary clock on N+2 qubits; the wall moves by 100 <-> 110 on three sites."""
    if n < 1:
        raise DomainError("N must be at least 1")
    _variant(variant)
    m = domain_wall_chain(n)
    b = ChainBuilder(m)
    for x in range(1, n + 1):
        sites = (x, x + 1, x + 2)
        if variant == "hopping":
            b.hop(sites, "100", "110", -1.0)
        else:
            b.transition(sites, "100", "110")
    if with_clock_check:
        add_domain_wall_check(b, m)
    return b.build()


def add_domain_wall_check(b: ChainBuilder, m: int) -> None:
    for x in range(1, m):
        b.projector((x, x + 1), "01")
    b.projector((1,), "0")
    b.projector((m,), "1")


def clock_check_operator(n: int) -> LabeledSparseOperator:
    b = ChainBuilder(domain_wall_chain(n))
    add_domain_wall_check(b, domain_wall_chain(n))
    return b.build()


# -- Pauli-form oracles -------------------------------------------------------

_I = sp.identity(2, format="csr")
_X = sp.csr_matrix([[0.0, 1.0], [1.0, 0.0]])
_Y = sp.csr_matrix(np.array([[0.0, -1j], [1j, 0.0]]))
_Z = sp.csr_matrix([[1.0, 0.0], [0.0, -1.0]])


def _two_site(n: int, x: int, a, b):
    ops = [_I] * n
    ops[x - 1], ops[x] = a, b
    return reduce(lambda u, v: sp.kron(u, v, format="csr"), ops)


def pauli_pulse(chain_length: int, variant: str = "hopping") -> np.ndarray:
    """The same clocks written with Pauli products, built independently.

    hopping:   -1/2 sum (XX + YY)
    laplacian:  sum (I - XX)(I - ZZ)/2
    """
    _variant(variant)
    n = chain_length
    check_dim(2 ** n, 2 ** 12)
    dim = 2 ** n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    eye = sp.identity(dim, format="csr")
    for x in range(1, n):
        xx, yy, zz = _two_site(n, x, _X, _X), _two_site(n, x, _Y, _Y), _two_site(n, x, _Z, _Z)
        if variant == "hopping":
            h = h - 0.5 * (xx + yy)
        else:
            h = h + 0.5 * (eye - xx) @ (eye - zz)
    h = h.toarray()
    if np.abs(h.imag).max() > 1e-14:
        raise AssertionError("Pauli form should be real")
    return h.real
