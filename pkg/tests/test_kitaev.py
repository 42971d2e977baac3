from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import eigh

from clockforge.errors import Case1Error, DegeneracyWarning, DomainError, NotNoInstance
from clockforge.feynman import GateSequence
from clockforge.kitaev import (
    JordanBlock,
    VerifierInstance,
    acceptance_probabilities,
    block_hamiltonian,
    build_projectors,
    full_cross_check,
    full_hamiltonian,
    jordan_decompose,
    no_case_bound,
    q_block,
    reassemble,
    rotation_verifier,
)
from clockforge.scaling import fit_exponent


def case2_value(n):
    return 2 - 2 * np.cos(np.pi / (2 * n + 3))


def identity_instance(n):
    # witness qubit 0, ancilla 1 read out: every valid input is rejected
    return VerifierInstance(GateSequence.identity(2, n), (1,), 1, 0.0)


def random_projector(rng, dim, rank):
    a = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    q, _ = np.linalg.qr(a)
    return q @ q.conj().T


# -- projectors -------------------------------------------------------------------

def test_projector_examples():
    p, q = build_projectors(VerifierInstance(GateSequence.from_names(1, [("X", 0)]), (), 0, 0.0))
    assert np.allclose(p, 0) and np.allclose(q, np.diag([0, 1]))
    _, q = build_projectors(VerifierInstance(GateSequence.identity(1, 1), (), 0, 0.0))
    assert np.allclose(q, np.diag([1, 0]))
    p, _ = build_projectors(VerifierInstance(GateSequence.identity(2, 1), (1,), 0, 0.0))
    assert np.linalg.matrix_rank(p) == 2
    assert np.allclose(np.diag(p), [0, 1, 0, 1])


def test_projectors_idempotent():
    for inst in (rotation_verifier(5, 0.1), rotation_verifier(4, 0.2, controlled=True)):
        p, q = build_projectors(inst)
        assert np.abs(p @ p - p).max() < 1e-10 and np.abs(q @ q - q).max() < 1e-10


def test_instance_validation():
    with pytest.raises(DomainError):
        VerifierInstance(GateSequence.identity(1, 2), (3,), 0, 0.1)
    with pytest.raises(DomainError):
        VerifierInstance(GateSequence.identity(1, 2), (), 0, 1.0)
    inst = VerifierInstance.from_dict({"circuit": {"qubits": 2, "gates": [{"name": "X", "targets": [1]}]},
                                       "ancillas": [1], "out": 1, "epsilon": 0.5})
    assert inst.ancillas == (1,) and inst.epsilon == 0.5


# -- Jordan decomposition ---------------------------------------------------------

def test_commuting_projectors():
    blocks = jordan_decompose(np.zeros((2, 2)), np.diag([0.0, 1.0]))
    assert sorted(b.case for b in blocks) == [1, 2]
    case1 = next(b for b in blocks if b.case == 1)
    assert abs(case1.v[0]) == pytest.approx(1)


def test_q_block_limits():
    assert np.allclose(q_block(1.0), [[0, 0], [0, 1]])
    assert np.allclose(q_block(0.0), [[1, 0], [0, 0]])
    for p in (0.1, 0.5, 0.9):
        m = q_block(p)
        assert np.allclose(m @ m, m) and m[0, 0] == pytest.approx(1 - p)


@given(st.integers(0, 5000), st.integers(2, 6))
def test_reassembly(seed, dim):
    rng = np.random.default_rng(seed)
    p = random_projector(rng, dim, int(rng.integers(1, dim)))
    q = random_projector(rng, dim, int(rng.integers(1, dim)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        blocks = jordan_decompose(p, q)
    pr, qr = reassemble(blocks)
    assert np.abs(pr - p).max() < 1e-10 and np.abs(qr - q).max() < 1e-10
    basis = np.column_stack([x for b in blocks for x in ([b.v] if b.kind == "1d" else [b.v, b.v_perp])])
    assert np.abs(basis.conj().T @ basis - np.eye(dim)).max() < 1e-10
    for b in blocks:
        if b.kind == "2d":
            assert 0 < b.p_v < 1
            assert np.vdot(b.v, q @ b.v).real == pytest.approx(1 - b.p_v, abs=1e-10)
            pair = np.column_stack([b.v, b.v_perp])
            assert np.abs(pair.conj().T @ q @ pair - q_block(b.p_v)).max() < 1e-10
            assert np.linalg.norm(p @ b.v) < 1e-10 and np.linalg.norm(p @ b.v_perp - b.v_perp) < 1e-10


def test_seeded_rank_two_example():
    rng = np.random.default_rng(2024)
    p, q = random_projector(rng, 4, 2), random_projector(rng, 4, 2)
    pr, qr = reassemble(jordan_decompose(p, q))
    assert np.abs(pr - p).max() < 1e-10 and np.abs(qr - q).max() < 1e-10


def test_degenerate_block_warns():
    c, s = np.cos(1e-6), np.sin(1e-6)
    v = np.array([c, s])
    p = np.diag([0.0, 1.0])
    q = np.outer(v, v)
    with pytest.warns(DegeneracyWarning):
        blocks = jordan_decompose(p, q, tol=1e-9 + 1e-12)
    assert all(b.kind == "1d" for b in blocks)


# -- block Hamiltonians -----------------------------------------------------------

def test_block_examples():
    e4 = eigh(block_hamiltonian(JordanBlock("1d", case=4), 3), eigvals_only=True)[0]
    assert e4 == pytest.approx(2 - 2 * np.cos(np.pi / 5), abs=1e-12)
    e2 = eigh(block_hamiltonian(JordanBlock("1d", case=2), 2), eigvals_only=True)[0]
    assert e2 == pytest.approx(2 - 2 * np.cos(np.pi / 7), abs=1e-12)
    assert e2 == pytest.approx(0.1981, abs=1e-4)
    w = eigh(block_hamiltonian(JordanBlock("2d", p_v=0.0), 6), eigvals_only=True)
    assert w[0] == pytest.approx(case2_value(6), abs=1e-12)
    assert w[1] == pytest.approx(case2_value(6), abs=1e-12)
    with pytest.raises(Case1Error):
        block_hamiltonian(JordanBlock("1d", case=1), 4)


def test_2d_perturbation_small():
    for n in (8, 16, 32):
        inst = rotation_verifier(n, 1 / n ** 2)
        blocks = jordan_decompose(*build_projectors(inst))
        two = [b for b in blocks if b.kind == "2d"]
        assert two and all(b.p_v == pytest.approx(1 / n ** 2, rel=1e-8) for b in two)
        e = eigh(block_hamiltonian(two[0], n), eigvals_only=True)[0]
        assert e >= case2_value(n) - n ** -2.5


# -- no and yes cases -------------------------------------------------------------

def test_identity_instance_bound():
    for n in (3, 6, 10):
        inst = identity_instance(n)
        assert {b.case for b in jordan_decompose(*build_projectors(inst))} == {2, 3}
        assert no_case_bound(inst) == pytest.approx(case2_value(n), abs=1e-12)


def test_not_no_instance():
    with pytest.raises(NotNoInstance):
        no_case_bound(rotation_verifier(4, 0.1, accept=True))


def test_acceptance_brute_force():
    acc = acceptance_probabilities(rotation_verifier(6, 0.2, controlled=True))
    assert acc["basis_inputs"]["000"] == pytest.approx(0, abs=1e-12)
    assert acc["basis_inputs"]["100"] == pytest.approx(0.2, abs=1e-12)
    assert acc["max_exact"] == pytest.approx(0.2, abs=1e-12)


def test_no_case_exponent_small_sizes():
    # exponent over N in {8, 16, 32, 64} at epsilon = 1/N^2
    pts = [(n, no_case_bound(rotation_verifier(n, 1 / n ** 2))) for n in (8, 16, 32, 64)]
    assert fit_exponent(pts)[0] == pytest.approx(-2, abs=0.1)


def test_no_case_scales_with_effective_length():
    pts = [(n, no_case_bound(rotation_verifier(n, 1 / n ** 2))) for n in (8, 16, 32, 64)]
    for n, e in pts:
        assert case2_value(n) - n ** -2.5 <= e <= case2_value(n)
    slope, intercept, _ = fit_exponent([(2 * n + 3, e) for n, e in pts])
    assert slope == pytest.approx(-2, abs=0.1)
    assert np.exp(intercept) > 0


# -- full cross-check -------------------------------------------------------------

def test_perfect_yes_instance():
    inst = VerifierInstance(GateSequence.from_names(1, [("X", 0)]), (), 0, 0.0)
    rep = full_cross_check(inst, 4)
    assert rep.lowest <= 1e-10
    assert rep.full_spectrum_match


@pytest.mark.parametrize("inst, n", [
    (VerifierInstance(GateSequence.identity(1, 1), (), 0, 0.0), 4),
    (VerifierInstance(GateSequence.from_names(2, [("H", 0), ("CNOT", 0, 1)]), (1,), 1, 0.5), 6),
    (identity_instance(5), None),
    (rotation_verifier(8, 1 / 64), None),
    (rotation_verifier(16, 1 / 256, controlled=True), None),
    (rotation_verifier(6, 0.1, accept=True), None),
])
def test_block_spectra_match_full(inst, n):
    rep = full_cross_check(inst, n)
    assert rep.max_mismatch < 1e-8
    assert len(rep.full_spectrum) == len(rep.block_spectrum)


def test_controlled_verifier_block_mix():
    rep = full_cross_check(rotation_verifier(8, 1 / 64, controlled=True))
    kinds = set(rep.block_kinds)
    assert {"case2", "case3", "case4"} <= kinds
    assert any(k.startswith("2d") for k in kinds)
    assert rep.to_dict()["full_spectrum_match"] is True


@pytest.mark.parametrize("n, eps", [(4, 0.1), (8, 1 / 64), (16, 0.01)])
@pytest.mark.parametrize("controlled", [False, True])
def test_yes_case_energy(n, eps, controlled):
    rep = full_cross_check(rotation_verifier(n, eps, controlled=controlled, accept=True))
    assert rep.history_energy <= eps / n + 1e-12
    assert rep.lowest <= rep.history_energy + 1e-12
    h = full_hamiltonian(rotation_verifier(n, eps, controlled=controlled, accept=True), init="per_ancilla")
    assert eigh(h.toarray(), eigvals_only=True)[0] <= eps / n + 1e-12


def test_padding_to_clock_length():
    inst = identity_instance(2)
    assert no_case_bound(inst, 7) == pytest.approx(case2_value(7), abs=1e-12)
    with pytest.raises(DomainError):
        full_hamiltonian(inst, 4, init="bogus")
