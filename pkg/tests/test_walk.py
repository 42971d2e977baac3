from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clockforge.errors import DomainError
from clockforge.scaling import fit_exponent
from clockforge.walk import (
    GoniometricMode,
    HyperbolicMode,
    WalkSpec,
    analytic_spectrum,
    biased_walk,
    build_walk_matrix,
    case_table_count,
    endpoint_amplitudes,
    mode_residual,
    numeric_spectrum,
    solve_goniometric_momenta,
    solve_hyperbolic_rates,
)


def dense(spec):
    return np.linalg.eigvalsh(build_walk_matrix(spec))


# -- construction ---------------------------------------------------------------

def test_build_small_matrices():
    assert np.array_equal(build_walk_matrix(WalkSpec(1, 1, 0)), [[-1, -1], [-1, 0]])
    h = build_walk_matrix(WalkSpec(2, 0, 0))
    assert np.array_equal(np.diag(h), [0, 0, 0])
    assert np.array_equal(np.diag(h, 1), [-1, -1])
    h = build_walk_matrix(WalkSpec(4, 2, 0.5))
    assert np.array_equal(np.diag(h), [-2, 0, 0, 0, -0.5])
    assert np.array_equal(h, h.T)


def test_spec_validation():
    with pytest.raises(DomainError):
        WalkSpec(0, 1, 1)
    with pytest.raises(DomainError):
        WalkSpec(3, float("inf"), 1)


# -- goniometric and hyperbolic roots -------------------------------------------

@pytest.mark.parametrize("spec, expected", [
    (WalkSpec(3, 1, 1), [0, np.pi / 4, np.pi / 2, 3 * np.pi / 4]),
    (WalkSpec(2, 1, 0), [np.pi / 7, 3 * np.pi / 7, 5 * np.pi / 7]),
    (WalkSpec(3, 0, 0), [np.pi / 5, 2 * np.pi / 5, 3 * np.pi / 5, 4 * np.pi / 5]),
])
def test_goniometric_momenta(spec, expected):
    got = sorted(m.momentum for m in solve_goniometric_momenta(spec))
    assert np.allclose(got, expected, atol=1e-10)


def test_hyperbolic_examples():
    modes = solve_hyperbolic_rates(WalkSpec(10, 0.5, 2))
    assert len(modes) == 1
    assert modes[0].energy == pytest.approx(-2.5, abs=1e-12)
    assert solve_hyperbolic_rates(WalkSpec(10, 1, 1)) == []
    pair = solve_hyperbolic_rates(WalkSpec(12, 3, 3))
    assert len(pair) == 2
    ref = dense(WalkSpec(12, 3, 3))[:2]
    assert np.allclose(sorted(m.energy for m in pair), ref, atol=1e-12)
    # split around -(3 + 1/3) of order 3^-N
    split = abs(pair[0].energy - pair[1].energy)
    assert all(abs(m.energy + 10 / 3) < 1e-4 for m in pair)
    assert 3.0 ** -14 < split < 3.0 ** -9


# -- full spectra -----------------------------------------------------------------

def test_analytic_examples():
    rep = analytic_spectrum(WalkSpec(5, 2, 0.5))
    expected = np.sort(np.r_[-2.5, -2 * np.cos(np.arange(1, 6) * np.pi / 6)])
    assert np.allclose(rep.eigenvalues, expected, atol=1e-12)
    assert rep.closed_form is not None
    assert np.allclose(analytic_spectrum(WalkSpec(2, 1, 1)).eigenvalues, [-2, -1, 1], atol=1e-12)
    golden = (-1 - np.sqrt(5)) / 2, (-1 + np.sqrt(5)) / 2
    ev = analytic_spectrum(WalkSpec(1, 1, 0)).eigenvalues
    assert np.allclose(ev, golden, atol=1e-12)
    assert np.allclose(ev, [-2 * np.cos(np.pi / 5), -2 * np.cos(3 * np.pi / 5)], atol=1e-12)


def test_numeric_examples():
    assert np.allclose(numeric_spectrum(build_walk_matrix(WalkSpec(1, 0, 0))).eigenvalues, [-1, 1])
    assert np.allclose(numeric_spectrum(build_walk_matrix(WalkSpec(2, 1, 1))).eigenvalues, [-2, -1, 1])
    low = numeric_spectrum(build_walk_matrix(WalkSpec(10, 0.5, 2))).eigenvalues[0]
    assert abs(low + 2.5) < 1e-9


def test_numeric_rejects_asymmetric():
    with pytest.raises(DomainError):
        numeric_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


loops = st.floats(-2, 3).map(lambda x: round(4 * x) / 4)


@given(n=st.integers(1, 40), left=loops, right=loops)
def test_analytic_matches_numeric(n, left, right):
    spec = WalkSpec(n, left, right)
    rep = analytic_spectrum(spec)
    assert len(rep.eigenvalues) == n + 1
    assert np.max(np.abs(rep.eigenvalues - dense(spec))) < 1e-8
    assert rep.gap >= 0


@given(n=st.integers(2, 30), left=st.floats(-2.5, 3.5), right=st.floats(-2.5, 3.5))
def test_mode_vectors_are_eigenvectors(n, left, right):
    spec = WalkSpec(n, left, right)
    rep = analytic_spectrum(spec)
    assert max(mode_residual(spec, m) for m in rep.modes) < 1e-8


@pytest.mark.parametrize("n", [16, 64, 200])
@pytest.mark.parametrize("left, right, count", [(2, 3, 2), (2, 0.5, 1), (0.5, -1, 0), (1, 1, 0)])
def test_case_table(n, left, right, count):
    spec = WalkSpec(n, left, right)
    assert case_table_count(spec) == count
    assert analytic_spectrum(spec).n_hyperbolic_below == count


def test_closed_forms():
    n = 20
    k = np.arange(n + 1)
    assert np.allclose(analytic_spectrum(WalkSpec(n, 1, 1)).eigenvalues,
                       np.sort(-2 * np.cos(k * np.pi / (n + 1))), atol=1e-10)
    p10 = sorted(m.momentum for m in analytic_spectrum(WalkSpec(n, 1, 0)).modes)
    assert np.allclose(p10, np.pi * (2 * k + 1) / (2 * n + 3), atol=1e-10)
    p00 = sorted(m.momentum for m in analytic_spectrum(WalkSpec(n, 0, 0)).modes)
    assert np.allclose(p00, np.pi * (k + 1) / (n + 2), atol=1e-10)
    for b in (1.5, 2.0, 3.0):
        assert analytic_spectrum(WalkSpec(n, 1 / b, b)).eigenvalues[0] == pytest.approx(-(b + 1 / b), abs=1e-9)


def test_mirror_modes_above_band():
    rep = analytic_spectrum(WalkSpec(12, -3, -3))
    assert rep.n_hyperbolic_above == 2
    assert all(isinstance(m, HyperbolicMode) for m in rep.modes[-2:])
    assert isinstance(rep.modes[0], GoniometricMode)


def test_laplacian_gap_exponent():
    pts = [(n, analytic_spectrum(WalkSpec(n, 1, 1)).gap) for n in (16, 32, 64, 128, 256, 512, 1024)]
    assert fit_exponent(pts)[0] == pytest.approx(-2, abs=0.05)


# -- endpoint amplitudes and the biased walk --------------------------------------

def test_endpoint_amplitudes_scaling():
    ns = [16, 32, 64, 128, 256, 512]
    amps = [endpoint_amplitudes(WalkSpec(n, 1, 0), 0) for n in ns]
    left = fit_exponent([(n, abs(a)) for n, (a, _) in zip(ns, amps)])[0]
    right = fit_exponent([(n, abs(b)) for n, (_, b) in zip(ns, amps)])[0]
    assert left == pytest.approx(-0.5, abs=0.1)
    assert right == pytest.approx(-1.5, abs=0.1)


def test_endpoint_amplitude_examples():
    a, b = endpoint_amplitudes(WalkSpec(4, 1, 1), 0)
    assert abs(a) == pytest.approx(1 / np.sqrt(5)) and abs(b) == pytest.approx(1 / np.sqrt(5))
    a, b = endpoint_amplitudes(WalkSpec(6, 0.5, 2), 0)
    assert b / a == pytest.approx(2 ** 6, rel=1e-9)
    with pytest.raises(IndexError):
        endpoint_amplitudes(WalkSpec(4, 1, 1), 5)


def test_biased_walk():
    h, g = biased_walk(1, 2.0)
    assert np.allclose(g, [1 / np.sqrt(5), 2 / np.sqrt(5)])
    for n, b in [(5, 2.0), (8, 3.0), (12, 1.5)]:
        h, g = biased_walk(n, b)
        assert np.linalg.norm(h @ g) < 1e-12
        ref = (1 + b * b) * np.eye(n + 1) + b * build_walk_matrix(WalkSpec(n, 1 / b, b))
        assert np.allclose(h, ref, atol=1e-12)
    _, g = biased_walk(2, 1.000001)
    assert np.allclose(g, np.ones(3) / np.sqrt(3), atol=1e-5)
    h, _ = biased_walk(8, 3.0)
    w = np.linalg.eigvalsh(h)
    assert w[1] - w[0] >= 0.9 * (3.0 - 1) ** 2
    with pytest.raises(DomainError):
        biased_walk(4, 1.0)

