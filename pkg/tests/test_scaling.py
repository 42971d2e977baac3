from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import linregress

from clockforge.errors import DomainError
from clockforge.scaling import fit_exponent


@given(st.floats(-4, 4), st.floats(1e-3, 1e3), st.lists(st.integers(2, 5000), min_size=2, max_size=8, unique=True))
def test_exact_power_law(exponent, const, sizes):
    pts = [(n, const * n ** exponent) for n in sizes]
    slope, intercept, r2 = fit_exponent(pts)
    assert slope == pytest.approx(exponent, abs=1e-9)
    assert np.exp(intercept) == pytest.approx(const, rel=1e-8)
    assert r2 == pytest.approx(1, abs=1e-9)


def test_matches_linregress():
    rng = np.random.default_rng(7)
    sizes = np.array([8, 16, 32, 64, 128])
    vals = 3.0 * sizes ** -2.0 * np.exp(rng.normal(0, 0.05, len(sizes)))
    slope, intercept, r2 = fit_exponent(zip(sizes, vals))
    ref = linregress(np.log(sizes), np.log(vals))
    assert slope == pytest.approx(ref.slope, abs=1e-12)
    assert intercept == pytest.approx(ref.intercept, abs=1e-12)
    assert r2 == pytest.approx(ref.rvalue ** 2, abs=1e-12)


@pytest.mark.parametrize("points", [[(4, 1.0)], [(4, 1.0), (4, 2.0)], [(4, 0.0), (8, 1.0)], [(-1, 1), (2, 2)]])
def test_rejects_bad_input(points):
    with pytest.raises(DomainError):
        fit_exponent(points)


def test_listed_examples():
    assert fit_exponent([(2, 4), (4, 16), (8, 64)])[0] == pytest.approx(2.0, abs=1e-12)
    assert fit_exponent([(10, 1), (100, 0.01)])[0] == pytest.approx(-2.0, abs=1e-12)
