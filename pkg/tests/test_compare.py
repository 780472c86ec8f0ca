import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsub import DofLabel, FrfMatrix, compare_frf, max_rel_error, rel_error
from dynsub.model import ModelError

L = (DofLabel("A", "x"), DofLabel("A", "y"))


def frf(H, f=(1.0, 2.0)):
    return FrfMatrix(np.asarray(f), H, "accelerance", L, L)


def test_metric_values():
    a = np.array([1.0, 2.0, 0.0])
    b = np.array([1.1, 2.0, 0.0])
    r = rel_error(a, b)
    assert r[0] == pytest.approx(0.1 / 1.1)
    assert r[1] == 0.0 and r[2] == 0.0


def test_floor_limits_tiny_entries():
    a = np.array([1.0, 1e-20])
    b = np.array([1.0, 2e-20])
    assert rel_error(a, b)[1] == pytest.approx(1e-20 / 1e-12)


def test_nan_counts_as_failure():
    assert max_rel_error(np.array([np.nan]), np.array([1.0])) == np.inf


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False), min_size=1, max_size=20))
def test_metric_symmetric_and_bounded(z):
    a = np.array(z)
    b = a * 1.5 + 1.0
    assert np.array_equal(rel_error(a, b), rel_error(b, a))
    assert rel_error(a, a).max() == 0.0
    assert rel_error(a, b).max() <= 2.0


def test_compare_reports_location_and_reorders():
    H = np.ones((2, 2, 2), complex)
    H2 = H.copy()
    H2[1, 0, 1] = 1.5
    res = compare_frf(frf(H), frf(H2), 1e-3)
    assert not res.passed
    assert res.argmax == (2.0, "A:x", "A:y")
    assert res.report()["pass"] is False
    swapped = FrfMatrix(np.array([1.0, 2.0]), H2[:, ::-1, ::-1], "accelerance", L[::-1], L[::-1])
    assert compare_frf(frf(H2), swapped, 0.0).passed


def test_compare_grid_mismatch():
    H = np.ones((2, 2, 2), complex)
    with pytest.raises(ModelError, match="grids"):
        compare_frf(frf(H), frf(H, (1.0, 3.0)), 1e-8)
