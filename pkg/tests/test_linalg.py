import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dynsub.linalg import (
    COND_LIMIT,
    count_solves,
    interface_solve,
    left_null_space_rows,
    null_space_rows,
    numerical_rank,
)
from dynsub.model import SingularInterfaceError


def test_solve_is_counted_only_inside_block():
    G = np.array([[2.0, 1.0], [1.0, 3.0]])
    interface_solve(G, np.eye(2))
    with count_solves() as c:
        X = interface_solve(G, np.eye(2))
        interface_solve(G, np.ones((2, 1)))
    assert c.count == 2 and c.sizes == [2, 2]
    assert np.allclose(G @ X, np.eye(2), atol=1e-15)


def test_singular_operator_raises():
    with pytest.raises(SingularInterfaceError, match="condition number"):
        interface_solve(np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(2))
    G = np.diag([1.0, 1.0 / (10 * COND_LIMIT)])
    with pytest.raises(SingularInterfaceError):
        interface_solve(G, np.eye(2), what="test operator")


def test_empty_solve():
    assert interface_solve(np.zeros((0, 0)), np.zeros((0, 3))).shape == (0, 3)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 5), elements=st.floats(-10, 10)))
def test_null_space_rows_annihilate(M):
    N = null_space_rows(M)
    assert N.shape[0] == 5 - numerical_rank(M)
    assert np.allclose(M @ N.T, 0, atol=1e-9 * max(1.0, np.abs(M).max()))
    assert np.allclose(N @ N.T, np.eye(N.shape[0]), atol=1e-12)
    W = left_null_space_rows(M.T)
    assert np.allclose(W @ M.T, 0, atol=1e-9 * max(1.0, np.abs(M).max()))
