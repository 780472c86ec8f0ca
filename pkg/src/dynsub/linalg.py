"""Small numerical helpers shared by the coupling modules.

``interface_solve`` is the single entry point for the matrix inversions the
coupling methods perform; it is instrumented so tests and the benchmark can
count how many inversions a coupling call needs.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .model import SingularInterfaceError

COND_LIMIT = 1e12


@dataclass
class SolveCounter:
    count: int = 0
    sizes: list[int] = field(default_factory=list)


_counter: contextvars.ContextVar[SolveCounter | None] = contextvars.ContextVar(
    "solve_counter", default=None
)


@contextlib.contextmanager
def count_solves():
    """Count ``interface_solve`` calls made inside the ``with`` block."""
    c = SolveCounter()
    token = _counter.set(c)
    try:
        yield c
    finally:
        _counter.reset(token)


def interface_solve(G: np.ndarray, rhs: np.ndarray, what: str = "interface feed-through",
                    check: bool = True) -> np.ndarray:
    """Solve ``G X = rhs`` through an LU factorization.

    Raises SingularInterfaceError when ``G`` is singular or its condition
    number exceeds ``COND_LIMIT``.
    """
    c = _counter.get()
    if c is not None:
        c.count += 1
        c.sizes.append(G.shape[0])
    if G.shape[0] == 0:
        return np.zeros((0,) + rhs.shape[1:], dtype=np.result_type(G, rhs))
    if check:
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularInterfaceError(f"{what} singular (condition number {cond:.3g})")
    lu = sla.lu_factor(G, check_finite=False)
    return sla.lu_solve(lu, rhs, check_finite=False)


def rank_tol(M: np.ndarray, s: np.ndarray | None = None) -> float:
    """Standard numerical-rank threshold ``max(dim)·eps·sigma_max``."""
    if s is None:
        s = np.linalg.svd(M, compute_uv=False)
    smax = s[0] if s.size else 0.0
    return max(M.shape) * np.finfo(float).eps * smax


def numerical_rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rank_tol(M, s)))


def null_space_rows(M: np.ndarray) -> np.ndarray:
    """Orthonormal rows ``N`` with ``M @ N.T = 0`` (right nullspace, as rows)."""
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M)
    r = int(np.sum(s > rank_tol(M, s)))
    return vt[r:]


def left_null_space_rows(M: np.ndarray) -> np.ndarray:
    """Orthonormal rows ``N`` with ``N @ M = 0``."""
    return null_space_rows(M.T)
