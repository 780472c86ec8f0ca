"""Coupling-form similarity transformations and minimal-order reduction.

A coupling form has state vector ``[y_J'; y_J; x_I]`` obtained with

    T = [C_J A; C_J; N]

where ``C_J`` is the displacement output matrix of the interface DOFs. The
forms differ only in the internal-state block ``N``:

* UCF: rows of ``N`` span the nullspace of ``[C_J A; C_J]``; ``T`` is
  invertible whenever that matrix has full row rank.
* SACF: ``N B_J = 0`` so interface forces do not drive internal states, as the
  two-component state-space coupling of ``sjovall_couple`` requires.
* NCF: the least-squares projection of the UCF block onto the left nullspace
  of ``B_J``. Its ``T`` can be singular; that outcome is reported, not hidden.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .factory import partition_interface_first
from .interface import StateReductionMap, boolean_pinv, build_state_reduction
from .linalg import left_null_space_rows, null_space_rows, numerical_rank, rank_tol
from .model import (
    DERIV,
    IFACE,
    INTERNAL,
    DofLabel,
    ModelError,
    RankDeficiencyError,
    StateSpaceModel,
)

FORMS = ("UCF", "SACF", "NCF")


@dataclass(frozen=True, eq=False)
class CouplingFormTransform:
    kind: str
    T: np.ndarray
    N_block: np.ndarray
    condition_number: float
    rank_ok: bool
    ncf_residual: Optional[float] = None
    interface: tuple[DofLabel, ...] = ()

    def report(self) -> dict:
        return {
            "kind": self.kind,
            "condition_number": float(self.condition_number),
            "ncf_residual": None if self.ncf_residual is None else float(self.ncf_residual),
            "rank_ok": bool(self.rank_ok),
        }


def _prepare(m: StateSpaceModel, interface: Sequence[DofLabel]):
    if m.output_kind != "disp":
        raise ModelError("coupling forms are built from displacement models")
    interface = list(interface)
    nj = len(interface)
    if m.n_states < 2 * nj:
        raise ModelError(f"{m.n_states} states cannot host {nj} interface DOFs")
    pm, _ = partition_interface_first(m, interface)
    if pm.n_states:
        # exact power-of-two state scaling before building T
        A, sc = sla.matrix_balance(pm.A, permute=False, separate=True)
        sc = sc[0]
        pm = pm.replace(A=A, B=pm.B / sc[:, None], C=pm.C * sc[None, :])
    out_keys = [l.key for l in pm.outputs[:nj]]
    if out_keys != [l.key for l in interface]:
        raise ModelError("every interface DOF must be an output")
    CJ = pm.C[:nj]
    G = np.vstack([CJ @ pm.A, CJ])
    return pm, nj, CJ, G


def _interface_inputs(pm: StateSpaceModel, interface: Sequence[DofLabel]) -> np.ndarray:
    nj = len(interface)
    in_keys = [l.key for l in pm.inputs[:nj]]
    if in_keys != [l.key for l in interface]:
        raise ModelError("every interface DOF must also be an input")
    return pm.B[:, :nj]


def _transform(pm: StateSpaceModel, T: np.ndarray, nj: int,
               interface: Sequence[DofLabel]) -> StateSpaceModel:
    lu = sla.lu_factor(T)
    A = sla.lu_solve(lu, (T @ pm.A).T, trans=1).T
    C = sla.lu_solve(lu, pm.C.T, trans=1).T
    n = pm.n_states
    tags = (DERIV,) * nj + (IFACE,) * nj + (INTERNAL,) * (n - 2 * nj)
    labs = [l.with_kind("interface") for l in interface]
    dofs = tuple(labs) + tuple(labs) + (None,) * (n - 2 * nj)
    return pm.replace(A=A, B=T @ pm.B, C=C,
                      state_tags=tags, state_dofs=dofs).checked()


def _full_rank(T: np.ndarray) -> tuple[bool, float]:
    s = np.linalg.svd(T, compute_uv=False)
    ok = bool(s.size == 0 or s[-1] > rank_tol(T, s))
    cond = float(s[0] / s[-1]) if s.size and s[-1] > 0 else float("inf")
    return ok, cond


def ucf_transform(m: StateSpaceModel, interface: Sequence[DofLabel]):
    """Unconstrained coupling form. Returns ``(model, CouplingFormTransform)``."""
    pm, nj, CJ, G = _prepare(m, interface)
    if numerical_rank(G) < 2 * nj:
        raise RankDeficiencyError("interface output matrix rank deficient")
    N = null_space_rows(G)
    T = np.vstack([G, N])
    ok, cond = _full_rank(T)
    if not ok:
        raise RankDeficiencyError("interface output matrix rank deficient")
    tr = CouplingFormTransform("UCF", T, N, cond, ok, interface=tuple(interface))
    return _transform(pm, T, nj, interface), tr


def sacf_transform(m: StateSpaceModel, interface: Sequence[DofLabel]):
    """Coupling form whose internal states are not driven by interface inputs.

    The internal block is chosen inside the left nullspace ``W`` of ``B_J``:
    projecting ``W`` onto the orthogonal complement of ``[C_J A; C_J]`` and
    keeping its dominant left singular directions gives the subspace whose
    complement to the interface rows is best conditioned.
    """
    pm, nj, CJ, G = _prepare(m, interface)
    BJ = _interface_inputs(pm, interface)
    n = pm.n_states
    if numerical_rank(G) < 2 * nj:
        raise RankDeficiencyError("interface output matrix rank deficient")
    if numerical_rank(BJ) < nj:
        raise RankDeficiencyError("interface input matrix rank deficient")
    W = left_null_space_rows(BJ)
    Q = np.linalg.qr(G.T)[0]
    WP = W - (W @ Q) @ Q.T
    U, s, _ = np.linalg.svd(WP, full_matrices=False)
    k = n - 2 * nj
    if k and (s.size < k or s[k - 1] <= rank_tol(WP, s)):
        raise RankDeficiencyError(
            f"no full-rank internal subspace in the nullspace of B_J "
            f"(singular values {np.array2string(s, precision=3)})")
    N = U[:, :k].T @ W
    T = np.vstack([G, N])
    ok, cond = _full_rank(T)
    if not ok:
        raise RankDeficiencyError(f"SACF transformation singular (cond {cond:.3g})")
    tr = CouplingFormTransform("SACF", T, N, cond, ok, interface=tuple(interface))
    return _transform(pm, T, nj, interface), tr


def ncf_transform(m: StateSpaceModel, interface: Sequence[DofLabel]):
    """Least-squares coupling form ``N = N_C N_B^T (N_B N_B^T)^-1 N_B``.

    Returns ``(model, transform)``; on a rank-deficient ``T`` the model is
    ``None`` and ``transform.rank_ok`` is False. ``ncf_residual`` is
    ``max|N_C - N|``.
    """
    pm, nj, CJ, G = _prepare(m, interface)
    BJ = _interface_inputs(pm, interface)
    if numerical_rank(G) < 2 * nj:
        raise RankDeficiencyError("interface output matrix rank deficient")
    NB = left_null_space_rows(BJ)
    NC = null_space_rows(G)
    N = NC @ NB.T @ np.linalg.solve(NB @ NB.T, NB)
    mu = NC - N
    resid = float(np.abs(mu).max()) if mu.size else 0.0
    T = np.vstack([G, N])
    ok, cond = _full_rank(T)
    tr = CouplingFormTransform("NCF", T, N, cond, ok, resid, tuple(interface))
    if not ok:
        return None, tr
    return _transform(pm, T, nj, interface), tr


def to_coupling_form(m: StateSpaceModel, interface: Sequence[DofLabel], kind: str):
    kind = kind.upper()
    fn = {"UCF": ucf_transform, "SACF": sacf_transform, "NCF": ncf_transform}.get(kind)
    if fn is None:
        raise ValueError(f"unknown coupling form {kind!r}")
    return fn(m, interface)


def reduce_minimal(m: StateSpaceModel, red) -> StateSpaceModel:
    """Eliminate duplicated interface states: ``(L_T^+ A L_T, L_T^+ B, C L_T, D)``.

    ``red`` is a StateReductionMap or a list of ``(kept_label, removed_label)``
    pairs naming connected interface DOFs of ``m``.
    """
    if not isinstance(red, StateReductionMap):
        red = build_state_reduction(m.state_tags, m.state_dofs, red)
    LT = red.L_T
    if LT.shape[0] != m.n_states:
        raise ModelError("state reduction map does not match the model")
    LTp = boolean_pinv(LT)
    kept = red.kept
    return m.replace(
        A=LTp @ m.A @ LT, B=LTp @ m.B, C=m.C @ LT,
        state_tags=tuple(m.state_tags[i] for i in kept),
        state_dofs=tuple(m.state_dofs[i] for i in kept),
    ).checked()
