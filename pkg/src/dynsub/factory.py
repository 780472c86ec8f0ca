"""Construction and transformation of state-space models, and FRF synthesis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .model import (
    INTERNAL,
    RESPONSE_OF_KIND,
    DofLabel,
    FrfMatrix,
    LabelError,
    MechanicalSystem,
    ModelError,
    StateSpaceModel,
)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 5e-3
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")


def build_model(sys: MechanicalSystem, kind: str = "accel") -> StateSpaceModel:
    """State-space model of ``sys`` with state ``[x'; x]`` and all DOFs as inputs/outputs.

    ``A = [[-M^-1 V, -M^-1 K], [I, 0]]``, ``B = [[M^-1], [0]]``; ``C`` and ``D``
    select acceleration, velocity or displacement outputs.
    """
    n = sys.n_dof
    try:
        Minv = sla.inv(sys.M)
    except np.linalg.LinAlgError:
        raise ModelError("mass matrix singular") from None
    if not np.all(np.isfinite(Minv)) or np.linalg.cond(sys.M) > 1e14:
        raise ModelError("mass matrix singular")
    I, Z = np.eye(n), np.zeros((n, n))
    top = np.hstack([-Minv @ sys.V, -Minv @ sys.K])
    A = np.vstack([top, np.hstack([I, Z])])
    B = np.vstack([Minv, Z])
    if kind == "accel":
        C, D = top, Minv
    elif kind == "vel":
        C, D = np.hstack([I, Z]), Z
    elif kind == "disp":
        C, D = np.hstack([Z, I]), Z
    else:
        raise ModelError(f"unknown output kind {kind!r}")
    return StateSpaceModel(A, B, C, D, kind, sys.dofs, sys.dofs).checked()


def to_acceleration(m: StateSpaceModel) -> StateSpaceModel:
    """Differentiate the output equation of a displacement (or velocity) model."""
    A, B, C, D = m.A, m.B, m.C, m.D
    if m.output_kind == "accel":
        return m
    if m.output_kind == "disp":
        C2, D2 = C @ A @ A, D + C @ A @ B
    elif m.output_kind == "vel":
        if np.any(D):
            raise ModelError("velocity model with feed-through cannot be differentiated")
        C2, D2 = C @ A, C @ B
    else:
        raise ModelError(f"cannot convert {m.output_kind} model to acceleration")
    return m.replace(C=C2, D=D2, output_kind="accel").checked()


def to_velocity(m: StateSpaceModel) -> StateSpaceModel:
    if m.output_kind != "disp":
        raise ModelError(f"to_velocity needs a displacement model, got {m.output_kind}")
    return m.replace(C=m.C @ m.A, D=m.C @ m.B, output_kind="vel").checked()


def negative_form(m: StateSpaceModel) -> StateSpaceModel:
    """Negate ``B`` and ``D`` so the model's FRF changes sign (used for decoupling)."""
    if m.output_kind != "accel":
        raise ModelError("negative form is defined for acceleration models")
    return m.replace(B=-m.B, D=-m.D)


def _real_block(lam: complex) -> np.ndarray:
    return np.array([[lam.real, lam.imag], [-lam.imag, lam.real]])


def to_modal_form(m: StateSpaceModel, zero_tol: float | None = None) -> StateSpaceModel:
    """Similarity transform to real block-diagonal modal coordinates.

    Each complex pole pair gives a 2x2 block ``[[s, w], [-w, s]]`` and each real
    pole a 1x1 block. Poles at the origin (rigid-body motion) are kept together
    in one block acting on the generalized kernel of ``A``. The state vector
    loses its physical meaning, as for models identified from test data.
    """
    A = np.asarray(m.A)
    n = A.shape[0]
    if n == 0:
        return m
    scale = max(np.linalg.norm(A, 2), 1.0)
    if zero_tol is None:
        zero_tol = np.sqrt(np.finfo(float).eps) * scale
    lam, vec = np.linalg.eig(A)
    zero = np.abs(lam) < zero_tol
    n0 = int(zero.sum())

    cols, blocks = [], []
    if n0:
        # orthonormal basis of the invariant subspace of the zero poles
        _, Z, sdim = sla.schur(A, output="real",
                               sort=lambda re, im: abs(complex(re, im)) < zero_tol)
        if sdim != n0:
            raise ModelError("non-diagonalizable state matrix")
        W = Z[:, :n0]
        cols.append(W)
        blocks.append(W.T @ A @ W)

    lam_nz, vec_nz = lam[~zero], vec[:, ~zero]
    order = np.lexsort((lam_nz.real, np.abs(lam_nz.imag)))
    used = np.zeros(lam_nz.size, bool)
    for i in order:
        if used[i]:
            continue
        li, vi = lam_nz[i], vec_nz[:, i]
        if abs(li.imag) <= 1e-12 * abs(li):
            used[i] = True
            v = vi.real if np.linalg.norm(vi.real) >= np.linalg.norm(vi.imag) else vi.imag
            cols.append((v / np.linalg.norm(v))[:, None])
            blocks.append(np.array([[li.real]]))
            continue
        if li.imag < 0:
            continue
        partner = [j for j in range(lam_nz.size)
                   if not used[j] and j != i and abs(lam_nz[j] - np.conj(li)) <= 1e-9 * abs(li)]
        if not partner:
            raise ModelError("complex pole without conjugate partner")
        used[i] = used[partner[0]] = True
        v = vi / np.linalg.norm(vi)
        cols.append(np.column_stack([v.real, v.imag]))
        blocks.append(_real_block(li))
    if not used.all():
        raise ModelError("non-diagonalizable state matrix")

    V = np.hstack(cols)
    if np.linalg.cond(V) > 1e10:
        raise ModelError("non-diagonalizable state matrix")
    for w in np.sort_complex(lam_nz):
        if np.sum(np.abs(lam_nz - w) <= 1e-9 * max(abs(w), 1.0)) > 1:
            raise ModelError("non-diagonalizable state matrix (repeated poles)")
    At = sla.block_diag(*blocks)
    Bt = np.linalg.solve(V, m.B)
    Ct = m.C @ V
    return m.replace(A=At, B=Bt, C=Ct, state_tags=(INTERNAL,) * n, state_dofs=()).checked()


def similarity(m: StateSpaceModel, T: np.ndarray) -> StateSpaceModel:
    """Apply ``z = T x``: returns ``(T A T^-1, T B, C T^-1, D)``."""
    lu = sla.lu_factor(T)
    A = sla.lu_solve(lu, (T @ m.A).T, trans=1).T
    C = sla.lu_solve(lu, m.C.T, trans=1).T
    return m.replace(A=A, B=T @ m.B, C=C)


def _resolvent_solve(A: np.ndarray, B: np.ndarray, omega: np.ndarray,
                     freqs_hz: np.ndarray, chunk: int = 512) -> np.ndarray:
    """``(i w I - A)^-1 B`` for every ``w``; shape ``(n_f, n, n_i)``."""
    n = A.shape[0]
    out = np.empty((omega.size, n, B.shape[1]), dtype=complex)
    I = np.eye(n)
    for s in range(0, omega.size, chunk):
        w = omega[s:s + chunk]
        R = 1j * w[:, None, None] * I - A
        try:
            out[s:s + chunk] = np.linalg.solve(R, np.broadcast_to(B, (w.size,) + B.shape))
        except np.linalg.LinAlgError:
            for k, wk in enumerate(w):
                try:
                    out[s + k] = np.linalg.solve(1j * wk * I - A, B)
                except np.linalg.LinAlgError:
                    raise ModelError(
                        f"singular resolvent at {freqs_hz[s + k]:g} Hz") from None
    return out


def synth_frf(m: StateSpaceModel, freqs_hz: Sequence[float]) -> FrfMatrix:
    """Transfer matrix ``C (i w I - A)^-1 B + D`` on a Hz grid."""
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    omega = 2 * np.pi * f
    A, B, C = m.A, m.B, m.C
    if m.n_states:
        # power-of-two diagonal scaling: exact, and improves the resolvent solves
        A, s = sla.matrix_balance(A, permute=False, separate=True)
        s = s[0]
        B, C = B / s[:, None], C * s[None, :]
    X = _resolvent_solve(A, B, omega, f)
    H = np.einsum("on,fni->foi", C, X) + m.D[None]
    return FrfMatrix(f, H, RESPONSE_OF_KIND[m.output_kind], m.inputs, m.outputs)


def frequency_grid(fmin: float = 20.0, fmax: float = 500.0, df: float = 0.25) -> np.ndarray:
    n = int(round((fmax - fmin) / df)) + 1
    return fmin + df * np.arange(n)


def perturb_frf(f: FrfMatrix, spec: NoiseSpec) -> FrfMatrix:
    """Add i.i.d. Gaussian noise to the real and imaginary part of every entry."""
    if spec.sigma == 0:
        return f
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.sigma, f.H.shape) + 1j * rng.normal(0.0, spec.sigma, f.H.shape)
    return FrfMatrix(f.freqs_hz, f.H + noise, f.response_kind, f.inputs, f.outputs)


def _interface_first(labels: Sequence[DofLabel], interface: Sequence[DofLabel]):
    keys = [lab.key for lab in labels]
    first = []
    for lab in interface:
        if lab.key not in keys:
            raise LabelError(f"unknown label {lab}")
        first.append(keys.index(lab.key))
    iface = set(first)
    perm = first + [i for i in range(len(labels)) if i not in iface]
    new = tuple(labels[i].with_kind("interface" if i in iface else "internal") for i in perm)
    return np.array(perm, dtype=int), new


def partition_interface_first(m: StateSpaceModel, interface: Sequence[DofLabel]):
    """Reorder inputs and outputs so the interface DOFs come first.

    Interface labels present only among outputs (or only among inputs) are moved
    on that side only. Returns ``(model, (output_perm, input_perm))`` where
    ``new_outputs = old_outputs[output_perm]``.
    """
    interface = list(interface)
    out_keys = {lab.key for lab in m.outputs}
    in_keys = {lab.key for lab in m.inputs}
    unknown = [lab for lab in interface if lab.key not in out_keys | in_keys]
    if unknown:
        raise LabelError(f"unknown label {unknown[0]}")
    po, outs = _interface_first(m.outputs, [l for l in interface if l.key in out_keys])
    pi, ins = _interface_first(m.inputs, [l for l in interface if l.key in in_keys])
    pm = m.replace(B=m.B[:, pi], C=m.C[po], D=m.D[po][:, pi], inputs=ins, outputs=outs)
    return pm.checked(), (po, pi)


def select_dofs(m: StateSpaceModel, outputs: Sequence[DofLabel] | None = None,
                inputs: Sequence[DofLabel] | None = None) -> StateSpaceModel:
    """Keep only the given outputs and inputs (in the given order)."""
    oi = [m.output_index(l) for l in (outputs if outputs is not None else m.outputs)]
    ii = [m.input_index(l) for l in (inputs if inputs is not None else m.inputs)]
    return m.replace(B=m.B[:, ii], C=m.C[oi], D=m.D[oi][:, ii],
                     inputs=tuple(m.inputs[i] for i in ii),
                     outputs=tuple(m.outputs[i] for i in oi))


def relabel_component(m: StateSpaceModel, mapping: dict[str, str]) -> StateSpaceModel:
    """Rename component ids on inputs, outputs and state DOFs."""
    def ren(lab):
        if lab is None:
            return None
        return lab.with_component(mapping.get(lab.component, lab.component))
    return m.replace(inputs=tuple(map(ren, m.inputs)), outputs=tuple(map(ren, m.outputs)),
                     state_dofs=tuple(map(ren, m.state_dofs)))
