"""Lagrange-multiplier state-space substructuring.

Components are stacked into a block-diagonal model and the interface
compatibility ``B_M y'' = 0`` is enforced through connecting forces
``-B_M^T lambda``. Eliminating ``lambda`` needs one solve with the interface
feed-through ``B_M D B_M^T``::

    A_c = A - B B_M^T (B_M D B_M^T)^-1 B_M C
    B_c = B - B B_M^T (B_M D B_M^T)^-1 B_M D
    C_c = C - D B_M^T (B_M D B_M^T)^-1 B_M C
    D_c = D - D B_M^T (B_M D B_M^T)^-1 B_M D

Inputs and outputs may carry different label sets; the pairing is then
applied on each side with its own mapping matrix (same row order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .factory import _resolvent_solve, negative_form, relabel_component, select_dofs, to_acceleration
from .interface import (
    DofPair,
    InterfaceMap,
    InterfacePairing,
    boolean_pinv,
    build_mapping,
    build_state_reduction,
)
from .linalg import interface_solve
from .model import (
    DERIV,
    IFACE,
    INTERNAL,
    DofLabel,
    FrfMatrix,
    LabelError,
    ModelError,
    StateSpaceModel,
    block_diag,
)


@dataclass(frozen=True, eq=False)
class CouplingProblem:
    """Models to couple simultaneously and the DOF pairs joining them."""

    models: tuple[StateSpaceModel, ...]
    pairing: InterfacePairing
    output_map: InterfaceMap = field(init=False)
    input_map: InterfaceMap = field(init=False)

    def __post_init__(self):
        models = tuple(self.models)
        object.__setattr__(self, "models", models)
        if len(models) < 1:
            raise ModelError("nothing to couple")
        for p in self.pairing.pairs:
            for idx, lab in ((p.a_model, p.a), (p.b_model, p.b)):
                if not 0 <= idx < len(models):
                    raise LabelError(f"pair refers to model {idx}, only {len(models)} given")
                m = models[idx]
                in_out = any(l == lab for l in m.outputs), any(l == lab for l in m.inputs)
                if not all(in_out):
                    raise LabelError(
                        f"interface DOF {lab} of model {idx} must be both input and output")
        outs = [(i, lab) for i, m in enumerate(models) for lab in m.outputs]
        ins = [(i, lab) for i, m in enumerate(models) for lab in m.inputs]
        object.__setattr__(self, "output_map", build_mapping(outs, self.pairing))
        object.__setattr__(self, "input_map", build_mapping(ins, self.pairing))

    @property
    def n_pairs(self) -> int:
        return len(self.pairing)


def diagonal_model(models: Sequence[StateSpaceModel], kind: str | None = None) -> StateSpaceModel:
    """Block-diagonal (uncoupled) model. Labels must be unique across models."""
    kinds = {m.output_kind for m in models}
    if len(kinds) != 1:
        raise ModelError(f"mixed output kinds {sorted(kinds)}")
    inputs = tuple(l for m in models for l in m.inputs)
    outputs = tuple(l for m in models for l in m.outputs)
    return StateSpaceModel(
        block_diag(*[m.A for m in models]),
        block_diag(*[m.B for m in models]),
        block_diag(*[m.C for m in models]),
        block_diag(*[m.D for m in models]),
        kind or kinds.pop(),
        inputs,
        outputs,
        tuple(t for m in models for t in m.state_tags),
        tuple(d for m in models for d in m.state_dofs),
    )


def _canonical_state_order(m: StateSpaceModel) -> StateSpaceModel:
    """Permute states to ``[derivatives; interface outputs; internal]``."""
    rank = {DERIV: 0, IFACE: 1, INTERNAL: 2}
    perm = sorted(range(m.n_states), key=lambda i: rank[m.state_tags[i]])
    if perm == list(range(m.n_states)):
        return m
    return m.replace(
        A=m.A[np.ix_(perm, perm)], B=m.B[perm], C=m.C[:, perm],
        state_tags=tuple(m.state_tags[i] for i in perm),
        state_dofs=tuple(m.state_dofs[i] for i in perm),
    )


def _as_accel(m: StateSpaceModel) -> StateSpaceModel:
    return m if m.output_kind == "accel" else to_acceleration(m)


def _interface_operator(p: CouplingProblem, D: np.ndarray) -> np.ndarray:
    return p.output_map.B_M @ D @ p.input_map.B_M.T


def _coupled(p: CouplingProblem, diag: StateSpaceModel, C_new: np.ndarray, D_new: np.ndarray,
             kind: str) -> StateSpaceModel:
    m = diag.replace(C=C_new, D=D_new, output_kind=kind)
    return _canonical_state_order(m).checked()


def _check_unique_labels(models: Sequence[StateSpaceModel]) -> None:
    for side in ("inputs", "outputs"):
        seen = set()
        for m in models:
            for lab in getattr(m, side):
                if lab.key in seen:
                    raise LabelError(
                        f"label {lab} appears in two models; rename a component first")
                seen.add(lab.key)


def couple_accel(p: CouplingProblem) -> StateSpaceModel:
    """Couple acceleration models (displacement/velocity models are converted first)."""
    models = [_as_accel(m) for m in p.models]
    _check_unique_labels(models)
    d = diagonal_model(models, "accel")
    Bm_y, Bm_u = p.output_map.B_M, p.input_map.B_M
    if p.n_pairs == 0:
        return _canonical_state_order(d).checked()
    G = Bm_y @ d.D @ Bm_u.T
    n = d.n_states
    X = interface_solve(G, np.hstack([Bm_y @ d.C, Bm_y @ d.D]))
    XC, XD = X[:, :n], X[:, n:]
    A = d.A - d.B @ Bm_u.T @ XC
    B = d.B - d.B @ Bm_u.T @ XD
    C = d.C - d.D @ Bm_u.T @ XC
    D = d.D - d.D @ Bm_u.T @ XD
    return _coupled(p, d.replace(A=A, B=B), C, D, "accel")


def _disp_diag(p: CouplingProblem) -> StateSpaceModel:
    for m in p.models:
        if m.output_kind != "disp":
            raise ModelError("displacement/velocity coupling needs displacement models")
        if np.any(m.D):
            raise ModelError("displacement models must have zero feed-through")
    _check_unique_labels(p.models)
    return diagonal_model(p.models, "disp")


def _disp_terms(p: CouplingProblem, d: StateSpaceModel, extra: Sequence[np.ndarray]):
    """One interface solve against ``[B_M C A A, B_M C A B, *B_M extra]``."""
    Bm_y, Bm_u = p.output_map.B_M, p.input_map.B_M
    CA = d.C @ d.A
    CAA, CAB = CA @ d.A, CA @ d.B
    G = Bm_y @ CAB @ Bm_u.T
    blocks = [Bm_y @ CAA, Bm_y @ CAB] + [Bm_y @ e for e in extra]
    X = interface_solve(G, np.hstack(blocks))
    out, c = [], 0
    for b in blocks:
        out.append(X[:, c:c + b.shape[1]])
        c += b.shape[1]
    A = d.A - d.B @ Bm_u.T @ out[0]
    B = d.B - d.B @ Bm_u.T @ out[1]
    return A, B, CAB, out


def couple_disp(p: CouplingProblem) -> StateSpaceModel:
    """Couple displacement models directly into a displacement model.

    The coupled feed-through is zero by construction; see
    ``disp_feedthrough_closed_form`` for the explicit expression.
    """
    d = _disp_diag(p)
    if p.n_pairs == 0:
        return _canonical_state_order(d).checked()
    A, B, CAB, (XAA, XAB, XC) = _disp_terms(p, d, [d.C])
    Bm_u = p.input_map.B_M
    C = d.C - CAB @ Bm_u.T @ XC
    D = np.zeros_like(d.D)
    return _coupled(p, d.replace(A=A, B=B), C, D, "disp")


def disp_feedthrough_closed_form(p: CouplingProblem) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form coupled displacement feed-through and the reference scale.

    Returns ``(D_c, C_D A_D B_D)`` where
    ``D_c = CAB - CAB B_M^T (B_M CAB B_M^T)^-1 B_M CAB - C_c A_c B_c``,
    which vanishes for consistent models.
    """
    d = _disp_diag(p)
    CAB = d.C @ d.A @ d.B
    if p.n_pairs == 0:
        return np.zeros_like(d.D), CAB
    A, B, CAB, (XAA, XAB, XC) = _disp_terms(p, d, [d.C])
    Bm_u = p.input_map.B_M
    C = d.C - CAB @ Bm_u.T @ XC
    D_accel = CAB - CAB @ Bm_u.T @ XAB
    return D_accel - C @ A @ B, CAB


def couple_vel(p: CouplingProblem) -> StateSpaceModel:
    """Couple displacement models directly into a velocity model."""
    d = _disp_diag(p)
    if p.n_pairs == 0:
        return _canonical_state_order(to_velocity_unchecked(d)).checked()
    A, B, CAB, (XAA, XAB, XCA, XCB) = _disp_terms(p, d, [d.C @ d.A, d.C @ d.B])
    Bm_u = p.input_map.B_M
    C = d.C @ d.A - CAB @ Bm_u.T @ XCA
    D = d.C @ d.B - CAB @ Bm_u.T @ XCB
    return _coupled(p, d.replace(A=A, B=B), C, D, "vel")


def to_velocity_unchecked(d: StateSpaceModel) -> StateSpaceModel:
    return d.replace(C=d.C @ d.A, D=d.C @ d.B, output_kind="vel")


def retain_unique_dofs(m: StateSpaceModel, output_map: InterfaceMap,
                       input_map: InterfaceMap | None = None) -> StateSpaceModel:
    """Drop duplicated interface DOFs: ``B (L^T)^+``, ``L^+ C``, ``L^+ D (L^T)^+``."""
    input_map = input_map or output_map
    Ly, Lu = output_map.L, input_map.L
    if Ly.shape[0] != m.n_outputs or Lu.shape[0] != m.n_inputs:
        raise ModelError("interface map does not match the model's DOFs")
    for mp, labels in ((output_map, m.outputs), (input_map, m.inputs)):
        if tuple(l.key for _, l in mp.column_labels) != tuple(l.key for l in labels):
            raise ModelError("interface map labels differ from the model's DOFs")
    Ly_p = boolean_pinv(Ly)
    LuT_p = boolean_pinv(Lu).T
    return m.replace(
        B=m.B @ LuT_p,
        C=Ly_p @ m.C,
        D=Ly_p @ m.D @ LuT_p,
        outputs=output_map.unique_labels,
        inputs=input_map.unique_labels,
    ).checked()


def couple(p: CouplingProblem, variant: str = "accel", retain_unique: bool = True) -> StateSpaceModel:
    fn = {"accel": couple_accel, "disp": couple_disp, "vel": couple_vel}[variant]
    m = fn(p)
    if retain_unique:
        m = retain_unique_dofs(m, p.output_map, p.input_map)
    return m


def _negated_component(c: str) -> str:
    return f"-{c}"


def decouple(assembly: StateSpaceModel, removed: StateSpaceModel, pairing: InterfacePairing,
             keep: Sequence[DofLabel] | None = None, minimal: bool = False) -> StateSpaceModel:
    """Remove ``removed`` from ``assembly`` by coupling its negative form.

    ``pairing`` joins assembly DOFs (model 0) to removed-component DOFs
    (model 1). The result keeps the outputs/inputs ``keep`` (labels of the
    assembly); by default every assembly DOF. With ``minimal=True`` both models
    must be in coupling form and the duplicated interface states are removed.
    """
    from .forms import reduce_minimal

    asm = _as_accel(assembly)
    rem = negative_form(_as_accel(removed))
    comps = {l.component for l in rem.inputs + rem.outputs}
    rename = {c: _negated_component(c) for c in comps}
    rem = relabel_component(rem, rename)
    pairs = []
    for q in pairing.pairs:
        if {q.a_model, q.b_model} != {0, 1}:
            raise LabelError("decoupling pairs must join the assembly (0) and the removed part (1)")
        a, b = (q.a, q.b) if q.a_model == 0 else (q.b, q.a)
        pairs.append(DofPair(a, b.with_component(rename[b.component]), 0, 1, q.sign))
    prob = CouplingProblem((asm, rem), InterfacePairing(tuple(pairs)))
    m = couple_accel(prob)
    if minimal:
        m = reduce_minimal(m, [(q.a, q.b) for q in pairs])
    m = retain_unique_dofs(m, prob.output_map, prob.input_map)
    if keep is None:
        keep = [l for l in assembly.outputs]
    keep_out = [l for l in keep if any(o == l for o in m.outputs)]
    keep_in = [l for l in keep if any(i == l for i in m.inputs)]
    missing = [l for l in keep if l not in keep_out and l not in keep_in]
    if missing:
        raise LabelError(f"keep label {missing[0]} not present after decoupling")
    return select_dofs(m, keep_out, keep_in).checked()


def interface_forces_frf(p: CouplingProblem, freqs_hz: Sequence[float]) -> FrfMatrix:
    """Connecting forces ``lambda`` per unit external input, in the frequency domain.

    ``lambda = (B_M D B_M^T)^-1 (B_M C x + B_M D u)`` with ``x`` the coupled state
    response. Rows follow the pair order; columns are the global inputs.
    """
    models = [_as_accel(m) for m in p.models]
    _check_unique_labels(models)
    d = diagonal_model(models, "accel")
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    labels = tuple(
        DofLabel("lambda", f"{q.a.component}.{q.a.node}~{q.b.component}.{q.b.node}", q.a.direction)
        for q in p.pairing.pairs)
    if p.n_pairs == 0:
        H = np.zeros((f.size, 0, d.n_inputs), dtype=complex)
        return FrfMatrix(f, H, "interface_force", d.inputs, labels)
    Bm_y, Bm_u = p.output_map.B_M, p.input_map.B_M
    n = d.n_states
    X = interface_solve(Bm_y @ d.D @ Bm_u.T, np.hstack([Bm_y @ d.C, Bm_y @ d.D]))
    XC, XD = X[:, :n], X[:, n:]
    A = d.A - d.B @ Bm_u.T @ XC
    B = d.B - d.B @ Bm_u.T @ XD
    states = _resolvent_solve(A, B, 2 * np.pi * f, f)
    H = np.einsum("pn,fni->fpi", XC, states) + XD[None]
    return FrfMatrix(f, H, "interface_force", d.inputs, labels)


def stability_summary(m: StateSpaceModel) -> dict:
    """Pole real-part summary; unstable poles are reported, never altered."""
    lam = np.linalg.eigvals(m.A) if m.n_states else np.zeros(0)
    scale = max(np.abs(lam).max() if lam.size else 0.0, 1.0)
    # defective zero poles (duplicated interface states) split by ~sqrt(eps*|A|)
    tol = max(1e-9 * scale, 10.0 * np.sqrt(np.finfo(float).eps * np.linalg.norm(m.A, 2)))
    unstable = lam[lam.real > tol]
    return {
        "n_states": m.n_states,
        "max_real_part": float(lam.real.max()) if lam.size else None,
        "n_unstable": int(unstable.size),
    }
