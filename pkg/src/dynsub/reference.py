"""Independent coupling methods used to cross-check the state-space results.

* LM-FBS: frequency-based dual assembly. The per-frequency formula
  ``Y_c = Y - Y B^T (B Y B^T)^-1 B Y`` is the standard one from the
  frequency-based substructuring literature (de Klerk, Rixen, Voormeeren).
* Classical SSS (Su and Juang): coupling matrix ``T_SJ`` acting on the
  partitioned block-diagonal model; two inversions.
* Sjovall-Abrahamsson: sums the first block rows of two SACF models, giving a
  minimal-order model directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .interface import DofPair, InterfacePairing, boolean_pinv, build_mapping
from .lmsss import _canonical_state_order, _check_unique_labels, diagonal_model
from .factory import relabel_component
from .linalg import COND_LIMIT, interface_solve
from .model import (
    DERIV,
    IFACE,
    INTERNAL,
    DofLabel,
    FrfMatrix,
    LabelError,
    ModelError,
    SingularInterfaceError,
    StateSpaceModel,
    block_diag,
)


def _stack_frfs(frfs: Sequence[FrfMatrix]):
    f0 = frfs[0].freqs_hz
    for f in frfs[1:]:
        if f.freqs_hz.shape != f0.shape or np.any(f.freqs_hz != f0):
            raise ModelError("FRFs are not on the same frequency grid")
    kinds = {f.response_kind for f in frfs}
    if len(kinds) != 1:
        raise ModelError(f"mixed FRF kinds {sorted(kinds)}")
    no = sum(len(f.outputs) for f in frfs)
    ni = sum(len(f.inputs) for f in frfs)
    Y = np.zeros((f0.size, no, ni), dtype=complex)
    r = c = 0
    for f in frfs:
        Y[:, r:r + len(f.outputs), c:c + len(f.inputs)] = f.H
        r += len(f.outputs)
        c += len(f.inputs)
    outs = [(i, l) for i, f in enumerate(frfs) for l in f.outputs]
    ins = [(i, l) for i, f in enumerate(frfs) for l in f.inputs]
    return f0, Y, outs, ins, kinds.pop()


def lmfbs_couple(frfs: Sequence[FrfMatrix], pairing: InterfacePairing,
                 retain_unique: bool = False, on_singular: str = "raise"):
    """Dual assembly of FRF matrices.

    With ``on_singular="mark"`` frequencies whose interface operator is singular
    are filled with NaN and returned as a list: ``(frf, bad_freqs)``.
    Otherwise a SingularInterfaceError names the first such frequency.
    """
    f, Y, outs, ins, kind = _stack_frfs(frfs)
    for side in (outs, ins):
        keys = [l.key for _, l in side]
        if len(set(keys)) != len(keys):
            raise LabelError("label appears in two FRFs; rename a component first")
    ym = build_mapping(outs, pairing)
    um = build_mapping(ins, pairing)
    By, Bu = ym.B_M, um.B_M
    bad: list[float] = []
    if len(pairing):
        G = By @ Y @ Bu.T
        cond = np.linalg.cond(G)
        singular = ~np.isfinite(cond) | (cond > COND_LIMIT)
        if singular.any():
            if on_singular != "mark":
                raise SingularInterfaceError(
                    f"interface operator singular at {f[np.argmax(singular)]:g} Hz")
            bad = [float(x) for x in f[singular]]
        Yc = np.full_like(Y, np.nan)
        ok = ~singular
        X = np.linalg.solve(G[ok], By @ Y[ok])
        Yc[ok] = Y[ok] - Y[ok] @ Bu.T @ X
    else:
        Yc = Y
    out_labels = tuple(l for _, l in outs)
    in_labels = tuple(l for _, l in ins)
    if retain_unique:
        Yc = boolean_pinv(ym.L) @ Yc @ boolean_pinv(um.L).T
        out_labels, in_labels = ym.unique_labels, um.unique_labels
    res = FrfMatrix(f, Yc, kind, in_labels, out_labels)
    return (res, bad) if on_singular == "mark" else res


def lmfbs_decouple(assembly: FrfMatrix, removed: FrfMatrix, pairing: InterfacePairing,
                   keep: Sequence[DofLabel] | None = None) -> FrfMatrix:
    """Subtract a component: couple the assembly with the negated component FRF."""
    comps = {l.component for l in removed.inputs + removed.outputs}
    rename = {c: f"-{c}" for c in comps}
    neg = FrfMatrix(removed.freqs_hz, -removed.H, removed.response_kind,
                    tuple(l.with_component(rename[l.component]) for l in removed.inputs),
                    tuple(l.with_component(rename[l.component]) for l in removed.outputs))
    pairs = []
    for q in pairing.pairs:
        a, b = (q.a, q.b) if q.a_model == 0 else (q.b, q.a)
        pairs.append(DofPair(a, b.with_component(rename[b.component]), 0, 1, q.sign))
    res = lmfbs_couple([assembly, neg], InterfacePairing(tuple(pairs)), retain_unique=True)
    keep = list(keep) if keep is not None else list(assembly.outputs)
    return res.select([l for l in keep if l in res.outputs], [l for l in keep if l in res.inputs])


@dataclass(frozen=True, eq=False)
class ClassicalCouplingMatrix:
    """``T_SJ``: one row per coupled DOF with ones on its matching interface DOFs."""

    T_SJ: np.ndarray
    interface: tuple[tuple[int, DofLabel], ...]
    coupled_labels: tuple[DofLabel, ...]

    @classmethod
    def from_pairing(cls, models: Sequence[StateSpaceModel], pairing: InterfacePairing):
        if len(pairing) == 0:
            raise ModelError("classical coupling needs at least one interface pair")
        iface = []
        for q in pairing.pairs:
            iface += [(q.a_model, q.a), (q.b_model, q.b)]
        glob = [(i, l.key) for i, m in enumerate(models) for l in m.outputs]
        pos = {d: k for k, d in enumerate(glob)}
        try:
            iface.sort(key=lambda d: pos[(d[0], d[1].key)])
        except KeyError as exc:
            raise LabelError(f"interface DOF not among outputs: {exc.args[0]}") from None
        col = {(i, l.key): c for c, (i, l) in enumerate(iface)}
        T = np.zeros((len(pairing), len(iface)))
        for r, q in enumerate(pairing.pairs):
            T[r, col[(q.a_model, q.a.key)]] = 1.0
            T[r, col[(q.b_model, q.b.key)]] = 1.0
        return cls(T, tuple(iface), tuple(q.a for q in pairing.pairs))


def classical_couple(models: Sequence[StateSpaceModel], pairing: InterfacePairing) -> StateSpaceModel:
    """Su-Juang coupling of acceleration models.

    Outputs/inputs of the result are ordered ``[internal; coupled interface]``
    with the coupled DOF named after the first member of each pair.
    """
    models = list(models)
    for m in models:
        if m.output_kind != "accel":
            raise ModelError("classical coupling works on acceleration models")
    _check_unique_labels(models)
    tsj = ClassicalCouplingMatrix.from_pairing(models, pairing)
    d = diagonal_model(models, "accel")
    glob_out = [(i, l) for i, m in enumerate(models) for l in m.outputs]
    glob_in = [(i, l) for i, m in enumerate(models) for l in m.inputs]
    iface = {(i, l.key) for i, l in tsj.interface}

    def split(side):
        J = [next(k for k, (i, l) in enumerate(side) if (i, l.key) == (ti, tl.key))
             for ti, tl in tsj.interface]
        Ji = set(J)
        I = [k for k in range(len(side)) if k not in Ji]
        return I, J

    Io, Jo = split(glob_out)
    Ii, Ji = split(glob_in)
    BI, BJ = d.B[:, Ii], d.B[:, Ji]
    CI, CJ = d.C[Io], d.C[Jo]
    DII, DIJ = d.D[np.ix_(Io, Ii)], d.D[np.ix_(Io, Ji)]
    DJI, DJJ = d.D[np.ix_(Jo, Ii)], d.D[np.ix_(Jo, Ji)]
    T = tsj.T_SJ
    nJ = DJJ.shape[0]

    # first inversion: the 2n_J x 2n_J interface feed-through
    Dinv = interface_solve(DJJ, np.eye(nJ), what="interface feed-through D_JJ")
    S = T @ Dinv @ T.T
    # second inversion: the n_J x n_J auxiliary matrix S
    Sinv = interface_solve(S, np.eye(S.shape[0]), what="auxiliary matrix S")
    Q = Dinv @ T.T @ Sinv @ T @ Dinv - Dinv

    A = d.A + BJ @ Q @ CJ
    B = np.hstack([BI + BJ @ Q @ DJI, BJ @ Dinv @ T.T @ Sinv])
    C = np.vstack([CI + DIJ @ Q @ CJ, Sinv @ T @ Dinv @ CJ])
    D = np.block([
        [DII + DIJ @ Q @ DJI, DIJ @ Dinv @ T.T @ Sinv],
        [Sinv @ T @ Dinv @ DJI, Sinv],
    ])
    coupled = tuple(l.with_kind("interface") for l in tsj.coupled_labels)
    outputs = tuple(glob_out[k][1] for k in Io) + coupled
    inputs = tuple(glob_in[k][1] for k in Ii) + coupled
    m = StateSpaceModel(A, B, C, D, "accel", inputs, outputs, d.state_tags, d.state_dofs)
    return _canonical_state_order(m).checked()


def _sacf_blocks(m: StateSpaceModel, nj: int, tol: float):
    """Split an SACF displacement model into its named blocks, checking structure."""
    if m.output_kind != "disp":
        raise ModelError("state-space coupling of SACF models expects displacement models")
    if m.n_interface != nj:
        raise ModelError("model is not in coupling form for this interface")
    n = m.n_states
    v, dsl, I = slice(0, nj), slice(nj, 2 * nj), slice(2 * nj, n)
    A, B, C, D = m.A, m.B, m.C, m.D
    bscale = max(np.abs(B).max(), 1e-300)
    ascale = max(np.abs(A).max(), 1e-300)
    cscale = max(np.abs(C).max(), 1e-300)
    checks = {
        "B rows of y_J": np.abs(B[dsl]).max(initial=0) / bscale,
        "B internal rows, interface columns": np.abs(B[I, :nj]).max(initial=0) / bscale,
        "A rows of y_J": np.abs(A[dsl] - np.hstack([np.eye(nj), np.zeros((nj, n - nj))])).max(initial=0) / ascale,
        "C interface rows": np.abs(C[:nj] - np.hstack([np.zeros((nj, nj)), np.eye(nj), np.zeros((nj, n - 2 * nj))])).max(initial=0) / cscale,
        "D interface columns": np.abs(D[:, :nj]).max(initial=0) / max(np.abs(D).max(initial=0), bscale),
    }
    bad = {k: v_ for k, v_ in checks.items() if v_ > tol}
    if bad:
        raise ModelError(f"model is not in SACF structure: {bad}")
    return dict(
        Avv=A[v, v], Avd=A[v, dsl], AvI=A[v, I],
        AIv=A[I, v], AId=A[I, dsl], AII=A[I, I],
        Bvv=B[v, :nj], BvI=B[v, nj:], BII=B[I, nj:],
        CIv=C[nj:, v], CId=C[nj:, dsl], CII=C[nj:, I], DII=D[nj:, nj:],
    )


def sjovall_couple(ma: StateSpaceModel, mb: StateSpaceModel,
                   pairing: InterfacePairing | None = None, tol: float = 1e-8) -> StateSpaceModel:
    """Couple two SACF displacement models into a minimal-order displacement model.

    Interface states, inputs and outputs of both models must follow the pair
    order. The coupled state is ``[y_J'; y_J; x_I(a); x_I(b)]``.
    """
    nj = ma.n_interface
    if mb.n_interface != nj:
        raise ModelError("models disagree on the number of interface DOFs")
    if pairing is not None:
        if len(pairing) != nj:
            raise ModelError("pairing size differs from the models' interface")
        for k, q in enumerate(pairing.pairs):
            if ma.state_dofs[k] != q.a or mb.state_dofs[k] != q.b:
                raise ModelError("interface state order does not follow the pairing")
    a = _sacf_blocks(ma, nj, tol)
    b = _sacf_blocks(mb, nj, tol)
    Gam = interface_solve(a["Bvv"] + b["Bvv"], np.eye(nj), what="summed interface input block")
    aG, bG = a["Bvv"] @ Gam, b["Bvv"] @ Gam
    na, nb = a["AII"].shape[0], b["AII"].shape[0]
    Z = np.zeros

    Avv = aG @ b["Avv"] + bG @ a["Avv"]
    Avd = aG @ b["Avd"] + bG @ a["Avd"]
    AvIa = bG @ a["AvI"]
    AvIb = aG @ b["AvI"]
    A = np.block([
        [Avv, Avd, AvIa, AvIb],
        [np.eye(nj), Z((nj, nj)), Z((nj, na)), Z((nj, nb))],
        [a["AIv"], a["AId"], a["AII"], Z((na, nb))],
        [b["AIv"], b["AId"], Z((nb, na)), b["AII"]],
    ])
    nia, nib = a["BII"].shape[1], b["BII"].shape[1]
    B = np.block([
        [aG @ b["Bvv"], bG @ a["BvI"], aG @ b["BvI"]],
        [Z((nj, nj)), Z((nj, nia)), Z((nj, nib))],
        [Z((na, nj)), a["BII"], Z((na, nib))],
        [Z((nb, nj)), Z((nb, nia)), b["BII"]],
    ])
    noa, nob = a["CII"].shape[0], b["CII"].shape[0]
    C = np.block([
        [Z((nj, nj)), np.eye(nj), Z((nj, na)), Z((nj, nb))],
        [a["CIv"], a["CId"], a["CII"], Z((noa, nb))],
        [b["CIv"], b["CId"], Z((nob, na)), b["CII"]],
    ])
    D = np.block([
        [Z((nj, nj)), Z((nj, nia)), Z((nj, nib))],
        [Z((noa, nj)), a["DII"], Z((noa, nib))],
        [Z((nob, nj)), Z((nob, nia)), b["DII"]],
    ])
    iface = ma.outputs[:nj]
    outputs = tuple(iface) + ma.outputs[nj:] + mb.outputs[nj:]
    inputs = tuple(iface) + ma.inputs[nj:] + mb.inputs[nj:]
    n = A.shape[0]
    tags = (DERIV,) * nj + (IFACE,) * nj + (INTERNAL,) * (n - 2 * nj)
    dofs = tuple(ma.state_dofs[:2 * nj]) + (None,) * (n - 2 * nj)
    return StateSpaceModel(A, B, C, D, "disp", inputs, outputs, tags, dofs).checked()


def dynamic_stiffness(f: FrfMatrix) -> FrfMatrix:
    """``Z(w) = -w^2 H(w)^-1`` from an accelerance FRF."""
    if f.response_kind != "accelerance":
        raise ModelError("dynamic stiffness is computed from accelerance")
    if len(f.inputs) != len(f.outputs):
        raise ModelError("FRF matrix must be square to invert")
    cond = np.linalg.cond(f.H)
    bad = ~np.isfinite(cond) | (cond > COND_LIMIT)
    if bad.any():
        raise SingularInterfaceError(f"FRF matrix singular at {f.freqs_hz[np.argmax(bad)]:g} Hz")
    w2 = (2 * np.pi * f.freqs_hz) ** 2
    Z = -w2[:, None, None] * np.linalg.inv(f.H)
    # Z maps displacements (the FRF inputs' DOFs) to forces (its outputs' DOFs)
    return FrfMatrix(f.freqs_hz, Z, "dynamic_stiffness", f.outputs, f.inputs)
