"""Core domain types: DOF labels, state-space models, mechanical systems and FRFs.

All types are immutable values. Matrices are stored as read-only float64
(or complex128 for FRFs) numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

DIRECTIONS = ("x", "y", "z", "Rx", "Ry", "Rz", "scalar")
DOF_KINDS = ("internal", "interface")
OUTPUT_KINDS = ("disp", "vel", "accel")
RESPONSE_KINDS = ("receptance", "mobility", "accelerance", "dynamic_stiffness", "interface_force")
STATE_TAGS = ("deriv_interface_output", "interface_output", "internal")

DERIV, IFACE, INTERNAL = STATE_TAGS

RESPONSE_OF_KIND = {"disp": "receptance", "vel": "mobility", "accel": "accelerance"}


class SubstructuringError(ValueError):
    """Base class for all errors raised by this package."""


class ModelError(SubstructuringError):
    pass


class LabelError(SubstructuringError):
    pass


class SingularInterfaceError(SubstructuringError):
    pass


class RankDeficiencyError(SubstructuringError):
    pass


@dataclass(frozen=True)
class DofLabel:
    """A degree of freedom: ``component:node[:direction]``.

    Identity is ``(component, node, direction)``; ``kind`` is descriptive only.
    """

    component: str
    node: str
    direction: str = "scalar"
    kind: str = field(default="internal", compare=False)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise LabelError(f"unknown direction {self.direction!r}")
        if self.kind not in DOF_KINDS:
            raise LabelError(f"unknown DOF kind {self.kind!r}")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.component, self.node, self.direction)

    def with_kind(self, kind: str) -> "DofLabel":
        return replace(self, kind=kind)

    def with_component(self, component: str) -> "DofLabel":
        return replace(self, component=component)

    def __str__(self) -> str:
        if self.direction == "scalar":
            return f"{self.component}:{self.node}"
        return f"{self.component}:{self.node}:{self.direction}"

    @classmethod
    def parse(cls, text: str) -> "DofLabel":
        parts = text.strip().split(":")
        if len(parts) == 2:
            return cls(parts[0], parts[1])
        if len(parts) == 3:
            return cls(parts[0], parts[1], parts[2])
        raise LabelError(f"cannot parse DOF label {text!r}")


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def _as_2d(a, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 2:
        return arr
    if arr.size == 0:
        return np.zeros((rows or 0, cols or 0))
    return np.atleast_2d(arr)


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Linear time-invariant model ``x' = A x + B u``, ``y = C x + D u``.

    ``output_kind`` says whether ``y`` holds displacements, velocities or
    accelerations. ``state_tags`` marks coupling-form states; ``state_dofs``
    names the interface DOF a tagged state refers to (``None`` for internal
    states).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    output_kind: str
    inputs: tuple[DofLabel, ...]
    outputs: tuple[DofLabel, ...]
    state_tags: tuple[str, ...] = ()
    state_dofs: tuple[Optional[DofLabel], ...] = ()

    def __post_init__(self):
        A = _as_2d(self.A)
        n = A.shape[0] if A.ndim == 2 else 0
        B = _as_2d(self.B, n, len(self.inputs))
        C = _as_2d(self.C, len(self.outputs), n)
        D = _as_2d(self.D, len(self.outputs), len(self.inputs))
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "C", _frozen(C))
        object.__setattr__(self, "D", _frozen(D))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        tags = tuple(self.state_tags) or (INTERNAL,) * self.A.shape[0]
        object.__setattr__(self, "state_tags", tags)
        dofs = tuple(self.state_dofs) or (None,) * len(tags)
        object.__setattr__(self, "state_dofs", dofs)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    @property
    def n_interface(self) -> int:
        """Number of interface outputs carried in the state vector (coupling form)."""
        return sum(t == DERIV for t in self.state_tags)

    @property
    def in_coupling_form(self) -> bool:
        return self.n_interface > 0

    def replace(self, **changes) -> "StateSpaceModel":
        return replace(self, **changes)

    def input_index(self, label: DofLabel) -> int:
        return _index_of(self.inputs, label, "input")

    def output_index(self, label: DofLabel) -> int:
        return _index_of(self.outputs, label, "output")

    def checked(self) -> "StateSpaceModel":
        problems = validate_model(self)
        if problems:
            raise ModelError("; ".join(problems))
        return self

    def __repr__(self) -> str:
        return (
            f"StateSpaceModel(kind={self.output_kind}, n={self.n_states}, "
            f"inputs={self.n_inputs}, outputs={self.n_outputs}, n_J={self.n_interface})"
        )


def _index_of(labels: Sequence[DofLabel], label: DofLabel, what: str) -> int:
    for i, lab in enumerate(labels):
        if lab == label:
            return i
    raise LabelError(f"unknown {what} label {label}")


def _duplicates(labels: Sequence[DofLabel]) -> list[DofLabel]:
    seen, dup = set(), []
    for lab in labels:
        if lab.key in seen:
            dup.append(lab)
        seen.add(lab.key)
    return dup


def validate_model(m: StateSpaceModel) -> list[str]:
    """Return a list of invariant violations (empty if the model is well formed)."""
    out: list[str] = []
    A, B, C, D = m.A, m.B, m.C, m.D
    n = A.shape[0]
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        out.append(f"A not square: shape {A.shape}")
    if B.shape[0] != n:
        out.append("B row count ≠ n")
    if C.shape[1] != n:
        out.append("C column count ≠ n")
    if D.shape != (C.shape[0], B.shape[1]):
        out.append(f"D shape {D.shape} ≠ ({C.shape[0]}, {B.shape[1]})")
    if B.shape[1] != len(m.inputs):
        out.append("input label count ≠ B columns")
    if C.shape[0] != len(m.outputs):
        out.append("output label count ≠ C rows")
    for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
        bad = np.argwhere(~np.isfinite(mat))
        if bad.size:
            i, j = bad[0]
            out.append(f"{name} not finite at ({i},{j})")
    if m.output_kind not in OUTPUT_KINDS:
        out.append(f"unknown output kind {m.output_kind!r}")
    for lab in _duplicates(m.inputs):
        out.append(f"duplicate input label {lab}")
    for lab in _duplicates(m.outputs):
        out.append(f"duplicate output label {lab}")

    tags = m.state_tags
    if len(tags) != n:
        out.append("state_tags length ≠ n")
    elif any(t not in STATE_TAGS for t in tags):
        out.append("unknown state tag")
    else:
        k = sum(t == DERIV for t in tags)
        expected = (DERIV,) * k + (IFACE,) * k + (INTERNAL,) * (n - 2 * k)
        if tuple(tags) != expected:
            out.append("state_tags not ordered [deriv_interface_output; interface_output; internal]")
        elif len(m.state_dofs) != n:
            out.append("state_dofs length ≠ n")
        else:
            for i in range(k):
                if m.state_dofs[i] is None or m.state_dofs[i] != m.state_dofs[k + i]:
                    out.append(f"state {i} and {k + i} do not name the same interface DOF")
                    break
    return out


@dataclass(frozen=True, eq=False)
class MechanicalSystem:
    """Second-order system ``M x'' + V x' + K x = f`` with labelled DOFs."""

    M: np.ndarray
    K: np.ndarray
    V: np.ndarray
    dofs: tuple[DofLabel, ...]

    def __post_init__(self):
        for name in ("M", "K", "V"):
            object.__setattr__(self, name, _frozen(np.atleast_2d(getattr(self, name))))
        object.__setattr__(self, "dofs", tuple(self.dofs))
        problems = validate_system(self)
        if problems:
            raise ModelError("; ".join(problems))

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]


def validate_system(s: MechanicalSystem, rtol: float = 1e-12) -> list[str]:
    out = []
    n = len(s.dofs)
    for name in ("M", "K", "V"):
        mat = getattr(s, name)
        if mat.shape != (n, n):
            out.append(f"{name} shape {mat.shape} ≠ ({n}, {n})")
            continue
        if not np.all(np.isfinite(mat)):
            out.append(f"{name} not finite")
            continue
        scale = max(np.abs(mat).max(), 1.0)
        if np.abs(mat - mat.T).max() > rtol * scale:
            out.append(f"{name} not symmetric")
            continue
        w = np.linalg.eigvalsh(mat) if n else np.zeros(0)
        floor = -1e-10 * scale
        if name == "M":
            if n and w.min() <= 0:
                out.append("M not positive definite")
        elif n and w.min() < floor:
            out.append(f"{name} not positive semidefinite")
    if _duplicates(s.dofs):
        out.append("duplicate DOF labels")
    return out


@dataclass(frozen=True, eq=False)
class FrfMatrix:
    """Complex FRF array of shape ``(n_f, n_o, n_i)`` on a Hz grid."""

    freqs_hz: np.ndarray
    H: np.ndarray
    response_kind: str
    inputs: tuple[DofLabel, ...]
    outputs: tuple[DofLabel, ...]

    def __post_init__(self):
        f = _frozen(np.atleast_1d(self.freqs_hz))
        H = _frozen(self.H, dtype=complex)
        object.__setattr__(self, "freqs_hz", f)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if H.ndim != 3 or H.shape != (f.size, len(self.outputs), len(self.inputs)):
            raise ModelError(
                f"FRF shape {H.shape} inconsistent with {f.size} freqs, "
                f"{len(self.outputs)} outputs, {len(self.inputs)} inputs"
            )
        if self.response_kind not in RESPONSE_KINDS:
            raise ModelError(f"unknown response kind {self.response_kind!r}")

    @property
    def omega(self) -> np.ndarray:
        return 2 * np.pi * self.freqs_hz

    def select(self, outputs: Sequence[DofLabel] | None = None,
               inputs: Sequence[DofLabel] | None = None) -> "FrfMatrix":
        """Sub-FRF in the given label order."""
        oi = [_index_of(self.outputs, lab, "output") for lab in (outputs or self.outputs)]
        ii = [_index_of(self.inputs, lab, "input") for lab in (inputs or self.inputs)]
        return replace(
            self,
            H=self.H[:, oi][:, :, ii],
            outputs=tuple(self.outputs[i] for i in oi),
            inputs=tuple(self.inputs[i] for i in ii),
        )

    def relabel(self, outputs=None, inputs=None) -> "FrfMatrix":
        return replace(self, outputs=tuple(outputs or self.outputs),
                       inputs=tuple(inputs or self.inputs))


def validate_frf(f: FrfMatrix) -> list[str]:
    out = []
    if f.freqs_hz.size < 1:
        out.append("empty frequency grid")
    if np.any(np.diff(f.freqs_hz) <= 0):
        out.append("frequencies not strictly increasing")
    bad = np.argwhere(~np.isfinite(f.H))
    if bad.size:
        k, i, j = bad[0]
        out.append(f"H not finite at {f.freqs_hz[k]:g} Hz ({f.outputs[i]}, {f.inputs[j]})")
    return out


def block_diag(*mats: np.ndarray) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols), dtype=np.result_type(*mats) if mats else float)
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out
