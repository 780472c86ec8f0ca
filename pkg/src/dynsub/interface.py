"""Signed Boolean mapping matrices, Boolean localization matrices and their
state-level counterparts used to remove duplicated interface states.

Nullspaces of Boolean matrices are built combinatorially so that
``B_M @ L == 0`` holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DERIV, IFACE, DofLabel, LabelError, ModelError

# a global DOF is identified by (model index, label)
GlobalDof = tuple[int, DofLabel]


@dataclass(frozen=True)
class DofPair:
    """One connection: ``a`` on model ``a_model`` meets ``b`` on model ``b_model``.

    ``sign`` is the entry given to ``a`` in the mapping row; ``b`` gets ``-sign``.
    """

    a: DofLabel
    b: DofLabel
    a_model: int = 0
    b_model: int = 1
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise LabelError("pair sign must be +1 or -1")


@dataclass(frozen=True)
class InterfacePairing:
    pairs: tuple[DofPair, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen = set()
        for p in self.pairs:
            for dof in ((p.a_model, p.a.key), (p.b_model, p.b.key)):
                if dof in seen:
                    raise LabelError(f"duplicate pairing of {dof[1]} on model {dof[0]}")
                seen.add(dof)

    @classmethod
    def between(cls, labels_a: Sequence[DofLabel], labels_b: Sequence[DofLabel],
                a_model: int = 0, b_model: int = 1) -> "InterfacePairing":
        if len(labels_a) != len(labels_b):
            raise LabelError("pair lists differ in length")
        return cls(tuple(DofPair(a, b, a_model, b_model) for a, b in zip(labels_a, labels_b)))

    def __len__(self) -> int:
        return len(self.pairs)

    def labels_on(self, model: int) -> list[DofLabel]:
        """Interface labels of one model, in pair order."""
        out = []
        for p in self.pairs:
            if p.a_model == model:
                out.append(p.a)
            if p.b_model == model:
                out.append(p.b)
        return out

    def flipped(self, index: int) -> "InterfacePairing":
        pairs = list(self.pairs)
        p = pairs[index]
        pairs[index] = DofPair(p.a, p.b, p.a_model, p.b_model, -p.sign)
        return InterfacePairing(tuple(pairs))


@dataclass(frozen=True, eq=False)
class InterfaceMap:
    """``B_M`` (pairs × N) with its Boolean localization matrix ``L`` (N × (N − pairs))."""

    B_M: np.ndarray
    L: np.ndarray
    column_labels: tuple[GlobalDof, ...]
    kept: tuple[int, ...]

    @property
    def unique_labels(self) -> tuple[DofLabel, ...]:
        return tuple(self.column_labels[i][1] for i in self.kept)


def _boolean_pair_maps(n: int, pairs: Sequence[tuple[int, int, int]]):
    """Signed mapping and localization for index pairs ``(keep, drop, sign)``."""
    B = np.zeros((len(pairs), n))
    partner: dict[int, int] = {}
    dropped = set()
    for r, (i, j, sign) in enumerate(pairs):
        if i == j:
            raise LabelError("a DOF cannot be paired with itself")
        B[r, i] = sign
        B[r, j] = -sign
        partner[i] = j
        dropped.add(j)
    kept = [i for i in range(n) if i not in dropped]
    L = np.zeros((n, len(kept)))
    for c, i in enumerate(kept):
        L[i, c] = 1.0
        if i in partner:
            L[partner[i], c] = 1.0
    return B, L, tuple(kept)


def build_mapping(labels: Sequence[GlobalDof], pairing: InterfacePairing) -> InterfaceMap:
    """Build ``B_M`` and ``L`` over the global DOF list ``labels``.

    The first-listed DOF of every pair is the one kept in the unique set.
    """
    index = {}
    for i, (model, lab) in enumerate(labels):
        index[(model, lab.key)] = i
    idx_pairs = []
    for p in pairing.pairs:
        try:
            i = index[(p.a_model, p.a.key)]
            j = index[(p.b_model, p.b.key)]
        except KeyError as exc:
            raise LabelError(f"paired label not found: {exc.args[0]}") from None
        idx_pairs.append((i, j, p.sign))
    B, L, kept = _boolean_pair_maps(len(labels), idx_pairs)
    return InterfaceMap(B, L, tuple(labels), kept)


def boolean_pinv(L: np.ndarray) -> np.ndarray:
    """Pseudoinverse ``(L^T L)^-1 L^T`` of a Boolean matrix with orthogonal columns."""
    L = np.asarray(L, dtype=float)
    if L.size and not np.all((L == 0) | (L == 1)):
        raise ModelError("localization matrix is not Boolean")
    gram = L.T @ L
    d = np.diag(gram).copy()
    if np.any(d == 0):
        raise ModelError("localization matrix has a zero column")
    if np.any(gram - np.diag(d)):
        raise ModelError("localization matrix columns are not orthogonal")
    return L.T / d[:, None]


@dataclass(frozen=True, eq=False)
class StateReductionMap:
    B_T: np.ndarray
    L_T: np.ndarray
    kept: tuple[int, ...]


def build_state_reduction(state_tags: Sequence[str], state_dofs: Sequence[DofLabel | None],
                          pairs: Sequence[tuple[DofLabel, DofLabel]]) -> StateReductionMap:
    """State mapping ``B_T`` and state localization ``L_T`` for a coupled model.

    ``pairs`` lists connected interface DOFs by their labels in the coupled
    model. For each pair the interface-output state and its derivative on the
    second side are tied to those on the first side, which are kept.
    """
    where: dict[tuple[str, tuple], int] = {}
    for i, (tag, dof) in enumerate(zip(state_tags, state_dofs)):
        if tag in (DERIV, IFACE) and dof is not None:
            where[(tag, dof.key)] = i
    idx_pairs = []
    for a, b in pairs:
        for tag in (DERIV, IFACE):
            try:
                idx_pairs.append((where[(tag, a.key)], where[(tag, b.key)], 1))
            except KeyError:
                raise ModelError(f"no {tag} state for pair ({a}, {b})") from None
    # rows grouped as all derivative constraints, then all output constraints
    idx_pairs = idx_pairs[0::2] + idx_pairs[1::2]
    B, L, kept = _boolean_pair_maps(len(state_tags), idx_pairs)
    return StateReductionMap(B, L, kept)
