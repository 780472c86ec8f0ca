"""Two-component lumped-mass example, its global-assembly oracle, and the
interface-inversion benchmark.

Default parameters (masses in kg, damping in N s/m, stiffness in N/m)::

    a1  10  30  1.5e5        p1   5  50  1.0e5
    a2   3  50  5.0e5        p2   7  50  1.5e5
    a3   3  50  4.5e5        p3  10  10  5.0e3
                             p4   1   -   -

Component A: ground-a1 (a1), a1-a2 (a2), a1-a3 (a3).
Component B: p1-p3 (p1), p2-p3 (p2), p3-p4 (p3).
Interface: a2 <-> p1, a3 <-> p2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .interface import DofPair, InterfacePairing
from .model import DofLabel, FrfMatrix, MechanicalSystem, ModelError

GROUND = "ground"

TABLE2: dict[str, tuple[float, Optional[float], Optional[float]]] = {
    "a1": (10.0, 30.0, 1.5e5),
    "a2": (3.0, 50.0, 5e5),
    "a3": (3.0, 50.0, 4.5e5),
    "p1": (5.0, 50.0, 1e5),
    "p2": (7.0, 50.0, 1.5e5),
    "p3": (10.0, 10.0, 5e3),
    "p4": (1.0, None, None),
}


@dataclass(frozen=True)
class Connection:
    """Spring/damper between two nodes (or a node and ground), using the
    ``(c, k)`` values of parameter row ``param``."""

    param: str
    node_a: str
    node_b: str


@dataclass
class ExampleConfig:
    parameters: dict[str, tuple[float, Optional[float], Optional[float]]] = field(
        default_factory=lambda: dict(TABLE2))
    components: dict[str, list[str]] = field(
        default_factory=lambda: {"A": ["a1", "a2", "a3"], "B": ["p1", "p2", "p3", "p4"]})
    topology: list[Connection] = field(default_factory=lambda: [
        Connection("a1", GROUND, "a1"),
        Connection("a2", "a1", "a2"),
        Connection("a3", "a1", "a3"),
        Connection("p1", "p1", "p3"),
        Connection("p2", "p2", "p3"),
        Connection("p3", "p3", "p4"),
    ])
    interface_pairs: list[tuple[str, str]] = field(
        default_factory=lambda: [("a2", "p1"), ("a3", "p2")])

    def validate(self) -> None:
        for node, (m, _, _) in self.parameters.items():
            if not m > 0:
                raise ModelError(f"mass of {node} must be positive")
        owner = self.owner()
        for con in self.topology:
            for node in (con.node_a, con.node_b):
                if node != GROUND and node not in owner:
                    raise ModelError(f"connection {con.param} uses unknown node {node}")
            p = self.parameters.get(con.param)
            if p is None or p[1] is None or p[2] is None:
                raise ModelError(f"connection {con.param} has no stiffness/damping values")
            if con.node_a != GROUND and con.node_b != GROUND and \
                    owner[con.node_a] != owner[con.node_b]:
                raise ModelError(f"connection {con.param} spans two components")
        if len(self.components) != 2:
            raise ModelError("the example couples exactly two components")
        first, second = self.components
        for a, b in self.interface_pairs:
            if owner.get(a) != first or owner.get(b) != second:
                raise ModelError(f"interface pair ({a}, {b}) must join {first} to {second}")

    def owner(self) -> dict[str, str]:
        return {node: comp for comp, nodes in self.components.items() for node in nodes}

    def to_dict(self) -> dict:
        return {
            "parameters": {k: {"m": v[0], "c": v[1], "k": v[2]} for k, v in self.parameters.items()},
            "components": self.components,
            "topology": [{"param": c.param, "from": c.node_a, "to": c.node_b} for c in self.topology],
            "interface_pairs": [list(p) for p in self.interface_pairs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExampleConfig":
        cfg = cls()
        if "parameters" in d:
            cfg.parameters = {k: (v["m"], v.get("c"), v.get("k")) for k, v in d["parameters"].items()}
        if "components" in d:
            cfg.components = {k: list(v) for k, v in d["components"].items()}
        if "topology" in d:
            cfg.topology = [Connection(c["param"], c["from"], c["to"]) for c in d["topology"]]
        if "interface_pairs" in d:
            cfg.interface_pairs = [tuple(p) for p in d["interface_pairs"]]
        return cfg


def _assemble(nodes: Sequence[str], dof_of: dict[str, int], cfg: ExampleConfig,
              connections: Sequence[Connection], labels: Sequence[DofLabel],
              extra_mass: dict[str, float] = {}) -> MechanicalSystem:
    n = len(labels)
    M = np.zeros((n, n))
    K = np.zeros((n, n))
    V = np.zeros((n, n))
    for node in nodes:
        M[dof_of[node], dof_of[node]] += cfg.parameters[node][0]
    for node, m in extra_mass.items():
        M[dof_of[node], dof_of[node]] += m
    for con in connections:
        _, c, k = cfg.parameters[con.param]
        ends = [dof_of[x] for x in (con.node_a, con.node_b) if x != GROUND]
        for mat, val in ((K, k), (V, c)):
            if len(ends) == 1:
                mat[ends[0], ends[0]] += val
            else:
                i, j = ends
                mat[i, i] += val
                mat[j, j] += val
                mat[i, j] -= val
                mat[j, i] -= val
    return MechanicalSystem(M, K, V, tuple(labels))


def build_example(cfg: ExampleConfig | None = None):
    """Return ``(system_A, system_B, assembled_system, pairing)``.

    DOF labels are ``A:a1`` etc. In the assembled system each interface pair is
    merged into the DOF of the first component, which carries both masses.
    """
    cfg = cfg or ExampleConfig()
    cfg.validate()
    owner = cfg.owner()
    (ca, nodes_a), (cb, nodes_b) = cfg.components.items()

    def system_of(comp, nodes):
        dof_of = {node: i for i, node in enumerate(nodes)}
        cons = [c for c in cfg.topology
                if owner.get(c.node_a, comp if c.node_a == GROUND else None) == comp
                and owner.get(c.node_b, comp if c.node_b == GROUND else None) == comp]
        return _assemble(nodes, dof_of, cfg, cons, [DofLabel(comp, x) for x in nodes])

    sys_a = system_of(ca, nodes_a)
    sys_b = system_of(cb, nodes_b)

    merged = {b: a for a, b in cfg.interface_pairs}
    asm_nodes = list(nodes_a) + [x for x in nodes_b if x not in merged]
    dof_of = {node: i for i, node in enumerate(asm_nodes)}
    for b, a in merged.items():
        dof_of[b] = dof_of[a]
    labels = [DofLabel(owner[x], x) for x in asm_nodes]
    extra = {a: cfg.parameters[b][0] for b, a in merged.items()}
    asm = _assemble(asm_nodes, dof_of, cfg, cfg.topology, labels, extra_mass=extra)

    pairing = InterfacePairing(tuple(
        DofPair(DofLabel(ca, a, kind="interface"), DofLabel(cb, b, kind="interface"))
        for a, b in cfg.interface_pairs))
    return sys_a, sys_b, asm, pairing


def oracle_frf(sys: MechanicalSystem, freqs_hz: Sequence[float]) -> FrfMatrix:
    """Accelerance ``-w^2 (-w^2 M + i w V + K)^-1`` by direct inversion per frequency."""
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    w = 2 * np.pi * f
    Z = -w[:, None, None] ** 2 * sys.M + 1j * w[:, None, None] * sys.V + sys.K
    n = sys.n_dof
    H = np.empty((f.size, n, n), dtype=complex)
    for k in range(f.size):
        try:
            H[k] = -w[k] ** 2 * np.linalg.inv(Z[k])
        except np.linalg.LinAlgError:
            raise ModelError(f"dynamic stiffness singular at {f[k]:g} Hz") from None
    return FrfMatrix(f, H, "accelerance", sys.dofs, sys.dofs)


def _timed(fn, trials: int, warmup: int) -> np.ndarray:
    for _ in range(warmup):
        fn()
    out = np.empty(trials)
    clock = time.perf_counter
    for t in range(trials):
        t0 = clock()
        fn()
        out[t] = clock() - t0
    return out


def confirm_solve_counts() -> dict:
    """Solve counts of one LM-SSS and one classical coupling of the default example."""
    from .factory import build_model
    from .linalg import count_solves
    from .lmsss import CouplingProblem, couple_accel
    from .reference import classical_couple

    sa, sb, _, pairing = build_example()
    models = [build_model(sa, "accel"), build_model(sb, "accel")]
    with count_solves() as lm:
        couple_accel(CouplingProblem(models, pairing))
    with count_solves() as cl:
        classical_couple(models, pairing)
    return {"lmsss": lm.count, "classical": cl.count}


def bench_inversions(n_J_list: Sequence[int] = (1, 2, 6, 12), trials: int = 10000,
                     seed: int = 0, warmup: int = 50) -> dict:
    """Time the interface inversions of LM-SSS and classical SSS.

    LM-SSS inverts one ``n_J x n_J`` operator; classical SSS inverts a
    ``2 n_J x 2 n_J`` feed-through block and then an ``n_J x n_J`` Schur
    complement. Matrices are random, well conditioned and seeded.
    """
    from scipy.stats import spearmanr

    from .linalg import count_solves, interface_solve

    if trials < 100:
        raise ValueError("trials must be at least 100")
    counts = confirm_solve_counts()
    rng = np.random.default_rng(seed)
    rows = []
    for nj in n_J_list:
        if nj < 1:
            raise ValueError("n_J must be positive")
        G = rng.standard_normal((nj, nj)) + nj * np.eye(nj)
        D = rng.standard_normal((2 * nj, 2 * nj)) + 2 * nj * np.eye(2 * nj)
        T = np.hstack([np.eye(nj), -np.eye(nj)])
        I1, I2 = np.eye(nj), np.eye(2 * nj)

        def lm():
            interface_solve(G, I1, check=False)

        def classical():
            Dinv = interface_solve(D, I2, check=False)
            interface_solve(T @ Dinv @ T.T, I1, check=False)

        with count_solves() as c_lm:
            lm()
        with count_solves() as c_cl:
            classical()
        t_lm = _timed(lm, trials, warmup)
        t_cl = _timed(classical, trials, warmup)
        rows.append({
            "n_J": int(nj),
            "trials": int(trials),
            "solves": {"lmsss": c_lm.count, "classical": c_cl.count},
            "lmsss": {"mean_s": float(t_lm.mean()), "median_s": float(np.median(t_lm))},
            "classical": {"mean_s": float(t_cl.mean()), "median_s": float(np.median(t_cl))},
            "ratio_mean": float(t_cl.mean() / t_lm.mean()),
            "ratio_median": float(np.median(t_cl) / np.median(t_lm)),
        })
    rho = None
    if len(rows) >= 3:
        r = spearmanr([x["n_J"] for x in rows], [x["ratio_median"] for x in rows])[0]
        rho = None if np.isnan(r) else float(r)
    return {"coupling_solve_counts": counts, "results": rows, "trend_spearman_rho": rho}
