"""Command-line front end. Every command reads and writes files.

Exit codes: 0 success, 1 validation or comparison failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .compare import compare_frf
from .example import ExampleConfig, bench_inversions, build_example, oracle_frf
from .factory import NoiseSpec, build_model, frequency_grid, perturb_frf, synth_frf
from .forms import reduce_minimal, to_coupling_form
from .interface import DofPair, InterfacePairing
from .lmsss import CouplingProblem, couple, decouple, retain_unique_dofs, stability_summary
from .model import RankDeficiencyError, StateSpaceModel, SubstructuringError
from .reference import dynamic_stiffness, lmfbs_couple, lmfbs_decouple

log = logging.getLogger("dynsub")


def transform_models(models: Sequence[StateSpaceModel], interfaces, form: str):
    """Put every model in coupling form ``form`` with respect to its interface
    labels; returns ``(models, reports)``."""
    out, reports = [], []
    for i, (m, iface) in enumerate(zip(models, interfaces)):
        tm, tr = to_coupling_form(m, iface, form)
        reports.append(tr.report())
        if tm is None:
            raise RankDeficiencyError(
                f"{form} transformation of model {i} is rank deficient "
                f"(condition number {tr.condition_number:.3g}, residual {tr.ncf_residual:.3g})")
        out.append(tm)
    return out, reports


def couple_pipeline(models: Sequence[StateSpaceModel], pairing: InterfacePairing,
                    variant: str = "accel", form: str = "none", minimal: bool = False,
                    retain_unique: bool = True):
    """Optional coupling-form transform, coupling, minimal reduction, retention.

    Returns ``(model, transform_reports)``.
    """
    reports: list[dict] = []
    if form.lower() != "none":
        ifaces = [pairing.labels_on(i) for i in range(len(models))]
        models, reports = transform_models(models, ifaces, form.upper())
    elif minimal:
        raise RankDeficiencyError("minimal-order coupling needs models in coupling form")
    p = CouplingProblem(tuple(models), pairing)
    m = couple(p, variant, retain_unique=False)
    if minimal:
        m = reduce_minimal(m, [(q.a, q.b) for q in pairing.pairs])
    if retain_unique:
        m = retain_unique_dofs(m, p.output_map, p.input_map)
    return m, reports


def _grid(a) -> np.ndarray:
    if a.df <= 0 or a.fmax < a.fmin:
        raise ValueError("need df > 0 and fmax >= fmin")
    return frequency_grid(a.fmin, a.fmax, a.df)


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fmin", type=float, default=20.0)
    p.add_argument("--fmax", type=float, default=500.0)
    p.add_argument("--df", type=float, default=0.25)


def cmd_example(a) -> int:
    cfg = io.load_config(a.config) if a.config else ExampleConfig()
    sa, sb, sab, pairing = build_example(cfg)
    if a.action == "oracle":
        which = {"A": sa, "B": sb, "AB": sab}[a.system]
        io.write_frf_csv(oracle_frf(which, _grid(a)), a.out)
        return 0
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, s in (("A", sa), ("B", sb), ("AB", sab)):
        io.save_model(build_model(s, a.kind), out / f"{name}.json")
    io.save_pairing(pairing, out / "pairs.json")
    # removing A from AB: the merged DOFs carry A's labels in the assembly
    ca = pairing.pairs[0].a.component if len(pairing) else "A"
    rm = InterfacePairing(tuple(DofPair(l, l) for l in sa.dofs if l in
                                [q.a for q in pairing.pairs]))
    io.save_pairing(rm, out / f"remove_{ca}_pairs.json")
    kept = [l for l in sab.dofs if l.component != ca or l in [q.a for q in pairing.pairs]]
    io.write_json(io.labels_to_json(kept), out / f"keep_without_{ca}.json")
    io.save_config(cfg, out / "config.json")
    return 0


def cmd_couple(a) -> int:
    models = [io.load_model(p) for p in a.models]
    pairing = io.load_pairing(a.pairs)
    m, reports = couple_pipeline(models, pairing, a.variant, a.form, a.minimal, a.retain_unique)
    io.save_model(m, a.out)
    if a.report:
        io.write_json({"transforms": reports, "stability": stability_summary(m)}, a.report)
    log.info("coupled model: %d states", m.n_states)
    return 0


def cmd_decouple(a) -> int:
    asm = io.load_model(a.assembly)
    rem = io.load_model(a.remove)
    pairing = io.load_pairing(a.pairs)
    keep = io.load_labels(a.keep) if a.keep else None
    if a.form != "none":
        (asm, rem), _ = transform_models(
            [asm, rem], [pairing.labels_on(0), pairing.labels_on(1)], a.form.upper())
    elif a.minimal:
        raise RankDeficiencyError("minimal-order decoupling needs --form")
    m = decouple(asm, rem, pairing, keep=keep, minimal=a.minimal)
    io.save_model(m, a.out)
    return 0


def cmd_transform(a) -> int:
    m = io.load_model(a.model)
    labs = io.load_labels(a.interface)
    tm, tr = to_coupling_form(m, labs, a.form.upper())
    if a.report:
        io.write_json(tr.report(), a.report)
    if tm is None:
        print(f"{a.form.upper()} transformation rank deficient "
              f"(condition number {tr.condition_number:.3g})", file=sys.stderr)
        return 1
    io.save_model(tm, a.out)
    return 0


def cmd_reduce(a) -> int:
    m = io.load_model(a.model)
    pairing = io.load_pairing(a.pairs)
    io.save_model(reduce_minimal(m, [(q.a, q.b) for q in pairing.pairs]), a.out)
    return 0


def cmd_frf(a) -> int:
    if a.action == "perturb":
        if not a.input:
            raise _Usage("frf perturb needs --in")
        f = io.read_frf_csv(a.input)
        io.write_frf_csv(perturb_frf(f, NoiseSpec(a.sigma, a.seed)), a.out)
        return 0
    if not a.model:
        raise _Usage("frf needs --model")
    io.write_frf_csv(synth_frf(io.load_model(a.model), _grid(a)), a.out)
    return 0


def cmd_lmfbs(a) -> int:
    pairing = io.load_pairing(a.pairs)
    if a.action == "couple":
        if not a.frfs:
            raise _Usage("lmfbs couple needs --frfs")
        frfs = [io.read_frf_csv(p) for p in a.frfs]
        res, bad = lmfbs_couple(frfs, pairing, retain_unique=a.retain_unique, on_singular="mark")
        io.write_frf_csv(res, a.out)
        for hz in bad:
            print(f"interface operator singular at {hz:g} Hz (marked NaN)", file=sys.stderr)
        return 0
    if not (a.assembly and a.remove):
        raise _Usage("lmfbs decouple needs --assembly and --remove")
    keep = io.load_labels(a.keep) if a.keep else None
    res = lmfbs_decouple(io.read_frf_csv(a.assembly), io.read_frf_csv(a.remove), pairing, keep)
    io.write_frf_csv(res, a.out)
    return 0


def cmd_stiffness(a) -> int:
    io.write_frf_csv(dynamic_stiffness(io.read_frf_csv(a.input)), a.out)
    return 0


def cmd_compare(a) -> int:
    res = compare_frf(io.read_frf_csv(a.a), io.read_frf_csv(a.b), a.tol)
    if a.report:
        io.write_json(res.report(), a.report)
    print(f"max_rel_err={res.max_rel_err:.3e} at {res.argmax[0]:g} Hz "
          f"({res.argmax[1]} <- {res.argmax[2]}) tol={res.tolerance:g} "
          f"{'PASS' if res.passed else 'FAIL'}")
    return 0 if res.passed else 1


def cmd_bench(a) -> int:
    njs = [int(x) for x in a.njs.split(",") if x.strip()]
    rep = bench_inversions(njs, a.trials, seed=a.seed)
    if a.report:
        io.write_json(rep, a.report)
    for r in rep["results"]:
        print(f"n_J={r['n_J']:3d}  LM-SSS {r['lmsss']['median_s']:.3e} s  "
              f"classical {r['classical']['median_s']:.3e} s  ratio {r['ratio_median']:.2f}")
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynsub", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="build the two-component example or its oracle FRF")
    p.add_argument("action", choices=["build", "oracle"])
    p.add_argument("--config")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--kind", choices=["accel", "vel", "disp"], default="accel")
    p.add_argument("--system", choices=["A", "B", "AB"], default="AB")
    p.add_argument("--out", default="oracle.csv")
    _add_grid(p)
    p.set_defaults(fn=cmd_example)

    p = sub.add_parser("couple", help="couple state-space models")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--variant", choices=["accel", "disp", "vel"], default="accel")
    p.add_argument("--form", choices=["none", "ucf", "sacf", "ncf"], default="none")
    p.add_argument("--minimal", action="store_true")
    p.add_argument("--retain-unique", action="store_true")
    p.add_argument("--report")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_couple)

    p = sub.add_parser("decouple", help="remove a component from an assembly model")
    p.add_argument("--assembly", required=True)
    p.add_argument("--remove", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--keep")
    p.add_argument("--form", choices=["none", "ucf", "sacf", "ncf"], default="none")
    p.add_argument("--minimal", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_decouple)

    p = sub.add_parser("transform", help="similarity transform to a coupling form")
    p.add_argument("--model", required=True)
    p.add_argument("--interface", required=True, help="JSON list of interface labels")
    p.add_argument("--form", choices=["ucf", "sacf", "ncf"], required=True)
    p.add_argument("--report")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("reduce", help="remove duplicated interface states")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("frf", help="synthesize or perturb an FRF")
    p.add_argument("action", nargs="?", choices=["synth", "perturb"], default="synth")
    p.add_argument("--model")
    p.add_argument("--in", dest="input")
    p.add_argument("--sigma", type=float, default=5e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_grid(p)
    p.set_defaults(fn=cmd_frf)

    p = sub.add_parser("lmfbs", help="frequency-domain coupling on FRF CSVs")
    p.add_argument("action", choices=["couple", "decouple"])
    p.add_argument("--frfs", nargs="+")
    p.add_argument("--assembly")
    p.add_argument("--remove")
    p.add_argument("--pairs", required=True)
    p.add_argument("--keep")
    p.add_argument("--retain-unique", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_lmfbs)

    p = sub.add_parser("stiffness", help="dynamic stiffness from an accelerance CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_stiffness)

    p = sub.add_parser("compare", help="max relative error between two FRF CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("bench", help="time interface inversions")
    p.add_argument("--njs", default="1,2,6,12")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return a.fn(a)
    except _Usage as e:
        ap.print_usage(sys.stderr)
        print(f"dynsub: error: {e}", file=sys.stderr)
        return 2
    except (SubstructuringError, ValueError, OSError, KeyError) as e:
        print(f"dynsub: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
