"""File formats: model and pairing JSON, FRF CSV, and JSON reports.

Model JSON is canonical (fixed key order, one matrix row per line, shortest
round-trip float repr), so ``save(load(path))`` reproduces ``path`` byte for
byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .example import ExampleConfig
from .interface import DofPair, InterfacePairing
from .model import DofLabel, FrfMatrix, LabelError, ModelError, StateSpaceModel

FRF_HEADER = ["freq_hz", "out_label", "in_label", "re", "im"]


def label_to_dict(lab: DofLabel) -> dict:
    return {"component": lab.component, "node": lab.node,
            "direction": lab.direction, "kind": lab.kind}


def label_from_dict(d: dict) -> DofLabel:
    try:
        return DofLabel(str(d["component"]), str(d["node"]),
                        d.get("direction", "scalar"), d.get("kind", "internal"))
    except KeyError as e:
        raise LabelError(f"label missing field {e}") from None


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ModelError(f"non-finite value {x} cannot be written")
    return repr(x)


def _matrix(M: np.ndarray, indent: str) -> str:
    if M.shape[0] == 0:
        return "[]"
    rows = ["[" + ",".join(_num(v) for v in row) + "]" for row in M]
    return "[\n" + ",\n".join(indent + "  " + r for r in rows) + "\n" + indent + "]"


def dumps_model(m: StateSpaceModel) -> str:
    d = lambda obj: json.dumps(obj, ensure_ascii=False)
    parts = [
        f'  "output_kind": {d(m.output_kind)}',
        '  "inputs": [' + ", ".join(d(label_to_dict(l)) for l in m.inputs) + "]",
        '  "outputs": [' + ", ".join(d(label_to_dict(l)) for l in m.outputs) + "]",
    ]
    for name in "ABCD":
        parts.append(f'  "{name}": {_matrix(getattr(m, name), "  ")}')
    parts.append(f'  "state_tags": {d(list(m.state_tags))}')
    sd = [None if l is None else label_to_dict(l) for l in m.state_dofs]
    parts.append('  "state_dofs": [' + ", ".join(d(x) for x in sd) + "]")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def loads_model(text: str) -> StateSpaceModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"model JSON malformed: {e}") from None
    missing = [k for k in ("output_kind", "inputs", "outputs", "A", "B", "C", "D") if k not in d]
    if missing:
        raise ModelError(f"model JSON missing {', '.join(missing)}")
    inputs = [label_from_dict(x) for x in d["inputs"]]
    outputs = [label_from_dict(x) for x in d["outputs"]]
    n = len(d["A"])
    sd = d.get("state_dofs") or []
    m = StateSpaceModel(
        np.array(d["A"], dtype=float).reshape(n, n),
        np.array(d["B"], dtype=float).reshape(n, len(inputs)),
        np.array(d["C"], dtype=float).reshape(len(outputs), n),
        np.array(d["D"], dtype=float).reshape(len(outputs), len(inputs)),
        d["output_kind"], inputs, outputs,
        tuple(d.get("state_tags") or ()),
        tuple(None if x is None else label_from_dict(x) for x in sd),
    )
    return m.checked()


def save_model(m: StateSpaceModel, path) -> None:
    Path(path).write_text(dumps_model(m), encoding="utf-8")


def load_model(path) -> StateSpaceModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))


def pairing_to_dict(p: InterfacePairing) -> dict:
    out = []
    for q in p.pairs:
        e = {"a": label_to_dict(q.a), "b": label_to_dict(q.b)}
        if (q.a_model, q.b_model) != (0, 1):
            e["a_model"], e["b_model"] = q.a_model, q.b_model
        if q.sign != 1:
            e["sign"] = q.sign
        out.append(e)
    return {"pairs": out}


def pairing_from_dict(d: dict) -> InterfacePairing:
    if "pairs" not in d:
        raise LabelError("pairing JSON needs a 'pairs' list")
    return InterfacePairing(tuple(
        DofPair(label_from_dict(e["a"]), label_from_dict(e["b"]),
                int(e.get("a_model", 0)), int(e.get("b_model", 1)), int(e.get("sign", 1)))
        for e in d["pairs"]))


def save_pairing(p: InterfacePairing, path) -> None:
    write_json(pairing_to_dict(p), path)


def load_pairing(path) -> InterfacePairing:
    return pairing_from_dict(read_json(path))


def load_labels(path) -> list[DofLabel]:
    """A JSON list of labels, either dicts or ``"A:a1"`` strings."""
    d = read_json(path)
    if isinstance(d, dict):
        d = d.get("labels", d.get("keep"))
    if not isinstance(d, list):
        raise LabelError("label file must hold a list")
    return [DofLabel.parse(x) if isinstance(x, str) else label_from_dict(x) for x in d]


def write_frf_csv(f: FrfMatrix, path) -> None:
    """One row per (frequency, output, input); NaN marks a failed frequency."""
    outs = [str(l) for l in f.outputs]
    ins = [str(l) for l in f.inputs]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FRF_HEADER)
        for k, hz in enumerate(f.freqs_hz):
            Hk = f.H[k]
            for o, ol in enumerate(outs):
                for i, il in enumerate(ins):
                    z = Hk[o, i]
                    w.writerow([repr(float(hz)), ol, il, repr(float(z.real)), repr(float(z.imag))])


def read_frf_csv(path, response_kind: str = "accelerance") -> FrfMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != FRF_HEADER:
        raise ModelError(f"{path}: expected header {','.join(FRF_HEADER)}")
    freqs: dict[float, int] = {}
    outs: dict[str, int] = {}
    ins: dict[str, int] = {}
    vals = []
    for r in rows[1:]:
        if not r:
            continue
        if len(r) != 5:
            raise ModelError(f"{path}: malformed row {r}")
        hz, ol, il = float(r[0]), r[1], r[2]
        freqs.setdefault(hz, len(freqs))
        outs.setdefault(ol, len(outs))
        ins.setdefault(il, len(ins))
        vals.append((freqs[hz], outs[ol], ins[il], complex(float(r[3]), float(r[4]))))
    H = np.full((len(freqs), len(outs), len(ins)), np.nan + 0j)
    seen = np.zeros(H.shape, bool)
    for k, o, i, z in vals:
        H[k, o, i] = z
        seen[k, o, i] = True
    if not seen.all():
        raise ModelError(f"{path}: FRF table incomplete")
    f = np.array(list(freqs))
    if np.any(np.diff(f) <= 0):
        raise ModelError(f"{path}: frequencies must be ascending")
    return FrfMatrix(f, H, response_kind,
                     tuple(DofLabel.parse(x) for x in ins),
                     tuple(DofLabel.parse(x) for x in outs))


def write_json(obj: Any, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n", encoding="utf-8")


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: malformed JSON ({e})") from None


def save_config(cfg: ExampleConfig, path) -> None:
    write_json(cfg.to_dict(), path)


def load_config(path) -> ExampleConfig:
    return ExampleConfig.from_dict(read_json(path))


def labels_to_json(labels: Sequence[DofLabel]) -> list[str]:
    return [str(l) for l in labels]
