"""Elementwise relative FRF error with a floor tied to the largest magnitude."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FrfMatrix, LabelError, ModelError

FLOOR = 1e-12


@dataclass(frozen=True)
class ComparisonResult:
    max_rel_err: float
    argmax: tuple[float, str, str]
    passed: bool
    tolerance: float

    def report(self) -> dict:
        return {
            "max_rel_err": self.max_rel_err,
            "argmax_freq_hz": self.argmax[0],
            "argmax_output": self.argmax[1],
            "argmax_input": self.argmax[2],
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def rel_error(a: np.ndarray, b: np.ndarray, floor: float = FLOOR) -> np.ndarray:
    """``|a - b| / max(|a|, |b|, floor * global max)``, elementwise.

    NaN entries (marked frequencies) count as infinite error.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ModelError(f"shape mismatch {a.shape} vs {b.shape}")
    mag = np.maximum(np.abs(a), np.abs(b))
    top = np.nanmax(mag) if mag.size and np.isfinite(mag).any() else 0.0
    den = np.maximum(mag, floor * top)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.abs(a - b) / den
    r[den == 0] = 0.0
    r[np.isnan(r)] = np.inf
    return r


def max_rel_error(a: np.ndarray, b: np.ndarray) -> float:
    r = rel_error(a, b)
    return float(r.max()) if r.size else 0.0


def compare_frf(a: FrfMatrix, b: FrfMatrix, tolerance: float) -> ComparisonResult:
    """Compare two FRFs on the same grid; ``b`` is reordered to ``a``'s labels."""
    if a.freqs_hz.shape != b.freqs_hz.shape or not np.allclose(a.freqs_hz, b.freqs_hz,
                                                                 rtol=1e-12, atol=0):
        raise ModelError("frequency grids differ")
    try:
        b = b.select(a.outputs, a.inputs)
    except LabelError as e:
        raise LabelError(f"label sets differ: {e}") from None
    r = rel_error(a.H, b.H)
    if r.size == 0:
        return ComparisonResult(0.0, (float("nan"), "", ""), True, tolerance)
    k, o, i = np.unravel_index(int(np.argmax(r)), r.shape)
    err = float(r[k, o, i])
    where = (float(a.freqs_hz[k]), str(a.outputs[o]), str(a.inputs[i]))
    return ComparisonResult(err, where, bool(err <= tolerance), float(tolerance))
