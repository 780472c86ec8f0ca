"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import numpy as np
import pytest
from scipy.linalg import block_diag

from dynsub import (
    CouplingProblem,
    DofLabel,
    DofPair,
    FrfMatrix,
    InterfacePairing,
    MechanicalSystem,
    NoiseSpec,
    StateSpaceModel,
    bench_inversions,
    build_model,
    classical_couple,
    count_solves,
    couple,
    couple_accel,
    decouple,
    disp_feedthrough_closed_form,
    dynamic_stiffness,
    lmfbs_couple,
    max_rel_error,
    ncf_transform,
    oracle_frf,
    perturb_frf,
    reduce_minimal,
    retain_unique_dofs,
    sacf_transform,
    sjovall_couple,
    synth_frf,
    to_acceleration,
    to_modal_form,
    ucf_transform,
)
from dynsub.model import RankDeficiencyError

pytestmark = pytest.mark.acceptance


def frf_err(model_or_frf, reference: FrfMatrix, grid) -> float:
    f = model_or_frf if isinstance(model_or_frf, FrfMatrix) else synth_frf(model_or_frf, grid)
    return max_rel_error(f.select(reference.outputs, reference.inputs).H, reference.H)


@pytest.fixture(scope="module")
def coupled_accel(example, accel_models):
    p = CouplingProblem(tuple(accel_models), example[3])
    return retain_unique_dofs(couple_accel(p), p.output_map, p.input_map)


def test_01_oracle_equivalence(record, coupled_accel, oracle_ab, grid):
    err = frf_err(coupled_accel, oracle_ab, grid)
    assert record("1 oracle equivalence", err < 1e-8, f"max rel err {err:.2e} (< 1e-8)")


def test_02_lmsss_equals_lmfbs(record, example, accel_models, coupled_accel, grid):
    frfs = [synth_frf(m, grid) for m in accel_models]
    fbs = lmfbs_couple(frfs, example[3], retain_unique=True)
    err = frf_err(coupled_accel, fbs, grid)
    assert record("2 LM-SSS = LM-FBS", err < 1e-10, f"max rel err {err:.2e} (< 1e-10)")


def test_03_method_triangle(record, example, accel_models, disp_models, coupled_accel, grid):
    pairing = example[3]
    classical = classical_couple(accel_models, pairing)
    sa, _ = sacf_transform(disp_models[0], pairing.labels_on(0))
    sb, _ = sacf_transform(disp_models[1], pairing.labels_on(1))
    sj = to_acceleration(sjovall_couple(sa, sb, pairing))
    H_lm = synth_frf(coupled_accel, grid)
    H_cl = synth_frf(classical, grid)
    H_sj = synth_frf(sj, grid)
    e1 = frf_err(H_cl, H_lm, grid)
    e2 = frf_err(H_sj, H_lm, grid)
    e3 = frf_err(H_sj, H_cl.select(H_lm.outputs, H_lm.inputs), grid)
    ok = max(e1, e2, e3) < 1e-8
    assert record("3 method triangle", ok,
                  f"classical {e1:.2e}, SA {e2:.2e}, classical-SA {e3:.2e} (< 1e-8)")


def test_04_displacement_and_velocity_nullity(record, example, disp_models):
    p = CouplingProblem(tuple(disp_models), example[3])
    D_closed, CAB = disp_feedthrough_closed_form(p)
    r_disp = np.abs(D_closed).max() / np.abs(CAB).max()
    m_vel = couple(p, "vel", retain_unique=False)
    d_vel = np.abs(m_vel.D).max()
    ok = r_disp < 1e-10 and d_vel < 1e-12
    assert record("4 feed-through nullity", ok,
                  f"|D_disp|/|CAB| {r_disp:.2e} (< 1e-10), |D_vel| {d_vel:.2e} (< 1e-12)")


def _minimal_pair(models, pairing, transform):
    tm = [transform(m, pairing.labels_on(i))[0] for i, m in enumerate(models)]
    p = CouplingProblem(tuple(tm), pairing)
    full = couple_accel(p)
    red = reduce_minimal(full, [(q.a, q.b) for q in pairing.pairs])
    return (retain_unique_dofs(full, p.output_map, p.input_map),
            retain_unique_dofs(red, p.output_map, p.input_map), tm)


def test_05_minimal_order(record, example, disp_models, grid):
    pairing = example[3]
    nj = len(pairing)
    modal = [to_modal_form(m) for m in disp_models]
    worst, counts_ok, parts = 0.0, True, []
    for label, models in (("physical", disp_models), ("modal", modal)):
        for name, tf in (("UCF", ucf_transform), ("SACF", sacf_transform)):
            full, red, tm = _minimal_pair(models, pairing, tf)
            expect = tm[0].n_states + tm[1].n_states - 2 * nj
            counts_ok &= red.n_states == expect
            err = max_rel_error(synth_frf(red, grid).H, synth_frf(full, grid).H)
            worst = max(worst, err)
            parts.append(f"{label}/{name} {red.n_states} states {err:.1e}")
    ok = counts_ok and worst < 1e-8
    assert record("5 minimal-order arithmetic", ok, "; ".join(parts) + " (< 1e-8)")


def test_06_decoupling_round_trip(record, example, accel_models, disp_models, grid):
    sa, sb, _, pairing = example
    nj = len(pairing)
    oracle_b = oracle_frf(sb, grid)
    rename = {q.b.key: q.a for q in pairing.pairs}
    ref = oracle_b.relabel(outputs=[rename.get(l.key, l) for l in oracle_b.outputs],
                           inputs=[rename.get(l.key, l) for l in oracle_b.inputs])
    keep = list(ref.outputs)
    remove_pairs = InterfacePairing(tuple(DofPair(q.a, q.a) for q in pairing.pairs))

    # untransformed models
    p = CouplingProblem(tuple(accel_models), pairing)
    ab = retain_unique_dofs(couple_accel(p), p.output_map, p.input_map)
    n_ab, n_a = ab.n_states, accel_models[0].n_states
    b1 = decouple(ab, accel_models[0], remove_pairs, keep=keep)
    e1 = frf_err(b1, ref, grid)

    # coupling form on modal models, with redundant states removed
    modal = [to_modal_form(m) for m in disp_models]
    ua = ucf_transform(modal[0], pairing.labels_on(0))[0]
    ub = ucf_transform(modal[1], pairing.labels_on(1))[0]
    pc = CouplingProblem((ua, ub), pairing)
    ab_min = reduce_minimal(couple_accel(pc), [(q.a, q.b) for q in pairing.pairs])
    ab_min = retain_unique_dofs(ab_min, pc.output_map, pc.input_map)
    b2 = decouple(ab_min, ua, remove_pairs, keep=keep, minimal=True)
    e2 = frf_err(b2, ref, grid)

    counts = (b1.n_states == n_ab + n_a,
              b2.n_states == (n_ab - 2 * nj) + (n_a - 2 * nj))
    ok = all(counts) and e1 < 1e-6 and e2 < 1e-6
    assert record("6 decoupling round trip", ok,
                  f"untransformed {b1.n_states} states {e1:.1e}; "
                  f"coupling form {b2.n_states} states {e2:.1e} (< 1e-6)")


def _random_collocated(seed: int) -> tuple[StateSpaceModel, list[DofLabel]]:
    """Stable modal model with dense B, C and shared input/output labels,
    shaped like a model identified from measured FRFs."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 7))
    nio = int(rng.integers(2, 6))
    nj = int(rng.integers(1, min(nio, k) + 1))
    blocks = []
    for _ in range(k):
        w = 2 * np.pi * rng.uniform(20.0, 500.0)
        z = rng.uniform(0.005, 0.05)
        wd = w * np.sqrt(1 - z * z)
        blocks.append(np.array([[-z * w, wd], [-wd, -z * w]]))
    A = block_diag(*blocks)
    labs = tuple(DofLabel("R", f"n{i}") for i in range(nio))
    B = rng.standard_normal((2 * k, nio))
    C = rng.standard_normal((nio, 2 * k))
    m = StateSpaceModel(A, B, C, np.zeros((nio, nio)), "disp", labs, labs).checked()
    iface = [labs[i] for i in sorted(rng.choice(nio, nj, replace=False))]
    return m, iface


def test_07_coupling_form_invariance(record, example, disp_models, grid):
    models = [_random_collocated(s) for s in range(50)]
    pairing = example[3]
    models += [(to_modal_form(m), pairing.labels_on(i)) for i, m in enumerate(disp_models)]
    worst = {"UCF": 0.0, "SACF": 0.0}
    ucf_failures = 0
    for m, iface in models:
        H = synth_frf(m, grid)
        for name, tf in (("UCF", ucf_transform), ("SACF", sacf_transform)):
            try:
                tm, _ = tf(m, iface)
            except RankDeficiencyError:
                ucf_failures += name == "UCF"
                worst[name] = np.inf
                continue
            worst[name] = max(worst[name], frf_err(tm, H, grid))
    ok = ucf_failures == 0 and max(worst.values()) < 1e-8
    assert record("7 coupling-form invariance", ok,
                  f"{len(models)} models: UCF {worst['UCF']:.1e}, SACF {worst['SACF']:.1e} "
                  f"(< 1e-8), UCF failures {ucf_failures}")


def test_08_ncf_diagnostic(record, disp_models, example, grid):
    # physical coordinates with diagonal mass: internal rows already avoid B_J
    m = disp_models[1]
    iface = example[3].labels_on(1)
    tm, tr = ncf_transform(m, iface)
    err = frf_err(tm, synth_frf(m, grid), grid) if tm is not None else np.inf
    # interface rows orthogonal to the input direction: T singular
    lab = DofLabel("X", "x")
    A = np.array([[0.0, 1.0, 0.0], [-4.0, -1.0, 1.0], [0.0, 0.0, -2.0]])
    bad = StateSpaceModel(A, [[0.0], [0.0], [1.0]], [[1.0, 0.0, 0.0]], [[0.0]],
                          "disp", (lab,), (lab,))
    none, tr_bad = ncf_transform(bad, [lab])
    ok = (tr.ncf_residual is not None and tr.ncf_residual < 1e-12 and err < 1e-9
          and none is None and not tr_bad.rank_ok)
    assert record("8 NCF diagnostic", ok,
                  f"mu {tr.ncf_residual:.1e}, FRF {err:.1e} (< 1e-9); "
                  f"rank-deficient case typed failure: {none is None and not tr_bad.rank_ok}")


def test_09_compatibility(record, example, disp_models, grid):
    pairing = example[3]
    p = CouplingProblem(tuple(disp_models), pairing)
    worst, parts = 0.0, []
    for variant in ("accel", "disp", "vel"):
        H = synth_frf(couple(p, variant, retain_unique=False), grid).H
        BH = np.einsum("po,foi->fpi", p.output_map.B_M, H)
        r = (np.abs(BH).max(axis=(1, 2)) / np.abs(H).max(axis=(1, 2))).max()
        worst = max(worst, r)
        parts.append(f"{variant} {r:.1e}")
    assert record("9 compatibility B_M H = 0", worst < 1e-9, ", ".join(parts) + " (< 1e-9)")


def test_10_solve_count_and_timing(record, example, accel_models):
    pairing = example[3]
    with count_solves() as lm:
        couple_accel(CouplingProblem(tuple(accel_models), pairing))
    with count_solves() as cl:
        classical_couple(accel_models, pairing)
    rep = bench_inversions([12], trials=10000)
    ratio = rep["results"][0]["ratio_median"]
    ok = lm.count == 1 and cl.count == 2 and ratio > 1
    assert record("10 solve count and timing", ok,
                  f"solves LM-SSS {lm.count}, classical {cl.count}; n_J=12 ratio {ratio:.2f} (> 1)")


def test_11_noise_model(record):
    labs = tuple(DofLabel("N", f"n{i}") for i in range(32))
    f = FrfMatrix(np.arange(1000.0) + 1, np.zeros((1000, 32, 32)), "accelerance", labs, labs)
    noisy = perturb_frf(f, NoiseSpec(5e-3, seed=3)).H
    sr, si = noisy.real.std(), noisy.imag.std()
    dr, di = abs(sr / 5e-3 - 1), abs(si / 5e-3 - 1)
    ok = noisy.size >= 10**6 and dr < 0.01 and di < 0.01
    assert record("11 noise model", ok,
                  f"{noisy.size} entries, std re {sr:.5e} im {si:.5e} (within 1% of 5e-3)")


def test_12_dynamic_stiffness(record, grid):
    m, c, k = 2.0, 35.0, 8e4
    lab = DofLabel("I", "x")
    iso = MechanicalSystem([[m]], [[k]], [[c]], (lab,))
    H = synth_frf(build_model(iso, "accel"), grid)
    Z = dynamic_stiffness(H).H[:, 0, 0]
    w = 2 * np.pi * grid
    exact = k + 1j * w * c - w**2 * m
    err = max_rel_error(Z, exact)
    assert record("12 dynamic stiffness", err < 1e-9, f"max rel err {err:.2e} (< 1e-9)")
