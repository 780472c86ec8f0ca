import numpy as np
import pytest

from dynsub import (
    CouplingProblem,
    DofLabel,
    ModelError,
    RankDeficiencyError,
    StateSpaceModel,
    build_model,
    couple_accel,
    max_rel_error,
    ncf_transform,
    reduce_minimal,
    sacf_transform,
    synth_frf,
    to_coupling_form,
    to_modal_form,
    ucf_transform,
)
from dynsub.model import DERIV, IFACE, INTERNAL


@pytest.fixture(scope="module")
def modal_b(disp_models):
    return to_modal_form(disp_models[1])


def test_ucf_structure(modal_b, example, grid):
    iface = example[3].labels_on(1)
    m, tr = ucf_transform(modal_b, iface)
    nj = len(iface)
    assert m.state_tags[:2 * nj] == (DERIV,) * nj + (IFACE,) * nj
    assert [l.key for l in m.state_dofs[:nj]] == [l.key for l in iface]
    # interface outputs read the interface-output states directly
    sel = np.hstack([np.zeros((nj, nj)), np.eye(nj), np.zeros((nj, m.n_states - 2 * nj))])
    assert np.abs(m.C[:nj] - sel).max() < 1e-10
    # the y_J rows of A just integrate y_J'
    assert np.abs(m.A[nj:2 * nj, :nj] - np.eye(nj)).max() < 1e-9
    assert tr.rank_ok and tr.report()["kind"] == "UCF"
    assert max_rel_error(synth_frf(m, grid).select(modal_b.outputs, modal_b.inputs).H,
                         synth_frf(modal_b, grid).H) < 1e-8


def test_sacf_internal_states_not_driven(modal_b, example):
    iface = example[3].labels_on(1)
    m, _ = sacf_transform(modal_b, iface)
    nj = len(iface)
    assert np.abs(m.B[2 * nj:, :nj]).max() < 1e-10 * np.abs(m.B).max()


def test_ncf_reports_residual(modal_b, example):
    m, tr = ncf_transform(modal_b, example[3].labels_on(1))
    assert m is not None and tr.ncf_residual > 0
    assert set(tr.report()) == {"kind", "condition_number", "ncf_residual", "rank_ok"}


def test_forms_need_displacement_models(accel_models, example):
    with pytest.raises(ModelError, match="displacement"):
        ucf_transform(accel_models[0], example[3].labels_on(0))
    with pytest.raises(ValueError):
        to_coupling_form(accel_models[0], [], "XCF")


def test_rank_deficient_interface_raises():
    x, y = DofLabel("S", "x"), DofLabel("S", "y")
    # two outputs reading the same state: C_J rank 1
    A = -np.diag([1.0, 2.0, 3.0, 4.0])
    C = [[1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]]
    m = StateSpaceModel(A, np.ones((4, 2)), C, np.zeros((2, 2)), "disp", (x, y), (x, y))
    with pytest.raises(RankDeficiencyError):
        ucf_transform(m, [x, y])


def test_reduce_minimal_count_and_errors(example, disp_models, grid):
    pairing = example[3]
    tm = [ucf_transform(m, pairing.labels_on(i))[0] for i, m in enumerate(disp_models)]
    full = couple_accel(CouplingProblem(tuple(tm), pairing))
    red = reduce_minimal(full, [(q.a, q.b) for q in pairing.pairs])
    assert red.n_states == full.n_states - 2 * len(pairing)
    assert red.state_tags.count(DERIV) == len(pairing)
    assert max_rel_error(synth_frf(red, grid).H, synth_frf(full, grid).H) < 1e-8
    plain = couple_accel(CouplingProblem(tuple(build_model(s, "accel") for s in example[:2]),
                                         pairing))
    with pytest.raises(ModelError):
        reduce_minimal(plain, [(q.a, q.b) for q in pairing.pairs])
