import json
import subprocess
import sys

import numpy as np
import pytest

from dynsub import io
from dynsub.cli import main

GRID = ["--fmin", "20", "--fmax", "500", "--df", "5"]


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    d = tmp_path_factory.mktemp("ex")
    assert main(["example", "build", "--out-dir", str(d)]) == 0
    assert main(["example", "oracle", "--out", str(d / "oracle.csv"), *GRID]) == 0
    for s in ("A", "B"):
        assert main(["example", "oracle", "--system", s, "--out", str(d / f"{s}.csv"), *GRID]) == 0
    return d


def test_build_outputs(built):
    for f in ("A.json", "B.json", "AB.json", "pairs.json", "config.json",
              "remove_A_pairs.json", "keep_without_A.json"):
        assert (built / f).exists()


@pytest.mark.parametrize("extra", [[], ["--variant", "vel"], ["--form", "sacf", "--minimal"]])
def test_couple_and_compare(built, tmp_path, extra, capsys):
    models = [str(built / "A.json"), str(built / "B.json")]
    if "--form" in extra or "vel" in extra:
        for s in ("A", "B"):
            main(["example", "build", "--kind", "disp", "--out-dir", str(tmp_path)])
        models = [str(tmp_path / "A.json"), str(tmp_path / "B.json")]
    out = tmp_path / "ab.json"
    rep = tmp_path / "rep.json"
    assert main(["couple", "--models", *models, "--pairs", str(built / "pairs.json"),
                 "--retain-unique", "--report", str(rep), "--out", str(out), *extra]) == 0
    assert json.loads(rep.read_text())["stability"]["n_unstable"] == 0
    assert main(["frf", "--model", str(out), "--out", str(tmp_path / "h.csv"), *GRID]) == 0
    if "vel" in extra:
        return
    code = main(["compare", "--a", str(built / "oracle.csv"), "--b", str(tmp_path / "h.csv"),
                 "--tol", "1e-8", "--report", str(tmp_path / "cmp.json")])
    assert code == 0
    assert "PASS" in capsys.readouterr().out
    assert json.loads((tmp_path / "cmp.json").read_text())["pass"] is True


def test_compare_failure_exit_code(built):
    assert main(["compare", "--a", str(built / "oracle.csv"), "--b", str(built / "A.csv")]) == 1


def test_usage_errors_exit_two(built, tmp_path):
    assert main(["couple", "--bogus"]) == 2
    assert main(["frf", "--out", str(tmp_path / "x.csv")]) == 2


def test_missing_file_exit_one(tmp_path):
    assert main(["stiffness", "--in", str(tmp_path / "none.csv"), "--out", "x.csv"]) == 1


def test_perturb_is_deterministic(built, tmp_path):
    for n in ("p1", "p2"):
        assert main(["frf", "perturb", "--in", str(built / "oracle.csv"), "--seed", "7",
                     "--out", str(tmp_path / f"{n}.csv")]) == 0
    assert (tmp_path / "p1.csv").read_bytes() == (tmp_path / "p2.csv").read_bytes()
    assert (tmp_path / "p1.csv").read_bytes() != (built / "oracle.csv").read_bytes()


def test_lmfbs_couple_and_decouple(built, tmp_path):
    pairs = str(built / "pairs.json")
    out = tmp_path / "c.csv"
    assert main(["lmfbs", "couple", "--frfs", str(built / "A.csv"), str(built / "B.csv"),
                 "--pairs", pairs, "--retain-unique", "--out", str(out)]) == 0
    assert main(["compare", "--a", str(built / "oracle.csv"), "--b", str(out)]) == 0
    assert main(["lmfbs", "decouple", "--assembly", str(built / "oracle.csv"),
                 "--remove", str(built / "A.csv"), "--pairs", str(built / "remove_A_pairs.json"),
                 "--out", str(tmp_path / "b.csv")]) == 0
    b = io.read_frf_csv(tmp_path / "b.csv")
    assert np.isfinite(b.H).all()


def test_decouple_model(built, tmp_path):
    out = tmp_path / "b.json"
    assert main(["decouple", "--assembly", str(built / "AB.json"), "--remove",
                 str(built / "A.json"), "--pairs", str(built / "remove_A_pairs.json"),
                 "--out", str(out)]) == 0
    m = io.load_model(out)
    assert m.n_states == 10 + 6


def test_transform_and_reduce(tmp_path, example):
    main(["example", "build", "--kind", "disp", "--out-dir", str(tmp_path)])
    io.write_json(["B:p1", "B:p2"], tmp_path / "ib.json")
    io.write_json(["A:a1", "A:a1"], tmp_path / "bad.json")
    rep = tmp_path / "r.json"
    assert main(["transform", "--model", str(tmp_path / "B.json"), "--interface",
                 str(tmp_path / "ib.json"), "--form", "ucf", "--report", str(rep),
                 "--out", str(tmp_path / "bu.json")]) == 0
    assert json.loads(rep.read_text())["kind"] == "UCF"
    assert main(["reduce", "--model", str(tmp_path / "AB.json"), "--pairs",
                 str(tmp_path / "pairs.json"), "--out", str(tmp_path / "x.json")]) == 1


def test_stiffness(built, tmp_path):
    assert main(["stiffness", "--in", str(built / "A.csv"), "--out", str(tmp_path / "z.csv")]) == 0
    assert io.read_frf_csv(tmp_path / "z.csv").H.shape[1:] == (3, 3)


def test_bench_small(tmp_path):
    rep = tmp_path / "b.json"
    assert main(["bench", "--njs", "1,2", "--trials", "100", "--report", str(rep)]) == 0
    d = json.loads(rep.read_text())
    assert d["coupling_solve_counts"] == {"lmsss": 1, "classical": 2}
    assert [r["n_J"] for r in d["results"]] == [1, 2]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dynsub", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "couple" in r.stdout
