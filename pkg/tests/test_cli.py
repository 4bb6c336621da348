import csv
import json
import subprocess
import sys

import pytest

from fock_oplab import cli
from fock_oplab.errors import IndeterminateLiminal, InternalInconsistency, NonConvergent
from fock_oplab.jsonio import dumps

OP = {
    "psi": {"kind": "exp_quadratic", "a0": [0.1, 0], "a1": [0.3, 0.1], "a2": [0.25, 0]},
    "a": [0.2, -0.1],
    "lambda": [0.5, 0],
    "p": 2,
    "alpha": 1.0,
}
BOUNDARY = {"psi": {"kind": "exp_quadratic", "a2": 0.375}, "lambda": 0.5, "p": "inf", "alpha": 1.0, "flavor": "finfty0"}


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _run(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr().out
    return code, out


def _report(capsys, argv):
    code, out = _run(capsys, argv)
    return code, json.loads(out)


def test_classify_round_trip(tmp_path, capsys):
    code, rep = _report(capsys, ["classify", "--op", _write(tmp_path, "op.json", OP)])
    assert code == 0
    assert rep["results"]["verdict"] == "Compact"
    assert set(rep) >= {"config", "results", "version", "wall_time", "warnings", "seed"}
    code2, rep2 = _report(capsys, ["classify", "--op", _write(tmp_path, "echo.json", rep["config"]["op"])])
    assert code2 == 0
    assert dumps(rep2["results"]) == dumps(rep["results"])
    assert rep2["config"] == rep["config"]


def test_norm_round_trip(tmp_path, capsys):
    f = {"kind": "poly_exp_quadratic", "poly": [1, 1], "core": {"a1": -1}}
    argv = ["norm", "--function", _write(tmp_path, "f.json", f), "--p", "2", "--alpha", "1.0", "--tol", "1e-8"]
    code, rep = _report(capsys, argv)
    assert code == 0
    assert rep["results"]["membership"] == "In"
    echo = rep["config"]
    argv2 = ["norm", "--function", _write(tmp_path, "f2.json", echo["function"]), "--p", str(echo["p"]),
             "--alpha", repr(echo["alpha"]), "--tol", repr(echo["tol"])]
    _, rep2 = _report(capsys, argv2)
    assert dumps(rep2["results"]) == dumps(rep["results"])


def test_norm_infinite_serializes(tmp_path, capsys):
    f = {"kind": "exp_quadratic", "a2": 0.6}
    code, rep = _report(capsys, ["norm", "--function", _write(tmp_path, "f.json", f), "--p", "inf"])
    assert code == 0
    assert rep["results"]["value"] == "inf"


def test_floats_survive_round_trip(tmp_path, capsys):
    op = dict(OP, a=[0.1 + 0.2, 1 / 3])
    _, rep = _report(capsys, ["classify", "--op", _write(tmp_path, "op.json", op)])
    assert rep["config"]["op"]["a"] == [0.1 + 0.2, 1 / 3]


def test_iterate_csv(tmp_path, capsys):
    out_csv = tmp_path / "it.csv"
    out_json = tmp_path / "it.json"
    code = cli.run(["iterate", "--op", _write(tmp_path, "b.json", BOUNDARY), "--n", "60",
                    "--eval-grid", "2.0", "33", "--csv", str(out_csv), "--out", str(out_json)])
    capsys.readouterr()
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 60
    assert list(rows[0]) == ["n", "re_c0n", "im_c0n", "re_c1n", "im_c1n", "re_c2n", "im_c2n", "sup_deviation"]
    dev = [float(r["sup_deviation"]) for r in rows]
    assert all(b <= a for a, b in zip(dev[9:], dev[10:]))
    assert dev[-1] <= 1e-6
    rep = json.loads(out_json.read_text())
    assert rep["results"]["limits"]["c2"] == [0.5, 0.0]


def test_iterate_csv_to_stdout(tmp_path, capsys):
    code, out = _run(capsys, ["iterate", "--op", _write(tmp_path, "op.json", OP), "--n", "3"])
    assert code == 0
    assert out.splitlines()[0].startswith("n,re_c0n")
    assert len(out.splitlines()) == 4


def test_dynamics_report(tmp_path, capsys):
    seq_csv = tmp_path / "seq.csv"
    ex = {"psi": {"kind": "exp_quadratic", "a2": 0.375}, "lambda": 0.5, "p": 2, "alpha": 1.0}
    code, rep = _report(capsys, ["dynamics", "--op", _write(tmp_path, "ex.json", ex), "--suite", "supercyclicity",
                                 "--N", "32", "--csv", str(seq_csv)])
    assert code == 0
    assert rep["results"]["case_tag"] == "RealLambdaAngleCriterion"
    assert len(seq_csv.read_text().splitlines()) == 33


def test_exit_config_invalid(tmp_path, capsys):
    assert _run(capsys, ["classify", "--op", str(tmp_path / "missing.json")])[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, ["classify", "--op", str(bad)])[0] == 1
    assert _run(capsys, ["classify", "--op", _write(tmp_path, "nolam.json", {"psi": {"kind": "exp_quadratic"}})])[0] == 1
    f = _write(tmp_path, "f.json", {"kind": "exp_quadratic"})
    assert _run(capsys, ["norm", "--function", f, "--p", "0.5"])[0] == 1
    assert _run(capsys, ["norm", "--function", f, "--tol", "1e-14"])[0] == 1
    assert _run(capsys, ["norm", "--function", f, "--alpha", "-1"])[0] == 1
    assert _run(capsys, ["dynamics", "--op", _write(tmp_path, "op.json", OP), "--N", "2"])[0] == 1


def test_exit_hypothesis(tmp_path, capsys):
    finfty = dict(BOUNDARY, flavor="finfty")
    code, rep = _report(capsys, ["dynamics", "--op", _write(tmp_path, "o.json", finfty)])
    assert code == 2
    assert rep["error"]["type"] == "HypothesisViolated"
    rot = dict(OP, **{"lambda": [0, 1]})
    assert _run(capsys, ["iterate", "--op", _write(tmp_path, "r.json", rot)])[0] == 2
    zero = dict(OP, **{"lambda": 0})
    assert _run(capsys, ["iterate", "--op", _write(tmp_path, "z.json", zero)])[0] == 2


@pytest.mark.parametrize("exc,code", [(IndeterminateLiminal, 2), (NonConvergent, 2), (InternalInconsistency, 3)])
def test_exit_mapping(tmp_path, capsys, monkeypatch, exc, code):
    def boom(W):
        raise exc("forced")

    monkeypatch.setattr(cli, "classify", boom)
    got, rep = _report(capsys, ["classify", "--op", _write(tmp_path, "op.json", OP)])
    assert got == code
    assert rep["error"]["type"] == exc.__name__


def test_verify_subset_and_failure(capsys, monkeypatch):
    code, rep = _report(capsys, ["verify", "--only", "4"])
    assert code == 0
    assert rep["results"]["all_passed"]

    from fock_oplab.acceptance import CriterionResult

    monkeypatch.setitem(cli.CRITERIA, 4, lambda seed: CriterionResult(4, "forced", False, "", 0.0, 1.0))
    code, rep = _report(capsys, ["verify", "--only", "4"])
    assert code == 3
    assert _run(capsys, ["verify", "--only", "99"])[0] == 1


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("FOCK_OPLAB_THREADS", "3")
    assert cli.worker_count() == 3
    assert cli.worker_count(2) == 2
    monkeypatch.setenv("FOCK_OPLAB_THREADS", "x")
    with pytest.raises(Exception):
        cli.worker_count()


def test_module_entry_point(tmp_path):
    op = _write(tmp_path, "op.json", OP)
    proc = subprocess.run([sys.executable, "-m", "fock_oplab", "classify", "--op", op], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["verdict"] == "Compact"
