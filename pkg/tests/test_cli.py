import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from proper_affine.cli import main, run


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def _strip_timing(report):
    report = dict(report)
    report.pop("timing")
    return report


def test_classify_a3_swinging(capsys):
    code, out = _run(capsys, "classify-rep", "A", "3", "--highest", "5,0,1")
    report = json.loads(out)
    assert code == 0 and report["exit_code"] == 0
    res = report["results"]
    assert res["weight_count"] == 119 and res["dimension_weyl"] == 189 and res["zero_multiplicity"] == 3
    assert res["classification"]["swinging"]
    assert set(report) >= {"schema_version", "command", "spec", "seed", "tolerances", "results", "timing"}


@pytest.mark.parametrize(
    "argv,code",
    [
        (["find-x0", "A", "2", "--highest", "0,0"], 3),
        (["find-x0", "A", "2", "--highest", "1,0"], 3),
        (["build-group", "--group", "Q"], 2),
        (["classify-rep", "Q", "3", "--highest", "1,0,0"], 2),
        (["classify-rep", "A", "2", "--highest", "1,-1"], 2),
        (["check-criterion", "--group", "so32"], 1),
        (["check-criterion", "--group", "sl3s3"], 0),
        (["build-group", "--group", "so21", "--power", "1"], 1),
    ],
)
def test_exit_codes(argv, code):
    report, got = run(argv)
    assert got == code == report["exit_code"]
    if code == 2:
        assert report["results"]["error"] in ("BadInput", "WeylGroupTooLarge")


def test_find_x0_a3_reference(capsys):
    code, out = _run(capsys, "find-x0", "--weight", "4,-1,-1,-2", "A", "3", "--check", "10,1,-1,-10", "--predicates", "16,2,-3,-15")
    res = json.loads(out)["results"]
    assert code == 0
    assert res["certificate"]["generically_symmetric"] and res["certificate"]["extreme"]
    assert res["predicates"]["x0_regular"] and not res["predicates"]["rho_regular"]


def test_output_is_deterministic_apart_from_timing():
    argv = ["word-survey", "--group", "so21", "--max-len", "3", "--seed", "2"]
    a, _ = run(argv)
    b, _ = run(argv)
    assert _strip_timing(a) == _strip_timing(b)


def test_text_mode(capsys):
    code, out = _run(capsys, "check-criterion", "--group", "sl3s3", "--text")
    assert code == 0
    assert out.splitlines()[0].split()[0] == "schema_version"
    assert any(line.startswith("results.criterion.criterion") and line.split()[-1] == "true" for line in out.splitlines())


def test_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"family": "C", "rank": 4, "weight": [1, 1, 1, 1]}))
    code, out = _run(capsys, "classify-rep", "--spec-file", str(spec))
    assert code == 0
    assert json.loads(out)["results"]["dimension_weyl"] == 42
    spec.write_text(json.dumps({"colour": "red"}))
    assert run(["classify-rep", "--spec-file", str(spec)])[1] == 2
    spec.write_text("not json")
    assert run(["classify-rep", "--spec-file", str(spec)])[1] == 2


def test_elements_file(tmp_path, capsys):
    x, t = 0.8, 0.5
    std = np.array([[np.cosh(x), 0, np.sinh(x)], [0, 1, 0], [np.sinh(x), 0, np.cosh(x)]])
    path = tmp_path / "elements.json"
    path.write_text(json.dumps([{"std": std.ravel().tolist(), "translation": [0.0, t, 0.0]}]))
    code, out = _run(capsys, "margulis", "--group", "so21", "--elements", str(path))
    el = json.loads(out)["results"]["elements"][0]
    assert code == 0
    np.testing.assert_allclose(el["jd"], [x], atol=1e-9)
    np.testing.assert_allclose(np.abs(el["margulis"]), [t], atol=1e-9)
    path.write_text(json.dumps([[1.0, 2.0]]))
    assert run(["margulis", "--group", "so21", "--elements", str(path)])[1] == 2


def test_survey_csv(tmp_path):
    out = tmp_path / "survey.csv"
    report, code = run(["word-survey", "--group", "so21", "--max-len", "3", "--csv", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][0] == "word"
    assert len(rows) - 1 == report["results"]["survey"]["words"]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "proper_affine.cli", "check-criterion", "--group", "so3"], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["results"]["criterion"]["criterion"] is False
