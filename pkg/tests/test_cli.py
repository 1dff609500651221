import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from varcond.cli import SCHEMA_KEYS, run
from varcond.parser import parse_expression
from varcond.varops import euler_lagrange_system

DATA = Path(__file__).parent / "data"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_classify_json_min_quadratic():
    code, out, err = call("classify", DATA / "min_quadratic.vp", "--json")
    assert code == 0, err
    doc = json.loads(out)
    assert tuple(doc) == SCHEMA_KEYS
    assert doc["verdicts"] == {"sufficient": "LocalMinEvidence", "necessary": "MinNecessaryHolds"}
    assert doc["residuals"] == [0.0]
    assert doc["oracle"] is None
    assert len(doc["points"]) == 9
    for pt in doc["points"]:
        assert list(pt) == ["x", "lambda_min", "lambda_max", "definiteness", "B"]
        assert pt["definiteness"] == "PositiveDefinite"
        assert pt["B"] == [2.0, 2.0]


def _check_schema(doc, n, s):
    assert tuple(doc) == SCHEMA_KEYS
    assert isinstance(doc["residuals"], list)
    for pt in doc["points"]:
        assert len(pt["x"]) == n
        assert len(pt["B"]) == s + 1
        assert isinstance(pt["lambda_min"], float) and isinstance(pt["lambda_max"], float)
        assert pt["lambda_min"] <= pt["lambda_max"]
    assert set(doc["verdicts"]) == {"sufficient", "necessary"}


@pytest.mark.parametrize("name", ["min_quadratic", "minimal_surface", "dirichlet", "saddle", "not_critical"])
def test_json_schema_every_problem(name):
    code, out, err = call("classify", DATA / f"{name}.vp", "--json", "--oracle", "--trials", "2")
    assert code == 0, err
    doc = json.loads(out)
    p = doc["problem"]
    _check_schema(doc, len(p["independent"]), p["order"])
    assert set(doc["oracle"]) >= {"fd_second", "quadratic_form", "rel_gap"}
    assert len(doc["oracle"]["trials"]) == 2


def test_json_reals_round_trip():
    code, out, _ = call("classify", DATA / "minimal_surface.vp", "--json", "--oracle", "--trials", "2")
    doc = json.loads(out)
    # 17 significant digits reproduce every double exactly
    for t in doc["oracle"]["trials"]:
        for v in t.values():
            assert float(format(v, ".17g")) == v
    assert json.loads(json.dumps(doc)) == doc
    assert "e-" in out or "." in out


def test_euler_lagrange_dirichlet():
    code, out, _ = call("euler-lagrange", DATA / "dirichlet.vp")
    assert code == 0
    spec_text = out.split("=", 1)[1].strip()
    from varcond.parser import parse_problem

    p = parse_problem((DATA / "dirichlet.vp").read_text())
    wide = p.spec.with_order(2)
    printed = parse_expression(spec_text, wide)
    assert printed == parse_expression("-2*u1_x1x1 - 2*u1_x2x2", wide)
    assert printed == euler_lagrange_system(p.lagrangian, p.spec).equations[0]


def test_euler_lagrange_json():
    code, out, _ = call("euler-lagrange", DATA / "min_quadratic.vp", "--json")
    doc = json.loads(out)
    assert doc["equations"] == {"u": "2*u - 2*u_xx"}


def test_hessian_output():
    code, out, _ = call("hessian", DATA / "minimal_surface.vp")
    assert code == 0
    assert "A is 3 x 3" in out
    assert "structural nonzeros: 4 of 9" in out
    code, out, _ = call("hessian", DATA / "min_quadratic.vp", "--json")
    doc = json.loads(out)
    assert doc["dim"] == 2 and doc["block_sizes"] == [1, 1]
    assert doc["entries"] == [{"row": "u", "col": "u", "value": "2"}, {"row": "u_x", "col": "u_x", "value": "2"}]


def test_second_variation_command():
    code, out, _ = call("second-variation", DATA / "min_quadratic.vp", "--trials", "3", "--seed", "9", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["oracle"]["seed"] == 9
    assert len(doc["oracle"]["trials"]) == 3
    assert doc["oracle"]["rel_gap"] <= 1e-8
    code, text, _ = call("second-variation", DATA / "min_quadratic.vp", "--trials", "3")
    assert "max rel gap" in text


def test_text_report_contents():
    code, out, _ = call("classify", DATA / "saddle.vp")
    assert code == 0
    assert "sufficient condition: Inconclusive" in out
    assert "first offending point x = (0.125)" in out
    assert "lambda_min = -2" in out
    assert "necessary condition: BothFail" in out
    assert "not a proof" in out
    # one row per grid point after the header and rule
    table = out.split("\n\n")[2].splitlines()
    assert len(table) == 2 + 4


def test_single_point_grid_gives_one_row():
    code, out, _ = call("classify", DATA / "min_quadratic.vp", "--grid", "1")
    assert code == 0
    table = out.split("\n\n")[2].splitlines()
    assert len(table) == 3


def test_minimal_surface_offending_point():
    code, out, _ = call("classify", DATA / "minimal_surface.vp")
    assert "first offending point x = (0.1, 0.1): PositiveSemidefinite" in out


@pytest.mark.parametrize(
    "argv, code",
    [
        (["classify", DATA / "missing.vp"], 2),
        (["classify", DATA / "bad_syntax.vp"], 2),
        (["classify", DATA / "domain_error.vp"], 3),
        (["classify", DATA / "not_critical.vp", "--require-critical"], 4),
        (["classify", DATA / "not_critical.vp"], 0),
        ([], 1),
        (["frobnicate", DATA / "min_quadratic.vp"], 1),
        (["classify"], 1),
        (["classify", DATA / "min_quadratic.vp", "--trials", "0"], 1),
        (["classify", DATA / "min_quadratic.vp", "--grid", "2,2"], 1),
        (["classify", DATA / "min_quadratic.vp", "--seed", "abc"], 1),
    ],
)
def test_exit_codes(argv, code):
    got, out, err = call(*argv)
    assert got == code
    if code in (1, 2, 3):
        assert err and not out


def test_parse_error_carries_file_and_line():
    _, _, err = call("classify", DATA / "bad_syntax.vp")
    assert err.startswith(f"{DATA / 'bad_syntax.vp'}:5: parse error")
    _, _, err = call("classify", DATA / "missing.vp")
    assert "missing.vp" in err and "cannot read" in err


def test_domain_error_names_point():
    _, _, err = call("classify", DATA / "domain_error.vp")
    assert "numeric error" in err and "x = (0.5)" in err


def test_require_critical_still_prints_report():
    code, out, err = call("classify", DATA / "not_critical.vp", "--require-critical", "--json")
    assert code == 4
    doc = json.loads(out)
    assert doc["flags"] == ["NotCritical"]
    assert doc["verdicts"] == {"sufficient": "Inconclusive", "necessary": "Skipped"}
    assert doc["residuals"] == [4.0]


def _subprocess(args, threads):
    env = dict(os.environ, VARCOND_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "varcond", *args], env=env, capture_output=True, check=True).stdout


def test_byte_identical_across_runs_and_threads():
    args = ["classify", str(DATA / "minimal_surface.vp"), "--json", "--oracle", "--trials", "2"]
    outs = [_subprocess(args, t) for t in (1, 4, 4, 1)]
    assert len(set(outs)) == 1
    assert outs[0].startswith(b"{")
