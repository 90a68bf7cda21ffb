import io
import json
from pathlib import Path

import pytest

from qdm import cli, render
from qdm.io import fixture_path

import reference_data as P
from conftest import parse, truncate

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


F1 = fixture_path("f1")
SUPER = fixture_path("f1_super")


@pytest.mark.parametrize("cmd", cli.COMMANDS)
def test_every_command_succeeds(cmd):
    code, out, err = run(cmd, SUPER, "--cutoff", "2,3")
    assert code == 0, err
    assert out.strip()


@pytest.mark.parametrize("golden,path,cutoff", [("f1_qh.txt", F1, "3,3"),
                                                ("f1_super_qh.txt", SUPER, "3,4")])
def test_golden_output(golden, path, cutoff):
    code, out, _ = run("qh", path, "--cutoff", cutoff)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


def _golden_entries(text, header):
    block = text.split(f"== {header}")[1].split("\n== ")[0]
    entries = {}
    for line in block.splitlines()[1:]:
        if line.startswith("("):
            key, expr = line.split(": ", 1)
            i, j = map(int, key.strip("()").split(","))
            entries[i - 1, j - 1] = expr
    return entries


def test_golden_flat_matrices_agree_with_reference_values():
    text = (GOLDEN / "f1_super_qh.txt").read_text()
    for a in range(2):
        got = _golden_entries(text, f"flat Omega_{a + 1}")
        for i in range(4):
            for j in range(4):
                want = truncate(parse(P.SUPER_OMEGA_FLAT[a][i][j]), (3, 4))
                expr = got.get((i, j), "0").replace("q1", "x").replace("q2", "y")
                assert parse(expr.replace("^", "**")) == want, (a, i, j)


def test_deterministic_output():
    first = run("mirror", SUPER, "--cutoff", "3,4")
    second = run("mirror", SUPER, "--cutoff", "3,4")
    assert first == second
    assert run("connection", F1, "--format", "structured") == \
        run("connection", F1, "--format", "structured")


def test_structured_output_roundtrips():
    code, out, _ = run("mirror", SUPER, "--cutoff", "3,4", "--format", "structured")
    assert code == 0
    data = json.loads(out)
    assert data["cutoff"] == [3, 4] and data["lambda"] == "zero"
    F_hat = render.from_structured(data["F_hat"])
    assert render.format_series(F_hat) == "-2*q1*q2"
    eps = render.from_structured(data["eps_1"])
    assert render.format_series(eps) == "2*q2 + 5*q2^2 + 44/3*q2^3 + 93/2*q2^4"


def test_mirror_text_lines():
    code, out, _ = run("mirror", SUPER, "--cutoff", "3,4")
    assert code == 0
    assert "F(qhat) = -2*q1*q2" in out
    assert "q1/qhat1 = 1 - 2*q2 + q2^2" in out


def test_named_cutoff_forms():
    a = run("connection", SUPER, "--cutoff", "2,3")
    b = run("connection", SUPER, "--cutoff", "q1=2,q2=3")
    assert a[0] == 0 and a == b


def test_check_passes_on_superspace():
    code, out, _ = run("check", SUPER, "--cutoff", "3,4")
    assert code == 0
    assert "FAIL" not in out


def test_pf_output():
    code, out, _ = run("pf", F1)
    assert code == 0
    assert "(-P1 + P2 + h)*Q^(1, 0)*Delta = P1^2*Delta" in out
    code, out, _ = run("pf", SUPER, "--degree", "0,1")
    assert code == 0 and "pass" in out


def test_parse_errors_exit_1(tmp_path):
    assert run("nope", F1)[0] == 1
    assert run("qh", F1, "--cutoff", "3")[0] == 1
    assert run("qh", F1, "--cutoff", "a,b")[0] == 1
    assert run("qh", tmp_path / "missing.toric")[0] == 1
    bad = tmp_path / "bad.toric"
    bad.write_text("rays: [[1, 0]\n")
    assert run("ring", bad)[0] == 1


def test_validation_errors_exit_2(tmp_path):
    text = Path(F1).read_text().replace("max_cones: [", "max_cones: [[1, 2], ")
    path = tmp_path / "extra.toric"
    path.write_text(text)
    code, _, err = run("ring", path)
    assert code == 2 and "validation" in err


def test_invariant_failure_exits_3(monkeypatch):
    from qdm.floer import FloerModel
    monkeypatch.setattr(FloerModel, "verify_pf", lambda self, rel, box: False)
    code, out, _ = run("pf", F1)
    assert code == 3 and "FAIL" in out


def test_non_nef_mirror_exits_4():
    path = fixture_path("p1_negdeg")
    assert run("mirror", path)[0] == 4
    assert run("qh", path)[0] == 4
    code, out, _ = run("check", path)
    assert code == 0 and "skipped" in out
