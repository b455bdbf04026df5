import json
import subprocess
import sys
from fractions import Fraction

import pytest

from dworkcoh.cli import load_source, parse_param, parse_range, run, InputError


def test_formula3_example(capsys):
    assert run(["formula3", "--prime", "5", "--prec", "6", "--b", "1..3"]) == 0
    out = capsys.readouterr().out
    assert out.count("ok=true") == 3


def test_basis_quintic(capsys):
    assert run(["basis", "--poly", "fixtures/quintic"]) == 0
    assert "dimension: 204" in capsys.readouterr().out


def test_frobenius_fermat_oracle_match(tmp_path, capsys):
    out = tmp_path / "fermat.txt"
    assert run(["frobenius", "--poly", "fixtures/fermat3", "--prime", "5", "--prec", "6",
                "--out", str(out)]) == 0
    text = out.read_text()
    assert "zeta_numerator: T^2 + 5" in text
    assert "oracle_match: true" in text
    data = json.loads((tmp_path / "fermat.txt.json").read_text())
    assert data["oracle_match"] is True and data["oracle_a"] == 0


def test_bad_reduction_is_input_error(capsys):
    assert run(["frobenius", "--poly", "local-p2", "--prime", "7", "--param", "teich:1"]) == 2
    assert "bad-reduction" in capsys.readouterr().err


def test_zeta_on_nodal_fiber_fails_verification(capsys):
    assert run(["zeta", "--poly", "local-p2", "--prime", "7", "--param", "1"]) == 1
    assert "not-genus-1-or-count-bug" in capsys.readouterr().out


def test_parse_error_reports_position(capsys):
    assert run(["basis", "--poly", "x^3 + y^3 +* z^3"]) == 2
    assert "line 1, column" in capsys.readouterr().err


def test_fixture_file_parse_error_line(tmp_path, capsys):
    f = tmp_path / "bad.poly"
    f.write_text("# comment\nvars = x, y, z\npoly = x^3 + y^3 + q^3\n")
    assert run(["basis", "--poly", str(f)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_zero_parameter_rejected(capsys):
    assert run(["gm", "--poly", "local-p2", "--param", "0"]) == 2


def test_even_prime_rejected(capsys):
    assert run(["formula3", "--prime", "2"]) == 2


def test_unknown_command_is_input_error(capsys):
    assert run(["nope"]) == 2


def test_keylemma_perturbed_fails(capsys):
    assert run(["keylemma", "--prime", "3", "--prec", "4", "--perturb", "1:3"]) == 1
    assert "verification-failed" in capsys.readouterr().out


def test_spectrum(capsys):
    assert run(["spectrum", "--max-i", "5"]) == 0
    out = capsys.readouterr().out
    assert "x^5: -3" in out and "t^5: 9/2" in out


def test_pf(capsys):
    assert run(["pf", "--poly", "local-p2"]) == 0
    out = capsys.readouterr().out
    assert "order: 2" in out and "residual zero through l^20" in out


def test_gm_rational_and_teich(capsys):
    assert run(["gm", "--poly", "local-p2", "--param", "1/5"]) == 0
    assert "-15/16" in capsys.readouterr().out
    assert run(["gm", "--poly", "local-p2", "--param", "teich:2", "--prime", "7"]) == 0
    assert "compatible: true" in capsys.readouterr().out


def test_threefold(capsys):
    assert run(["threefold", "--poly", "fermat3", "--prime", "5", "--prec", "4"]) == 0
    out = capsys.readouterr().out
    assert "newton_slopes:\n  3/2\n  3/2\n  3\n" in out


def test_splitting(capsys):
    assert run(["splitting", "--prime", "5", "--prec", "4", "--M", "12"]) == 0
    assert "A_12" in capsys.readouterr().out


def test_json_flag(capsys):
    assert run(["zeta", "--poly", "fermat3", "--prime", "5", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["N2"] == 36


def test_helpers():
    assert parse_range("2..4") == [2, 3, 4]
    assert parse_range("3") == [3]
    with pytest.raises(InputError):
        parse_range("4..2")
    assert parse_param("teich:3").teich == 3
    assert parse_param("-1/3").value == Fraction(-1, 3)
    with pytest.raises(InputError):
        parse_param("abc")
    assert load_source("fixtures/local-p2").laurent is not None


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dworkcoh", "zeta", "--poly", "fermat3", "--prime", "5"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "N1: 6" in r.stdout
