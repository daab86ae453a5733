"""End-to-end tests for the ``starprod`` command line."""

from __future__ import annotations

import json

import numpy as np
import pytest

from starprod.cli import main, parse_range
from starprod.errors import ConfigError
from starprod.structures import family1_tensor


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def _manifest(tmp_path, command):
    return json.loads((tmp_path / f"{command}.manifest.json").read_text(encoding="utf-8"))


def test_parse_range():
    assert parse_range("-6:6:64") == (-6.0, 6.0, 64)
    for bad in ("1:2", "a:b:c", "1:0:4", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_range(bad)


# ----------------------- passing runs -----------------------

def test_symbol_run(tmp_path, capsys):
    assert _run(tmp_path, "symbol", "--map", "weyl", "--dim", "24", "--grid", "-6:6:64") == 0
    assert capsys.readouterr().out.startswith("symbol: PASS")
    manifest = _manifest(tmp_path, "symbol")
    assert manifest["passed"] is True
    assert manifest["parameters"]["grid"] == [[-6.0, 6.0, 64]]
    assert manifest["artifacts"] == ["symbol.csv", "symbol.json"]
    assert (tmp_path / "symbol.csv").is_file()
    dump = json.loads((tmp_path / "symbol.json").read_text(encoding="utf-8"))
    assert dump["axes"] == ["q", "p"]
    assert dump["map"] == "weyl"
    assert len(dump["re"]) == 64 * 64


def test_csv_output_is_reproducible(tmp_path):
    args = ("symbol", "--map", "weyl", "--dim", "16", "--grid", "-5:5:20")
    assert _run(tmp_path / "first", *args) == 0
    assert _run(tmp_path / "second", *args) == 0
    first = (tmp_path / "first" / "symbol.csv").read_bytes()
    assert first == (tmp_path / "second" / "symbol.csv").read_bytes()


def test_assoc_verify_builtin(tmp_path):
    assert _run(tmp_path, "assoc-verify", "--tensor", "builtin:family1") == 0
    manifest = _manifest(tmp_path, "assoc-verify")
    assert manifest["residuals"]["assoc"] == 0.0
    assert manifest["parameters"]["n"] == 4


@pytest.mark.parametrize("name", ["family1", "appendix1-family1"])
def test_assoc_verify_accepts_both_tensor_names(tmp_path, name):
    assert _run(tmp_path, "assoc-verify", "--tensor", f"builtin:{name}") == 0
    assert _manifest(tmp_path, "assoc-verify")["passed"] is True


def test_assoc_verify_lie(tmp_path):
    assert _run(tmp_path, "assoc-verify", "--tensor", "builtin:su2", "--lie") == 0


def test_star_check_sordered(tmp_path):
    assert _run(tmp_path, "star-check", "--map", "sordered:-0.4", "--seed", "7") == 0
    assert _manifest(tmp_path, "star-check")["seed"] == 7


def test_purity_kernel_route(tmp_path):
    assert _run(tmp_path, "purity", "--map", "sordered:0.5", "--grid", "-4:4:48") == 0
    assert _manifest(tmp_path, "purity")["parameters"]["method"] == "purity-kernel"


def test_kernel_check_matrix(tmp_path):
    assert _run(tmp_path, "kernel-check", "--map", "matrix", "--dim", "4", "--state", "fock:1") == 0


def test_kernel_check_weyl(tmp_path):
    args = ("kernel-check", "--map", "weyl", "--grid", "-5:5:40", "--samples", "4", "--seed", "2")
    assert _run(tmp_path, *args) == 0
    manifest = _manifest(tmp_path, "kernel-check")
    assert manifest["passed"] is True
    assert manifest["tolerance"] == 1e-3


def test_kernel_check_tomographic_uses_its_own_tolerance(tmp_path):
    assert _run(tmp_path, "kernel-check", "--map", "tomographic", "--dim", "16", "--state", "fock:0") == 0
    manifest = _manifest(tmp_path, "kernel-check")
    assert manifest["passed"] is True
    assert manifest["tolerance"] == 5e-2
    assert manifest["residuals"]["kernel_vs_operator"] < 5e-2


def test_tomogram_run(tmp_path):
    assert _run(tmp_path, "tomogram", "--dim", "16", "--state", "fock:0") == 0
    manifest = _manifest(tmp_path, "tomogram")
    assert manifest["passed"] is True
    assert manifest["artifacts"] == ["tomogram.csv", "tomogram.json"]
    assert manifest["residuals"]["negativity"] < 1e-12


def test_intertwine_run(tmp_path):
    args = ("intertwine", "--dim", "16", "--state", "fock:0", "--grid", "-6:6:64", "--target-grid", "-4:4:41")
    assert _run(tmp_path, *args) == 0
    manifest = _manifest(tmp_path, "intertwine")
    assert manifest["passed"] is True
    assert manifest["parameters"]["target"] == "tomographic"
    assert (tmp_path / "intertwine.csv").is_file()


def test_evolve_quadrature(tmp_path):
    args = ("evolve", "--map", "sordered:-0.4", "--dim", "48", "--grid", "-1:1:4", "--t-final", "1", "--dt", "0.01")
    assert _run(tmp_path, *args) == 0
    assert (tmp_path / "evolve.csv").is_file()


# ----------------------- failures -----------------------

def test_broken_tensor_fails_numerically(tmp_path, capsys):
    entries = np.array(family1_tensor().entries)
    entries[3, 0, 3] = 1.1
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"n": 4, "entries": entries.tolist()}), encoding="utf-8")
    assert _run(tmp_path, "assoc-verify", "--tensor", str(path)) == 3
    assert "assoc-verify" in capsys.readouterr().err
    assert _manifest(tmp_path, "assoc-verify")["passed"] is False


@pytest.mark.parametrize(
    "args",
    [
        ("assoc-verify", "--tensor", "missing.json"),
        ("assoc-verify", "--tensor", "builtin:octonions"),
        ("symbol", "--map", "banana"),
        ("symbol", "--map", "sordered"),
        ("symbol", "--grid", "1:0:5"),
        ("symbol", "--state", "squeezed:1"),
        ("symbol", "--dim", "1"),
        ("purity", "--order", "1"),
    ],
)
def test_invalid_configuration_exits_2(tmp_path, args):
    assert _run(tmp_path, *args) == 2


def test_unknown_command_is_an_argparse_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        _run(tmp_path, "teleport")
    assert excinfo.value.code == 2


# ----------------------- report -----------------------

def test_report_needs_manifests(capsys):
    assert main(["report"]) == 2
    assert main(["report", "nowhere.manifest.json"]) == 2


def test_report_on_passing_runs(tmp_path, capsys):
    assert _run(tmp_path, "assoc-verify", "--tensor", "builtin:matrix2") == 0
    capsys.readouterr()
    table = tmp_path / "report.json"
    code = main(["report", str(tmp_path / "assoc-verify.manifest.json"), "--out", str(table)])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "PASS"
    rows = json.loads(table.read_text(encoding="utf-8"))
    assert {row["check"] for row in rows} == {"assoc", "random_triples"}


def test_report_on_failing_run(tmp_path, capsys):
    entries = np.array(family1_tensor().entries)
    entries[3, 0, 3] = 1.1
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"entries": entries.tolist()}), encoding="utf-8")
    assert _run(tmp_path, "assoc-verify", "--tensor", str(path)) == 3
    capsys.readouterr()
    assert main(["report", str(tmp_path / "assoc-verify.manifest.json")]) == 3
    assert capsys.readouterr().out.strip().splitlines()[-1] == "FAIL"
