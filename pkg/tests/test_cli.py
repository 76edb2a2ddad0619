"""Command line interface, exercised through real subprocesses."""

import json
import subprocess
import sys

import pytest

from substrum.core import parse_substitution
from substrum.corpus import CORPUS, load
from substrum.reduction import pure_base


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "substrum", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture(scope="module")
def examples_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("examples")
    out = run_cli("examples", str(root / "sub"))
    assert out.returncode == 0
    return root / "sub"


def test_examples_writes_corpus(examples_dir):
    names = sorted(p.name for p in examples_dir.iterdir())
    assert "manifest.json" in names
    assert len(names) == len(CORPUS) + 1
    manifest = json.loads((examples_dir / "manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert len(manifest["entries"]) == len(CORPUS)
    # every written file must parse back to its in-memory rules
    for entry in manifest["entries"]:
        z = parse_substitution((examples_dir / entry["file"]).read_text())
        assert z.hash_key() == load(entry["name"]).hash_key()


def test_examples_default_directory(tmp_path):
    out = run_cli("examples", cwd=tmp_path)
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert payload["directory"] == "substrum-examples"
    assert (tmp_path / "substrum-examples" / "manifest.json").exists()


def test_classify_matches_manifest(examples_dir):
    manifest = json.loads((examples_dir / "manifest.json").read_text())
    for entry in manifest["entries"]:
        out = run_cli("classify", str(examples_dir / entry["file"]), "--json")
        payload = json.loads(out.stdout)
        assert payload["verdict"]["verdict"] == entry["expected_verdict"]
        assert entry["expected_reason"] in payload["verdict"]["reasons"]
        expected_code = 3 if "PreconditionFailed" in entry["expected_reason"] else 0
        assert out.returncode == expected_code


def test_classify_output_is_byte_stable(examples_dir):
    path = str(examples_dir / "bijective_nonabelian.sub")
    first = run_cli("classify", path, "--json")
    second = run_cli("classify", path, "--json")
    assert first.stdout == second.stdout
    assert first.returncode == 0


def test_analyze_report_shape(examples_dir):
    out = run_cli("analyze", str(examples_dir / "rudin_shapiro.sub"), "--json")
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert payload["schema_version"] == 1
    assert payload["input"]["alphabet"] == ["0", "1", "2", "3"]
    assert payload["matrix"] == [[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]]
    assert payload["char_poly"] == [1, -2, -2, 4, 0]
    assert payload["height"] == {"g0": 2, "h": 1}
    assert payload["classes"]["k"] == 2
    assert payload["verdict"]["verdict"] == "Inconclusive"
    mods = sorted(e["modulus_lo"] for e in payload["eigenvalues"])
    assert mods[-1] == pytest.approx(2.0, abs=1e-9)


def test_analyze_periodic_exits_3(examples_dir):
    out = run_cli("analyze", str(examples_dir / "periodic.sub"), "--json")
    assert out.returncode == 3
    payload = json.loads(out.stdout)
    assert payload["verdict"]["reasons"] == ["PreconditionFailed(periodic)"]


def test_pretty_and_compact_agree(examples_dir):
    path = str(examples_dir / "thue_morse.sub")
    compact = run_cli("analyze", path, "--json")
    pretty = run_cli("analyze", path, "--pretty")
    assert json.loads(compact.stdout) == json.loads(pretty.stdout)
    assert len(pretty.stdout) > len(compact.stdout)


def test_missing_file_exits_2(tmp_path):
    out = run_cli("classify", str(tmp_path / "nope.sub"))
    assert out.returncode == 2
    assert out.stdout == ""
    assert "substrum:" in out.stderr


def test_malformed_rules_exit_2(tmp_path):
    bad = tmp_path / "bad.sub"
    bad.write_text("0 -> 0 1\n0 -> 1 0\n")
    out = run_cli("classify", str(bad))
    assert out.returncode == 2
    assert "substrum:" in out.stderr


def test_purebase_text_round_trips(examples_dir):
    out = run_cli("purebase", str(examples_dir / "height_two.sub"))
    assert out.returncode == 0
    eta = parse_substitution(out.stdout)
    expected = pure_base(load("height_two")).eta
    assert eta.hash_key() == expected.hash_key()
    assert eta.size == 6
    assert "# height: 2" in out.stdout


def test_purebase_json(examples_dir):
    out = run_cli("purebase", str(examples_dir / "height_two.sub"), "--json")
    payload = json.loads(out.stdout)
    assert payload["height"] == 2
    assert len(payload["phi"]) == 6
    assert payload["coincidence"] is True
    again = parse_substitution(payload["eta_dsl"])
    assert again.hash_key() == pure_base(load("height_two")).eta.hash_key()


def test_purebase_rejects_non_constant_length(tmp_path):
    bad = tmp_path / "fib.sub"
    bad.write_text("0 -> 0 1\n1 -> 0\n")
    out = run_cli("purebase", str(bad))
    assert out.returncode == 3


def test_spectrum_report(examples_dir):
    out = run_cli("spectrum", str(examples_dir / "bijective_nonabelian.sub"), "--json")
    payload = json.loads(out.stdout)
    assert out.returncode == 0
    assert payload["char_poly"] == [1, -7, 17, -17, 6]
    assert payload["sqrt_q"]["present"] is False
    assert payload["factors"] == [[1, -3], [1, -2], [1, -1]]


def test_estimate_dim_small_budget(examples_dir, tmp_path):
    csv_path = tmp_path / "dim.csv"
    args = (
        "estimate-dim",
        str(examples_dir / "bijective_nonabelian.sub"),
        "--function", "1,-1,0,0",
        "--lags", "729",
        "--prefix", "100000",
        "--scales", "1..6",
        "--cache-dir", str(tmp_path / "cache"),
        "--out", str(csv_path),
        "--json",
    )
    first = run_cli(*args)
    assert first.returncode == 0, first.stderr
    payload = json.loads(first.stdout)
    for key in ("d_hat", "d_pred", "residual", "kappa", "j", "prediction", "csv"):
        assert key in payload
    assert payload["j"] == 2
    assert payload["function"] == ["1", "-1", "0", "0"]
    assert csv_path.exists()
    header = csv_path.read_text().splitlines()[0]
    assert header == "r,mass,corrected_mass"
    assert any((tmp_path / "cache").iterdir())
    second = run_cli(*args)
    assert second.stdout == first.stdout


def test_estimate_dim_wrong_function_length(examples_dir, tmp_path):
    out = run_cli(
        "estimate-dim",
        str(examples_dir / "thue_morse.sub"),
        "--function", "1,-1,0",
        "--cache-dir", str(tmp_path),
    )
    assert out.returncode == 2


def test_estimate_dim_too_few_scales(examples_dir, tmp_path):
    out = run_cli(
        "estimate-dim",
        str(examples_dir / "thue_morse.sub"),
        "--function", "1,-1",
        "--scales", "1..3",
        "--lags", "64",
        "--prefix", "50000",
        "--cache-dir", str(tmp_path),
        "--out", str(tmp_path / "dim.csv"),
    )
    assert out.returncode == 4
    assert "substrum:" in out.stderr


def test_stdout_is_pure_json(examples_dir):
    # diagnostics (including numba warnings) must never pollute stdout
    out = run_cli("analyze", str(examples_dir / "small_second_eigenvalue.sub"), "--json")
    json.loads(out.stdout)


def test_no_arguments_exits_2():
    out = run_cli()
    assert out.returncode == 2
