import json
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from hardypsi import cli
from hardypsi.config import load_config
from hardypsi.errors import ConfigError, ConsistencyError
from hardypsi.report import read_csv_rows

from .helpers import hausdorff

EXAMPLES = resources.files("hardypsi") / "examples"

SHIFT_JOB = {
    "schema_version": 1,
    "command": "invertible",
    "element": {"terms": [{"order": "TD",
                           "toeplitz": {"kind": "trig", "coefficients": [[1, 1.0, 0.0]]},
                           "multiplier": {"kind": "constant", "value": 1}}]},
    "parameters": {"lambdas": [[0, 0], [2, 0]]},
}


def write_job(tmp_path, job, name="job.json"):
    p = tmp_path / name
    p.write_text(json.dumps(job))
    return str(p)


def test_invertible_shift_at_zero(tmp_path):
    out = tmp_path / "out"
    assert cli.main([ "--config", write_job(tmp_path, SHIFT_JOB), "--out", str(out)]) == 0
    doc = json.loads((out / "verdicts.json").read_text())
    v0, v2 = doc["verdicts"]
    assert v0["verdict"] == "fredholm_nonzero_index" and v0["index"] == -1
    assert v2["verdict"] == "invertible"
    header, rows = read_csv_rows((out / "verdicts.csv").read_text())
    assert {"distance", "threshold"} <= set(header)
    assert rows[0][header.index("verdict")] == "fredholm_nonzero_index"


def test_essential_spectrum_spiral_csv(tmp_path):
    out = tmp_path / "spiral"
    cfg = str(EXAMPLES / "spiral_multiplier.json")
    assert cli.main(["--config", cfg, "--out", str(out)]) == 0
    text = (out / "essential_spectrum.csv").read_text()
    assert text.startswith("# columns: re (real part)")
    header, rows = read_csv_rows(text)
    assert header == ["re", "im", "curve", "parameter", "uncertainty", "resolution_bound"]
    whisker = [r for r in rows if r[2] == "whisker"]
    assert whisker[0][:2] == ["1", "0"] and whisker[0][3] == "0"
    assert whisker[-1][:2] == ["0", "0"] and whisker[-1][3] == "inf"
    pts = np.array([complex(float(r[0]), float(r[1])) for r in rows])
    t = np.linspace(0, 40, 200_000)
    oracle = np.append(np.exp((1j - 1) * t), 0)
    assert hausdorff(pts, oracle) < 1e-3
    assert (out / "essential_spectrum.svg").read_text().startswith("<svg")


def test_validate_bundled_examples(tmp_path):
    out = tmp_path / "val"
    assert cli.main(["validate", "--config", str(EXAMPLES / "validate.json"),
                     "--out", str(out)]) == 0
    doc = json.loads((out / "validate.json").read_text())
    assert doc["failures"] == []
    assert doc["counts"]["examples"] == len(cli.bundled_examples()) >= 6


@pytest.mark.parametrize("name", sorted(p.name for p in EXAMPLES.iterdir()
                                        if p.name.endswith(".json") and p.name != "validate.json"))
def test_each_bundled_example_runs(tmp_path, name):
    assert cli.main(["--config", str(EXAMPLES / name), "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "run_metadata.json").read_text())
    assert meta["files"]


def test_outputs_are_byte_identical(tmp_path):
    cfg = write_job(tmp_path, SHIFT_JOB)
    for d in ("a", "b"):
        assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path / d),
                         "--resolution", "48"]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "spectrum.json" in names and "components.csv" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    assert not [p for p in (tmp_path / "a").iterdir() if p.name.endswith(".tmp")]


def test_spectrum_document_is_versioned(tmp_path):
    cfg = write_job(tmp_path, SHIFT_JOB)
    assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path), "--resolution", "48"]) == 0
    doc = json.loads((tmp_path / "spectrum.json").read_text())
    assert doc["report_version"] == 1
    assert {c["index"] for c in doc["components"]} == {0, -1}
    re, im, label, unc = doc["essential_points"][0]
    assert label in ("whisker", "circle") and unc == 0
    assert [v["verdict"] for v in doc["verdicts"]] == ["fredholm_nonzero_index", "invertible"]


def test_format_flag(tmp_path):
    cfg = str(EXAMPLES / "spiral_multiplier.json")
    assert cli.main(["--config", cfg, "--out", str(tmp_path / "c"), "--format", "csv"]) == 0
    assert cli.main(["--config", cfg, "--out", str(tmp_path / "s"), "--format", "svg"]) == 0
    assert (tmp_path / "c" / "essential_spectrum.csv").exists()
    assert not (tmp_path / "c" / "essential_spectrum.svg").exists()
    assert (tmp_path / "s" / "essential_spectrum.svg").exists()
    assert not (tmp_path / "s" / "essential_spectrum.csv").exists()


def test_index_and_homotopy_trace_tables(tmp_path):
    job = dict(SHIFT_JOB, parameters={"lambdas": [[0, 0], [1, 0]], "w_grid": [0, 0.5, 1]})
    cfg = write_job(tmp_path, job)
    assert cli.main(["index", "--config", cfg, "--out", str(tmp_path)]) == 0
    header, rows = read_csv_rows((tmp_path / "indices.csv").read_text())
    assert rows[0][header.index("index")] == "-1"
    assert rows[1][header.index("status")] == "not_fredholm"
    job["parameters"]["lambdas"] = [[0, 0]]
    cfg = write_job(tmp_path, job)
    assert cli.main(["homotopy-trace", "--config", cfg, "--out", str(tmp_path)]) == 0
    header, rows = read_csv_rows((tmp_path / "homotopy_trace.csv").read_text())
    assert [r[header.index("index")] for r in rows] == ["-1"] * 3
    assert "containment_tolerance" in header


def test_compose_with_matrices(tmp_path):
    job = {"schema_version": 1, "command": "compose",
           "map": {"psi": {"constant": [0, 2]}, "epsilon": 0.5},
           "parameters": {"N": 16, "emit_matrices": True}}
    assert cli.main(["--config", write_job(tmp_path, job), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "compose.json").read_text())
    assert doc["oracle_ok"] and doc["tail_bound"] >= 0 and doc["alpha"] > 0
    assert (tmp_path / "series_matrix.csv").read_text().count("\n") == 18


# -- exit codes ---------------------------------------------------------------------

def test_exit_code_config_errors(tmp_path, capsys):
    assert cli.main(["--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    bad = dict(SHIFT_JOB, schema_version=7)
    assert cli.main(["--config", write_job(tmp_path, bad), "--out", str(tmp_path)]) == 2
    bad = dict(SHIFT_JOB, parameters={"N": 0})
    assert cli.main(["--config", write_job(tmp_path, bad), "--out", str(tmp_path)]) == 2
    (tmp_path / "broken.json").write_text("{not json")
    assert cli.main(["--config", str(tmp_path / "broken.json"), "--out", str(tmp_path)]) == 2
    assert cli.main(["index", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_exit_code_symbol_class(tmp_path):
    bad = {"schema_version": 1, "command": "compose", "map": {"psi": {"constant": [1, -1]}}}
    assert cli.main(["--config", write_job(tmp_path, bad), "--out", str(tmp_path)]) == 3
    bad = json.loads(json.dumps(SHIFT_JOB))
    bad["element"]["terms"][0]["multiplier"] = {"kind": "complex_exp", "c": [1, 0]}
    assert cli.main(["--config", write_job(tmp_path, bad), "--out", str(tmp_path)]) == 3
    bad["element"]["terms"][0]["multiplier"] = {"kind": "exp_decay", "alpha": 1,
                                                "declared_limit": 1}
    assert cli.main(["--config", write_job(tmp_path, bad), "--out", str(tmp_path)]) == 3


def test_exit_code_resolution(tmp_path):
    job = dict(SHIFT_JOB, command="homotopy-trace", parameters={"lambdas": [[1, 0]]})
    assert cli.main(["--config", write_job(tmp_path, job), "--out", str(tmp_path)]) == 4


def test_exit_code_consistency_dumps_diagnostics(tmp_path, monkeypatch):
    def broken(*a, **k):
        raise ConsistencyError("verdicts disagree", {"lambda": [0.1, 0.0]})

    monkeypatch.setattr(cli, "corollary4_equivalence", broken)
    job = {"schema_version": 1, "command": "validate",
           "parameters": {"random_elements": 2, "homotopy_elements": 0}}
    assert cli.main(["--config", write_job(tmp_path, job), "--out", str(tmp_path)]) == 5
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert "failed" in diag["error"] and diag["diagnostics"]["failures"]


def test_config_rejects_element_and_map_together():
    job = dict(SHIFT_JOB, map={"psi": {"constant": [0, 1]}})
    with pytest.raises(ConfigError):
        load_config(job)


def test_config_parses_all_kinds():
    job = {"command": "index", "element": {"scalar": [0.5, 0], "terms": [
        {"order": "DT", "multiplier": {"kind": "poly_exp", "n": 2, "alpha": 1.5},
         "toeplitz": {"kind": "rational", "constant": [0, 1], "poles": [[0.5, 0]]}},
        {"toeplitz": {"kind": "constant", "value": 2},
         "multiplier": {"kind": "piecewise_linear", "knots": [[0, 1, 0], [2, 0, 0]]}}]}}
    cfg = load_config(job)
    assert len(cfg.element.td_terms) == 1 and len(cfg.element.dt_terms) == 1
    assert cfg.element.scalar == 0.5


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "hardypsi", "--config",
                        write_job(tmp_path, SHIFT_JOB), "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "verdicts.json").exists()
