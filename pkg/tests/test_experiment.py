"""Experiment-file parsing and deterministic output writers."""

import json
import os

import pytest

from qsklab.ensemble import EnsembleConfig, sweep_grid
from qsklab.experiment import (
    CSV_COLUMNS,
    ExperimentError,
    load_experiment,
    parse_experiment,
    sweep_csv_text,
    write_json,
    write_samples_jsonl,
    write_text_atomic,
)
from qsklab.hilbert import CapacityError
from qsklab.model import ModelParams, gaussian_spec

MINIMAL = """
[model]
n = 3
beta = 1.5
h = 0.3

[disorder]
law = gaussian
"""

GRIDDED = """
[model]
n = 3
j = 0.8

[disorder]
law = rademacher

[ensemble]
mode = monte_carlo
samples = 4
seed = 11
workers = 2
remainders = true

[grid]
betas = 1.0, 2.0
hs = 0.1 0.4

[output]
csv = out/table.csv
json = out/table.json
"""


def test_parse_minimal():
    exp = parse_experiment(MINIMAL)
    assert exp.base.params == ModelParams(n_sites=3, beta=1.5, h=0.3, j_coupling=1.0)
    assert exp.base.spec.kind == "gaussian"
    assert exp.base.n_samples == 1
    assert exp.betas == (1.5,)
    assert exp.hs == (0.3,)
    assert exp.workers == 1
    assert exp.csv_path is None


def test_parse_gridded():
    exp = parse_experiment(GRIDDED, base_dir="/tmp/expdir")
    assert exp.betas == (1.0, 2.0)
    assert exp.hs == (0.1, 0.4)
    assert exp.base.spec.kind == "rademacher"
    assert exp.base.remainders is True
    assert exp.base.master_seed == 11
    assert exp.workers == 2
    assert exp.csv_path == "/tmp/expdir/out/table.csv"
    assert exp.json_path == "/tmp/expdir/out/table.json"
    assert exp.samples_path is None


def test_grid_and_point_are_mutually_exclusive():
    text = MINIMAL + "\n[grid]\nbetas = 1\nhs = 0.1\n"
    with pytest.raises(ExperimentError, match="ignored"):
        parse_experiment(text)


def test_unknown_section_rejected():
    with pytest.raises(ExperimentError, match=r"unknown section"):
        parse_experiment(MINIMAL + "\n[plotting]\nstyle = dark\n")


def test_unknown_key_rejected():
    with pytest.raises(ExperimentError, match=r"unknown key"):
        parse_experiment(MINIMAL.replace("h = 0.3", "h = 0.3\nfield = 2"))


def test_missing_required_sections():
    with pytest.raises(ExperimentError, match=r"missing required section"):
        parse_experiment("[model]\nn = 3\nbeta = 1\nh = 0\n")
    with pytest.raises(ExperimentError, match=r"missing required key"):
        parse_experiment("[model]\nbeta = 1\nh = 0\n[disorder]\nlaw = gaussian\n")


def test_bad_values_rejected():
    with pytest.raises(ExperimentError, match="unknown law"):
        parse_experiment(MINIMAL.replace("gaussian", "levy"))
    with pytest.raises(ExperimentError, match="must be a number"):
        parse_experiment(MINIMAL.replace("beta = 1.5", "beta = warm"))
    with pytest.raises(ExperimentError, match="must be an integer"):
        parse_experiment(MINIMAL.replace("n = 3", "n = 3.5"))
    with pytest.raises(ExperimentError, match="must be a boolean"):
        parse_experiment(MINIMAL + "\n[ensemble]\nremainders = maybe\n")
    with pytest.raises(ExperimentError, match="at least one number"):
        parse_experiment(
            MINIMAL.replace("beta = 1.5\nh = 0.3", "") + "\n[grid]\nbetas =\nhs = 0.1\n"
        )
    with pytest.raises(ExperimentError, match="workers"):
        parse_experiment(MINIMAL + "\n[ensemble]\nworkers = 0\n")
    with pytest.raises(ExperimentError, match="does not parse"):
        parse_experiment("n = 3 outside any section\n")


def test_model_validation_wrapped_as_experiment_error():
    with pytest.raises(ExperimentError, match="beta"):
        parse_experiment(MINIMAL.replace("beta = 1.5", "beta = -1"))


def test_capacity_error_passes_through():
    # capacity problems are a distinct failure class (exit code 3), so the
    # parser must NOT wrap them in ExperimentError
    with pytest.raises(CapacityError):
        parse_experiment(MINIMAL.replace("n = 3", "n = 17"))


def test_load_experiment_missing_file():
    with pytest.raises(ExperimentError, match="cannot read"):
        load_experiment("/nonexistent/exp.ini")


def test_load_experiment_resolves_relative_to_file(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(MINIMAL + "\n[output]\ncsv = results.csv\n")
    exp = load_experiment(str(path))
    assert exp.csv_path == str(tmp_path / "results.csv")


# --------------------------------------------------------------------------
# writers
# --------------------------------------------------------------------------

def _tiny_sweep():
    base = EnsembleConfig(
        params=ModelParams(n_sites=3, beta=1.0, h=0.2),
        spec=gaussian_spec(),
        n_samples=3,
        master_seed=5,
    )
    points = sweep_grid(base, [1.0, 2.0], [0.2])
    return base, points


def test_sweep_csv_shape_and_header():
    base, points = _tiny_sweep()
    text = sweep_csv_text(points, base, [1.0, 2.0], [0.2])
    lines = text.splitlines()
    assert lines[0].startswith("# qsklab ")
    assert lines[1].startswith("# config ")
    echo = json.loads(lines[1][len("# config "):])
    assert echo["betas"] == [1.0, 2.0]
    assert echo["hs"] == [0.2]
    assert "beta" not in echo and "workers" not in echo
    assert lines[2] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3 + 2
    for row in lines[3:]:
        assert len(row.split(",")) == len(CSV_COLUMNS)


def test_sweep_csv_is_reproducible():
    base, points = _tiny_sweep()
    again_base, again_points = _tiny_sweep()
    a = sweep_csv_text(points, base, [1.0, 2.0], [0.2])
    b = sweep_csv_text(again_points, again_base, [1.0, 2.0], [0.2])
    assert a == b


def test_sweep_csv_failed_node_row():
    base, _ = _tiny_sweep()
    points = sweep_grid(base, [1.0, -3.0], [0.2])
    text = sweep_csv_text(points, base, [1.0, -3.0], [0.2])
    bad_row = text.splitlines()[-1].split(",")
    assert bad_row[0] == "-3.0"
    assert bad_row[4] == "0"          # samples
    assert bad_row[5:] == ["nan"] * 6


def test_write_text_atomic(tmp_path):
    target = tmp_path / "deep" / "file.txt"
    write_text_atomic(str(target), "one\n")
    assert target.read_text() == "one\n"
    write_text_atomic(str(target), "two\n")
    assert target.read_text() == "two\n"
    # no stray temp files
    assert [p.name for p in (tmp_path / "deep").iterdir()] == ["file.txt"]


def test_write_json(tmp_path):
    path = tmp_path / "r.json"
    write_json(str(path), {"b": 1, "a": [1.5, None]})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')  # sorted keys
    assert json.loads(text) == {"b": 1, "a": [1.5, None]}


def test_write_samples_jsonl(tmp_path):
    from qsklab.ensemble import run_ensemble

    base = EnsembleConfig(
        params=ModelParams(n_sites=3, beta=1.0, h=0.2),
        spec=gaussian_spec(),
        n_samples=2,
        master_seed=8,
    )
    stats = run_ensemble(base, collect_reports=True)
    path = tmp_path / "samples.jsonl"
    write_samples_jsonl(str(path), stats.reports, base)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    header = json.loads(lines[0])
    assert header["kind"] == "header"
    assert header["config"]["seed"] == 8
    for line in lines[1:]:
        rec = json.loads(line)
        assert rec["kind"] == "sample"
        assert len(rec["gamma"]) == 3
