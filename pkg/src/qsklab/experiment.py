"""Declarative experiment files and deterministic output writers.

Experiment files are INI documents::

    [model]
    n = 6
    j = 1.0
    beta = 5.0        ; required unless a [grid] section supplies betas
    h = 0.1           ; required unless a [grid] section supplies hs

    [disorder]
    law = gaussian    ; gaussian | rademacher | uniform

    [ensemble]
    mode = monte_carlo
    samples = 100
    seed = 42
    workers = 4       ; execution hint only; --workers on the CLI wins
    remainders = false

    [grid]            ; optional: sweep betas x hs instead of a single point
    betas = 5, 20
    hs = 0.05, 0.5

    [output]
    csv = sweep.csv
    json = sweep.json
    samples_jsonl = samples.jsonl

Unknown sections or keys are rejected outright -- a typo in a physics
parameter must fail loudly, not silently fall back to a default.  For
the same reason [model] beta/h and a [grid] are mutually exclusive: a
value that would be silently ignored is an error.  Relative output
paths resolve against the experiment file's directory.

All writers are atomic (temp file + rename) and embed the package
version plus the resolved configuration, with floats rendered by repr()
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import configparser
import json
import math
import os
import tempfile
from dataclasses import dataclass

from ._version import __version__
from .ensemble import EnsembleConfig, SweepPoint, config_to_dict
from .model import ModelParams, spec_by_name

__all__ = [
    "ExperimentError",
    "Experiment",
    "load_experiment",
    "parse_experiment",
    "CSV_COLUMNS",
    "sweep_csv_text",
    "write_text_atomic",
    "write_json",
    "write_samples_jsonl",
]

_SCHEMA = {
    "model": {"n", "beta", "h", "j"},
    "disorder": {"law"},
    "ensemble": {"mode", "samples", "seed", "workers", "remainders", "remainder_nodes"},
    "grid": {"betas", "hs"},
    "output": {"csv", "json", "samples_jsonl"},
}

CSV_COLUMNS = (
    "beta", "h", "j", "n", "samples",
    "overlap_sq_mean", "overlap_sq_se", "overlap_var",
    "exchange_density_mean", "fb_margin_min", "rau_residual",
)


class ExperimentError(ValueError):
    """Experiment file does not parse or validate."""


@dataclass(frozen=True)
class Experiment:
    """A resolved experiment: base config, grid, execution and output knobs."""

    base: EnsembleConfig
    betas: tuple[float, ...]
    hs: tuple[float, ...]
    workers: int
    csv_path: str | None = None
    json_path: str | None = None
    samples_path: str | None = None


def load_experiment(path: str) -> Experiment:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ExperimentError(f"cannot read experiment file: {exc}") from exc
    return parse_experiment(text, base_dir=os.path.dirname(os.path.abspath(path)))


def parse_experiment(text: str, *, base_dir: str = ".") -> Experiment:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ExperimentError(f"experiment file does not parse: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ExperimentError(
                f"unknown section [{section}]; known: {sorted(_SCHEMA)}"
            )
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ExperimentError(
                    f"unknown key {key!r} in [{section}]; known: {sorted(_SCHEMA[section])}"
                )
    for required in ("model", "disorder"):
        if not parser.has_section(required):
            raise ExperimentError(f"missing required section [{required}]")

    get = _SectionReader(parser)
    n = get.integer("model", "n")
    j = get.number("model", "j", default=1.0)

    has_grid = parser.has_section("grid")
    if has_grid:
        for key in ("beta", "h"):
            if parser.has_option("model", key):
                raise ExperimentError(
                    f"[model] {key} would be ignored because [grid] is present; remove one"
                )
        betas = get.number_list("grid", "betas")
        hs = get.number_list("grid", "hs")
    else:
        betas = (get.number("model", "beta"),)
        hs = (get.number("model", "h"),)

    law = get.text("disorder", "law")
    try:
        spec = spec_by_name(law)
    except ValueError as exc:
        raise ExperimentError(str(exc)) from exc

    mode = get.text("ensemble", "mode", default="monte_carlo")
    samples = get.integer("ensemble", "samples", default=1)
    seed = get.integer("ensemble", "seed", default=0)
    workers = get.integer("ensemble", "workers", default=1)
    remainders = get.boolean("ensemble", "remainders", default=False)
    remainder_nodes = get.integer("ensemble", "remainder_nodes", default=None)
    if workers < 1:
        raise ExperimentError("workers must be >= 1")

    try:
        params = ModelParams(n_sites=n, beta=betas[0], h=hs[0], j_coupling=j)
        base = EnsembleConfig(
            params=params,
            spec=spec,
            n_samples=samples,
            master_seed=seed,
            mode=mode,
            remainders=remainders,
            remainder_nodes=remainder_nodes,
        )
    except ValueError as exc:
        raise ExperimentError(str(exc)) from exc
    # deliberately not catching the capacity error: the caller maps it to
    # a distinct exit code

    def out_path(key: str) -> str | None:
        raw = get.text("output", key, default=None)
        if raw is None:
            return None
        return raw if os.path.isabs(raw) else os.path.join(base_dir, raw)

    return Experiment(
        base=base,
        betas=betas,
        hs=hs,
        workers=workers,
        csv_path=out_path("csv"),
        json_path=out_path("json"),
        samples_path=out_path("samples_jsonl"),
    )


class _SectionReader:
    """Typed reads with experiment-flavored error messages."""

    _MISSING = object()

    def __init__(self, parser: configparser.ConfigParser):
        self._p = parser

    def _raw(self, section: str, key: str, default):
        if self._p.has_option(section, key):
            return self._p.get(section, key).strip()
        if default is self._MISSING:
            raise ExperimentError(f"missing required key {key!r} in [{section}]")
        return default

    def text(self, section, key, default=_MISSING):
        return self._raw(section, key, default)

    def number(self, section, key, default=_MISSING):
        raw = self._raw(section, key, default)
        if raw is default and not isinstance(raw, str):
            return raw
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ExperimentError(f"[{section}] {key} must be a number, got {raw!r}") from None

    def integer(self, section, key, default=_MISSING):
        raw = self._raw(section, key, default)
        if raw is default and not isinstance(raw, str):
            return raw
        try:
            return int(raw, 0) if isinstance(raw, str) else int(raw)
        except (TypeError, ValueError):
            raise ExperimentError(f"[{section}] {key} must be an integer, got {raw!r}") from None

    def boolean(self, section, key, default=_MISSING):
        raw = self._raw(section, key, default)
        if not isinstance(raw, str):
            return raw
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ExperimentError(f"[{section}] {key} must be a boolean, got {raw!r}")

    def number_list(self, section, key, default=_MISSING):
        raw = self._raw(section, key, default)
        if not isinstance(raw, str):
            return raw
        parts = [p for p in raw.replace(",", " ").split() if p]
        if not parts:
            raise ExperimentError(f"[{section}] {key} must list at least one number")
        try:
            return tuple(float(p) for p in parts)
        except ValueError:
            raise ExperimentError(f"[{section}] {key} must be numbers, got {raw!r}") from None


# --------------------------------------------------------------------------
# writers
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def sweep_csv_text(points: list[SweepPoint], base: EnsembleConfig,
                   betas, hs) -> str:
    """Render the sweep table; failed nodes keep their row with nan stats."""
    echo = config_to_dict(base)
    del echo["beta"], echo["h"]
    echo["betas"] = [float(b) for b in betas]
    echo["hs"] = [float(x) for x in hs]
    lines = [
        f"# qsklab {__version__}",
        f"# config {json.dumps(echo, sort_keys=True)}",
        ",".join(CSV_COLUMNS),
    ]
    for pt in points:
        if pt.stats is None:
            stat_cols = ["0"] + ["nan"] * 6
        else:
            rec = pt.stats.records
            rau = pt.stats.rau_residual_mean
            stat_cols = [
                str(pt.stats.n),
                _fmt(pt.stats.overlap_sq_mean),
                _fmt(rec["overlap_sq"].std_error),
                _fmt(pt.stats.overlap_variance),
                _fmt(pt.stats.exchange_density_mean),
                _fmt(rec["fb_margin_min"].min),
                "nan" if math.isnan(rau) else _fmt(rau),
            ]
        lines.append(",".join(
            [_fmt(pt.beta), _fmt(pt.h), _fmt(base.params.j_coupling),
             str(base.params.n_sites)] + stat_cols
        ))
    return "\n".join(lines) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qsklab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path: str, record: dict) -> None:
    write_text_atomic(path, json.dumps(record, sort_keys=True, indent=2) + "\n")


def write_samples_jsonl(path: str, reports, config: EnsembleConfig) -> None:
    header = {
        "kind": "header",
        "version": __version__,
        "config": config_to_dict(config),
    }
    lines = [json.dumps(header, sort_keys=True)]
    for rep in reports:
        lines.append(json.dumps(rep.to_record(), sort_keys=True))
    write_text_atomic(path, "\n".join(lines) + "\n")
