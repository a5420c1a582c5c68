"""Scenario files, the ``octl`` command and report emission.

A scenario is a YAML document with ``model``, ``problem`` and ``output``
sections plus a ``seed``.  Complex vectors are lists of ``[re, im]`` pairs::

    model:
      num_modes: 1
      omega: [[0.0, 1.5707963267948966]]
    problem:
      kind: op
      y0: [[1.0, 0.0]]
      z_d: [[0.0, 0.0]]
      M: 1.0
      tau: 0.0
    output:
      formats: [json]
    seed: 0

Exit codes: 0 success, 2 configuration or I/O error, 3 solver
non-convergence, 4 failed equivalence check.
"""
from __future__ import annotations

import argparse
import csv
from dataclasses import asdict, dataclass, field, fields, replace
import json
import logging
import math
import re
from pathlib import Path
import sys
import time

import numpy as np
import yaml

from . import __version__
from . import harness, value_maps as vm
from .op_solver import OpProblem, solve_op
from .spectral_model import ConfigError, ModelConfig, build_model

log = logging.getLogger("octl")

SCHEMA_VERSION = "1.0"
PROBLEM_KINDS = ("op", "np", "tp", "tocp", "nocp", "m_tau", "verify-1.2", "verify-1.3",
                 "verify-reversal", "verify-uniqueness", "map")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4


@dataclass(frozen=True)
class ProblemSpec:
    kind: str = "op"
    y0: tuple[complex, ...] = ()
    z_d: tuple[complex, ...] | None = None
    M: float | None = None
    tau: float | None = None
    r: float | None = None
    T: float | None = None
    case: str | None = None
    map: str | None = None
    grid: tuple[float, ...] | None = None
    n_seeds: int | None = None


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "."
    formats: tuple[str, ...] = ("json",)


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelConfig
    problem: ProblemSpec
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0


def _float(section, key, value):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}",
                          f"{section}.{key}") from None


def _complex_vector(value, name) -> tuple[complex, ...]:
    try:
        out = []
        for entry in value:
            if isinstance(entry, (list, tuple)):
                re, im = entry
            else:
                re, im = entry, 0.0
            out.append(complex(float(re), float(im)))
        return tuple(out)
    except (TypeError, ValueError):
        raise ConfigError(f"problem.{name} must be a list of [re, im] pairs",
                          f"problem.{name}") from None


_MODEL_INT = {"num_modes", "num_time_intervals", "max_fw_iterations"}


def _model_config(raw: dict) -> ModelConfig:
    known = {f.name for f in fields(ModelConfig)}
    kwargs = {}
    for key, value in (raw or {}).items():
        if key not in known:
            raise ConfigError(f"unknown model field {key!r}", f"model.{key}")
        if key == "omega":
            try:
                value = tuple((float(a), float(b)) for a, b in value)
            except (TypeError, ValueError):
                raise ConfigError("model.omega must be a list of [a, b] intervals",
                                  "model.omega") from None
        elif key in _MODEL_INT:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"model.{key} must be an integer", f"model.{key}")
        else:
            value = _float("model", key, value)
        kwargs[key] = value
    try:
        return ModelConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(str(exc), f"model.{exc.field}" if exc.field else "model") from None


def _problem_spec(raw: dict, num_modes: int) -> ProblemSpec:
    raw = dict(raw or {})
    known = {f.name for f in fields(ProblemSpec)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown problem field {key!r}", f"problem.{key}")
    kind = raw.get("kind")
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"problem.kind must be one of {', '.join(PROBLEM_KINDS)}",
                          "problem.kind")
    if "y0" not in raw:
        raise ConfigError("problem.y0 is required", "problem.y0")
    spec = {"kind": kind, "y0": _complex_vector(raw["y0"], "y0")}
    if raw.get("z_d") is not None:
        spec["z_d"] = _complex_vector(raw["z_d"], "z_d")
    for name in ("y0", "z_d"):
        if name in spec and len(spec[name]) != num_modes:
            raise ConfigError(f"problem.{name} must have {num_modes} entries",
                              f"problem.{name}")
    for key in ("M", "tau", "r", "T"):
        if raw.get(key) is not None:
            spec[key] = _float("problem", key, raw[key])
    if raw.get("case") is not None:
        spec["case"] = str(raw["case"])
        if spec["case"] not in ("i", "ii", "iii"):
            raise ConfigError("problem.case must be i, ii or iii", "problem.case")
    if raw.get("map") is not None:
        if raw["map"] not in vm.MAP_KINDS:
            raise ConfigError(f"problem.map must be one of {', '.join(vm.MAP_KINDS)}",
                              "problem.map")
        spec["map"] = raw["map"]
    if raw.get("grid") is not None:
        spec["grid"] = tuple(_float("problem", "grid", x) for x in raw["grid"])
    if raw.get("n_seeds") is not None:
        spec["n_seeds"] = int(raw["n_seeds"])
    return ProblemSpec(**spec)


def parse_config(text: str) -> ScenarioConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"scenario file is not valid YAML: {exc}", "file") from None
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a mapping with model/problem sections", "file")
    extra = set(raw) - {"model", "problem", "output", "seed"}
    if extra:
        raise ConfigError(f"unknown top-level section(s): {sorted(extra)}", sorted(extra)[0])
    model = _model_config(raw.get("model"))
    problem = _problem_spec(raw.get("problem"), model.num_modes)
    out_raw = raw.get("output") or {}
    formats = tuple(out_raw.get("formats", ("json",)))
    if not set(formats) <= {"json", "csv"}:
        raise ConfigError("output.formats may only contain json and csv", "output.formats")
    output = OutputSpec(dir=str(out_raw.get("dir", ".")), formats=formats)
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer", "seed")
    return ScenarioConfig(model, problem, output, seed)


def _pairs(vec):
    return [[float(z.real), float(z.imag)] for z in vec]


def config_to_dict(config: ScenarioConfig) -> dict:
    model = asdict(config.model)
    model["omega"] = [list(span) for span in config.model.omega]
    problem = {}
    for f in fields(ProblemSpec):
        value = getattr(config.problem, f.name)
        if value is None:
            continue
        if f.name in ("y0", "z_d"):
            value = _pairs(value)
        elif f.name == "grid":
            value = list(value)
        problem[f.name] = value
    return {"model": model, "problem": problem,
            "output": {"dir": config.output.dir, "formats": list(config.output.formats)},
            "seed": config.seed}


def emit_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def apply_overrides(text: str, overrides) -> str:
    """Apply ``section.key=value`` overrides (values parsed as YAML) to a scenario."""
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"scenario file is not valid YAML: {exc}", "file") from None
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value", "--set")
        path, value = item.split("=", 1)
        keys = path.strip().split(".")
        node = raw
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {path!r} crosses a scalar", path)
        node[keys[-1]] = yaml.safe_load(value)
    return yaml.safe_dump(raw, sort_keys=False)


# -- serialization ------------------------------------------------------------

_FLOAT_TAG = "\u0000f:"


def _clean(obj):
    """Convert numpy values to plain JSON types; floats become tagged strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _FLOAT_TAG + format(x, ".17g") if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


_TAGGED = re.compile(r'"\\u0000f:([^"]*)"')


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits and NaN as null."""
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)
    return _TAGGED.sub(r"\1", text) + "\n"


def emit_map_csv(sample: vm.MapSample, path) -> None:
    """Write ``abscissa,value,status`` rows in grid order."""
    if not sample.grid:
        raise ValueError("empty map sample")
    status = sample.status or ["ok"] * len(sample.grid)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["abscissa", "value", "status"])
        for x, y, s in zip(sample.grid, sample.values, status):
            writer.writerow([format(x, ".17g"), format(y, ".17g") if math.isfinite(y) else "nan",
                             s])


# -- execution ----------------------------------------------------------------

def _control_payload(control) -> dict:
    return {"tau": control.tau, "sup_norm": control.sup_norm(),
            "values": [_pairs(row) for row in control.values]}


def _op_payload(sol) -> dict:
    return {"r_value": sol.r_value, "fw_gap": sol.fw_gap,
            "bang_bang_deviation": sol.bang_bang_deviation,
            "max_principle_residual": sol.max_principle_residual,
            "iterations": sol.iterations, "converged": sol.converged,
            "control": _control_payload(sol.control)}


def _value_payload(res: vm.ValueMapResult) -> dict:
    out = {"value": res.value, "bracket": list(res.bracket), "probe_count": res.probe_count,
           "attaining_control": _control_payload(res.attaining_control)}
    if res.solution is not None:
        out["attaining_r_value"] = res.solution.r_value
    return out


def _need(spec: ProblemSpec, *names):
    for name in names:
        if getattr(spec, name) is None:
            raise ConfigError(f"problem.{name} is required for kind {spec.kind}",
                              f"problem.{name}")


def execute(config: ScenarioConfig, out_dir: Path | None = None):
    """Run one scenario; returns ``(payload, exit_code)``."""
    model = build_model(config.model)
    spec = config.problem
    y0 = np.array(spec.y0, dtype=complex)
    z_d = np.array(spec.z_d if spec.z_d is not None else [0] * len(y0), dtype=complex)
    kind = spec.kind
    if kind == "op":
        _need(spec, "M")
        sol = solve_op(OpProblem(model, y0, z_d, spec.M, spec.tau or 0.0))
        return _op_payload(sol), EXIT_OK if sol.converged else EXIT_SOLVER
    if kind in ("np", "tp", "m_tau", "tocp", "nocp"):
        if kind == "np":
            _need(spec, "r")
            res = vm.solve_np(model, y0, z_d, spec.tau or 0.0, spec.r)
        elif kind == "tp":
            _need(spec, "M", "r")
            res = vm.solve_tp(model, y0, z_d, spec.M, spec.r)
        elif kind == "m_tau":
            res = vm.m_tau(model, y0, z_d, spec.tau or 0.0)
        elif kind == "tocp":
            _need(spec, "M")
            res = vm.solve_tocp(model, y0, spec.M)
        else:
            res = vm.solve_nocp(model, y0, spec.T if spec.T is not None else model.horizon)
        ok = res.solution is None or res.solution.converged
        return _value_payload(res), EXIT_OK if ok else EXIT_SOLVER
    if kind == "map":
        _need(spec, "map", "grid")
        sample = vm.sample_map(spec.map, spec.grid, model=model, y0=y0, z_d=z_d,
                               tau=spec.tau or 0.0, r=spec.r)
        if out_dir is not None and "csv" in config.output.formats:
            emit_map_csv(sample, out_dir / f"{spec.map}.csv")
        return asdict(sample), EXIT_OK
    if kind == "verify-1.2":
        _need(spec, "M")
        report = harness.check_time_norm(model, y0, spec.M)
    elif kind == "verify-1.3":
        _need(spec, "case")
        params = {k: getattr(spec, k) for k in ("M", "tau", "r") if getattr(spec, k) is not None}
        report = harness.check_target_norm_time(model, y0, z_d, spec.case, params)
    elif kind == "verify-reversal":
        report = harness.check_time_reversal(model, y0, z_d, spec.tau or 0.0)
    else:
        _need(spec, "M")
        report = harness.check_uniqueness(model, y0, z_d, spec.M, spec.tau or 0.0,
                                          spec.n_seeds or 4, seed=config.seed)
    return report.to_dict(), EXIT_OK if report.passed else EXIT_CHECK


def run(config_path, overrides=(), out_dir=None) -> int:
    """Execute a scenario file and write ``report.json`` (plus CSV for maps).

    Wall time goes to ``timing.json`` next to the report so that the report
    itself is byte-for-byte reproducible.
    """
    start = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else None
    echo = None
    errors = []
    try:
        text = Path(config_path).read_text(encoding="utf-8")
        config = parse_config(apply_overrides(text, overrides))
        echo = config_to_dict(config)
        out = out if out is not None else Path(config.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        payload, status = execute(config, out)
    except ConfigError as exc:
        payload, status = None, EXIT_CONFIG
        message = f"{exc.field}: {exc}" if exc.field else str(exc)
        errors.append({"kind": "configuration", "field": exc.field, "message": message})
    except OSError as exc:
        payload, status = None, EXIT_CONFIG
        errors.append({"kind": "io", "message": str(exc)})
    except (ValueError, RuntimeError) as exc:
        payload, status = None, EXIT_SOLVER
        errors.append({"kind": "solver", "message": str(exc)})
    report = {"schema_version": SCHEMA_VERSION, "tool_version": __version__,
              "scenario": echo, "result": payload, "exit_status": status, "errors": errors}
    for err in errors:
        log.error("%s", err["message"])
    if out is None:
        out = Path(".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(report), encoding="utf-8", newline="\n")
        (out / "timing.json").write_text(
            dumps({"wall_time": time.perf_counter() - start}), encoding="utf-8")
    except OSError as exc:
        log.error("cannot write report: %s", exc)
        return EXIT_CONFIG
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="octl", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("config")
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args.config, args.overrides, args.out)


if __name__ == "__main__":
    sys.exit(main())
