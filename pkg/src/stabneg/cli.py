"""Batch front end: ``stabneg <task> --config run.json``.

Config layout (JSON)::

    {
      "model": {"type": "toric2d_boundary", "L": 6,
                "beta_lambda_a": 1.0, "beta_lambda_b": "inf"},
      "grid": {"beta_lambda_a": {"start": 0.1, "stop": 5, "num": 10},
               "beta_lambda_b": [0.1, 1.0, "inf"],
               "extra_points": [["inf", 0.5]]},
      "output": {"path": "scan.csv", "format": "csv", "log_base": "2"},
      "tolerance": 1e-9,
      "verify_tolerance": 1e-10,
      "bench": {"k": 12, "seed": 0}
    }

Model types: ``toric2d_boundary``, ``toric3d_boundary``, ``toric4d_boundary``
(optional ``fragment``), ``toric2d_torus`` (optional ``cut``) and ``custom``
(inline ``stabilizers`` document or a ``path`` to one). Couplings are given as
beta*lambda; ``"inf"`` maps to t = 1.

Exit codes: 0 success, 1 invalid config, 2 model or guard error, 3 dense
verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dense import verify_model
from .errors import ConfigError, ModelError, StabnegError, VerificationMismatch
from .lattice import build_2d_torus, build_boundary_2d, build_boundary_3d, build_boundary_4d, css_couplings
from .pauli import StabilizerModel, commutation_matrix, model_from_dict
from .spectrum import (
    DEFAULT_EPS,
    SCHEMA_VERSION,
    SectorTable,
    binegativity_fwht,
    binegativity_spectrum,
    model_tables,
    negativity_spectrum,
    ppt_report,
    table_to_csv,
    table_to_dict,
)

TASKS = ("spectrum", "binegativity", "negativity", "scan", "verify", "bench")
MODEL_TYPES = ("toric2d_boundary", "toric3d_boundary", "toric4d_boundary", "toric2d_torus", "custom")
THREADS_ENV = "STABNEG_THREADS"
MAX_BENCH_K = 20

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_MISMATCH = 0, 1, 2, 3

SCAN_COLUMNS = (
    "beta_lambda_a",
    "beta_lambda_b",
    "t_a",
    "t_b",
    "e_n",
    "trace_norm",
    "b_min",
    "b_min_relative",
    "z_rho",
    "log_z",
    "cost_equals_negativity",
)


# -- config parsing --------------------------------------------------------------------


def parse_coupling(value, where: str) -> float:
    """A beta*lambda value: a finite real or the string ``"inf"``."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ConfigError(f"{where}: expected a number or \"inf\", got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number or \"inf\", got {value!r}")
    x = float(value)
    if math.isnan(x) or x == -math.inf:
        raise ConfigError(f"{where}: {value!r} is not a usable coupling")
    return x


def coupling_to_t(beta_lambda: float) -> float:
    return 1.0 if math.isinf(beta_lambda) else math.tanh(beta_lambda)


def _axis(spec, where: str) -> list[float]:
    if isinstance(spec, dict):
        missing = {"start", "stop", "num"} - set(spec)
        if missing:
            raise ConfigError(f"{where}: range needs {sorted(missing)}")
        num = spec["num"]
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ConfigError(f"{where}: num must be a positive integer")
        start = parse_coupling(spec["start"], where + ".start")
        stop = parse_coupling(spec["stop"], where + ".stop")
        if math.isinf(start) or math.isinf(stop):
            raise ConfigError(f"{where}: range endpoints must be finite")
        return [float(v) for v in np.linspace(start, stop, num)]
    if isinstance(spec, list):
        return [parse_coupling(v, f"{where}[{i}]") for i, v in enumerate(spec)]
    return [parse_coupling(spec, where)]


def parse_grid(doc) -> list[tuple[float, float]]:
    """Grid points in lexicographic order, duplicates removed."""
    if not isinstance(doc, dict):
        raise ConfigError("grid must be an object")
    points = set()
    if "beta_lambda_a" in doc or "beta_lambda_b" in doc:
        if not ("beta_lambda_a" in doc and "beta_lambda_b" in doc):
            raise ConfigError("grid needs both beta_lambda_a and beta_lambda_b")
        xs = _axis(doc["beta_lambda_a"], "grid.beta_lambda_a")
        ys = _axis(doc["beta_lambda_b"], "grid.beta_lambda_b")
        points.update((a, b) for a in xs for b in ys)
    for i, pt in enumerate(doc.get("extra_points", [])):
        if not isinstance(pt, list) or len(pt) != 2:
            raise ConfigError(f"grid.extra_points[{i}] must be a pair")
        points.add((parse_coupling(pt[0], f"grid.extra_points[{i}]"), parse_coupling(pt[1], f"grid.extra_points[{i}]")))
    if not points:
        raise ConfigError("grid is empty")
    return sorted(points)


@dataclass
class RunConfig:
    task: str
    model: dict
    grid: list = field(default_factory=list)
    out_path: str | None = None
    out_format: str = "json"
    log_base: str = "2"
    tolerance: float = DEFAULT_EPS
    verify_tolerance: float = 1e-10
    bench: dict = field(default_factory=dict)
    threads: int = 1
    timing: bool = False


def _check_model_spec(spec, task: str, base_dir: Path | None) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError("model must be an object")
    kind = spec.get("type")
    if kind not in MODEL_TYPES:
        raise ConfigError(f"model.type must be one of {MODEL_TYPES}, got {kind!r}")
    out = dict(spec)
    if kind == "custom":
        if "stabilizers" not in spec and "path" not in spec:
            raise ConfigError("custom model needs 'stabilizers' or 'path'")
        if "path" in spec:
            p = Path(spec["path"])
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            try:
                out["stabilizers"] = json.loads(p.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read stabilizer file {p}: {exc}") from exc
            del out["path"]
        if not isinstance(out["stabilizers"], dict):
            raise ConfigError("model.stabilizers must be an object")
    else:
        if kind == "toric4d_boundary" and "fragment" in spec:
            out["L"] = spec.get("L")
        else:
            L = spec.get("L")
            if isinstance(L, bool) or not isinstance(L, int):
                raise ConfigError("model.L must be an integer")
    for key in ("beta_lambda_a", "beta_lambda_b"):
        if key in spec:
            out[key] = parse_coupling(spec[key], f"model.{key}")
    single_point = task in ("spectrum", "binegativity", "negativity")
    if single_point and kind != "custom":
        for key in ("beta_lambda_a", "beta_lambda_b"):
            if key not in out:
                raise ConfigError(f"task {task} needs model.{key}")
    return out


def parse_config(doc, task: str, base_dir: Path | None = None) -> RunConfig:
    """Validate a config document completely before any computation."""
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "task" in doc and doc["task"] != task:
        raise ConfigError(f"config task {doc['task']!r} disagrees with subcommand {task!r}")
    cfg = RunConfig(task=task, model={})
    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output must be an object")
    cfg.out_path = output.get("path")
    cfg.out_format = output.get("format", "json")
    cfg.log_base = str(output.get("log_base", "2"))
    if "tolerance" in doc:
        cfg.tolerance = _positive(doc["tolerance"], "tolerance")
    if "verify_tolerance" in doc:
        cfg.verify_tolerance = _positive(doc["verify_tolerance"], "verify_tolerance")

    if task == "bench":
        bench = doc.get("bench")
        if not isinstance(bench, dict) or "k" not in bench:
            raise ConfigError("bench task needs bench.k")
        k = bench["k"]
        if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= MAX_BENCH_K:
            raise ConfigError(f"bench.k must be an integer in [0, {MAX_BENCH_K}]")
        seed = bench.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("bench.seed must be an integer")
        cfg.bench = {"k": k, "seed": seed}
        return cfg

    if "model" not in doc:
        raise ConfigError("config needs a model")
    cfg.model = _check_model_spec(doc["model"], task, base_dir)
    if task == "scan" and "grid" not in doc:
        raise ConfigError("scan task needs a grid")
    if "grid" in doc:
        cfg.grid = parse_grid(doc["grid"])
    return cfg


def _positive(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{where} must be a positive number")
    return float(value)


# -- model construction ----------------------------------------------------------------


def build_model(spec: dict, point: tuple[float, float] | None = None) -> StabilizerModel:
    """Instantiate ``spec`` at ``point = (beta_lambda_a, beta_lambda_b)``.

    Without a point the spec's own couplings apply; custom models then keep
    the couplings stored in their stabilizer document.
    """
    kind = spec["type"]
    if point is None and "beta_lambda_a" in spec and "beta_lambda_b" in spec:
        point = (spec["beta_lambda_a"], spec["beta_lambda_b"])
    if kind == "custom":
        m = model_from_dict(spec["stabilizers"])
        if point is None:
            return m
        return m.with_couplings(css_couplings(m, coupling_to_t(point[0]), coupling_to_t(point[1])))
    if point is None:
        raise ConfigError(f"{kind} needs beta_lambda_a and beta_lambda_b")
    t_a, t_b = coupling_to_t(point[0]), coupling_to_t(point[1])
    if kind == "toric2d_boundary":
        return build_boundary_2d(spec["L"], t_a, t_b).model
    if kind == "toric3d_boundary":
        return build_boundary_3d(spec["L"], t_a, t_b).model
    if kind == "toric4d_boundary":
        return build_boundary_4d(spec.get("L"), t_a, t_b, fragment=spec.get("fragment")).model
    return build_2d_torus(spec["L"], t_a, t_b, cut=spec.get("cut")).model


# -- formatting ------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _jsonable_coupling(x: float):
    return "inf" if math.isinf(x) else x


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header_comment: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header_comment + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) if not isinstance(row[c], str) else row[c] for c in columns])
    return buf.getvalue()


def _table_output(table: SectorTable, fmt: str) -> str:
    if fmt == "csv":
        return table_to_csv(table)
    return _dump_json(table_to_dict(table))


# -- tasks -----------------------------------------------------------------------------


def scan_point(spec: dict, point: tuple[float, float], tolerance: float, log_base: str, timing: bool = False) -> dict:
    """One ScanReport record; pure function of its arguments apart from wall time."""
    start = time.perf_counter()
    m = build_model(spec, point)
    f_t, _, b = model_tables(m)
    rep = ppt_report(f_t, b, tolerance, log_base)
    peak = float(np.max(np.abs(b.values)))
    rec = {
        "beta_lambda_a": _jsonable_coupling(point[0]),
        "beta_lambda_b": _jsonable_coupling(point[1]),
        "t_a": coupling_to_t(point[0]),
        "t_b": coupling_to_t(point[1]),
        "e_n": rep.e_n,
        "trace_norm": rep.trace_norm,
        "b_min": rep.lambda_min,
        "b_min_relative": float(np.min(b.values)) / peak if peak > 0 else 0.0,
        "z_rho": rep.z_rho,
        "log_z": rep.log_z,
        "cost_equals_negativity": rep.cost_equals_negativity,
    }
    if timing:
        rec["wall_time_s"] = time.perf_counter() - start
    return rec


def _scan_star(args):
    return scan_point(*args)


def run_scan(cfg: RunConfig) -> list[dict]:
    jobs = [(cfg.model, p, cfg.tolerance, cfg.log_base, cfg.timing) for p in cfg.grid]
    # Fail fast on guard/model errors before spawning workers.
    build_model(cfg.model, cfg.grid[0])
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(_scan_star, jobs, chunksize=1))
    return [scan_point(*j) for j in jobs]


def _scan_output(cfg: RunConfig, records: list[dict]) -> str:
    if cfg.out_format == "csv":
        columns = SCAN_COLUMNS + (("wall_time_s",) if cfg.timing else ())
        header = (
            f"# stabneg scan schema={SCHEMA_VERSION} model={cfg.model['type']} "
            f"log_base={cfg.log_base} tolerance={cfg.tolerance!r}"
        )
        return _csv_text(header, columns, records)
    return _dump_json(
        {
            "schema_version": SCHEMA_VERSION,
            "log_base": cfg.log_base,
            "tolerance": cfg.tolerance,
            "model": _model_echo(cfg.model),
            "records": records,
        }
    )


def _model_echo(spec: dict) -> dict:
    out = {}
    for key, val in spec.items():
        if key == "stabilizers":
            continue
        out[key] = _jsonable_coupling(val) if isinstance(val, float) else val
    return out


def run_verify(cfg: RunConfig) -> tuple[str, bool]:
    points = cfg.grid or [None]
    records = []
    for p in points:
        m = build_model(cfg.model, p)
        rec = verify_model(m, cfg.verify_tolerance, raise_on_mismatch=False).to_dict()
        if p is not None:
            rec["beta_lambda_a"] = _jsonable_coupling(p[0])
            rec["beta_lambda_b"] = _jsonable_coupling(p[1])
        records.append(rec)
    passed = all(r["passed"] for r in records)
    doc = {"schema_version": SCHEMA_VERSION, "model": _model_echo(cfg.model), "passed": passed, "records": records}
    return _dump_json(doc), passed


def run_bench(cfg: RunConfig) -> str:
    """Naive vs FWHT binegativity on the same random tables."""
    k, seed = cfg.bench["k"], cfg.bench["seed"]
    rng = np.random.default_rng(seed)
    f_t = SectorTable(k, rng.standard_normal(1 << k), k)
    f_1 = SectorTable(k, rng.standard_normal(1 << k), k)
    t0 = time.perf_counter()
    naive = binegativity_spectrum(f_t, f_1)
    t1 = time.perf_counter()
    fast = binegativity_fwht(f_t, f_1)
    t2 = time.perf_counter()
    dev = float(np.max(np.abs(naive.values - fast.values)))
    peak = float(np.max(np.abs(naive.values)))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "k": k,
        "seed": seed,
        "naive_seconds": t1 - t0,
        "fwht_seconds": t2 - t1,
        "speedup": (t1 - t0) / (t2 - t1) if t2 > t1 else None,
        "max_abs_deviation": dev,
        "max_relative_deviation": dev / peak if peak > 0 else dev,
    }
    return _dump_json(doc)


def _single_point(cfg: RunConfig) -> str:
    m = build_model(cfg.model)
    if cfg.task == "spectrum":
        return _table_output(negativity_spectrum(commutation_matrix(m), m.couplings, m.n_qubits), cfg.out_format)
    f_t, _, b = model_tables(m)
    if cfg.task == "binegativity":
        return _table_output(b, cfg.out_format)
    rep = ppt_report(f_t, b, cfg.tolerance, cfg.log_base)
    if cfg.out_format == "csv":
        row = rep.to_dict()
        columns = ("e_n", "trace_norm", "lambda_min", "z_rho", "log_z", "cost_equals_negativity", "tolerance_used")
        header = f"# stabneg negativity schema={SCHEMA_VERSION} log_base={cfg.log_base}"
        return _csv_text(header, columns, [row])
    return _dump_json(rep.to_dict())


def execute(cfg: RunConfig) -> tuple[str, int]:
    """Run a validated config; return ``(output text, exit code)``."""
    if cfg.task == "scan":
        return _scan_output(cfg, run_scan(cfg)), EXIT_OK
    if cfg.task == "verify":
        text, passed = run_verify(cfg)
        return text, EXIT_OK if passed else EXIT_MISMATCH
    if cfg.task == "bench":
        return run_bench(cfg), EXIT_OK
    return _single_point(cfg), EXIT_OK


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, target)


# -- entry point -----------------------------------------------------------------------


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabneg", description="Negativity and binegativity spectra of stabilizer Gibbs states.")
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output file (default: config output.path, else stdout)")
    ap.add_argument("--format", choices=("csv", "json"), dest="out_format")
    ap.add_argument("--log-base", choices=("2", "e"))
    ap.add_argument("--threads", type=int, help=f"worker processes for scans (default ${THREADS_ENV} or 1)")
    ap.add_argument("--tolerance", type=float, help="relative epsilon for the non-negativity verdict")
    ap.add_argument("--timing", action="store_true", help="add wall times to scan records (output no longer reproducible)")
    return ap


def load_config(args) -> RunConfig:
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(doc, args.task, base_dir=path.parent)
    if args.out is not None:
        cfg.out_path = args.out
    if args.out_format is not None:
        cfg.out_format = args.out_format
    if args.log_base is not None:
        cfg.log_base = args.log_base
    if args.tolerance is not None:
        cfg.tolerance = _positive(args.tolerance, "--tolerance")
    if cfg.out_format not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {cfg.out_format!r}")
    if cfg.log_base not in ("2", "e"):
        raise ConfigError(f"log base must be 2 or e, got {cfg.log_base!r}")
    if cfg.task in ("verify", "bench") and cfg.out_format != "json":
        raise ConfigError(f"{cfg.task} output is JSON only")
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg.threads = args.threads
    else:
        cfg.threads = _default_threads()
    cfg.timing = args.timing
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"stabneg: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text, code = execute(cfg)
    except ConfigError as exc:
        print(f"stabneg: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationMismatch as exc:
        print(f"stabneg: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ModelError, StabnegError) as exc:
        print(f"stabneg: {exc}", file=sys.stderr)
        return EXIT_MODEL
    _write(text, cfg.out_path)
    if code == EXIT_MISMATCH:
        print("stabneg: dense verification mismatch", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
