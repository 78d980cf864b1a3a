"""``ig-ident`` batch driver.

Subcommands: ``dist {sample,pdf,moments,mgf}``, ``fpt``,
``codebook {build,audit,density}``, ``simulate``, ``bounds`` and
``lemma {lemma3,separation}``. Parameters come from flags, optionally layered
over a JSON file given with ``--config`` (flags win). Every parameter is
validated before any computation starts.

Exit codes: 0 success, 1 usage/configuration, 2 domain error, 3 infeasible
packing, 4 runaway first-passage path.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .brownian_fpt import (
    FluidParams,
    default_dt,
    ig_params_from_fluid,
    sample_first_passage,
    simulate_path,
    summarize_first_passage,
)
from .codebook import (
    Codebook,
    build_greedy_packing,
    codeword_pair,
    count_bounds,
    estimate_packing_density,
    scaling_quantities,
)
from .codec import DecodingRule
from .error_analysis import (
    ErrorEstimate,
    chebyshev_bounds,
    count_rejections,
    lemma3_bound_check,
    separation_check,
)
from .errors import IGIdentError
from .ig_distribution import IGParams, ig_cdf, ig_mgf, ig_moments, ig_pdf, ig_sample
from .stats import ks_statistic
from .streams import BLOCK_SIZE, block_counts, substream

REQUIRED = object()


class UsageError(Exception):
    exit_code = 1


# --------------------------------------------------------------------------- fields


def _positive(x):
    if not (math.isfinite(x) and x > 0):
        return "must be finite and > 0"


def _open_unit(x):
    if not 0 < x < 1:
        return "must lie in the open interval (0, 1)"


def _half_open_unit(x):
    if not 0 <= x < 1:
        return "must lie in [0, 1)"


def _at_least(k):
    def check(x):
        if x < k:
            return f"must be >= {k}"
    return check


def _finite(x):
    if not math.isfinite(x):
        return "must be finite"


def _parse_bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _parse_int(text):
    if isinstance(text, bool):
        raise ValueError(text)
    if isinstance(text, int):
        return text
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


# name -> (parser, validator, help)
FIELDS: dict[str, tuple[Callable, Callable | None, str]] = {
    "mu": (float, _positive, "IG mean (time)"),
    "lambda": (float, _positive, "IG shape (time)"),
    "n_samples": (_parse_int, _at_least(1), "number of variates"),
    "seed": (_parse_int, _at_least(0), "master seed (64-bit)"),
    "z_min": (float, _finite, "lower end of the evaluation grid"),
    "z_max": (float, _finite, "upper end of the evaluation grid"),
    "points": (_parse_int, _at_least(2), "grid points"),
    "alpha": (float, _finite, "MGF argument (1/time)"),
    "d": (float, _positive, "transmitter-receiver distance"),
    "v": (float, _positive, "drift velocity"),
    "sigma": (float, _positive, "volatility (length/sqrt(time))"),
    "sigma2": (float, _positive, "volatility squared"),
    "dt": (float, _positive, "Euler time step (default mu/1e4)"),
    "samples": (_parse_int, _at_least(100), "first-passage samples"),
    "bridge": (_parse_bool, None, "Brownian-bridge crossing correction"),
    "trace": (_parse_int, _at_least(0), "number of paths to trace to CSV"),
    "trace_t_max": (float, _positive, "horizon of traced paths (default 10 mu)"),
    "n": (_parse_int, _at_least(1), "blocklength"),
    "t_max": (float, _positive, "peak time constraint"),
    "min_distance": (float, _positive, "minimum codeword distance (default 2 r0)"),
    "a": (float, _positive, "scale constant a"),
    "b": (float, _open_unit, "exponent constant b"),
    "target_m": (_parse_int, _at_least(2), "codewords wanted"),
    "max_attempts": (_parse_int, _at_least(1), "candidate budget"),
    "input": (str, None, "codebook CSV"),
    "mc_points": (_parse_int, _at_least(1), "Monte Carlo points"),
    "radius": (float, _positive, "sphere radius (default min_distance/2)"),
    "trials": (_parse_int, _at_least(100), "transmissions per estimate"),
    "pairs": (_parse_int, _at_least(1), "codeword pairs"),
    "separation": (float, _positive, "pair distance in units of r0"),
    "n_grid": (str, None, "blocklengths: 'lo..hi' (doubling), 'lo:hi:step' or 'n1,n2,...'"),
    "z": (float, _positive, "constant noise value of every coordinate"),
    "diff_frac": (float, _half_open_unit, "per-coordinate codeword gap as a fraction of alpha_n"),
}

COMMANDS: dict[str, dict[str, Any]] = {
    "dist sample": {"mu": REQUIRED, "lambda": REQUIRED, "n_samples": 1000, "seed": 0},
    "dist pdf": {"mu": REQUIRED, "lambda": REQUIRED, "z_min": 0.0, "z_max": REQUIRED, "points": 101},
    "dist moments": {"mu": REQUIRED, "lambda": REQUIRED},
    "dist mgf": {"mu": REQUIRED, "lambda": REQUIRED, "alpha": REQUIRED},
    "fpt": {
        "d": REQUIRED, "v": REQUIRED, "sigma": None, "sigma2": None, "dt": None,
        "samples": 10000, "bridge": True, "seed": 0, "trace": 0, "trace_t_max": None,
    },
    "codebook build": {
        "n": REQUIRED, "t_max": REQUIRED, "min_distance": None, "a": 1.0, "b": 0.5,
        "target_m": REQUIRED, "max_attempts": 100000, "seed": 0,
    },
    "codebook audit": {"input": REQUIRED},
    "codebook density": {"input": REQUIRED, "radius": None, "mc_points": 100000, "seed": 0},
    "simulate": {
        "mu": REQUIRED, "lambda": REQUIRED, "n": REQUIRED, "a": 1.0, "b": 0.5, "t_max": 10.0,
        "trials": 10000, "pairs": 1, "separation": 2.0, "seed": 0,
    },
    "bounds": {"t_max": REQUIRED, "a": 1.0, "b": 0.1, "n_grid": "16..1048576"},
    "lemma lemma3": {
        "n": REQUIRED, "a": 1.0, "b": 0.5, "mu": REQUIRED, "lambda": REQUIRED,
        "z": REQUIRED, "diff_frac": 0.5,
    },
    "lemma separation": {"input": REQUIRED, "a": 1.0, "b": 0.5},
}

STOCHASTIC = {"dist sample", "fpt", "codebook build", "codebook density", "simulate"}


@dataclass
class ExperimentConfig:
    command: str
    params: dict[str, Any]
    master_seed: int = 0
    output_path: Path | None = None
    workers: int = 1
    force: bool = False
    json_mirror: bool = False


def _coerce(name: str, raw: Any) -> Any:
    parser, validator, _ = FIELDS[name]
    try:
        value = parser(raw)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: cannot parse {raw!r}") from None
    if validator is not None and value is not None:
        problem = validator(value)
        if problem:
            raise UsageError(f"{name} {problem}, got {raw!r}")
    return value


def parse_n_grid(text: str) -> list[int]:
    """Expand ``lo..hi`` (doubling), ``lo:hi:step`` (arithmetic) or a comma list."""
    try:
        if ".." in text:
            lo, hi = (int(float(p)) for p in text.split(".."))
            grid = []
            n = lo
            while n <= hi:
                grid.append(n)
                n *= 2
        elif ":" in text:
            lo, hi, step = (int(float(p)) for p in text.split(":"))
            grid = list(range(lo, hi + 1, step))
        else:
            grid = [int(float(p)) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"n_grid: cannot parse {text!r}") from None
    if not grid or min(grid) < 4:
        raise UsageError(f"n_grid must be non-empty with every n >= 4, got {text!r}")
    return grid


def _validate(command: str, params: dict[str, Any]) -> None:
    """Cross-field checks that single-field validators cannot express."""
    if command == "fpt":
        if (params["sigma"] is None) == (params["sigma2"] is None):
            raise UsageError("fpt needs exactly one of sigma or sigma2")
    if command == "dist pdf" and not params["z_max"] > params["z_min"]:
        raise UsageError("z_max must exceed z_min")
    if command in ("simulate", "lemma lemma3") and params["n"] < 2:
        raise UsageError("n must be >= 2")
    if command == "bounds":
        params["n_grid"] = parse_n_grid(params["n_grid"])
    if command == "simulate":
        q = scaling_quantities(params["n"], params["a"], params["b"])
        step = params["separation"] * q.r0 / math.sqrt(params["n"])
        if step > params["t_max"]:
            raise UsageError(
                f"separation {params['separation']} r0 needs per-coordinate gap {step!r} > t_max"
            )


def build_config(command: str, flags: dict[str, Any], config_file: str | None = None,
                 output: str | None = None, workers: int | None = None, force: bool = False,
                 json_mirror: bool = False) -> ExperimentConfig:
    """Merge defaults, JSON config and explicit flags; validate everything."""
    schema = COMMANDS[command]
    merged: dict[str, Any] = {}
    if config_file:
        try:
            with open(config_file) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_file}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        for key, raw in loaded.items():
            if key == "output" and output is None:
                output = raw
            elif key == "workers" and workers is None:
                workers = raw
            elif key not in schema:
                raise UsageError(f"unknown config key {key!r} for '{command}'")
            else:
                merged[key] = raw
    merged.update(flags)

    params: dict[str, Any] = {}
    for name, default in schema.items():
        if name in merged and merged[name] is not None:
            params[name] = _coerce(name, merged[name])
        elif default is REQUIRED:
            raise UsageError(f"missing required parameter {name!r} for '{command}'")
        else:
            params[name] = default
    _validate(command, params)

    if workers is None:
        workers = os.environ.get("IG_IDENT_WORKERS", 1)
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        raise UsageError(f"workers: cannot parse {workers!r}") from None
    if workers < 1:
        raise UsageError("workers must be >= 1")
    return ExperimentConfig(
        command=command,
        params=params,
        master_seed=params.get("seed", 0),
        output_path=Path(output) if output else None,
        workers=workers,
        force=force,
        json_mirror=json_mirror,
    )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ig-ident", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)
    groups: dict[str, argparse._SubParsersAction] = {}
    for command, schema in COMMANDS.items():
        words = command.split()
        if len(words) == 1:
            sub = top.add_parser(words[0])
        else:
            if words[0] not in groups:
                grp = top.add_parser(words[0])
                groups[words[0]] = grp.add_subparsers(dest="action", required=True,
                                                      parser_class=_Parser)
            sub = groups[words[0]].add_parser(words[1])
        sub.set_defaults(command=command)
        sub.add_argument("--config", help="JSON file of parameters (flags override)")
        sub.add_argument("-o", "--output", help="CSV artifact path (default: stdout)")
        sub.add_argument("--force", action="store_true", help="overwrite existing artifacts")
        sub.add_argument("--json", dest="json_mirror", action="store_true",
                         help="also write a JSON mirror next to the CSV")
        sub.add_argument("--workers", help="worker processes (default $IG_IDENT_WORKERS or 1)")
        for name in schema:
            _, _, help_text = FIELDS[name]
            flag = "--" + name.replace("_", "-")
            if FIELDS[name][0] is _parse_bool:
                sub.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction,
                                 default=argparse.SUPPRESS, help=help_text)
            else:
                sub.add_argument(flag, dest=name, default=argparse.SUPPRESS, help=help_text)
    return parser


_META = {"group", "action", "command", "config", "output", "force", "json_mirror", "workers"}


def parse_config(argv: Sequence[str]) -> ExperimentConfig:
    ns = vars(_make_parser().parse_args(list(argv)))
    flags = {k: v for k, v in ns.items() if k not in _META}
    return build_config(ns["command"], flags, ns.get("config"), ns.get("output"),
                        ns.get("workers"), ns.get("force", False), ns.get("json_mirror", False))


# --------------------------------------------------------------------------- output


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def emit_report(path: Path | None, columns: Sequence[str], rows: Sequence[dict],
                comments: Sequence[str] = (), force: bool = False, json_mirror: bool = False,
                stream=None) -> None:
    """Write rows as CSV with a fixed column order and 17-significant-digit floats.

    ``comments`` become leading ``#`` lines. Refuses to replace an existing file
    unless ``force`` is set. With ``json_mirror`` the same data goes to
    ``<path>.json``.
    """
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    text = buf.getvalue()

    if path is None:
        (stream or sys.stdout).write(text)
        return
    targets = [path] + ([path.with_suffix(path.suffix + ".json")] if json_mirror else [])
    for target in targets:
        if target.exists() and not force:
            raise UsageError(f"{target} exists; pass --force to overwrite")
    path.write_text(text)
    if json_mirror:
        payload = {
            "comments": list(comments),
            "columns": list(columns),
            "rows": [{c: _fmt(r[c]) for c in columns} for r in rows],
        }
        targets[1].write_text(json.dumps(payload, indent=2) + "\n")


def _constants(n: int, a: float, b: float, params: IGParams | None = None,
               t_max: float | None = None) -> list[str]:
    q = scaling_quantities(n, a, b)
    lines = [
        f"epsilon_n = {_fmt(q.epsilon_n)}", f"r0 = {_fmt(q.r0)}",
        f"delta_n = {_fmt(q.delta_n)}", f"alpha_n = {_fmt(q.alpha_n)}",
    ]
    if params is not None and t_max is not None:
        cb = chebyshev_bounds(params, t_max, n, a, b)
        lines += [f"eta0 = {_fmt(cb.eta0)}", f"zeta0 = {_fmt(cb.zeta0)}",
                  f"zeta1 = {_fmt(cb.zeta1)}"]
    return lines


# --------------------------------------------------------------------------- parallel blocks


def _map_blocks(func: Callable, tasks: list[tuple], workers: int) -> list:
    """Apply ``func`` to every task, results in task order regardless of ``workers``."""
    if workers <= 1 or len(tasks) <= 1:
        return [func(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, *zip(*tasks)))


def _sample_block(mu, lam, count, seed, index):
    return ig_sample(IGParams(mu, lam), substream(seed, "dist", index), size=count)


def _fpt_block(fluid, count, dt, bridge, seed, index):
    return sample_first_passage(fluid, count, dt, substream(seed, "fpt", index), bridge)


def _rejection_block(c_sent, c_test, params, rule, count, seed, tag, index):
    return count_rejections(c_sent, c_test, params, rule, count, substream(seed, tag, index))


# --------------------------------------------------------------------------- commands


@dataclass
class Result:
    columns: list[str]
    rows: list[dict]
    comments: list[str] = field(default_factory=list)
    summary: str = ""
    extra_files: dict[str, Result] = field(default_factory=dict)


def _header(cfg: ExperimentConfig) -> list[str]:
    lines = [f"ig-ident {cfg.command}"]
    for k, v in cfg.params.items():
        if isinstance(v, list):
            lines.append(f"{k} = {','.join(_fmt(x) for x in v)}")
        elif v is not None:
            lines.append(f"{k} = {_fmt(v)}")
    return lines


def _run_dist(cfg: ExperimentConfig) -> Result:
    p = cfg.params
    params = IGParams(p["mu"], p["lambda"])
    head = _header(cfg) + [f"variance = {_fmt(params.variance)}"]
    if cfg.command == "dist sample":
        tasks = [(params.mu, params.lam, c, cfg.master_seed, k)
                 for k, c in enumerate(block_counts(p["n_samples"]))]
        z = np.concatenate(_map_blocks(_sample_block, tasks, cfg.workers))
        ks = ks_statistic(z, lambda x: ig_cdf(params, x))
        rows = [{"index": i + 1, "z": v} for i, v in enumerate(z)]
        head += [f"sample_mean = {_fmt(z.mean())}", f"ks_distance = {_fmt(ks)}"]
        return Result(["index", "z"], rows, head,
                      f"sampled {z.size} IG({params.mu:g},{params.lam:g}) variates: "
                      f"mean {z.mean():.6g}, KS {ks:.4g}")
    if cfg.command == "dist pdf":
        grid = np.linspace(p["z_min"], p["z_max"], p["points"])
        pdf, cdf = ig_pdf(params, grid), ig_cdf(params, grid)
        rows = [{"z": z, "pdf": f, "cdf": c} for z, f, c in zip(grid, pdf, cdf)]
        return Result(["z", "pdf", "cdf"], rows, head,
                      f"evaluated pdf/cdf at {grid.size} points; max pdf {pdf.max():.6g}")
    if cfg.command == "dist moments":
        m = ig_moments(params)
        row = {"mean": m.mean, "variance": m.variance, "fourth_noncentral": m.fourth_noncentral,
               "fourth_upper_bound": m.fourth_upper_bound}
        return Result(list(row), [row], head,
                      f"E[Z^4] = {m.fourth_noncentral:.6g} <= bound {m.fourth_upper_bound:.6g}")
    value = ig_mgf(params, p["alpha"])
    return Result(["alpha", "mgf"], [{"alpha": p["alpha"], "mgf": value}], head,
                  f"MGF({p['alpha']:g}) = {value:.10g}")


def _run_fpt(cfg: ExperimentConfig) -> Result:
    p = cfg.params
    if p["sigma"] is not None:
        fluid = FluidParams(v=p["v"], sigma=p["sigma"], d=p["d"])
    else:
        fluid = FluidParams.from_sigma2(v=p["v"], sigma2=p["sigma2"], d=p["d"])
    dt = p["dt"] if p["dt"] is not None else default_dt(fluid)
    ig = ig_params_from_fluid(fluid)
    tasks = [(fluid, c, dt, p["bridge"], cfg.master_seed, k)
             for k, c in enumerate(block_counts(p["samples"]))]
    samples = np.concatenate(_map_blocks(_fpt_block, tasks, cfg.workers))
    report = summarize_first_passage(fluid, samples, dt)
    row = report.as_row() | {"dt": dt, "bridge": p["bridge"], "seed": cfg.master_seed}
    head = _header(cfg) + [f"dt_used = {_fmt(dt)}", f"ig_mu = {_fmt(ig.mu)}",
                           f"ig_lambda = {_fmt(ig.lam)}"]
    extra = {}
    if p["trace"]:
        horizon = p["trace_t_max"] if p["trace_t_max"] is not None else 10.0 * ig.mu
        for k in range(p["trace"]):
            path = simulate_path(fluid, dt, horizon, substream(cfg.master_seed, "trace", k))
            rows = [{"step": s, "t": s * dt, "x": x} for s, x in enumerate(path.positions)]
            extra[f"path{k + 1}"] = Result(["step", "t", "x"], rows)
    return Result(list(row), [row], head,
                  f"fpt: {report.n_samples} samples, mean {report.sample_mean:.6g} "
                  f"(IG mean {report.mean:.6g}), KS {report.ks_distance:.4g}"
                  + (" [degenerate]" if report.degenerate else ""),
                  extra)


def _codebook_result(cfg: ExperimentConfig, cb: Codebook) -> Result:
    columns = [f"c{t + 1}" for t in range(cb.n)]
    rows = [dict(zip(columns, row)) for row in cb.codewords]
    return Result(columns, rows)


def _run_codebook(cfg: ExperimentConfig) -> Result | Codebook:
    p = cfg.params
    if cfg.command == "codebook build":
        md = p["min_distance"]
        head = _header(cfg)
        if md is None:
            if p["n"] < 2:
                raise UsageError("min_distance is required when n < 2")
            md = 2.0 * scaling_quantities(p["n"], p["a"], p["b"]).r0
            head += _constants(p["n"], p["a"], p["b"]) + [f"min_distance_used = {_fmt(md)}"]
        cb = build_greedy_packing(p["n"], p["t_max"], md, p["target_m"], p["max_attempts"],
                                  substream(cfg.master_seed, "packing", 0))
        head += [f"attempts = {cb.attempts}", f"saturated = {int(bool(cb.saturated))}"]
        return cb, head, (f"packed {cb.M} codewords in {cb.attempts} attempts "
                          f"(min distance {md:.6g}, saturated={bool(cb.saturated)})")
    cb = Codebook.from_csv(p["input"])
    if cfg.command == "codebook audit":
        problems = cb.audit()
        rows = [{"violation": msg} for msg in problems]
        return Result(["violation"], rows, _header(cfg),
                      f"audit of {cb.M} codewords: {len(problems)} violation(s)")
    radius = p["radius"] if p["radius"] is not None else cb.min_distance / 2.0
    est = estimate_packing_density(cb, radius, p["mc_points"],
                                   substream(cfg.master_seed, "density", 0))
    row = {"M": cb.M, "n": cb.n, "radius": radius, "density": est.estimate,
           "std_error": est.std_error, "mc_points": est.points, "floor": 2.0 ** -cb.n}
    return Result(list(row), [row], _header(cfg),
                  f"density at r={radius:.6g}: {est.estimate:.6g} +/- {est.std_error:.2g}")


SIM_COLUMNS = [
    "n", "mu", "lambda", "a", "b", "t_max", "pair_id", "distance",
    "p1_hat", "ci1", "p2_hat", "ci2", "eta0", "zeta0", "zeta1",
    "eta0_vacuous", "zeta0_vacuous", "zeta1_vacuous", "type2_bound_vacuous", "trials", "seed",
]


def _run_simulate(cfg: ExperimentConfig) -> Result:
    p = cfg.params
    n, a, b = p["n"], p["a"], p["b"]
    params = IGParams(p["mu"], p["lambda"])
    rule = DecodingRule.for_channel(params, n, a, b)
    q = scaling_quantities(n, a, b)
    bounds = chebyshev_bounds(params, p["t_max"], n, a, b)
    distance = p["separation"] * q.r0
    counts = block_counts(p["trials"])
    rows = []
    for pair_id in range(1, p["pairs"] + 1):
        cb = codeword_pair(n, p["t_max"], distance, substream(cfg.master_seed, "pair", pair_id))
        ci, cj = cb.codewords
        t1 = [(ci, ci, params, rule, c, cfg.master_seed, f"type1/{pair_id}", k)
              for k, c in enumerate(counts)]
        t2 = [(ci, cj, params, rule, c, cfg.master_seed, f"type2/{pair_id}", k)
              for k, c in enumerate(counts)]
        rej1 = sum(_map_blocks(_rejection_block, t1, cfg.workers))
        rej2 = sum(_map_blocks(_rejection_block, t2, cfg.workers))
        e1 = ErrorEstimate.from_counts(rej1, p["trials"])
        e2 = ErrorEstimate.from_counts(p["trials"] - rej2, p["trials"])
        rows.append({
            "n": n, "mu": params.mu, "lambda": params.lam, "a": a, "b": b, "t_max": p["t_max"],
            "pair_id": pair_id, "distance": float(np.linalg.norm(ci - cj)),
            "p1_hat": e1.p_hat, "ci1": e1.ci_halfwidth, "p2_hat": e2.p_hat, "ci2": e2.ci_halfwidth,
            "eta0": bounds.eta0, "zeta0": bounds.zeta0, "zeta1": bounds.zeta1,
            "eta0_vacuous": bounds.eta0_vacuous, "zeta0_vacuous": bounds.zeta0_vacuous,
            "zeta1_vacuous": bounds.zeta1_vacuous, "type2_bound_vacuous": bounds.type2_vacuous,
            "trials": p["trials"], "seed": cfg.master_seed,
        })
    head = _header(cfg) + _constants(n, a, b, params, p["t_max"])
    worst1 = max(r["p1_hat"] for r in rows)
    worst2 = max(r["p2_hat"] for r in rows)
    return Result(SIM_COLUMNS, rows, head,
                  f"simulate n={n}: max P_e1 {worst1:.4g} (eta0 {bounds.eta0:.4g}), "
                  f"max P_e2 {worst2:.4g} (zeta0+zeta1 {bounds.type2_bound:.4g})")


def _run_bounds(cfg: ExperimentConfig) -> Result:
    p = cfg.params
    rows = [count_bounds(n, p["t_max"], p["a"], p["b"]).as_row() for n in p["n_grid"]]
    head = _header(cfg) + [f"rate_lower_limit = {_fmt((1 - p['b']) / 4)}"]
    last = rows[-1]
    return Result(["n", "log2_M_lower", "log2_M_upper", "rate_lower", "rate_upper"], rows, head,
                  f"bounds at n={last['n']}: rate in [{last['rate_lower']:.6g}, "
                  f"{last['rate_upper']:.6g}]")


def _run_lemma(cfg: ExperimentConfig) -> Result:
    p = cfg.params
    if cfg.command == "lemma lemma3":
        n, a, b = p["n"], p["a"], p["b"]
        params = IGParams(p["mu"], p["lambda"])
        alpha = scaling_quantities(n, a, b).alpha_n
        c1 = np.zeros(n)
        c2 = np.full(n, p["diff_frac"] * alpha)
        rep = lemma3_bound_check(c1, c2, np.full(n, p["z"]), params, n, a, b)
        row = {"n": n, "log_A": rep.log_A, "log_B": rep.log_B, "ratio": rep.ratio,
               "abs_one_minus_ratio": abs(1 - rep.ratio), "tau_bound": rep.tau_bound,
               "within_bound": rep.within_bound, "regular": rep.regular}
        return Result(list(row), [row], _header(cfg) + _constants(n, a, b),
                      f"lemma3 n={n}: |1-ratio| = {abs(1 - rep.ratio):.6g}, "
                      f"tau = {rep.tau_bound:.6g}, within_bound={rep.within_bound}")
    cb = Codebook.from_csv(p["input"])
    rep = separation_check(cb, cb.n, p["a"], p["b"])
    row = {"M": cb.M, "n": cb.n, "alpha_n": rep.alpha_n, "min_max_gap": rep.min_max_gap,
           "passed": rep.passed,
           "offending_pair": "" if rep.offending_pair is None else "%d-%d" % rep.offending_pair}
    return Result(list(row), [row], _header(cfg),
                  f"separation over {cb.M} codewords: passed={rep.passed}, "
                  f"min max-gap {rep.min_max_gap:.6g} vs alpha_n {rep.alpha_n:.3g}")


def run(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    """Execute a validated configuration; return the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    summary_stream = stdout if cfg.output_path is not None else stderr
    try:
        group = cfg.command.split()[0]
        if group == "codebook" and cfg.command == "codebook build":
            cb, head, summary = _run_codebook(cfg)
            if cfg.output_path is None:
                buf = io.StringIO()
                _write_codebook(cb, head, buf)
                stdout.write(buf.getvalue())
            else:
                if cfg.output_path.exists() and not cfg.force:
                    raise UsageError(f"{cfg.output_path} exists; pass --force to overwrite")
                cb.to_csv(cfg.output_path, head)
            print(summary, file=summary_stream)
            return 0
        handler = {"dist": _run_dist, "fpt": _run_fpt, "codebook": _run_codebook,
                   "simulate": _run_simulate, "bounds": _run_bounds, "lemma": _run_lemma}[group]
        result = handler(cfg)
        emit_report(cfg.output_path, result.columns, result.rows, result.comments,
                    cfg.force, cfg.json_mirror, stream=stdout)
        for suffix, extra in result.extra_files.items():
            if cfg.output_path is None:
                continue
            target = cfg.output_path.with_name(f"{cfg.output_path.stem}_{suffix}.csv")
            emit_report(target, extra.columns, extra.rows, force=cfg.force)
        print(result.summary, file=summary_stream)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.exit_code
    except IGIdentError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return 1


def _write_codebook(cb: Codebook, head: list[str], stream) -> None:
    for line in head:
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([cb.n, f"{cb.t_max:.17g}", f"{cb.min_distance:.17g}", cb.M])
    for row in cb.codewords:
        writer.writerow([f"{v:.17g}" for v in row])


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except IGIdentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
