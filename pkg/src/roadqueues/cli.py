"""Command line front end.

Four commands, each driven by a single JSON config file:

    roadqueues section analyze --config cfg.json
    roadqueues tandem solve    --config cfg.json
    roadqueues tandem sweep    --config cfg.json
    roadqueues oracle compare  --config cfg.json

The config names the road sections, the arrival rate (or a sweep range),
solver options and the output file.  Outputs are deterministic: the same
config bytes always produce byte-identical files, and every output file
embeds the SHA-256 of the config it was produced from (never a
timestamp).  Exit codes: 0 success, 1 domain error, 2 config error,
3 iteration non-convergence (the iterate trace is still written, to
``<output path>.trace.json``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Sequence

from .diagram import FundamentalDiagram, LinearQuadratic, section_from_json, speed_profile
from .errors import ConfigError, DomainError, NonConvergenceError
from .oracle import comparison_report
from .section import (
    StationaryDistribution,
    performance_measures,
    stationary_flow_form,
    stationary_speed_form,
)
from .tandem import (
    DEFAULT_MAX_ITER,
    TandemConfig,
    TandemSolution,
    solve_bisection,
    solve_iteration,
)

__all__ = ["main", "console_main"]

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

_SOLVERS = ("bisection", "iteration")
_FORMATS = ("csv", "json")

_SWEEP_COLUMNS = (
    "lambda",
    "theta",
    "delta",
    "mode",
    "p1_block",
    "p2_block",
    "n1_mean",
    "n2_mean",
    "w1_hours",
    "w2_hours",
    "residual",
)


def _fmt(value: float) -> str:
    """Floats in CSV output carry 12 significant digits."""
    return "%.12g" % value


def _load_config(path: str) -> tuple[dict, str]:
    """Read a config file, returning the parsed document and its SHA-256."""
    try:
        with open(path, "rb") as handle:
            raw = handle.read()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path!r}: {err}") from err
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw)
    except ValueError as err:
        raise ConfigError(f"config file {path!r} is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc, digest


def _check_keys(doc: dict, required: set, optional: set) -> None:
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"config missing required keys: {sorted(missing)}")
    unknown = set(doc) - required - optional
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")


def _positive_number(doc: dict, key: str) -> float | None:
    value = doc.get(key)
    if value is None:
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise ConfigError(f"config key {key!r} must be a positive number")
    return float(value)


def _arrival_rate(doc: dict) -> float:
    value = doc.get("lambda")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError('config key "lambda" must be a number')
    if value < 0:
        raise ConfigError(f'config key "lambda" must be nonnegative, got {value}')
    return float(value)


def _sections(doc: dict, count: int) -> list[FundamentalDiagram]:
    entries = doc.get("sections")
    if not isinstance(entries, list) or len(entries) != count:
        raise ConfigError(f'config key "sections" must be a list of exactly {count} sections')
    return [section_from_json(entry) for entry in entries]


def _output(doc: dict, formats: Sequence[str]) -> tuple[str, str]:
    out = doc.get("output")
    if not isinstance(out, dict) or set(out) != {"path", "format"}:
        raise ConfigError('config key "output" must be {"path": ..., "format": ...}')
    path, fmt = out["path"], out["format"]
    if not isinstance(path, str) or not path:
        raise ConfigError("output path must be a nonempty string")
    if fmt not in formats:
        raise ConfigError(
            f"output format must be one of {list(formats)} for this command, got {fmt!r}"
        )
    return path, fmt


def _solver_options(doc: dict) -> tuple[str, float | None, int]:
    solver = doc.get("solver", "bisection")
    if solver not in _SOLVERS:
        raise ConfigError(f'config key "solver" must be one of {list(_SOLVERS)}, got {solver!r}')
    tol = _positive_number(doc, "tol")
    max_iter = doc.get("max_iter", DEFAULT_MAX_ITER)
    if not isinstance(max_iter, int) or isinstance(max_iter, bool) or max_iter < 1:
        raise ConfigError('config key "max_iter" must be a positive integer')
    return solver, tol, max_iter


def _sweep_rates(doc: dict) -> list[float]:
    sweep = doc.get("lambda_sweep")
    if not isinstance(sweep, dict) or set(sweep) != {"from", "to", "step"}:
        raise ConfigError('config key "lambda_sweep" must be {"from": ..., "to": ..., "step": ...}')
    for key in ("from", "to", "step"):
        if not isinstance(sweep[key], (int, float)) or isinstance(sweep[key], bool):
            raise ConfigError(f"lambda_sweep key {key!r} must be a number")
    start, stop, step = float(sweep["from"]), float(sweep["to"]), float(sweep["step"])
    if step <= 0:
        raise ConfigError(f"lambda_sweep step must be positive, got {step}")
    if start < 0:
        raise ConfigError(f"lambda_sweep must start at a nonnegative rate, got {start}")
    if start > stop:
        raise ConfigError(f"lambda_sweep range is empty: from {start} to {stop}")
    rates = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9 * step:
            return rates
        rates.append(value)
        k += 1


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as handle:
            handle.write(text)
    except OSError as err:
        raise ConfigError(f"cannot write output file {path!r}: {err}") from err


def _dump_json(path: str, doc: dict) -> None:
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def _solve(cfg: TandemConfig, solver: str, tol: float | None, max_iter: int) -> TandemSolution:
    if solver == "iteration":
        return solve_iteration(cfg, max_iter=max_iter, tol=tol)
    return solve_bisection(cfg, tol=tol)


def cmd_section_analyze(config_path: str) -> int:
    doc, digest = _load_config(config_path)
    _check_keys(doc, {"sections", "lambda", "output"}, {"form"})
    (diagram,) = _sections(doc, 1)
    rate = _arrival_rate(doc)
    default_form = "flow" if isinstance(diagram.model, LinearQuadratic) else "speed"
    form = doc.get("form", default_form)
    if form not in ("flow", "speed"):
        raise ConfigError(f'config key "form" must be "flow" or "speed", got {form!r}')
    path, fmt = _output(doc, _FORMATS)

    if form == "flow":
        dist = stationary_flow_form(rate, diagram)
    else:
        dist = stationary_speed_form(rate, diagram.params, speed_profile(diagram))
    report = performance_measures(rate, dist)

    if fmt == "json":
        _dump_json(
            path,
            {
                "config_sha256": digest,
                "distribution": dist.to_json_dict(),
                "performance": report.to_json_dict(),
            },
        )
    else:
        lines = [
            f"# config_sha256={digest}",
            "# performance=" + json.dumps(report.to_json_dict()),
            "n,prob",
        ]
        lines += [f"{n},{_fmt(prob)}" for n, prob in dist.to_csv_rows()]
        _write_text(path, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_tandem_solve(config_path: str) -> int:
    doc, digest = _load_config(config_path)
    _check_keys(doc, {"sections", "lambda", "output"}, {"solver", "tol", "max_iter"})
    section1, section2 = _sections(doc, 2)
    rate = _arrival_rate(doc)
    solver, tol, max_iter = _solver_options(doc)
    path, _ = _output(doc, ("json",))

    cfg = TandemConfig(section1, section2, rate)
    try:
        solution = _solve(cfg, solver, tol, max_iter)
    except NonConvergenceError as err:
        _dump_json(
            path + ".trace.json",
            {"config_sha256": digest, "lambda": rate, "trace": list(err.trace)},
        )
        raise
    _dump_json(path, {"config_sha256": digest, **solution.to_json_dict()})
    return EXIT_OK


def _sweep_row(solution: TandemSolution) -> str:
    report1, report2 = solution.report1, solution.report2
    cells = (
        _fmt(solution.config.arrival_rate),
        _fmt(solution.transfer_rate),
        _fmt(solution.exit_rate),
        solution.mode.value,
        _fmt(report1.blocking_probability),
        _fmt(report2.blocking_probability),
        _fmt(report1.expected_count),
        _fmt(report2.expected_count),
        _fmt(report1.expected_time),
        _fmt(report2.expected_time),
        _fmt(solution.residual),
    )
    return ",".join(cells)


def cmd_tandem_sweep(config_path: str) -> int:
    doc, digest = _load_config(config_path)
    _check_keys(doc, {"sections", "lambda_sweep", "output"}, {"solver", "tol", "max_iter"})
    section1, section2 = _sections(doc, 2)
    rates = _sweep_rates(doc)
    solver, tol, max_iter = _solver_options(doc)
    path, _ = _output(doc, ("csv",))

    rows = []
    for rate in rates:
        cfg = TandemConfig(section1, section2, rate)
        try:
            rows.append(_sweep_row(_solve(cfg, solver, tol, max_iter)))
        except NonConvergenceError as err:
            _dump_json(
                path + ".trace.json",
                {"config_sha256": digest, "lambda": rate, "trace": list(err.trace)},
            )
            raise
    lines = [f"# config_sha256={digest}", ",".join(_SWEEP_COLUMNS)] + rows
    _write_text(path, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_oracle_compare(config_path: str) -> int:
    doc, digest = _load_config(config_path)
    _check_keys(doc, {"sections", "lambda", "output"}, {"tol"})
    section1, section2 = _sections(doc, 2)
    rate = _arrival_rate(doc)
    tol = _positive_number(doc, "tol")
    path, _ = _output(doc, ("json",))

    report = comparison_report(TandemConfig(section1, section2, rate), tol)
    _dump_json(path, {"config_sha256": digest, **report})
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadqueues",
        description="Stationary analysis of road sections modelled as finite queues.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    section = commands.add_parser("section", help="single-section analysis")
    section_sub = section.add_subparsers(dest="subcommand", required=True)
    analyze = section_sub.add_parser(
        "analyze", help="stationary distribution and performance of one section"
    )
    analyze.add_argument("--config", required=True, help="JSON run configuration")
    analyze.set_defaults(handler=cmd_section_analyze)

    tandem = commands.add_parser("tandem", help="two sections in tandem")
    tandem_sub = tandem.add_subparsers(dest="subcommand", required=True)
    solve = tandem_sub.add_parser("solve", help="solve the tandem at one arrival rate")
    solve.add_argument("--config", required=True, help="JSON run configuration")
    solve.set_defaults(handler=cmd_tandem_solve)
    sweep = tandem_sub.add_parser("sweep", help="solve the tandem across a rate range")
    sweep.add_argument("--config", required=True, help="JSON run configuration")
    sweep.set_defaults(handler=cmd_tandem_sweep)

    oracle = commands.add_parser("oracle", help="exact joint-chain comparison")
    oracle_sub = oracle.add_subparsers(dest="subcommand", required=True)
    compare = oracle_sub.add_parser(
        "compare", help="measure the decomposition against the exact joint chain"
    )
    compare.add_argument("--config", required=True, help="JSON run configuration")
    compare.set_defaults(handler=cmd_oracle_compare)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as err:
        print(f"non-convergence: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except DomainError as err:
        print(f"domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN


def console_main() -> int:
    return main(sys.argv[1:])
