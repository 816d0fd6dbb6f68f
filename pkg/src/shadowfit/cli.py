"""Command-line entry point: ``shadowfit simulate|fit|verify|ingest``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .data import read_table, table_to_csv
from .errors import ConfigError, DataError
from .fit import OptimizerConfig, fit_cs, fit_fcs
from .models import ProfileModel, parse_family
from .simulate import SimConfig, simulate
from .verify import SUITE, run_suite

logger = logging.getLogger("shadowfit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3

SIM_KEYS = {
    "seed",
    "xs",
    "x_min",
    "x_max",
    "n_x",
    "family",
    "theta_params",
    "phi_params",
    "shots_mode",
    "shots",
    "schedule",
    "rate",
    "frames",
    "exact_denominator",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def thread_count() -> int:
    raw = os.environ.get("SHADOWFIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"SHADOWFIT_THREADS must be an integer, got {raw!r}") from None


def _write_manifest(out: Path, command: str, args: dict, seed=None, inputs=(), outputs=()):
    manifest = {
        "command": command,
        "args": args,
        "seed": seed,
        "inputs": [str(p) for p in inputs],
        "outputs": sorted(str(p) for p in outputs),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_sim_config(path, seed_override=None) -> SimConfig:
    """Parse a flat JSON run configuration into a :class:`SimConfig`."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - SIM_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")

    seed = seed_override if seed_override is not None else raw.get("seed")
    if seed is None:
        raise ConfigError("seed required")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("key 'seed' must be an unsigned 64-bit integer")

    if "xs" in raw:
        xs = raw["xs"]
        if not isinstance(xs, list) or not xs:
            raise ConfigError("key 'xs' must be a nonempty list of numbers")
    else:
        for key in ("x_min", "x_max", "n_x"):
            if key not in raw:
                raise ConfigError(f"missing key {key!r} (or give 'xs')")
        if not isinstance(raw["n_x"], int) or raw["n_x"] < 1:
            raise ConfigError("key 'n_x' must be a positive integer")
        xs = np.linspace(float(raw["x_min"]), float(raw["x_max"]), raw["n_x"]).tolist()
    try:
        xs = [float(x) for x in xs]
    except (TypeError, ValueError):
        raise ConfigError("key 'xs' must contain numbers") from None

    for key in ("theta_params", "phi_params"):
        if key not in raw:
            raise ConfigError(f"missing key {key!r}")
        if not isinstance(raw[key], list) or not raw[key]:
            raise ConfigError(f"key {key!r} must be a nonempty list of coefficients")
    if "family" in raw:
        try:
            degree = parse_family(raw["family"])
        except ValueError as exc:
            raise ConfigError(f"key 'family': {exc}") from None
        if len(raw["theta_params"]) != degree + 1 or len(raw["phi_params"]) != degree + 1:
            raise ConfigError(f"key 'family': {raw['family']} needs {degree + 1} coefficients per angle")
    try:
        truth = ProfileModel(tuple(raw["theta_params"]), tuple(raw["phi_params"]), (min(xs), max(xs)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"keys 'theta_params'/'phi_params': {exc}") from None

    options = {k: raw[k] for k in ("shots_mode", "shots", "schedule", "rate", "frames", "exact_denominator") if k in raw}
    try:
        return SimConfig(truth, tuple(xs), seed=seed, **options)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_simulate(args) -> int:
    config = load_sim_config(args.config, args.seed)
    table = simulate(config, threads=thread_count())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "counts.csv").write_text(table_to_csv(table))
    (out / "simulation.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    _write_manifest(
        out,
        "simulate",
        {"config": str(args.config), "seed": args.seed},
        seed=config.seed,
        inputs=[args.config],
        outputs=["counts.csv", "simulation.json"],
    )
    logger.info("wrote %d x values to %s", len(table), out / "counts.csv")
    return EXIT_OK


def _reconstruction_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "theta", "phi", "phi_wrapped", "method", "loss"])
    for x, theta, phi, method, loss in rows:
        writer.writerow([repr(float(x)), repr(float(theta)), repr(float(phi)), repr(float(np.mod(phi, 2 * np.pi))), method, repr(float(loss))])
    return buf.getvalue()


def cmd_fit(args) -> int:
    table = read_table(args.table)
    out = Path(args.out)
    outputs = ["fit_report.json", "reconstruction.csv"]
    if args.method == "cs":
        report = fit_cs(table)
        rows = zip(report.xs, report.theta, report.phi, ["cs"] * len(report.xs), report.per_x_loss)
    else:
        degree = parse_family(args.family)
        optimizer = OptimizerConfig(restarts=args.restarts, seed=args.optimizer_seed, threads=thread_count())
        report = fit_fcs(table, degree, optimizer)
        model = report.profile
        grid = np.linspace(*model.x_domain, args.grid)
        theta, phi = model.angles(grid)
        rows = zip(grid, theta, phi, ["fcs"] * grid.size, [report.global_loss] * grid.size)
        outputs.append("model.json")
    out.mkdir(parents=True, exist_ok=True)
    (out / "reconstruction.csv").write_text(_reconstruction_csv(rows))
    (out / "fit_report.json").write_text(report.to_json() + "\n")
    if args.method == "fcs":
        (out / "model.json").write_text(json.dumps(report.model, indent=2) + "\n")
    _write_manifest(
        out,
        "fit",
        {
            "table": str(args.table),
            "method": args.method,
            "family": args.family,
            "grid": args.grid,
            "restarts": args.restarts,
            "optimizer_seed": args.optimizer_seed,
        },
        seed=args.optimizer_seed if args.method == "fcs" else None,
        inputs=[args.table],
        outputs=outputs,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    names = [s.strip() for s in args.suite.split(",") if s.strip()]
    if not names:
        raise ConfigError("empty suite selection")
    reports = run_suite(names, args.seed, threads=thread_count(), biased_loss=args.biased_loss, quick=args.quick)
    lines = [r.to_json() for r in reports]
    for line in lines:
        print(line)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verification.jsonl").write_text("\n".join(lines) + "\n")
        _write_manifest(
            out,
            "verify",
            {"suite": names, "quick": args.quick},
            seed=args.seed,
            outputs=["verification.jsonl"],
        )
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_ingest(args) -> int:
    column_map = {"x": args.x_col, "projector": args.projector_col, "count": args.count_col}
    table = read_table(args.input, column_map)
    empty = int((~table.occupied).sum())
    if empty:
        print(f"warning: {empty} x value(s) with zero counts", file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "counts.csv").write_text(table_to_csv(table))
    _write_manifest(out, "ingest", {"input": str(args.input), **column_map}, inputs=[args.input], outputs=["counts.csv"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shadowfit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a count table from a JSON config")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="reconstruct angle profiles from a count table")
    p.add_argument("table", type=Path)
    p.add_argument("--method", choices=("cs", "fcs"), default="fcs")
    p.add_argument("--family", default="affine", help="constant, affine or poly:K")
    p.add_argument("--grid", type=int, default=200, help="rows of the FCS reconstruction grid")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--optimizer-seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run the Monte Carlo verification suite")
    p.add_argument("--suite", default=",".join(SUITE), help=f"comma-separated subset of {','.join(SUITE)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true", help="quarter-size replicate counts")
    p.add_argument("--out", type=Path)
    p.add_argument("--biased-loss", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ingest", help="normalize an experimental count CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--x-col", default="x")
    p.add_argument("--projector-col", default="projector")
    p.add_argument("--count-col", default="count")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "grid", 1) < 1:
        parser.error("--grid must be positive")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
