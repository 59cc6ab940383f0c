"""Command-line entry point: ``bhescape --experiment fidelity --dim 64 ...``.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage error, 3 I/O error.
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

from . import experiments
from .experiments import ConfigError, ExperimentConfig

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

_TRIAL_HELP = ", ".join(f"{k}={v}" for k, v in experiments.DEFAULT_TRIALS.items())


def build_parser():
    p = argparse.ArgumentParser(
        prog="bhescape",
        description="Monte Carlo checks of information escape under final-state projection.")
    p.add_argument("--experiment", required=True, choices=experiments.EXPERIMENTS)
    size = p.add_mutually_exclusive_group()
    size.add_argument("--dim", type=int, help="Hilbert-space dimension N of matter (and of in/out radiation)")
    size.add_argument("--qubits", type=int, help="qubits per side, N = 2**qubits")
    p.add_argument("--trials", type=int,
                   help=f"number of Monte Carlo trials (defaults: {_TRIAL_HELP})")
    p.add_argument("--seed", type=int, default=0, help="master seed, unsigned 64-bit")
    p.add_argument("--final-state", default="haar", choices=experiments.FINAL_STATES)
    p.add_argument("--interaction", default="haar-state", choices=experiments.INTERACTIONS)
    p.add_argument("--depth", type=int, help="brickwork layers in circuit modes (default 4 x qubits)")
    p.add_argument("--inputs", type=int, default=32,
                   help="random inputs per channel for the exact-fidelity average")
    p.add_argument("--sigma", type=float, default=3.0, help="pass band in standard errors")
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--per-trial", action="store_true", help="include per-trial records")
    p.add_argument("--workers", type=int, default=None,
                   help="concurrent trial workers (default $FINALSTATE_WORKERS or 1)")
    return p


def parse_args(argv=None):
    """Returns (config, output options); usage problems exit with code 2."""
    parser = build_parser()
    args = parser.parse_args(argv)
    workers = args.workers
    if workers is None:
        env = os.environ.get("FINALSTATE_WORKERS", "1")
        try:
            workers = int(env)
        except ValueError:
            parser.error(f"FINALSTATE_WORKERS must be an integer, got {env!r}")
    cfg = ExperimentConfig(
        experiment=args.experiment, dim=args.dim, qubits=args.qubits, trials=args.trials,
        seed=args.seed, final_state=args.final_state, interaction=args.interaction,
        depth=args.depth, inputs=args.inputs, sigma=args.sigma, workers=workers)
    try:
        cfg = cfg.resolved()
    except ConfigError as e:
        parser.error(str(e))
    return cfg, {"format": args.format, "out": args.out, "per_trial": args.per_trial}


def _clean(x):
    """Make a value JSON-safe; non-finite floats become null."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def build_document(cfg, summary, per_trial=False, wall_seconds=None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "config": cfg.echo(),
        "passed": summary.passed,
        "summary": {k: m.to_dict() for k, m in summary.metrics.items()},
        "counts": summary.counts,
        "reference": summary.reference,
    }
    if per_trial:
        doc["per_trial"] = [r.to_dict() for r in summary.records]
    if wall_seconds is not None:
        doc["timing"] = {"wall_seconds": wall_seconds}
    return _clean(doc)


def render_json(doc) -> str:
    # repr-based floats: shortest string that round-trips the double exactly
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def render_csv(doc, records) -> str:
    rows = [r.to_dict() for r in records]
    header = []
    for row in rows:
        for k in row:
            if k not in header:
                header.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(row.get(k)) for k in header])
    trailer = ["#summary", f"passed={doc['passed']}"]
    for name, m in doc["summary"].items():
        trailer.append(
            f"{name}:mean={_csv_cell(m['mean'])};stderr={_csv_cell(m['stderr'])};"
            f"theory={_csv_cell(m['theory'])};pass={m['pass']}")
    w.writerow(trailer)
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(text: str, path=None):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    try:
        cfg, out = parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    t0 = time.perf_counter()
    try:
        summary = experiments.run_experiment(cfg)
    except (ConfigError, ValueError) as e:
        print(f"bhescape: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    wall = time.perf_counter() - t0
    doc = build_document(cfg, summary, out["per_trial"], wall)
    text = render_json(doc) if out["format"] == "json" else render_csv(doc, summary.records)
    try:
        emit(text, out["out"])
    except OSError as e:
        print(f"bhescape: cannot write output: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if summary.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
