"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import fuzzyalg
from .fqm import sg_apparatus_weight, sg_operators
from .measurement import SetupError
from .scenario import ScenarioError, emit_report, parse_scenario, run_scenario

FORMAT_ENV = "FUZZYQM_FORMAT"
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class InputError(Exception):
    pass


def _default_format() -> str:
    fmt = os.environ.get(FORMAT_ENV, "json")
    return fmt if fmt in ("json", "csv") else "json"


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _run_one(path: Path, args) -> str:
    try:
        scenario = parse_scenario(_read(path))
    except ScenarioError as exc:
        raise InputError(f"{path}: {exc}") from None
    report = run_scenario(scenario, shots=args.shots, seed=args.seed)
    return emit_report(report, args.format)


def cmd_run(args) -> None:
    if args.shots is not None and args.shots < 0:
        raise InputError("--shots must be >= 0")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise InputError("--seed must be an unsigned 64-bit integer")
    paths = [Path(p) for p in args.files]
    if len(paths) == 1:
        _write(_run_one(paths[0], args), args.out)
        return
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        outputs = list(pool.map(lambda p: _run_one(p, args), paths))
    if args.out is None:
        sys.stdout.write("\n".join(outputs))
        return
    args.out.mkdir(parents=True, exist_ok=True)
    for path, text in zip(paths, outputs):
        (args.out / f"{path.stem}.{args.format}").write_text(text)


def _load_matrix(path: str) -> fuzzyalg.FuzzyMatrix:
    try:
        return fuzzyalg.parse_matrix(_read(Path(path)))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_fuzzy_mul(args) -> None:
    a, b = _load_matrix(args.a), _load_matrix(args.b)
    if a.cols != b.rows:
        raise InputError(f"shape mismatch: {a.shape} @ {b.shape}")
    _write(fuzzyalg.format_matrix(fuzzyalg.fmat_mul(a, b)), args.out)


def cmd_fuzzy_basis(args) -> None:
    a, c = _load_matrix(args.a), _load_matrix(args.c)
    try:
        metric = fuzzyalg.MetricMatrix(a.entries)
        result = fuzzyalg.change_of_basis(metric, c)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(fuzzyalg.format_matrix(result), args.out)


def cmd_sg(args) -> None:
    if not 0.0 <= args.theta <= 90.0:
        raise InputError(f"--theta must lie in [0, 90] degrees, got {args.theta}")
    theta = math.radians(args.theta)
    ops = sg_operators(theta, args.convention)
    step_one = sg_operators(0.0, args.convention)
    payload = {
        "theta_deg": args.theta,
        "convention": args.convention,
        "apparatus_weight": sg_apparatus_weight(theta, args.convention),
        "M_S": step_one["system"].matrix().tolist(),
        "M_A_first": step_one["apparatus"].matrix().tolist(),
        "M_A_second": ops["apparatus"].matrix().tolist(),
    }
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        lines = []
        for key in ("M_S", "M_A_first", "M_A_second"):
            lines.append(f"# {key}")
            lines += [",".join(repr(v) for v in row) for row in payload[key]]
        text = "\n".join(lines) + "\n"
    _write(text, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzyqm", description="Fuzzy quantum measurement simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default=_default_format())
    common.add_argument("--out", type=Path, default=None, help="output path (directory for batch runs)")

    run = sub.add_parser("run", parents=[common], help="run one or more scenario files")
    run.add_argument("files", nargs="+")
    run.add_argument("--shots", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--jobs", type=int, default=None, help="worker threads for batch runs")
    run.set_defaults(func=cmd_run)

    mul = sub.add_parser("fuzzy-mul", parents=[common], help="max-min product of two matrix files")
    mul.add_argument("a")
    mul.add_argument("b")
    mul.set_defaults(func=cmd_fuzzy_mul)

    basis = sub.add_parser("fuzzy-basis", parents=[common], help="metric matrix C^T A C under a basis change")
    basis.add_argument("a")
    basis.add_argument("c")
    basis.set_defaults(func=cmd_fuzzy_basis)

    sg = sub.add_parser("sg", parents=[common], help="print Stern-Gerlach FQM operator matrices")
    sg.add_argument("--theta", type=float, required=True, help="angle between Z and Z' in degrees")
    sg.add_argument("--convention", choices=["cos2", "cos"], default="cos2")
    sg.set_defaults(func=cmd_sg)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InputError, ScenarioError, SetupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
