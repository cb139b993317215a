"""Command line interface.

Subcommands: ``synth`` (sample a model onto a grid), ``estimate`` (recover a
model from a sample file), ``experiment`` (run a spec or bundled scenario)
and ``domain-info`` (inspect grids).  Exit codes: 0 success, 1 runtime
failure, 2 invalid input or usage.

Grid arguments use a compact grammar::

    box:N1,...,Nd[@o1,...,od]   full box, optional offset (default 0)
    triangle:L                  i, j >= 1 with i + j <= L + 1
    half_disc:R                 i^2 + j^2 <= R^2 with j >= 0
    mask:points.json            explicit point list from a JSON file
    path.json                   any grid descriptor stored as JSON

Seeds are taken from flags only; the environment is never consulted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness, serialize
from .domains import check_convex_fibers, erode, fibers, minkowski_sum
from .errors import (
    CapacityError,
    CoverageError,
    DomainError,
    GenerationError,
    ModelOrderError,
    NonFiniteError,
    PairingError,
    RankDeficiencyError,
)
from .esprit import EspritOptions, esprit_nd
from .hankel import capacity
from .signal import add_noise, eval_model, random_model

USAGE_ERROR = 2
RUNTIME_ERROR = 1

_INPUT_ERRORS = (
    DomainError,
    CoverageError,
    CapacityError,
    ModelOrderError,
    NonFiniteError,
)
_RUNTIME_ERRORS = (
    PairingError,
    RankDeficiencyError,
    GenerationError,
    np.linalg.LinAlgError,
    OSError,
)


def parse_grid_arg(text: str) -> dict:
    """Turn a grid argument into a JSON-style grid descriptor."""
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid inline JSON grid spec: {exc}") from exc
    if text.endswith(".json") and not text.startswith("mask:"):
        data = serialize.load_json(text)
        if isinstance(data, list):
            return {"kind": "mask", "points": data}
        return data
    kind, sep, rest = text.partition(":")
    if not sep:
        raise DomainError(f"malformed grid spec {text!r}; expected kind:parameters")
    if kind == "box":
        widths_part, at, offset_part = rest.partition("@")
        try:
            widths = [int(w) for w in widths_part.split(",")]
            offset = [int(o) for o in offset_part.split(",")] if at else None
        except ValueError as exc:
            raise DomainError(f"malformed box spec {text!r}: {exc}") from exc
        spec = {"kind": "box", "widths": widths}
        if offset is not None:
            spec["offset"] = offset
        return spec
    if kind == "triangle":
        try:
            return {"kind": "triangle", "side": int(rest)}
        except ValueError as exc:
            raise DomainError(f"malformed triangle spec {text!r}: {exc}") from exc
    if kind == "half_disc":
        try:
            return {"kind": "half_disc", "radius": float(rest)}
        except ValueError as exc:
            raise DomainError(f"malformed half_disc spec {text!r}: {exc}") from exc
    if kind == "mask":
        data = serialize.load_json(rest)
        if isinstance(data, list):
            return {"kind": "mask", "points": data}
        return data
    raise DomainError(f"unknown grid kind {kind!r} in {text!r}")


def _sidecar_path(out: Path) -> Path:
    return out.with_name(out.stem + ".model.json")


def cmd_synth(args: argparse.Namespace) -> int:
    omega_spec = parse_grid_arg(args.grid)
    omega = serialize.grid_from_spec(omega_spec)
    if args.model is not None:
        if args.layout is not None or args.order is not None:
            raise DomainError("give either --model or --layout/--order, not both")
        model = serialize.model_from_dict(serialize.load_json(args.model))
    else:
        if args.order is None:
            raise DomainError("--order is required when no --model file is given")
        layout = args.layout if args.layout is not None else "uniform_imag"
        rng = np.random.default_rng((args.seed, 0))
        model = random_model(
            args.order, omega.dim, rng, layout=layout, damping_bound=args.damping_bound
        )
    clean = eval_model(model, omega)
    noisy = add_noise(clean, args.noise, np.random.default_rng((args.seed, 1)))

    out = Path(args.out)
    serialize.dump_json(serialize.samples_to_dict(noisy, omega_spec), out)
    sidecar = _sidecar_path(out)
    serialize.dump_json(serialize.model_to_dict(model), sidecar)
    print(f"wrote {len(omega)} samples to {out}")
    print(f"wrote ground-truth model to {sidecar}")
    if args.noise > 0:
        achieved = float(np.linalg.norm(noisy.values - clean.values) / clean.norm())
        print(f"achieved noise ratio = {achieved:.6e}")
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    f = serialize.samples_from_dict(serialize.load_json(args.samples))
    xi = serialize.grid_from_spec(parse_grid_arg(args.xi))
    if args.erode:
        if args.upsilon is not None:
            raise DomainError("give either --upsilon or --erode, not both")
        upsilon = erode(f.domain, xi)
        covered = minkowski_sum(xi, upsilon)
        unused = len(f.domain) - len(covered)
        if unused > 0:
            print(
                f"warning: {unused} of {len(f.domain)} samples lie outside the grid sums "
                "and are only used for coefficient recovery",
                file=sys.stderr,
            )
    elif args.upsilon is not None:
        upsilon = serialize.grid_from_spec(parse_grid_arg(args.upsilon))
    else:
        raise DomainError("one of --upsilon or --erode is required")

    if args.auto is None and args.order is None:
        raise DomainError("one of --order or --auto is required")
    if args.auto is not None and args.order is not None:
        raise DomainError("give either --order or --auto, not both")
    options = EspritOptions(
        model_order=args.order,
        auto_rel_tol=args.auto if args.auto is not None else EspritOptions().auto_rel_tol,
        combo_seed=args.seed,
    )
    report = esprit_nd(f, xi, upsilon, options)

    K = report.model.order
    s = report.singular_values
    gap = float(s[K - 1] / s[K]) if K < len(s) and s[K] > 0 else float("inf")
    print(f"model order K = {K}")
    print(f"singular value gap sigma_{K}/sigma_{K + 1} = {gap:.6e}")
    print(f"max pairing residual = {float(np.max(report.pairing_residuals)):.6e}")
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)
    if args.out is not None:
        serialize.dump_json(serialize.report_to_dict(report), Path(args.out))
        print(f"wrote report to {args.out}")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    if (args.spec is None) == (args.scenario is None):
        raise DomainError("give exactly one of a spec file or --scenario")
    if args.scenario is not None:
        spec = harness.bundled_spec(args.scenario, output=args.out)
    else:
        spec = harness.spec_from_dict(serialize.load_json(args.spec))
    if args.out is not None and spec.output != args.out:
        data = harness.spec_to_dict(spec)
        data["output"] = args.out
        spec = harness.spec_from_dict(data)
    if spec.output is None:
        data = harness.spec_to_dict(spec)
        data["output"] = "."
        spec = harness.spec_from_dict(data)

    results = harness.run_experiment(spec, jobs=args.jobs)
    failures = sum(1 for r in results if r.failed)
    ok = [r for r in results if not r.failed]
    print(f"{spec.name}: {len(results)} runs, {failures} failed")
    if ok:
        worst = max(float(np.max(r.lambda_errors)) for r in ok)
        print(f"max matched node error over successful runs = {worst:.6e}")
    print(f"results written to {Path(spec.output) / (spec.name + '.csv')}")
    return 0


def cmd_domain_info(args: argparse.Namespace) -> int:
    grids = []
    for label, text in zip(("xi", "upsilon"), args.grids):
        grid = serialize.grid_from_spec(parse_grid_arg(text))
        grids.append(grid)
        print(f"{label}: {text}")
        print(f"  points = {len(grid)}")
        convex = check_convex_fibers(grid)
        print(f"  convex fibers = {'yes' if convex else 'no'}")
        if convex:
            print(f"  capacity = {capacity(grid)}")
        else:
            for p in range(1, grid.dim + 1):
                for frozen, members in fibers(grid, p).fibers:
                    if len(members) < 2:
                        print(f"  warning: singleton fiber {frozen} along dimension {p}")
            print("  capacity = n/a (degenerate fibers)")
    if len(grids) == 2:
        both = minkowski_sum(grids[0], grids[1])
        print(f"xi + upsilon: points = {len(both)}")
    return 0


_GRID_HELP = """\
grid grammar:
  box:N1,...,Nd[@o1,...,od]   full box, optional offset (default 0)
  triangle:L                  i, j >= 1 with i + j <= L + 1
  half_disc:R                 i^2 + j^2 <= R^2 with j >= 0
  mask:points.json            explicit point list from a JSON file
  path.json                   any grid descriptor stored as JSON
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdesprit",
        description="Frequency recovery of exponential sums sampled on integer lattices.",
        epilog=_GRID_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="sample a model onto a grid")
    p_synth.add_argument("--grid", required=True, help="sampling domain")
    p_synth.add_argument("--model", help="model JSON file to evaluate")
    p_synth.add_argument("--layout", choices=("uniform_imag", "spiral", "random_complex"))
    p_synth.add_argument("--order", "-K", type=int, help="number of random terms")
    p_synth.add_argument("--damping-bound", type=float, default=0.0)
    p_synth.add_argument("--noise", type=float, default=0.0, help="noise-to-signal ratio")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="sample file to write")
    p_synth.set_defaults(func=cmd_synth)

    p_est = sub.add_parser("estimate", help="recover a model from a sample file")
    p_est.add_argument("samples", help="sample JSON file")
    p_est.add_argument("--xi", required=True, help="row grid")
    p_est.add_argument("--upsilon", help="column grid")
    p_est.add_argument(
        "--erode",
        action="store_true",
        help="derive the column grid by eroding the sample domain by --xi",
    )
    p_est.add_argument("--order", "-K", type=int, help="fixed model order")
    p_est.add_argument(
        "--auto",
        type=float,
        nargs="?",
        const=1e-2,
        help="pick the order from the singular values (optional relative cutoff, default 1e-2)",
    )
    p_est.add_argument("--seed", type=int, default=0, help="seed for the pairing combination")
    p_est.add_argument("--out", help="report JSON file to write")
    p_est.set_defaults(func=cmd_estimate)

    p_exp = sub.add_parser("experiment", help="run an experiment spec")
    p_exp.add_argument("spec", nargs="?", help="experiment spec JSON file")
    p_exp.add_argument(
        "--scenario",
        choices=harness.bundled_scenarios(),
        help="run a bundled scenario instead of a spec file",
    )
    p_exp.add_argument("--out", help="output directory (default: current directory)")
    p_exp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_exp.set_defaults(func=cmd_experiment)

    p_info = sub.add_parser("domain-info", help="inspect one or two grids")
    p_info.add_argument("grids", nargs="+", help="one or two grid specs")
    p_info.set_defaults(func=cmd_domain_info)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "domain-info" and len(args.grids) > 2:
        print("domain-info takes at most two grids", file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
