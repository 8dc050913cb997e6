"""Command-line front end.

Every subcommand writes a table (CSV by default, or JSON with one array per
column) to ``--output`` or stdout.  Numbers are printed with 17 significant
digits so reruns are byte-identical.

Exit codes: 0 success, 1 invalid arguments, 2 numerical failure,
3 ``compare`` deviation above threshold.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import action_field, least_action, propagator, reference, tunneling_time
from .core import (
    Grid1D,
    PhysicsParams,
    SmoothPotential,
    as_smooth,
    free_potential,
    harmonic_potential,
    linear_potential,
    load_potential,
)
from .errors import ComputationError, PotentialError

COMPARE_THRESHOLD = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def render(columns: dict, fmt_name: str) -> str:
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float).ravel() for n in names]
    if fmt_name == "json":
        body = ", ".join(f'"{n}": [' + ", ".join(fmt(v) for v in arr) + "]" for n, arr in zip(names, arrays))
        return "{" + body + "}\n"
    lines = [",".join(names)]
    lines.extend(",".join(fmt(v) for v in row) for row in zip(*arrays))
    return "\n".join(lines) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _positive(text: str) -> float:
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _grid(text: str) -> Grid1D:
    try:
        lo, hi, n = text.split(",")
        return Grid1D(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--grid expects XMIN,XMAX,NP: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hbar", type=_positive, default=1.0)
    common.add_argument("--mass", type=_positive, default=1.0)
    common.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = _Parser(prog="qevolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("propagate", parents=[common], help="time-sliced kernel K(x, x0)")
    p.add_argument("--potential", required=True)
    p.add_argument("--t", type=_positive, required=True)
    p.add_argument("--slices", type=_count, required=True)
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--mode", choices=("real", "imag"), default="real")
    p.add_argument("--margin", type=float, default=None, help="absorbing margin (real time)")
    p.add_argument("--x0", type=float, default=None, help="write only the column nearest x0")

    p = sub.add_parser("path", parents=[common], help="stationary-action path")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--x1", type=float, required=True)
    p.add_argument("--t", type=_positive, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--potential", default=None, help="piecewise potential file (zero force inside regions)")
    p.add_argument("--omega", type=float, default=0.0, help="add m omega^2 x^2 / 2")
    p.add_argument("--force", type=float, default=0.0, help="add g x")

    p = sub.add_parser("wavefunction", parents=[common], help="stationary scattering state")
    p.add_argument("--potential", required=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--xmin", type=float, default=None)
    p.add_argument("--xmax", type=float, default=None)
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--tau", type=float, default=0.0)

    p = sub.add_parser("scan", parents=[common], help="transmission and reflection versus energy")
    p.add_argument("--potential", required=True)
    p.add_argument("--emin", type=float, required=True)
    p.add_argument("--emax", type=float, required=True)
    p.add_argument("--steps", type=_count, required=True)

    p = sub.add_parser("hartman", parents=[common], help="phase time versus barrier width")
    p.add_argument("--v0", type=_positive, required=True)
    p.add_argument("--energy", type=_positive, required=True)
    p.add_argument("--wmin", type=float, required=True)
    p.add_argument("--wmax", type=float, required=True)
    p.add_argument("--steps", type=_count, required=True)

    p = sub.add_parser("compare", parents=[common], help="action-field state versus Schrödinger reference")
    p.add_argument("--potential", required=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--points", type=int, default=401)
    return parser


def _path_potential(args, params: PhysicsParams) -> SmoothPotential:
    parts = [as_smooth(load_potential(args.potential) if args.potential else free_potential())]
    if args.omega:
        parts.append(harmonic_potential(args.omega, params.mass))
    if args.force:
        parts.append(linear_potential(args.force))
    return SmoothPotential(
        value=lambda x: sum(p.value(x) for p in parts),
        gradient=lambda x: sum(p.gradient(x) for p in parts),
        curvature=lambda x: sum(p.second_derivative(x) for p in parts),
    )


def _linspace(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def _cmd_propagate(args, params):
    pot = load_potential(args.potential)
    cfg = propagator.PropagatorConfig(args.slices, args.t, propagator.Mode.parse(args.mode))
    k = propagator.timeslice_propagator(params, pot, args.grid, cfg, args.margin)
    x = args.grid.points
    if args.x0 is not None:
        j = int(np.argmin(np.abs(x - args.x0)))
        col = k.entries[:, j]
        return {"x": x, "x0": np.full(x.size, x[j]), "re": col.real, "im": col.imag}
    xx, xx0 = np.meshgrid(x, x, indexing="ij")
    return {"x": xx, "x0": xx0, "re": k.entries.real, "im": k.entries.imag}


def _cmd_path(args, params):
    if args.steps < 2:
        raise UsageError("path: --steps must be >= 2")
    path = least_action.solve_classical_path(params, _path_potential(args, params), args.x0, args.x1, args.t, args.steps)
    return {"tau": path.times, "x": path.positions}


def _cmd_wavefunction(args, params):
    pot = load_potential(args.potential)
    sol = action_field.build_wavefunction(params, pot, args.energy)
    xs = reference.sample_points(pot, args.points)
    lo = xs[0] if args.xmin is None else args.xmin
    hi = xs[-1] if args.xmax is None else args.xmax
    if not lo < hi or args.points < 2:
        raise UsageError("wavefunction: need xmin < xmax and at least 2 points")
    xs = np.linspace(lo, hi, args.points)
    psi = action_field.evaluate_psi(sol, xs, args.tau)
    return {"x": xs, "re_psi": psi.real, "im_psi": psi.imag, "abs2": np.abs(psi) ** 2, "phase": np.angle(psi)}


def _cmd_scan(args, params):
    pot = load_potential(args.potential)
    es = _linspace(args.emin, args.emax, args.steps)
    t, r = action_field.transmission_scan(params, pot, es)
    return {"E": es, "T": t, "R": r}


def _cmd_hartman(args, params):
    widths = _linspace(args.wmin, args.wmax, args.steps)
    if widths[0] < 0:
        raise UsageError("hartman: widths must be non-negative")
    res = tunneling_time.hartman_scan(params, args.v0, args.energy, widths)
    return {"width": res.abscissa, "tau_phase": res.tau_phase, "t_prob": res.t_prob}


def _cmd_compare(args, params):
    pot = load_potential(args.potential)
    sol = action_field.build_wavefunction(params, pot, args.energy)
    ref = reference.reference_wavefunction(params, pot, args.energy)
    xs = reference.sample_points(pot, args.points)
    psi = action_field.evaluate_psi(sol, xs)
    psi_ref = action_field.evaluate_psi(ref, xs)
    rel = np.abs(psi - psi_ref) / np.abs(psi_ref)
    return {
        "x": xs,
        "re_action_field": psi.real,
        "im_action_field": psi.imag,
        "re_reference": psi_ref.real,
        "im_reference": psi_ref.imag,
        "rel_dev": rel,
    }


COMMANDS = {
    "propagate": _cmd_propagate,
    "path": _cmd_path,
    "wavefunction": _cmd_wavefunction,
    "scan": _cmd_scan,
    "hartman": _cmd_hartman,
    "compare": _cmd_compare,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        params = PhysicsParams(mass=args.mass, hbar=args.hbar)
        table = COMMANDS[args.command](args, params)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"{args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (PotentialError, OSError, ValueError, KeyError) as exc:
        print(f"qevolve: invalid input: {exc}", file=sys.stderr)
        return 1
    _write(render(table, args.format), args.output)
    if args.command == "compare":
        worst = float(np.max(table["rel_dev"]))
        print(f"max_relative_deviation {fmt(worst)}")
        return 0 if worst < COMPARE_THRESHOLD else 3
    return 0


def main() -> None:
    sys.exit(run())
