"""Command-line interface: ``colldeph <command> [flags]``.

Exit codes: 0 success, 2 input error, 3 invariant violation, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .correlations import concurrence_wootters, diagnostics
from .dephasing import FrequencyDistribution, FieldDirection, transient_map
from .fano import FanoForm, correlation_rank, fano_reconstruct, generalized_beta
from .oracle import QuadratureSettings, case_matrix, compare_case
from .qcore import InvalidStateError, density_from_json, num_qubits_of, purity, validate_density
from .synthesis import TARGETS, SynthesisError, SynthesisVerificationError, synthesize_werner
from .tetrahedron import (
    BellDiagonalCoords,
    NotBellDiagonalError,
    corner_classify,
    coords_from_state,
    direction_scan,
    is_separable,
    state_from_coords,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_VERIFY = 4

TRACE_BETA_TOL = 1e-9
PURITY_SLACK = 1e-12
SYNTH_RESIDUAL_TOL = 1e-8


class InputError(Exception):
    pass


class InvariantViolation(Exception):
    pass


class VerificationFailure(Exception):
    pass


def fmt(x) -> str:
    """Shortest decimal string that round-trips the float."""
    return repr(float(x))


# input parsing


def _load_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from exc


def load_state(path) -> np.ndarray:
    """Density matrix from ``{"n","re","im"}``, a Fano form ``{"rA","rB","beta"}`` or ``{"coords": [d1,d2,d3]}``."""
    if path is None:
        raise InputError("missing required flag --state")
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    try:
        if "coords" in obj:
            return state_from_coords(BellDiagonalCoords(obj["coords"]).d)
        if "beta" in obj:
            return fano_reconstruct(FanoForm.from_json(obj))
        rho = density_from_json(obj)
    except InvalidStateError as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    try:
        validate_density(rho)
    except InvalidStateError as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc
    return rho


def _floats(value, name: str, length: int | None = None) -> list[float]:
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [value]
    try:
        out = [float(p) for p in parts]
    except (TypeError, ValueError) as exc:
        raise InputError(f"--{name}: expected comma-separated numbers, got {value!r}") from exc
    if not all(math.isfinite(x) for x in out):
        raise InputError(f"--{name}: values must be finite")
    if length is not None and len(out) != length:
        raise InputError(f"--{name}: expected {length} numbers, got {len(out)}")
    return out


def parse_direction(value) -> FieldDirection:
    if value is None:
        raise InputError("missing required flag --direction")
    try:
        return FieldDirection(_floats(value, "direction", 3))
    except ValueError as exc:
        raise InputError(f"--direction: {exc}") from exc


def parse_distribution(args) -> FrequencyDistribution:
    try:
        return FrequencyDistribution(args.dist, float(args.omega0), float(args.width))
    except (TypeError, ValueError) as exc:
        raise InputError(f"--dist/--omega0/--width: {exc}") from exc


def parse_times(args) -> list[float]:
    if args.times is not None:
        times = _floats(args.times, "times")
    else:
        if args.steps < 1 or args.t_max < 0:
            raise InputError("--steps must be >= 1 and --t-max >= 0")
        times = np.linspace(0.0, args.t_max, args.steps + 1).tolist()
    if any(t < 0 for t in times):
        raise InputError("--times: times must be non-negative")
    return times


def _positive_int(value, name: str, minimum: int = 1) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"--{name}: expected an integer, got {value!r}") from exc
    if v < minimum or v != float(value):
        raise InputError(f"--{name}: must be an integer >= {minimum}, got {value!r}")
    return v


def _workers(value) -> int:
    if value is None:
        return os.cpu_count() or 1
    return _positive_int(value, "workers")


# output


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# commands


def cmd_evolve(args) -> int:
    rho0 = load_state(args.state)
    n = parse_direction(args.direction)
    dist = parse_distribution(args)
    times = parse_times(args)
    two = num_qubits_of(rho0) == 2
    tr_beta0 = float(np.trace(generalized_beta(rho0)))
    p0 = purity(rho0)
    header = ["t", "purity", "trace_beta", "concurrence", "rank", "d1", "d2", "d3"]
    rows = []
    for t in times:
        rho = transient_map(rho0, n, dist, t)
        try:
            validate_density(rho)
        except InvalidStateError as exc:
            raise InvariantViolation(f"t = {t}: {exc}") from exc
        tr_beta = float(np.trace(generalized_beta(rho)))
        if abs(tr_beta - tr_beta0) > TRACE_BETA_TOL:
            raise InvariantViolation(f"t = {t}: trace of beta drifted by {tr_beta - tr_beta0:.3e}")
        pur = purity(rho)
        if pur > p0 + PURITY_SLACK:
            raise InvariantViolation(f"t = {t}: purity increased by {pur - p0:.3e}")
        row = [fmt(t), fmt(pur), fmt(tr_beta)]
        if two:
            row += [fmt(concurrence_wootters(rho)), str(correlation_rank(rho))]
            try:
                row += [fmt(x) for x in coords_from_state(rho).d]
            except NotBellDiagonalError:
                row += ["", "", ""]
        else:
            row += ["", "", "", "", ""]
        rows.append(row)
    _emit(_csv_text(header, rows), args.out)
    return EXIT_OK


def _bell_diagonal_input(path) -> np.ndarray:
    rho = load_state(path)
    if num_qubits_of(rho) != 2:
        raise InputError(f"{path}: expected a two-qubit state")
    try:
        return coords_from_state(rho).d
    except NotBellDiagonalError as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_scan(args) -> int:
    d = _bell_diagonal_input(args.state)
    res = _positive_int(args.grid_resolution, "grid-resolution")
    rows = direction_scan(d, res, workers=_workers(args.workers))
    header = ["index", "nx", "ny", "nz", "lambda1", "lambda2", "final_rank", "final_concurrence", "preserved"]
    body = [
        [str(i), *(fmt(x) for x in r.n), fmt(r.lambda1), fmt(r.lambda2), str(r.final_rank),
         fmt(r.final_concurrence), "true" if r.preserved else "false"]
        for i, r in enumerate(rows)
    ]
    _emit(_csv_text(header, body), args.out)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    if args.target not in TARGETS:
        raise InputError(f"--target must be one of {sorted(TARGETS)}, got {args.target!r}")
    if args.s is None:
        raise InputError("missing required flag --s")
    s = _floats(args.s, "s", 1)[0]
    if not 0 < s <= 1 / 3:
        raise InputError(f"--s = {s} is out of range (0, 1/3]: separable inputs cannot reach s > 1/3")
    d = None if args.d is None else _floats(args.d, "d", 1)[0]
    try:
        recipe = synthesize_werner(s, args.target, d=d)
    except SynthesisVerificationError as exc:
        raise VerificationFailure(str(exc)) from exc
    except SynthesisError as exc:
        raise InputError(str(exc)) from exc
    report = recipe.to_json()
    report["passed"] = recipe.residual <= SYNTH_RESIDUAL_TOL
    _emit(_json_text(report), args.out)
    if not report["passed"]:
        raise VerificationFailure(f"end-to-end residual {recipe.residual:.3e} exceeds {SYNTH_RESIDUAL_TOL:.0e}")
    return EXIT_OK


def _sign_fault(rho0, n, dist, t):
    # self-test hook: flips the precession sense, which a working checker must catch
    flipped = FrequencyDistribution(dist.kind, -dist.omega0, dist.width)
    return transient_map(rho0, n, flipped, t)


def cmd_verify(args) -> int:
    count = _positive_int(args.cases, "cases")
    samples = _positive_int(args.samples, "samples", 100)
    seed = _positive_int(args.seed, "seed", 0)
    q = QuadratureSettings(node_count=_positive_int(args.node_count, "node-count", 8))
    analytic = _sign_fault if args.inject_fault else None
    header = ["case", "num_qubits", "kind", "omega0", "width", "t", "nx", "ny", "nz",
              "dev_quadrature", "trace_drift", "dev_monte_carlo", "mc_std_error", "mc_samples", "status"]
    rows, failures = [], 0
    for case in case_matrix(count, seed):
        r = compare_case(case, samples, seed, q, analytic=analytic)
        failures += not r.passed
        rows.append([
            str(case.index), str(case.num_qubits), case.dist.kind, fmt(case.dist.omega0), fmt(case.dist.width),
            fmt(case.t), *(fmt(x) for x in case.n), fmt(r.dev_quadrature), fmt(r.trace_drift),
            fmt(r.dev_monte_carlo), fmt(r.mc_std_error), str(r.mc_samples), "pass" if r.passed else "FAIL",
        ])
    _emit(_csv_text(header, rows), args.out)
    if failures:
        raise VerificationFailure(f"{failures} of {count} cases exceed the analytic-vs-quadrature tolerance")
    return EXIT_OK


def cmd_rank(args) -> int:
    rho = load_state(args.state)
    if num_qubits_of(rho) != 2:
        raise InputError(f"{args.state}: expected a two-qubit state")
    _emit(_json_text(diagnostics(rho, side=args.side)), args.out)
    return EXIT_OK


def cmd_coords(args) -> int:
    d = _bell_diagonal_input(args.state)
    coords = BellDiagonalCoords(d)
    report = {
        "coords": d.tolist(),
        "probabilities": coords.probabilities.tolist(),
        "corner": corner_classify(d).value,
        "separable": is_separable(d),
    }
    _emit(_json_text(report), args.out)
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colldeph", description="Collective dephasing of qubit registers.")
    parser.add_argument("--config", help="JSON file whose keys mirror the long flags of the command")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--config", help=argparse.SUPPRESS, dest="sub_config")
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = add("evolve", cmd_evolve, "trajectory of a state under collective dephasing (CSV)")
    p.add_argument("--state", help="state JSON file")
    p.add_argument("--direction", help="field direction x,y,z")
    p.add_argument("--dist", default="gaussian", help="gaussian, lorentzian or uniform")
    p.add_argument("--omega0", default=0.0, type=float)
    p.add_argument("--width", default=1.0, type=float, help="sigma, gamma or half width")
    p.add_argument("--times", help="comma-separated times; overrides --t-max/--steps")
    p.add_argument("--t-max", default=5.0, type=float)
    p.add_argument("--steps", default=20, type=int)

    p = add("scan", cmd_scan, "asymptotic outcome over a sphere of field directions (CSV)")
    p.add_argument("--state", help="Bell-diagonal state JSON file")
    p.add_argument("--grid-resolution", default=256, type=int)
    p.add_argument("--workers", type=int, help="worker threads (default: CPU count)")

    p = add("synthesize", cmd_synthesize, "recipe for a Werner-like state (JSON)")
    p.add_argument("--target", default="psi-", help=f"one of {', '.join(TARGETS)}")
    p.add_argument("--s", type=float, help="singlet weight in (0, 1/3]")
    p.add_argument("--d", type=float, help="override the rank-2 input strength")

    p = add("verify", cmd_verify, "analytic vs quadrature vs Monte Carlo comparison (CSV)")
    p.add_argument("--cases", default=100, type=int)
    p.add_argument("--samples", default=4096, type=int)
    p.add_argument("--seed", default=0, type=int)
    p.add_argument("--node-count", default=32, type=int)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    p = add("rank", cmd_rank, "correlation rank and discord report (JSON)")
    p.add_argument("--state", help="two-qubit state JSON file")
    p.add_argument("--side", default="A", choices=["A", "B"])

    p = add("coords", cmd_coords, "tetrahedron point of a Bell-diagonal state (JSON)")
    p.add_argument("--state", help="Bell-diagonal state JSON file")
    parser._subparsers_map = sub.choices
    return parser


def _apply_config(parser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    path = args.config or getattr(args, "sub_config", None)
    if not path or args.command is None:
        return args
    cfg = _load_json(path)
    if not isinstance(cfg, dict):
        raise InputError(f"{path}: config must be a JSON object")
    sp = parser._subparsers_map[args.command]
    known = {a.dest for a in sp._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in known or dest in ("help", "sub_config"):
            raise InputError(f"{path}: unknown key {key!r} for command {args.command!r}")
        defaults[dest] = value
    # explicit flags still win over the file
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except InvalidStateError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
