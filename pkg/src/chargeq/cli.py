"""Command-line front end.

Subcommands::

    zeros        classical polynomial zeros (the oracle)
    equilibrate  constrained energy minimization (intervals or a polyline)
    heine        Heine-Stieltjes solutions of a Lame system, optionally all
                 compositions
    measure      constrained equilibrium measure: support and density samples
    compare      KS distance between a zero file and a measure spec
    riccati      normalized logarithmic derivative, limiting Cauchy transform,
                 and the exact-identity residual

Numeric output uses 17 significant digits, so identical inputs give
byte-identical output.  Primary results go to standard output (or --output);
diagnostics go to standard error as a JSON block.  Exit codes: 0 success, 2
validation error, 3 numerical non-convergence (diagnostics still emitted).
Complex values are two CSV columns (re, im) or JSON objects {"re": ..,
"im": ..}.  The environment variable CHARGE_EQ_THREADS caps the internal
parallelism of ``heine --enumerate`` (default 1).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from contextlib import contextmanager

import numpy as np

from . import asymptotics, classical, lame
from .equilibrium import (
    ConvergenceError,
    IntervalConstraint,
    PolylineContinuum,
    minimize,
    minimize_on_continuum,
)
from .fields import ExternalField, hermite_field, jacobi_field, laguerre_field

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


@contextmanager
def _out_stream(path: str | None):
    if path:
        handle = open(path, "w", encoding="utf-8", newline="")
        try:
            yield handle
        finally:
            handle.close()
    else:
        yield sys.stdout


def _emit_diagnostics(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _family_from_args(args) -> classical.ClassicalFamily:
    if args.family == "jacobi":
        return classical.jacobi(args.alpha, args.beta)
    if args.family == "laguerre":
        return classical.laguerre(args.alpha)
    return classical.hermite()


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc


def _load_field(args) -> ExternalField:
    if getattr(args, "field_json", None):
        return ExternalField.from_dict(_load_json(args.field_json))
    if not args.family:
        raise ValueError("provide --family or --field-json")
    if args.family == "jacobi":
        return jacobi_field(args.alpha, args.beta)
    if args.family == "laguerre":
        return laguerre_field(args.alpha)
    return hermite_field()


def _parse_counts(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValueError(f"bad composition {text!r}: {exc}") from exc


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"bad complex value {text!r}; expected 're' or 're,im'")


def _complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _positions_lines(positions: np.ndarray) -> list[str]:
    if np.iscomplexobj(positions):
        lines = ["index,re,im"]
        lines += [
            f"{k},{_fmt(z.real)},{_fmt(z.imag)}" for k, z in enumerate(positions)
        ]
    else:
        lines = ["index,position"]
        lines += [f"{k},{_fmt(x)}" for k, x in enumerate(positions)]
    return lines


def _positions_json(positions: np.ndarray):
    if np.iscomplexobj(positions):
        return [_complex_json(complex(z)) for z in positions]
    return [float(x) for x in positions]


def _write_lines(path: str | None, lines: list[str]) -> None:
    with _out_stream(path) as stream:
        for line in lines:
            stream.write(line + "\n")


def _write_json(path: str | None, payload) -> None:
    with _out_stream(path) as stream:
        stream.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# ----------------------------------------------------------------------------
# handlers
# ----------------------------------------------------------------------------


def _cmd_zeros(args) -> int:
    family = _family_from_args(args)
    roots = classical.zeros(family, args.n)
    if args.format == "json":
        _write_json(args.output, {"family": family.label(), "zeros": list(map(float, roots))})
    else:
        lines = ["index,position"] + [f"{k},{_fmt(x)}" for k, x in enumerate(roots)]
        _write_lines(args.output, lines)
    return 0


def _free_constraint(field: ExternalField, n: int) -> IntervalConstraint:
    locations = np.sort(field.locations)
    if locations.size >= 2:
        return IntervalConstraint.single(float(locations[0]), float(locations[-1]), n)
    if locations.size == 1:
        return IntervalConstraint.single(float(locations[0]), np.inf, n)
    return IntervalConstraint.single(-np.inf, np.inf, n)


def _cmd_equilibrate(args) -> int:
    field = _load_field(args)
    if args.continuum:
        if not args.n:
            raise ValueError("--continuum requires --n")
        data = _load_json(args.continuum)
        vertices = tuple(
            complex(v["re"], v.get("im", 0.0)) for v in data["vertices"]
        )
        polyline = PolylineContinuum(vertices)
        result = minimize_on_continuum(
            field, polyline, args.n, tol=args.tol, max_iter=args.max_iter
        )
    else:
        if args.composition:
            counts = _parse_counts(args.composition)
            locations = np.sort(field.locations)
            if locations.size != len(counts) + 1:
                raise ValueError(
                    f"composition with {len(counts)} parts needs {len(counts) + 1} "
                    f"fixed charges, field has {locations.size}"
                )
            constraint = IntervalConstraint.between_poles(locations, counts)
        elif args.n:
            constraint = _free_constraint(field, args.n)
        else:
            raise ValueError("provide --n or --composition")
        try:
            result = minimize(field, constraint, tol=args.tol, max_iter=args.max_iter)
        except ConvergenceError as exc:
            _emit_result(args, exc.configuration.positions, exc.diagnostics)
            return 3
    _emit_result(args, result.configuration.positions, result.diagnostics)
    return 0


def _emit_result(args, positions: np.ndarray, diagnostics) -> None:
    diag = dataclasses.asdict(diagnostics)
    if args.format == "json":
        _write_json(
            args.output,
            {"positions": _positions_json(positions), "diagnostics": diag},
        )
    else:
        _write_lines(args.output, _positions_lines(positions))
        _emit_diagnostics(diag)


def _cmd_heine(args) -> int:
    data = _load_json(args.system)
    poles = tuple(float(a) for a in data["poles"])
    residues = tuple(float(r) for r in data["residues"])
    degree = int(data["degree"])
    if args.enumerate:
        outcome = lame.enumerate_solutions(
            poles, residues, degree, tol=args.tol, max_iter=args.max_iter
        )
        solutions = outcome.solutions
        failures = outcome.failures
    else:
        if "composition" not in data:
            raise ValueError("system file needs a composition unless --enumerate is given")
        system = lame.LameSystem(poles, residues, degree, tuple(data["composition"]))
        try:
            solutions = (lame.solve(system, tol=args.tol, max_iter=args.max_iter),)
            failures = ()
        except ConvergenceError as exc:
            solutions = ()
            failures = ((system.composition, str(exc)),)

    def solution_json(sol: lame.HeineStieltjesSolution) -> dict:
        return {
            "composition": list(sol.composition),
            "zeros": list(map(float, sol.zeros)),
            "monic_coefficients": list(map(float, sol.monic_coefficients)),
            "van_vleck": list(map(float, sol.van_vleck)),
            "division_remainder_norm": sol.division_remainder_norm,
            "gradient_norm": sol.gradient_norm,
            "energy": sol.energy,
            "converged": sol.converged,
        }

    if args.format == "json":
        _write_json(
            args.output,
            {
                "solutions": [solution_json(s) for s in solutions],
                "failures": [
                    {"composition": list(c), "error": msg} for c, msg in failures
                ],
            },
        )
    else:
        lines = ["composition,index,zero"]
        for sol in solutions:
            tag = "|".join(str(c) for c in sol.composition)
            for k, z in enumerate(sol.zeros):
                lines.append(f"{tag},{k},{_fmt(z)}")
        _write_lines(args.output, lines)
        _emit_diagnostics(
            {
                "solutions": [solution_json(s) for s in solutions],
                "failures": [
                    {"composition": list(c), "error": msg} for c, msg in failures
                ],
            }
        )
    return 3 if failures else 0


def _measure_from_spec(poles, theta) -> asymptotics.EquilibriumMeasure:
    return asymptotics.equilibrium_measure(tuple(poles), tuple(theta))


def _density_samples(measure: asymptotics.EquilibriumMeasure, samples: int):
    total = sum(hi - lo for lo, hi in measure.support)
    xs = []
    for lo, hi in measure.support:
        m = max(2, round(samples * (hi - lo) / total))
        xs.extend(lo + (np.arange(m) + 0.5) * (hi - lo) / m)
    xs = np.array(xs)
    return xs, measure.density(xs)


def _cmd_measure(args) -> int:
    data = _load_json(args.system)
    poles = tuple(float(a) for a in data["poles"])
    theta = tuple(float(t) for t in args.theta.split(","))
    try:
        measure = _measure_from_spec(poles, theta)
    except asymptotics.BetaSolveError as exc:
        _emit_diagnostics(
            {"error": str(exc), "residuals": list(map(float, exc.residuals))}
        )
        return 3
    xs, density = _density_samples(measure, args.samples)
    summary = {
        "poles": list(measure.poles),
        "theta": list(measure.masses),
        "betas": list(measure.betas),
        "support": [[lo, hi] for lo, hi in measure.support],
        "branch_sign": measure.branch_sign,
        "interval_masses": [
            measure.interval_mass(lo, hi)
            for lo, hi in zip(measure.poles, measure.poles[1:])
        ],
    }
    if args.format == "json":
        summary["density_samples"] = [
            {"x": float(x), "density": float(d)} for x, d in zip(xs, density)
        ]
        _write_json(args.output, summary)
    else:
        lines = ["x,density"] + [
            f"{_fmt(x)},{_fmt(d)}" for x, d in zip(xs, density)
        ]
        _write_lines(args.output, lines)
        _emit_diagnostics(summary)
    return 0


def _read_zeros_csv(path: str) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
        lowered = [h.strip().lower() for h in header]
        column = len(lowered) - 1
        for name in ("position", "zero", "x"):
            if name in lowered:
                column = lowered.index(name)
                break
        for line in handle:
            line = line.strip()
            if not line:
                continue
            values.append(float(line.split(",")[column]))
    if not values:
        raise ValueError(f"{path}: no zero values found")
    return np.array(values)


def _cmd_compare(args) -> int:
    zeros = _read_zeros_csv(args.zeros)
    spec = _load_json(args.measure)
    measure = _measure_from_spec(spec["poles"], spec["theta"])
    distance = asymptotics.ks_distance(
        asymptotics.EmpiricalDistribution(zeros), measure
    )
    if args.format == "json":
        _write_json(args.output, {"ks_distance": distance})
    else:
        _write_lines(args.output, ["ks_distance", _fmt(distance)])
    return 0


def _cmd_riccati(args) -> int:
    family = classical.jacobi(args.alpha, args.beta)
    z = _parse_complex(args.z)
    h = asymptotics.normalized_log_derivative(family, args.n, z)
    h = complex(h)
    transform = asymptotics.arcsine_measure().cauchy_transform(z)
    residual = asymptotics.riccati_residual(family, args.n, z)
    if args.format == "json":
        _write_json(
            args.output,
            {
                "h": _complex_json(h),
                "cauchy_transform": _complex_json(transform),
                "residual": residual,
            },
        )
    else:
        lines = [
            "h_re,h_im,cauchy_re,cauchy_im,residual",
            ",".join(
                [
                    _fmt(h.real),
                    _fmt(h.imag),
                    _fmt(transform.real),
                    _fmt(transform.imag),
                    _fmt(residual),
                ]
            ),
        ]
        _write_lines(args.output, lines)
    return 0


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--output", default=None, help="output path (default: stdout)")


def _add_solver_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sub.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chargeq",
        description="Equilibria of logarithmically repelling unit charges and "
        "their limiting distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_zeros = sub.add_parser("zeros", help="zeros of a classical polynomial")
    p_zeros.add_argument("--family", choices=("jacobi", "laguerre", "hermite"), required=True)
    p_zeros.add_argument("--n", type=int, required=True)
    p_zeros.add_argument("--alpha", type=float, default=0.0)
    p_zeros.add_argument("--beta", type=float, default=0.0)
    _add_common(p_zeros)
    p_zeros.set_defaults(handler=_cmd_zeros)

    p_eq = sub.add_parser("equilibrate", help="minimize the charge energy")
    p_eq.add_argument("--family", choices=("jacobi", "laguerre", "hermite"))
    p_eq.add_argument("--alpha", type=float, default=0.0)
    p_eq.add_argument("--beta", type=float, default=0.0)
    p_eq.add_argument("--field-json", default=None, help="field description file")
    p_eq.add_argument("--n", type=int, default=None, help="free charge count")
    p_eq.add_argument(
        "--composition", default=None, help="per-gap counts n1,n2,... between charges"
    )
    p_eq.add_argument("--continuum", default=None, help="polyline JSON file")
    _add_solver_options(p_eq)
    _add_common(p_eq)
    p_eq.set_defaults(handler=_cmd_equilibrate)

    p_heine = sub.add_parser("heine", help="Heine-Stieltjes solutions of a Lame system")
    p_heine.add_argument("--system", required=True, help="system JSON file")
    p_heine.add_argument(
        "--enumerate", action="store_true", help="solve every composition"
    )
    _add_solver_options(p_heine)
    _add_common(p_heine)
    p_heine.set_defaults(handler=_cmd_heine)

    p_measure = sub.add_parser("measure", help="constrained equilibrium measure")
    p_measure.add_argument("--system", required=True, help="system JSON file (poles)")
    p_measure.add_argument("--theta", required=True, help="gap masses t1,t2,...")
    p_measure.add_argument("--samples", type=int, default=200)
    _add_common(p_measure)
    p_measure.set_defaults(handler=_cmd_measure)

    p_compare = sub.add_parser("compare", help="KS distance of zeros vs measure")
    p_compare.add_argument("--zeros", required=True, help="zeros CSV file")
    p_compare.add_argument("--measure", required=True, help="measure spec JSON file")
    _add_common(p_compare)
    p_compare.set_defaults(handler=_cmd_compare)

    p_ric = sub.add_parser(
        "riccati", help="normalized log-derivative and its limit identity"
    )
    p_ric.add_argument("--n", type=int, required=True)
    p_ric.add_argument("--alpha", type=float, default=0.0)
    p_ric.add_argument("--beta", type=float, default=0.0)
    p_ric.add_argument("--z", required=True, help="evaluation point 're' or 're,im'")
    _add_common(p_ric)
    p_ric.set_defaults(handler=_cmd_riccati)

    return parser


def run(argv=None) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.handler(args)
    except ConvergenceError as exc:
        _emit_diagnostics(dataclasses.asdict(exc.diagnostics) | {"error": str(exc)})
        return 3
    except asymptotics.BetaSolveError as exc:
        _emit_diagnostics(
            {"error": str(exc), "residuals": list(map(float, exc.residuals))}
        )
        return 3
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
