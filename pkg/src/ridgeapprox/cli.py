"""Command-line front end.

Subcommands:

    solve <config> [-o outdir] [-q N] [--force-fixed-point]
    verify <config> <outdir> [--threshold T]
    oracle <config>
    export <outdir> --dense N

Exit codes: 0 success; 1 config error; 2 numerical failure (dependent
directions, vanishing slice mass, inconsistent quadrature); 3 solver did
not converge (results are still written, flagged); 4 verification above
threshold; 5 oracle instance too large.

Machine-readable outputs (summary.json, component CSVs, config echo) are
byte-identical across runs of the same config: fixed field order, floats
with 17 significant digits, UTF-8, LF line endings.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import closed_form, oracle
from .config import (
    AssembledProblem,
    ConfigError,
    ProblemConfig,
    assemble,
    format_config,
    load_config,
    unit_weighted,
)
from .domain import GridSampleError, RidgeComponent
from .expr import ExprError
from .geometry import DependentDirectionsError
from .weighted import (
    WeightedProblem,
    ZeroSliceMassError,
    orthogonality_residuals,
    solve_fixed_point,
    unit_weights,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VERIFY_FAILED = 4
EXIT_TOO_LARGE = 5

ORACLE_NODE_LIMIT = 10**6


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _json_text(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad}  "{key}": {_json_text(item, indent + 1)}' for key, item in value.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_text(item, indent) for item in value) + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt(value)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_component_csv(path: Path, nodes: np.ndarray, values: np.ndarray, index: int) -> None:
    lines = [f"y,g{index + 1}"]
    lines += [f"{_fmt(node)},{_fmt(value)}" for node, value in zip(nodes, values)]
    _write_text(path, "\n".join(lines) + "\n")


def _read_component_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read results file {path}: {exc}") from None
    if not lines or not lines[0].startswith("y,g"):
        raise ConfigError(f"corrupt results file {path}: missing header")
    nodes = []
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError(f"corrupt results file {path}: line {lineno}")
        try:
            nodes.append(float(parts[0]))
            values.append(float(parts[1]))
        except ValueError:
            raise ConfigError(f"corrupt results file {path}: line {lineno}") from None
    return np.asarray(nodes), np.asarray(values)


def _solve(assembled: AssembledProblem, force_fixed_point: bool):
    config = assembled.config
    if unit_weighted(config) and not force_fixed_point:
        return closed_form.solve_unweighted(assembled.f_star, assembled.basis), None
    weights = assembled.weights_star or unit_weights(assembled.domain)
    problem = WeightedProblem.build(assembled.f_star, weights, assembled.basis)
    return solve_fixed_point(problem, config.solver_config()), problem


def _summary(assembled: AssembledProblem, solution) -> dict:
    config = assembled.config
    return {
        "tool": "ridgeapprox",
        "method": solution.method,
        "n": config.n,
        "r": config.r,
        "order": config.order,
        "transform_det": assembled.basis.det,
        "error": solution.error,
        "residual_error": solution.residual_error,
        "f_star_integral": assembled.f_star.integrate(),
        "f_star_norm_sq": assembled.f_star.norm_sq(),
        "characterization_defect": (
            solution.residual_orthogonality if solution.method == "closed_form" else None
        ),
        "orthogonality_defect": (
            solution.residual_orthogonality if solution.method == "fixed_point" else None
        ),
        "converged": solution.converged,
        "sweeps": solution.sweeps,
        "last_change": solution.last_change,
        "warning": None if solution.converged else "solver did not converge within max_sweeps",
    }


def _write_results(outdir: Path, assembled: AssembledProblem, solution) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    _write_text(outdir / "summary.json", _json_text(_summary(assembled, solution)) + "\n")
    _write_text(outdir / "config_echo.cfg", format_config(assembled.config))
    for i, comp in enumerate(solution.components):
        _write_component_csv(
            outdir / f"component_{i + 1}.csv",
            assembled.domain.nodes[i],
            comp.values,
            i,
        )


def _print_report(assembled: AssembledProblem, solution, outdir: Path) -> None:
    config = assembled.config
    print(f"problem: n={config.n} r={config.r} order={config.order} method={solution.method}")
    print(f"transform determinant: {_fmt(assembled.basis.det)}")
    print(f"integral of f* over Y: {_fmt(assembled.f_star.integrate())}")
    print(f"squared norm of f* over Y: {_fmt(assembled.f_star.norm_sq())}")
    print(f"error E(f): {_fmt(solution.error)}")
    print(f"residual norm (diagnostic): {_fmt(solution.residual_error)}")
    kind = "characterization" if solution.method == "closed_form" else "orthogonality"
    print(f"{kind} defect: {_fmt(solution.residual_orthogonality)}")
    for i, comp in enumerate(solution.components):
        lo, hi = config.intervals[i]
        print(
            f"component g{i + 1}: {config.order} nodes on [{_fmt(lo)}, {_fmt(hi)}], "
            f"min={_fmt(float(comp.values.min()))}, max={_fmt(float(comp.values.max()))}"
        )
    if solution.method == "fixed_point":
        status = "converged" if solution.converged else "DID NOT CONVERGE"
        print(
            f"fixed point: {status} after {solution.sweeps} sweeps, "
            f"last change {_fmt(solution.last_change)}"
        )
    print(f"results written to: {outdir}")


def cmd_solve(args) -> int:
    config = load_config(args.config)
    if args.order is not None:
        config = config.with_order(args.order)
    assembled = assemble(config)
    solution, _ = _solve(assembled, args.force_fixed_point)
    outdir = Path(args.outdir)
    _write_results(outdir, assembled, solution)
    _print_report(assembled, solution, outdir)
    if not solution.converged:
        print("warning: solver did not converge within max_sweeps", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_verify(args) -> int:
    config = load_config(args.config)
    assembled = assemble(config)
    dom = assembled.domain
    components = []
    for i in range(config.r):
        nodes, values = _read_component_csv(Path(args.outdir) / f"component_{i + 1}.csv")
        if len(values) != dom.order:
            raise ConfigError(
                f"component {i + 1} has {len(values)} values, expected {dom.order}"
            )
        if np.max(np.abs(nodes - dom.nodes[i])) > 1e-9 * max(1.0, np.max(np.abs(dom.nodes[i]))):
            raise ConfigError(f"component {i + 1} node coordinates do not match the domain")
        components.append(RidgeComponent(i, values))

    if unit_weighted(config) and not args.force_fixed_point:
        residuals = closed_form.characterization_residuals(tuple(components), assembled.f_star)
        kind = "characterization"
    else:
        weights = assembled.weights_star or unit_weights(dom)
        problem = WeightedProblem.build(assembled.f_star, weights, assembled.basis)
        residuals = orthogonality_residuals(problem, components)
        kind = "orthogonality"

    worst = 0.0
    worst_at = (0, 0)
    for j, res in enumerate(residuals):
        k = int(np.argmax(np.abs(res)))
        if abs(res[k]) > worst:
            worst = float(abs(res[k]))
            worst_at = (j, k)
    print(f"{kind} defect: {_fmt(worst)} (threshold {_fmt(args.threshold)})")
    if worst > args.threshold:
        print(
            f"worst defect at component g{worst_at[0] + 1}, node {worst_at[1] + 1}",
            file=sys.stderr,
        )
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_oracle(args) -> int:
    config = load_config(args.config)
    if config.order**config.n > ORACLE_NODE_LIMIT:
        print(
            f"instance too large for the oracle: {config.order}^{config.n} nodes "
            f"exceeds {ORACLE_NODE_LIMIT}",
            file=sys.stderr,
        )
        return EXIT_TOO_LARGE
    assembled = assemble(config)
    solution, problem = _solve(assembled, args.force_fixed_point)
    if problem is None:
        weights = unit_weights(assembled.domain)
        problem = WeightedProblem.build(assembled.f_star, weights, assembled.basis)
    result = oracle.solve_oracle(problem)
    report = oracle.compare(solution, result)
    print(f"solver method: {solution.method}")
    print(f"solver error: {_fmt(report.solver_error)}")
    print(f"oracle error: {_fmt(report.oracle_error)}")
    print(f"error gap: {_fmt(report.error_gap)}")
    print(f"approximant gap (sup over nodes): {_fmt(report.approximant_gap)}")
    return EXIT_OK


def cmd_export(args) -> int:
    outdir = Path(args.outdir)
    config = load_config(outdir / "config_echo.cfg")
    from .domain import RSetDomain

    dom = RSetDomain.build(config.intervals, config.box0, config.order)
    for i in range(config.r):
        nodes, values = _read_component_csv(outdir / f"component_{i + 1}.csv")
        if len(values) != dom.order:
            raise ConfigError(
                f"component {i + 1} has {len(values)} values, expected {dom.order}"
            )
        points, dense = dom.resample(RidgeComponent(i, values), args.dense)
        _write_component_csv(outdir / f"component_{i + 1}_dense.csv", points, dense, i)
    print(f"dense components ({args.dense} points each) written to: {outdir}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridgeapprox",
        description="Best L2 approximation by weighted sums of ridge functions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a problem description")
    solve.add_argument("config")
    solve.add_argument("-o", "--outdir", default="out")
    solve.add_argument("-q", "--order", type=int, default=None, help="override quadrature order")
    solve.add_argument("--force-fixed-point", action="store_true")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="re-check optimality of stored results")
    verify.add_argument("config")
    verify.add_argument("outdir")
    verify.add_argument("--threshold", type=float, default=1e-8)
    verify.add_argument("--force-fixed-point", action="store_true")
    verify.set_defaults(func=cmd_verify)

    oracle_cmd = sub.add_parser("oracle", help="compare solver against brute-force least squares")
    oracle_cmd.add_argument("config")
    oracle_cmd.add_argument("--force-fixed-point", action="store_true")
    oracle_cmd.set_defaults(func=cmd_oracle)

    export = sub.add_parser("export", help="densely resample stored components")
    export.add_argument("outdir")
    export.add_argument("--dense", type=int, required=True, metavar="N")
    export.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ExprError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        DependentDirectionsError,
        ZeroSliceMassError,
        GridSampleError,
        closed_form.InconsistentQuadratureError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
