"""Problem description files and their assembly into solver inputs.

The format is flat ``key = value`` text: one setting per line, ``#``
lines and blank lines ignored, numeric lists in square brackets, and
repeated keys (direction, completion, interval, box0, weight) building
lists in file order.  Keys:

    n = 4                      dimension
    r = 3                      number of ridge directions
    direction = [1, 1, 1, -1]  r rows of n numbers
    completion = [-1, 1, 1, 1] optional, n - r rows (auto-completed if absent)
    interval = [0, 1]          r rows: the ridge intervals Y1..Yr
    box0 = [0, 1]              n - r rows: the Y0 box (omit when r = n)
    f = 8*x1*x2*x3*x4 - ...    target in x1..xn, or
    f_star = y1*y2*y3*y4       target directly in y1..yn (exactly one of the two)
    weight = 1 + y2            optional, r rows; absent means all 1
    order = 8                  quadrature nodes per axis
    tolerance = 1e-10          fixed-point stop threshold
    max_sweeps = 10000
    damping = 1
    init = zeros               or closed_form

Weight expressions may use x-variables (pulled back through the basis)
or y-variables (used directly); one expression cannot mix the two.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from . import expr as expr_mod
from .domain import GridFunction, RSetDomain
from .geometry import DirectionBasis
from .weighted import SolverConfig

_LIST_KEYS = ("direction", "completion", "interval", "box0", "weight")
_SCALAR_KEYS = ("n", "r", "f", "f_star", "order", "tolerance", "max_sweeps", "damping", "init")


class ConfigError(ValueError):
    """Invalid problem description."""


@dataclass(frozen=True)
class ProblemConfig:
    n: int
    r: int
    directions: tuple[tuple[float, ...], ...]
    completion: tuple[tuple[float, ...], ...] | None
    intervals: tuple[tuple[float, float], ...]
    box0: tuple[tuple[float, float], ...]
    f_text: str | None
    f_star_text: str | None
    weight_texts: tuple[str, ...] | None
    order: int = 8
    tolerance: float = 1e-10
    max_sweeps: int = 10000
    damping: float = 1.0
    init: str = "zeros"

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            tolerance=self.tolerance,
            max_sweeps=self.max_sweeps,
            damping=self.damping,
            init=self.init,
        )

    def with_order(self, order: int) -> "ProblemConfig":
        return replace(self, order=order)


def unit_weighted(config: ProblemConfig) -> bool:
    """Syntactic weight-one detection: no weights, or every text is "1"."""
    if config.weight_texts is None:
        return True
    return all(text.strip() == "1" for text in config.weight_texts)


def _parse_number(text: str, line: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"line {line}: {what} is not a number: {text!r}") from None


def _parse_list(text: str, line: int) -> tuple[float, ...]:
    stripped = text.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise ConfigError(f"line {line}: expected a bracketed list, got {text!r}")
    body = stripped[1:-1].strip()
    if not body:
        raise ConfigError(f"line {line}: empty list")
    return tuple(_parse_number(part, line, "list entry") for part in body.split(","))


def parse_config(text: str) -> ProblemConfig:
    """Parse config text; errors carry the offending line number."""
    scalars: dict[str, tuple[str, int]] = {}
    lists: dict[str, list[tuple[tuple[float, ...], int]]] = {key: [] for key in _LIST_KEYS}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _LIST_KEYS:
            if key == "weight":
                lists[key].append(((), lineno))
                scalars[f"__weight_{len(lists['weight'])}"] = (value, lineno)
            else:
                lists[key].append((_parse_list(value, lineno), lineno))
        elif key in _SCALAR_KEYS:
            if key in scalars:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            scalars[key] = (value, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    def require_int(key: str, default: int | None = None) -> int:
        if key not in scalars:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            return default
        value, line = scalars[key]
        number = _parse_number(value, line, key)
        if number != int(number):
            raise ConfigError(f"line {line}: {key} must be an integer, got {value!r}")
        return int(number)

    def optional_float(key: str, default: float) -> float:
        if key not in scalars:
            return default
        value, line = scalars[key]
        return _parse_number(value, line, key)

    n = require_int("n")
    r = require_int("r")
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 1 <= r <= n:
        raise ConfigError(f"r must satisfy 1 <= r <= n, got r={r}, n={n}")

    directions = tuple(row for row, _ in lists["direction"])
    if len(directions) != r:
        raise ConfigError(f"expected {r} 'direction' rows, got {len(directions)}")
    for row, line in lists["direction"]:
        if len(row) != n:
            raise ConfigError(f"line {line}: direction must have {n} entries, got {len(row)}")

    completion_rows = lists["completion"]
    completion: tuple[tuple[float, ...], ...] | None
    if completion_rows:
        if len(completion_rows) != n - r:
            raise ConfigError(f"expected {n - r} 'completion' rows, got {len(completion_rows)}")
        for row, line in completion_rows:
            if len(row) != n:
                raise ConfigError(f"line {line}: completion must have {n} entries, got {len(row)}")
        completion = tuple(row for row, _ in completion_rows)
    else:
        completion = None

    def require_intervals(key: str, count: int) -> tuple[tuple[float, float], ...]:
        rows = lists[key]
        if len(rows) != count:
            raise ConfigError(f"expected {count} {key!r} rows, got {len(rows)}")
        out = []
        for row, line in rows:
            if len(row) != 2:
                raise ConfigError(f"line {line}: {key} must be [lo, hi], got {len(row)} entries")
            out.append((row[0], row[1]))
        return tuple(out)

    intervals = require_intervals("interval", r)
    box0 = require_intervals("box0", n - r)

    f_text = scalars.get("f", (None, 0))[0]
    f_star_text = scalars.get("f_star", (None, 0))[0]
    if (f_text is None) == (f_star_text is None):
        raise ConfigError("exactly one of 'f' and 'f_star' must be given")

    weight_count = len(lists["weight"])
    if weight_count:
        if weight_count != r:
            raise ConfigError(f"expected {r} 'weight' rows, got {weight_count}")
        weight_texts = tuple(
            scalars[f"__weight_{i + 1}"][0] for i in range(weight_count)
        )
        if any(not text for text in weight_texts):
            raise ConfigError("empty weight expression")
    else:
        weight_texts = None

    init = scalars.get("init", ("zeros", 0))[0]

    return ProblemConfig(
        n=n,
        r=r,
        directions=directions,
        completion=completion,
        intervals=intervals,
        box0=box0,
        f_text=f_text,
        f_star_text=f_star_text,
        weight_texts=weight_texts,
        order=require_int("order", 8),
        tolerance=optional_float("tolerance", 1e-10),
        max_sweeps=require_int("max_sweeps", 10000),
        damping=optional_float("damping", 1.0),
        init=init,
    )


def load_config(path: str | Path) -> ProblemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _canonical_expression(text: str) -> str:
    try:
        return expr_mod.to_text(expr_mod.parse(text))
    except expr_mod.ExprError as exc:
        raise ConfigError(f"invalid expression {text!r}: {exc}") from None


def format_config(config: ProblemConfig) -> str:
    """Canonical text for a config; parsing it back gives equal settings."""
    lines = [f"n = {config.n}", f"r = {config.r}", f"order = {config.order}"]
    for row in config.directions:
        lines.append(f"direction = [{', '.join(_fmt(v) for v in row)}]")
    for row in config.completion or ():
        lines.append(f"completion = [{', '.join(_fmt(v) for v in row)}]")
    for lo, hi in config.intervals:
        lines.append(f"interval = [{_fmt(lo)}, {_fmt(hi)}]")
    for lo, hi in config.box0:
        lines.append(f"box0 = [{_fmt(lo)}, {_fmt(hi)}]")
    if config.f_text is not None:
        lines.append(f"f = {_canonical_expression(config.f_text)}")
    else:
        lines.append(f"f_star = {_canonical_expression(config.f_star_text)}")
    for text in config.weight_texts or ():
        lines.append(f"weight = {_canonical_expression(text)}")
    lines.append(f"tolerance = {_fmt(config.tolerance)}")
    lines.append(f"max_sweeps = {config.max_sweeps}")
    lines.append(f"damping = {_fmt(config.damping)}")
    lines.append(f"init = {config.init}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class AssembledProblem:
    config: ProblemConfig
    basis: DirectionBasis
    domain: RSetDomain
    f_star: GridFunction
    weights_star: tuple[GridFunction, ...] | None


def _parse_expression(text: str, what: str) -> expr_mod.Expr:
    try:
        return expr_mod.parse(text)
    except expr_mod.ExprError as exc:
        raise ConfigError(f"invalid {what} expression: {exc}") from None


def _direct_evaluator(expression: expr_mod.Expr, names: list[str]) -> Callable:
    def evaluator(y: Sequence[float]) -> float:
        return expr_mod.evaluate(expression, dict(zip(names, y)))

    return evaluator


def _weight_evaluator(
    text: str, index: int, basis: DirectionBasis
) -> Callable:
    expression = _parse_expression(text, f"weight {index + 1}")
    free = expr_mod.free_variables(expression)
    uses_x = any(name.startswith("x") for name in free)
    uses_y = any(name.startswith("y") for name in free)
    if uses_x and uses_y:
        raise ConfigError(f"weight {index + 1} mixes x- and y-variables: {free}")
    n = basis.dim
    if uses_x:
        return basis.pullback(expression)
    y_names = [f"y{i + 1}" for i in range(n)]
    unknown = [name for name in free if name not in y_names]
    if unknown:
        raise ConfigError(f"weight {index + 1} uses unknown variables: {unknown}")
    return _direct_evaluator(expression, y_names)


def assemble(config: ProblemConfig) -> AssembledProblem:
    """Build basis, domain, and sampled target / weights from a config."""
    basis = DirectionBasis.build(config.directions, config.completion)
    dom = RSetDomain.build(config.intervals, config.box0, config.order)

    if config.f_text is not None:
        f_expression = _parse_expression(config.f_text, "f")
        try:
            evaluator = basis.pullback(f_expression)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        f_expression = _parse_expression(config.f_star_text, "f_star")
        y_names = [f"y{i + 1}" for i in range(config.n)]
        free = expr_mod.free_variables(f_expression)
        unknown = [name for name in free if name not in y_names]
        if unknown:
            raise ConfigError(f"f_star uses variables outside y1..y{config.n}: {unknown}")
        evaluator = _direct_evaluator(f_expression, y_names)
    f_star = dom.sample(evaluator)

    weights_star = None
    if config.weight_texts is not None:
        weights_star = tuple(
            dom.sample(_weight_evaluator(text, i, basis))
            for i, text in enumerate(config.weight_texts)
        )

    return AssembledProblem(
        config=config,
        basis=basis,
        domain=dom,
        f_star=f_star,
        weights_star=weights_star,
    )
