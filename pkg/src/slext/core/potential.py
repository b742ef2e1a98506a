"""Potentials q(x) for the operator -u'' + q u on an interval (a, b).

Four kinds are supported: the inverse-square family (kappa^2 - 1/4)/x^2 on the
half-line, constants, linearly interpolated tables, and finite sums of those.
Every potential reduces to the canonical form

    q(x) = A / x^2 + c + T(x),

with ``T`` a single piecewise-linear table; the compiled integrators only ever
see that form (see :meth:`Potential.kernel_terms`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DomainError, ValidationError

__all__ = [
    "Interval",
    "HALF_LINE",
    "Potential",
    "InverseSquare",
    "Constant",
    "Tabulated",
    "Sum",
    "evaluate_potential",
    "potential_to_dict",
    "potential_from_dict",
]


@dataclass(frozen=True)
class Interval:
    """Open interval (a, b) with -inf <= a < b <= inf."""

    a: float = 0.0
    b: float = math.inf

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if math.isnan(a) or math.isnan(b) or not a < b:
            raise ValidationError(f"invalid interval ({self.a}, {self.b})")
        if a == math.inf or b == -math.inf:
            raise ValidationError(f"invalid interval ({self.a}, {self.b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def left_finite(self) -> bool:
        return math.isfinite(self.a)

    @property
    def right_finite(self) -> bool:
        return math.isfinite(self.b)

    def contains(self, x) -> bool:
        """True if every entry of ``x`` lies in the open interval."""
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > self.a) & (x < self.b)))

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.a, other.a), min(self.b, other.b))


HALF_LINE = Interval(0.0, math.inf)


class Potential:
    """Base class; concrete kinds are frozen dataclasses below."""

    domain: Interval

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        A, c, grid, vals = self.kernel_terms()
        out = A / x**2 + c if A != 0.0 else np.full_like(x, c)
        if grid.size:
            if np.any((x < grid[0]) | (x > grid[-1])):
                raise DomainError("point outside the tabulated range")
            out = out + np.interp(x, grid, vals)
        return out if out.ndim else float(out)

    def kernel_terms(self) -> tuple[float, float, np.ndarray, np.ndarray]:
        """Return ``(A, c, grid, values)`` of the canonical form."""
        raise NotImplementedError

    def table_range(self) -> tuple[float, float] | None:
        """Closed range covered by the tabulated part, or None."""
        _, _, grid, _ = self.kernel_terms()
        if grid.size == 0:
            return None
        return float(grid[0]), float(grid[-1])

    @property
    def inverse_square_coefficient(self) -> float:
        return self.kernel_terms()[0]


_EMPTY = np.empty(0, dtype=float)


@dataclass(frozen=True)
class InverseSquare(Potential):
    """q_kappa(x) = (kappa^2 - 1/4) / x^2 on (0, inf)."""

    kappa: float
    domain: Interval = HALF_LINE

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        if not math.isfinite(self.kappa):
            raise ValidationError("kappa must be finite")
        if self.domain.a != 0.0:
            raise ValidationError("inverse-square potential needs left endpoint 0")

    def kernel_terms(self):
        return self.kappa**2 - 0.25, 0.0, _EMPTY, _EMPTY


@dataclass(frozen=True)
class Constant(Potential):
    value: float
    domain: Interval = HALF_LINE

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValidationError("constant potential must be finite")

    def kernel_terms(self):
        return 0.0, self.value, _EMPTY, _EMPTY


@dataclass(frozen=True)
class Tabulated(Potential):
    """Piecewise-linear potential through ``(grid[i], values[i])``.

    Evaluation outside ``[grid[0], grid[-1]]`` is a domain error.
    """

    grid: tuple
    values: tuple
    domain: Interval = HALF_LINE

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(float(v) for v in self.values)
        if len(grid) < 2 or len(grid) != len(values):
            raise ValidationError("table needs >= 2 points and matching lengths")
        if any(g1 <= g0 for g0, g1 in zip(grid, grid[1:])):
            raise ValidationError("table grid must be strictly increasing")
        if not all(math.isfinite(v) for v in values + grid):
            raise ValidationError("table entries must be finite")
        if grid[0] < self.domain.a or grid[-1] > self.domain.b:
            raise ValidationError("table grid leaves the domain")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def kernel_terms(self):
        return 0.0, 0.0, np.array(self.grid), np.array(self.values)


@dataclass(frozen=True)
class Sum(Potential):
    """Finite sum of potentials on the intersection of their domains."""

    terms: tuple
    domain: Interval = field(default=None)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms or not all(isinstance(t, Potential) for t in terms):
            raise ValidationError("Sum needs at least one Potential term")
        object.__setattr__(self, "terms", terms)
        dom = terms[0].domain
        for t in terms[1:]:
            dom = dom.intersect(t.domain)
        if self.domain is not None:
            dom = dom.intersect(self.domain)
        object.__setattr__(self, "domain", dom)

    def kernel_terms(self):
        A = c = 0.0
        tables = []
        for t in self.terms:
            a_t, c_t, g_t, v_t = t.kernel_terms()
            A += a_t
            c += c_t
            if g_t.size:
                tables.append((g_t, v_t))
        if not tables:
            return A, c, _EMPTY, _EMPTY
        lo = max(g[0] for g, _ in tables)
        hi = min(g[-1] for g, _ in tables)
        if not lo < hi:
            raise ValidationError("tabulated terms do not overlap")
        # piecewise-linear sum is exact on the union of breakpoints
        grid = np.unique(np.concatenate([g for g, _ in tables]))
        grid = grid[(grid >= lo) & (grid <= hi)]
        vals = sum(np.interp(grid, g, v) for g, v in tables)
        return A, c, grid, vals


def evaluate_potential(q: Potential, x: float) -> float:
    """Value of ``q`` at an interior point ``x`` of its domain."""
    if not q.domain.contains(x):
        raise DomainError(f"x={x} outside the domain ({q.domain.a}, {q.domain.b})")
    return float(q(float(x)))


def _endpoint(v: float) -> Any:
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def potential_to_dict(q: Potential) -> dict:
    """JSON-ready description of ``q`` (see the report schema)."""
    dom = [_endpoint(q.domain.a), _endpoint(q.domain.b)]
    if isinstance(q, InverseSquare):
        return {"kind": "inverse_square", "kappa": q.kappa, "domain": dom}
    if isinstance(q, Constant):
        return {"kind": "constant", "value": q.value, "domain": dom}
    if isinstance(q, Tabulated):
        return {"kind": "tabulated", "grid": list(q.grid), "values": list(q.values), "domain": dom}
    if isinstance(q, Sum):
        return {"kind": "sum", "terms": [potential_to_dict(t) for t in q.terms], "domain": dom}
    raise ValidationError(f"cannot serialize {type(q).__name__}")


def potential_from_dict(d: dict) -> Potential:
    try:
        kind = d["kind"]
        dom = Interval(*(float(v) for v in d.get("domain", [0.0, "inf"])))
        if kind == "inverse_square":
            return InverseSquare(float(d["kappa"]), dom)
        if kind == "constant":
            return Constant(float(d["value"]), dom)
        if kind == "tabulated":
            return Tabulated(tuple(d["grid"]), tuple(d["values"]), dom)
        if kind == "sum":
            return Sum(tuple(potential_from_dict(t) for t in d["terms"]), dom)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed potential description: {exc}") from exc
    raise ValidationError(f"unknown potential kind {kind!r}")
