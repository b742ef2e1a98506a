"""Solution evaluators of -u'' + (q - E) u = 0.

Anything with ``potential``, ``E``, ``span`` and ``evaluate(x) -> (u, u')``
can be used where a solution is expected: sampled :class:`Trajectory` objects,
the closed-form :class:`FrobeniusSolution` pair of the inverse-square family,
and real linear :class:`Combination` objects of either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, UsageError, ValidationError
from .potential import InverseSquare, Potential

__all__ = [
    "Solution",
    "Trajectory",
    "Combination",
    "FrobeniusSolution",
    "frobenius_pair",
    "wronskian",
]


class Solution:
    potential: Potential
    E: float

    @property
    def span(self) -> tuple[float, float]:
        raise NotImplementedError

    def evaluate(self, x):
        """Return ``(u(x), u'(x))``; ``x`` may be a scalar or an array."""
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(x)[0]

    def scaled(self, c: float) -> "Combination":
        return Combination(((float(c), self),))

    def _check_x(self, x):
        lo, hi = self.span
        xa = np.asarray(x, dtype=float)
        if np.any(xa < lo) or np.any(xa > hi):
            raise DomainError(f"evaluation point outside the solution span [{lo}, {hi}]")
        return xa


@dataclass(frozen=True, eq=False)
class Trajectory(Solution):
    """Sampled solution (x, u, u') on a strictly increasing grid.

    Between samples, ``u`` is the cubic Hermite interpolant of the (u, u')
    pairs and ``u'`` the cubic Hermite interpolant of the (u', u'') pairs
    with u'' = (q - E) u taken from the equation.
    """

    xs: np.ndarray
    us: np.ndarray
    dus: np.ndarray
    E: float
    potential: Potential

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        us = np.asarray(self.us, dtype=float)
        dus = np.asarray(self.dus, dtype=float)
        if not (xs.ndim == us.ndim == dus.ndim == 1 and len(xs) == len(us) == len(dus) >= 2):
            raise ValidationError("trajectory needs >= 2 samples of equal length")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("trajectory samples must be strictly increasing")
        if not self.potential.domain.contains(xs):
            raise ValidationError("trajectory samples leave the interior of the domain")
        for name, arr in (("xs", xs), ("us", us), ("dus", dus)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "E", float(self.E))

    def __len__(self):
        return len(self.xs)

    @property
    def span(self):
        return float(self.xs[0]), float(self.xs[-1])

    @property
    def ddus(self) -> np.ndarray:
        return (np.asarray(self.potential(self.xs)) - self.E) * self.us

    def evaluate(self, x):
        xa = self._check_x(x)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        xs = self.xs
        i = np.clip(np.searchsorted(xs, xa, side="right") - 1, 0, len(xs) - 2)
        x0, x1 = xs[i], xs[i + 1]
        h = x1 - x0
        t = (xa - x0) / h
        ddu = self.ddus
        u = _hermite(t, h, self.us[i], self.us[i + 1], self.dus[i], self.dus[i + 1])
        du = _hermite(t, h, self.dus[i], self.dus[i + 1], ddu[i], ddu[i + 1])
        if scalar:
            return float(u[0]), float(du[0])
        return u, du


def _hermite(t, h, y0, y1, m0, m1):
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1)


@dataclass(frozen=True, eq=False)
class Combination(Solution):
    """Real linear combination sum_i c_i f_i of solutions of one equation."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), f) for c, f in self.terms)
        if not terms:
            raise ValidationError("empty combination")
        first = terms[0][1]
        for _, f in terms[1:]:
            _check_same_equation(first, f)
        object.__setattr__(self, "terms", terms)

    @property
    def potential(self):
        return self.terms[0][1].potential

    @property
    def E(self):
        return self.terms[0][1].E

    @property
    def span(self):
        lo = max(f.span[0] for _, f in self.terms)
        hi = min(f.span[1] for _, f in self.terms)
        return lo, hi

    def evaluate(self, x):
        self._check_x(x)
        u = du = 0.0
        for c, f in self.terms:
            if c == 0.0:
                continue
            fu, fdu = f.evaluate(x)
            u = u + c * fu
            du = du + c * fdu
        if np.ndim(x) and np.ndim(u) == 0:
            shape = np.shape(x)
            u, du = np.full(shape, u), np.full(shape, du)
        return u, du


@dataclass(frozen=True, eq=False)
class FrobeniusSolution(Solution):
    """Closed-form E=0 solution of the inverse-square equation.

    ``which=1``: r^(1/2+kappa) (r^(1/2) for kappa=0);
    ``which=2``: r^(1/2-kappa) (r^(1/2) ln r for kappa=0).
    """

    kappa: float
    which: int

    def __post_init__(self):
        if self.which not in (1, 2):
            raise ValidationError("which must be 1 or 2")
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def potential(self):
        return InverseSquare(self.kappa)

    @property
    def E(self):
        return 0.0

    @property
    def span(self):
        return 0.0, math.inf

    def evaluate(self, x):
        xa = self._check_x(x)
        if np.any(xa <= 0):
            raise DomainError("Frobenius solutions are defined for r > 0")
        k = self.kappa
        if k == 0.0 and self.which == 2:
            s = np.sqrt(xa)
            lg = np.log(xa)
            u, du = s * lg, (0.5 * lg + 1.0) / s
        else:
            p = 0.5 + k if self.which == 1 else 0.5 - k
            u = xa**p
            du = p * xa ** (p - 1.0)
        if np.ndim(u) == 0:
            return float(u), float(du)
        return u, du


def frobenius_pair(kappa: float) -> tuple[FrobeniusSolution, FrobeniusSolution]:
    """Closed-form solutions (psi1, psi2) of -u'' + (kappa^2-1/4)/r^2 u = 0."""
    return FrobeniusSolution(kappa, 1), FrobeniusSolution(kappa, 2)


def _check_same_equation(u: Solution, v: Solution):
    if u.potential != v.potential or u.E != v.E:
        raise UsageError("solutions belong to different equations (q, E)")


def wronskian(u: Solution, v: Solution, x):
    """W(u, v)(x) = u v' - u' v."""
    _check_same_equation(u, v)
    uu, udu = u.evaluate(x)
    vu, vdu = v.evaluate(x)
    return uu * vdu - udu * vu
