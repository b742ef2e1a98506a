"""Self-adjoint extensions parametrized by boundary data at the left endpoint.

With the right endpoint limit point, an operator that is limit circle on the
left has one self-adjoint extension per real solution f of l_q f = 0 (up to a
real factor): its domain is the set of g with W(f, g)(a) = 0.  Relative to a
frame (f1, f2) of independent real solutions, f = C (f1 cos t + f2 sin t) with
a unique t in [0, pi), which is the boundary parameter used throughout.

A domain function g splits as g = rho_g + sigma_g, where

    rho_g(x) = [f1(x) int_a^x phi f2 - f2(x) int_a^x phi f1] / W(f1, f2),
    phi = -g'' + q g,

has vanishing Wronskian with everything at a, so sigma_g (a homogeneous
solution) alone decides which extension domain g belongs to.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import (DEFAULT_CONTROLS, Combination, FrobeniusSolution, InverseSquare, IvpControls,
                   Potential, Solution, extend_trajectory, frobenius_pair, fundamental_system,
                   potential_to_dict, wronskian)
from .errors import (DegenerateFrameError, IntegrabilityError, InvalidRequestError,
                     TrivialSolutionError, UsageError, ValidationError)
from .weyl import DEFAULT_WEYL, WeylControls, default_anchor, extension_structure

__all__ = [
    "BoundaryParameter",
    "FrobeniusFrame",
    "NumericalFrame",
    "ExtensionKind",
    "ExtensionDescriptor",
    "TestFunction",
    "SigmaControls",
    "SigmaDecomposition",
    "Membership",
    "theta_decompose",
    "closure_extension",
    "extension_from_theta",
    "extension_from_solution",
    "extensions_equal",
    "rho_sigma",
    "domain_membership",
    "default_frame",
    "cutoff",
    "cutoff_times",
]


@dataclass(frozen=True)
class BoundaryParameter:
    """Angle in [0, pi)."""

    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not 0.0 <= t < math.pi:
            raise ValidationError(f"boundary parameter {t} outside [0, pi)")
        object.__setattr__(self, "theta", t)

    @classmethod
    def canonical(cls, angle: float) -> "BoundaryParameter":
        """Reduce an arbitrary angle modulo pi."""
        t = math.fmod(float(angle), math.pi)
        if t < 0:
            t += math.pi
        if t >= math.pi:
            t = 0.0
        return cls(t)

    def distance(self, other: "BoundaryParameter") -> float:
        """Distance on the circle R / pi Z."""
        d = abs(self.theta - other.theta)
        return min(d, math.pi - d)


# --------------------------------------------------------------------- frames


@dataclass(frozen=True)
class FrobeniusFrame:
    """Closed-form frame (psi1, psi2) of the inverse-square potential."""

    kappa: float

    @property
    def q(self) -> Potential:
        return InverseSquare(self.kappa)

    @property
    def solutions(self) -> tuple[Solution, Solution]:
        return frobenius_pair(self.kappa)

    @property
    def reference_point(self) -> float:
        return 1.0

    def to_dict(self) -> dict:
        return {"kind": "frobenius", "kappa": self.kappa}


@dataclass(frozen=True, eq=False)
class NumericalFrame:
    """Canonical fundamental system (E=0) anchored at ``anchor``."""

    q: Potential
    anchor: float
    span: tuple[float, float]
    controls: IvpControls = DEFAULT_CONTROLS
    _sols: tuple = field(default=None, repr=False)

    def __post_init__(self):
        lo, hi = min(self.span[0], self.anchor), max(self.span[1], self.anchor)
        f1, f2 = fundamental_system(self.q, 0.0, self.anchor, self.controls,
                                    span=(lo, hi) if lo < hi else None)
        lo, hi = min(lo, f1.span[0]), max(hi, f1.span[1])
        object.__setattr__(self, "span", (lo, hi))
        object.__setattr__(self, "_sols", (f1, f2))

    def __eq__(self, other):
        return (isinstance(other, NumericalFrame) and self.q == other.q
                and self.anchor == other.anchor and self.controls == other.controls)

    def __hash__(self):
        return hash((self.q, self.anchor))

    @property
    def solutions(self):
        return self._sols

    @property
    def reference_point(self) -> float:
        return self.anchor

    def covering(self, lo: float, hi: float) -> "NumericalFrame":
        """Same frame with trajectories extended over [lo, hi]."""
        f1, f2 = self._sols
        f1 = extend_trajectory(extend_trajectory(f1, lo, self.controls), hi, self.controls)
        f2 = extend_trajectory(extend_trajectory(f2, lo, self.controls), hi, self.controls)
        new = object.__new__(NumericalFrame)
        for k, v in (("q", self.q), ("anchor", self.anchor), ("controls", self.controls),
                     ("span", (min(lo, self.span[0]), max(hi, self.span[1]))), ("_sols", (f1, f2))):
            object.__setattr__(new, k, v)
        return new

    def to_dict(self) -> dict:
        return {"kind": "numerical", "anchor": self.anchor}


def default_frame(q: Potential, controls: IvpControls = DEFAULT_CONTROLS):
    if isinstance(q, InverseSquare):
        return FrobeniusFrame(q.kappa)
    x0 = default_anchor(q)
    return NumericalFrame(q, x0, (x0, x0), controls)


# ---------------------------------------------------------------- descriptors


class ExtensionKind(str, enum.Enum):
    CLOSURE = "closure"
    THETA = "theta"


@dataclass(frozen=True)
class ExtensionDescriptor:
    """A self-adjoint extension: the closure (limit point at the left end) or
    the member of the one-parameter family fixed by ``theta`` in ``frame``."""

    q: Potential
    kind: ExtensionKind
    theta: BoundaryParameter | None = None
    frame: FrobeniusFrame | NumericalFrame | None = None

    def __post_init__(self):
        if self.kind is ExtensionKind.THETA and (self.theta is None or self.frame is None):
            raise ValidationError("theta extension needs a boundary parameter and a frame")
        if self.kind is ExtensionKind.CLOSURE and self.theta is not None:
            raise ValidationError("closure extension carries no boundary parameter")

    @property
    def boundary_solution(self) -> Combination:
        if self.kind is ExtensionKind.CLOSURE:
            raise InvalidRequestError("the closure has no boundary solution")
        f1, f2 = self.frame.solutions
        t = self.theta.theta
        return Combination(((math.cos(t), f1), (math.sin(t), f2)))

    def to_dict(self) -> dict:
        d = {"potential": potential_to_dict(self.q), "kind": self.kind.value}
        if self.kind is ExtensionKind.THETA:
            d["theta"] = self.theta.theta
            d["frame"] = self.frame.to_dict()
        return d


def closure_extension(q: Potential, controls: WeylControls = DEFAULT_WEYL) -> ExtensionDescriptor:
    """The unique extension of an essentially self-adjoint operator."""
    if not extension_structure(q, controls).essentially_self_adjoint:
        raise InvalidRequestError("operator is not essentially self-adjoint; supply a theta")
    return ExtensionDescriptor(q, ExtensionKind.CLOSURE)


def extension_from_theta(q: Potential, theta: BoundaryParameter | float, frame=None,
                         controls: WeylControls = DEFAULT_WEYL) -> ExtensionDescriptor:
    """Extension whose boundary solution is f1 cos(theta) + f2 sin(theta)."""
    if not isinstance(theta, BoundaryParameter):
        theta = BoundaryParameter(theta)
    if extension_structure(q, controls).essentially_self_adjoint:
        raise InvalidRequestError(
            "operator is essentially self-adjoint; its only extension is the closure")
    frame = frame if frame is not None else default_frame(q, controls.ivp)
    if frame.q != q:
        raise UsageError("frame belongs to a different potential")
    return ExtensionDescriptor(q, ExtensionKind.THETA, theta, frame)


def theta_decompose(f: Solution, f1: Solution, f2: Solution, x: float | None = None,
                    tol: float = 1e-12) -> tuple[float, BoundaryParameter]:
    """Write f = C (f1 cos t + f2 sin t) with t in [0, pi).

    The coefficients of f = C1 f1 + C2 f2 come from Wronskian ratios at ``x``;
    C is positive exactly when (C1, C2) lies in the closed upper half-plane
    {C2 > 0} union {C2 = 0, C1 > 0}.
    """
    if x is None:
        x = _common_point(f, f1, f2)
    w12 = float(wronskian(f1, f2, x))
    if abs(w12) < tol:
        raise DegenerateFrameError("frame solutions are linearly dependent")
    c1 = float(wronskian(f, f2, x)) / w12
    c2 = float(wronskian(f, f1, x)) / -w12
    if math.hypot(c1, c2) < tol:
        raise TrivialSolutionError("solution vanishes relative to the frame")
    return _polar(c1, c2)


def _polar(c1: float, c2: float) -> tuple[float, BoundaryParameter]:
    norm = math.hypot(c1, c2)
    # round-off must not flip the half-plane
    snap = 8.0 * np.finfo(float).eps * norm
    c1 = 0.0 if abs(c1) <= snap else c1
    c2 = 0.0 if abs(c2) <= snap else c2
    upper = c2 > 0 or (c2 == 0 and c1 > 0)
    C = norm if upper else -norm
    return C, BoundaryParameter.canonical(math.atan2(c2 / C, c1 / C))


def _common_point(*sols) -> float:
    lo = max(s.span[0] for s in sols)
    hi = min(s.span[1] for s in sols)
    if lo > hi:
        raise UsageError("solutions have no common sample range")
    if math.isinf(hi):
        return max(1.0, lo) if lo < 1.0 <= hi or lo >= 1.0 else lo
    if lo <= 1.0 <= hi and lo < hi:
        return 1.0
    return 0.5 * (lo + hi)


def extension_from_solution(q: Potential, f: Solution, frame=None,
                            controls: WeylControls = DEFAULT_WEYL) -> ExtensionDescriptor:
    """Extension L_q^f for a real nontrivial homogeneous solution f."""
    frame = frame if frame is not None else default_frame(q, controls.ivp)
    f1, f2 = frame.solutions
    _, theta = theta_decompose(f, f1, f2)
    return extension_from_theta(q, theta, frame, controls)


def extensions_equal(e1: ExtensionDescriptor, e2: ExtensionDescriptor, tol: float = 1e-9) -> bool:
    """True iff both describe the same self-adjoint operator."""
    if e1.q != e2.q:
        raise UsageError("extensions of different potentials cannot be compared")
    if e1.kind is not e2.kind:
        return False
    if e1.kind is ExtensionKind.CLOSURE:
        return True
    if e1.frame == e2.frame:
        return e1.theta.distance(e2.theta) <= tol
    f1, f2 = e1.frame.solutions
    _, t2 = theta_decompose(e2.boundary_solution, f1, f2)
    return e1.theta.distance(t2) <= tol


# ---------------------------------------------------------- sigma decomposition


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Real function g with g', g'' given as vectorized callables.

    ``grid`` holds the sample points where rho and sigma are reported; the
    quadrature of phi = -g'' + q g runs over the same grid.
    """

    value: Callable
    deriv: Callable
    second: Callable
    grid: np.ndarray

    __test__ = False  # not a pytest class

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise ValidationError("grid must be strictly increasing with >= 2 points")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_samples(cls, xs, g, dg, ddg) -> "TestFunction":
        """Samples of g, g', g''; g is cubic Hermite between samples, g'' linear."""
        from scipy.interpolate import CubicHermiteSpline

        xs = np.asarray(xs, dtype=float)
        spline = CubicHermiteSpline(xs, np.asarray(g, float), np.asarray(dg, float))
        dspline = spline.derivative()
        ddg = np.asarray(ddg, dtype=float)
        return cls(spline, dspline, lambda x: np.interp(x, xs, ddg), xs)


def cutoff(r, r0: float = 1.0, r1: float = 2.0):
    """Smooth step equal to 1 on (-inf, r0] and 0 on [r1, inf).

    Returns (tau, tau', tau'').
    """
    r = np.asarray(r, dtype=float)
    s = np.clip((r - r0) / (r1 - r0), 0.0, 1.0)
    # tau = F(1-s) / (F(1-s) + F(s)) with F(t) = exp(-1/t)
    inner = (s > 0) & (s < 1)
    tau = np.where(s <= 0, 1.0, 0.0)
    d1 = np.zeros_like(s)
    d2 = np.zeros_like(s)
    si = s[inner]
    a = np.exp(-1.0 / (1.0 - si))
    b = np.exp(-1.0 / si)
    da = -a / (1.0 - si) ** 2
    db = b / si**2
    dda = a * (1.0 / (1.0 - si) ** 4 - 2.0 / (1.0 - si) ** 3)
    ddb = b * (1.0 / si**4 - 2.0 / si**3)
    den = a + b
    tau_i = a / den
    dt = (da * den - a * (da + db)) / den**2
    # second derivative of a/(a+b)
    num = da * b - a * db
    dnum = dda * b - a * ddb
    ddt = (dnum * den - 2.0 * num * (da + db)) / den**3
    tau[inner] = tau_i
    scale = 1.0 / (r1 - r0)
    d1[inner] = dt * scale
    d2[inner] = ddt * scale**2
    return tau, d1, d2


def cutoff_times(f: Solution, grid, r0: float = 1.0, r1: float = 2.0) -> TestFunction:
    """g = tau f for a homogeneous (E=0) solution f and the cutoff tau.

    Such g lie in the maximal domain and l_q g vanishes near the left end.
    """
    q = f.potential

    def parts(x):
        tau, dtau, ddtau = cutoff(x, r0, r1)
        u, du = f.evaluate(x)
        ddu = (np.asarray(q(x)) - f.E) * u
        return tau, dtau, ddtau, u, du, ddu

    def value(x):
        tau, _, _, u, _, _ = parts(x)
        return tau * u

    def deriv(x):
        tau, dtau, _, u, du, _ = parts(x)
        return dtau * u + tau * du

    def second(x):
        tau, dtau, ddtau, u, du, ddu = parts(x)
        return ddtau * u + 2.0 * dtau * du + tau * ddu

    return TestFunction(value, deriv, second, grid)


@dataclass(frozen=True)
class SigmaControls:
    tol_sigma: float = 1e-8
    gauss_nodes: int = 16
    fit_points: int = 6
    fit_degree: int = 2
    vanish_tol: float = 1e-14
    theta_tol: float = 1e-6
    anchor: float | None = None


DEFAULT_SIGMA = SigmaControls()


@dataclass(frozen=True, eq=False)
class SigmaDecomposition:
    """rho_g and sigma_g on the grid, plus sigma's coordinates in the frame."""

    xs: np.ndarray
    g: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray
    dsigma: np.ndarray
    c1: float
    c2: float
    trivial: bool
    frame_solutions: tuple
    anchor: float
    C: float | None = None
    theta: BoundaryParameter | None = None

    @property
    def sigma_solution(self) -> Combination:
        """sigma_g as an exact combination of the frame solutions."""
        f1, f2 = self.frame_solutions
        return Combination(((self.c1, f1), (self.c2, f2)))

    @property
    def projection_defect(self) -> float:
        """Largest gap between sigma on the grid and its projection."""
        return float(np.max(np.abs(self.sigma - self.sigma_solution(self.xs))))


def _inner_integrals(phi, f1, f2, a, x_first, xs_fit, ctl: SigmaControls, scale):
    """int_a^x_first phi f_i for i = 1, 2."""
    vals = phi(xs_fit)
    if np.max(np.abs(vals)) <= ctl.vanish_tol * max(scale, 1.0):
        return 0.0, 0.0
    if not (isinstance(f1, FrobeniusSolution) and isinstance(f2, FrobeniusSolution) and a == 0.0):
        raise IntegrabilityError(
            "l_q g does not vanish near the singular endpoint and the frame has no closed form there")
    coef = np.polynomial.polynomial.polyfit(xs_fit, vals, ctl.fit_degree)
    out = []
    for f in (f1, f2):
        total = 0.0
        for j, cj in enumerate(coef):
            if cj == 0.0:
                continue
            if f.kappa == 0.0 and f.which == 2:
                s = j + 1.5
                total += cj * x_first**s * (math.log(x_first) / s - 1.0 / s**2)
                continue
            p = 0.5 + f.kappa if f.which == 1 else 0.5 - f.kappa
            s = j + p + 1.0
            if s <= 0:
                raise IntegrabilityError("int_a phi f diverges at the singular endpoint")
            total += cj * x_first**s / s
        out.append(total)
    return out[0], out[1]


def rho_sigma(g: TestFunction, q: Potential, f1: Solution, f2: Solution,
              controls: SigmaControls = DEFAULT_SIGMA) -> SigmaDecomposition:
    """Split g = rho_g + sigma_g relative to the frame (f1, f2) at E=0."""
    if f1.potential != q or f2.potential != q or f1.E != 0.0 or f2.E != 0.0:
        raise UsageError("frame must consist of E=0 solutions for q")
    xs = g.grid
    a = q.domain.a
    anchor = controls.anchor if controls.anchor is not None else float(np.median(xs))
    w = float(wronskian(f1, f2, anchor))
    if abs(w) < 1e-12:
        raise DegenerateFrameError(f"|W(f1, f2)| = {abs(w)} below tolerance")

    gv = np.asarray(g.value(xs), dtype=float)
    scale = float(np.max(np.abs(gv))) or 1.0

    def phi(x):
        return -np.asarray(g.second(x), float) + np.asarray(q(x), float) * np.asarray(g.value(x), float)

    nfit = min(controls.fit_points, len(xs))
    i1, i2 = _inner_integrals(phi, f1, f2, a, xs[0], xs[:nfit], controls, scale)

    nodes, weights = leggauss(controls.gauss_nodes)
    lo, hi = xs[:-1], xs[1:]
    half = 0.5 * (hi - lo)
    xq = (half[:, None] * nodes[None, :] + (0.5 * (hi + lo))[:, None])
    pq = phi(xq.ravel())
    u1 = f1(xq.ravel())
    u2 = f2(xq.ravel())
    seg1 = np.sum((weights[None, :] * (pq * u1).reshape(xq.shape)), axis=1) * half
    seg2 = np.sum((weights[None, :] * (pq * u2).reshape(xq.shape)), axis=1) * half
    I1 = i1 + np.concatenate([[0.0], np.cumsum(seg1)])
    I2 = i2 + np.concatenate([[0.0], np.cumsum(seg2)])

    F1, dF1 = f1.evaluate(xs)
    F2, dF2 = f2.evaluate(xs)
    rho = (F1 * I2 - F2 * I1) / w
    drho = (dF1 * I2 - dF2 * I1) / w
    sigma = gv - rho
    dsigma = np.asarray(g.deriv(xs), float) - drho

    s_a = float(np.interp(anchor, xs, sigma)) if anchor not in xs else float(sigma[xs == anchor][0])
    ds_a = float(np.interp(anchor, xs, dsigma)) if anchor not in xs else float(dsigma[xs == anchor][0])
    if anchor not in xs:
        # evaluate exactly at the anchor rather than interpolating
        k = int(np.searchsorted(xs, anchor))
        xa = np.array([anchor])
        seg_lo = xs[k - 1]
        hq = 0.5 * (anchor - seg_lo)
        xqa = hq * nodes + 0.5 * (anchor + seg_lo)
        pa = phi(xqa)
        ia1 = I1[k - 1] + hq * np.sum(weights * pa * f1(xqa))
        ia2 = I2[k - 1] + hq * np.sum(weights * pa * f2(xqa))
        a1, da1 = f1.evaluate(anchor)
        a2, da2 = f2.evaluate(anchor)
        s_a = float(g.value(xa)[0]) - (a1 * ia2 - a2 * ia1) / w
        ds_a = float(g.deriv(xa)[0]) - (da1 * ia2 - da2 * ia1) / w
    a1, da1 = f1.evaluate(anchor)
    a2, da2 = f2.evaluate(anchor)
    c1 = (s_a * da2 - ds_a * a2) / w
    c2 = -(s_a * da1 - ds_a * a1) / w

    trivial = abs(c1) < controls.tol_sigma * scale and abs(c2) < controls.tol_sigma * scale
    C = theta = None
    if not trivial:
        C, theta = _polar(c1, c2)
    return SigmaDecomposition(xs, gv, rho, sigma, dsigma, c1, c2, trivial, (f1, f2), anchor, C, theta)


class Membership(str, enum.Enum):
    IN_CLOSURE = "in_closure"
    IN_EXTENSION_ONLY = "in_extension_only"
    OUTSIDE = "outside"


def _frame_for(e: ExtensionDescriptor, g: TestFunction):
    frame = e.frame if e.frame is not None else default_frame(e.q)
    if isinstance(frame, NumericalFrame):
        frame = frame.covering(float(g.grid[0]), float(g.grid[-1]))
    return frame


def domain_membership(g: TestFunction, e: ExtensionDescriptor,
                      controls: SigmaControls = DEFAULT_SIGMA) -> Membership:
    """Where [g] sits relative to the closure domain and the domain of ``e``.

    A closure descriptor means the left end is limit point, so the maximal
    domain equals the closure domain and every admissible g lies in it.
    """
    if e.kind is ExtensionKind.CLOSURE:
        return Membership.IN_CLOSURE
    frame = _frame_for(e, g)
    f1, f2 = frame.solutions
    dec = rho_sigma(g, e.q, f1, f2, controls)
    if dec.trivial:
        return Membership.IN_CLOSURE
    if frame != e.frame:
        # express the boundary solution in the frame actually used
        _, target = theta_decompose(e.boundary_solution, f1, f2)
    else:
        target = e.theta
    return (Membership.IN_EXTENSION_ONLY if dec.theta.distance(target) <= controls.theta_tol
            else Membership.OUTSIDE)
