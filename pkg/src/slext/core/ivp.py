"""Initial-value problems for -u'' + (q - E) u = 0."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, DomainError, IntegrationError, ValidationError
from . import _dopri
from .potential import Potential
from .solutions import Trajectory

__all__ = [
    "Method",
    "IvpControls",
    "solve_ivp",
    "extend_trajectory",
    "fundamental_system",
    "integrate_endpoint",
]


class Method(str, enum.Enum):
    RK = "rk"
    PICARD = "picard"


@dataclass(frozen=True)
class IvpControls:
    """Integrator settings.

    ``eps_start`` is the closest a starting point may lie to a finite
    endpoint.  ``picard_contraction`` bounds (segment length) * int |q - E|
    on every Picard segment.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_step: float = math.inf
    method: Method = Method.RK
    picard_max_sweeps: int = 80
    picard_contraction: float = 0.5
    eps_start: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0 and self.eps_start > 0):
            raise ValidationError("tolerances and max_step must be positive")
        if self.picard_max_sweeps < 1 or not 0 < self.picard_contraction < 1:
            raise ValidationError("invalid Picard settings")


DEFAULT_CONTROLS = IvpControls()

_STATUS_ERRORS = {
    _dopri.NONFINITE: (IntegrationError, "non-finite solution values; q not integrable on the span?"),
    _dopri.UNDERFLOW: (ConvergenceError, "step size underflow"),
    _dopri.BUDGET: (ConvergenceError, "step budget exhausted"),
}


def _check_points(q: Potential, x0: float, x_target: float, eps_start: float):
    dom = q.domain
    for name, x in (("x0", x0), ("x_target", x_target)):
        if not dom.contains(x):
            raise DomainError(f"{name}={x} outside the domain ({dom.a}, {dom.b})")
    if (dom.left_finite and x0 - dom.a < eps_start) or (dom.right_finite and dom.b - x0 < eps_start):
        raise DomainError(f"x0={x0} is closer than {eps_start} to an endpoint")
    rng = q.table_range()
    if rng is not None:
        lo, hi = min(x0, x_target), max(x0, x_target)
        if lo < rng[0] or hi > rng[1]:
            raise DomainError("integration span leaves the tabulated range")


def _run(q, E, x0, u0, du0, x1, controls, record):
    A, c, grid, vals = q.kernel_terms()
    # stop at table nodes: the interpolated q has kinks there
    inner = grid[(grid > min(x0, x1)) & (grid < max(x0, x1))]
    stops = list(inner if x1 > x0 else inner[::-1]) + [x1]
    parts = []
    xa, ua, dua = float(x0), float(u0), float(du0)
    for xb in stops:
        xs, us, dus, n, status = _dopri.integrate(
            float(A), float(c), grid, vals, float(E), xa, ua, dua, float(xb),
            controls.rel_tol, controls.abs_tol, float(controls.max_step), record)
        if status != _dopri.OK:
            cls, msg = _STATUS_ERRORS[status]
            raise cls(f"{msg} (E={E}, from {x0} toward {x1})")
        parts.append((xs[:n], us[:n], dus[:n]) if not parts else (xs[1:n], us[1:n], dus[1:n]))
        xa, ua, dua = float(xb), float(us[n - 1]), float(dus[n - 1])
    if len(parts) == 1:
        return parts[0]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(3))


def integrate_endpoint(q, E, x0, u0, du0, x1, controls=DEFAULT_CONTROLS):
    """Final state ``(u(x1), u'(x1))`` without storing the trajectory."""
    _check_points(q, x0, x1, 0.0)
    _, us, dus = _run(q, E, x0, u0, du0, x1, controls, False)
    return float(us[-1]), float(dus[-1])


def solve_ivp(q: Potential, E: float, x0: float, u0: float, du0: float, x_target: float,
              controls: IvpControls = DEFAULT_CONTROLS) -> Trajectory:
    """Solve -u'' + q u = E u with u(x0)=u0, u'(x0)=du0 up to ``x_target``.

    The target may lie on either side of ``x0``; the returned trajectory is
    always sorted by increasing x.
    """
    _check_points(q, x0, x_target, controls.eps_start)
    if x0 == x_target:
        raise ValidationError("x_target must differ from x0")
    if controls.method is Method.PICARD:
        from .picard import picard_solve

        return picard_solve(q, E, x0, u0, du0, x_target, controls)
    xs, us, dus = _run(q, E, x0, u0, du0, x_target, controls, True)
    if x_target < x0:
        xs, us, dus = xs[::-1], us[::-1], dus[::-1]
    return Trajectory(xs.copy(), us.copy(), dus.copy(), E, q)


def extend_trajectory(traj: Trajectory, x_target: float,
                      controls: IvpControls = DEFAULT_CONTROLS) -> Trajectory:
    """Continue ``traj`` from its nearest end sample up to ``x_target``."""
    lo, hi = traj.span
    if lo <= x_target <= hi:
        return traj
    q, E = traj.potential, traj.E
    if x_target > hi:
        _check_points(q, hi, x_target, 0.0)
        xs, us, dus = _run(q, E, hi, traj.us[-1], traj.dus[-1], x_target, controls, True)
        return Trajectory(np.concatenate([traj.xs, xs[1:]]), np.concatenate([traj.us, us[1:]]),
                          np.concatenate([traj.dus, dus[1:]]), E, q)
    _check_points(q, lo, x_target, 0.0)
    xs, us, dus = _run(q, E, lo, traj.us[0], traj.dus[0], x_target, controls, True)
    return Trajectory(np.concatenate([xs[:0:-1], traj.xs]), np.concatenate([us[:0:-1], traj.us]),
                      np.concatenate([dus[:0:-1], traj.dus]), E, q)


def _two_sided(q, E, x0, u0, du0, lo, hi, controls):
    parts = []
    if lo < x0:
        parts.append(solve_ivp(q, E, x0, u0, du0, lo, controls))
    if hi > x0:
        parts.append(solve_ivp(q, E, x0, u0, du0, hi, controls))
    if len(parts) == 1:
        return parts[0]
    left, right = parts
    return Trajectory(np.concatenate([left.xs, right.xs[1:]]), np.concatenate([left.us, right.us[1:]]),
                      np.concatenate([left.dus, right.dus[1:]]), E, q)


def fundamental_system(q: Potential, E: float, x0: float, controls: IvpControls = DEFAULT_CONTROLS,
                       span: tuple[float, float] | None = None) -> tuple[Trajectory, Trajectory]:
    """Canonical pair f1, f2 with f1(x0)=f2'(x0)=1 and f1'(x0)=f2(x0)=0.

    ``span`` is the sampled range (default: [x0/2, 2 x0] clipped to the
    domain, or x0 -/+ 1 when x0 <= 0); use :func:`extend_trajectory` to reach
    further toward either endpoint.
    """
    if span is None:
        span = _default_span(q, x0)
    lo, hi = float(span[0]), float(span[1])
    if not lo <= x0 <= hi or lo == hi:
        raise ValidationError("span must contain x0 and be nondegenerate")
    f1 = _two_sided(q, E, x0, 1.0, 0.0, lo, hi, controls)
    if controls.method is Method.PICARD:
        return f1, _two_sided(q, E, x0, 0.0, 1.0, lo, hi, controls)
    return _unimodular_pair(q, E, x0, f1.xs, controls)


def _unimodular_pair(q, E, x0, mesh, controls):
    """Canonical pair recorded on the sorted ``mesh`` (which contains x0).

    Each step propagator of (u, u') is a 2x2 matrix of determinant 1 for the
    exact flow; rescaling the computed one to unit determinant keeps
    W(f1, f2) = 1 at every sample up to round-off, whatever the growth of the
    solutions.  The rescaling changes the values by the size of the local
    error only.
    """
    n = len(mesh)
    Y = np.empty((n, 2, 2))
    i0 = int(np.searchsorted(mesh, x0))
    Y[i0] = np.eye(2)
    for step in (1, -1):
        i = i0
        while 0 <= i + step < n:
            xa, xb = float(mesh[i]), float(mesh[i + step])
            M = np.empty((2, 2))
            for j, (u0, du0) in enumerate(((1.0, 0.0), (0.0, 1.0))):
                _, u, du = _run(q, E, xa, u0, du0, xb, controls, False)
                M[0, j], M[1, j] = u[-1], du[-1]
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            if not det > 0:
                raise IntegrationError(f"degenerate step propagator on [{xa}, {xb}]")
            Y[i + step] = (M / math.sqrt(det)) @ Y[i]
            i += step
    xs = np.array(mesh, dtype=float)
    f1 = Trajectory(xs, Y[:, 0, 0].copy(), Y[:, 1, 0].copy(), E, q)
    f2 = Trajectory(xs.copy(), Y[:, 0, 1].copy(), Y[:, 1, 1].copy(), E, q)
    return f1, f2


def _default_span(q, x0):
    dom = q.domain
    if x0 > 0:
        lo, hi = 0.5 * x0, 2.0 * x0
    else:
        lo, hi = x0 - 1.0, x0 + 1.0
    width = 0.25 * min(x0 - dom.a, dom.b - x0)
    lo = max(lo, x0 - width) if dom.left_finite else lo
    hi = min(hi, x0 + width) if dom.right_finite else hi
    rng = q.table_range()
    if rng is not None:
        lo, hi = max(lo, rng[0]), min(hi, rng[1])
    return lo, hi
