"""Successive approximations for -u'' + (q - E) u = 0.

On a segment starting at s the solution is the fixed point of

    f(x) = u(s) + u'(s) (x - s) + int_s^x dx' int_s^x' v(t) f(t) dt,   v = q - E,

and the iteration error shrinks at least by the factor (x - s) int_s^x |v|
per sweep.  The span is cut into segments on which that factor stays below
``controls.picard_contraction``; each segment is discretised on
Chebyshev-Lobatto nodes, where the double integral is applied spectrally.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss

from ..errors import ConvergenceError
from .solutions import Trajectory

NODES = 24
_MAX_SEGMENTS = 200_000


@lru_cache(maxsize=None)
def _cheb_setup(n: int):
    t = -np.cos(np.pi * np.arange(n) / (n - 1))
    V = C.chebvander(t, n - 1)
    B = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        B[:, k] = C.chebval(t, C.chebint(e, lbnd=-1))
    # Q @ f = int_{-1}^{t_j} f for f sampled at the nodes
    Q = B @ np.linalg.inv(V)
    t.setflags(write=False)
    Q.setflags(write=False)
    return t, Q


def _abs_integral(q, E, lo, hi):
    g, w = leggauss(32)
    x = 0.5 * (hi - lo) * g + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.sum(w * np.abs(np.asarray(q(x)) - E)))


def _segments(q, E, x0, x1, controls):
    """Breakpoints from x0 to x1 honouring the contraction bound."""
    lo, hi = min(x0, x1), max(x0, x1)
    cuts = [lo, hi]
    _, _, grid, _ = q.kernel_terms()
    cuts += [g for g in grid if lo < g < hi]
    cuts = sorted(set(cuts))
    out = []
    stack = list(zip(cuts[:-1], cuts[1:]))[::-1]
    while stack:
        a, b = stack.pop()
        length = b - a
        if (length * _abs_integral(q, E, a, b) < controls.picard_contraction
                and length <= controls.max_step):
            out.append((a, b))
        else:
            m = 0.5 * (a + b)
            stack.append((m, b))
            stack.append((a, m))
        if len(out) + len(stack) > _MAX_SEGMENTS:
            raise ConvergenceError("Picard segmentation did not terminate")
    pts = [out[0][0]] + [b for _, b in out]
    return pts if x1 > x0 else pts[::-1]


def picard_solve(q, E, x0, u0, du0, x1, controls) -> Trajectory:
    t, Q = _cheb_setup(NODES)
    pts = _segments(q, E, x0, x1, controls)
    xs_all, us_all, dus_all = [np.array([x0])], [np.array([u0])], [np.array([du0])]
    u_s, du_s = float(u0), float(du0)
    tol = 0.1 * controls.rel_tol
    for s, e in zip(pts[:-1], pts[1:]):
        half = 0.5 * (e - s)
        x = s + (t + 1.0) * half
        v = np.asarray(q(x)) - E
        J = half * Q
        f0 = u_s + du_s * (x - s)
        f = f0
        prev_delta = np.inf
        growth = 0
        for _ in range(controls.picard_max_sweeps):
            inner = J @ (v * f)
            f_new = f0 + J @ inner
            delta = np.max(np.abs(f_new - f))
            f = f_new
            scale = max(np.max(np.abs(f)), abs(du_s) * abs(e - s), 1e-300)
            if delta <= tol * scale:
                break
            growth = growth + 1 if delta >= prev_delta else 0
            if growth >= 3:
                raise ConvergenceError(f"Picard iteration not contracting on [{s}, {e}]")
            prev_delta = delta
        else:
            raise ConvergenceError(
                f"Picard iteration did not converge in {controls.picard_max_sweeps} sweeps on [{s}, {e}]")
        df = du_s + J @ (v * f)
        xs_all.append(x[1:])
        us_all.append(f[1:])
        dus_all.append(df[1:])
        u_s, du_s = float(f[-1]), float(df[-1])
    xs, us, dus = (np.concatenate(a) for a in (xs_all, us_all, dus_all))
    if x1 < x0:
        xs, us, dus = xs[::-1], us[::-1], dus[::-1]
    return Trajectory(xs, us, dus, E, q)
