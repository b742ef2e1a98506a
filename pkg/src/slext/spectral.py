"""Negative eigenvalues of a self-adjoint extension by shooting.

The left solution carries the boundary condition: for the inverse-square
family it is seeded at a tiny radius from convergent Frobenius series at the
trial energy, whose leading terms are those of the boundary solution
psi1 cos(theta) + psi2 sin(theta).  The right solution is seeded far out on
the decaying branch.  Eigenvalues are the zeros of their scaled Wronskian at
a matching point.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import IvpControls, Trajectory, integrate_endpoint, solve_ivp
from .errors import (ConvergenceError, SlextError, UnsupportedConfigurationError,
                     ValidationError)
from .extensions import ExtensionDescriptor, ExtensionKind, FrobeniusFrame, NumericalFrame

__all__ = [
    "EnergyWindow",
    "SpectralControls",
    "EigenResult",
    "MatchingStates",
    "ShiftedSpectrum",
    "matching_states",
    "shoot_mismatch",
    "eigenvalues_below",
    "bound_state_oracle",
    "shifted_spectrum",
    "frobenius_series",
]

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class EnergyWindow:
    e_min: float
    e_max: float

    def __post_init__(self):
        if not (math.isfinite(self.e_min) and math.isfinite(self.e_max)):
            raise ValidationError("energy window bounds must be finite")
        if not self.e_min < self.e_max:
            raise ValidationError("energy window needs e_min < e_max")


SPECTRAL_IVP = IvpControls(rel_tol=1e-12, abs_tol=1e-14, eps_start=1e-300)
SCAN_IVP = IvpControls(rel_tol=1e-8, abs_tol=1e-12, eps_start=1e-300)


@dataclass(frozen=True)
class SpectralControls:
    """Shooting and root-finding settings.

    ``r_seed_factor`` and ``cutoff_factor`` are in units of the decay length
    1/sqrt(-E); ``cutoff`` overrides the right cutoff with a fixed radius.
    The energy mesh is scanned with the cheaper ``scan_ivp``; brackets are
    confirmed and refined with ``ivp``.
    """

    ivp: IvpControls = SPECTRAL_IVP
    scan_ivp: IvpControls = SCAN_IVP
    r_seed_factor: float = 1e-2
    cutoff_factor: float = 30.0
    cutoff: float | None = None
    min_decay: float = 5.0
    points_per_decade: int = 64
    bracket_width: float = 1e-12
    merge_tol: float = 1e-9
    residual_bound: float = 1e-5
    max_bisections: int = 200

    def __post_init__(self):
        if self.points_per_decade < 2 or self.r_seed_factor <= 0 or self.cutoff_factor <= 0:
            raise ValidationError("invalid spectral controls")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValidationError("cutoff must be positive")

    def provenance(self) -> dict:
        d = asdict(self)
        for key in ("ivp", "scan_ivp"):
            d[key] = {k: (v.value if hasattr(v, "value") else v)
                      for k, v in asdict(getattr(self, key)).items()}
        return d


DEFAULT_SPECTRAL = SpectralControls()


@dataclass(frozen=True, eq=False)
class EigenResult:
    """One eigenvalue; ``error`` is set (and E is the last bracket midpoint)
    when refinement failed."""

    E: float
    eigenfunction: Trajectory | None
    residual: float
    mismatch: float
    mismatch_history: tuple = ()
    R: float = math.nan
    r_seed: float = math.nan
    x_match: float = math.nan
    experimental: bool = False
    error: str | None = None

    def to_dict(self, samples: bool = False) -> dict:
        d = {"E": self.E, "residual": self.residual, "mismatch": self.mismatch,
             "R": self.R, "r_seed": self.r_seed, "x_match": self.x_match,
             "experimental": self.experimental, "error": self.error,
             "mismatch_history": [list(p) for p in self.mismatch_history]}
        if samples and self.eigenfunction is not None:
            f = self.eigenfunction
            d["eigenfunction"] = {"x": f.xs.tolist(), "u": f.us.tolist(), "du": f.dus.tolist()}
        return d


# ------------------------------------------------------------ series and oracle


def frobenius_series(kappa: float, which: int, E: float, r: float, max_terms: int = 400):
    """(u, u') at r of the solution of -u'' + (kappa^2 - 1/4)/r^2 u = E u with
    leading behaviour r^(1/2+kappa) (which=1) or r^(1/2-kappa) (which=2;
    r^(1/2) ln r when kappa=0)."""
    r = float(r)
    x = r * r
    if kappa == 0.0 and which == 2:
        a, b = 1.0, 0.0
        lg = math.log(r)
        su = lg
        sd = 0.5 * lg + 1.0
        xp = 1.0
        for k in range(1, max_terms):
            a = -E * a / (4.0 * k * k)
            b = -(E * b + 4.0 * k * a) / (4.0 * k * k)
            xp *= x
            p = 0.5 + 2 * k
            tu = xp * (a * lg + b)
            td = xp * (p * (a * lg + b) + a)
            su += tu
            sd += td
            if abs(tu) <= 1e-17 * abs(su) and abs(td) <= 1e-17 * abs(sd) and k > 2:
                break
        return math.sqrt(r) * su, sd / math.sqrt(r)
    nu = kappa if which == 1 else -kappa
    s = 0.5 + nu
    c = 1.0
    su, sd = 1.0, s
    xp = 1.0
    for k in range(1, max_terms):
        den = 4.0 * k * (k + nu)
        if den == 0.0:
            raise UnsupportedConfigurationError("resonant Frobenius exponent")
        c = -E * c / den
        xp *= x
        tu = c * xp
        su += tu
        sd += (s + 2 * k) * tu
        if abs(tu) <= 1e-17 * abs(su) and k > 2:
            break
    rs = r**s
    return rs * su, rs * sd / r


def bound_state_oracle(kappa: float, theta) -> float | None:
    """Negative eigenvalue of the (kappa, theta) extension, or None.

    Matching sqrt(r) K_nu(lambda r), nu = |kappa|, to the boundary solution
    gives (lambda/2)^(2 nu) = G cot(theta) for kappa > 0 and
    (lambda/2)^(2 nu) = G tan(theta) for kappa < 0, with
    G = Gamma(nu)/Gamma(-nu) < 0; for kappa = 0, lambda = 2 exp(cot(theta) - gamma).
    """
    t = float(getattr(theta, "theta", theta))
    if not -1.0 < kappa < 1.0:
        raise ValidationError("oracle needs |kappa| < 1")
    if not 0.0 <= t < math.pi:
        raise ValidationError("theta outside [0, pi)")
    if kappa == 0.0:
        if t == 0.0:
            return None
        lam = 2.0 * math.exp(math.cos(t) / math.sin(t) - EULER_GAMMA)
        return -lam * lam
    if not math.pi / 2 < t < math.pi:
        return None
    nu = abs(kappa)
    G = math.gamma(nu) / math.gamma(-nu)
    rhs = G * (math.cos(t) / math.sin(t) if kappa > 0 else math.tan(t))
    lam = 2.0 * rhs ** (1.0 / (2.0 * nu))
    return -lam * lam


@dataclass(frozen=True)
class ShiftedSpectrum:
    eigenvalues: list
    essential_bottom: float


def shifted_spectrum(channel_eigs, p: float) -> ShiftedSpectrum:
    """Spectrum of h + p^2: eigenvalues shifted, essential part [p^2, inf)."""
    p2 = float(p) ** 2
    return ShiftedSpectrum([float(E) + p2 for E in channel_eigs], p2)


# -------------------------------------------------------------------- shooting


@dataclass(frozen=True)
class _Setup:
    lam: float
    x_left: float
    u_left: tuple
    R: float
    u_right: tuple
    x_match: float
    experimental: bool


def _left_seed(e: ExtensionDescriptor, E: float, lam: float, ctl: SpectralControls):
    """Seed point and (u, u') for the boundary-condition side."""
    q = e.q
    A, c, grid, _ = q.kernel_terms()
    frob = len(grid) == 0 and q.domain.a == 0.0
    if e.kind is ExtensionKind.THETA and isinstance(e.frame, FrobeniusFrame):
        r0 = ctl.r_seed_factor / lam
        kappa, t = e.frame.kappa, e.theta.theta
        u1, d1 = frobenius_series(kappa, 1, E - c, r0)
        u2, d2 = frobenius_series(kappa, 2, E - c, r0)
        return r0, (math.cos(t) * u1 + math.sin(t) * u2, math.cos(t) * d1 + math.sin(t) * d2), False
    if e.kind is ExtensionKind.CLOSURE and frob and A >= -0.25:
        r0 = ctl.r_seed_factor / lam
        return r0, frobenius_series(math.sqrt(A + 0.25), 1, E - c, r0), False
    if e.kind is ExtensionKind.THETA and isinstance(e.frame, NumericalFrame):
        f = e.boundary_solution
        x0 = f.span[0]
        return x0, tuple(float(v) for v in f.evaluate(x0)), True
    # closure of a general potential: start from the left end of the data
    lo = q.domain.a if math.isfinite(q.domain.a) else -ctl.cutoff_factor / lam
    rng = q.table_range()
    if rng is not None:
        lo = max(lo, rng[0])
    x0 = lo + ctl.r_seed_factor / lam if math.isfinite(q.domain.a) else lo
    return x0, (0.0, 1.0), True


def _setup(e: ExtensionDescriptor, E: float, ctl: SpectralControls) -> _Setup:
    if not E < 0:
        raise UnsupportedConfigurationError("E >= 0 lies in the continuous spectrum; no decaying seed")
    q = e.q
    if math.isfinite(q.domain.b):
        raise UnsupportedConfigurationError("shooting needs an infinite right endpoint")
    lam = math.sqrt(-E)
    x_left, (ul, dul), experimental = _left_seed(e, E, lam, ctl)
    R = ctl.cutoff if ctl.cutoff is not None else ctl.cutoff_factor / lam
    if R <= x_left:
        raise UnsupportedConfigurationError(f"cutoff R={R} does not exceed the left seed {x_left}")
    k2 = float(q(R)) - E
    if k2 <= 0 or math.sqrt(k2) * R < ctl.min_decay:
        raise UnsupportedConfigurationError(
            f"cutoff R={R} too small: decay is not asymptotic (sqrt(q(R)-E)*R < {ctl.min_decay})")
    x_match = min(max(1.0 / lam, math.sqrt(x_left * R) if x_left > 0 else 1.0 / lam), 0.5 * R)
    if x_match <= x_left:
        x_match = 0.5 * (x_left + R)
    n = math.hypot(ul, dul * max(x_left, 1.0 / lam)) or 1.0
    return _Setup(lam, x_left, (ul / n, dul / n), R, (1.0, -math.sqrt(k2)), x_match, experimental)


@dataclass(frozen=True)
class MatchingStates:
    """Left and right solutions at the matching point."""

    x_match: float
    left: tuple
    right: tuple
    lam: float
    experimental: bool

    def mismatch(self, swap: bool = False) -> float:
        a, b = (self.right, self.left) if swap else (self.left, self.right)
        w = a[0] * b[1] - a[1] * b[0]
        na = math.hypot(a[0], a[1] / self.lam)
        nb = math.hypot(b[0], b[1] / self.lam)
        return w / (self.lam * na * nb)


def matching_states(e: ExtensionDescriptor, E: float,
                    controls: SpectralControls = DEFAULT_SPECTRAL) -> MatchingStates:
    s = _setup(e, E, controls)
    left = integrate_endpoint(e.q, E, s.x_left, *s.u_left, s.x_match, controls.ivp)
    right = integrate_endpoint(e.q, E, s.R, *s.u_right, s.x_match, controls.ivp)
    return MatchingStates(s.x_match, left, right, s.lam, s.experimental)


def shoot_mismatch(e: ExtensionDescriptor, E: float, controls: SpectralControls = DEFAULT_SPECTRAL,
                   swap: bool = False) -> float:
    """Scaled Wronskian W(u_left, u_right)(x_match) / (lambda |u_left| |u_right|).

    ``swap`` exchanges the Wronskian arguments, flipping the sign.
    """
    return matching_states(e, E, controls).mismatch(swap)


# ---------------------------------------------------------------- root finding


def _mesh(w: EnergyWindow, ppd: int) -> np.ndarray:
    lo, hi = -w.e_max, -w.e_min  # |E| range
    decades = math.log10(hi / lo)
    n = max(2, int(math.ceil(decades * ppd)) + 1)
    return -np.logspace(math.log10(lo), math.log10(hi), n)  # ascending |E|, descending E


def _refine(f, a, fa, b, fb, ctl: SpectralControls):
    history = [(a, fa), (b, fb)]
    for _ in range(ctl.max_bisections):
        width_ok = abs(b - a) <= max(ctl.bracket_width, 4 * np.spacing(max(abs(a), abs(b))))
        if width_ok:
            break
        m = 0.5 * (a + b)
        fm = f(m)
        history.append((m, fm))
        if fm == 0.0:
            return m, fm, history
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    else:
        raise ConvergenceError("bisection budget exhausted")
    if fb != fa:
        s = b - fb * (b - a) / (fb - fa)
        if min(a, b) <= s <= max(a, b):
            fs = f(s)
            history.append((s, fs))
            best = min(((a, fa), (b, fb), (s, fs)), key=lambda p: abs(p[1]))
            return best[0], best[1], history
    best = min(((a, fa), (b, fb)), key=lambda p: abs(p[1]))
    return best[0], best[1], history


_GL_N, _GL_W = leggauss(8)


def _eigenfunction(e: ExtensionDescriptor, E: float, ctl: SpectralControls):
    s = _setup(e, E, ctl)
    left = solve_ivp(e.q, E, s.x_left, *s.u_left, s.x_match, ctl.ivp)
    right = solve_ivp(e.q, E, s.R, *s.u_right, s.x_match, ctl.ivp)
    ul, dul = left.us[-1], left.dus[-1]
    ur, dur = right.us[0], right.dus[0]
    # least-squares factor putting the right piece onto the left one
    num = ul * ur + dul * dur / s.lam**2
    den = ur * ur + dur * dur / s.lam**2
    k = num / den
    xs = np.concatenate([left.xs, right.xs[1:]])
    us = np.concatenate([left.us, k * right.us[1:]])
    dus = np.concatenate([left.dus, k * right.dus[1:]])
    traj = Trajectory(xs, us, dus, E, e.q)
    lo, hi = xs[:-1], xs[1:]
    half = 0.5 * (hi - lo)
    xq = (half[:, None] * _GL_N + (0.5 * (hi + lo))[:, None]).ravel()
    norm2 = float(np.sum((_GL_W * traj(xq).reshape(-1, len(_GL_N)) ** 2).sum(axis=1) * half))
    c = 1.0 / math.sqrt(norm2)
    if us[int(np.argmax(np.abs(us)))] < 0:
        c = -c
    traj = Trajectory(xs, us * c, dus * c, E, e.q)
    return traj, s


def _residual(traj: Trajectory) -> float:
    """Relative L2 size of -u'' + (q - E) u at interval midpoints.

    u'' is the derivative of the cubic Hermite interpolant of (u', u'') and
    is compared with (q - E) u from the interpolant of (u, u').
    """
    xs, dus = traj.xs, traj.dus
    ddus = traj.ddus
    h = np.diff(xs)
    # derivative of the Hermite cubic at t = 1/2
    d_mid = 1.5 * (dus[1:] - dus[:-1]) / h - 0.25 * (ddus[:-1] + ddus[1:])
    xm = 0.5 * (xs[:-1] + xs[1:])
    um = traj(xm)
    rhs = (np.asarray(traj.potential(xm)) - traj.E) * um
    num = float(np.sum(h * (d_mid - rhs) ** 2))
    den = float(np.sum(h * rhs**2))
    return math.sqrt(num / den) if den > 0 else math.inf


def eigenvalues_below(e: ExtensionDescriptor, w: EnergyWindow,
                      controls: SpectralControls = DEFAULT_SPECTRAL) -> list[EigenResult]:
    """All zeros of the mismatch in the window, sorted ascending."""
    if not w.e_max < 0:
        raise ValidationError("energy window must lie below 0 (e_max < 0)")
    ctl = controls
    mesh = _mesh(w, ctl.points_per_decade)

    def f(E):
        return shoot_mismatch(e, E, ctl)

    scan = replace(ctl, ivp=ctl.scan_ivp)
    vals = np.array([shoot_mismatch(e, E, scan) for E in mesh])
    exact: dict[float, float] = {}

    def g(i):
        E = float(mesh[i])
        if E not in exact:
            exact[E] = f(E)
        return exact[E]

    results: list[EigenResult] = []
    for i in range(len(mesh) - 1):
        if vals[i] == 0.0 and i > 0:
            continue  # counted as the right end of the previous bracket
        if not ((vals[i] < 0) != (vals[i + 1] < 0) or vals[i] == 0.0 or vals[i + 1] == 0.0):
            continue
        # confirm at full accuracy; a scan sign change next to a mesh point may shift by one cell
        bracket = None
        for j in (i, i - 1, i + 1):
            if 0 <= j < len(mesh) - 1:
                fa, fb = g(j), g(j + 1)
                if (fa < 0) != (fb < 0) or fa == 0.0 or fb == 0.0:
                    bracket = (float(mesh[j]), fa, float(mesh[j + 1]), fb)
                    break
        if bracket is None:
            continue
        a, fa, b, fb = bracket
        try:
            if fa == 0.0 or fb == 0.0:
                E, m = (a, fa) if fa == 0.0 else (b, fb)
                hist = [(a, fa), (b, fb)]
            else:
                E, m, hist = _refine(f, a, fa, b, fb, ctl)
            traj, s = _eigenfunction(e, E, ctl)
            res = _residual(traj)
            err = None if res <= ctl.residual_bound else f"residual {res:.3g} above bound"
            results.append(EigenResult(float(E), traj, res, float(m), tuple(hist), s.R, s.x_left,
                                       s.x_match, s.experimental, err))
        except SlextError as exc:
            results.append(EigenResult(float(0.5 * (a + b)), None, math.nan, math.nan,
                                       ((a, fa), (b, fb)), error=str(exc)))
    results.sort(key=lambda r: r.E)
    merged: list[EigenResult] = []
    for r in results:
        if merged and abs(r.E - merged[-1].E) < ctl.merge_tol:
            if abs(r.mismatch) < abs(merged[-1].mismatch):
                merged[-1] = r
            continue
        merged.append(r)
    return merged
