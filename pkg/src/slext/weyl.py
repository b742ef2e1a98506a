"""Limit-point / limit-circle classification of the endpoints.

Analytic verdicts cover potentials of the form A/x^2 + c (the inverse-square
family, constants, and their sums).  Everything else goes through a
numerical test: a fundamental system built at an anchor is continued toward
the endpoint over a geometric window sequence and the windowed integrals
int |u|^2 of both solutions are watched.  Once the ratios of consecutive
window integrals have settled, a ratio below ``1 - convergence_margin`` means
the series of windows converges; a ratio at or above ``1 - divergence_margin``
means it diverges.  Anything in between is reported as inconclusive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import (DEFAULT_CONTROLS, IvpControls, Potential, Tabulated, Sum, extend_trajectory,
                   fundamental_system)
from .errors import ClassificationError, IntegrationError, UnsupportedConfigurationError

__all__ = [
    "Endpoint",
    "Verdict",
    "ClassificationMethod",
    "StructureKind",
    "WeylControls",
    "EndpointClassification",
    "ExtensionStructure",
    "classify_endpoint",
    "extension_structure",
    "default_anchor",
]


class Endpoint(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Verdict(str, enum.Enum):
    LPC = "LPC"
    LCC = "LCC"


class ClassificationMethod(str, enum.Enum):
    AUTO = "auto"
    ANALYTIC = "analytic"
    NUMERICAL = "numerical"


class StructureKind(str, enum.Enum):
    ESSENTIALLY_SELF_ADJOINT = "essentially_self_adjoint"
    ONE_PARAMETER_FAMILY = "one_parameter_family"


@dataclass(frozen=True)
class WeylControls:
    """Settings of the numerical window test.

    Windows shrink toward a finite endpoint as x_k = a + (x0 - a) ratio^k and
    grow toward an infinite one as x_k = x0 * 2^k.
    """

    ivp: IvpControls = DEFAULT_CONTROLS
    window_ratio: float = 0.5
    max_windows: int = 60
    settle_windows: int = 3
    ratio_agreement: float = 1e-3
    convergence_margin: float = 1e-3
    divergence_margin: float = 1e-4
    blowup_ratio: float = 10.0
    growth_ratio: float = 1.5
    anchor: float | None = None


DEFAULT_WEYL = WeylControls()


@dataclass(frozen=True)
class EndpointClassification:
    endpoint: Endpoint
    verdict: Verdict
    method: ClassificationMethod
    diagnostics: dict | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = {"endpoint": self.endpoint.value, "verdict": self.verdict.value,
             "method": self.method.value}
        if self.diagnostics is not None:
            d["diagnostics"] = self.diagnostics
        return d


@dataclass(frozen=True)
class ExtensionStructure:
    kind: StructureKind
    left: EndpointClassification
    right: EndpointClassification

    @property
    def essentially_self_adjoint(self) -> bool:
        return self.kind is StructureKind.ESSENTIALLY_SELF_ADJOINT


def _analytic(q: Potential, endpoint: Endpoint) -> Verdict | None:
    if isinstance(q, Tabulated) or (isinstance(q, Sum) and q.table_range() is not None):
        return None
    A, _, _, _ = q.kernel_terms()
    e = q.domain.a if endpoint is Endpoint.LEFT else q.domain.b
    if math.isinf(e):
        # A/x^2 + c is bounded at infinity
        return Verdict.LPC
    if e == 0.0 and A != 0.0:
        # solutions ~ x^(1/2 +- kappa) with kappa^2 = A + 1/4
        return Verdict.LCC if A < 0.75 else Verdict.LPC
    return Verdict.LCC


def default_anchor(q: Potential) -> float:
    a, b = q.domain.a, q.domain.b
    rng = q.table_range()
    if rng is not None:
        a, b = max(a, rng[0]), min(b, rng[1])
    if math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(a):
        return a + 1.0
    if math.isfinite(b):
        return b - 1.0
    return 0.0


def _windows(q: Potential, endpoint: Endpoint, x0: float, ctl: WeylControls):
    a, b = q.domain.a, q.domain.b
    k = np.arange(ctl.max_windows + 1, dtype=float)
    if endpoint is Endpoint.LEFT:
        if math.isfinite(a):
            return a + (x0 - a) * ctl.window_ratio**k
        base = x0 if x0 < 0 else -1.0
        return np.concatenate([[x0], base * 2.0 ** (k + 1)])[: ctl.max_windows + 1]
    if math.isfinite(b):
        return b - (b - x0) * ctl.window_ratio**k
    base = x0 if x0 > 0 else 1.0
    return np.concatenate([[x0], base * 2.0 ** (k + 1)])[: ctl.max_windows + 1]


_GL_NODES, _GL_WEIGHTS = leggauss(24)


def _window_integral(f, lo, hi):
    x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.sum(_GL_WEIGHTS * f(x) ** 2))


def _numerical(q: Potential, E: float, endpoint: Endpoint, ctl: WeylControls):
    x0 = ctl.anchor if ctl.anchor is not None else default_anchor(q)
    xs = _windows(q, endpoint, x0, ctl)
    if xs[1] == xs[0]:
        raise ClassificationError("degenerate window sequence")
    lo, hi = sorted((xs[0], xs[1]))
    f1, f2 = fundamental_system(q, E, x0, ctl.ivp, span=(lo, hi))
    sols = [f1, f2]
    integrals: list[list[float]] = [[], []]
    diag = {"anchor": x0, "windows": [], "integrals": integrals, "ratios": [[], []]}
    rng = q.table_range()
    state = [None, None]
    for k in range(ctl.max_windows):
        x_near, x_far = xs[k], xs[k + 1]
        if rng is not None and not rng[0] <= x_far <= rng[1]:
            break
        try:
            sols = [extend_trajectory(f, x_far, ctl.ivp) for f in sols]
        except IntegrationError:
            break
        lo, hi = sorted((x_near, x_far))
        diag["windows"].append([float(lo), float(hi)])
        for i, f in enumerate(sols):
            integrals[i].append(_window_integral(f, lo, hi))
            if len(integrals[i]) >= 2:
                diag["ratios"][i].append(integrals[i][-1] / integrals[i][-2])
        for i in range(2):
            state[i] = _judge(diag["ratios"][i], integrals[i], ctl)
        if "diverges" in state:
            return Verdict.LPC, diag
        if all(s == "converges" for s in state):
            return Verdict.LCC, diag
        if not all(np.isfinite(v) for v in integrals[0] + integrals[1]):
            break
    diag["state"] = list(state)
    raise ClassificationError(
        f"inconclusive window evidence at the {endpoint.value} endpoint", diagnostics=diag)


def _judge(ratios, integrals, ctl: WeylControls) -> str | None:
    n = ctl.settle_windows
    if len(ratios) >= n and all(r > ctl.blowup_ratio for r in ratios[-n:]):
        return "diverges"
    # sustained clear growth; the first windows near the anchor are skipped
    if len(ratios) >= n + 3 and all(r > ctl.growth_ratio for r in ratios[-(n + 1):]):
        return "diverges"
    if not np.isfinite(integrals[-1]):
        return "diverges"
    if len(ratios) < n + 1:
        return None
    last = np.array(ratios[-(n + 1):])
    mean = float(np.mean(last))
    if np.max(np.abs(last - mean)) > ctl.ratio_agreement * max(1.0, mean):
        return None
    if mean >= 1.0 - ctl.divergence_margin:
        return "diverges"
    if mean < 1.0 - ctl.convergence_margin:
        return "converges"
    return "inconclusive"


def classify_endpoint(q: Potential, E: float = 0.0, endpoint: Endpoint | str = Endpoint.LEFT,
                      controls: WeylControls = DEFAULT_WEYL,
                      method: ClassificationMethod | str = ClassificationMethod.AUTO
                      ) -> EndpointClassification:
    """Limit-point or limit-circle verdict at one endpoint of ``q.domain``.

    The verdict does not depend on ``E``; the numerical path solves at the
    given ``E`` (0 by default).
    """
    endpoint = Endpoint(endpoint)
    method = ClassificationMethod(method)
    if method is not ClassificationMethod.NUMERICAL:
        verdict = _analytic(q, endpoint)
        if verdict is not None:
            return EndpointClassification(endpoint, verdict, ClassificationMethod.ANALYTIC)
        if method is ClassificationMethod.ANALYTIC:
            raise UnsupportedConfigurationError(
                f"no analytic classification registered for {type(q).__name__}")
    verdict, diag = _numerical(q, E, endpoint, controls)
    return EndpointClassification(endpoint, verdict, ClassificationMethod.NUMERICAL, diag)


def extension_structure(q: Potential, controls: WeylControls = DEFAULT_WEYL,
                        method: ClassificationMethod | str = ClassificationMethod.AUTO
                        ) -> ExtensionStructure:
    """Essentially self-adjoint (LPC at the left end) or a one-parameter family.

    The right endpoint must be limit point.
    """
    right = classify_endpoint(q, 0.0, Endpoint.RIGHT, controls, method)
    if right.verdict is Verdict.LCC:
        raise UnsupportedConfigurationError("right endpoint is limit circle; only LPC is supported")
    left = classify_endpoint(q, 0.0, Endpoint.LEFT, controls, method)
    kind = (StructureKind.ESSENTIALLY_SELF_ADJOINT if left.verdict is Verdict.LPC
            else StructureKind.ONE_PARAMETER_FAMILY)
    return ExtensionStructure(kind, left, right)
