"""Symmetry-preserving extension families and their channel-wise spectra."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import InverseSquare
from ..errors import SlextError, ValidationError
from ..extensions import ExtensionDescriptor, ExtensionKind, FrobeniusFrame
from ..extensions import BoundaryParameter
from ..spectral import DEFAULT_SPECTRAL, EnergyWindow, SpectralControls, eigenvalues_below
from .flux import FluxParameter, singular_channels
from .tau import TauSpec

__all__ = ["ABFamilySpec", "ChannelCurve", "ABSpectrumReport", "build_family", "ab_spectrum",
           "DEFAULT_WINDOW", "M_MAX"]

M_MAX = 8
DEFAULT_WINDOW = EnergyWindow(-1e3, -1e-8)


@dataclass(frozen=True)
class ABFamilySpec:
    """Flux plus one tau map per singular channel, in increasing channel order."""

    flux: FluxParameter
    taus: tuple

    def __post_init__(self):
        if not isinstance(self.flux, FluxParameter):
            object.__setattr__(self, "flux", FluxParameter.from_value(self.flux))
        taus = tuple(self.taus)
        need = len(singular_channels(self.flux))
        if len(taus) != need:
            raise ValidationError(
                f"flux {self.flux.phi} has {need} singular channel(s); got {len(taus)} tau map(s)")
        if not all(isinstance(t, TauSpec) for t in taus):
            raise ValidationError("tau maps must be TauSpec instances")
        object.__setattr__(self, "taus", taus)

    @property
    def channels(self) -> tuple[int, ...]:
        return singular_channels(self.flux)

    def tau_for(self, m: int) -> TauSpec:
        return self.taus[self.channels.index(m)]

    def shifted(self, k: int) -> "ABFamilySpec":
        """Same family at flux phi + k; channel m corresponds to m + k."""
        return ABFamilySpec(self.flux.shifted(k), self.taus)

    def to_dict(self) -> dict:
        return {"flux": self.flux.to_dict(),
                "taus": [dict(m=m, **t.to_dict()) for m, t in zip(self.channels, self.taus)]}


def _descriptor(flux: FluxParameter, m: int, theta: float | None) -> ExtensionDescriptor:
    kappa = flux.kappa(m)
    q = InverseSquare(kappa)
    if theta is None:
        return ExtensionDescriptor(q, ExtensionKind.CLOSURE)
    return ExtensionDescriptor(q, ExtensionKind.THETA, BoundaryParameter(theta), FrobeniusFrame(kappa))


def build_family(spec: ABFamilySpec, p_grid, m_max: int = M_MAX) -> dict:
    """(m, p) -> extension for all m with |m - phi| <= m_max."""
    out = {}
    sing = spec.channels
    lo = -m_max + spec.flux.n
    ms = [m for m in range(lo - 1, spec.flux.n + m_max + 2) if abs(spec.flux.kappa(m)) <= m_max]
    for p in p_grid:
        p = float(p)
        for m in ms:
            theta = spec.tau_for(m)(p) if m in sing else None
            out[(m, p)] = _descriptor(spec.flux, m, theta)
    return out


@dataclass(frozen=True)
class ChannelCurve:
    """Bound-state data of one singular channel along the p-grid.

    ``channel_eigs[i]`` are the eigenvalues e_m(p_i) of the radial extension
    and ``energies[i]`` the shifted values e_m(p_i) + p_i^2.
    """

    m: int
    kappa: float
    taus: tuple
    channel_eigs: tuple
    energies: tuple
    residuals: tuple
    errors: tuple


@dataclass(frozen=True)
class ABSpectrumReport:
    spec: ABFamilySpec
    p_grid: tuple
    window: EnergyWindow
    curves: tuple
    essential_bottoms: tuple

    def to_dict(self) -> dict:
        return {
            "family": self.spec.to_dict(),
            "p_grid": list(self.p_grid),
            "window": {"e_min": self.window.e_min, "e_max": self.window.e_max},
            "essential_bottoms": list(self.essential_bottoms),
            "channels": [
                {"m": c.m, "kappa": c.kappa, "tau": list(c.taus),
                 "channel_eigenvalues": [list(e) for e in c.channel_eigs],
                 "energies": [list(e) for e in c.energies],
                 "residuals": [list(r) for r in c.residuals],
                 "errors": [list(e) for e in c.errors]}
                for c in self.curves],
        }

    def rows(self) -> list[tuple]:
        """CSV rows (m, p, E, kind) ordered by p, then bound states by m."""
        out = []
        for i, p in enumerate(self.p_grid):
            out.append(("", p, self.essential_bottoms[i], "essential_bottom"))
            for c in self.curves:
                for E in c.energies[i]:
                    out.append((c.m, p, E, "bound"))
        return out


def ab_spectrum(spec: ABFamilySpec, p_grid, window: EnergyWindow = DEFAULT_WINDOW,
                controls: SpectralControls = DEFAULT_SPECTRAL) -> ABSpectrumReport:
    """Bound states of every singular channel, shifted by p^2, on the grid.

    Closure channels (|m - phi| >= 1) have no spectrum below p^2 and add only
    the essential bottom.  Identical channel problems (same kappa and tau) are
    solved once.
    """
    if not window.e_max < 0:
        raise ValidationError("channel search window must lie below 0")
    p_grid = tuple(float(p) for p in p_grid)
    memo: dict = {}
    curves = []
    for m, tau in zip(spec.channels, spec.taus):
        kappa = spec.flux.kappa(m)
        taus, eigs, energies, residuals, errors = [], [], [], [], []
        for p in p_grid:
            theta = tau(p)
            key = (kappa, theta)
            if key not in memo:
                try:
                    res = eigenvalues_below(_descriptor(spec.flux, m, theta), window, controls)
                    memo[key] = ([r.E for r in res if r.error is None],
                                 [r.residual for r in res if r.error is None],
                                 [r.error for r in res if r.error is not None])
                except SlextError as exc:
                    memo[key] = ([], [], [str(exc)])
            e, r, err = memo[key]
            taus.append(theta)
            eigs.append(tuple(e))
            energies.append(tuple(x + p * p for x in e))
            residuals.append(tuple(r))
            errors.append(tuple(err))
        curves.append(ChannelCurve(m, kappa, tuple(taus), tuple(eigs), tuple(energies),
                                   tuple(residuals), tuple(errors)))
    return ABSpectrumReport(spec, p_grid, window, tuple(curves), tuple(p * p for p in p_grid))
