"""Reduced flux, angular channels and their radial operators."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import InverseSquare
from ..errors import ValidationError
from ..weyl import StructureKind

__all__ = ["FluxParameter", "Channel", "ChannelOperator", "m_of_phi", "singular_channels",
           "channel_operator"]


@dataclass(frozen=True)
class FluxParameter:
    """Reduced flux phi = n + frac with n integer and frac in [0, 1).

    Keeping the integer part separate makes the gauge shift phi -> phi + k
    exact: every kappa = m - phi is computed as (m - n) - frac, so channels
    related by the shift see bit-identical inputs.
    """

    n: int
    frac: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValidationError("integer part of the flux must be an integer")
        f = float(self.frac)
        if not (math.isfinite(f) and 0.0 <= f < 1.0):
            raise ValidationError("fractional part of the flux must lie in [0, 1)")
        if 1.0 - f == 1.0:
            # 1 - frac would round to 1 and misplace the n+1 channel
            f = 0.0
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "frac", f)

    @classmethod
    def from_value(cls, phi: float) -> "FluxParameter":
        phi = float(phi)
        if not math.isfinite(phi):
            raise ValidationError("flux must be finite")
        n = math.floor(phi)
        f = phi - n
        if f >= 1.0:  # round-off for tiny negative phi
            n, f = n + 1, 0.0
        return cls(int(n), f)

    @property
    def phi(self) -> float:
        return self.n + self.frac

    @property
    def is_integer(self) -> bool:
        return self.frac == 0.0

    def shifted(self, k: int) -> "FluxParameter":
        return FluxParameter(self.n + int(k), self.frac)

    def kappa(self, m: int) -> float:
        """m - phi, evaluated as (m - n) - frac."""
        return float(int(m) - self.n) - self.frac

    def to_dict(self) -> dict:
        return {"phi": self.phi, "n": self.n, "frac": self.frac}


def _flux(phi) -> FluxParameter:
    return phi if isinstance(phi, FluxParameter) else FluxParameter.from_value(phi)


def m_of_phi(phi) -> int:
    """The unique integer m with m - phi in (-1, 0]."""
    return _flux(phi).n


def singular_channels(phi) -> tuple[int, ...]:
    """Channels with |m - phi| < 1: (phi,) for integer flux, else (m(phi), m(phi)+1)."""
    f = _flux(phi)
    return (f.n,) if f.is_integer else (f.n, f.n + 1)


@dataclass(frozen=True)
class Channel:
    m: int
    p: float
    flux: FluxParameter

    @property
    def kappa(self) -> float:
        return self.flux.kappa(self.m)

    @property
    def singular(self) -> bool:
        return abs(self.kappa) < 1.0


@dataclass(frozen=True)
class ChannelOperator:
    """h_{m-phi} + p^2 on the half-line."""

    channel: Channel
    q: InverseSquare
    structure: StructureKind
    shift: float

    @property
    def kappa(self) -> float:
        return self.channel.kappa

    @property
    def singular(self) -> bool:
        return self.structure is StructureKind.ONE_PARAMETER_FAMILY


def channel_operator(m: int, p: float, phi) -> ChannelOperator:
    ch = Channel(int(m), float(p), _flux(phi))
    kind = (StructureKind.ONE_PARAMETER_FAMILY if ch.singular
            else StructureKind.ESSENTIALLY_SELF_ADJOINT)
    return ChannelOperator(ch, InverseSquare(ch.kappa), kind, ch.p**2)
