"""Desk-scale check of the partial-wave transform

    Psi~(m, p, r) = sqrt(r)/(2 pi) int dz int dphi Psi(r, phi, z) e^{i p z + i m phi}

which maps the Aharonov-Bohm Hamiltonian H = -(grad - i A)^2 onto the channel
operators h_{m-phi} + p^2.  Samples live on a tensor grid: r geometric,
angle uniform and periodic, z uniform on a box.  The angular and axial
integrals are DFTs; radial derivatives are fourth-order differences in ln r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import UnsupportedConfigurationError, ValidationError
from .flux import FluxParameter
from .family import M_MAX

__all__ = ["CylindricalGrid", "ChannelData", "TransformDiagnostics", "sample", "transform_forward",
           "apply_H", "radial_operator", "transform_checks", "separable_field", "mixed_field",
           "smooth_bump", "AxisSupportError", "SUPPORT_TOL"]

SUPPORT_TOL = 1e-12


class AxisSupportError(ValidationError):
    """Test function support reaches the z-axis (inner radial edge)."""


def _uniform(a: np.ndarray, name: str) -> float:
    d = np.diff(a)
    if len(a) < 4 or np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise UnsupportedConfigurationError(f"{name} grid must be uniform and increasing")
    return float(d[0])


@dataclass(frozen=True, eq=False)
class CylindricalGrid:
    r: np.ndarray
    ang: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        r, ang, z = (np.asarray(a, dtype=float) for a in (self.r, self.ang, self.z))
        if r[0] <= 0:
            raise AxisSupportError("radial grid must stay off the axis (r_min > 0)")
        _uniform(np.log(r), "log-radial")
        da = _uniform(ang, "angular")
        if abs(ang[0]) > 1e-12 or abs(da * len(ang) - 2 * math.pi) > 1e-9:
            raise UnsupportedConfigurationError("angular grid must be 2 pi j / N, j = 0..N-1")
        _uniform(z, "axial")
        for k, v in (("r", r), ("ang", ang), ("z", z)):
            v.setflags(write=False)
            object.__setattr__(self, k, v)

    @classmethod
    def build(cls, r_min=0.25, r_max=8.0, n_r=256, n_ang=64, z_min=-8.0, z_max=8.0, n_z=128):
        if not 0 < r_min < r_max:
            raise ValidationError("need 0 < r_min < r_max")
        if not z_min < z_max:
            raise ValidationError("need z_min < z_max")
        return cls(np.geomspace(r_min, r_max, n_r), 2 * math.pi * np.arange(n_ang) / n_ang,
                   z_min + (z_max - z_min) * np.arange(n_z) / n_z)

    @property
    def shape(self):
        return len(self.r), len(self.ang), len(self.z)

    @property
    def hs(self) -> float:
        return float(math.log(self.r[1] / self.r[0]))

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def p(self) -> np.ndarray:
        """Axial momenta, ascending."""
        return np.fft.fftshift(2 * math.pi * np.fft.fftfreq(len(self.z), self.dz))

    @property
    def dp(self) -> float:
        return 2 * math.pi / (len(self.z) * self.dz)

    def radial_weights(self) -> np.ndarray:
        """Trapezoid weights for int f dr = int f r d(ln r)."""
        w = np.full(len(self.r), self.hs)
        w[0] = w[-1] = 0.5 * self.hs
        return w * self.r

    def mesh(self):
        return np.meshgrid(self.r, self.ang, self.z, indexing="ij")

    def to_dict(self) -> dict:
        return {"r_min": float(self.r[0]), "r_max": float(self.r[-1]), "n_r": len(self.r),
                "n_ang": len(self.ang), "z_min": float(self.z[0]),
                "z_max": float(self.z[0] + len(self.z) * self.dz), "n_z": len(self.z)}


@dataclass(frozen=True, eq=False)
class ChannelData:
    """Psi~ on (m, p, r); ``values`` has shape (len(m), len(p), len(r))."""

    m: np.ndarray
    p: np.ndarray
    r: np.ndarray
    values: np.ndarray

    def channel(self, m: int) -> np.ndarray:
        idx = np.nonzero(self.m == m)[0]
        if len(idx) == 0:
            raise ValidationError(f"channel {m} outside the window")
        return self.values[idx[0]]


def sample(fun, grid: CylindricalGrid) -> np.ndarray:
    """Complex samples fun(r, phi, z) on the tensor grid."""
    R, A, Z = grid.mesh()
    return np.asarray(fun(R, A, Z), dtype=complex) * np.ones(grid.shape)


def _check_samples(psi, grid):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != grid.shape:
        raise ValidationError(f"samples have shape {psi.shape}, grid needs {grid.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValidationError("samples contain non-finite values")
    return psi


def _check_support(psi, tol=SUPPORT_TOL):
    scale = float(np.max(np.abs(psi)))
    if scale == 0.0:
        return
    if np.max(np.abs(psi[:2])) > tol * scale:
        raise AxisSupportError("support reaches the inner radial edge; it must stay away from the axis")
    edges = (psi[-2:], psi[:, :, :2], psi[:, :, -2:])
    if any(np.max(np.abs(e)) > tol * scale for e in edges):
        raise ValidationError("samples are not compactly supported inside the grid")


def channel_window(flux: FluxParameter, m_max: int = M_MAX) -> np.ndarray:
    ms = np.arange(flux.n - m_max - 1, flux.n + m_max + 2)
    return np.array([m for m in ms if abs(flux.kappa(int(m))) <= m_max], dtype=int)


def transform_forward(psi, grid: CylindricalGrid, ms) -> ChannelData:
    """Psi~(m, p, r) for the channels ``ms`` on the DFT dual grid in p."""
    psi = _check_samples(psi, grid)
    n_ang, n_z = len(grid.ang), len(grid.z)
    ms = np.asarray(ms, dtype=int)
    if np.any(np.abs(ms) >= n_ang // 2):
        raise ValidationError("channel window exceeds the angular resolution")
    # int dphi Psi e^{i m phi} = 2 pi * ifft along the angle
    ang = 2 * math.pi * np.fft.ifft(psi, axis=1)[:, ms % n_ang, :]
    # int dz Psi e^{i p z} with p = 2 pi fftfreq
    kz = 2 * math.pi * np.fft.fftfreq(n_z, grid.dz)
    zt = grid.dz * n_z * np.fft.ifft(ang, axis=2) * np.exp(1j * kz * grid.z[0])
    zt = np.fft.fftshift(zt, axes=2)
    vals = np.sqrt(grid.r)[:, None, None] / (2 * math.pi) * zt
    return ChannelData(ms, grid.p, grid.r.copy(), np.transpose(vals, (1, 2, 0)))


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _stencil(u, coeff, h, axis):
    """Central five-point stencil along ``axis`` with zero padding."""
    u = np.moveaxis(u, axis, 0)
    pad = np.zeros((2,) + u.shape[1:], dtype=u.dtype)
    up = np.concatenate([pad, u, pad])
    n = u.shape[0]
    out = sum(c * up[k:k + n] for k, c in enumerate(coeff))
    return np.moveaxis(out, 0, axis) / h


def _ds(u, h, axis=0):
    return _stencil(u, _D1, h, axis)


def _dss(u, h, axis=0):
    return _stencil(u, _D2, h * h, axis)


def apply_H(psi, grid: CylindricalGrid, flux: FluxParameter) -> np.ndarray:
    """Samples of -(d_r^2 + d_r/r + d_phi^2/r^2 + d_z^2) Psi - (2 i phi/r^2) d_phi Psi + (phi/r)^2 Psi.

    The radial part equals Psi_ss / r^2 in s = ln r.  Angular and axial
    derivatives are spectral.
    """
    psi = _check_samples(psi, grid)
    r = grid.r[:, None, None]
    n_ang, n_z = len(grid.ang), len(grid.z)
    m = np.fft.fftfreq(n_ang, 1.0 / n_ang)
    fa = np.fft.fft(psi, axis=1)
    m1 = m.copy()
    if n_ang % 2 == 0:
        m1[n_ang // 2] = 0.0
    d_ang = np.fft.ifft(1j * m1[None, :, None] * fa, axis=1)
    dd_ang = np.fft.ifft(-(m**2)[None, :, None] * fa, axis=1)
    kz = 2 * math.pi * np.fft.fftfreq(n_z, grid.dz)
    dd_z = np.fft.ifft(-(kz**2)[None, None, :] * np.fft.fft(psi, axis=2), axis=2)
    phi = flux.phi
    radial = _dss(psi, grid.hs) / r**2
    return (-(radial + dd_ang / r**2 + dd_z) - (2j * phi / r**2) * d_ang + (phi**2 / r**2) * psi)


def radial_operator(u, r, hs: float, kappa: float, axis: int = -1):
    """-u'' + (kappa^2 - 1/4)/r^2 u with u'' = (u_ss - u_s)/r^2."""
    shape = [1] * np.ndim(u)
    shape[axis] = -1
    rr = np.reshape(r, shape)
    upp = (_dss(u, hs, axis) - _ds(u, hs, axis)) / rr**2
    return -upp + (kappa**2 - 0.25) / rr**2 * u


@dataclass(frozen=True)
class TransformDiagnostics:
    parseval_defect: float
    intertwining_defect: float
    leakage: float | None
    norm: float
    channels: tuple

    def to_dict(self) -> dict:
        return {"parseval_defect": self.parseval_defect,
                "intertwining_defect": self.intertwining_defect,
                "leakage": self.leakage, "norm": self.norm, "channels": list(self.channels)}


def transform_checks(psi, grid: CylindricalGrid, flux: FluxParameter | float = 0.0,
                     m_max: int = M_MAX, harmonic: int | None = None) -> TransformDiagnostics:
    """Parseval and intertwining defects of the discrete transform.

    ``harmonic`` names the single channel of a one-harmonic input; leakage is
    then the largest off-channel amplitude relative to the on-channel one.
    """
    if not isinstance(flux, FluxParameter):
        flux = FluxParameter.from_value(flux)
    psi = _check_samples(psi, grid)
    _check_support(psi)
    ms = channel_window(flux, m_max)
    w_r = grid.radial_weights()
    # ||Psi||^2 = int r dr dphi dz |Psi|^2
    dang = 2 * math.pi / len(grid.ang)
    norm2 = float(np.sum((w_r * grid.r)[:, None, None] * np.abs(psi) ** 2) * dang * grid.dz)
    data = transform_forward(psi, grid, ms)
    tnorm2 = float(np.sum(np.abs(data.values) ** 2 * w_r[None, None, :]) * grid.dp)
    parseval = abs(norm2 - tnorm2) / norm2 if norm2 > 0 else 0.0

    lhs = transform_forward(apply_H(psi, grid, flux), grid, ms).values
    rhs = np.empty_like(lhs)
    p2 = (grid.p**2)[:, None]
    for i, m in enumerate(ms):
        u = data.values[i]
        rhs[i] = radial_operator(u, grid.r, grid.hs, flux.kappa(int(m))) + p2 * u
    num = float(np.sum(np.abs(lhs - rhs) ** 2 * w_r))
    den = float(np.sum(np.abs(lhs) ** 2 * w_r))
    intertwining = math.sqrt(num / den) if den > 0 else 0.0

    leakage = None
    if harmonic is not None:
        on = np.max(np.abs(data.channel(harmonic)))
        off = max((float(np.max(np.abs(data.values[i]))) for i, m in enumerate(ms) if m != harmonic),
                  default=0.0)
        leakage = off / on if on > 0 else 0.0
    return TransformDiagnostics(parseval, intertwining, leakage, norm2, tuple(int(m) for m in ms))


# ----------------------------------------------------------- built-in fields


def smooth_bump(t, a: float, b: float):
    """C-infinity bump supported on [a, b], equal to 1 at the midpoint."""
    t = np.asarray(t, dtype=float)
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    s = (t - c) / h
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def separable_field(n: int = 1, r_support=(1.0, 3.0), z_support=(-2.0, 2.0)):
    """Psi = r^(-1/2) e^{-i n phi} chi(z) psi(r) with bump factors chi, psi."""
    if r_support[0] <= 0:
        raise AxisSupportError("radial support must stay away from the axis")

    def fun(r, ang, z):
        return (smooth_bump(r, *r_support) / np.sqrt(r) * np.exp(-1j * n * ang)
                * smooth_bump(z, *z_support))

    return fun


def mixed_field(r_support=(1.0, 3.5), z_support=(-2.5, 2.5)):
    """Real, non-separable field with angular content |m| <= 2."""
    if r_support[0] <= 0:
        raise AxisSupportError("radial support must stay away from the axis")
    rc = 0.5 * (r_support[0] + r_support[1])

    def fun(r, ang, z):
        shift = 0.3 * (r - rc)
        zc = 0.5 * (z_support[0] + z_support[1])
        zh = 0.5 * (z_support[1] - z_support[0]) - 0.3 * (r_support[1] - r_support[0]) / 2
        return (smooth_bump(r, *r_support) * smooth_bump(z - shift, zc - zh, zc + zh)
                * (1.0 + 0.5 * np.cos(ang) + 0.25 * (r - rc) * np.sin(2 * ang)))

    return fun
