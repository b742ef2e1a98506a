"""Aharonov-Bohm flux: channels, extension families, spectra and the partial-wave transform."""

from .family import (DEFAULT_WINDOW, M_MAX, ABFamilySpec, ABSpectrumReport, ChannelCurve,
                     ab_spectrum, build_family)
from .flux import (Channel, ChannelOperator, FluxParameter, channel_operator, m_of_phi,
                   singular_channels)
from .tau import TauConstant, TauExpression, TauSpec, TauTable, parse_tau, tau_from_dict
from .transform import (AxisSupportError, ChannelData, CylindricalGrid, TransformDiagnostics,
                        apply_H, mixed_field, radial_operator, sample, separable_field, smooth_bump,
                        transform_checks, transform_forward)

__all__ = [
    "ABFamilySpec", "ABSpectrumReport", "ChannelCurve", "ab_spectrum", "build_family",
    "DEFAULT_WINDOW", "M_MAX", "Channel", "ChannelOperator", "FluxParameter", "channel_operator",
    "m_of_phi", "singular_channels", "TauConstant", "TauExpression", "TauSpec", "TauTable",
    "parse_tau", "tau_from_dict", "AxisSupportError", "ChannelData", "CylindricalGrid",
    "TransformDiagnostics", "apply_H", "mixed_field", "radial_operator", "sample",
    "separable_field", "smooth_bump", "transform_checks", "transform_forward",
]
