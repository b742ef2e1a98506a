import math

import pytest
from hypothesis import given, settings, strategies as st

from slext.ab import (ABFamilySpec, FluxParameter, TauConstant, TauExpression, TauTable,
                      ab_spectrum, build_family, channel_operator, m_of_phi, parse_tau,
                      singular_channels, tau_from_dict)
from slext.errors import ValidationError
from slext.extensions import ExtensionKind
from slext.spectral import bound_state_oracle

PI34 = 0.75 * math.pi


def test_flux_split():
    f = FluxParameter.from_value(-1.25)
    assert (f.n, f.frac) == (-2, 0.75)
    assert f.kappa(-1) == pytest.approx(0.25)
    assert FluxParameter.from_value(-1e-300).n in (-1, 0)
    with pytest.raises(ValidationError):
        FluxParameter(1, 1.0)
    with pytest.raises(ValidationError):
        FluxParameter.from_value(math.inf)


def test_singular_channels_examples():
    assert singular_channels(0.5) == (0, 1)
    assert singular_channels(2.0) == (2,)
    assert singular_channels(-0.3) == (-1, 0)
    assert m_of_phi(0.5) == 0


@settings(max_examples=200)
@given(st.floats(-50, 50, allow_nan=False))
def test_kappa_coverage(phi):
    flux = FluxParameter.from_value(phi)
    sing = singular_channels(flux)
    for m in range(flux.n - 4, flux.n + 5):
        k = flux.kappa(m)
        assert (abs(k) < 1) == (m in sing)
        assert channel_operator(m, 0.0, flux).singular == (m in sing)
    assert flux.kappa(m_of_phi(flux)) <= 0 < flux.kappa(m_of_phi(flux) + 1) or flux.is_integer


@given(st.integers(-20, 20), st.floats(0, 1, exclude_max=True), st.integers(-5, 5), st.integers(-8, 8))
def test_shift_gives_identical_kappa(n, frac, k, m):
    f = FluxParameter(n, frac)
    assert f.shifted(k).kappa(m + k) == f.kappa(m)


def test_tau_parsing(tmp_path):
    assert parse_tau("const:2.5") == TauConstant(2.5)
    assert parse_tau("0") == TauConstant(0.0)
    assert parse_tau("expr:pi/2 + 0.1*tanh(p)")(0.0) == pytest.approx(math.pi / 2)
    csv = tmp_path / "tau.csv"
    csv.write_text("p,tau\n-1,1.0\n1,2.0\n")
    t = parse_tau(f"table:{csv}")
    assert t(0.0) == pytest.approx(1.5)
    assert parse_tau("tau.csv" if False else str(csv)) == t
    assert parse_tau("table:tau.csv", base_dir=tmp_path) == t
    with pytest.raises(ValidationError):
        t(2.0)
    for bad in ("const:4", "expr:__import__('os')", "expr:p +", "banana", "expr:10*p"):
        with pytest.raises(ValidationError):
            parse_tau(bad)(1.0)
    with pytest.raises(ValidationError):
        parse_tau(f"table:{tmp_path / 'missing.csv'}")


def test_tau_dict_round_trip():
    for t in (TauConstant(1.0), TauTable((0.0, 1.0), (0.5, 0.6)), TauExpression("p*0")):
        assert tau_from_dict(t.to_dict()) == t or tau_from_dict(t.to_dict()).to_dict() == t.to_dict()
    with pytest.raises(ValidationError):
        tau_from_dict({"kind": "spline"})


def test_family_needs_matching_tau_count():
    with pytest.raises(ValidationError):
        ABFamilySpec(0.5, (TauConstant(0.0),))
    with pytest.raises(ValidationError):
        ABFamilySpec(2.0, (TauConstant(0.0), TauConstant(1.0)))


def test_build_family_kinds():
    spec = ABFamilySpec(0.5, (TauConstant(PI34), TauConstant(0.0)))
    fam = build_family(spec, [0.0, 1.0], m_max=3)
    for (m, p), e in fam.items():
        assert abs(e.q.kappa) <= 3
        if m in (0, 1):
            assert e.kind is ExtensionKind.THETA
        else:
            assert e.kind is ExtensionKind.CLOSURE
    assert fam[(0, 1.0)].theta.theta == PI34


def test_half_flux_curve():
    spec = ABFamilySpec(0.5, (TauConstant(PI34), TauConstant(0.0)))
    rep = ab_spectrum(spec, [-2.0, -1.0, 0.0, 1.0, 2.0])
    c0, c1 = rep.curves
    assert c0.kappa == -0.5 and c1.kappa == 0.5
    assert all(e == () for e in c1.energies)
    for p, E in zip(rep.p_grid, c0.energies):
        assert len(E) == 1 and E[0] == pytest.approx(-1.0 + p * p, abs=1e-6)
    assert rep.essential_bottoms == tuple(p * p for p in rep.p_grid)
    assert [r[3] for r in rep.rows()].count("bound") == 5


def test_integer_flux_principal_has_no_curve():
    rep = ab_spectrum(ABFamilySpec(2.0, (TauConstant(0.0),)), [0.0])
    assert rep.curves[0].energies == ((),)


def test_p_dependent_tau():
    tau = TauExpression("pi/2 + 0.3 + 0.2*tanh(p)")
    spec = ABFamilySpec(FluxParameter(0, 0.3), (tau, TauConstant(0.0)))
    rep = ab_spectrum(spec, [-1.0, 0.5])
    c = rep.curves[0]
    for p, e in zip(rep.p_grid, c.channel_eigs):
        assert e[0] == pytest.approx(bound_state_oracle(c.kappa, tau(p)), rel=1e-8)


def test_gauge_periodicity():
    spec = ABFamilySpec(FluxParameter(0, 0.37), (TauConstant(2.0), TauConstant(2.9)))
    a = ab_spectrum(spec, [0.0, 1.5])
    b = ab_spectrum(spec.shifted(1), [0.0, 1.5])
    for ca, cb in zip(a.curves, b.curves):
        assert cb.m == ca.m + 1
        assert ca.kappa == cb.kappa
        assert ca.channel_eigs == cb.channel_eigs
