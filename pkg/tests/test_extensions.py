import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slext.core import (Combination, Constant, InverseSquare, IvpControls, Sum, frobenius_pair,
                        solve_ivp)
from slext.errors import (DegenerateFrameError, IntegrabilityError, InvalidRequestError,
                          TrivialSolutionError, UsageError, ValidationError)
from slext.extensions import (BoundaryParameter, ExtensionKind, FrobeniusFrame, Membership,
                              NumericalFrame, TestFunction, closure_extension, cutoff, cutoff_times,
                              default_frame, domain_membership, extension_from_solution,
                              extension_from_theta, extensions_equal, rho_sigma, theta_decompose)

TIGHT = IvpControls(rel_tol=1e-12)


def test_boundary_parameter_range():
    with pytest.raises(ValidationError):
        BoundaryParameter(math.pi)
    with pytest.raises(ValidationError):
        BoundaryParameter(-0.1)
    assert BoundaryParameter.canonical(-0.5).theta == pytest.approx(math.pi - 0.5)
    assert BoundaryParameter(0.1).distance(BoundaryParameter(math.pi - 0.1)) == pytest.approx(0.2)


def test_closure_and_theta_preconditions():
    assert closure_extension(InverseSquare(1.5)).kind is ExtensionKind.CLOSURE
    with pytest.raises(InvalidRequestError):
        closure_extension(InverseSquare(0.5))
    with pytest.raises(InvalidRequestError):
        extension_from_theta(InverseSquare(1.5), 0.5)


def test_frame_of_other_potential_rejected():
    with pytest.raises(UsageError):
        extension_from_theta(InverseSquare(0.5), 0.3, FrobeniusFrame(0.25))


def test_default_frames():
    assert default_frame(InverseSquare(0.2)) == FrobeniusFrame(0.2)
    q = Sum((InverseSquare(0.2), Constant(1.0)))
    assert isinstance(default_frame(q), NumericalFrame)


def test_theta_decompose_pure_frame_members():
    f1, f2 = frobenius_pair(0.5)
    assert theta_decompose(f1, f1, f2) == (pytest.approx(1.0), BoundaryParameter(0.0))
    C, t = theta_decompose(f2, f1, f2)
    assert C == pytest.approx(1.0) and t.theta == pytest.approx(math.pi / 2)
    neg = Combination(((-3.0, f1),))
    C, t = theta_decompose(neg, f1, f2)
    assert C == pytest.approx(-3.0) and t.theta == 0.0


def test_theta_decompose_errors():
    f1, f2 = frobenius_pair(0.5)
    with pytest.raises(DegenerateFrameError):
        theta_decompose(f1, f1, Combination(((2.0, f1),)))
    with pytest.raises(TrivialSolutionError):
        theta_decompose(Combination(((0.0, f1),)), f1, f2)


# the pair r^(1/2 +- kappa) degenerates as kappa -> 0, so stay clear of it
KAPPAS = st.one_of(st.just(0.0), st.floats(0.05, 0.95), st.floats(-0.95, -0.05))


@given(st.floats(0.0, math.pi, exclude_max=True), KAPPAS)
def test_theta_round_trip(theta, kappa):
    e = extension_from_theta(InverseSquare(kappa), theta)
    C, t = theta_decompose(e.boundary_solution, *e.frame.solutions)
    # near theta = pi the pair (1, theta) and (-1, 0) describe the same solution
    assert C * math.cos(t.theta) == pytest.approx(math.cos(theta), abs=1e-10)
    assert C * math.sin(t.theta) == pytest.approx(math.sin(theta), abs=1e-10)
    assert t.distance(BoundaryParameter(theta)) <= 1e-10


@given(st.floats(0.05, 3.0), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_scaling_keeps_extension(theta, c):
    q = InverseSquare(0.3)
    e = extension_from_theta(q, theta)
    e2 = extension_from_solution(q, Combination(((c, e.boundary_solution),)))
    assert extensions_equal(e, e2)


def test_extensions_equal_across_frames():
    q = InverseSquare(0.3)
    e1 = extension_from_theta(q, 2.0)
    frame = NumericalFrame(q, 0.8, (0.05, 2.0), TIGHT)
    _, t = theta_decompose(e1.boundary_solution, *frame.solutions)
    e2 = extension_from_theta(q, t, frame)
    assert extensions_equal(e1, e2, tol=1e-8)
    assert not extensions_equal(e1, extension_from_theta(q, 1.0))
    with pytest.raises(UsageError):
        extensions_equal(e1, extension_from_theta(InverseSquare(0.2), 2.0))


def test_cutoff_shape():
    r = np.linspace(0, 3, 301)
    tau, d1, d2 = cutoff(r)
    assert np.all(tau[r <= 1] == 1) and np.all(tau[r >= 2] == 0)
    assert np.all(np.diff(tau) <= 0)
    h = 1e-5
    x = np.array([1.3, 1.7])
    fd1 = (cutoff(x + h)[0] - cutoff(x - h)[0]) / (2 * h)
    fd2 = (cutoff(x + h)[1] - cutoff(x - h)[1]) / (2 * h)
    np.testing.assert_allclose(cutoff(x)[1], fd1, rtol=1e-6)
    np.testing.assert_allclose(cutoff(x)[2], fd2, rtol=1e-6)


def test_sigma_of_zero_potential_cutoff_is_one():
    f1, f2 = frobenius_pair(0.5)
    grid = np.linspace(1e-3, 3.0, 300)
    dec = rho_sigma(cutoff_times(f2, grid), InverseSquare(0.5), f1, f2)
    assert np.max(np.abs(dec.sigma - 1.0)) <= 1e-8
    assert dec.theta.theta == pytest.approx(math.pi / 2)


def test_solution_has_zero_rho():
    q = InverseSquare(0.3)
    f1, f2 = frobenius_pair(0.3)
    f = Combination(((0.4, f1), (-1.0, f2)))
    grid = np.linspace(0.01, 2.0, 100)
    g = TestFunction(f, lambda x: f.evaluate(x)[1], lambda x: q(x) * f(x), grid)
    dec = rho_sigma(g, q, f1, f2)
    assert np.max(np.abs(dec.rho)) < 1e-12
    assert dec.c1 == pytest.approx(0.4) and dec.c2 == pytest.approx(-1.0)


def test_function_vanishing_near_endpoint_is_in_closure():
    q = InverseSquare(0.3)
    f1, f2 = frobenius_pair(0.3)
    grid = np.linspace(0.01, 5.0, 400)
    # 1 - tau vanishes on (0, 1]
    g = TestFunction(lambda x: 1 - cutoff(x)[0], lambda x: -cutoff(x)[1],
                     lambda x: -cutoff(x)[2], grid)
    dec = rho_sigma(g, q, f1, f2)
    assert dec.trivial
    assert domain_membership(g, extension_from_theta(q, 1.0)) is Membership.IN_CLOSURE


def test_sigma_frame_independence():
    q = InverseSquare(0.3)
    f1, f2 = frobenius_pair(0.3)
    f = Combination(((0.4, f1), (1.1, f2)))
    grid = np.linspace(0.01, 3.0, 400)
    g = cutoff_times(f, grid)
    ref = rho_sigma(g, q, f1, f2).sigma
    for anchor in (0.7, 1.9):
        frame = NumericalFrame(q, anchor, (0.01, 3.0), TIGHT)
        assert np.max(np.abs(rho_sigma(g, q, *frame.solutions).sigma - ref)) <= 1e-8


def test_membership_examples():
    q = InverseSquare(0.5)
    f1, f2 = frobenius_pair(0.5)
    g = cutoff_times(f2, np.linspace(1e-3, 3.0, 300))
    assert domain_membership(g, extension_from_theta(q, math.pi / 2)) is Membership.IN_EXTENSION_ONLY
    assert domain_membership(g, extension_from_theta(q, 0.3)) is Membership.OUTSIDE


def test_limit_point_membership_is_closure():
    q = InverseSquare(1.5)
    f1, f2 = frobenius_pair(1.5)
    g = cutoff_times(f1, np.linspace(1e-2, 3.0, 200))
    assert domain_membership(g, closure_extension(q)) is Membership.IN_CLOSURE


def test_tiny_kappa_frame_is_degenerate():
    f1, f2 = frobenius_pair(1e-14)
    with pytest.raises(DegenerateFrameError):
        theta_decompose(f1, f1, f2)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_coefficients_reconstructed(c1, c2):
    if math.hypot(c1, c2) < 1e-3:
        return
    f1, f2 = frobenius_pair(0.25)
    C, t = theta_decompose(Combination(((c1, f1), (c2, f2))), f1, f2)
    assert C * math.cos(t.theta) == pytest.approx(c1, abs=1e-12 * max(1, abs(C)))
    assert C * math.sin(t.theta) == pytest.approx(c2, abs=1e-12 * max(1, abs(C)))


def test_non_vanishing_phi_without_closed_form():
    q = Sum((InverseSquare(0.3), Constant(1.0)))
    frame = NumericalFrame(q, 1.0, (0.01, 3.0))
    grid = np.linspace(0.01, 3.0, 50)
    g = TestFunction(lambda x: np.ones_like(x), np.zeros_like, np.zeros_like, grid)
    with pytest.raises(IntegrabilityError):
        rho_sigma(g, q, *frame.solutions)


def test_rho_sigma_requires_zero_energy_frame():
    q = InverseSquare(0.5)
    f1 = solve_ivp(q, 1.0, 1.0, 1.0, 0.0, 2.0)
    f2 = solve_ivp(q, 1.0, 1.0, 0.0, 1.0, 2.0)
    g = cutoff_times(frobenius_pair(0.5)[0], np.linspace(1.0, 2.0, 10))
    with pytest.raises(UsageError):
        rho_sigma(g, q, f1, f2)
