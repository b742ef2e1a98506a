"""Acceptance criteria 1-10 at their stated tolerances.

Each test records a PASS/FAIL line (printed in the terminal summary and on
stdout when run as a script) with the measured quantity and the runtime.
"""

import functools
import json
import math
import time

import numpy as np
import pytest

from slext.ab import (ABFamilySpec, CylindricalGrid, FluxParameter, TauConstant, ab_spectrum,
                      mixed_field, sample, separable_field, transform_checks)
from slext.cli import run, resolve_inputs
from slext.core import (Combination, Constant, InverseSquare, IvpControls, Sum, Tabulated, frobenius_pair,
                        fundamental_system, integrate_endpoint, solve_ivp, wronskian)
from slext.extensions import (NumericalFrame, cutoff_times, extension_from_theta, rho_sigma,
                              theta_decompose)
from slext.spectral import EnergyWindow, bound_state_oracle, eigenvalues_below
from slext.weyl import Endpoint, Verdict, classify_endpoint

RESULTS: dict[int, str] = {}
SEED = 20240611


def criterion(number: int, title: str, budget: float | None = None):
    """Run the test body, check its runtime budget and record the verdict.

    The body returns a short string of measured values.
    """

    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            t0 = time.perf_counter()
            detail, ok = "", False
            try:
                detail = fn(*args, **kwargs) or ""
                ok = True
            except AssertionError as exc:
                detail = f"assertion failed: {str(exc).splitlines()[0] if str(exc) else ''}"
                raise
            finally:
                dt = time.perf_counter() - t0
                over = budget is not None and dt >= budget
                verdict = "PASS" if ok and not over else "FAIL"
                limit = f" (limit {budget:g} s)" if budget is not None else ""
                line = f"[{verdict}] {number:2d}. {title}: {detail}; {dt:.2f} s{limit}"
                RESULTS[number] = line
                print(line)
            assert not over, f"runtime {dt:.2f} s exceeds {budget} s"

        return inner

    return wrap


def _random_potential(rng, lo=0.3, hi=6.0):
    kappa = rng.uniform(-2.5, 2.5)
    c = rng.uniform(-3.0, 3.0)
    terms = [InverseSquare(kappa), Constant(c)]
    if rng.random() < 0.5:
        xs = np.linspace(lo, hi, 12)
        terms.append(Tabulated(tuple(xs), tuple(rng.normal(size=len(xs)))))
    return Sum(tuple(terms))


# ----------------------------------------------------------------------- 1


@criterion(1, "classification table", budget=2.0)
def test_classification_table():
    for kappa in (0.0, 0.25, 0.5, 0.75, 0.99, 1.0, 1.25, 2.5):
        q = InverseSquare(kappa)
        left = classify_endpoint(q, endpoint=Endpoint.LEFT).verdict
        right = classify_endpoint(q, endpoint=Endpoint.RIGHT).verdict
        assert left is (Verdict.LCC if kappa < 1 else Verdict.LPC), kappa
        assert right is Verdict.LPC, kappa
        # the command-line path reports the same verdicts
        rep = json.loads(run("classify", resolve_inputs("classify", {"kappa": kappa}, None))[0])
        assert rep["results"]["left"]["verdict"] == left.value
        assert rep["results"]["right"]["verdict"] == "LPC"
    return "8/8 verdicts match (LCC iff kappa < 1 at 0, LPC at infinity)"


# ----------------------------------------------------------------------- 2


@criterion(2, "Wronskian constancy", budget=5.0)
def test_wronskian_constancy():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(50):
        q = _random_potential(rng)
        E = rng.uniform(-5.0, 5.0)
        x0 = rng.uniform(0.5, 3.0)
        x1 = min(x0 + rng.uniform(1.0, 3.0), 6.0)
        (u0, du0), (v0, dv0) = rng.normal(size=(2, 2))
        w0 = u0 * dv0 - du0 * v0
        f = solve_ivp(q, E, x0, u0, du0, x1)
        # the partner is evaluated exactly at every sample of f
        for x in f.xs[1:]:
            v, dv = integrate_endpoint(q, E, x0, v0, dv0, x)
            u, du = f.evaluate(x)
            worst = max(worst, abs(u * dv - du * v - w0) / abs(w0))
    assert worst <= 1e-6, worst
    return f"max relative drift {worst:.2e} <= 1e-6 over 50 cases"


# ----------------------------------------------------------------------- 3


@criterion(3, "canonical fundamental system")
def test_canonical_fundamental_system():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(20):
        q = _random_potential(rng)
        E = rng.uniform(-5.0, 5.0)
        x0 = rng.uniform(1.0, 5.0)
        f1, f2 = fundamental_system(q, E, x0, span=(0.5, 6.0))
        assert f1.evaluate(x0) == (1.0, 0.0) and f2.evaluate(x0) == (0.0, 1.0)
        w = np.array([wronskian(f1, f2, x) for x in np.union1d(f1.xs, f2.xs)])
        worst = max(worst, float(np.max(np.abs(w - 1.0))))
    assert worst <= 1e-8, worst
    return f"max |W(f1,f2) - 1| = {worst:.2e} <= 1e-8 over 20 potentials"


# ----------------------------------------------------------------------- 4


@criterion(4, "Picard/RK agreement")
def test_picard_rk_agreement():
    rng = np.random.default_rng(SEED + 4)
    rel_tol = 1e-10
    picard = IvpControls(rel_tol=rel_tol, method="picard")
    reference = IvpControls(rel_tol=1e-13, abs_tol=1e-16)
    worst = 0.0
    for _ in range(10):
        q = Sum((InverseSquare(rng.uniform(0.0, 2.5)), Constant(rng.uniform(-3.0, 3.0))))
        E = rng.uniform(-5.0, 5.0)
        x0 = rng.uniform(0.5, 1.5)
        x1 = x0 + rng.uniform(0.5, 3.0)
        u0, du0 = rng.normal(size=2)
        traj = solve_ivp(q, E, x0, u0, du0, x1, picard)
        ref = np.array([integrate_endpoint(q, E, x0, u0, du0, x, reference) for x in traj.xs[1:]])
        gap = max(np.max(np.abs(traj.us[1:] - ref[:, 0])), np.max(np.abs(traj.dus[1:] - ref[:, 1])))
        worst = max(worst, gap / np.max(np.abs(ref)))
    assert worst <= 10 * rel_tol, worst
    return f"max sup-norm discrepancy {worst:.2e} <= {10 * rel_tol:g} (relative) over 10 cases"


# ----------------------------------------------------------------------- 5


@criterion(5, "bound-state oracle equivalence", budget=30.0)
def test_bound_state_oracle():
    window = EnergyWindow(-1e3, -1e-8)
    worst = 0.0
    worst_closed = 0.0
    for kappa in (0.25, -0.25, 0.5, -0.5, 0.75, -0.75):
        q = InverseSquare(kappa)
        for frac in (0.6, 0.75, 0.9):
            theta = frac * math.pi
            res = eigenvalues_below(extension_from_theta(q, theta), window)
            expected = bound_state_oracle(kappa, theta)
            assert len(res) == 1 and res[0].error is None, (kappa, frac, res)
            worst = max(worst, abs(res[0].E - expected) / abs(expected))
            if abs(kappa) == 0.5:
                # q = 0: boundary solution matched to exp(-lambda r)
                lam = -1 / math.tan(theta) if kappa > 0 else -math.tan(theta)
                worst_closed = max(worst_closed, abs(res[0].E + lam * lam))
        for theta in (0.0, 0.25 * math.pi):
            assert bound_state_oracle(kappa, theta) is None
            assert eigenvalues_below(extension_from_theta(q, theta), window) == []
    assert worst <= 1e-5, worst
    assert worst_closed <= 1e-6, worst_closed
    e = eigenvalues_below(extension_from_theta(InverseSquare(0.5), 0.75 * math.pi), window)[0].E
    assert abs(e + 1.0) <= 1e-6
    return (f"max relative error {worst:.2e} <= 1e-5; closed form at kappa=+-1/2 "
            f"{worst_closed:.2e} <= 1e-6; none for theta in {{0, pi/4}}")


# ----------------------------------------------------------------------- 6


@criterion(6, "sigma/theta round trips")
def test_sigma_theta_round_trips():
    thetas = np.arange(32) * math.pi / 32
    worst_theta = 0.0
    for kappa in (0.0, 0.3, -0.6):
        q = InverseSquare(kappa)
        for t in thetas:
            e = extension_from_theta(q, float(t))
            C, got = theta_decompose(e.boundary_solution, *e.frame.solutions)
            worst_theta = max(worst_theta, abs(C - 1.0), got.distance(e.theta))
    assert worst_theta <= 1e-10, worst_theta

    q = InverseSquare(0.3)
    f1, f2 = frobenius_pair(0.3)
    grid = np.linspace(0.01, 3.0, 400)
    g = cutoff_times(Combination(((0.4, f1), (1.1, f2))), grid)
    ref = rho_sigma(g, q, f1, f2).sigma
    tight = IvpControls(rel_tol=1e-12)
    worst_frame = 0.0
    for anchor in (0.7, 1.9):
        frame = NumericalFrame(q, anchor, (0.01, 3.0), tight)
        worst_frame = max(worst_frame,
                          float(np.max(np.abs(rho_sigma(g, q, *frame.solutions).sigma - ref))))
    assert worst_frame <= 1e-8, worst_frame

    p1, p2 = frobenius_pair(0.5)
    dec = rho_sigma(cutoff_times(p2, np.linspace(1e-3, 3.0, 300)), InverseSquare(0.5), p1, p2)
    worst_one = float(np.max(np.abs(dec.sigma - 1.0)))
    assert worst_one <= 1e-8, worst_one
    return (f"theta round trip {worst_theta:.2e} <= 1e-10 (32 angles x 3 kappa); "
            f"frame independence {worst_frame:.2e} <= 1e-8; q=0 cutoff |sigma-1| {worst_one:.2e} <= 1e-8")


# ----------------------------------------------------------------------- 7


@criterion(7, "transform checks", budget=10.0)
def test_transform_checks():
    grid = CylindricalGrid.build(n_ang=64, n_z=128)
    flux = FluxParameter(0, 0.5)
    single = transform_checks(sample(separable_field(1), grid), grid, flux, harmonic=1)
    mixed = transform_checks(sample(mixed_field(), grid), grid, flux)
    for d in (single, mixed):
        assert d.parseval_defect <= 1e-3, d
        assert d.intertwining_defect <= 1e-3, d
    assert single.leakage <= 1e-8, single
    return (f"parseval {max(single.parseval_defect, mixed.parseval_defect):.2e} <= 1e-3; "
            f"leakage {single.leakage:.2e} <= 1e-8; intertwining "
            f"{max(single.intertwining_defect, mixed.intertwining_defect):.2e} <= 1e-3")


# ----------------------------------------------------------------------- 8


@criterion(8, "full AB run", budget=10.0)
def test_full_ab_run():
    spec = ABFamilySpec(0.5, (TauConstant(0.75 * math.pi), TauConstant(0.0)))
    p_grid = np.linspace(-2.0, 2.0, 41)
    rep = ab_spectrum(spec, p_grid)
    c0, c1 = rep.curves
    assert all(e == () for e in c1.energies)
    e0 = np.array([E[0] - p * p for p, E in zip(rep.p_grid, c0.energies)])
    assert all(len(E) == 1 for E in c0.energies)
    spread = float(np.max(e0) - np.min(e0))
    oracle = bound_state_oracle(-0.5, 0.75 * math.pi)
    err = abs(e0[0] - oracle) / abs(oracle)
    assert spread <= 1e-10, spread
    assert err <= 1e-5, err
    return f"e0 = {e0[0]:.12f}, spread {spread:.1e} <= 1e-10, oracle error {err:.1e} <= 1e-5"


# ----------------------------------------------------------------------- 9


@criterion(9, "gauge periodicity")
def test_gauge_periodicity():
    rng = np.random.default_rng(SEED + 9)
    compared = 0
    for _ in range(5):
        flux = FluxParameter.from_value(rng.uniform(-3.0, 3.0))
        count = 1 if flux.is_integer else 2
        taus = tuple(TauConstant(rng.uniform(0.55, 0.95) * math.pi) for _ in range(count))
        spec = ABFamilySpec(flux, taus)
        a = ab_spectrum(spec, [0.0, 1.0])
        b = ab_spectrum(spec.shifted(1), [0.0, 1.0])
        for ca, cb in zip(a.curves, b.curves):
            assert cb.m == ca.m + 1 and cb.kappa == ca.kappa
            assert ca.channel_eigs == cb.channel_eigs and ca.energies == cb.energies
            compared += sum(len(e) for e in ca.channel_eigs)
    assert compared > 0
    return f"{compared} eigenvalues identical under phi -> phi + 1 for 5 random fluxes"


# ---------------------------------------------------------------------- 10


ACCEPTANCE_COMMANDS = [
    ("classify", {"kappa": 0.5}),
    ("classify", {"kappa": 1.0}),
    ("solve-ivp", {"potential": "constant", "value": 1.0, "a": -math.inf, "x0": 0.0,
                   "x_target": 2.0, "samples": 9}),
    ("eigen", {"kappa": 0.5, "theta": 2.3561945, "emin": -10.0, "emax": -1e-8}),
    ("eigen", {"kappa": 0.5, "theta": 0.0, "emin": -10.0, "emax": -1e-8}),
    ("ab spectrum", {"flux": 0.5, "tau1": "const:2.3561945", "tau2": "const:0",
                     "p_grid": "-2:2:0.1"}),
    ("ab spectrum", {"flux": 2.0, "tau": "const:0", "p_grid": "0:0:1"}),
    ("ab transform-check", {}),
    ("decompose", {"kappa": 0.5, "theta": math.pi / 2}),
]


@criterion(10, "determinism")
def test_determinism():
    for command, cli in ACCEPTANCE_COMMANDS:
        inputs = resolve_inputs(command, cli, None)
        first, code = run(command, inputs)
        second, code2 = run(command, inputs)
        assert code == code2 == 0, command
        assert first == second, command
    return f"{len(ACCEPTANCE_COMMANDS)} commands reproduce byte-identical JSON"


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
