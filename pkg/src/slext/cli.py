"""Command-line front end.

Every subcommand declares its parameters once; the same table drives
argparse, config-file validation, defaults and the ``inputs`` echo of the
report.  Precedence is CLI flag > config file > default.  A prior report
can be passed as ``--config``; its ``inputs`` block is reused.

Exit status: 0 success, 2 invalid input, 3 solver failure or inconclusive
result.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SlextError, ValidationError

OUTPUT_DIR_ENV = "SLEXT_OUTPUT_DIR"


def _float(text) -> float:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    if isinstance(text, str):
        t = text.strip().lower()
        if t in ("inf", "+inf", "infinity"):
            return math.inf
        if t in ("-inf", "-infinity"):
            return -math.inf
        try:
            v = float(t)
        except ValueError:
            raise ValidationError(f"not a number: {text!r}") from None
        if math.isnan(v):
            raise ValidationError("NaN is not a valid parameter")
        return v
    raise ValidationError(f"not a number: {text!r}")


def _int(text) -> int:
    if isinstance(text, bool):
        raise ValidationError(f"not an integer: {text!r}")
    if isinstance(text, int):
        return text
    try:
        return int(str(text).strip())
    except ValueError:
        raise ValidationError(f"not an integer: {text!r}") from None


def _str(text) -> str:
    if not isinstance(text, str):
        raise ValidationError(f"expected a string, got {text!r}")
    return text


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    raise ValidationError(f"expected true/false, got {v!r}")


@dataclass(frozen=True)
class Param:
    name: str
    kind: object  # _float, _int, _str or _bool
    default: object = None
    help: str = ""
    choices: tuple | None = None
    required: bool = False

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


def parse_grid(text: str) -> list[float]:
    """``start:end:step`` (end inclusive) or a comma-separated list."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid {text!r} must be start:end:step")
        a, b, h = (_float(p) for p in parts)
        if not all(math.isfinite(v) for v in (a, b, h)):
            raise ValidationError("grid bounds must be finite")
        if a == b:
            return [a]
        if h <= 0 or b < a:
            raise ValidationError(f"grid {text!r} needs start <= end and step > 0")
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        if n > 1_000_000:
            raise ValidationError("grid too large")
        return [a + i * h for i in range(n)]
    if not text:
        raise ValidationError("grid must not be empty")
    return [_float(p) for p in text.split(",")]


def _pair(text: str, name: str) -> tuple[float, float]:
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ValidationError(f"{name} must be 'lo,hi'")
    lo, hi = (_float(p) for p in parts)
    if not lo < hi:
        raise ValidationError(f"{name} needs lo < hi")
    return lo, hi


POTENTIAL = (
    Param("potential", _str, "inverse-square", "potential family",
          ("inverse-square", "constant", "table")),
    Param("kappa", _float, None, "inverse-square parameter (q = (kappa^2 - 1/4)/r^2)"),
    Param("value", _float, None, "value of a constant potential"),
    Param("table", _str, None, "CSV file with columns x,q for a tabulated potential"),
    Param("a", _float, 0.0, "left endpoint of the domain"),
    Param("b", _float, math.inf, "right endpoint of the domain"),
)
WINDOW = (
    Param("emin", _float, -1e3, "lower end of the energy window"),
    Param("emax", _float, -1e-8, "upper end of the energy window (< 0)"),
)

COMMANDS: dict[str, tuple[Param, ...]] = {
    "classify": POTENTIAL + (
        Param("endpoint", _str, "both", "endpoint(s) to classify", ("both", "left", "right")),
        Param("method", _str, "auto", "classification method", ("auto", "analytic", "numerical")),
        Param("energy", _float, 0.0, "energy used by the numerical test"),
    ),
    "solve-ivp": POTENTIAL + (
        Param("energy", _float, 0.0, "energy E"),
        Param("x0", _float, None, "initial point", required=True),
        Param("u0", _float, 1.0, "u(x0)"),
        Param("du0", _float, 0.0, "u'(x0)"),
        Param("x_target", _float, None, "end point", required=True),
        Param("rel_tol", _float, 1e-10, "relative tolerance"),
        Param("abs_tol", _float, 1e-14, "absolute tolerance"),
        Param("ivp_method", _str, "rk", "integrator", ("rk", "picard")),
        Param("samples", _int, 0, "number of uniform output samples (0: integrator steps)"),
    ),
    "eigen": (
        Param("kappa", _float, None, "inverse-square parameter", required=True),
        Param("theta", _float, None, "boundary parameter in [0, pi) (only for |kappa| < 1)"),
    ) + WINDOW + (
        Param("cutoff", _float, None, "fixed right cutoff R (default 30/sqrt(-E))"),
        Param("points_per_decade", _int, 64, "energy mesh density"),
        Param("eigenfunctions", _bool, False, "include eigenfunction samples"),
    ),
    "ab spectrum": (
        Param("flux", _float, None, "reduced flux phi", required=True),
        Param("tau", _str, None, "tau map for integer flux (const:V, expr:..., table:FILE.csv)"),
        Param("tau1", _str, None, "tau map of channel m(phi) for non-integer flux"),
        Param("tau2", _str, None, "tau map of channel m(phi)+1 for non-integer flux"),
        Param("p_grid", _str, None, "axial momenta, start:end:step", required=True),
    ) + WINDOW,
    "ab transform-check": (
        Param("flux", _float, 0.0, "reduced flux phi"),
        Param("field", _str, "separable", "built-in test field", ("separable", "mixed", "zero")),
        Param("harmonic", _int, 1, "harmonic n of the separable field"),
        Param("r_support", _str, "1,3", "radial support lo,hi"),
        Param("z_support", _str, "-2,2", "axial support lo,hi"),
        Param("r_min", _float, 0.25, "inner radius of the grid"),
        Param("r_max", _float, 8.0, "outer radius of the grid"),
        Param("n_r", _int, 256, "radial points (geometric)"),
        Param("n_ang", _int, 64, "angular points"),
        Param("z_min", _float, -8.0, "lower end of the z box"),
        Param("z_max", _float, 8.0, "upper end of the z box"),
        Param("n_z", _int, 128, "axial points"),
        Param("m_max", _int, 8, "channel window |m - phi| <= m_max"),
    ),
    "decompose": (
        Param("kappa", _float, None, "inverse-square parameter", required=True),
        Param("coeffs", _str, "0,1", "g = cutoff * (c1 psi1 + c2 psi2); 'c1,c2'"),
        Param("r0", _float, 1.0, "cutoff equals 1 below r0"),
        Param("r1", _float, 2.0, "cutoff vanishes above r1"),
        Param("grid", _str, "0.001:3:0.001", "sample grid start:end:step"),
        Param("theta", _float, None, "extension to test membership against"),
        Param("tol_sigma", _float, 1e-8, "triviality tolerance for sigma"),
    ),
}


# ---------------------------------------------------------------- argparse


def _add_params(p: argparse.ArgumentParser, params):
    for prm in params:
        if prm.kind is _bool:
            p.add_argument(prm.flag, dest=prm.name, action="store_true", default=argparse.SUPPRESS,
                           help=prm.help)
        else:
            p.add_argument(prm.flag, dest=prm.name, default=argparse.SUPPRESS, help=prm.help,
                           choices=prm.choices, metavar=None if prm.choices else prm.name.upper())
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format")
    p.add_argument("--output", default=None,
                   help=f"report path (default: ${OUTPUT_DIR_ENV}/<command>.<format> or stdout)")
    p.add_argument("--config", default=None, help="flat JSON config or a prior report")
    p.add_argument("--timing", action="store_true", help="record wall-clock time in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("classify", "solve-ivp", "eigen", "decompose"):
        _add_params(sub.add_parser(name, help=f"{name} command"), COMMANDS[name])
    ab = sub.add_parser("ab", help="Aharonov-Bohm commands")
    absub = ab.add_subparsers(dest="ab_command", required=True)
    _add_params(absub.add_parser("spectrum", help="channel-wise bound states"), COMMANDS["ab spectrum"])
    _add_params(absub.add_parser("transform-check", help="partial-wave transform checks"),
                COMMANDS["ab transform-check"])
    return parser


def _load_config(path, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    if "schema_version" in data and "inputs" in data:
        if data.get("command") != command:
            raise ValidationError(f"config report is for {data.get('command')!r}, not {command!r}")
        data = data["inputs"]
        if not isinstance(data, dict):
            raise ValidationError("report inputs must be an object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_inputs(command: str, cli: dict, config: dict | None) -> dict:
    params = COMMANDS[command]
    names = {p.name for p in params}
    config = config or {}
    unknown = sorted(set(config) - names)
    if unknown:
        raise ValidationError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    out = {}
    for prm in params:
        if prm.name in cli:
            raw = cli[prm.name]
        elif prm.name in config:
            raw = config[prm.name]
        else:
            raw = prm.default
        if raw is None:
            if prm.required:
                raise ValidationError(f"{command}: missing required {prm.flag}")
            out[prm.name] = None
            continue
        v = prm.kind(raw)
        if prm.choices and v not in prm.choices:
            raise ValidationError(f"{prm.flag} must be one of {', '.join(prm.choices)}")
        out[prm.name] = v
    return out


# ----------------------------------------------------------------- commands


def _potential(inp: dict):
    from .core import Constant, Interval, InverseSquare, Tabulated

    dom = Interval(inp["a"], inp["b"])
    kind = inp["potential"]
    if kind == "inverse-square":
        if inp["kappa"] is None:
            raise ValidationError("inverse-square potential needs --kappa")
        return InverseSquare(inp["kappa"], dom)
    if kind == "constant":
        if inp["value"] is None:
            raise ValidationError("constant potential needs --value")
        return Constant(inp["value"], dom)
    if inp["table"] is None:
        raise ValidationError("table potential needs --table")
    try:
        arr = np.loadtxt(inp["table"], delimiter=",", ndmin=2, comments="#")
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read potential table: {exc}") from None
    if arr.shape[1] < 2:
        raise ValidationError("potential table needs columns x,q")
    return Tabulated(tuple(arr[:, 0]), tuple(arr[:, 1]), dom)


def cmd_classify(inp):
    from .core import potential_to_dict
    from .weyl import Verdict, classify_endpoint, StructureKind

    q = _potential(inp)
    res = {"left": None, "right": None, "structure": None}
    ends = ("left", "right") if inp["endpoint"] == "both" else (inp["endpoint"],)
    for end in ends:
        res[end] = classify_endpoint(q, inp["energy"], end, method=inp["method"]).to_dict()
    if res["left"] and res["right"]:
        if res["right"]["verdict"] == Verdict.LPC.value:
            res["structure"] = (StructureKind.ESSENTIALLY_SELF_ADJOINT.value
                                if res["left"]["verdict"] == Verdict.LPC.value
                                else StructureKind.ONE_PARAMETER_FAMILY.value)
    rows = [(e, res[e]["verdict"], res[e]["method"]) for e in ends]
    return res, {"potential": potential_to_dict(q)}, (("endpoint", "verdict", "method"), rows), 0


def cmd_solve_ivp(inp):
    from .core import IvpControls, solve_ivp

    q = _potential(inp)
    ctl = IvpControls(rel_tol=inp["rel_tol"], abs_tol=inp["abs_tol"], method=inp["ivp_method"])
    traj = solve_ivp(q, inp["energy"], inp["x0"], inp["u0"], inp["du0"], inp["x_target"], ctl)
    if inp["samples"] < 0 or inp["samples"] == 1:
        raise ValidationError("--samples must be 0 or >= 2")
    if inp["samples"]:
        xs = np.linspace(traj.span[0], traj.span[1], inp["samples"])
        us, dus = traj.evaluate(xs)
    else:
        xs, us, dus = traj.xs, traj.us, traj.dus
    res = {"x": list(xs), "u": list(us), "du": list(dus)}
    diag = {"steps": len(traj), "span": list(traj.span)}
    return res, diag, (("x", "u", "du"), list(zip(xs, us, dus))), 0


def cmd_eigen(inp):
    from .core import InverseSquare
    from .extensions import closure_extension, extension_from_theta
    from .spectral import (EnergyWindow, SpectralControls, bound_state_oracle, eigenvalues_below)

    kappa, theta = inp["kappa"], inp["theta"]
    q = InverseSquare(kappa)
    if abs(kappa) < 1.0:
        if theta is None:
            raise ValidationError("|kappa| < 1 needs --theta (one-parameter family)")
        e = extension_from_theta(q, theta)
    else:
        if theta is not None:
            raise ValidationError("--theta is invalid for |kappa| >= 1: the only extension is the closure")
        e = closure_extension(q)
    ctl = SpectralControls(cutoff=inp["cutoff"], points_per_decade=inp["points_per_decade"])
    results = eigenvalues_below(e, EnergyWindow(inp["emin"], inp["emax"]), ctl)
    res = {"extension": e.to_dict(),
           "eigenvalues": [r.to_dict(samples=inp["eigenfunctions"]) for r in results]}
    diag = {"controls": ctl.provenance(),
            "oracle": (bound_state_oracle(kappa, theta) if abs(kappa) < 1.0 else None)}
    rows = [(r.E, r.residual, r.mismatch, r.R, r.r_seed, r.x_match, r.error) for r in results]
    failed = bool(results) and all(r.error is not None for r in results)
    return res, diag, (("E", "residual", "mismatch", "R", "r_seed", "x_match", "error"), rows), \
        (3 if failed else 0)


def cmd_ab_spectrum(inp):
    from .ab import ABFamilySpec, FluxParameter, ab_spectrum, parse_tau, singular_channels
    from .spectral import EnergyWindow

    flux = FluxParameter.from_value(inp["flux"])
    n_sing = len(singular_channels(flux))
    if n_sing == 1:
        if inp["tau"] is None or inp["tau1"] is not None or inp["tau2"] is not None:
            raise ValidationError("integer flux has one singular channel: give exactly --tau")
        taus = (parse_tau(inp["tau"]),)
    else:
        if inp["tau"] is not None or inp["tau1"] is None or inp["tau2"] is None:
            raise ValidationError("non-integer flux has two singular channels: give --tau1 and --tau2")
        taus = (parse_tau(inp["tau1"]), parse_tau(inp["tau2"]))
    spec = ABFamilySpec(flux, taus)
    rep = ab_spectrum(spec, parse_grid(inp["p_grid"]), EnergyWindow(inp["emin"], inp["emax"]))
    errors = sum(len(e) for c in rep.curves for e in c.errors)
    points = sum(len(e) for c in rep.curves for e in c.energies)
    code = 3 if errors and not points else 0
    return rep.to_dict(), {"failed_points": errors}, (("m", "p", "E", "kind"), rep.rows()), code


def cmd_transform_check(inp):
    from .ab import CylindricalGrid, FluxParameter, mixed_field, sample, separable_field, transform_checks

    r_sup = _pair(inp["r_support"], "--r-support")
    z_sup = _pair(inp["z_support"], "--z-support")
    for k in ("n_r", "n_ang", "n_z"):
        if inp[k] < 8:
            raise ValidationError(f"--{k.replace('_', '-')} must be at least 8")
    if inp["m_max"] < 0:
        raise ValidationError("--m-max must be >= 0")
    if r_sup[0] <= inp["r_min"] or r_sup[0] <= 0:
        from .ab import AxisSupportError
        raise AxisSupportError("radial support must start strictly inside the grid, away from the axis")
    grid = CylindricalGrid.build(inp["r_min"], inp["r_max"], inp["n_r"], inp["n_ang"],
                                 inp["z_min"], inp["z_max"], inp["n_z"])
    harmonic = None
    if inp["field"] == "separable":
        fun, harmonic = separable_field(inp["harmonic"], r_sup, z_sup), inp["harmonic"]
    elif inp["field"] == "mixed":
        fun = mixed_field(r_sup, z_sup)
    else:
        def fun(r, a, z):
            return np.zeros_like(r)
    d = transform_checks(sample(fun, grid), grid, FluxParameter.from_value(inp["flux"]),
                         inp["m_max"], harmonic)
    res = d.to_dict()
    rows = [(k, res[k]) for k in ("parseval_defect", "intertwining_defect", "leakage", "norm")]
    return res, {"grid": grid.to_dict()}, (("quantity", "value"), rows), 0


def cmd_decompose(inp):
    from .core import Combination, InverseSquare, frobenius_pair
    from .extensions import (SigmaControls, closure_extension, cutoff_times, domain_membership,
                             extension_from_theta, rho_sigma)

    kappa = inp["kappa"]
    c1, c2 = (_float(v) for v in str(inp["coeffs"]).split(",")) if inp["coeffs"].count(",") == 1 \
        else (None, None)
    if c1 is None:
        raise ValidationError("--coeffs must be 'c1,c2'")
    if not 0 < inp["r0"] < inp["r1"]:
        raise ValidationError("need 0 < r0 < r1")
    xs = np.array(parse_grid(inp["grid"]))
    if len(xs) < 2 or xs[0] <= 0:
        raise ValidationError("decomposition grid needs >= 2 points in (0, inf)")
    q = InverseSquare(kappa)
    f1, f2 = frobenius_pair(kappa)
    g = cutoff_times(Combination(((c1, f1), (c2, f2))), xs, inp["r0"], inp["r1"])
    ctl = SigmaControls(tol_sigma=inp["tol_sigma"])
    dec = rho_sigma(g, q, f1, f2, ctl)
    membership = None
    if inp["theta"] is not None:
        membership = domain_membership(g, extension_from_theta(q, inp["theta"]), ctl).value
    elif abs(kappa) >= 1.0:
        membership = domain_membership(g, closure_extension(q), ctl).value
    res = {"c1": dec.c1, "c2": dec.c2, "trivial": dec.trivial, "C": dec.C,
           "theta": dec.theta.theta if dec.theta is not None else None, "membership": membership,
           "projection_defect": dec.projection_defect}
    rows = [(k, res[k]) for k in res]
    return res, {"anchor": dec.anchor, "frame": {"kind": "frobenius", "kappa": kappa}}, \
        (("quantity", "value"), rows), 0


HANDLERS = {
    "classify": cmd_classify,
    "solve-ivp": cmd_solve_ivp,
    "eigen": cmd_eigen,
    "ab spectrum": cmd_ab_spectrum,
    "ab transform-check": cmd_transform_check,
    "decompose": cmd_decompose,
}


def run(command: str, inputs: dict, fmt: str = "json", timing: bool = False) -> tuple[str, int]:
    """Execute ``command`` on resolved inputs; returns (report text, exit code)."""
    from .report import csv_text, dumps, make_report

    t0 = time.perf_counter()
    results, diag, (header, rows), code = HANDLERS[command](inputs)
    elapsed = time.perf_counter() - t0
    if fmt == "csv":
        return csv_text(header, rows), code
    report = make_report(command, _echo(inputs), results, diag,
                         {"wall_seconds": elapsed} if timing else None)
    return dumps(report), code


def _destination(args, command: str):
    if args.output:
        return Path(args.output)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env) / f"{command.replace(' ', '-')}.{args.format}"
    return None


def _glue_negative_values(argv):
    """Turn ``--flag -1e-8`` into ``--flag=-1e-8``; argparse would read the
    value as an option."""
    out = list(argv)
    i = 0
    while i < len(out) - 1:
        tok, nxt = out[i], out[i + 1]
        if (tok.startswith("--") and "=" not in tok and len(nxt) > 1 and nxt[0] == "-"
                and (nxt[1].isdigit() or nxt[1] == "." or nxt[1:].lower() in ("inf", "infinity"))):
            out[i:i + 2] = [f"{tok}={nxt}"]
        i += 1
    return out


def _echo(inputs: dict) -> dict:
    """Inputs as written to the report; infinities become strings."""
    return {k: (("inf" if v > 0 else "-inf") if isinstance(v, float) and math.isinf(v) else v)
            for k, v in inputs.items()}


def main(argv=None) -> int:
    from .report import write_atomic

    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    command = args.command if args.command != "ab" else f"ab {args.ab_command}"
    names = {p.name for p in COMMANDS[command]}
    cli = {k: v for k, v in vars(args).items() if k in names}
    try:
        config = _load_config(args.config, command) if args.config else None
        inputs = resolve_inputs(command, cli, config)
        text, code = run(command, inputs, args.format, args.timing)
        dest = _destination(args, command)
        if dest is None:
            sys.stdout.write(text)
        else:
            write_atomic(dest, text)
        return code
    except SlextError as exc:
        print(f"slext {command}: error: {exc}", file=sys.stderr)
        if exc.exit_code == 2:
            print(f"see 'slext {command} --help'", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError, ArithmeticError) as exc:
        print(f"slext {command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - never a traceback for the user
        print(f"slext {command}: internal failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
