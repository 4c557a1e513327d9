"""Command-line front end: ``bryantflux <command> [--spec FILE | --example NAME] ...``.

Reports are JSON on stdout.  Exit status is 0 on success, 1 when a computation
fails or a check (balance, validation, oracle) does not pass, and 2 for
malformed specifications or arguments; errors are a JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys

import numpy as np

from . import __version__
from .cmc import validate
from .ends import classify_end
from .errors import BryantFluxError, ParseError
from .flux import (
    balance,
    contour_flux,
    default_tolerance,
    dual_flux_at_end,
    fl_sharp,
    flux_at_end,
    relative_deviation,
)
from .series import is_inf
from .specfile import (
    SurfaceSpecFile,
    build_surface,
    builtin_examples,
    get_example,
    parse_expression,
    parse_spec,
)
from .surface import PolarGrid, export_obj, immerse

ORACLE_TOL = 1e-8


class UsageError(Exception):
    """Bad command-line input; reported with exit status 2."""


# -- JSON helpers -------------------------------------------------------------

def _num(x: float) -> float:
    x = float(f"{float(x):.12g}")
    return 0.0 if x == 0 else x


def _cplx(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _matrix(m) -> list:
    return [[_cplx(v) for v in row] for row in np.asarray(m)]


def format_point(p) -> str:
    if is_inf(p):
        return "inf"
    p = complex(p)
    if p.imag == 0:
        return f"{_num(p.real):.12g}"
    if p.real == 0:
        return f"{_num(p.imag):.12g}i"
    return f"{_num(p.real):.12g}{_num(p.imag):+.12g}i"


_PAIR = re.compile(r"\[\s*(-?[0-9.eE+-]+),\s*(-?[0-9.eE+-]+)\s*\]")
_STRINGS = re.compile(r"\[\s*(\"[^\"]*\"(?:,\s*\"[^\"]*\")*)\s*\]")


def _dump(obj) -> str:
    """Indented JSON with complex pairs and string lists kept on one line."""
    text = json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False)
    text = _PAIR.sub(r"[\1, \2]", text)
    return _STRINGS.sub(lambda m: "[" + re.sub(r",\s*", ", ", m.group(1)) + "]", text)


def _header(command: str, spec: SurfaceSpecFile | None) -> dict:
    out = {"tool": "bryantflux", "version": __version__, "command": command}
    if spec is not None:
        out["label"] = spec.label
        out["parameters"] = {k: _cplx(v) if isinstance(v, complex) else v
                             for k, v in spec.parameters.items()}
    return out


# -- reports ------------------------------------------------------------------

def end_summary(e) -> dict:
    out = {"end": format_point(e.p), "regular": e.regular, "type": e.end_type.value,
           "pole_order_Q": e.pole_order_Q,
           "q": {"q_-2": _cplx(e.q_coeffs[0]), "q_-1": _cplx(e.q_coeffs[1]),
                 "q_0": _cplx(e.q_coeffs[2])}}
    if e.regular:
        out.update({
            "l": e.l, "k": e.k, "m": e.m,
            "w": [_cplx(w) for w in e.w_coeffs] if e.w_coeffs is not None else None,
            "G_hat": [_cplx(x) for x in e.G_hat],
            "normalization": e.normalization.kind,
            "log_term_vanishes": e.log_term_vanishes,
            "flux_nonzero_predicted": e.flux_nonzero_predicted,
        })
    return out


def _balance_json(report) -> dict:
    return {"total": _matrix(report.total.entries), "max_norm": _num(report.total.max_norm),
            "balanced": report.balanced, "tolerance": report.tolerance_used}


def classify_report(data) -> list:
    return [end_summary(classify_end(data, p)) for p in data.ends]


def flux_report(data, dual: bool, tol: float) -> dict:
    ends = []
    for p in data.ends:
        e = classify_end(data, p)
        fl = flux_at_end(data, p)
        nonzero = not fl.is_zero(1e-9)
        predicted = e.flux_nonzero_predicted
        item = {"end": format_point(p), "type": e.end_type.value, "flux": _matrix(fl.entries),
                "max_norm": _num(fl.max_norm), "nonzero": nonzero,
                "predicted_nonzero": predicted,
                "agrees": None if predicted is None else predicted == nonzero}
        if dual:
            item["dual_flux"] = _dual_entry(lambda: _matrix(dual_flux_at_end(data, p).entries))
            item["fl_sharp"] = _dual_entry(lambda: _cplx(fl_sharp(data, p)))
        ends.append(item)
    return {"ends": ends, "balance": _balance_json(balance(data, tol))}


def _dual_entry(compute):
    try:
        return compute()
    except BryantFluxError as exc:
        return {"unavailable": str(exc)}


def check_report(data, tol: float) -> dict:
    v = validate(data)
    b = balance(data, tol)
    deviations = [relative_deviation(contour_flux(data, p), flux_at_end(data, p)) for p in data.ends]
    worst = max(deviations)
    agreements = []
    for p in data.ends:
        e = classify_end(data, p)
        if e.flux_nonzero_predicted is not None:
            agreements.append(e.flux_nonzero_predicted == (not flux_at_end(data, p).is_zero(1e-9)))
    oracle_ok = worst <= ORACLE_TOL
    return {
        "validate": {"ok": v.ok, "issues": v.issues,
                     "schwarzian_max_error": _num(v.schwarzian_max_error),
                     "determinant_max": _num(v.determinant_max)},
        "balance": _balance_json(b),
        "oracle": {"max_relative_deviation": _num(worst), "tolerance": ORACLE_TOL, "ok": oracle_ok},
        "predicates_agree": all(agreements),
        "ok": bool(v.ok and b.balanced and oracle_ok and all(agreements)),
    }


# -- argument handling -----------------------------------------------------------

def _parse_param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise UsageError(f"--param expects name=value, got {text!r}")
    name, value = text.split("=", 1)
    v, weight = parse_expression(value.strip())
    if weight or not isinstance(v, (int, float, complex)):
        raise UsageError(f"--param {name}: value must be a constant")
    return name.strip(), v


def load_spec(args) -> SurfaceSpecFile:
    if (args.spec is None) == (args.example is None):
        raise UsageError("give exactly one of --spec FILE or --example NAME")
    if args.spec is not None:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                spec = parse_spec(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.spec}: {exc.strerror}") from exc
    else:
        try:
            spec = get_example(args.example)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from exc
    if args.param:
        spec = spec.with_parameters(dict(_parse_param(p) for p in args.param))
    return spec


def _tolerance(args) -> float:
    return default_tolerance() if args.tol is None else args.tol


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bryantflux",
        description="Flux, end classification and balancing for CMC-1 surfaces in hyperbolic space.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_spec(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--spec", help="TOML surface specification")
        p.add_argument("--example", help="built-in example (label or unique prefix)")
        p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                       help="override a parameter (repeatable)")
        p.add_argument("--tol", type=float, default=None,
                       help="balancing tolerance (default 1e-9 or $BRYANTFLUX_TOL)")
        return p

    with_spec("classify", "classify every end")
    p = with_spec("flux", "flux at every end")
    p.add_argument("--dual", action="store_true", help="also report Fl# and fl# where defined")
    with_spec("balance", "sum of the fluxes; exit 0 iff balanced")
    with_spec("check", "validation, balancing and contour-quadrature oracle")
    p = with_spec("surface", "sample the immersion and write an OBJ mesh")
    p.add_argument("--out", required=True, help="destination OBJ file")
    p.add_argument("--which", choices=("primal", "dual"), default="primal")
    p.add_argument("--n", type=int, default=32, help="samples per grid direction")
    p.add_argument("--center", default="0", help="centre of the polar grid")
    p.add_argument("--rmin", type=float, default=0.5)
    p.add_argument("--rmax", type=float, default=2.0)
    p.add_argument("--theta", type=float, default=0.9,
                   help="angular half-width as a fraction of pi")
    sub.add_parser("examples", help="list the built-in examples")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        status, report = _dispatch(args)
    except (UsageError, ParseError) as exc:
        _error(stderr, exc, "spec")
        return 2
    except (BryantFluxError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        _error(stderr, exc, "computation")
        return 1
    stdout.write(_dump(report) + "\n")
    return status


def _error(stream, exc: Exception, kind: str) -> None:
    body = {"type": type(exc).__name__, "kind": kind, "message": str(exc)}
    if isinstance(exc, ParseError):
        body["line"] = exc.line
        body["column"] = exc.column
    stream.write(_dump({"error": body}) + "\n")


def _dispatch(args) -> tuple[int, dict]:
    if args.command == "examples":
        out = _header("examples", None)
        out["examples"] = [{"label": ex.label, "G": ex.G, "g": ex.g, "Q": ex.Q,
                            "ends": list(ex.ends), "parameters": ex.parameters}
                           for ex in builtin_examples()]
        return 0, out
    spec = load_spec(args)
    data = build_surface(spec)
    out = _header(args.command, spec)
    tol = _tolerance(args)
    if args.command == "classify":
        out["ends"] = classify_report(data)
        return 0, out
    if args.command == "flux":
        out.update(flux_report(data, args.dual, tol))
        return 0, out
    if args.command == "balance":
        b = balance(data, tol)
        out["ends"] = [{"end": format_point(p), "flux": _matrix(f.entries)} for p, f in b.per_end]
        out.update(_balance_json(b))
        return (0 if b.balanced else 1), out
    if args.command == "check":
        out.update(check_report(data, tol))
        return (0 if out["ok"] else 1), out
    if args.command == "surface":
        center, _ = parse_expression(args.center)
        if not isinstance(center, (int, float, complex)):
            raise UsageError("--center must be a constant")
        half = args.theta * math.pi
        grid = PolarGrid(complex(center), args.rmin, args.rmax, -half, half, args.n, args.n)
        mesh = immerse(data, grid, args.which)
        export_obj(mesh, args.out)
        drift = float(np.max(np.abs(np.linalg.det(mesh.frames) - 1)))
        out.update({"out": args.out, "which": args.which, "vertices": len(mesh.vertices),
                    "faces": len(mesh.faces), "max_det_drift": _num(drift),
                    "domain": mesh.domain_record})
        return 0, out
    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
