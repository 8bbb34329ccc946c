"""Command-line front end: ``circlecalc {fourier,check,entropy,witt,trace}``.

Exit codes: 0 when every selected check passes, 1 on a check failure, 2 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import kappa as KP
from . import measures as M
from . import premeasure as P
from . import witt as W
from .errors import CircleCalcError, ValidationError
from .generators import validate_generators
from .series import feq_residual

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_json(text):
    """Inline JSON or a path to a JSON file; decode errors carry line and column."""
    if text is None:
        raise InputError("--input is required")
    src, name = text, "<inline>"
    if not text.lstrip().startswith(("{", "[")) and os.path.exists(text):
        name = text
        with open(text, encoding="utf-8") as fh:
            src = fh.read()
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise InputError(f"{name}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _parse_gens(text):
    try:
        return validate_generators(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise InputError(f"--gens: {exc}") from exc


def _is_mass(obj):
    if not isinstance(obj, dict):
        return False
    if "mass" in obj and isinstance(obj["mass"], dict):
        return True
    return obj.get("type") == "lacunary" or "jumps" in obj or "smooth" in obj


def _load_object(obj):
    """A measure tree, or a mass function when wrapped as {"mass": ...} or shaped like one."""
    if isinstance(obj, dict) and isinstance(obj.get("mass"), dict):
        return P.mass_from_json(obj["mass"])
    if _is_mass(obj):
        return P.mass_from_json(obj)
    return M.measure_from_json(obj)


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x).__name__}")


# subcommands ------------------------------------------------------------------------------

def cmd_fourier(args):
    obj = _load_object(_load_json(args.input))
    if isinstance(obj, P.MassFunction):
        c = P.distribution_coefficients(obj, args.order)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["nu", "re", "im", "errbound"])
        for nu in range(-args.order, args.order + 1):
            v = c[abs(nu)] if nu >= 0 else np.conj(c[-nu])
            w.writerow([nu, repr(float(v.real)), repr(float(v.imag)), repr(0.0)])
        _emit(args, buf.getvalue())
        return EXIT_OK
    window = M.fourier(obj, args.order, args.tol)
    _emit(args, window.to_csv())
    return EXIT_OK


def cmd_check(args):
    obj = _load_object(_load_json(args.input))
    gens = _parse_gens(args.gens)
    reports = []
    if isinstance(obj, P.MassFunction):
        for N in gens:
            rep = P.functional_eq_check(obj, N, n_grid=args.grid, tol=args.tol)
            reports.append({"check": "functional_eq", **rep})
    else:
        for N in gens:
            rep = M.invariance_check(obj, N, args.order, args.tol)
            reports.append({"check": "invariance", "N": N, **rep})
            f = M.f_mu_series(obj, args.order).series
            res = feq_residual(f, N)
            reports.append({"check": "feq_residual", "N": N, "residual": res, "pass": res <= args.feq_tol})
    ok = all(r["pass"] for r in reports)
    _emit(args, _dump({"pass": ok, "reports": reports}))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_entropy(args):
    obj = _load_json(args.input)
    kap = KP.parse_kappa(args.kappa)
    if not isinstance(obj, dict):
        raise InputError("$: object expected")
    if "points" in obj:
        pts = []
        for i, p in enumerate(obj["points"]):
            try:
                pts.append(Fraction(p) if isinstance(p, (str, int)) else float(p))
            except (ValueError, TypeError) as exc:
                raise InputError(f"$.points[{i}]: bad point {p!r}") from exc
        E = KP.FiniteCircleSet(tuple(pts))
        out = {"set": "finite", "kappa": kap.label(), "entropy": KP.entropy_finite(E, kap), "pass": True}
    elif "roots_of_unity" in obj:
        N = int(obj["roots_of_unity"])
        E = KP.FiniteCircleSet(tuple(Fraction(k, N) for k in range(N)))
        out = {"set": f"roots_of_unity({N})", "kappa": kap.label(), "entropy": KP.entropy_finite(E, kap), "pass": True}
    elif "cantor" in obj:
        c = obj["cantor"]
        try:
            desc = KP.CantorDesc(int(c["base"]), tuple(c["digits"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"$.cantor: needs base and digits ({exc})") from exc
        rep = KP.entropy_cantor(desc, kap, tol=args.tol)
        out = {"set": "cantor", "base": desc.base, "digits": list(desc.digits), "kappa": kap.label(),
               "entropy": rep["value"] if math.isfinite(rep["value"]) else None,
               "error_bound": rep["error_bound"] if math.isfinite(rep["error_bound"]) else None,
               "levels": rep["levels"], "carleson": rep["carleson"], "reason": rep.get("reason"),
               "pass": True}
    else:
        raise InputError("$: expected 'points', 'roots_of_unity' or 'cantor'")
    _emit(args, _dump(out))
    return EXIT_OK


def cmd_witt(args):
    gens = _parse_gens(args.gens)
    K = args.order
    op = args.op
    if op == "suite":
        rep = W.ring_axioms_check(n_vectors=args.vectors, K=min(K, 24), seed=args.seed)
        idem = W.idempotency_resolution(gens[0], 16)
        rep = {"ring": rep, "idempotency": idem, "pass": rep["pass"] and idem["resolved"]}
        rep["ring"]["failures"] = [list(f) for f in rep["ring"]["failures"]]
        _emit(args, _dump(rep))
        return EXIT_OK if rep["pass"] else EXIT_FAIL
    if op == "integrality":
        rows = [W.p_integral_check(W.artin_hasse(p, K), p) for p in gens]
        ok = all(r["pass"] for r in rows)
        _emit(args, _dump({"checks": rows, "pass": ok}))
        return EXIT_OK if ok else EXIT_FAIL
    if op == "idempotency":
        rep = W.idempotency_resolution(gens[0], K)
        _emit(args, _dump(rep))
        return EXIT_OK if rep["resolved"] else EXIT_FAIL
    if op == "ghost":
        E = W.artin_hasse(gens[0], K) if len(gens) == 1 else W.artin_hasse_S(gens, K)
        g = [None] + W.ghost(E)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["n", "coefficient", "ghost"])
        for n in range(K + 1):
            w.writerow([n, str(E.series[n]), "" if n == 0 else str(g[n])])
        _emit(args, buf.getvalue())
        return EXIT_OK
    if op == "w":
        obj = _load_object(_load_json(args.input))
        wv = W.w_of_premeasure(obj, K)
        _emit(args, W.pretty(wv) + "\n")
        return EXIT_OK
    raise InputError(f"unknown witt op {op!r}")


def _h_evaluator(obj):
    if isinstance(obj, P.MassFunction):
        return lambda z, tol: P.eval_herglotz_mass(obj, z, tol)
    return lambda z, tol: M.eval_herglotz(obj, z, tol)


def cmd_trace(args):
    raw = _load_json(args.input)
    if args.mode == "radial":
        h = _h_evaluator(_load_object(raw))
        eta = Fraction(args.eta) if args.eta is not None else Fraction(0)
        rep = P.radial_atom(h, eta, ks=range(1, args.kmax + 1), tol=args.tol)
        _emit(args, P.radial_csv(rep))
        return EXIT_OK
    radii = [1 - 2.0 ** -j for j in range(args.jmin, args.jmax + 1)]
    if isinstance(raw, dict) and "lacunary_sum" in raw:
        spec = raw["lacunary_sum"]
        S = validate_generators(spec.get("gens", [2, 3]))
        coeff = float(spec.get("coeff", 2.0))
        h = KP.lacunary_sum_eval(S, coeff)
        rep = KP.growth_class_check(h, args.gamma, radii, sup_fn=KP.lacunary_sum_sup(S, coeff))
    else:
        h = _h_evaluator(_load_object(raw))
        rep = KP.growth_class_check(h, args.gamma, radii, n_theta=args.n_theta, tol=args.tol)
    _emit(args, KP.growth_csv(rep))
    return EXIT_OK


# parser -----------------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="inline JSON or path to a JSON file")
    common.add_argument("--order", type=int, default=32, help="truncation order K")
    common.add_argument("--tol", type=float, default=1e-10, help="certified tolerance")
    common.add_argument("--gens", default="2", help="comma-separated generators, e.g. 2,3")
    common.add_argument("--kappa", default="gamma=1", help="gamma=<g> or power=<alpha>")
    common.add_argument("--out", "-o", help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")

    p = argparse.ArgumentParser(prog="circlecalc", description="Circle measures, premeasures and Witt vectors.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("fourier", parents=[common], help="Fourier window CSV of a measure")
    c = sub.add_parser("check", parents=[common], help="invariance and functional-equation checks")
    c.add_argument("--grid", type=int, default=512)
    c.add_argument("--feq-tol", type=float, default=1e-10)
    sub.add_parser("entropy", parents=[common], help="kappa-entropy of finite or Cantor sets")
    w = sub.add_parser("witt", parents=[common], help="Witt vector operations and identity suite")
    w.add_argument("--op", default="suite", choices=["suite", "integrality", "idempotency", "ghost", "w"])
    w.add_argument("--vectors", type=int, default=100)
    t = sub.add_parser("trace", parents=[common], help="radial atom traces and growth profiles")
    t.add_argument("--mode", default="radial", choices=["radial", "growth"])
    t.add_argument("--eta", help="point in turns for radial traces, e.g. 1/6")
    t.add_argument("--kmax", type=int, default=16)
    t.add_argument("--gamma", type=float, default=2.0)
    t.add_argument("--jmin", type=int, default=6)
    t.add_argument("--jmax", type=int, default=12)
    t.add_argument("--n-theta", type=int, default=1536)
    return p


COMMANDS = {"fourier": cmd_fourier, "check": cmd_check, "entropy": cmd_entropy,
            "witt": cmd_witt, "trace": cmd_trace}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.order < 1 or args.tol <= 0:
        sys.stderr.write("circlecalc: --order must be >= 1 and --tol > 0\n")
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except (InputError, ValidationError, CircleCalcError, ValueError) as exc:
        sys.stderr.write(f"circlecalc: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
