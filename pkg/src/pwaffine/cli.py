"""Command-line front end.

Every command prints a JSON envelope {command, params, result, diagnostics}
or CSV rows.  Exit codes: 0 ok, 2 invalid parameters, 3 computation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import __version__
from .conjugation import ConjugationSpec, phi_eval
from .core import (
    ParameterError,
    PwAffineError,
    RationalRot,
    SideReal,
    check_rho,
    r_bound,
    validate_params,
)
from .dynamics import forward_orbit
from .heckemahler import SeriesTolerance, delta_of_rho, delta_plateau, sigma_eval
from .limitset import cycle_points, fminus_cycle, gaps_up_to, iterated_image, total_gap_length
from .rotation import NOT_RATIONAL, RIGHT_ENDPOINT, rho_exact, rho_orbit_estimate

NAMED_CONSTANTS = {
    "sqrt5m1over2": (math.sqrt(5) - 1) / 2,
    "golden_conjugate": (math.sqrt(5) - 1) / 2,
}

EXIT_OK, EXIT_PARAMS, EXIT_COMPUTE = 0, 2, 3


class UsageError(Exception):
    """Bad flag combination; reported with exit code 2."""


def parse_real(text: str) -> float:
    key = text.strip().lower()
    if key in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[key]
    try:
        return float(Fraction(key)) if "/" in key else float(key)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number or named constant: {text!r}")


def _num(x):
    # 17 significant digits round-trip any double
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.17g}")
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return {"p": obj.numerator, "q": obj.denominator}
    if isinstance(obj, RationalRot):
        return {"p": obj.p, "q": obj.q}
    if hasattr(obj, "__float__") and not isinstance(obj, (int, float, bool)):
        return _num(float(obj))
    return _num(obj)


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, default=str)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _tol(args) -> SeriesTolerance:
    return SeriesTolerance(abs_tol=args.tol, max_terms=args.max_terms, precision=args.precision)


def _params(args):
    for name in ("lam", "mu", "delta"):
        if getattr(args, name) is None:
            raise UsageError(f"--{'lambda' if name == 'lam' else name} is required")
    return validate_params(args.lam, args.mu, args.delta)


def _rho(args, required=True):
    if args.rho_rational is not None and args.rho_real is not None:
        raise UsageError("give either --rho-real or --rho-rational, not both")
    if args.rho_rational is not None:
        try:
            return RationalRot.parse(args.rho_rational)
        except ValueError as exc:
            raise ParameterError(str(exc))
    if args.rho_real is not None:
        return args.rho_real
    if required:
        raise UsageError("--rho-real or --rho-rational is required")
    return None


def _echo(args):
    keys = ("lam", "mu", "delta", "rho_real", "rho_rational", "side", "x0", "y", "steps",
            "depth", "n", "samples", "max_den", "tol", "max_terms", "precision")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out["lambda" if k == "lam" else k] = v
    return out


# ---- commands: each returns (result, diagnostics) or a CSV string


def _rho_result(params, max_den, orbit_steps):
    res = rho_exact(params, max_den=max_den)
    est = rho_orbit_estimate(params, orbit_steps)
    out = {"boundary": res.boundary}
    if res.boundary == NOT_RATIONAL:
        out["bracket"] = list(res.bracket)
        out["estimate"] = res.value.approx
        out["error_bound"] = res.value.error_bound
    else:
        out["rotation"] = res.rational
        out["plateau"] = [res.plateau.delta_left, res.plateau.delta_right]
    out["orbit_estimate"] = {"value": est.approx, "error_bound": est.error_bound, "steps": orbit_steps}
    return out, dict(res.evidence)


def cmd_rho(args):
    if args.sweep:
        lo, hi, num = args.sweep
        num = int(num)
        grid = [lo + (hi - lo) * i / max(num - 1, 1) for i in range(num)]
        plist = [validate_params(args.lam, args.mu, d) for d in grid]
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda p: _rho_result(p, args.max_den, args.steps)[0], plist))
        if args.format == "csv":
            rows = []
            for d, r in zip(grid, results):
                value = float(Fraction(r["rotation"].p, r["rotation"].q)) if "rotation" in r else r["estimate"]
                rows.append((d, value, r["boundary"]))
            return _csv(["delta", "rho", "boundary"], rows)
        return [dict(delta=d, **r) for d, r in zip(grid, results)], {"points": num}
    params = _params(args)
    return _rho_result(params, args.max_den, args.steps)


def cmd_delta(args):
    lam, mu = args.lam, args.mu
    if lam is None or mu is None:
        raise UsageError("--lambda and --mu are required")
    rho = _rho(args)
    tol = _tol(args)
    if isinstance(rho, RationalRot):
        check_rho(lam, mu, rho)
        pl = delta_plateau(lam, mu, rho)
        value = pl.delta_left if args.side == "left" else pl.delta_right
        return {"delta": value, "side": args.side, "plateau": [pl.delta_left, pl.delta_right]}, {"exact": True}
    ev = sigma_eval(lam, mu, rho, tol)
    value = delta_of_rho(lam, mu, rho, tol)
    return {"delta": value}, {"terms": ev.terms, "tail_bound": ev.tail_bound, "abs_tol": tol.abs_tol}


def cmd_phi(args):
    params = _params(args)
    rho = _rho(args)
    if args.y is None:
        raise UsageError("--y is required")
    spec = ConjugationSpec(params, rho, _tol(args))
    side = "left-limit" if args.side == "left" else "at-point"
    value = phi_eval(spec, SideReal(args.y, side))
    return {"y": args.y, "side": side, "phi": float(value)}, {"abs_tol": args.tol}


def cmd_orbit(args):
    params = _params(args)
    tr = forward_orbit(params, args.x0, args.steps)
    if args.format == "csv":
        pts = tr.points
        bits = list(tr.itinerary) + [""]
        return _csv(["k", "x_k", "bit"], ((k, float(pts[k]), bits[k]) for k in range(tr.n + 1)))
    out = {"itinerary": [int(b) for b in tr.itinerary], "final": tr.final,
           "rotation_estimate": tr.rotation_estimate()}
    if tr.floors is not None:
        out["points"] = [float(v) for v in tr.points]
    return out, {"steps": tr.n}


def cmd_gaps(args):
    params = _params(args)
    rho = _rho(args)
    gaps = gaps_up_to(params, rho, args.depth, _tol(args))
    if args.format == "csv":
        return _csv(["l", "xi_left", "xi_right"], ((g.index, g.left, g.right) for g in gaps))
    return ({"gaps": [{"l": g.index, "left": g.left, "right": g.right} for g in gaps],
             "total_length": total_gap_length(gaps)}, {"depth": args.depth})


def cmd_cycle(args):
    params = _params(args)
    rho = _rho(args, required=False)
    if rho is None:
        res = rho_exact(params, max_den=args.max_den)
        if res.rational is None:
            raise PwAffineError("rotation number is not rational at this max-den; no cycle")
        rot, boundary = res.rational, res.boundary
    else:
        if not isinstance(rho, RationalRot):
            raise UsageError("cycle needs --rho-rational")
        rot, boundary = rho, None
    if boundary == RIGHT_ENDPOINT:
        cyc = fminus_cycle(params, rot)
    else:
        cyc = cycle_points(params, rot)
    if args.format == "csv":
        return _csv(["m", "zeta_m"], enumerate(cyc.points))
    return {"rotation": rot, "kind": cyc.kind, "zeta": list(cyc.points)}, {"boundary": boundary}


def cmd_images(args):
    params = _params(args)
    dec = iterated_image(params, args.n)
    if args.format == "csv":
        return _csv(["start", "end", "length"], ((a.start, a.end, a.length) for a in dec.arcs))
    return ({"n": dec.n, "intervals": [list(iv) for iv in dec.intervals], "measure": dec.measure},
            {"arcs": len(dec.arcs)})


def _grid(n, lo, hi, open_ends):
    if n == 1:
        return [(lo + hi) / 2 if open_ends else lo]
    if open_ends:
        return [lo + (hi - lo) * (i + 1) / (n + 1) for i in range(n)]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def cmd_plot_delta(args):
    lam = 0.9 if args.lam is None else args.lam
    mu = 0.8 if args.mu is None else args.mu
    tol = _tol(args)
    top = min(1.0, r_bound(lam, mu))
    rows = [(r, delta_of_rho(lam, mu, r, tol)) for r in _grid(args.samples, 0.0, top, True)]
    return _csv(["rho", "delta"], rows)


def cmd_plot_phi(args):
    lam = 0.95 if args.lam is None else args.lam
    mu = 0.9 if args.mu is None else args.mu
    rho = _rho(args, required=False)
    if rho is None:
        rho = NAMED_CONSTANTS["sqrt5m1over2"]
    tol = _tol(args)
    delta = args.delta if args.delta is not None else delta_of_rho(lam, mu, rho, tol)
    spec = ConjugationSpec(validate_params(lam, mu, delta), rho, tol)
    rows = [(y, float(phi_eval(spec, y))) for y in _grid(args.samples, 0.0, 1.0, False)]
    return _csv(["y", "phi"], rows)


COMMANDS = {
    "rho": (cmd_rho, "rotation number: exact rational with plateau, or a Farey bracket"),
    "delta": (cmd_delta, "delta(lambda, mu, rho) on the staircase"),
    "phi": (cmd_phi, "the conjugation phi at a point"),
    "orbit": (cmd_orbit, "lifted forward orbit and itinerary"),
    "gaps": (cmd_gaps, "gaps of the Cantor limit set"),
    "cycle": (cmd_cycle, "periodic cycle points"),
    "images": (cmd_images, "iterated image f^n(I) as arcs"),
    "plot-delta": (cmd_plot_delta, "CSV (rho, delta) samples of the staircase"),
    "plot-phi": (cmd_plot_phi, "CSV (y, phi) samples of the conjugation"),
}


def _sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--sweep expects start:stop:num")
    return parse_real(parts[0]), parse_real(parts[1]), int(parts[2])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=parse_real)
    common.add_argument("--mu", type=parse_real)
    common.add_argument("--delta", type=parse_real)
    common.add_argument("--rho-real", "--rho", dest="rho_real", type=parse_real)
    common.add_argument("--rho-rational", dest="rho_rational")
    common.add_argument("--side", choices=("at", "left"), default="at")
    common.add_argument("--x0", type=parse_real, default=0.0)
    common.add_argument("--y", type=parse_real)
    common.add_argument("--steps", type=int, default=10**5)
    common.add_argument("--orbit-steps", dest="steps", type=int)
    common.add_argument("--depth", type=int, default=10)
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--max-den", dest="max_den", type=int, default=10**6)
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--max-terms", dest="max_terms", type=int, default=10**6)
    common.add_argument("--precision", type=int, help="mantissa bits for mpmath series")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--sweep", type=_sweep, help="rho only: delta grid start:stop:num")
    common.add_argument("--timing", action="store_true", help="add elapsed seconds to diagnostics")

    parser = argparse.ArgumentParser(prog="pwaffine", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        out = func(args)
    except (ParameterError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (PwAffineError, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    if isinstance(out, str):
        sys.stdout.write(out)
        return EXIT_OK
    result, diagnostics = out
    diagnostics = dict(diagnostics)
    diagnostics.setdefault("abs_tol", args.tol)
    if args.timing:
        diagnostics["elapsed"] = time.perf_counter() - start
    if args.format == "csv":
        print("error: csv output is not available for this command", file=sys.stderr)
        return EXIT_PARAMS
    envelope = {"command": args.command, "params": _echo(args), "result": result,
                "diagnostics": diagnostics}
    print(_dumps(envelope))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
