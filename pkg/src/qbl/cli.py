"""Command-line front end: ``python3 -m qbl <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
failure (a tolerance that could not be reached).
"""
import argparse
import os
import sys
import time

from . import enumeration, geometry, lattice, localdens, reporting, verify
from .geometry import ToleranceError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
INT64 = (-(2 ** 63), 2 ** 63 - 1)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int64(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if not INT64[0] <= v <= INT64[1]:
        raise argparse.ArgumentTypeError(f"out of signed 64-bit range: {s}")
    return v


def _positive_int(s):
    v = _int64(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {s}")
    return v


def _nonneg_int(s):
    v = _int64(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {s}")
    return v


def _positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {s}")
    return v


def _vector(s):
    parts = s.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected exactly 4 comma-separated integers, got {s!r}")
    return tuple(_int64(p.strip()) for p in parts)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    common.add_argument("--cache", default=None, help="cache directory (default $QBL_CACHE_DIR or ./cache)")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = _Parser(prog="qbl", description="Counting and densities for sum x_i y_i^2 = 0.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("count", parents=[common], help="exact point count up to height B")
    c.add_argument("--bound", type=_positive_int, required=True)
    c.add_argument("--split", choices=("auto", "y-side", "x-side"), default="auto")

    fy = sub.add_parser("fiber-y", parents=[common], help="plane fiber for fixed y")
    fy.add_argument("--y", type=_vector, required=True)
    fy.add_argument("--radius", type=_nonneg_int, required=True)
    fy.add_argument("--filter", choices=("none", "nonsquare", "nonsquare-primitive"), default="none")

    fx = sub.add_parser("fiber-x", parents=[common], help="quadric fiber for fixed x")
    fx.add_argument("--x", type=_vector, required=True)
    fx.add_argument("--ybound", type=_nonneg_int, required=True)
    fx.add_argument("--tol", type=_positive_float, default=1e-8)
    fx.add_argument("--prime-bound", type=_positive_int, default=10 ** 4)

    k = sub.add_parser("constants", parents=[common], help="tau and the leading constant")
    k.add_argument("--method", choices=("rho", "sigma", "both"), default="both")
    k.add_argument("--tol", type=_positive_float, default=1e-3)

    s = sub.add_parser("series", parents=[common], help="singular series Euler factors")
    s.add_argument("--x", type=_vector, required=True)
    s.add_argument("--prime-bound", type=_positive_int, default=10 ** 4)
    s.add_argument("--rmax", type=_positive_int, default=8)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    v.add_argument("--suite", choices=("quick", "full"), default="quick")
    return p


def _fix_negative_vectors(argv):
    # "--x -1,2,3,4" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--x", "--y"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and "," in nxt:
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


# ------------------------------------------------------------ commands

def run_count(a):
    split = {"auto": "auto", "y-side": "y_side_only", "x-side": "x_side_only"}[a.split]
    rep = enumeration.count_points(a.bound, split=split)
    rep.thread_count = a.threads
    return rep.to_dict()


def run_fiber_y(a):
    y = a.y
    if not any(y):
        raise UsageError("y must be nonzero")
    try:
        L = lattice.fiber_lattice_basis(y)
    except ValueError as exc:
        raise UsageError(str(exc))
    minima, shortest = lattice.successive_minima_sup(L)
    filt = a.filter.replace("-", "_")
    cnt = lattice.count_fiber_box(L, a.radius, filt)
    rho = geometry.rho_infinity(y)
    return {"y": list(y), "radius": a.radius, "filter": a.filter, "count": cnt,
            "basis": [list(v) for v in L.basis], "det_squared": L.det_squared,
            "minima": list(minima), "shortest": list(shortest),
            "rho": float(rho), "rho_exact": str(rho.rational_part),
            "rho_R3": float(rho) * a.radius ** 3}


def run_fiber_x(a):
    x = a.x
    if 0 in x:
        raise UsageError("x must have nonzero entries")
    cnt = enumeration.fiber_point_count(x, a.ybound)
    sig, info = geometry.sigma_infinity_fiber(x, a.tol, return_info=True)
    thin = enumeration.thin_set_membership(x)
    ser = None if thin else localdens.singular_series_value(x, a.prime_bound)
    pred = None if ser is None or info["definite"] else sig * ser * a.ybound ** 2
    return {"x": list(x), "ybound": a.ybound, "count": cnt, "sigma": sig,
            "definite": info["definite"], "square_discriminant": thin,
            "series": ser, "predicted": pred}


def run_constants(a):
    routes = {"rho": ["via_rho"], "sigma": ["via_sigma"], "both": ["via_rho", "via_sigma"]}[a.method]
    ests = [geometry.tau_infinity(m, a.tol) for m in routes]
    out = {"estimates": [reporting.to_jsonable(e) for e in ests]}
    if len(ests) == 2:
        out["consistent"] = ests[0].consistent_with(ests[1])
    pc = localdens.peyre_constant(ests[0])
    out["peyre_constant"] = pc["c"]
    out["peyre_constant_error"] = pc["c_error"]
    out["euler_check"] = pc["euler_check"]
    return out


def run_series(a):
    try:
        ef = localdens.singular_series_fiber(a.x, a.prime_bound, a.rmax)
    except ValueError as exc:
        raise UsageError(str(exc))
    return {"x": list(a.x), "value": ef.value, "tail_estimate": ef.tail_estimate,
            "tail_note": ef.tail_note, "truncation_prime_bound": ef.truncation_prime_bound,
            "factors": ef.rows(),
            "lifted": [{"p": f.p, "factor": str(f.factor), "r_used": f.r_used,
                        "partials": [str(v) for v in f.partials]}
                       for f in ef.prime_factors if f.method == "lifted"]}


def run_verify(a):
    results = verify.run_suite(a.suite)
    checks = [r.to_dict() for r in results]
    return {"suite": a.suite, "passed": all(c["passed"] for c in checks), "checks": checks}


COMMANDS = {"count": run_count, "fiber-y": run_fiber_y, "fiber-x": run_fiber_x,
            "constants": run_constants, "series": run_series, "verify": run_verify}
UNCACHED = {"verify"}


def _params(a):
    skip = {"command", "threads", "cache", "no_cache", "out", "format"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(a).items()) if k not in skip}


def dispatch(a) -> int:
    params = _params(a)
    cache = None if a.no_cache or a.command in UNCACHED else reporting.ResultCache(a.cache)
    fp = reporting.fingerprint(a.command, params) if cache else None
    rec = cache.lookup(fp) if cache else None
    if rec is not None:
        result, elapsed = rec["result"], rec["elapsed_seconds"]
        print(f"cache hit {fp[:12]}", file=sys.stderr)
    else:
        t0 = time.perf_counter()
        result = reporting.to_jsonable(COMMANDS[a.command](a))
        elapsed = time.perf_counter() - t0
        if cache:
            cache.append(fp, a.command, params, result, elapsed)
    doc = reporting.build_report(a.command, params, result, elapsed, a.threads)
    try:
        text = reporting.write_report(doc, a.format, a.out)
    except OSError as exc:
        raise UsageError(f"cannot write {a.out}: {exc}")
    if a.out is None:
        sys.stdout.write(text)
    if a.command == "verify" and not result["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    argv = _fix_negative_vectors(list(sys.argv[1:] if argv is None else argv))
    try:
        a = build_parser().parse_args(argv)
        return dispatch(a)
    except UsageError as exc:
        print(f"qbl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ToleranceError as exc:
        print(f"qbl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
