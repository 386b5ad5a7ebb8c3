"""Named verification checks, one per acceptance criterion.

Each check takes ``full`` (bool).  The full suite runs the stated sizes and
tolerances; the quick suite shrinks sample sizes and bounds so the whole
run fits in a few seconds, while keeping tolerances unchanged wherever the
computation is cheap.
"""
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import arith, enumeration, expsums, geometry, lattice, localdens


@dataclass
class CheckResult:
    name: str
    criterion: int
    passed: bool
    elapsed_seconds: float
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "criterion": self.criterion, "passed": bool(self.passed),
                "elapsed_seconds": self.elapsed_seconds, "detail": self.detail}


def _rng(seed):
    return np.random.default_rng(seed)


# ------------------------------------------------------------ oracles

def naive_point_heights(B: int) -> list:
    """Heights of all canonical points off the thin set with height <= B.

    Deliberately plain: every primitive x with |x|^3 <= B, every y in the
    full box, canonical signs chosen afterwards.
    """
    X = arith.iroot(B, 3)
    heights = []
    for x in product(range(-X, X + 1), repeat=4):
        if 0 in x or math.gcd(*x) != 1:
            continue
        d = x[0] * x[1] * x[2] * x[3]
        if d >= 0 and math.isqrt(d) ** 2 == d:
            continue
        first = next(t for t in x if t)
        if first < 0:
            continue
        n = max(abs(t) for t in x)
        Y = math.isqrt(B // n ** 3)
        g = np.arange(-Y, Y + 1)
        ys = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), -1).reshape(-1, 4)
        ys = ys[(ys ** 2 @ np.array(x)) == 0]
        ys = ys[np.gcd.reduce(np.abs(ys), axis=1) == 1]
        # first nonzero entry positive
        lead = ys[np.arange(len(ys)), (ys != 0).argmax(axis=1)]
        ys = ys[lead > 0]
        heights.extend((n ** 3 * np.abs(ys).max(axis=1) ** 2).tolist())
    return sorted(heights)


def naive_box_count(y, R: int, filter: str = "none") -> int:
    g = np.arange(-R, R + 1)
    xs = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), -1).reshape(-1, 4)
    xs = xs[(xs @ (np.array(y) ** 2)) == 0]
    if filter == "none":
        return len(xs)
    d = np.prod(xs, axis=1)
    ns = ~np.array([v >= 0 and math.isqrt(int(v)) ** 2 == v for v in d], dtype=bool)
    if filter == "nonsquare":
        return int(ns.sum())
    prim = np.gcd.reduce(np.abs(xs), axis=1) == 1
    return int((ns & prim).sum())


# ------------------------------------------------------------ checks

def check_rho(full):
    exact = {
        (1, 0, 0, 0): geometry.rho_infinity((1, 0, 0, 0)) == 8,
        (1, 1, 1, 1): geometry.rho_infinity((1, 1, 1, 1)) == Fraction(16, 3),
        (1, 1, 0, 0): geometry.rho_infinity((1, 1, 0, 0)) == 8,
    }
    rng = _rng(1)
    n = 50 if full else 8
    worst = 0.0
    for _ in range(n):
        m = int(rng.integers(2, 5))
        y = [0] * 4
        for i in rng.choice(4, m, replace=False):
            y[i] = int(rng.integers(1, 8)) * int(rng.choice([-1, 1]))
        ex = float(geometry.rho_infinity(y))
        num = geometry.rho_infinity_quadrature(y)
        worst = max(worst, abs(ex - num))
    ok = all(exact.values()) and worst <= 1e-6
    return ok, {"exact_values_ok": all(exact.values()), "samples": n, "max_abs_diff": worst}


def check_gauss(full):
    qmax = 99 if full else 31
    worst = 0.0
    cases = 0
    for q in range(1, qmax + 1, 2):
        for c in range(q):
            table = expsums.gauss_table(c, q)
            for b in range(q):
                if math.gcd(b, q) != 1:
                    continue
                v = complex(expsums.gauss_sum(b, c, q, method="closed"))
                worst = max(worst, abs(v - table[b]))
                cases += 1
    return worst <= 1e-9, {"q_max": qmax, "cases": cases, "max_abs_diff": worst}


def _random_form(rng, lo=-12, hi=12):
    while True:
        A = [int(t) for t in rng.integers(lo, hi + 1, 4)]
        if 0 not in A:
            return A


def check_sq(full):
    rng = _rng(3)
    n = 200 if full else 30
    mism = []
    for _ in range(n):
        A = _random_form(rng)
        q = int(rng.integers(1, 201 if full else 61))
        c = [int(t) for t in rng.integers(0, q, 4)]
        F = expsums.DiagonalForm.of(A)
        a = expsums.s_q_int(F, c, q, "factored")
        b = expsums.s_q_int(F, c, q, "direct")
        if a != b:
            mism.append((A, c, q, a, b))
    # vanishing at c = 0 for odd p dividing the discriminant exactly once
    zero_cases = 0
    zero_bad = []
    for A in ([1, 1, 1, 5], [1, 2, 3, 7], [3, 1, 1, 2], [1, -1, 2, 11], [5, 3, 1, -1], [1, 1, 4, 13]):
        F = expsums.DiagonalForm.of(A)
        for p in arith.factorint(abs(F.disc)):
            if p == 2 or F.disc % (p * p) == 0 or F.disc_bad % p == 0:
                continue
            for r in (1, 2):
                if p ** r > 200:
                    continue
                zero_cases += 1
                fa = expsums.s_q_int(F, [0] * 4, p ** r, "factored")
                di = expsums.s_q_int(F, [0] * 4, p ** r, "direct")
                if fa != 0 or di != 0:
                    zero_bad.append((A, p, r, fa, di))
    m_bad = []
    for _ in range(50 if full else 10):
        A = _random_form(rng)
        c = [int(t) for t in rng.integers(0, 15, 4)]
        F = expsums.DiagonalForm.of(A)
        s15 = expsums.s_q_int(F, c, 15, "direct")
        s3 = expsums.s_q_int(F, c, 3, "direct")
        s5 = expsums.s_q_int(F, c, 5, "direct")
        if s15 != s3 * s5:
            m_bad.append((A, c, s15, s3, s5))
    ok = not mism and not zero_bad and not m_bad and zero_cases > 0
    return ok, {"instances": n, "mismatches": mism[:5], "zero_cases": zero_cases,
                "zero_failures": zero_bad, "multiplicativity_failures": m_bad[:5]}


def check_psi(full):
    qs = (2, 3, 4, 5, 6)
    brute = {q: (expsums.psi_q(q, "closed"), expsums.psi_q(q, "brute")) for q in qs}
    off = [q for q in range(1, 101) if not arith.is_square(q) and expsums.psi_q(q, "closed") != 0]
    known = {4: 7680, 9: 3149280}
    vals = {q: expsums.psi_q(q, "closed") for q in known}
    ok = all(a == b for a, b in brute.values()) and not off and vals == known
    return ok, {"closed_vs_brute": {str(q): list(v) for q, v in brute.items()},
                "nonzero_off_squares": off, "values": {str(k): v for k, v in vals.items()}}


def check_n(full):
    pairs = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)]
    agree = {f"{p}^{t}": (localdens.n_full(p, t, "factorized"), localdens.n_full(p, t, "brute"))
             for p, t in pairs}
    worst = -math.inf
    for p in (2, 3, 5, 7):
        for t in (1, 2, 3):
            n = localdens.n_full(p, t)
            dev = abs(Fraction(n, p ** (7 * t)) - (1 + Fraction(1, p * p)))
            worst = max(worst, float(dev * p ** t))   # must stay <= 2
    n3 = localdens.n_full(3, 1)
    ok = all(a == b for a, b in agree.values()) and worst <= 2 and n3 == 2241
    return ok, {"factorized_vs_brute": {k: list(v) for k, v in agree.items()},
                "max_scaled_deviation": worst, "n_3": n3}


def check_euler_product(full):
    chk = localdens.euler_product_check(10 ** 5)
    return chk["abs_diff"] <= 1e-4, chk


def check_tau(full):
    t1, t2 = (1e-3, 5e-3) if full else (1e-2, 2e-2)
    a = geometry.tau_infinity("via_rho", t1)
    b = geometry.tau_infinity("via_sigma", t2)
    lo = max(a.interval()[0], b.interval()[0])
    hi = min(a.interval()[1], b.interval()[1])
    ok = lo <= hi and a.abs_error_bound <= t1 and b.abs_error_bound <= t2
    return ok, {"via_rho": [a.value, a.abs_error_bound], "via_sigma": [b.value, b.abs_error_bound],
                "tolerances": [t1, t2], "overlap": [lo, hi] if lo <= hi else None}


def _random_primitive(rng, bound):
    while True:
        y = [int(t) for t in rng.integers(-bound, bound + 1, 4)]
        if any(y) and math.gcd(*y) == 1:
            return y


def check_lattice(full):
    rng = _rng(8)
    n = 200 if full else 30
    det_bad = []
    for _ in range(n):
        y = _random_primitive(rng, 50)
        L = lattice.fiber_lattice_basis(y)
        B = np.array(L.basis, dtype=object)
        G = B.dot(B.T)
        det = (G[0][0] * (G[1][1] * G[2][2] - G[1][2] * G[2][1])
               - G[0][1] * (G[1][0] * G[2][2] - G[1][2] * G[2][0])
               + G[0][2] * (G[1][0] * G[2][1] - G[1][1] * G[2][0]))
        if det != sum(t ** 4 for t in y):
            det_bad.append(y)
    m4 = lattice.count_fiber_box(lattice.fiber_lattice_basis((1, 1, 1, 1)), 1)
    box_bad = []
    samples = 40 if full else 8
    for _ in range(samples):
        y = _random_primitive(rng, 10)
        R = int(rng.integers(0, 11 if full else 6))
        L = lattice.fiber_lattice_basis(y)
        for f in ("none", "nonsquare", "nonsquare_primitive"):
            a = lattice.count_fiber_box(L, R, f)
            b = naive_box_count(y, R, f)
            if a != b:
                box_bad.append((y, R, f, a, b))
    ok = not det_bad and m4 == 19 and not box_bad
    return ok, {"gram_samples": n, "gram_failures": det_bad[:5], "M4_unit": m4,
                "box_samples": samples, "box_failures": box_bad[:5]}


def check_local_densities(full):
    x = (1, 1, 1, -1)
    r1 = localdens.local_density_fiber(x, 3, 1)
    r2 = localdens.local_density_fiber(x, 3, 2)
    lim, r_used, _ = localdens.lifted_density(x, 3)
    bad = []
    forms = [(1, 1, 1, -1), (1, 2, 3, -5), (2, 3, -1, -7)]
    for xx in forms:
        F = expsums.DiagonalForm.of(xx)
        for p in (3, 5, 7):
            if (2 * F.disc) % p == 0:
                continue
            partial = Fraction(1)
            for r in range(1, (4 if full else 3) + 1):
                partial += Fraction(expsums.s_q_int(F, [0] * 4, p ** r, "direct"), p ** (4 * r))
                got = localdens.local_density_fiber(xx, p, r)
                if got != partial:
                    bad.append((xx, p, r, str(got), str(partial)))
    ok = (r1 == Fraction(7, 9) and r2 == Fraction(23, 27)
          and abs(float(lim) - 5 / 6) <= 1e-3 and not bad)
    return ok, {"r1": str(r1), "r2": str(r2), "limit": float(lim), "r_used": r_used,
                "partial_sum_failures": bad}


def check_m1_slope(full):
    B = 10 ** 6 if full else 10 ** 4
    a = localdens.main_term_M1(B)
    b = localdens.main_term_M1(4 * B)
    slope = (b.empirical_sum - a.empirical_sum) / math.log(4)
    rel = slope / a.predicted_slope - 1
    return abs(rel) <= 0.10, {"B": B, "slope": slope, "predicted": a.predicted_slope,
                              "relative_error": rel}


def check_counts(full):
    c = localdens.peyre_constant_value()
    n1 = enumeration.count_points(1).canonical_count
    Bn = 500 if full else 100
    heights = naive_point_heights(Bn)
    hs = np.array(heights)
    tested = list(range(1, Bn + 1)) if full else [1, 2, 8, 27, 50, 64, 100]
    naive_bad = []
    for B in tested:
        got = enumeration.count_points(B, c=c).canonical_count
        want = int((hs <= B).sum())
        if got != want:
            naive_bad.append((B, got, want))
    Bs = (10 ** 3, 10 ** 4, 10 ** 5) if full else (10 ** 2, 10 ** 3, 10 ** 4)
    ratios = [enumeration.count_points(B, c=c).ratio for B in Bs]
    monotone = all(abs(1 - r2) < abs(1 - r1) for r1, r2 in zip(ratios, ratios[1:]))
    in_band = abs(ratios[-1] - 1) <= 0.35
    exact_ok = n1 == 24 and not naive_bad
    # the trend is the gate; the 35% band is reported, not enforced
    ok = exact_ok and monotone
    return ok, {"N_1": n1, "naive_B_max": Bn, "naive_failures": naive_bad[:5],
                "B": list(Bs), "ratios": ratios, "monotone_toward_1": monotone,
                "within_35pct_at_last_B": in_band, "band_gated": False}


def check_weighted(full):
    F = (1, 2, 3, -5)
    w = geometry.SmoothWeight(0.05, "inner_w1")
    P = 400
    nw = enumeration.weighted_count(F, w, P)
    sig = geometry.sigma_infinity_weighted(w, F)
    ser = localdens.singular_series_value(F)
    pred = sig * ser * P * P
    rel = (nw - pred) / pred
    return abs(rel) <= 0.15, {"N_w": nw, "sigma_w": sig, "series": ser, "predicted": pred,
                              "relative_error": rel}


CHECKS = [
    ("rho_exact_and_quadrature", 1, check_rho),
    ("gauss_closed_form", 2, check_gauss),
    ("exponential_sum_methods", 3, check_sq),
    ("psi_values", 4, check_psi),
    ("full_local_counts", 5, check_n),
    ("euler_product_15_over_pi2", 6, check_euler_product),
    ("tau_two_routes", 7, check_tau),
    ("fiber_lattice_suite", 8, check_lattice),
    ("local_density_lifting", 9, check_local_densities),
    ("m1_slope", 10, check_m1_slope),
    ("end_to_end_counts", 11, check_counts),
    ("weighted_count_desk_check", 12, check_weighted),
]


def run_check(name: str, full: bool = True) -> CheckResult:
    for n, crit, fn in CHECKS:
        if n == name:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(full)
            except geometry.ToleranceError:
                raise
            except Exception as exc:   # a crashing check is a failed check
                ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            return CheckResult(n, crit, bool(ok), time.perf_counter() - t0, detail)
    raise KeyError(name)


def run_suite(suite: str = "quick", names=None) -> list:
    if suite not in ("quick", "full"):
        raise ValueError(f"unknown suite {suite!r}")
    names = names or [n for n, _, _ in CHECKS]
    return [run_check(n, suite == "full") for n in names]
