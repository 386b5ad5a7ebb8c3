"""p-adic densities of the quadric fibers, their Euler products, the
main-term sums M1 and M2, and the leading constant of the point count.
"""
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from functools import lru_cache
from itertools import product
import math

import numpy as np

from .arith import (CoeffVector, ZETA2, ZETA3, ZETA4, factorint, is_square, iroot,
                    jacobi_symbol, primes_up_to, vec_gcd)
from .geometry import sigma_infinity_batch, tau_infinity, _rho_exact


# ------------------------------------------------------------------ counting mod p^r

def _count_mod_p_odd(c, p) -> int:
    """#{y mod p : sum c_i y_i^2 = 0} for odd p, via Gauss sums."""
    units = [t for t in c if t % p]
    k = len(units)
    if k % 2:
        return p ** 3
    chi = 1
    for t in units:
        chi *= jacobi_symbol(t, p)
    sign = jacobi_symbol(-1, p) ** (k // 2)
    # p^3 + p^(m-1) p^(k/2) (-1|p)^(k/2) chi (p-1), with m = 4 - k
    return p ** 3 + p ** (4 - k - 1 + k // 2) * sign * chi * (p - 1)


def _count_brute(c, q) -> int:
    """#{y mod q : sum c_i y_i^2 = 0 mod q} by convolving per-coordinate histograms."""
    y = np.arange(q, dtype=np.int64)
    sq = y * y % q
    hist = np.zeros(q, dtype=np.int64)
    hist[0] = 1
    for t in c:
        h = np.bincount(t % q * sq % q, minlength=q)
        nxt = np.zeros(q, dtype=np.int64)
        for v in np.nonzero(h)[0]:
            nxt += h[v] * np.roll(hist, v)
        hist = nxt
    return int(hist[0])


def _nonsingular_mod8(c) -> int:
    """Solutions mod 8 with y_i odd for some i where c_i is odd."""
    U = [i for i in range(4) if c[i] % 2]
    n = 0
    for y in product(range(8), repeat=4):
        if sum(ci * yi * yi for ci, yi in zip(c, y)) % 8:
            continue
        if any(y[i] % 2 for i in U):
            n += 1
    return n


def solution_count(c, p: int, r: int) -> int:
    """#{y mod p^r : sum c_i y_i^2 = 0 mod p^r}, by Hensel lifting.

    With U the coordinates whose coefficient is a unit, solutions having
    some y_i (i in U) prime to p lift with multiplicity p^3 per step once
    past level e (e = 1 for odd p, 3 for p = 2).  The rest have p | y_i
    for i in U; substituting y_i = p z_i and dividing by p drops the level
    by one.
    """
    c = [int(t) for t in c]
    if r == 0:
        return 1
    e = 3 if p == 2 else 1
    U = [i for i in range(4) if c[i] % p]
    if not U:
        return p ** 4 * solution_count([t // p for t in c], p, r - 1)
    if r < e:
        return _count_brute(c, p ** r)
    if p == 2:
        ns = _nonsingular_mod8(c)
    else:
        ns = _count_mod_p_odd(c, p) - p ** (4 - len(U))
    if r == e:
        return ns + _singular_count(c, U, p, r)
    c2 = [p * c[i] if i in U else c[i] // p for i in range(4)]
    return ns * p ** (3 * (r - e)) + p ** (4 - len(U)) * solution_count(c2, p, r - 1)


def _singular_count(c, U, p, r):
    c2 = [p * c[i] if i in U else c[i] // p for i in range(4)]
    return p ** (4 - len(U)) * solution_count(c2, p, r - 1)


def local_density_fiber(x, p: int, r: int) -> Fraction:
    """p^(-3r) #{y mod p^r : F(x; y) = 0 mod p^r}."""
    x = CoeffVector.of(x)
    if 0 in x.entries:
        raise ValueError("zero coefficient")
    if r < 1:
        raise ValueError("r must be positive")
    return Fraction(solution_count(x.entries, p, r), p ** (3 * r))


def euler_factor_good(x, p: int) -> Fraction:
    """(1 - chi/p^2) / (1 - chi/p) with chi the Legendre symbol of x1x2x3x4 at p."""
    x = CoeffVector.of(x)
    if p == 2 or x.delta % p == 0:
        raise ValueError("not a good prime")
    chi = jacobi_symbol(x.delta, p)
    return (1 - Fraction(chi, p * p)) / (1 - Fraction(chi, p))


def _valuation(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def local_density_limit(x, p: int) -> Fraction:
    """Exact limit of the local density as r -> infinity.

    Each lifting step maps c to a vector with the same unit parts and
    shifted p-valuations, and the limiting densities satisfy
        delta(c) = ns(c) / p^(3e) + p^(1 - |U|) delta(c'')   (U nonempty)
        delta(c) = p delta(c / p)                           (U empty).
    The valuation vectors are bounded, so the chain of states cycles; solving
    the resulting linear relation around the cycle gives the limit.
    """
    c = [int(t) for t in CoeffVector.of(x).entries]
    if 0 in c:
        raise ValueError("zero coefficient")
    e = 3 if p == 2 else 1
    seen = {}
    steps = []
    while tuple(c) not in seen:
        seen[tuple(c)] = len(steps)
        U = [i for i in range(4) if c[i] % p]
        if not U:
            steps.append((Fraction(0), Fraction(p)))
            c = [t // p for t in c]
            continue
        ns = _nonsingular_mod8(c) if p == 2 else _count_mod_p_odd(c, p) - p ** (4 - len(U))
        steps.append((Fraction(ns, p ** (3 * e)), Fraction(p) ** (1 - len(U))))
        c = [p * c[i] if i in U else c[i] // p for i in range(4)]
    j = seen[tuple(c)]
    # compose the cycle: delta_j = A + B delta_j
    A, B = Fraction(0), Fraction(1)
    for a, b in steps[j:]:
        A, B = A + B * a, B * b
    if B >= 1:
        raise ArithmeticError("local density recursion does not contract")
    val = A / (1 - B)
    for a, b in reversed(steps[:j]):
        val = a + b * val
    return val


def lifted_density(x, p: int, r_max: int = 8):
    """Local density at a bad prime: (limit, r_used, last two finite-level values).

    Lifting runs to r_stop = min(r_max, 2 v_p(2 x1x2x3x4) + 3), stopping early
    when two consecutive levels agree; the reported value is the exact limit.
    """
    x = CoeffVector.of(x)
    r_stop = min(r_max, 2 * _valuation(2 * x.delta, p) + 3)
    prev, cur = None, None
    r_used = r_stop
    for r in range(1, r_stop + 1):
        prev, cur = cur, local_density_fiber(x, p, r)
        if prev is not None and cur == prev:
            r_used = r
            break
    return local_density_limit(x, p), r_used, (prev, cur)


# ------------------------------------------------------------------ Euler products

@dataclass
class EulerFactor:
    p: int
    factor: object
    method: str
    r_used: int = 0
    partials: tuple = ()


@dataclass
class EulerFactorization:
    prime_factors: list
    truncation_prime_bound: int
    tail_estimate: float
    value: float = 0.0
    tail_note: str = "heuristic: partial sums of chi(p) over (P/2, P]"

    def rows(self):
        return [{"p": f.p, "factor": float(f.factor), "method": f.method, "r_used": f.r_used}
                for f in self.prime_factors]


_PRIME_CACHE = {}


def _primes(n):
    if n not in _PRIME_CACHE:
        _PRIME_CACHE[n] = primes_up_to(n)
    return _PRIME_CACHE[n]


def legendre_array(a: int, primes: np.ndarray) -> np.ndarray:
    """(a|p) for every odd prime in primes, by Euler's criterion."""
    return np.array([jacobi_symbol(a, int(p)) if p > 2 else 0 for p in primes], dtype=np.int64)


def _tail_estimate(value, chi, primes, P):
    # heuristic: the future tail of sum chi(p)/p is sized by the largest
    # partial sum of chi over (P/2, P], divided by P
    win = primes > P / 2
    if not win.any():
        return abs(value) * 2.0 / max(P, 2)
    part = np.cumsum(chi[win])
    M = float(np.abs(part).max()) if len(part) else 0.0
    est = 4 * M / P + 2 / (P * math.log(max(P, 3)))
    return abs(value) * (math.exp(est) - 1)


def singular_series_fiber(x, prime_bound: int = 10 ** 4, r_max: int = 8) -> EulerFactorization:
    """Truncated Euler product of the local densities of F(x; .) = 0.

    Primes dividing 2 x1x2x3x4 always get a lifted factor; the good primes up
    to prime_bound use the closed form.
    """
    x = CoeffVector.of(x)
    if 0 in x.entries:
        raise ValueError("zero coefficient")
    if is_square(x.delta):
        raise ValueError("square discriminant: series not absolutely convergent")
    bad = sorted(set(factorint(2 * x.delta)))
    factors = []
    logv = 0.0
    for p in bad:
        v, r_used, partials = lifted_density(x, p, r_max)
        factors.append(EulerFactor(p, v, "lifted", r_used, partials))
        logv += math.log(v) if v > 0 else -math.inf
    primes = _primes(prime_bound)
    good = primes[(primes > 2) & (x.delta % primes != 0)]
    chi = legendre_array(x.delta, good)
    gf = (1 - chi / good.astype(float) ** 2) / (1 - chi / good.astype(float))
    for p, ch, f in zip(good.tolist(), chi.tolist(), gf.tolist()):
        factors.append(EulerFactor(p, (1 - Fraction(ch, p * p)) / (1 - Fraction(ch, p)), "good_closed", 0))
    logv += math.fsum(np.log(gf).tolist())
    value = math.exp(logv) if logv > -math.inf else 0.0
    factors.sort(key=lambda f: f.p)
    tail = _tail_estimate(value, chi, good, prime_bound)
    return EulerFactorization(factors, prime_bound, tail, value)


def singular_series_value(x, prime_bound: int = 10 ** 4, r_max: int = 8) -> float:
    """Value only, skipping the per-prime ledger (used inside the M2 sum)."""
    x = CoeffVector.of(x)
    if is_square(x.delta):
        raise ValueError("square discriminant: series not absolutely convergent")
    logv = 0.0
    for p in sorted(set(factorint(2 * x.delta))):
        v = lifted_density(x, p, r_max)[0]
        if v == 0:
            return 0.0
        logv += math.log(v)
    primes = _primes(prime_bound)
    good = primes[(primes > 2) & (x.delta % primes != 0)].astype(float)
    chi = _chi_fast(x.delta, primes[(primes > 2) & (x.delta % primes != 0)])
    logv += math.fsum(np.log((1 - chi / good ** 2) / (1 - chi / good)).tolist())
    return math.exp(logv)


def _chi_fast(a, primes):
    # Euler's criterion a^((p-1)/2) mod p, vectorised by square-and-multiply
    p = primes.astype(np.int64)
    base = (a % p).astype(np.int64)
    e = (p - 1) // 2
    res = np.ones_like(p)
    while np.any(e > 0):
        odd = (e & 1) == 1
        res = np.where(odd, res * base % p, res)
        base = base * base % p
        e >>= 1
    return np.where(res == p - 1, -1, res).astype(float)


def truncated_l_value(x, prime_bound: int = 10 ** 4) -> float:
    """prod over good p <= prime_bound of (1 - chi(p)/p)^(-1)."""
    x = CoeffVector.of(x)
    primes = _primes(prime_bound)
    good = primes[(primes > 2) & (x.delta % primes != 0)]
    chi = _chi_fast(x.delta, good)
    return math.exp(-math.fsum(np.log(1 - chi / good.astype(float)).tolist()))


# ------------------------------------------------------------------ n(p^t)

def n_full(p: int, t: int, method: str = "factorized") -> int:
    """#{(x, y) mod p^t : sum x_i y_i^2 = 0 mod p^t}."""
    q = p ** t
    if method == "factorized":
        total = 0
        y = np.arange(q, dtype=object)
        sq = [int(v) * int(v) % q for v in range(q)]
        for c in range(q):
            k = sum(1 for s in sq if c * s % q == 0)
            total += k ** 4
        return q ** 3 * total
    if method != "brute":
        raise ValueError(f"unknown method {method!r}")
    if q > 9:
        raise ValueError("brute budget exceeded")
    # distribution of x*y^2 over all (x, y) mod q, convolved four times
    v = np.arange(q, dtype=np.int64)
    one = np.bincount((v[:, None] * v[None, :] ** 2 % q).ravel(), minlength=q)
    hist = np.zeros(q, dtype=np.int64)
    hist[0] = 1
    for _ in range(4):
        nxt = np.zeros(q, dtype=np.int64)
        for s in range(q):
            nxt += one[s] * np.roll(hist, s)
        hist = nxt
    return int(hist[0])


# ------------------------------------------------------------------ constants

@lru_cache(maxsize=4)
def _tau_default(tol=1e-3):
    return tau_infinity("via_rho", tol)


def peyre_constant_value(tau=None) -> float:
    t = _tau_default() if tau is None else tau
    v = t.value if hasattr(t, "value") else float(t)
    return v / (4 * ZETA3 * ZETA4)


def euler_product_check(P: int = 10 ** 5) -> dict:
    """prod over p <= P of (1 + p^-2), against zeta(2)/zeta(4) = 15/pi^2."""
    primes = _primes(P).astype(float)
    prod = math.exp(math.fsum(np.log1p(primes ** -2).tolist()))
    target = 15 / math.pi ** 2
    return {"prime_bound": P, "product": prod, "target": target, "abs_diff": abs(prod - target)}


def peyre_constant(tau, check_bound: int = 10 ** 5) -> dict:
    """Leading constant c = tau / (4 zeta(3) zeta(4)), with a consistency record.

    The second form tau * prod_p(1 + p^-2) / (4 zeta(2) zeta(3)) is
    evaluated with the truncated product and compared.
    """
    c = peyre_constant_value(tau)
    chk = euler_product_check(check_bound)
    alt = tau.value * chk["product"] / (4 * ZETA2 * ZETA3)
    return {"c": c, "tau": tau.value, "tau_error": tau.abs_error_bound,
            "c_error": tau.abs_error_bound / (4 * ZETA3 * ZETA4),
            "local_factor_form": alt, "euler_check": chk}


# ------------------------------------------------------------------ main terms

@dataclass
class MainTermEstimate:
    B: int
    empirical_sum: float
    predicted_slope: float
    window: dict
    shells: dict = field(default_factory=dict)
    exact: Fraction = None
    empty: bool = False

    def to_dict(self):
        d = asdict(self)
        d["exact"] = None if self.exact is None else str(self.exact)
        d["shells"] = {str(k): v for k, v in self.shells.items()}
        return d


def _orbit_nonneg(y):
    from .enumeration import orbit_size_nonneg
    return orbit_size_nonneg(y)


def main_term_M1(B: int, exact: bool = None) -> MainTermEstimate:
    """Sum over primitive y with |y| <= B^(1/4) of rho(y) / |y|^2.

    Summed over sorted nonnegative classes with orbit weights.  Exact
    rational arithmetic up to |y| <= 12 by default, float fsum beyond.
    """
    from .enumeration import y_classes
    if B < 1:
        raise ValueError("B must be >= 1")
    Y = iroot(B, 4)
    if exact is None:
        exact = Y <= 12
    shells = {}
    exact_total = Fraction(0)
    for y in y_classes(Y):
        r = _rho_exact(y) * _orbit_nonneg(y) / (y[3] * y[3])
        shells.setdefault(y[3], []).append(r)
    shell_vals = {}
    for k, terms in shells.items():
        if exact:
            s = sum(terms, Fraction(0))
            exact_total += s
            shell_vals[k] = float(s)
        else:
            shell_vals[k] = math.fsum(float(t) for t in terms)
    total = float(exact_total) if exact else math.fsum(shell_vals.values())
    slope = _tau_default().value / (2 * ZETA4)
    return MainTermEstimate(B, total, slope, {"y_max": Y}, shell_vals,
                            exact_total if exact else None)


def _x_window(B, eta):
    lo = B ** (2 * eta)
    hi = B ** (1 / 6)
    lo_i = math.ceil(lo - 1e-12)
    hi_i = iroot(B, 6)
    # B^(1/6) is irrational in general; iroot gives the integer floor
    return max(lo_i, 1), hi_i, lo, hi


def main_term_M2(B: int, eta: float = 0.005, prime_bound: int = 10 ** 4,
                 tol: float = 1e-6) -> MainTermEstimate:
    """Sum over primitive x, B^(2 eta) <= |x| <= B^(1/6), x1x2x3x4 nonsquare,
    of sigma(x) S(x) / |x|^3."""
    from .enumeration import x_classes, orbit_size_signed
    if not 0 < eta < 0.01:
        raise ValueError("eta must lie in (0, 1/100)")
    lo_i, hi_i, lo, hi = _x_window(B, eta)
    slope = ZETA2 * _tau_default().value / (2 * ZETA3 * ZETA4)
    window = {"eta": eta, "x_min": lo_i, "x_max": hi_i, "lower_cut": lo, "upper_cut": hi,
              "prime_bound": prime_bound}
    if lo_i > hi_i:
        return MainTermEstimate(B, 0.0, slope, window, {}, None, True)
    reps, weights = [], []
    for x in x_classes(hi_i):
        n = max(abs(t) for t in x)
        if n < lo_i or vec_gcd(x) != 1 or is_square(x[0] * x[1] * x[2] * x[3]):
            continue
        if all(t > 0 for t in x) or all(t < 0 for t in x):
            continue
        reps.append(x)
        weights.append(orbit_size_signed(x))
    if not reps:
        return MainTermEstimate(B, 0.0, slope, window, {}, None, True)
    step = 0.125 if tol < 1e-8 else 0.25
    sig = sigma_infinity_batch(np.array(reps, dtype=float), step=step)
    shells = {}
    for x, w, s in zip(reps, weights, sig):
        n = max(abs(t) for t in x)
        term = w * s * singular_series_value(x, prime_bound) / n ** 3
        shells.setdefault(n, []).append(term)
    shell_vals = {k: math.fsum(v) for k, v in sorted(shells.items())}
    return MainTermEstimate(B, math.fsum(shell_vals.values()), slope, window, shell_vals)
