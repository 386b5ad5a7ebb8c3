"""Gauss sums, the complete exponential sums S_q(c) of a diagonal quaternary
form, its dual form, and the arithmetic function psi(q).

S_q(c) is always a rational integer (the sum is fixed by every Galois
automorphism of Q(e(1/q))), so the direct route rounds and checks, and the
factored route stays in integers throughout.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import cmath
import math

import numpy as np

from .arith import (euler_phi, factorint, jacobi_symbol, mobius, ramanujan_sum,
                    squarefull_part)

DIRECT_Q_CAP = 3000


@dataclass(frozen=True)
class ComplexExact:
    """A complex value, optionally tagged with an exact form (re + i*im)*sqrt(radicand)."""

    value: complex
    exact: tuple = None
    bound: float = math.inf

    @property
    def is_exact(self):
        return self.exact is not None

    def __complex__(self):
        return complex(self.value)

    def close_to(self, other, tol=1e-9) -> bool:
        if self.is_exact and isinstance(other, ComplexExact) and other.is_exact:
            return self.exact == other.exact
        return abs(complex(self) - complex(other)) <= tol


@dataclass(frozen=True)
class DiagonalForm:
    coeffs: tuple
    disc: int = field(init=False)
    norm: int = field(init=False)
    disc_bad: int = field(init=False)

    def __post_init__(self):
        a = tuple(int(t) for t in self.coeffs)
        if len(a) != 4 or 0 in a:
            raise ValueError("a diagonal form needs 4 nonzero coefficients")
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "disc", a[0] * a[1] * a[2] * a[3])
        object.__setattr__(self, "norm", max(abs(t) for t in a))
        object.__setattr__(self, "disc_bad", squarefull_part(self.disc))

    @classmethod
    def of(cls, A):
        return A if isinstance(A, cls) else cls(tuple(A))

    def __call__(self, y) -> int:
        return sum(a * int(t) * int(t) for a, t in zip(self.coeffs, y))


def dual_form(F, c) -> int:
    A = DiagonalForm.of(F).coeffs
    c = [int(t) for t in c]
    out = 0
    for i in range(4):
        prod = 1
        for j in range(4):
            if j != i:
                prod *= A[j]
        out += prod * c[i] * c[i]
    return out


def _e(num, q):
    return cmath.exp(2j * math.pi * (num % q) / q)


def gauss_table(c: int, q: int) -> np.ndarray:
    """Array of G(b, c; q) for b = 0..q-1, by direct summation."""
    x = np.arange(q, dtype=np.int64)
    sq = x * x % q
    lin = c % q * x % q
    out = np.empty(q, dtype=complex)
    for b in range(q):
        ph = (b * sq + lin) % q
        out[b] = np.exp(2j * np.pi * ph / q).sum()
    return out


def gauss_sum(b: int, c: int, q: int, method: str = "direct") -> ComplexExact:
    """G(b, c; q) = sum over x mod q of e_q(b x^2 + c x)."""
    if q < 1:
        raise ValueError("modulus must be positive")
    bound = math.sqrt(2 * q * math.gcd(b, q))
    if method == "direct":
        x = np.arange(q, dtype=np.int64)
        ph = (b % q * (x * x % q) + c % q * x) % q
        return ComplexExact(complex(np.exp(2j * np.pi * ph / q).sum()), None, bound)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    if q % 2 == 0 or math.gcd(b, q) != 1:
        raise ValueError("closed form inapplicable")
    leg = jacobi_symbol(b, q)
    delta = 1 if q % 4 == 1 else 1j
    inv4b = pow(4 * b, -1, q) if q > 1 else 0
    val = _e(-inv4b * c * c, q) * leg * delta * math.sqrt(q)
    exact = None
    if c * c % q == 0:
        exact = (Fraction(leg), Fraction(0), q) if q % 4 == 1 else (Fraction(0), Fraction(leg), q)
    return ComplexExact(val, exact, bound)


def _exact_int(n: int, bound=math.inf) -> ComplexExact:
    return ComplexExact(complex(n), (Fraction(n), Fraction(0), 1), bound)


def trivial_bound(F, c, q) -> float:
    """q^3 prod_i gcd(q, A_i, c_i)^(1/2), without the absolute constant."""
    A = DiagonalForm.of(F).coeffs
    b = float(q) ** 3
    for a, ci in zip(A, c):
        b *= math.sqrt(math.gcd(math.gcd(q, a), int(ci)))
    return b


def _s_direct_int(A, c, q) -> int:
    if q == 1:
        return 1
    if q > DIRECT_Q_CAP:
        raise ValueError(f"direct evaluation capped at q <= {DIRECT_Q_CAP}")
    units = np.array([a for a in range(1, q) if math.gcd(a, q) == 1], dtype=np.int64)
    prod = np.ones(len(units), dtype=complex)
    for ai, ci in zip(A, c):
        tab = gauss_table(int(ci), q)
        prod *= tab[units * (ai % q) % q]
    s = prod.sum()
    n = int(round(s.real))
    scale = q ** 3
    if abs(s.real - n) > 1e-6 * max(1.0, scale ** 0.5) or abs(s.imag) > 1e-6 * max(1.0, scale ** 0.5):
        raise ArithmeticError(f"S_{q} did not round to an integer: {s}")
    return n


def _s_prime_power(A, c, p, r, disc, disc_bad, fstar) -> int:
    q = p ** r
    if p != 2 and disc % p:
        # good prime: closed form via the Ramanujan sum
        return jacobi_symbol(disc, p) ** r * p ** (2 * r) * ramanujan_sum(q, fstar)
    if p != 2 and all(t == 0 for t in c) and disc_bad % p:
        return 0
    return _s_direct_int(A, [int(t) % q for t in c], q)


def s_q(F, c, q: int, method: str = "factored") -> ComplexExact:
    """Complete exponential sum S_q(c) for the diagonal form F."""
    F = DiagonalForm.of(F)
    c = [int(t) for t in c]
    if q < 1:
        raise ValueError("modulus must be positive")
    bound = 4 * trivial_bound(F, c, q)
    if method == "direct":
        return _exact_int(_s_direct_int(F.coeffs, [t % q for t in c], q), bound)
    if method != "factored":
        raise ValueError(f"unknown method {method!r}")
    fstar = dual_form(F, c)
    out = 1
    for p, r in sorted(factorint(q).items()) if q > 1 else []:
        out *= _s_prime_power(F.coeffs, c, p, r, F.disc, F.disc_bad, fstar)
        if out == 0:
            break
    return _exact_int(out, bound)


def s_q_int(F, c, q: int, method: str = "factored") -> int:
    return int(s_q(F, c, q, method).exact[0])


def psi_q(q: int, method: str = "closed") -> int:
    """psi(q) = sum over a, b mod q with gcd(a, q) = 1 of c_q(F(a; b))."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if method == "closed":
        out = 1
        for p, f in factorint(q).items() if q > 1 else []:
            if f % 2:
                return 0
            pf = p ** f
            # phi(p^f) p^(6f) (1 - p^-4), kept integral
            out *= euler_phi(pf) * p ** (6 * f - 4) * (p ** 4 - 1)
        return out
    if method != "brute":
        raise ValueError(f"unknown method {method!r}")
    if q > 8:
        raise ValueError("brute budget exceeded")
    return _psi_brute(q)


def _psi_brute(q: int) -> int:
    cq = np.array([ramanujan_sum(q, v) for v in range(q)], dtype=np.int64)
    b = np.arange(q)
    sq = b * b % q
    # hist[a][v] = #{b mod q : a b^2 = v}
    hist = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        np.add.at(hist[a], a * sq % q, 1)
    total = 0
    rng = range(q)
    for a1 in rng:
        for a2 in rng:
            h12 = _cyclic_conv(hist[a1], hist[a2])
            for a3 in rng:
                h123 = _cyclic_conv(h12, hist[a3])
                for a4 in rng:
                    if math.gcd(math.gcd(a1, a2), math.gcd(math.gcd(a3, a4), q)) != 1:
                        continue
                    h = _cyclic_conv(h123, hist[a4])
                    total += int(h @ cq)
    return total


def _cyclic_conv(u, v):
    q = len(u)
    out = np.zeros(q, dtype=np.int64)
    for s in range(q):
        out += u[s] * np.roll(v, s)
    return out
