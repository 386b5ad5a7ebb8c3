"""Integer helpers: squares, factorisation, Jacobi symbols, Ramanujan sums.

Everything here works on Python ints, so there is no overflow to worry about.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
import math

import numpy as np

# zeta values; ZETA3 is Apery's constant to 30 digits
ZETA2 = math.pi ** 2 / 6
ZETA3 = 1.202056903159594285399738161511
ZETA4 = math.pi ** 4 / 90

# quadratic residues mod 64 and 63, used to reject non-squares cheaply
_QR64 = frozenset(k * k % 64 for k in range(64))
_QR63 = frozenset(k * k % 63 for k in range(63))


def is_square(n: int) -> bool:
    """True iff n = k*k for an integer k >= 0.  Zero counts as a square."""
    if n < 0:
        return False
    if n % 64 not in _QR64 or n % 63 not in _QR63:
        return False
    r = math.isqrt(n)
    return r * r == n


def is_square_array(n):
    """Vectorised is_square for an int64 array with |n| < 2**52."""
    n = np.asarray(n, dtype=np.int64)
    out = n >= 0
    r = np.sqrt(np.where(out, n, 0).astype(np.float64)).round().astype(np.int64)
    return out & (r * r == n)


def iroot(n: int, k: int) -> int:
    """Largest integer r >= 0 with r**k <= n (n >= 0)."""
    if n < 0:
        raise ValueError("iroot needs n >= 0")
    if n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    r = int(round(n ** (1.0 / k)))
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def factorint(n: int) -> dict:
    """Prime factorisation of |n| by trial division on a 2,3,5 wheel."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    steps = (4, 2, 4, 2, 4, 6, 2, 6)
    d, i = 7, 0
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += steps[i]
        i = (i + 1) % 8
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primes_up_to(n: int) -> np.ndarray:
    """Sieve of Eratosthenes; returns an int64 array of primes <= n."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = factorint(n)
    return f == {n: 1}


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("phi needs n >= 1")
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    f = factorint(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def mobius_table(n: int) -> np.ndarray:
    """mu(0..n) as an int64 array (mu(0) set to 0)."""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in primes_up_to(n):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def squarefull_part(n: int) -> int:
    """Product of p^e over p^e || n with e >= 2; 1 for n = 0."""
    if n == 0:
        return 1
    out = 1
    for p, e in factorint(n).items():
        if e >= 2:
            out *= p ** e
    return out


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a|n) for odd n >= 1."""
    if n < 1 or n % 2 == 0:
        raise ValueError("jacobi symbol needs an odd positive modulus")
    a %= n
    sign = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0



def ramanujan_sum(q: int, N: int) -> int:
    """c_q(N) = mu(q/g) phi(q) / phi(q/g) with g = gcd(q, N)."""
    if q < 1:
        raise ValueError("ramanujan sum needs q >= 1")
    g = math.gcd(q, N)
    m = q // g
    return mobius(m) * euler_phi(q) // euler_phi(m)


def varpi(m: int) -> Fraction:
    """prod over p | m of (1 + 1/p)."""
    out = Fraction(1)
    if m == 0:
        raise ValueError("varpi(0) is undefined")
    for p in factorint(m):
        out *= Fraction(p + 1, p)
    return out


def vec_gcd(v) -> int:
    return reduce(math.gcd, (abs(int(t)) for t in v), 0)


def sup_norm(v) -> int:
    return max(abs(int(t)) for t in v)


@dataclass(frozen=True)
class CoeffVector:
    """A 4-vector of integers with the metadata the counting code keeps asking for."""

    entries: tuple
    gcd: int = field(init=False)
    delta: int = field(init=False)

    def __post_init__(self):
        ent = tuple(int(t) for t in self.entries)
        if len(ent) != 4:
            raise ValueError("a coefficient vector has exactly 4 entries")
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "gcd", vec_gcd(ent))
        object.__setattr__(self, "delta", ent[0] * ent[1] * ent[2] * ent[3])

    @classmethod
    def of(cls, v):
        return v if isinstance(v, cls) else cls(tuple(v))

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __len__(self):
        return 4

    @property
    def is_primitive(self) -> bool:
        return self.gcd == 1

    @property
    def norm(self) -> int:
        return sup_norm(self.entries)

    @property
    def delta_bad(self) -> int:
        # convention: 1 when delta = 0
        return squarefull_part(self.delta)

    def varpi(self, m=None) -> Fraction:
        return varpi(self.delta if m is None else m)


def delta_bad(x) -> int:
    x = CoeffVector.of(x)
    if 0 in x.entries:
        raise ValueError("degenerate coefficient vector")
    return x.delta_bad
