"""Exact counts of points on x1*y1^2 + ... + x4*y4^2 = 0 by height.

Counting runs over symmetry classes.  Signs and order of y only enter
through the squares y_i^2, so the y-side walks sorted nonnegative y and
weights each class by its orbit size.  The x-side walks x up to permutation
and global sign, and finds the y-solutions of each quadric fiber by
matching the value lists of two coordinate pairs.
"""
from collections import Counter
from dataclasses import dataclass, field, asdict
from itertools import combinations_with_replacement, product
from math import factorial, gcd, log
import time

import numpy as np

from .arith import CoeffVector, iroot, is_square, is_square_array, vec_gcd, sup_norm
from .lattice import linear_box_count

# a raw primitive pair (x, y) and its three sign variants give one point
UNITS_PER_POINT = 4

# instrumentation: how many times count_points has actually run
CALLS = Counter()


def canonical_count(raw: int) -> int:
    """Convert raw signed primitive-pair counts to counts of points."""
    q, r = divmod(raw, UNITS_PER_POINT)
    if r:
        raise ArithmeticError(f"raw count {raw} is not divisible by {UNITS_PER_POINT}")
    return q


def thin_set_membership(x) -> bool:
    return is_square(CoeffVector.of(x).delta)


def canonical_sign(v) -> tuple:
    """Scale by -1 if needed so the first nonzero entry is positive."""
    v = tuple(int(t) for t in v)
    for t in v:
        if t:
            return v if t > 0 else tuple(-s for s in v)
    return v


@dataclass(frozen=True)
class BiprojectivePoint:
    x: CoeffVector
    y: CoeffVector
    height: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "height", self.x.norm ** 3 * self.y.norm ** 2)


@dataclass
class CountReport:
    B: int
    canonical_count: int
    thin_excluded: int
    split_boundary: int
    split: str
    predicted: float
    ratio: float
    elapsed_seconds: float
    thread_count: int = 1
    y_side_raw: int = 0
    x_side_raw: int = 0

    def to_dict(self):
        return asdict(self)


def orbit_size_nonneg(y) -> int:
    """Number of signed vectors whose entry-wise absolute values permute to y."""
    perms = factorial(4)
    for c in Counter(y).values():
        perms //= factorial(c)
    return perms * 2 ** sum(1 for t in y if t)


def orbit_size_signed(x) -> int:
    """Size of the orbit of x under coordinate permutations and x -> -x."""
    perms = factorial(4)
    for c in Counter(x).values():
        perms //= factorial(c)
    neg = tuple(sorted(-t for t in x))
    return perms if neg == tuple(sorted(x)) else 2 * perms


# ---------------------------------------------------------------- fibers in y

def _pair_values(c1, c2, Y):
    g = np.arange(Y + 1, dtype=np.int64)
    a, b = np.meshgrid(g, g, indexing="ij")
    return (c1 * a * a + c2 * b * b).ravel(), a.ravel(), b.ravel()


def _match(u, v):
    """All index pairs (i, j) with u[i] == v[j]."""
    ou = np.argsort(u, kind="stable")
    ov = np.argsort(v, kind="stable")
    us, vs = u[ou], v[ov]
    common, iu, iv = np.intersect1d(us, vs, assume_unique=False, return_indices=True)
    if len(common) == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    # group extents in the sorted arrays
    lu = np.searchsorted(us, common, "left")
    ru = np.searchsorted(us, common, "right")
    lv = np.searchsorted(vs, common, "left")
    rv = np.searchsorted(vs, common, "right")
    cu, cv = ru - lu, rv - lv
    sizes = cu * cv
    total = int(sizes.sum())
    grp = np.repeat(np.arange(len(common)), sizes)
    start = np.repeat(np.cumsum(sizes) - sizes, sizes)
    k = np.arange(total, dtype=np.int64) - start
    i = lu[grp] + k // cv[grp]
    j = lv[grp] + k % cv[grp]
    return ou[i], ov[j]


def fiber_solutions(x, Y: int) -> np.ndarray:
    """Nonnegative y in [0, Y]^4 with sum x_i y_i^2 = 0, as an (N, 4) array.

    Each row stands for 2**(number of nonzero entries) signed solutions.
    """
    x = [int(t) for t in x]
    if Y < 0:
        return np.zeros((0, 4), dtype=np.int64)
    u, a1, a2 = _pair_values(x[0], x[1], Y)
    v, a3, a4 = _pair_values(-x[2], -x[3], Y)
    i, j = _match(u, v)
    return np.stack([a1[i], a2[i], a3[j], a4[j]], axis=1)


def _row_gcd(arr):
    return np.gcd.reduce(arr, axis=1)


def _signed_weight(sol):
    return np.left_shift(1, (sol != 0).sum(axis=1))


def fiber_point_count(x, Y: int, method: str = "pairs") -> int:
    """#{primitive y in Z^4 : |y| <= Y, F(x; y) = 0}."""
    x = CoeffVector.of(x)
    if 0 in x.entries:
        raise ValueError("zero coefficient")
    if Y < 1:
        return 0
    if method == "triple":
        return _fiber_count_triple(x.entries, Y)
    sol = fiber_solutions(x.entries, Y)
    keep = _row_gcd(sol) == 1
    return int(_signed_weight(sol[keep]).sum())


def _fiber_count_triple(x, Y):
    """Loop over (y1, y2, y3) and solve for y4; the literal O(Y^3) route."""
    g = np.arange(-Y, Y + 1, dtype=np.int64)
    y1, y2 = np.meshgrid(g, g, indexing="ij")
    y1, y2 = y1.ravel(), y2.ravel()
    part12 = x[0] * y1 * y1 + x[1] * y2 * y2
    total = 0
    for y3 in range(-Y, Y + 1):
        rest = part12 + x[2] * y3 * y3
        ok = rest % x[3] == 0
        t = -rest[ok] // x[3]
        sq = is_square_array(t)
        r = np.sqrt(np.where(sq, t, 0)).round().astype(np.int64)
        ok2 = sq & (r <= Y)
        a, b, r = y1[ok][ok2], y2[ok][ok2], r[ok2]
        g3 = np.gcd(np.gcd(np.abs(a), np.abs(b)), abs(y3))
        prim = np.gcd(g3, r) == 1
        # r > 0 gives y4 = +-r, r = 0 gives one solution
        total += int(np.where(r[prim] > 0, 2, 1).sum())
    return total


def _fiber_window_count(x, lo: int, hi: int) -> int:
    """Signed count of primitive y with lo < |y| <= hi and F(x; y) = 0."""
    if hi <= lo:
        return 0
    sol = fiber_solutions(x, hi)
    nrm = sol.max(axis=1)
    keep = (nrm > lo) & (_row_gcd(sol) == 1)
    return int(_signed_weight(sol[keep]).sum())


# ----------------------------------------------------------- planes in x

def y_classes(Y: int):
    """Sorted nonnegative primitive y with 1 <= |y| <= Y."""
    for y in combinations_with_replacement(range(Y + 1), 4):
        if y[3] and vec_gcd(y) == 1:
            yield y


def _y_side(B: int, Y0: int):
    raw = thin = 0
    for y in y_classes(Y0):
        m = y[3] ** 2
        R = iroot(B // m, 3)
        if R < 1:
            continue
        a = [t * t for t in y]
        ns, sq = linear_box_count(a, R, "nonsquare_primitive")
        w = orbit_size_nonneg(y)
        raw += w * ns
        thin += w * sq
    return raw, thin


def x_classes(X: int):
    """Class representatives of nonzero x in [-X, X]^4 under permutation and x -> -x."""
    vals = [t for t in range(-X, X + 1) if t]
    for x in combinations_with_replacement(vals, 4):
        neg = tuple(sorted(-t for t in x))
        if x <= neg:
            yield x


def _x_side(B: int, Y0: int):
    X = iroot(B // (Y0 + 1) ** 2, 3)
    raw = thin = 0
    for x in x_classes(X):
        n = sup_norm(x)
        if n ** 3 * (Y0 + 1) ** 2 > B or vec_gcd(x) != 1:
            continue
        Y1 = iroot(B // n ** 3, 2)
        c = _fiber_window_count(x, Y0, Y1)
        if not c:
            continue
        w = orbit_size_signed(x)
        if is_square(x[0] * x[1] * x[2] * x[3]):
            thin += w * c
        else:
            raw += w * c
    return raw, thin


def predicted_main_term(B: int, c: float = None) -> float:
    if c is None:
        from .localdens import peyre_constant_value
        c = peyre_constant_value()
    return c * B * log(B) if B > 1 else 0.0


def count_points(B: int, split: str = "auto", boundary: int = None, c: float = None) -> CountReport:
    """Exact N(B): points with x1*x2*x3*x4 not a square and |x|^3 |y|^2 <= B."""
    if B < 1:
        raise ValueError("B must be >= 1")
    split = split.replace("-", "_")
    if split in ("y_side", "x_side"):
        split += "_only"
    if split not in ("auto", "y_side_only", "x_side_only"):
        raise ValueError(f"unknown split {split!r}")
    CALLS["count_points"] += 1
    t0 = time.perf_counter()
    Y0 = iroot(B, 4) if boundary is None else int(boundary)
    yr = yt = xr = xt = 0
    if split in ("auto", "y_side_only"):
        yr, yt = _y_side(B, Y0)
    if split in ("auto", "x_side_only"):
        xr, xt = _x_side(B, Y0)
    raw, thin = yr + xr, yt + xt
    count = canonical_count(raw)
    pred = predicted_main_term(B, c)
    return CountReport(B=B, canonical_count=count, thin_excluded=canonical_count(thin),
                       split_boundary=Y0, split=split, predicted=pred,
                       ratio=count / pred if pred > 0 else float("nan"),
                       elapsed_seconds=time.perf_counter() - t0,
                       y_side_raw=yr, x_side_raw=xr)


def iter_points(B: int):
    """Canonical points of height <= B off the thin set, in no particular order.

    Meant for small B: it walks every x with |x|^3 <= B directly.
    """
    X = iroot(B, 3)
    for x in product(range(-X, X + 1), repeat=4):
        if 0 in x or canonical_sign(x) != x or vec_gcd(x) != 1:
            continue
        if is_square(x[0] * x[1] * x[2] * x[3]):
            continue
        n = sup_norm(x)
        Y1 = iroot(B // n ** 3, 2)
        for y in fiber_solutions(x, Y1):
            if vec_gcd(y) != 1:
                continue
            nz = [i for i in range(4) if y[i]]
            for signs in product((1, -1), repeat=len(nz)):
                yy = [int(t) for t in y]
                for s, i in zip(signs, nz):
                    yy[i] *= s
                if canonical_sign(yy) == tuple(yy):
                    yield BiprojectivePoint(CoeffVector(x), CoeffVector(yy))


def weighted_count(F, w, P: float) -> float:
    """Sum of w(y / P) over integer solutions y of F(y) = 0."""
    A = [int(t) for t in (F.coeffs if hasattr(F, "coeffs") else F)]
    if P <= 0:
        raise ValueError("P must be positive")
    Ymax = int(np.floor(w.support_radius * P))
    sol = fiber_solutions(A, Ymax)
    if len(sol) == 0:
        return 0.0
    r = sol.max(axis=1) / P
    vals = w.profile(r) * _signed_weight(sol)
    return float(np.sort(vals).sum())
