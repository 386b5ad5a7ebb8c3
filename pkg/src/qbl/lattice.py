"""The rank-3 lattice {x in Z^4 : sum y_i^2 x_i = 0} of a primitive y:
an explicit basis, exact sup-norm successive minima, and box counts."""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import math

import numpy as np

from .arith import CoeffVector, is_square_array


@dataclass
class FiberLattice:
    coefficient_form: tuple
    basis: tuple
    det_squared: int
    minima: tuple = None
    shortest: tuple = None

    def gram(self):
        return [[sum(u * v for u, v in zip(a, b)) for b in self.basis] for a in self.basis]


def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def kernel_basis(a):
    """Integer basis of {x : a.x = 0} for a primitive integer 4-vector a.

    Column operations on the row a, mirrored on an identity matrix, reduce
    a to (1, 0, 0, 0); the last three mirrored columns then span the kernel.
    """
    a = [int(t) for t in a]
    n = len(a)
    U = [[int(i == j) for j in range(n)] for i in range(n)]   # U[i] is column i

    def colop(dst, src, k):
        # column dst -= k * column src
        a[dst] -= k * a[src]
        U[dst] = [u - k * v for u, v in zip(U[dst], U[src])]

    while sum(1 for t in a if t) > 1 or a[0] == 0:
        nz = [i for i in range(n) if a[i]]
        piv = min(nz, key=lambda i: abs(a[i]))
        for i in nz:
            if i != piv:
                colop(i, piv, a[i] // a[piv])
        if sum(1 for t in a if t) == 1 and a[0] == 0:
            i = next(i for i in range(n) if a[i])
            a[0], a[i] = a[i], a[0]
            U[0], U[i] = U[i], U[0]
    if abs(a[0]) != 1:
        raise ValueError("coefficient form is not primitive")
    return [tuple(U[i]) for i in range(1, n)]


def lll_reduce(basis, delta=Fraction(3, 4)):
    """Exact LLL on integer vectors, Gram-Schmidt kept in rationals."""
    b = [list(v) for v in basis]
    k = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        bs, mu = [], [[Fraction(0)] * k for _ in range(k)]
        for i in range(k):
            v = [Fraction(t) for t in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bs[j])) / dot(bs[j], bs[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
        return bs, mu

    bs, mu = gso()
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            r = round(mu[i][j])
            if r:
                b[i] = [x - r * y for x, y in zip(b[i], b[j])]
                bs, mu = gso()
        if dot(bs[i], bs[i]) >= (delta - mu[i][i - 1] ** 2) * dot(bs[i - 1], bs[i - 1]):
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            bs, mu = gso()
            i = max(i - 1, 1)
    return [tuple(v) for v in b]


def fiber_lattice_basis(y) -> FiberLattice:
    y = CoeffVector.of(y)
    if y.gcd == 0:
        raise ValueError("y must be nonzero")
    if not y.is_primitive:
        raise ValueError("y must be primitive")
    a = tuple(t * t for t in y)
    basis = lll_reduce(kernel_basis(a))
    L = FiberLattice(a, tuple(basis), sum(t * t for t in a))
    if _det3(L.gram()) != L.det_squared:
        raise ArithmeticError("Gram determinant check failed")
    return L


def _rank(vectors):
    if not vectors:
        return 0
    return int(np.linalg.matrix_rank(np.array(vectors, dtype=float)))


def _vectors_within(basis, R: int) -> np.ndarray:
    """Nonzero combinations of basis (k vectors in Z^n) with sup-norm <= R.

    |v|_2 <= sqrt(n) |v|_sup, and each coordinate of v in the basis is
    bounded by |v|_2 times the length of the matching dual vector.
    """
    B = np.array(basis, dtype=np.int64)
    k, n = B.shape
    Ginv = np.linalg.inv(B.astype(float) @ B.T.astype(float))
    bounds = [int(math.floor(math.sqrt(n) * R * math.sqrt(max(Ginv[i, i], 0.0)) * (1 + 1e-9) + 1e-9))
              for i in range(k)]
    rng = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    C = np.stack(np.meshgrid(*rng, indexing="ij"), -1).reshape(-1, k)
    V = C @ B
    nrm = np.abs(V).max(axis=1)
    return V[(nrm <= R) & (nrm > 0)]


def lattice_vectors_within(L: FiberLattice, R: int):
    """All nonzero lattice vectors with sup-norm <= R, as an (N, 4) array."""
    return _vectors_within(L.basis, R)


def _greedy_independent(V, count):
    """Pick count independent rows of V in order of (sup-norm, length, position)."""
    nrm = np.abs(V).max(axis=1)
    order = np.lexsort((np.arange(len(V)), (V * V).sum(axis=1), nrm))
    chosen = []
    for idx in order:
        v = V[idx].tolist()
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            if len(chosen) == count:
                break
    return chosen


def _coords_in(basis, v):
    """Integer coordinates of the lattice vector v in basis."""
    B = np.array(basis, dtype=float)
    c = np.rint(np.linalg.lstsq(B.T, np.array(v, dtype=float), rcond=None)[0]).astype(np.int64)
    if (c @ np.array(basis, dtype=np.int64)).tolist() != list(v):
        raise ArithmeticError("vector is not in the lattice")
    return c


def _unimodular_row(n):
    """An integer vector x with n . x = 1, for primitive n in Z^3."""
    def egcd(a, b):
        if b == 0:
            return (a, 1, 0) if a >= 0 else (-a, -1, 0)
        g, s, t = egcd(b, a % b)
        return g, t, s - (a // b) * t
    g, s, t = egcd(n[0], n[1])
    h, u, w = egcd(g, n[2])
    if h != 1:
        raise ValueError("normal vector is not primitive")
    return [u * s, u * t, w]


def _third_minimum(sub, v1, v2):
    """Smallest sup-norm of a vector of the rank-3 lattice sub off span(v1, v2).

    Write v = m b + c1 u1 + c2 u2 with (u1, u2) a basis of the plane part.
    For fixed (m, c1) the sup-norm is convex piecewise linear in c2, so its
    integer minimum sits at the floor or ceiling of one of its breakpoints.
    """
    n = len(sub[0])
    c1v, c2v = _coords_in(sub, v1), _coords_in(sub, v2)
    nrm = np.cross(c1v, c2v)
    nrm = (nrm // np.gcd.reduce(np.abs(nrm))).tolist()
    K = np.array(kernel_basis(nrm), dtype=np.int64)
    x0 = np.array(_unimodular_row(nrm), dtype=np.int64)
    S = np.array(sub, dtype=np.int64)
    u1, u2, b = K[0] @ S, K[1] @ S, x0 @ S
    full = np.array([b, u1, u2])
    Ginv = np.linalg.inv(full.astype(float) @ full.T.astype(float))
    dual = np.sqrt(np.maximum(np.diag(Ginv), 0.0))
    # an upper bound: the sub basis vector outside the plane with least norm
    best_v = min((v for v, cv in zip(S, np.eye(3, dtype=np.int64)) if int(np.dot(nrm, cv)) != 0),
                 key=lambda v: (np.abs(v).max(), int((v * v).sum())))
    best = int(np.abs(best_v).max())
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    m = 1
    while m <= math.sqrt(n) * best * dual[0] * (1 + 1e-9) + 1e-9:
        h = int(math.floor(math.sqrt(n) * best * dual[1] * (1 + 1e-9) + 1e-9))
        c1 = np.arange(-h, h + 1, dtype=np.int64)
        alpha = m * b[None, :] + c1[:, None] * u1[None, :]
        beta = u2.astype(float)
        cand = []
        for i in range(n):
            if beta[i]:
                cand.append(-alpha[:, i] / beta[i])
        for i, j in pairs:
            for sg in (1, -1):
                den = beta[i] - sg * beta[j]
                if den:
                    cand.append(-(alpha[:, i] - sg * alpha[:, j]) / den)
        cand = np.stack(cand, axis=1)
        c2 = np.concatenate([np.floor(cand), np.ceil(cand)], axis=1).astype(np.int64)
        vals = alpha[:, None, :] + c2[:, :, None] * u2[None, None, :]
        sup = np.abs(vals).max(axis=2)
        l2 = (vals * vals).sum(axis=2)
        flat = np.lexsort((l2.ravel(), sup.ravel()))[0]
        r, k = divmod(int(flat), sup.shape[1])
        if sup[r, k] < best or (sup[r, k] == best and l2[r, k] < int((best_v * best_v).sum())):
            best, best_v = int(sup[r, k]), vals[r, k]
        m += 1
    return best_v


def _sub_minima(sub):
    """Greedy minimal vectors of a (k <= 3)-dimensional integer lattice."""
    k = len(sub)
    R = max(max(abs(t) for t in v) for v in sub)
    if k < 3:
        return _greedy_independent(_vectors_within(sub, R), k)
    r = 1
    while True:
        V = _vectors_within(sub, min(r, R))
        if len(V) and _rank(V.tolist()) >= 2:
            break
        r *= 2
    chosen = _greedy_independent(V, 3)
    if len(chosen) == 3:
        return chosen
    return chosen + [[int(t) for t in _third_minimum(sub, chosen[0], chosen[1])]]


def successive_minima_sup(L: FiberLattice):
    """Exact sup-norm successive minima (l1, l2, l3) and a vector achieving l1.

    Coordinates where y vanishes split off as unit vectors.  On a direct sum
    over disjoint coordinates the sup-norm minima are the merged minima of
    the summands, so only the kernel on the nonzero coordinates is searched.
    """
    a = L.coefficient_form
    zero = [i for i in range(4) if a[i] == 0]
    live = [i for i in range(4) if a[i] != 0]
    chosen = [[int(i == j) for j in range(4)] for i in zero]
    if len(live) >= 2:
        sub = lll_reduce(kernel_basis([a[i] for i in live]))
        for v in _sub_minima(sub):
            full = [0] * 4
            for i, t in zip(live, v):
                full[i] = int(t)
            chosen.append(full)
    V = np.array(chosen, dtype=np.int64)
    order = np.lexsort((np.arange(len(V)), (V * V).sum(axis=1), np.abs(V).max(axis=1)))
    chosen = [V[i].tolist() for i in order]
    minima = tuple(max(abs(t) for t in v) for v in chosen)
    short = tuple(int(t) for t in chosen[0])
    # canonical sign for reproducibility
    if next(t for t in short if t) < 0:
        short = tuple(-t for t in short)
    L.minima = minima
    L.shortest = short
    return minima, short


def linear_box_count(a, R, filter: str = "none"):
    """#{x in Z^4 : |x| <= R, sum a_i x_i = 0} with an optional filter.

    filter "nonsquare" keeps x with x1x2x3x4 not a square (zero counts as a
    square), "nonsquare_primitive" additionally asks gcd(x) = 1.  Three
    coordinates are enumerated and the one with the largest |a_i| is solved for.
    Returns (kept, rejected_as_square) where the second entry is only
    meaningful for the filtered modes.
    """
    R = int(math.floor(R))
    if filter not in ("none", "nonsquare", "nonsquare_primitive"):
        raise ValueError(f"unknown filter {filter!r}")
    if R < 0:
        return 0, 0
    a = [int(t) for t in a]
    piv = max(range(4), key=lambda i: abs(a[i]))
    rest = [i for i in range(4) if i != piv]
    ap = a[piv]
    if ap == 0:
        raise ValueError("zero linear form")
    filtered = filter != "none"
    if filtered:
        if R < 1:
            return 0, 0
        g = np.concatenate([np.arange(-R, 0), np.arange(1, R + 1)]).astype(np.int64)
        third = range(1, R + 1)
    else:
        g = np.arange(-R, R + 1, dtype=np.int64)
        third = range(-R, R + 1)
    u, v = np.meshgrid(g, g, indexing="ij")
    u, v = u.ravel(), v.ravel()
    part = a[rest[0]] * u + a[rest[1]] * v
    g12 = np.gcd(u, v)
    d12 = u * v
    kept = sq = 0
    for w in third:
        t = part + a[rest[2]] * w
        ok = t % ap == 0
        s = -t[ok] // ap
        inbox = np.abs(s) <= R
        if not filtered:
            kept += int(inbox.sum())
            continue
        good = inbox & (s != 0)
        s = s[good]
        if filter == "nonsquare_primitive":
            prim = np.gcd(np.gcd(g12[ok][good], w), s) == 1
        else:
            prim = np.ones(len(s), dtype=bool)
        dl = d12[ok][good][prim] * w * s[prim]
        nsq = int(is_square_array(dl).sum())
        sq += nsq
        kept += int(prim.sum()) - nsq
    if filtered:
        # x -> -x pairs the third coordinate's signs
        return 2 * kept, 2 * sq
    return kept, 0


def count_fiber_box(L, R, filter: str = "none") -> int:
    a = L.coefficient_form if isinstance(L, FiberLattice) else tuple(int(t) ** 2 for t in L)
    return linear_box_count(a, R, filter)[0]
