"""Counting points of x1*y1^2 + x2*y2^2 + x3*y3^2 + x4*y4^2 = 0 by height.

Walks through the exact counter, the two halves it is built from, and how far
the count still is from c*B*log B at sizes a laptop handles.
"""
import math

from qbl import enumeration, localdens

# %% the leading constant
c = localdens.peyre_constant_value()
print(f"c = {c:.6f}")

# %% tiny heights: the 24 points of height 1, listed
pts = sorted(enumeration.iter_points(1), key=lambda p: (p.x.entries, p.y.entries))
for p in pts[:6]:
    print(p.x.entries, p.y.entries)
print("...", len(pts), "points")

# %% the counter is split into planes (small y) and quadrics (small x)
B = 10 ** 4
auto = enumeration.count_points(B, c=c)
ys = enumeration.count_points(B, split="y-side", c=c)
xs = enumeration.count_points(B, split="x-side", c=c)
print(f"B={B}: {ys.canonical_count} + {xs.canonical_count} = {auto.canonical_count}")

# moving the boundary changes how the work is shared, not the answer
moved = enumeration.count_points(B, boundary=2 * auto.split_boundary, c=c)
print("boundary", auto.split_boundary, "->", moved.split_boundary, ":", moved.canonical_count)

# %% the ratio N / (c B log B) creeps up slowly
for B in (10 ** 3, 10 ** 4, 10 ** 5):
    r = enumeration.count_points(B, c=c)
    # the gap behaves like a constant times B, so N/B - c log B is roughly flat
    print(f"B={B:>7}  N={r.canonical_count:>10}  ratio={r.ratio:.4f}  "
          f"N/B - c log B = {r.canonical_count / B - c * math.log(B):8.2f}  "
          f"[{r.elapsed_seconds:.1f} s]")
