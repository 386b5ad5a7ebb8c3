"""Integer points on the planes x . (y1^2, ..., y4^2) = 0 for fixed y."""
from qbl import geometry, lattice

# %% a basis, its Gram determinant and the sup-norm minima
for y in [(1, 1, 1, 1), (1, 2, 3, 4), (1, 1, 1, 50), (0, 0, 7, 31)]:
    L = lattice.fiber_lattice_basis(y)
    minima, shortest = lattice.successive_minima_sup(L)
    print(y, "det^2 =", L.det_squared, "minima", minima, "shortest", shortest)

# %% box counts approach rho * (2R)^3 / det once R passes the last minimum
y = (1, 2, 3, 4)
L = lattice.fiber_lattice_basis(y)
rho = float(geometry.rho_infinity(y))
for R in (5, 10, 20, 40, 80):
    n = lattice.count_fiber_box(L, R)
    print(f"R={R:>3}  count={n:>7}  rho R^3={rho * R ** 3:10.1f}")

# %% the filter used by the global counter
for f in ("none", "nonsquare", "nonsquare_primitive"):
    print(f, lattice.count_fiber_box(L, 20, f))
