"""Real densities: slices of the cube, quadric fibers, and the global constant."""
import numpy as np

from qbl import geometry

# %% plane slices of [-1, 1]^4 have exact volumes
print((1, 0, 0, 0), geometry.rho_infinity((1, 0, 0, 0)))
# with one live coordinate the theta integral only converges conditionally,
# so the quadrature cross-check starts at two
for y in [(1, 1, 0, 0), (1, 1, 1, 1), (1, 2, 3, 4)]:
    rho = geometry.rho_infinity(y)
    quad = geometry.rho_infinity_quadrature(y)
    print(y, rho.rational_part, f"{float(rho):.12f}", f"quadrature {quad:.12f}")

# %% quadric fibers: two independent routes
for x in [(1, 1, 1, -1), (1, 1, -1, -1), (1, 2, 3, -5), (3, -1, 4, -7)]:
    a = geometry.sigma_infinity_fiber(x, 1e-9)
    b = geometry.sigma_infinity_fiber(x, 1e-6, method="fresnel")
    print(x, f"{a:.10f}", f"{b:.10f}")
print("2 pi =", 2 * np.pi, " 16 log 2 =", 16 * np.log(2))

# %% weights smooth out the sharp cube edge
w = geometry.SmoothWeight(0.05, "inner_w1")
print("weighted density of (1,2,3,-5):", geometry.sigma_infinity_weighted(w, (1, 2, 3, -5)))

# %% tau through both routes; the intervals should overlap
t1 = geometry.tau_infinity("via_rho", 1e-3)
t2 = geometry.tau_infinity("via_sigma", 5e-3)
print(t1)
print(t2)
print("consistent:", t1.consistent_with(t2))
