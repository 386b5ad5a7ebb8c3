"""p-adic densities, exponential sums and the singular series of a fiber."""
from fractions import Fraction

from qbl import expsums, localdens

x = (1, 1, 1, -1)

# %% lifting modulo 3^r; the exact limit is available in closed form
lim, r_used, (prev, cur) = localdens.lifted_density(x, 3, 6)
print("lifted:", cur, "limit:", localdens.local_density_limit(x, 3))
for r in (1, 2, 3):
    print(r, localdens.local_density_fiber(x, 3, r))

# %% the same numbers from exponential sums
partial = Fraction(1)
for r in (1, 2, 3):
    partial += Fraction(expsums.s_q_int(x, [0] * 4, 3 ** r), 3 ** (4 * r))
    print(r, partial)

# %% psi lives on squares
print({q: expsums.psi_q(q) for q in range(1, 17)})

# %% a full Euler product, bad primes lifted, good primes in closed form
ef = localdens.singular_series_fiber((1, 2, 3, -5), prime_bound=10 ** 4)
for row in ef.rows()[:6]:
    print(row)
print("value", ef.value, "tail", ef.tail_estimate, "(", ef.tail_note, ")")

# %% counting over fibers: the averaged main term grows like log B
for B in (10 ** 4, 10 ** 5, 10 ** 6):
    m = localdens.main_term_M1(B)
    print(B, m.empirical_sum, m.predicted_slope)
