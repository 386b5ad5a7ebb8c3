"""Point counts and local densities for x1*y1^2 + x2*y2^2 + x3*y3^2 + x4*y4^2 = 0."""
__version__ = "0.1.0"

from .arith import CoeffVector, is_square, delta_bad, jacobi_symbol, ramanujan_sum
from .geometry import (ExactDensity, SmoothWeight, TauEstimate, ToleranceError, rho_infinity,
                       slice_volume, sigma_infinity_fiber, sigma_infinity_weighted,
                       smooth_weight_eval, tau_infinity)
from .lattice import FiberLattice, fiber_lattice_basis, successive_minima_sup, count_fiber_box
from .expsums import DiagonalForm, ComplexExact, gauss_sum, dual_form, s_q, psi_q
from .localdens import (EulerFactorization, MainTermEstimate, local_density_fiber,
                        euler_factor_good, singular_series_fiber, n_full, main_term_M1,
                        main_term_M2, peyre_constant)
from .enumeration import (BiprojectivePoint, CountReport, thin_set_membership,
                          fiber_point_count, count_points, weighted_count)
