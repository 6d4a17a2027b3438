"""Closed-form constants, the effective 1D operator and the certificates."""

from .certify import (ExistenceCertificate, HardyStatistics, NonexistenceCertificate, SubCheck,
                      compute_constants, compute_lambda0, hardy_extremals, hardy_property_test, hardy_weights,
                      lambda0_defect, nonexistence_certificate, variational_existence)
from .constants import (EffectiveConstants, HardyPoint, c_second, effective_constants,
                        existence_gap, gamma_coefficients, gamma_half, gamma_half_conservative,
                        hardy_constant, lmax, lmin, select_hardy_point, solve_dmax)
from .oned import (OneDOperator, OneDVerdict, assemble_1d, check_1d_positivity, ground_energy,
                   ground_energy_two_grid, square_well_ground)
from .profiles import ProfileSet, phi_squared_integral, rho_integral
