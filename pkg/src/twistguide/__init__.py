"""Spectral experiments on twisted waveguides with a Neumann window.

The guide is ``R x omega`` in straightened coordinates: the twist enters the
energy form as ``thetadot * d_tau``, and a band ``(a, a + l) x boundary``
carries Neumann instead of Dirichlet conditions.
"""

__version__ = "0.1.0"

from .eigensolver import (EigenRequest, EigenResult, SpectralBracket, bracket_spectrum,
                          lowest_eigenpairs, smallest_eigenpairs)
from .form import (FormMatrices, TrialField, assemble_form, build_domain, interpolate_phi,
                   rayleigh, segment_form)
from .geometry import (CrossSectionGeometry, TwistProfile, WaveguideScenario, WindowSpec,
                       build_cross_section, make_twist_profile, reflect_scenario,
                       scale_cross_section, validate_scenario)
from .transverse import (assemble_transverse, estimate_lambda, rectangle_fd_energy,
                         solve_transverse_modes)
