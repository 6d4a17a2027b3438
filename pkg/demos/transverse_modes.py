"""Dirichlet modes of the cross-section and their convergence."""

import numpy as np

from twistguide.geometry import build_cross_section
from twistguide.transverse import assemble_transverse, estimate_lambda, solve_transverse_modes

exact = 5 * np.pi**2
print("rectangle 1 x 0.5, lowest energy against 5 pi^2 =", exact)
prev = None
for res in (16, 32, 64, 128):
    E = solve_transverse_modes(assemble_transverse(build_cross_section("rectangle", (1.0, 0.5), res))).E1
    ratio = "" if prev is None else f"  error ratio {(prev - exact) / (E - exact):.3f}"
    print(f"  resolution {res:4d}: E1 = {E:.6f}{ratio}")
    prev = E

for kind, params in (("rectangle", (1.0, 0.5)), ("ellipse", (1.0, 0.6))):
    tm = assemble_transverse(build_cross_section(kind, params, 32))
    modes = solve_transverse_modes(tm, k=4)
    print(f"{kind} {params}: E_n = {np.round(modes.energies, 4)}, "
          f"rotational constant lambda = {estimate_lambda(tm, modes):.4f}")
