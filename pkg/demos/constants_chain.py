"""Scalar chain behind the non-existence result and the 1D check at l_max."""

from twistguide.certificates import check_1d_positivity, compute_constants
from twistguide.geometry import WaveguideScenario, WindowSpec, build_cross_section, make_twist_profile
from twistguide.transverse import assemble_transverse

g = build_cross_section("rectangle", (1.0, 0.5), 16)
sc = WaveguideScenario(g, make_twist_profile(1.0, -1.0, 1.0), WindowSpec(1.5, 0.5), S=4.0)
const, side = compute_constants(sc, assemble_transverse(g))
for key, value in const.as_dict().items():
    print(f"  {key:>12} = {value}")
print(f"the section diameter {const.d:.3f} exceeds d_max {const.d_max:.4f};")
print(f"windows shorter than l_max = {const.l_max:.3e} are needed as well")

for C, label in ((const.C, "C from the chain"), (0.0, "no Hardy term")):
    v = check_1d_positivity(C, const.E1, 1.5, const.l_max, const.p, side, trials=200)
    print(f"1D operator at l_max, {label}: ground = {v.ground:.3e} (eps {v.eps_disc:.1e}), "
          f"positive = {v.positive}")
