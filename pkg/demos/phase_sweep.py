"""Small phase sweep over window length and twist, written as phase.csv."""

import sys

from twistguide.config import parse_config_text
from twistguide.lab import sweep

cfg = parse_config_text("schema_version = 1\nwindow.a = 1.5\ntruncation.S = 3\n"
                        "solver.h_s = 0.0625\nsolver.subdivide = 10\ncertificate.hardy_trials = 100\n"
                        "certificate.oned_trials = 100\n")
result = sweep(cfg, ["l=0.5*lmin,2*lmin", "beta=0,1"], workers=2)
out = sys.argv[1] if len(sys.argv) > 1 else "out/phase"
result.write(out)
for row in result.rows:
    print(f"l={row['l']:.3f} beta={row['beta']:.0f}: lowest-E1={row['lowest_eigenvalue'] - row['E1']:8.3f} "
          f"verdict={row['verdict']}")
print("written to", out)
