"""Command line: ``solve``, ``sweep``, ``certify`` and ``modes``.

Exit codes: 0 success (negative verdicts included), 2 configuration error,
3 solver non-convergence, 4 hypothesis violation, 1 anything else.
"""

import argparse
import sys

from .config import parse_config
from .errors import HypothesisViolated, NoConvergence, TwistGuideError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_HYPOTHESIS = 0, 2, 3, 4

# modules whose errors mean "the request itself is unusable"
_CONFIG_MODULES = ("lab", "geometry", "transverse_spectrum", "waveguide_form")


def exit_code_for(exc):
    if isinstance(exc, NoConvergence):
        return EXIT_SOLVER
    if isinstance(exc, HypothesisViolated) or getattr(exc, "module", "") == "certificates":
        return EXIT_HYPOTHESIS
    if getattr(exc, "module", "") in _CONFIG_MODULES:
        return EXIT_CONFIG
    return 1


def _parser():
    ap = argparse.ArgumentParser(prog="twistguide", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, text in (("solve", "bracket the spectrum and evaluate the certificates"),
                       ("certify", "non-existence certificate (hypotheses enforced)"),
                       ("modes", "transverse Dirichlet modes only"),
                       ("sweep", "phase diagram over l, d and beta")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("config")
        p.add_argument("-o", "--output", help="output directory (overrides output.dir)")
        if verb == "sweep":
            p.add_argument("--axis", action="append", default=[],
                           help="name=v1,v2,... with name in l, d, beta; l accepts x*lmin")
            p.add_argument("--workers", type=int, default=None)
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    from . import lab
    try:
        config = parse_config(args.config)
        outdir = args.output or config.output_dir
        if args.verb == "sweep":
            result = lab.sweep(config, args.axis, workers=args.workers)
            result.write(outdir)
            print(f"{len(result.rows)} cells written to {outdir}")
            return EXIT_OK
        record = lab.run_scenario(config, mode=args.verb)
        for path in lab.write_run_outputs(record, outdir, args.verb):
            print(path)
        if record.bracket:
            print(f"E1 = {record.E1:.10g}; bound state: {record.bracket['verdict']}")
        if record.nonexistence:
            print(f"non-existence certificate: {record.nonexistence['verdict']}")
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TwistGuideError as exc:
        print(f"error [{getattr(exc, 'module', '?')}]: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
