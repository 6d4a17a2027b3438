"""Scenario runs, sweeps and the tables they write.

A run goes section -> transverse modes -> bracketed 3D spectrum ->
certificates. Every numeric output is a deterministic function of the
configuration; wall-clock timings live under their own key.
"""

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .certificates import (ProfileSet, check_1d_positivity, compute_constants,
                           hardy_property_test, nonexistence_certificate,
                           variational_existence)
from .certificates.constants import lmin
from .eigensolver import EigenRequest, bracket_spectrum
from .errors import BudgetExceeded, HypothesisViolated, ResolutionBudgetExceeded, SchemaViolation
from .form import assemble_form, build_domain, scenario_hash
from .geometry import (WaveguideScenario, WindowSpec, build_cross_section, make_twist_profile,
                       scale_cross_section, validate_scenario)
from .transverse import assemble_transverse, solve_transverse_modes

PHASE_COLUMNS = ["l", "d", "beta", "E1", "lowest_eigenvalue", "bracket_lo", "bracket_hi",
                 "verdict", "lmin", "lmax", "dmax"]
EIGEN_COLUMNS = ["scenario_id", "S", "end_condition", "index", "eigenvalue", "residual",
                 "below_E1"]
CONSTANT_COLUMNS = ["scenario_id", "E1", "d", "p", "r", "rate0", "alpha", "beta", "lam", "lam0",
                    "c1", "c2", "c3", "gamma_ab", "gamma_alpha1", "gamma", "f_L", "gamma_tilde",
                    "gamma_half", "cprime", "C", "d_max", "l_min", "l_max", "c_second_at_lmax"]


def build_scenario(config):
    v = config.values
    geom = build_cross_section(v["section.kind"], v["section.params"], v["section.resolution"])
    if v["section.diameter"] is not None:
        geom = scale_cross_section(geom, v["section.diameter"])
    twist = make_twist_profile(v["twist.beta"], v["twist.theta_m"], v["twist.theta_M"])
    return WaveguideScenario(geom, twist, WindowSpec(v["window.a"], v["window.l"]),
                             S=v["truncation.S"], end="dirichlet")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(x) for k, x in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


@dataclass
class RunRecord:
    scenario_hash: str
    config: dict
    E1: float
    transverse_modes: list
    eigen_report: list
    bracket: dict
    constants: dict
    existence: dict
    nonexistence: dict
    seeds: dict
    notes: dict
    version: str = __version__
    timings: dict = field(default_factory=dict)

    def as_dict(self, timings=True):
        out = {k: getattr(self, k) for k in ("scenario_hash", "version", "config", "seeds", "E1",
                                             "transverse_modes", "eigen_report", "bracket",
                                             "constants", "existence", "nonexistence", "notes")}
        if timings:
            out["timings"] = self.timings
        return _clean(out)

    def to_json(self, timings=True):
        return json.dumps(self.as_dict(timings), indent=2, sort_keys=True)


def _bracket_summary(b):
    return dict(S=list(b.S), E1=b.E1, lower=b.lower, upper=b.upper, eps_disc=b.eps_disc,
                margin=b.margin, threshold=b.threshold, verdict=b.verdict,
                bound_state_below_E1=b.bound_state_below_E1,
                no_bound_state_detected=b.no_bound_state_detected, h=b.h,
                window_cells=b.window_cells, eps_detail=b.eps_detail)


def run_scenario(config, mode="solve"):
    """Full pipeline for one configuration.

    ``mode='modes'`` stops after the transverse problem. ``mode='certify'``
    insists on the non-existence hypotheses and tolerates an unresolvable
    window (the affected checks are recorded as unavailable); ``'solve'``
    treats an unresolvable window as an error.
    """
    v = config.values
    timings, notes = {}, {}
    t0 = time.perf_counter()
    sc = build_scenario(config)
    tm = assemble_transverse(sc.cross_section)
    modes = solve_transverse_modes(tm, k=v["transverse.modes"], tol=v["solver.tol"],
                                   seed=v["solver.seed"])
    E1 = modes.E1
    timings["transverse"] = time.perf_counter() - t0
    mode_rows = [dict(n=i + 1, E_n=float(e), residual=float(r))
                 for i, (e, r) in enumerate(zip(modes.energies, modes.residuals))]
    sid = scenario_hash(sc, v["solver.h_s"])
    seeds = dict(solver=v["solver.seed"], certificate=v["certificate.seed"])
    record = RunRecord(sid, dict(v), E1, mode_rows, [], {}, {}, {}, {}, seeds, notes,
                       timings=timings)
    if mode == "modes":
        return record

    rep = validate_scenario(sc)
    admissible = (not sc.twist.is_zero) and rep.nonexistence_admissible
    if mode == "certify" and not admissible:
        raise HypothesisViolated("non-existence needs a non-zero twist and a window on one "
                                 "side of it, disjoint from its support")

    t0 = time.perf_counter()
    request = EigenRequest(k=v["solver.k"], tol=v["solver.tol"], seed=v["solver.seed"])
    bracket = None
    try:
        bracket = bracket_spectrum(sc, [v["truncation.S"], config.explicit_S2()], k=v["solver.k"],
                                   h_s=v["solver.h_s"], subdivide=v["solver.subdivide"],
                                   request=request, margin_factor=v["solver.margin_factor"],
                                   ratio=v["solver.ratio"], max_dofs=v["solver.max_dofs"])
        record.eigen_report = bracket.report_rows(sid)
        record.bracket = _bracket_summary(bracket)
    except ResolutionBudgetExceeded as exc:
        if mode == "solve":
            raise
        notes["spectral"] = f"window not resolvable: {exc}"
    timings["spectrum"] = time.perf_counter() - t0

    fm = None
    try:
        fm = assemble_form(build_domain(sc, v["solver.h_s"], v["solver.subdivide"],
                                        v["solver.max_dofs"]), sc.twist, tm)
        ex = variational_existence(sc, E1, fm)
        record.existence = dict(l=ex.l, l_min=ex.l_min, analytic_gap=ex.analytic_gap,
                                discrete_gap=ex.discrete_gap,
                                relative_difference=ex.relative_difference,
                                verdict=ex.verdict, discrete_verdict=ex.discrete_verdict)
    except ResolutionBudgetExceeded as exc:
        notes["hardy"] = notes["existence"] = f"window not resolvable: {exc}"
        record.existence = dict(l=sc.window.l, l_min=lmin(E1), verdict=bool(sc.window.l > lmin(E1)))

    if admissible:
        t0 = time.perf_counter()
        const, side = compute_constants(sc, tm, modes, h_s=v["solver.h_s"],
                                        alpha=v["certificate.alpha"], beta=v["certificate.beta"],
                                        p=v["certificate.p"], r=v["certificate.r"],
                                        lam=v["certificate.lambda"], lam0=v["certificate.lambda0"])
        record.constants = const.as_dict()
        timings["constants"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        oned = check_1d_positivity(const.C, E1, sc.window.a, sc.window.l, const.p, side,
                                   trials=v["certificate.oned_trials"], seed=v["certificate.seed"],
                                   pad=v["certificate.oned_pad"])
        hardy = None
        if fm is not None:
            prof = ProfileSet(const.p, const.r, sc.window.a, sc.window.l, E1, side)
            hardy = hardy_property_test(fm, prof, const.C, trials=v["certificate.hardy_trials"],
                                        seed=v["certificate.seed"])
        cert = nonexistence_certificate(sc, const, oned, hardy, bracket, unavailable=notes)
        record.nonexistence = cert.as_dict()
        record.nonexistence["oned"] = dict(vars(oned))
        if hardy is not None:
            record.nonexistence["hardy_statistics"] = dict(vars(hardy))
        timings["certificates"] = time.perf_counter() - t0
    else:
        notes["nonexistence"] = "not applicable: untwisted guide or window not one-sided"
    return record


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(x) if isinstance(x, float) else x) for k, x in row.items()})


def write_run_outputs(record, outdir, mode="solve"):
    """Persist the record; returns the list of files written."""
    os.makedirs(outdir, exist_ok=True)
    written = []

    def put(name, writer, *args):
        path = os.path.join(outdir, name)
        writer(path, *args)
        written.append(path)

    put("transverse_modes.csv", _write_csv, ["n", "E_n", "residual"], record.transverse_modes)
    if mode == "modes":
        return written
    name = "certificate.json" if mode == "certify" else "run.json"
    put(name, lambda p: open(p, "w").write(record.to_json() + "\n"))
    if record.eigen_report:
        put("eigen_report.csv", _write_csv, EIGEN_COLUMNS, record.eigen_report)
    if record.constants:
        row = dict(record.constants, scenario_id=record.scenario_hash)
        put("constants.csv", _write_csv, CONSTANT_COLUMNS, [row])
    return written


# ---------------------------------------------------------------- sweeps

SWEEP_AXES = {"l": "window.l", "d": "section.diameter", "beta": "twist.beta"}


def parse_axis(spec):
    """``'l=0.25*lmin,0.5,1'`` -> ``('l', [('lmin', 0.25), (None, 0.5), (None, 1.0)])``."""
    if "=" not in spec:
        raise SchemaViolation([(spec, "axis must look like name=v1,v2,...")])
    name, rest = spec.split("=", 1)
    name = name.strip()
    if name not in SWEEP_AXES:
        raise SchemaViolation([(name, f"unknown sweep axis; use one of {', '.join(SWEEP_AXES)}")])
    items = []
    for part in (p.strip() for p in rest.split(",")):
        if not part:
            continue
        try:
            if part.endswith("*lmin"):
                if name != "l":
                    raise ValueError
                items.append(("lmin", float(part[:-5])))
            else:
                items.append((None, float(part)))
        except ValueError:
            raise SchemaViolation([(name, f"cannot read axis value {part!r}")]) from None
    return name, items


def _cell_config(config, assignment):
    """Resolve one cell's overrides (``lmin`` multiples need the cell's E1)."""
    over = {SWEEP_AXES[k]: x for k, (unit, x) in assignment.items() if unit is None}
    cfg = config.with_overrides(over)
    if "l" in assignment and assignment["l"][0] == "lmin":
        sc = build_scenario(cfg)
        E1 = solve_transverse_modes(assemble_transverse(sc.cross_section)).E1
        cfg = cfg.with_overrides({"window.l": assignment["l"][1] * lmin(E1)})
    return cfg


def run_cell(config, assignment):
    """One phase-diagram cell; independent of every other cell."""
    cfg = _cell_config(config, assignment)
    rec = run_scenario(cfg, mode="cell")
    sc = build_scenario(cfg)
    b = rec.bracket
    row = dict(l=sc.window.l, d=sc.cross_section.diameter, beta=sc.twist.beta, E1=rec.E1,
               lowest_eigenvalue=b["upper"][-1][0] if b else float("nan"),
               bracket_lo=b["lower"][-1][0] if b else float("nan"),
               bracket_hi=b["upper"][-1][0] if b else float("nan"),
               verdict=b["verdict"] if b else "unresolved",
               lmin=lmin(rec.E1),
               lmax=rec.constants.get("l_max", float("nan")),
               dmax=rec.constants.get("d_max", float("inf")))
    extra = dict(existence=rec.existence.get("verdict"),
                 nonexistence=rec.nonexistence.get("verdict") if rec.nonexistence else None,
                 scenario_hash=rec.scenario_hash, notes=rec.notes)
    return {k: float(x) if isinstance(x, (np.floating, np.integer)) else x
            for k, x in row.items()}, extra


@dataclass
class SweepResult:
    axes: dict
    rows: list
    extras: list

    def write(self, outdir):
        os.makedirs(outdir, exist_ok=True)
        _write_csv(os.path.join(outdir, "phase.csv"), PHASE_COLUMNS, self.rows)
        summary = dict(axes={k: [list(x) for x in v] for k, v in self.axes.items()},
                       cells=[dict(r, **e) for r, e in zip(self.rows, self.extras)])
        with open(os.path.join(outdir, "sweep.json"), "w") as fh:
            fh.write(json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n")


def sweep(config, axis_specs, workers=None):
    """Cartesian sweep over the given axes; cells run in parallel."""
    axes = dict(parse_axis(s) if isinstance(s, str) else s for s in axis_specs)
    if not axes:
        raise BudgetExceeded("a sweep needs at least one axis")
    n_cells = int(np.prod([len(v) for v in axes.values()]))
    if n_cells == 0:
        raise BudgetExceeded("an axis is empty, so the sweep has no cells")
    if n_cells > config.values["sweep.max_cells"]:
        raise BudgetExceeded(f"{n_cells} cells exceed sweep.max_cells = "
                             f"{config.values['sweep.max_cells']}")
    names = list(axes)
    grids = np.meshgrid(*[np.arange(len(axes[k])) for k in names], indexing="ij")
    cells = [{k: axes[k][int(g.ravel()[i])] for k, g in zip(names, grids)}
             for i in range(n_cells)]
    workers = workers or config.values["sweep.workers"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, [config] * n_cells, cells))
    else:
        results = [run_cell(config, c) for c in cells]
    return SweepResult(axes, [r for r, _ in results], [e for _, e in results])
