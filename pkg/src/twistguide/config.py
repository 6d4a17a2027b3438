"""Flat dotted-key configuration files.

One ``section.key = value`` per line, ``#`` starts a comment. Values are
numbers, ``true``/``false``, bare words, double-quoted strings or
comma-separated number lists. Every key has a documented default (see
:data:`SCHEMA`); only ``schema_version`` is mandatory.
"""

import math
import re
from dataclasses import dataclass

from .errors import ParseError, SchemaViolation

SCHEMA_VERSION = 1

_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)+|schema_version")
_NUMBER = re.compile(r"[+-]?((\d+\.?\d*|\.\d+)([eE][+-]?\d+)?|inf)")


@dataclass(frozen=True)
class Field:
    kind: str             # int | float | str | bool | floats | choice
    default: object
    doc: str
    positive: bool = False
    choices: tuple = ()
    optional: bool = False  # ``None`` default allowed


SCHEMA = {
    "schema_version": Field("int", None, "must equal 1"),
    "output.dir": Field("str", "out", "directory for run.json and the CSV tables"),
    "section.kind": Field("choice", "rectangle", "cross-section family",
                          choices=("rectangle", "ellipse")),
    "section.params": Field("floats", (1.0, 0.5),
                            "rectangle side lengths or ellipse semi-axes", positive=True),
    "section.resolution": Field("float", 16.0, "grid cells per unit length", positive=True),
    "section.diameter": Field("float", None, "rescale the section to this diameter",
                              positive=True, optional=True),
    "transverse.modes": Field("int", 4, "number of transverse modes reported", positive=True),
    "twist.beta": Field("float", 0.0, "peak twist rate (0 = untwisted)"),
    "twist.theta_m": Field("float", -1.0, "left end of the twist support"),
    "twist.theta_M": Field("float", 1.0, "right end of the twist support"),
    "window.a": Field("float", 0.0, "left end of the Neumann window"),
    "window.l": Field("float", 1.0, "window width", positive=True),
    "truncation.S": Field("float", 3.0, "first truncation half-length", positive=True),
    "truncation.S2": Field("float", None, "second truncation (default 2 S)", positive=True,
                           optional=True),
    "solver.h_s": Field("float", 1 / 16, "requested longitudinal step", positive=True),
    "solver.subdivide": Field("int", 1, "window cell count multiple", positive=True),
    "solver.k": Field("int", 1, "eigenvalues tracked per run", positive=True),
    "solver.tol": Field("float", 1e-8, "relative residual tolerance", positive=True),
    "solver.seed": Field("int", 0, "starting vector seed"),
    "solver.ratio": Field("float", 1.5, "refinement ratio of the two-grid error estimate",
                          positive=True),
    "solver.margin_factor": Field("float", 5.0, "margin below E1 in units of eps_disc",
                                  positive=True),
    "solver.max_dofs": Field("int", 400_000, "largest 3D problem attempted", positive=True),
    "certificate.alpha": Field("float", 0.5, "splitting parameter alpha", positive=True),
    "certificate.beta": Field("float", 0.5, "splitting parameter beta", positive=True),
    "certificate.p": Field("float", None, "Hardy point override", optional=True),
    "certificate.r": Field("float", None, "Hardy radius override", positive=True, optional=True),
    "certificate.lambda": Field("float", None, "override for lambda", positive=True,
                                optional=True),
    "certificate.lambda0": Field("float", None, "override for lambda0", positive=True,
                                 optional=True),
    "certificate.hardy_trials": Field("int", 1000, "random fields in the Hardy test",
                                      positive=True),
    "certificate.oned_trials": Field("int", 1000, "random vectors in the 1D test",
                                     positive=True),
    "certificate.oned_pad": Field("float", 50.0, "1D truncation beyond p and the window",
                                  positive=True),
    "certificate.seed": Field("int", 0, "Monte-Carlo seed"),
    "sweep.workers": Field("int", 1, "concurrent sweep cells", positive=True),
    "sweep.max_cells": Field("int", 64, "largest sweep accepted", positive=True),
}


def _parse_value(text, line, col):
    if text.startswith('"'):
        if len(text) < 2 or not text.endswith('"'):
            raise ParseError("unterminated string", line, col)
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if "," in text:
        items = []
        offset = 0
        for part in text.split(","):
            stripped = part.strip()
            c = col + offset + (len(part) - len(part.lstrip()))
            if not _NUMBER.fullmatch(stripped):
                raise ParseError(f"list item {stripped!r} is not a number", line, c)
            items.append(float(stripped))
            offset += len(part) + 1
        return tuple(items)
    if _NUMBER.fullmatch(text):
        return int(text) if re.fullmatch(r"[+-]?\d+", text) else float(text)
    if re.fullmatch(r"[A-Za-z_][\w.-]*", text):
        return text
    raise ParseError(f"cannot read value {text!r}", line, col)


def _strip_comment(raw):
    in_str = False
    for i, ch in enumerate(raw):
        if ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return raw[:i]
    return raw


def parse_text(text):
    """Raw ``{key: value}`` mapping; syntax errors carry 1-based line/column."""
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        if "=" not in body:
            raise ParseError("expected 'key = value'", n, len(body) - len(body.lstrip()) + 1)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        kcol = len(key_part) - len(key_part.lstrip()) + 1
        if not _KEY.fullmatch(key):
            raise ParseError(f"malformed key {key!r}", n, kcol)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", n, kcol)
        value = value_part.strip()
        vcol = len(key_part) + 2 + len(value_part) - len(value_part.lstrip())
        if not value:
            raise ParseError(f"missing value for {key!r}", n, vcol)
        out[key] = _parse_value(value, n, vcol)
    return out


def _coerce(key, fld, value, violations):
    if value is None:
        return None
    k = fld.kind
    if k == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            violations.append((key, f"expected an integer, got {value!r}"))
            return None
    elif k == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            violations.append((key, f"expected a number, got {value!r}"))
            return None
        value = float(value)
        if not math.isfinite(value):
            violations.append((key, "must be finite"))
            return None
    elif k == "floats":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = (float(value),)
        if not isinstance(value, tuple):
            violations.append((key, f"expected a number list, got {value!r}"))
            return None
    elif k == "bool":
        if not isinstance(value, bool):
            violations.append((key, f"expected true or false, got {value!r}"))
            return None
    elif k in ("str", "choice"):
        if not isinstance(value, str):
            violations.append((key, f"expected text, got {value!r}"))
            return None
        if k == "choice" and value not in fld.choices:
            violations.append((key, f"must be one of {', '.join(fld.choices)}"))
            return None
    if fld.positive:
        vals = value if isinstance(value, tuple) else (value,)
        if any(v <= 0 for v in vals):
            violations.append((key, "must be positive"))
            return None
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    values: dict
    source: str = "<text>"

    def __getitem__(self, key):
        return self.values[key]

    @property
    def output_dir(self):
        return self.values["output.dir"]

    def with_overrides(self, overrides):
        raw = dict(self.values)
        raw.update(overrides)
        return validate(raw, self.source)

    def explicit_S2(self):
        S2 = self.values["truncation.S2"]
        return 2.0 * self.values["truncation.S"] if S2 is None else S2


def validate(raw, source="<text>"):
    """Fill defaults and check the schema; all violations are reported at once."""
    violations = []
    for key in raw:
        if key not in SCHEMA:
            violations.append((key, "unknown key"))
    values = {}
    for key, fld in SCHEMA.items():
        if key in raw:
            values[key] = _coerce(key, fld, raw[key], violations)
        else:
            values[key] = fld.default
    if "schema_version" not in raw:
        violations.append(("schema_version", "missing"))
    elif values["schema_version"] is not None and values["schema_version"] != SCHEMA_VERSION:
        violations.append(("schema_version", f"must be {SCHEMA_VERSION}"))
    if values["section.params"] is not None and len(values["section.params"]) != 2:
        violations.append(("section.params", "needs exactly two numbers"))
    if values["section.resolution"] is not None and values["section.resolution"] < 1:
        violations.append(("section.resolution", "must be at least 1"))
    tm, tM, b = values["twist.theta_m"], values["twist.theta_M"], values["twist.beta"]
    if b is not None and b < 0:
        violations.append(("twist.beta", "must be non-negative"))
    if None not in (tm, tM, b) and b > 0 and not tM > tm:
        violations.append(("twist.theta_M", "must exceed twist.theta_m"))
    S, S2 = values["truncation.S"], values["truncation.S2"]
    if None not in (S, S2) and not S2 > S:
        violations.append(("truncation.S2", "must exceed truncation.S"))
    if values["solver.tol"] is not None and values["solver.tol"] > 1e-2:
        violations.append(("solver.tol", "must not exceed 1e-2"))
    for key in ("certificate.alpha", "certificate.beta"):
        v = values[key]
        if v is not None and v > 1:
            violations.append((key, "must lie in (0, 1]"))
    if values["certificate.alpha"] is not None and values["certificate.alpha"] >= 1:
        violations.append(("certificate.alpha", "must be below 1 for the Hardy constant"))
    if values["solver.ratio"] is not None and values["solver.ratio"] <= 1:
        violations.append(("solver.ratio", "must exceed 1"))
    if violations:
        raise SchemaViolation(violations)
    return ScenarioConfig(values, source)


def parse_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return validate(parse_text(text), str(path))


def parse_config_text(text):
    return validate(parse_text(text))


def schema_table():
    """Markdown table of every key, its default and meaning."""
    lines = ["| key | default | meaning |", "| --- | --- | --- |"]
    for key, f in SCHEMA.items():
        d = "required" if key == "schema_version" else ("unset" if f.default is None else f.default)
        if isinstance(d, tuple):
            d = ", ".join(repr(x) for x in d)
        lines.append(f"| `{key}` | {d} | {f.doc} |")
    return "\n".join(lines)
