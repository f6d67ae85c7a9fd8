"""INI experiment configuration (stdlib ``configparser``).

Grammar: sections ``[experiment]``, ``[domain]``, ``[grid]``, ``[constants]``;
one ``key = value`` per line. Value types:

* float: any Python float literal, ``inf`` allowed;
* int;
* vector: whitespace-separated floats (``-1 0.5``);
* list: whitespace-separated floats, same as vector;
* points: ``x1 .. xn t`` groups separated by ``;``;
* bool: ``true`` / ``false``;
* string.

Unknown sections or keys are errors. All errors are collected and raised
together in a :class:`ConfigError`.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Optional

from .domains import INV_E

COMMANDS = ("verify-solutions", "verify-barriers", "solve", "probe-regularity", "cylinder-top",
            "sweep-p", "fundamental-limit")
DOMAIN_KINDS = ("cylinder", "ball", "petrovsky", "heatball", "custom-expression")
CONSTRUCTIONS = ("sphere", "petrovsky", "irregularity")

NEEDS_DOMAIN = {"solve", "probe-regularity", "cylinder-top", "sweep-p"}
NEEDS_H = {"solve", "cylinder-top", "sweep-p"}

REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# key -> (type, default); REQUIRED marks mandatory keys, None optional-absent
EXPERIMENT_KEYS = {
    "command": ("str", REQUIRED),
    "p": ("float", REQUIRED),
    "n": ("int", REQUIRED),
    "seed": ("int", 0),
    "out": ("str", None),
}

DOMAIN_KEYS = {
    "cylinder": {"lo": ("vector", REQUIRED), "hi": ("vector", REQUIRED), "t0": ("float", REQUIRED),
                 "t1": ("float", REQUIRED)},
    "ball": {"center": ("vector", REQUIRED), "center_t": ("float", 0.0), "R": ("float", REQUIRED),
             "complement": ("bool", False), "lo": ("vector", None), "hi": ("vector", None),
             "t0": ("float", None), "t1": ("float", None)},
    "petrovsky": {"factor": ("float", 1.0), "c": ("float", REQUIRED)},
    "heatball": {"level": ("float", REQUIRED), "apex": ("vector", None), "apex_t": ("float", 0.0)},
    "custom-expression": {"expr": ("str", REQUIRED), "lo": ("vector", REQUIRED), "hi": ("vector", REQUIRED),
                          "t0": ("float", REQUIRED), "t1": ("float", REQUIRED)},
}

GRID_KEYS = {"h": ("float", None), "dt": ("float", None)}

CONSTANT_KEYS = {
    "verify-solutions": {"samples": ("int", 200), "fd_h": ("float", 1e-3)},
    "verify-barriers": {"construction": ("str", REQUIRED), "c": ("float", 0.5),
                        "c_time": ("float", math.exp(-math.e ** 2)), "R0": ("float", 1.0),
                        "center": ("vector", None), "center_t": ("float", 0.0), "contact": ("vector", None),
                        "a": ("float", None), "allow_south_pole": ("bool", False), "eps1": ("float", 0.2),
                        "k": ("float", 0.9), "m": ("float", -0.5), "eps": ("float", None),
                        "samples": ("int", 10000), "tol": ("float", 1e-8)},
    "solve": {"datum": ("str", REQUIRED), "slices": ("int", 5)},
    "probe-regularity": {"target": ("vector", REQUIRED), "h_levels": ("list", (0.04, 0.02, 0.01)),
                         "gap_tol": ("float", 0.05), "irr_floor": ("float", 0.15), "approach": ("vector", None)},
    "cylinder-top": {"eps": ("float", 0.1), "datum": ("str", "exact:fundamental")},
    "sweep-p": {"p_list": ("list", (10.0, 100.0, 1000.0)), "datum": ("str", REQUIRED)},
    "fundamental-limit": {"points": ("points", REQUIRED), "p_list": ("list", (10.0, 100.0, 1000.0, 1e6))},
}


@dataclass
class ExperimentConfig:
    command: str
    p: float
    n: int
    seed: int = 0
    out: str = ""
    domain: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)


# ------------------------------------------------------------ value codecs

def _parse_value(kind, text):
    text = text.strip()
    if kind == "str":
        return text
    if kind == "float":
        return float(text)
    if kind == "int":
        v = float(text)
        if v != int(v):
            raise ValueError(f"{text!r} is not an integer")
        return int(v)
    if kind == "bool":
        low = text.lower()
        if low not in ("true", "false"):
            raise ValueError(f"{text!r} is not true/false")
        return low == "true"
    if kind in ("vector", "list"):
        parts = text.replace(",", " ").split()
        if not parts:
            raise ValueError("empty list")
        return tuple(float(s) for s in parts)
    if kind == "points":
        groups = [g for g in text.split(";") if g.strip()]
        if not groups:
            raise ValueError("no points")
        return tuple(tuple(float(s) for s in g.replace(",", " ").split()) for g in groups)
    raise AssertionError(kind)


def _render_value(kind, value):
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    if kind == "int":
        return str(int(value))
    if kind in ("vector", "list"):
        return " ".join(repr(float(v)) for v in value)
    if kind == "points":
        return "; ".join(" ".join(repr(float(v)) for v in pt) for pt in value)
    return str(value)


def _read_section(raw: dict, schema: dict, section: str, errors: list) -> dict:
    out = {}
    for key in raw:
        if key not in schema:
            errors.append(f"[{section}] unknown key {key!r}")
    for key, (kind, default) in schema.items():
        if key in raw:
            try:
                out[key] = _parse_value(kind, raw[key])
            except ValueError as exc:
                errors.append(f"[{section}] {key}: expected {kind}, got {raw[key]!r} ({exc})")
        elif default is REQUIRED:
            errors.append(f"[{section}] missing required key {key!r}")
        elif default is not None:
            out[key] = default
    return out


# ------------------------------------------------------------ parse / validate

def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse and validate an INI document.

    ``overrides`` maps ``"section.key"`` to raw strings applied before
    validation (used by CLI flags).
    """
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=None, empty_lines_in_values=False)
    cp.optionxform = str
    errors = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed document: {exc}"]) from exc
    raw = {s: dict(cp[s]) for s in cp.sections()}
    for dotted, value in (overrides or {}).items():
        sec, key = dotted.split(".", 1)
        raw.setdefault(sec, {})[key] = str(value)
    for sec in raw:
        if sec not in ("experiment", "domain", "grid", "constants"):
            errors.append(f"unknown section [{sec}]")
    exp = _read_section(raw.get("experiment", {}), EXPERIMENT_KEYS, "experiment", errors)
    command = exp.get("command")
    if command is not None and command not in COMMANDS:
        errors.append(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        command = None
    p = exp.get("p")
    n = exp.get("n")
    if p is not None and (math.isnan(p) or not p > 1):
        errors.append(f"p = {p!r} violates the precondition 1 < p (p = inf allowed)")
    if n is not None and n < 1:
        errors.append(f"n = {n} violates the precondition n >= 1")

    domain = {}
    draw = raw.get("domain", {})
    if command in NEEDS_DOMAIN or draw:
        if "kind" not in draw:
            if command in NEEDS_DOMAIN:
                errors.append("[domain] missing required key 'kind'")
        elif draw["kind"].strip() not in DOMAIN_KINDS:
            errors.append(f"[domain] unknown kind {draw['kind'].strip()!r}; expected one of {', '.join(DOMAIN_KINDS)}")
        else:
            kind = draw["kind"].strip()
            rest = {k: v for k, v in draw.items() if k != "kind"}
            domain = {"kind": kind, **_read_section(rest, DOMAIN_KEYS[kind], "domain", errors)}
            _validate_domain(domain, n, errors)

    grid = _read_section(raw.get("grid", {}), GRID_KEYS, "grid", errors)
    if command in NEEDS_H and "h" not in grid:
        errors.append("[grid] missing required key 'h'")
    if "h" in grid and not grid["h"] > 0:
        errors.append("[grid] h must be positive")
    if "dt" in grid and not grid["dt"] > 0:
        errors.append("[grid] dt must be positive")

    constants = {}
    if command is not None:
        constants = _read_section(raw.get("constants", {}), CONSTANT_KEYS[command], "constants", errors)
        _validate_constants(command, constants, domain, n, errors)
        if command == "cylinder-top" and domain and domain["kind"] != "cylinder":
            errors.append("cylinder-top needs a [domain] of kind 'cylinder'")
    if errors:
        raise ConfigError(errors)

    if "h" in grid and "dt" not in grid and command in ("solve", "cylinder-top"):
        from .core import make_params
        from .solver import cfl_max_dt
        grid["dt"] = cfl_max_dt(grid["h"], make_params(p, n))
    out = exp.get("out") or f"{command}.csv"
    return ExperimentConfig(command, float(p), int(n), int(exp.get("seed", 0)), out, domain, grid, constants)


def _check_len(name, vec, want, errors, section):
    if vec is not None and len(vec) != want:
        errors.append(f"[{section}] {name} needs {want} entries, got {len(vec)}")


def _validate_domain(d, n, errors):
    kind = d["kind"]
    if n is None:
        return
    if kind in ("cylinder", "custom-expression"):
        _check_len("lo", d.get("lo"), n, errors, "domain")
        _check_len("hi", d.get("hi"), n, errors, "domain")
        if "lo" in d and "hi" in d and len(d["lo"]) == len(d["hi"]) and any(a >= b for a, b in zip(d["lo"], d["hi"])):
            errors.append("[domain] need lo < hi in every coordinate")
        if "t0" in d and "t1" in d and not d["t0"] < d["t1"]:
            errors.append("[domain] need t0 < t1")
        if kind == "custom-expression" and "expr" in d:
            from .expr import ExpressionError, compile_expression
            try:
                compile_expression(d["expr"], n)
            except ExpressionError as exc:
                errors.append(f"[domain] expr: {exc}")
    elif kind == "ball":
        _check_len("center", d.get("center"), n, errors, "domain")
        if "R" in d and not d["R"] > 0:
            errors.append("[domain] R must be positive")
        if d.get("complement"):
            for key in ("lo", "hi", "t0", "t1"):
                if key not in d:
                    errors.append(f"[domain] complement ball needs {key!r} for the enclosing box")
            _check_len("lo", d.get("lo"), n, errors, "domain")
            _check_len("hi", d.get("hi"), n, errors, "domain")
    elif kind == "petrovsky":
        c = d.get("c")
        if c is not None and not 0 < c < INV_E:
            errors.append(f"[domain] c = {c!r} violates 0 < c < 1/e ({INV_E:.6f}): log|log|t|| changes sign at "
                          "|t| = 1/e, so the boundary equation |x|^2 = -beta t log|log|t|| has no solution "
                          "for 1/e < |t| < 1; the restriction c < 1/e is imposed rather than guessing a convention")
        if "factor" in d and not d["factor"] >= 1:
            errors.append("[domain] factor must be >= 1")
    elif kind == "heatball":
        if "level" in d and not d["level"] > 0:
            errors.append("[domain] level must be positive")
        _check_len("apex", d.get("apex"), n, errors, "domain")


def _validate_constants(command, c, domain, n, errors):
    if command == "verify-barriers":
        con = c.get("construction")
        if con is not None and con not in CONSTRUCTIONS:
            errors.append(f"[constants] unknown construction {con!r}; expected one of {', '.join(CONSTRUCTIONS)}")
        if "samples" in c and c["samples"] < 100:
            errors.append("[constants] samples must be >= 100")
        if con == "petrovsky" and not 0 < c.get("c", 0.5) < 1:
            errors.append("[constants] c must lie in (0, 1)")
        if con == "irregularity":
            if not 0.5 < c.get("k", 0.9) < 1:
                errors.append("[constants] k must lie in (1/2, 1)")
            if not c.get("eps1", 0.2) > 0:
                errors.append("[constants] eps1 must be positive")
            if not c.get("m", -0.5) < 0:
                errors.append("[constants] m must be negative")
        if n is not None:
            _check_len("center", c.get("center"), n, errors, "constants")
            _check_len("contact", c.get("contact"), n + 1, errors, "constants")
    elif command == "probe-regularity":
        hl = c.get("h_levels")
        if hl is not None and (len(hl) < 3 or any(b >= a for a, b in zip(hl, hl[1:])) or min(hl) <= 0):
            errors.append("[constants] h_levels must be positive, strictly decreasing, with at least 3 entries")
        if n is not None:
            _check_len("target", c.get("target"), n + 1, errors, "constants")
            _check_len("approach", c.get("approach"), n + 1, errors, "constants")
    elif command == "cylinder-top":
        if "eps" in c and not c["eps"] > 0:
            errors.append("[constants] eps must be positive")
    elif command in ("sweep-p", "fundamental-limit"):
        if any(not p > 1 for p in c.get("p_list", ())):
            errors.append("[constants] every p in p_list must satisfy 1 < p")
        if command == "fundamental-limit" and n is not None:
            for pt in c.get("points", ()):
                if len(pt) != n + 1:
                    errors.append(f"[constants] point {pt} needs {n + 1} entries (x1..xn t)")
                elif not pt[-1] > 0:
                    errors.append(f"[constants] point {pt} needs t > 0")
    if "datum" in c:
        _validate_datum(c["datum"], n, errors)


def _validate_datum(text, n, errors):
    kind, _, arg = text.partition(":")
    if kind == "constant":
        try:
            float(arg)
        except ValueError:
            errors.append(f"[constants] datum {text!r}: constant needs a number")
    elif kind == "exact":
        if arg not in ("traveling_wave", "separable", "similarity_integral", "fundamental"):
            errors.append(f"[constants] datum {text!r}: unknown catalog label")
    elif kind == "expression":
        if n is not None:
            from .expr import ExpressionError, compile_expression
            try:
                compile_expression(arg, n)
            except ExpressionError as exc:
                errors.append(f"[constants] datum {text!r}: {exc}")
    else:
        errors.append(f"[constants] datum {text!r}: expected constant:<v>, exact:<label> or expression:<text>")


# ------------------------------------------------------------ render

def render(cfg: ExperimentConfig) -> str:
    """INI text that :func:`parse_config` maps back to ``cfg``."""
    lines = ["[experiment]", f"command = {cfg.command}", f"p = {_render_value('float', cfg.p)}",
             f"n = {cfg.n}", f"seed = {cfg.seed}", f"out = {cfg.out}"]
    if cfg.domain:
        lines += ["", "[domain]", f"kind = {cfg.domain['kind']}"]
        schema = DOMAIN_KEYS[cfg.domain["kind"]]
        for key, (kind, _) in schema.items():
            if key in cfg.domain:
                lines.append(f"{key} = {_render_value(kind, cfg.domain[key])}")
    if cfg.grid:
        lines += ["", "[grid]"]
        for key, (kind, _) in GRID_KEYS.items():
            if key in cfg.grid:
                lines.append(f"{key} = {_render_value(kind, cfg.grid[key])}")
    if cfg.constants:
        lines += ["", "[constants]"]
        for key, (kind, _) in CONSTANT_KEYS[cfg.command].items():
            if key in cfg.constants:
                lines.append(f"{key} = {_render_value(kind, cfg.constants[key])}")
    return "\n".join(lines) + "\n"
