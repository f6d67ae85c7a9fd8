"""``pparab`` command line: one subcommand per experiment, INI configs, CSV output.

Exit status: 0 success, 1 experiment-level failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from typing import Callable, Optional

import numpy as np

from . import barriers, domains, lab, solutions, solver
from .config import COMMANDS, CONSTRUCTIONS, ConfigError, ExperimentConfig, parse_config
from .core import Point, make_params
from .expr import compile_expression

FLAG_TARGETS = {
    # flag dest -> "section.key"
    "p": "experiment.p", "n": "experiment.n", "seed": "experiment.seed", "out": "experiment.out",
    "h": "grid.h", "dt": "grid.dt", "datum": "constants.datum", "samples": "constants.samples",
    "construction": "constants.construction", "c": "constants.c", "R0": "constants.R0", "a": "constants.a",
    "eps1": "constants.eps1", "k": "constants.k", "m": "constants.m", "tol": "constants.tol",
    "eps": "constants.eps", "target": "constants.target", "h_levels": "constants.h_levels",
    "p_list": "constants.p_list", "points": "constants.points",
}

SUBCOMMAND_HELP = {
    "verify-solutions": "residual and jet checks of the explicit solution catalog",
    "verify-barriers": "verify barrier axioms for one construction",
    "solve": "explicit grid solve of a Dirichlet problem",
    "probe-regularity": "approach a boundary point on refining grids",
    "cylinder-top": "top-data irrelevance and the eps/(T-t) bracket",
    "sweep-p": "gap between p-solutions and the p = inf solution",
    "fundamental-limit": "gap between H_p and the heat kernel W",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pparab", description="Numerical lab for the normalized p-parabolic "
                                     "equation u_t = (1/p)|Du|^(2-p) div(|Du|^(p-2) Du).")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=SUBCOMMAND_HELP[name], description=SUBCOMMAND_HELP[name])
        sp.add_argument("--config", metavar="FILE", help="INI experiment configuration")
        sp.add_argument("--p", help="exponent, 1 < p, 'inf' allowed")
        sp.add_argument("--n", help="space dimension")
        sp.add_argument("--seed", help="seed for quasi-random sampling")
        sp.add_argument("--out", metavar="CSV", help="output CSV path")
        if name in ("solve", "probe-regularity", "cylinder-top", "sweep-p"):
            sp.add_argument("--domain", metavar="FILE", help="INI file whose [domain] section is used")
        if name in ("solve", "cylinder-top", "sweep-p"):
            sp.add_argument("--h", help="spatial step")
        if name in ("solve", "sweep-p", "cylinder-top"):
            sp.add_argument("--datum", help="constant:<v>, exact:<label> or expression:<text>")
        if name == "solve":
            sp.add_argument("--dt", help="time step (default: CFL bound)")
        if name in ("verify-solutions", "verify-barriers"):
            sp.add_argument("--samples", help="number of samples")
        if name == "verify-barriers":
            sp.add_argument("--construction", choices=CONSTRUCTIONS)
            sp.add_argument("--c", help="Petrovsky constant")
            sp.add_argument("--R0", help="sphere radius")
            sp.add_argument("--a", help="sphere exponent override")
            sp.add_argument("--eps1", help="witness exponent gap")
            sp.add_argument("--k", help="witness Gaussian factor in (1/2, 1)")
            sp.add_argument("--m", help="witness level, negative")
            sp.add_argument("--tol", help="axiom tolerance")
        if name == "probe-regularity":
            sp.add_argument("--target", help="'x1 .. xn t'")
            sp.add_argument("--h-levels", dest="h_levels", help="decreasing steps, e.g. '0.04 0.02 0.01'")
        if name == "cylinder-top":
            sp.add_argument("--eps", help="bracket offset, positive")
        if name in ("sweep-p", "fundamental-limit"):
            sp.add_argument("--p-list", dest="p_list", help="exponents, e.g. '10 100 1000'")
        if name == "fundamental-limit":
            sp.add_argument("--points", help="'x1 .. xn t; ...'")
    return parser


def full_help() -> str:
    """Top-level help followed by every subcommand's help."""
    parser = build_parser()
    parts = [parser.format_help()]
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name in COMMANDS:
        parts.append(sub.choices[name].format_help())
    return "\n".join(parts)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    overrides = {"experiment.command": args.command}
    domain_file = getattr(args, "domain", None)
    if domain_file:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp.read(domain_file, encoding="utf-8")
        if not cp.has_section("domain"):
            raise ConfigError([f"{domain_file}: no [domain] section"])
        for key, value in cp["domain"].items():
            overrides[f"domain.{key}"] = value
    for dest, target in FLAG_TARGETS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[target] = value
    return parse_config(text, overrides)


# ------------------------------------------------------------ builders

def build_domain(d: dict, params) -> domains.Domain:
    kind = d["kind"]
    if kind == "cylinder":
        return domains.cylinder(d["lo"], d["hi"], d["t0"], d["t1"])
    if kind == "ball":
        if d.get("complement"):
            return domains.ball_exterior(d["center"], d["center_t"], d["R"], d["lo"], d["hi"], d["t0"], d["t1"])
        return domains.spacetime_ball(d["center"], d["center_t"], d["R"])
    if kind == "petrovsky":
        return domains.petrovsky_domain(d["factor"], d["c"], params)
    if kind == "heatball":
        apex = d.get("apex", (0.0,) * params.n)
        return domains.heat_ball(d["level"], apex, d["apex_t"], params)
    return domains.custom_domain(d["expr"], d["lo"], d["hi"], d["t0"], d["t1"])


def build_datum(text: str, params):
    """Datum callable and, for ``exact:`` data, the solution used as oracle."""
    kind, _, arg = text.partition(":")
    if kind == "constant":
        v = float(arg)
        return (lambda x, t: np.full(np.shape(t), v)), None
    if kind == "exact":
        cat = solutions.catalog(params)
        for sol in cat.entries:
            if sol.label == arg:
                return sol.value, sol
        raise ValueError(f"catalog entry {arg!r} unavailable at p={params.p}, n={params.n}: "
                         f"{cat.skipped.get(arg, 'not constructible')}")
    return compile_expression(arg, params.n), None


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# ------------------------------------------------------------ commands

def _verify_solutions(cfg, P, out) -> int:
    c = cfg.constants
    cat = solutions.catalog(P)
    rows, ok = [], True
    out.write(f"{'label':<22}{'samples':>8}{'max_residual':>14}{'fd_residual':>14}{'jet_ratio':>11}\n")
    for sol in cat.entries:
        r = solutions.verify_entry(sol, count=c["samples"], seed=cfg.seed, fd_h=c["fd_h"])
        ok &= r.max_residual < 1e-8
        rows.append([r.label, _fmt(cfg.p), cfg.n, _fmt(r.max_residual), _fmt(r.jet_ratio)])
        out.write(f"{r.label:<22}{r.samples:>8}{r.max_residual:>14.3e}{r.fd_residual:>14.3e}{r.jet_ratio:>11.4f}\n")
    for label, why in cat.skipped.items():
        out.write(f"{label:<22} skipped ({why})\n")
    _write_csv(cfg.out, ["label", "p", "n", "max_residual", "jet_ratio"], rows)
    return 0 if ok else 1


def _verify_barriers(cfg, P, out) -> int:
    c = cfg.constants
    con = c["construction"]
    if con == "petrovsky":
        b = barriers.petrovsky_barrier(c["c"], P, c_time=c["c_time"])
    elif con == "irregularity":
        b = barriers.irregularity_subsolution(c["eps1"], c["k"], c["m"], P, eps=c.get("eps"))
    else:
        center = np.asarray(c.get("center", (0.0,) * cfg.n))
        if "contact" in c:
            contact = Point.from_array(c["contact"])
        else:
            contact = Point(center + c["R0"] * np.eye(cfg.n)[0], c["center_t"])
        b = barriers.exterior_sphere_barrier(center, c["center_t"], c["R0"], contact, P, a=c.get("a"),
                                             allow_south_pole=c["allow_south_pole"])
    r = barriers.verify_barrier(b, n_samples=c["samples"], tol=c["tol"], seed=cfg.seed)
    header = ["construction", "p", "n", "positivity_ok", "boundary_liminf_ok", "vanishing_at_target_ok",
              "supersolution_ok", "worst_violation", "sample_count"]
    row = [con, _fmt(cfg.p), cfg.n, r.positivity_ok, r.boundary_liminf_ok, r.vanishing_at_target_ok,
           r.supersolution_ok, _fmt(r.worst_violation), r.sample_count]
    _write_csv(cfg.out, header, [[_fmt(v) for v in row]])
    for key, val in zip(header, row):
        out.write(f"{key}: {_fmt(val)}\n")
    if r.witness:
        out.write(f"witness: {r.witness}\n")
    return 0 if r.all_ok else 1


def _solve(cfg, P, out) -> int:
    dom = build_domain(cfg.domain, P)
    datum, exact = build_datum(cfg.constants["datum"], P)
    spec = solver.grid_for(dom, cfg.grid["h"], P, dt=cfg.grid.get("dt"))
    g = solver.solve(dom, datum, spec, P)
    active = np.nonzero(np.isfinite(g.values).reshape(len(g.times), -1).any(axis=1))[0]
    picks = sorted(set(active[np.linspace(0, len(active) - 1, cfg.constants["slices"]).round().astype(int)]))
    mesh = g.mesh()
    rows = []
    for k in picks:
        sl = g.values[k]
        for idx in zip(*np.nonzero(np.isfinite(sl))):
            rows.append([_fmt(g.times[k])] + [_fmt(v) for v in mesh[idx]] + [_fmt(sl[idx])])
    _write_csv(cfg.out, ["t"] + [f"x{i + 1}" for i in range(cfg.n)] + ["u"], rows)
    out.write(f"grid: h={spec.h} dt={spec.dt:.6g} slices={len(g.times)} interior_nodes={int(g.interior().sum())}\n")
    if exact is not None:
        e = solver.error_vs(g, exact)
        out.write(f"error vs {exact.label}: linf={e.linf:.6e} l2={e.l2:.6e} h={e.h} dt={e.dt:.6g} "
                  f"n_interior={e.n_interior}\n")
    return 0


def _probe(cfg, P, out) -> int:
    c = cfg.constants
    dom = build_domain(cfg.domain, P)
    target = Point.from_array(c["target"])
    r = lab.probe_regularity(dom, target, P, c["h_levels"], gap_tol=c["gap_tol"], irr_floor=c["irr_floor"],
                             approach=c.get("approach"))
    rows = [[_fmt(h), _fmt(v), _fmt(g)] for (h, v), g in zip(r.levels, r.gap_sequence)]
    _write_csv(cfg.out, ["h", "approach_value", "gap"], rows)
    for (h, v), g in zip(r.levels, r.gap_sequence):
        out.write(f"h={h:<8g} value={v:.6f} gap={g:.6f}\n")
    out.write(f"verdict: {r.verdict}\n")
    return 0


def _cylinder_top(cfg, P, out) -> int:
    d = cfg.domain
    datum, _ = build_datum(cfg.constants["datum"], P)
    r = lab.cylinder_top_experiment(d["lo"], d["hi"], d["t0"], d["t1"], P, cfg.grid["h"], cfg.constants["eps"],
                                    datum=datum)
    header = ["eps", "interiors_identical", "min_residual", "min_expected", "bracket_width", "samples"]
    row = [r.eps, r.interiors_identical, r.min_residual, r.min_expected, r.bracket_width, r.samples]
    _write_csv(cfg.out, header, [[_fmt(v) for v in row]])
    for key, val in zip(header, row):
        out.write(f"{key}: {_fmt(val)}\n")
    out.write(f"bracket_ok: {r.bracket_ok}\n")
    return 0 if r.interiors_identical and r.bracket_ok else 1


def _sweep(cfg, P, out) -> int:
    dom = build_domain(cfg.domain, P)
    datum, _ = build_datum(cfg.constants["datum"], P)
    rows = lab.sweep_p(dom, datum, cfg.grid["h"], cfg.constants["p_list"], cfg.n)
    _write_csv(cfg.out, ["p", "h", "linf_gap_to_infty"], [[_fmt(r.p), _fmt(r.h), _fmt(r.linf_gap_to_infty)]
                                                         for r in rows])
    for r in rows:
        out.write(f"p={r.p:<10g} gap={r.linf_gap_to_infty:.6e}\n")
    return 0


def _limit(cfg, P, out) -> int:
    pts = [(pt[:-1], pt[-1]) for pt in cfg.constants["points"]]
    rows = lab.fundamental_limit_check(pts, cfg.constants["p_list"], n=cfg.n)
    data = [[" ".join(_fmt(v) for v in r.x), _fmt(r.t), _fmt(r.p), _fmt(r.Hp), _fmt(r.W), _fmt(r.gap)]
            for r in rows]
    _write_csv(cfg.out, ["x", "t", "p", "Hp", "W", "gap"], data)
    for r in rows:
        out.write(f"x={r.x} t={r.t:g} p={r.p:<10g} gap={r.gap:.6e}\n")
    return 0


DISPATCH: dict[str, Callable] = {
    "verify-solutions": _verify_solutions, "verify-barriers": _verify_barriers, "solve": _solve,
    "probe-regularity": _probe, "cylinder-top": _cylinder_top, "sweep-p": _sweep, "fundamental-limit": _limit,
}


def run(cfg: ExperimentConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    P = make_params(cfg.p, cfg.n)
    try:
        return DISPATCH[cfg.command](cfg, P, out)
    except solver.CFLError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except (solver.InstabilityError, ValueError, RuntimeError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 1


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        for line in exc.errors:
            sys.stderr.write(f"config error: {line}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
