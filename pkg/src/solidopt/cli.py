"""Command-line runner: fixture in, versioned report directory out.

    python -m solidopt --fixture L1 --command regularity --out run/

writes ``run/report.json`` plus ``certificates.csv``, ``solves.csv`` and
``front.csv``.  Every number in the report comes from a library call; this
module only wires fixtures to operations and serializes the results.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .fixtures import Fixture, FixtureError, load_fixture, validate_fixture
from .penalty import (JOINT, PenalizedProblem, check_exact_penalty, minimize_local,
                      penalize_joint, penalize_parametric)
from .regularity import (REFUTED, coderivative_rate, estimate_openness_rate,
                         verify_epigraphical_openness, verify_graphical_regularity,
                         verify_metric_regularity)
from .scalarize import GerstewitzFunctional
from .setmaps import AffineConeMap
from .vecopt import (VectorProblem, necessary_condition_joint, necessary_condition_parametric,
                     scalar_necessary_condition, weak_front_oracle)

COMMANDS = ("scalarize", "regularity", "penalty", "certify", "oracle")
REPORT_FORMAT = "solidopt-report"
REPORT_VERSION = 1

EXIT_OK, EXIT_REFUTED, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    fixture: str
    commands: list = field(default_factory=lambda: list(COMMANDS))
    grid: int | None = None
    tol: float = 1e-7
    seed: int = 0
    out: str = "report"
    strict: bool = False


@dataclass
class Report:
    header: dict
    records: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    solves: list = field(default_factory=list)
    front: list = field(default_factory=list)
    refuted: bool = False

    def add(self, command, operation, **data):
        rec = {"command": command, "operation": operation, **data}
        self.records.append(rec)
        return rec

    def to_json(self) -> dict:
        return _clean({**self.header, "records": self.records})


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v + 0.0
    return obj


def _fmt(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_fmt(x) for x in np.ravel(v))
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v) + 0.0)
    return "" if v is None else str(v)


# -- commands ---------------------------------------------------------------------

def _skip(rep, command, reason):
    rep.add(command, "skipped", reason=reason)


def _cmd_scalarize(fx: Fixture, cfg, rep):
    if fx.K is None or fx.e is None:
        return _skip(rep, "scalarize", "fixture has no [ordering] block with a direction")
    s = GerstewitzFunctional(fx.K, fx.e)
    rep.add("scalarize", "lipschitz_constant", direction=fx.e, value=s.lipschitz_constant())
    for z in fx.block("scalarize").get("points", []):
        z = np.asarray(z, float)
        verts = s.subdifferential(z).vertices()
        rep.add("scalarize", "evaluate", z=z, value=float(s(z)), active_rows=s.active_rows(z),
                subdifferential_vertices=verts)


def _at(fx):
    if "reference" not in fx.raw:
        return None
    return fx.reference()


def _cmd_regularity(fx: Fixture, cfg, rep):
    if fx.H is None or fx.region is None:
        return _skip(rep, "regularity", "fixture needs [map] and [region]")
    H, region, consts = fx.H, fx.region, fx.block("constants")
    at = _at(fx)
    certs = []
    L = c = None
    if at is not None:
        cert = estimate_openness_rate(H, at, region=None if isinstance(H, AffineConeMap) else region,
                                      tol=cfg.tol)
        L = cert.modulus
        certs.append(("estimate_openness_rate", cert))
        if isinstance(H, AffineConeMap):
            cert = coderivative_rate(H, at)
            c = cert.modulus
            certs.append(("coderivative_rate", cert))
    r_metric = consts.get("metric_modulus", 1.0 / L if L else None)
    if r_metric is not None:
        certs.append(("verify_metric_regularity",
                      verify_metric_regularity(H, region, r_metric, tol=cfg.tol)))
    r_graph = consts.get("graphical_modulus", 1.0 + 1.0 / L if L else None)
    if r_graph is not None:
        certs.append(("verify_graphical_regularity",
                      verify_graphical_regularity(H, region, r_graph, tol=cfg.tol)))
    if at is not None and "a" in consts and c is not None and 0 < consts["a"] < c:
        certs.append(("verify_epigraphical_openness",
                      verify_epigraphical_openness(H, at, consts["a"], min(c, 1e6), consts.get("r", 1.0))))
    for op, cert in certs:
        rec = cert.to_record()
        rep.add("regularity", op, **rec)
        rep.certificates.append({"command": "regularity", "operation": op, "kind": cert.kind,
                                 "status": cert.status, "value": float(cert.modulus),
                                 "point": "", "direction": ""})
        if cert.status == REFUTED:
            rep.refuted = True


def _scalar_objective(fx):
    return lambda x, p: float(fx.f(x, p)[0])


def _trace(rep, op, res, **extra):
    rep.solves.append({"operation": op, "x": res.x, "fun": res.fun, "nfev": res.nfev,
                       "converged": res.converged, **extra})


def _cmd_penalty(fx: Fixture, cfg, rep):
    blk, consts = fx.block("penalty"), fx.block("constants")
    if fx.f is None or fx.lipschitz is None or fx.H is None or fx.region is None or not blk:
        return _skip(rep, "penalty", "fixture needs a scalar objective with lipschitz, [map], [region], [penalty]")
    f = _scalar_objective(fx)
    if "p" in blk and "metric_modulus" in consts:
        prob = PenalizedProblem(f, fx.lipschitz, fx.H, consts["metric_modulus"], fx.region)
        p = np.asarray(blk["p"], float)
        if "start" in blk:
            res = minimize_local(penalize_parametric(prob, p), blk["start"], prob.x_region)
            rep.add("penalty", "minimize_local", mode="parametric", p=p, weight=prob.penalty_weight,
                    **res.to_record())
            _trace(rep, "minimize_local", res, mode="parametric")
        if "solution" in blk:
            pr = check_exact_penalty(prob, blk["solution"], p=p, tol=cfg.tol)
            rep.add("penalty", "check_exact_penalty", mode="parametric", p=p, **pr.to_record())
            rep.refuted |= not pr.ok
    if "joint_solution" in blk and "graphical_modulus" in consts:
        prob = PenalizedProblem(f, fx.lipschitz, fx.H, consts["graphical_modulus"], fx.region, mode=JOINT)
        if "joint_start" in blk:
            res = minimize_local(penalize_joint(prob), blk["joint_start"], fx.region)
            rep.add("penalty", "minimize_local", mode="joint", weight=prob.penalty_weight, **res.to_record())
            _trace(rep, "minimize_local", res, mode="joint")
        pr = check_exact_penalty(prob, blk["joint_solution"], tol=cfg.tol)
        rep.add("penalty", "check_exact_penalty", mode="joint", **pr.to_record())
        rep.refuted |= not pr.ok


def _vector_problem(fx):
    return VectorProblem(fx.g, fx.g.jacobian, fx.H, fx.K, fx.e, fx.region, fx.lipschitz or 1.0)


def _log_certificate(rep, op, cert, direction=None):
    rec = cert.to_record()
    rep.add("certify", op, direction=direction, **rec)
    rep.certificates.append({"command": "certify", "operation": op, "kind": "multiplier_rule",
                             "status": cert.status, "value": cert.residual,
                             "point": [v for part in cert.point for v in part],
                             "direction": direction if direction is not None else ""})


def _cmd_certify(fx: Fixture, cfg, rep):
    blk = fx.block("certify")
    if fx.H is None or not blk:
        return _skip(rep, "certify", "fixture needs [map] and [certify]")
    ran = False
    if fx.g is not None and fx.K is not None and fx.e is not None and fx.region is not None:
        base = _vector_problem(fx)
        for e in blk.get("directions", [fx.e.tolist()]):
            prob = base.with_direction(e)
            for x in blk.get("points", []):
                cert = necessary_condition_parametric(prob, x, blk["p"])
                _log_certificate(rep, "necessary_condition_parametric", cert, list(map(float, e)))
                ran = True
            for v in blk.get("joint", []):
                v = np.asarray(v, float)
                cert = necessary_condition_joint(prob, v[:fx.nx], v[fx.nx:])
                _log_certificate(rep, "necessary_condition_joint", cert, list(map(float, e)))
                ran = True
    elif fx.f is not None:
        def gradient(x, p):
            Jx, Jp = fx.f.jacobian(x, p)
            return np.concatenate([Jx[0], Jp[0]])
        for v in blk.get("joint", []):
            v = np.asarray(v, float)
            cert = scalar_necessary_condition(gradient, fx.H, v[:fx.nx], v[fx.nx:])
            _log_certificate(rep, "scalar_necessary_condition", cert)
            ran = True
    if not ran:
        _skip(rep, "certify", "no certificate points for the objective type")


def _cmd_oracle(fx: Fixture, cfg, rep):
    blk = fx.block("oracle")
    if fx.g is None or fx.K is None or fx.e is None or fx.region is None or not blk:
        return _skip(rep, "oracle", "fixture needs a vector objective, [ordering], [region], [oracle]")
    prob = _vector_problem(fx)
    p = np.asarray(blk["p"], float)
    pts, imgs = weak_front_oracle(prob, p)
    n_feasible = 0
    for x, gx in zip(pts, imgs):
        cert = necessary_condition_parametric(prob, x, p)
        n_feasible += cert.feasible
        rep.front.append({"p": p, "x": x, "g": gx, "certificate": cert.status, "residual": cert.residual})
    rep.add("oracle", "weak_front_oracle", p=p, n_points=len(pts), grid=prob.x_region.to_record(),
            n_certified=n_feasible,
            x_min=pts[:, 0].min() if len(pts) else None, x_max=pts[:, 0].max() if len(pts) else None)


_DISPATCH = {"scalarize": _cmd_scalarize, "regularity": _cmd_regularity, "penalty": _cmd_penalty,
             "certify": _cmd_certify, "oracle": _cmd_oracle}


# -- driver -------------------------------------------------------------------------

def run(cfg: RunConfig) -> Report:
    """Load, validate and execute; raises :class:`FixtureError` on bad input."""
    fx = load_fixture(cfg.fixture, grid=cfg.grid)
    diags = validate_fixture(fx.path, rng=np.random.default_rng(cfg.seed))
    if diags:
        raise FixtureError("; ".join(d.message for d in diags), diags[0].line, fx.path)
    header = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "tool_version": __version__,
        "fixture": fx.name,
        "fixture_sha256": fx.sha256,
        "commands": list(cfg.commands),
        "seed": cfg.seed,
        "grid": cfg.grid,
        "tolerances": {"verify": cfg.tol, "search": 1e-6, "certificate": 1e-9, "lp": 1e-10},
        "notes": fx.notes,
    }
    rep = Report(header)
    for cmd in cfg.commands:
        _DISPATCH[cmd](fx, cfg, rep)
    return rep


_TABLES = {
    "certificates": ["command", "operation", "kind", "status", "value", "point", "direction"],
    "solves": ["operation", "mode", "x", "fun", "nfev", "converged"],
    "front": ["p", "x", "g", "certificate", "residual"],
}


def write_report(rep: Report, out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(rep.to_json(), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    for name, cols in _TABLES.items():
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in getattr(rep, name):
                w.writerow([_fmt(row.get(c)) for c in cols])
    return out


def _commands(values):
    out = []
    for v in values or []:
        for c in v.split(","):
            c = c.strip()
            if not c:
                continue
            if c == "all":
                out.extend(COMMANDS)
            elif c in COMMANDS:
                out.append(c)
            else:
                raise argparse.ArgumentTypeError(f"unknown command {c!r}")
    return list(dict.fromkeys(out))


def build_parser():
    ap = argparse.ArgumentParser(prog="solidopt", description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", required=True, help="fixture file or bundled fixture name")
    ap.add_argument("--command", action="append", default=None,
                    help="scalarize, regularity, penalty, certify, oracle or all; "
                         "repeat or comma-separate (default: all, empty string: nothing)")
    ap.add_argument("--grid", type=int, default=None, help="grid points per axis of the region")
    ap.add_argument("--tol", type=float, default=1e-7, help="verification tolerance")
    ap.add_argument("--seed", type=int, default=0, help="seed for all sampling")
    ap.add_argument("--out", default="report", help="output directory")
    ap.add_argument("--strict", action="store_true", help="exit 1 when a certificate is refuted")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        commands = _commands(args.command) if args.command is not None else list(COMMANDS)
    except argparse.ArgumentTypeError as exc:
        ap.print_usage(sys.stderr)
        print(f"solidopt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.grid is not None and args.grid < 2:
        print("solidopt: error: --grid must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    cfg = RunConfig(args.fixture, commands, args.grid, args.tol, args.seed, args.out, args.strict)
    try:
        rep = run(cfg)
    except (FixtureError, ValueError) as exc:
        print(f"solidopt: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    write_report(rep, cfg.out)
    n_ref = sum(1 for c in rep.certificates if c["status"] == REFUTED)
    print(f"{len(rep.records)} records written to {cfg.out}; refuted: {n_ref}")
    if cfg.strict and rep.refuted:
        return EXIT_REFUTED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
