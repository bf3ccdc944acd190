"""Fixture files: TOML documents describing a problem instance.

Layout (all blocks optional except ``format``/``version``/``spaces``)::

    format = "solidopt-fixture"
    version = 1
    name = "L1"

    [spaces]            # dimensions of X, P, Y (and Z for vector objectives)
    x = 1
    p = 1
    y = 1

    [map]               # kind = "affine" | "epigraphical" | "sampled"
    kind = "affine"
    Tx = [[-1.0]]       # matrices are row-major arrays of rows
    Tp = [[-1.0]]
    b = [1.0]
    [map.cone]          # the cone C in Y: halfspaces and/or generators
    halfspaces = [[1.0]]

    [objective]         # scalar f = "..." or vector g = ["...", "..."]
    f = "x^2 + p^2"
    lipschitz = 2.0

    [ordering]          # ordering cone K in Z and direction e
    halfspaces = [[1, 0], [0, 1]]
    direction = [1, 1]

    [region]            # box over X x P
    lower = [-1, -1]
    upper = [1, 1]
    resolution = [21, 21]

Graph points of ``H`` are ordered ``(x, p, y)``; graph points of the solution
map are ordered ``(p, x)``.  Expressions use ``+ - * / ^``, parentheses,
numbers and the coordinates ``x1..xn``, ``p1..pm`` (plain ``x`` / ``p`` when the
space is one-dimensional); gradients are derived symbolically.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cones import PolyhedralCone
from .penalty import validate_lipschitz
from .setmaps import AffineConeMap, Box, EpigraphicalMap, SampledGraphMap

__all__ = ["Diagnostic", "Fixture", "FixtureError", "load_fixture", "validate_fixture", "fixture_path"]

FORMAT = "solidopt-fixture"
VERSION = 1


class FixtureError(ValueError):
    """Unreadable or inconsistent fixture; ``line`` points into the file when known."""

    def __init__(self, message, line=None, path=None):
        self.message = message
        self.line = line
        self.path = path
        if path and line:
            where = f"{path}:{line}: "
        elif line:
            where = f"line {line}: "
        else:
            where = f"{path}: " if path else ""
        super().__init__(where + message)


@dataclass
class Diagnostic:
    line: int | None
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}" if self.line else self.message


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture (``"L1"``, ``"V1"``, ...) or of a file."""
    p = Path(name)
    if p.suffix == ".toml" and p.exists():
        return p
    ref = resources.files("solidopt") / "data" / f"{name}.toml"
    if not ref.is_file():
        raise FixtureError(f"no fixture named {name!r}")
    return Path(str(ref))


# -- expressions ----------------------------------------------------------------

_ALLOWED = (sp.Add, sp.Mul, sp.Pow, sp.Symbol, sp.Number, sp.core.numbers.NegativeOne,
            sp.core.numbers.Half)


def _symbols(nx, np_):
    xs = [sp.Symbol(f"x{i + 1}", real=True) for i in range(nx)]
    ps = [sp.Symbol(f"p{i + 1}", real=True) for i in range(np_)]
    names = {s.name: s for s in xs + ps}
    if nx == 1:
        names["x"] = xs[0]
    if np_ == 1:
        names["p"] = ps[0]
    return xs, ps, names


def _parse(text, names):
    if not re.fullmatch(r"[\sA-Za-z0-9_.+\-*/^()]*", text):
        raise ValueError(f"illegal character in expression {text!r}")
    glb = {"Integer": sp.Integer, "Float": sp.Float, "Rational": sp.Rational, "Symbol": sp.Symbol}
    try:
        expr = parse_expr(text, local_dict=dict(names), global_dict=glb,
                          transformations=standard_transformations + (convert_xor,))
    except Exception as exc:  # sympy surfaces NameError, SyntaxError, TokenError, ...
        raise ValueError(f"cannot parse expression {text!r}: {type(exc).__name__}") from None
    for node in sp.preorder_traversal(expr):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"unsupported construct {node!r} in {text!r}")
        if isinstance(node, sp.Symbol) and node not in names.values():
            raise ValueError(f"unknown variable {node} in {text!r}")
    return expr


class CompiledFunction:
    """Numeric function of ``(x, p)`` compiled from expressions, with its Jacobian."""

    def __init__(self, texts, nx, np_):
        self.texts = list(texts)
        xs, ps, names = _symbols(nx, np_)
        self.nx, self.np_ = nx, np_
        exprs = [_parse(t, names) for t in self.texts]
        args = xs + ps
        self.exprs = exprs
        self._f = sp.lambdify(args, exprs, modules="numpy")
        jx = [[sp.diff(e, v) for v in xs] for e in exprs]
        jp = [[sp.diff(e, v) for v in ps] for e in exprs]
        self._jx = sp.lambdify(args, jx, modules="numpy")
        self._jp = sp.lambdify(args, jp, modules="numpy") if ps else None

    def __call__(self, x, p):
        args = list(np.atleast_1d(x)) + list(np.atleast_1d(p))
        return np.array(self._f(*args), dtype=float)

    def jacobian(self, x, p):
        args = list(np.atleast_1d(x)) + list(np.atleast_1d(p))
        Jx = np.array(self._jx(*args), dtype=float).reshape(len(self.exprs), self.nx)
        Jp = (np.array(self._jp(*args), dtype=float).reshape(len(self.exprs), self.np_)
              if self._jp else np.zeros((len(self.exprs), 0)))
        return Jx, Jp


# -- loading ----------------------------------------------------------------------

@dataclass
class Fixture:
    name: str
    path: Path
    sha256: str
    raw: dict
    nx: int
    np_: int
    ny: int
    H: object = None
    region: Box | None = None
    f: CompiledFunction | None = None
    g: CompiledFunction | None = None
    lipschitz: float | None = None
    K: PolyhedralCone | None = None
    e: np.ndarray | None = None
    notes: list = field(default_factory=list)

    def block(self, name) -> dict:
        return self.raw.get(name, {})

    def reference(self):
        ref = self.block("reference")
        x = np.asarray(ref.get("x", np.zeros(self.nx)), float)
        p = np.asarray(ref.get("p", np.zeros(self.np_)), float)
        y = np.asarray(ref.get("y", np.zeros(self.ny)), float)
        return x, p, y


def _line_of(text: str, key: str):
    """Line number of a table header or key; ``None`` when absent."""
    pat = re.compile(rf"^\s*(\[{re.escape(key)}\]|{re.escape(key)}\s*=)", re.M)
    m = pat.search(text)
    return text[:m.start()].count("\n") + 1 if m else None


def _cone(block, dim, where, text):
    if "halfspaces" not in block and "generators" not in block:
        raise FixtureError(f"cone block [{where}] needs halfspaces or generators", _line_of(text, where))
    try:
        return PolyhedralCone(dim, halfspaces=block.get("halfspaces"), generators=block.get("generators"))
    except ValueError as exc:
        raise FixtureError(f"[{where}]: {exc}", _line_of(text, where)) from exc


def load_fixture(source, grid: int | None = None) -> Fixture:
    """Parse and build a fixture; ``grid`` overrides the region resolution."""
    path = fixture_path(str(source))
    try:
        text = path.read_text()
    except OSError as exc:
        raise FixtureError(f"cannot read fixture: {exc}", path=path) from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise FixtureError(str(exc), int(m.group(1)) if m else None, path) from exc
    if raw.get("format") != FORMAT or raw.get("version") != VERSION:
        raise FixtureError(f"expected format={FORMAT!r} version={VERSION}", _line_of(text, "format"), path)
    sp_ = raw.get("spaces")
    if not sp_:
        raise FixtureError("missing [spaces] block", path=path)
    nx, np_, ny = int(sp_.get("x", 0)), int(sp_.get("p", 0)), int(sp_.get("y", 0))
    if nx < 1 or np_ < 0 or ny < 1:
        raise FixtureError("spaces need x >= 1, p >= 0, y >= 1", _line_of(text, "spaces"), path)
    fx = Fixture(raw.get("name", path.stem), path, hashlib.sha256(text.encode()).hexdigest(), raw,
                 nx, np_, ny, notes=list(raw.get("notes", [])))
    try:
        _build(fx, raw, text, grid)
    except FixtureError as exc:
        raise FixtureError(exc.message, exc.line, path) from None
    except (ValueError, TypeError, KeyError) as exc:
        raise FixtureError(str(exc), path=path) from exc
    return fx


def _compile(texts, fx, key, text):
    try:
        return CompiledFunction(texts, fx.nx, fx.np_)
    except ValueError as exc:
        raise FixtureError(str(exc), _line_of(text, key)) from None


def _build(fx, raw, text, grid):
    if "region" in raw:
        r = raw["region"]
        res = grid if grid is not None else r.get("resolution", 11)
        fx.region = Box(tuple(r["lower"]), tuple(r["upper"]), res)
        if fx.region.dim != fx.nx + fx.np_:
            raise FixtureError("region must have dimension x + p", _line_of(text, "region"))
    if "map" in raw:
        m = raw["map"]
        kind = m.get("kind")
        if kind == "affine":
            C = _cone(m.get("cone", {}), fx.ny, "map.cone", text)
            Tx = np.asarray(m["Tx"], float)
            Tp = np.asarray(m.get("Tp", np.zeros((fx.ny, fx.np_))), float)
            b = np.asarray(m.get("b", np.zeros(fx.ny)), float)
            if Tx.shape != (fx.ny, fx.nx) or Tp.reshape(fx.ny, -1).shape[1] != fx.np_ or b.shape != (fx.ny,):
                raise FixtureError("map matrices do not match [spaces]", _line_of(text, "map"))
            fx.H = AffineConeMap(Tx, Tp, b, C)
        elif kind == "epigraphical":
            C = _cone(m.get("cone", {}), fx.ny, "map.cone", text)
            F = _compile(m["F"], fx, "F", text)
            if len(F.exprs) != fx.ny:
                raise FixtureError("F must have y components", _line_of(text, "F"))
            if fx.region is None:
                raise FixtureError("epigraphical maps need a [region]", _line_of(text, "map"))
            fx.H = EpigraphicalMap(F, C, fx.region, fx.nx, jacobian=F.jacobian)
        elif kind == "sampled":
            T = np.asarray(m["triples"], float)
            if T.ndim != 2 or T.shape[1] != fx.nx + fx.np_ + fx.ny:
                raise FixtureError("triples must have x + p + y columns", _line_of(text, "triples"))
            fx.H = SampledGraphMap(T[:, :fx.nx], T[:, fx.nx:fx.nx + fx.np_], T[:, fx.nx + fx.np_:])
        else:
            raise FixtureError(f"unknown map kind {kind!r}", _line_of(text, "kind"))
    if "objective" in raw:
        o = raw["objective"]
        if "f" in o:
            fx.f = _compile([o["f"]], fx, "f", text)
        if "g" in o:
            fx.g = _compile(o["g"], fx, "g", text)
        fx.lipschitz = float(o["lipschitz"]) if "lipschitz" in o else None
    if "ordering" in raw:
        o = raw["ordering"]
        nz = int(raw["spaces"].get("z", len(o.get("direction", []))))
        fx.K = _cone(o, nz, "ordering", text)
        fx.e = np.asarray(o["direction"], float) if "direction" in o else None
        if fx.g is not None and len(fx.g.exprs) != nz:
            raise FixtureError("objective g must have z components", _line_of(text, "g"))


def validate_fixture(source, rng=None) -> list[Diagnostic]:
    """Semantic checks: cone invariants, declared Lipschitz constants, dimensions.

    Parse and dimension errors come back as a single diagnostic.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    try:
        fx = load_fixture(source)
    except FixtureError as exc:
        return [Diagnostic(exc.line, exc.message)]
    text = fx.path.read_text()
    out = []
    cones = []
    if fx.H is not None and hasattr(fx.H, "cone"):
        cones.append(("map.cone", fx.H.cone))
    if fx.K is not None:
        cones.append(("ordering", fx.K))
    for where, C in cones:
        for msg in C.consistency_violations(rng):
            out.append(Diagnostic(_line_of(text, where), f"[{where}] {msg}"))
    if fx.K is not None:
        if not fx.K.is_solid:
            out.append(Diagnostic(_line_of(text, "ordering"), "ordering cone has empty interior"))
        elif not fx.K.is_pointed:
            out.append(Diagnostic(_line_of(text, "ordering"), "ordering cone is not pointed"))
        elif fx.e is not None and not fx.K.contains_interior(fx.e):
            out.append(Diagnostic(_line_of(text, "direction"), "direction is not interior to the ordering cone"))
    if fx.lipschitz is not None and fx.region is not None:
        joint = bool(fx.block("objective").get("joint_lipschitz", False))
        for fn in (fx.f, fx.g):
            if fn is None:
                continue
            bad = validate_lipschitz(fn, fx.lipschitz, fx.region, fx.nx, joint=joint, rng=rng)
            if bad is not None:
                z1, z2, q = bad
                out.append(Diagnostic(_line_of(text, "lipschitz"),
                                      f"declared Lipschitz constant {fx.lipschitz:g} violated: "
                                      f"quotient {q:.6g} between {np.round(z1, 6).tolist()} and "
                                      f"{np.round(z2, 6).tolist()}"))
    return out
