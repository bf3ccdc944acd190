"""Acceptance criteria, one test each, printing a PASS/FAIL line per criterion."""
import filecmp
import time
from fractions import Fraction

import numpy as np
import pytest

from solidopt.cli import main
from solidopt.cones import PolyhedralCone, nonnegative_orthant
from solidopt.fixtures import load_fixture
from solidopt.penalty import (JOINT, PenalizedProblem, check_exact_penalty, minimize_local,
                              penalize_parametric)
from solidopt.regularity import (VERIFIED_ON_GRID, epigraphical_radius, estimate_openness_rate,
                                 verify_epigraphical_openness, verify_graphical_regularity,
                                 verify_metric_regularity)
from solidopt.scalarize import GerstewitzFunctional
from solidopt.setmaps import Box, EpigraphicalMap
from solidopt.vecopt import (VectorProblem, necessary_condition_parametric,
                             scalar_necessary_condition, weak_front_oracle)

from oracles import AffineGridOracle

SQUARE = Box((-1.0, -1.0), (1.0, 1.0), 21)
L1_AT = ([0.0], [1.0], [0.0])


@pytest.fixture
def verdict(capsys):
    start = time.perf_counter()

    def emit(number, ok, detail):
        with capsys.disabled():
            tag = "PASS" if ok else "FAIL"
            print(f"\n[{tag}] criterion {number}: {detail} ({time.perf_counter() - start:.1f}s)")
        assert ok, detail
    return emit


# -- 1: Gerstewitz suite --------------------------------------------------------------

CONES = {
    "orthant": (nonnegative_orthant(2), [[1.0, 1.0], [1.0, 2.0], [3.0, 1.0]]),
    "ice": (PolyhedralCone.from_halfspaces([[-1.0, 1.0], [1.0, 1.0]]), [[0.0, 1.0], [0.5, 1.0], [-0.2, 2.0]]),
    "pyramid": (PolyhedralCone.from_generators([[1, 1, 1], [1, -1, 1], [-1, 1, 1], [-1, -1, 1]]),
                [[0.0, 0.0, 1.0], [0.3, -0.2, 1.0], [0.1, 0.1, 2.0]]),
}


def _gerstewitz_defects(cone, e, rng, n=10_000):
    s = GerstewitzFunctional(cone, e)
    d = cone.dim
    U = rng.normal(scale=3, size=(n, d))
    V = rng.normal(scale=3, size=(n, d))
    t = rng.uniform(0, 10, n)
    tr = rng.uniform(-10, 10, n)
    su, sv = s(U), s(V)
    worst = {
        "subadditive": np.max(s(U + V) - su - sv),
        "homogeneous": np.max(np.abs(s(t[:, None] * U) - t * su)),
        "translation": np.max(np.abs(s(U + tr[:, None] * s.direction) - su - tr)),
        "lipschitz": np.max(np.abs(su - sv) - s.lipschitz * np.linalg.norm(U - V, axis=1)),
    }
    # v - u in int K: add a strictly positive combination of generators
    G = cone.generators
    K = rng.uniform(0.01, 1, size=(n, len(G))) @ G
    assert np.all(cone.contains_interior(K))
    worst["monotone"] = np.max(su - s(U + K))  # must be < 0
    # subdifferential: random points plus points with ties
    pts = list(rng.normal(size=(150, d))) + [np.zeros(d), np.asarray(e, float)]
    if cone.dim == 2:
        pts += [np.array([1.0, 1.0]), np.array([-1.0, 1.0])]
    sub = bracket = 0.0
    n_vert = 0
    Kd = cone.dual()
    norm_e = np.linalg.norm(e)
    for u in pts:
        su_ = s(u)
        for v in s.subdifferential(u).vertices():
            n_vert += 1
            sub = max(sub, abs(v @ s.direction - 1), abs(v @ u - su_),
                      -np.min(Kd.halfspaces @ v) if len(Kd.halfspaces) else 0.0)
            nv = np.linalg.norm(v)
            bracket = max(bracket, 1 / norm_e - nv, nv - s.lipschitz)
    return worst, sub, bracket, n_vert


def test_criterion_1_gerstewitz_suite(verdict):
    rng = np.random.default_rng(20241016)
    ok = True
    notes = []
    for name, (cone, dirs) in CONES.items():
        for e in dirs:
            worst, sub, bracket, n_vert = _gerstewitz_defects(cone, e, rng)
            mono = worst.pop("monotone")
            this = (max(worst.values()) <= 1e-8 and mono < 0 and sub <= 1e-9 and bracket <= 1e-9
                    and n_vert > 0)
            ok &= this
            if not this:
                notes.append(f"{name} e={e}: {worst} mono={mono:.2e} sub={sub:.2e} bracket={bracket:.2e}")
    verdict(1, ok, "Gerstewitz properties on 3 cones x 3 directions x 1e4 points"
            + ("" if ok else "; " + "; ".join(notes)))


# -- 2: regularity moduli on L1 ---------------------------------------------------------

def test_criterion_2_l1_moduli(verdict):
    H = load_fixture("L1").H
    c = estimate_openness_rate(H, L1_AT).modulus
    metric = verify_metric_regularity(H, SQUARE, 1.0)
    graph = verify_graphical_regularity(H, SQUARE, 1.0)
    cell = SQUARE.cell_diameter(split=(1, 1))
    bound_m = verify_metric_regularity(H, SQUARE, 1 / c)
    bound_g = verify_graphical_regularity(H, SQUARE, 1 + 1 / c)
    ok = (abs(metric.modulus - 1.0) <= 1e-6 and metric.status == VERIFIED_ON_GRID
          and abs(graph.modulus - 1.0) <= cell
          and bound_m.verified and bound_g.verified)
    verdict(2, ok, f"openness c={c:.12g}, metric modulus {metric.modulus:.12g}, graphical "
                   f"{graph.modulus:.12g} (cell {cell:.3g}), bounds 1/c and 1+1/c: "
                   f"{bound_m.status}/{bound_g.status}")


# -- 3: epigraphical radius and openness ------------------------------------------------

def test_criterion_3_epigraphical_openness(verdict):
    eps = epigraphical_radius(Fraction(1), Fraction(1, 2), Fraction(1))
    G = EpigraphicalMap(lambda x, p: 1 - x - p, PolyhedralCone.from_halfspaces([[1.0]]), SQUARE, nx=1)
    cert = verify_epigraphical_openness(G, L1_AT, 0.5, 1.0, 1.0, n_rho=10, resolution=1e-3)
    radii = cert.grid["radii"]
    ok = (eps == Fraction(1, 12) and cert.status == VERIFIED_ON_GRID and len(radii) == 10
          and 0 < min(radii) and max(radii) <= 1 / 12 + 1e-15)
    verdict(3, ok, f"radius {eps}, openness over {len(radii)} radii in (0, 1/12]: {cert.status} "
                   f"({cert.n_checked} covering points)")


# -- 4: exact penalty ---------------------------------------------------------------------

def test_criterion_4_exact_penalty(verdict):
    fx = load_fixture("L1")

    def f(x, p):
        return float(fx.f(x, p)[0])

    L = fx.lipschitz
    par = PenalizedProblem(f, L, fx.H, 1.0, SQUARE)
    res = minimize_local(penalize_parametric(par, [1.0]), [0.9], par.x_region, tol=1e-7)
    par_check = check_exact_penalty(par, [0.0], p=[1.0])
    joint = PenalizedProblem(f, L, fx.H, 1.0, SQUARE, mode=JOINT)
    joint_check = check_exact_penalty(joint, [0.5, 0.5])
    under = check_exact_penalty(joint, [0.5, 0.5], weight=L / 4)
    ok = abs(res.x[0]) <= 1e-6 and par_check.ok and joint_check.ok and not under.ok
    verdict(4, ok, f"parametric minimizer {res.x[0]:.2e} at p=1, joint check at (1/2,1/2) "
                   f"ok={joint_check.ok}, weight L/4 violation {under.max_violation:.4g} at {under.witness}")


# -- 5: certificates versus the weak front on V1 ----------------------------------------

def test_criterion_5_certificates_vs_front(verdict):
    fx = load_fixture("V1")
    assert fx.region.steps()[0] == pytest.approx(0.01)
    statuses = {}
    ok = True
    for e in ([1.0, 1.0], [1.0, 2.0], [3.0, 1.0]):
        prob = VectorProblem(fx.g, fx.g.jacobian, fx.H, fx.K, np.array(e), fx.region, fx.lipschitz)
        front, _ = weak_front_oracle(prob, [1.0])
        certs = [necessary_condition_parametric(prob, x, [1.0]) for x in front]
        ok &= all(c.feasible and c.residual <= 1e-9 for c in certs) and len(front) == 101
        ok &= not necessary_condition_parametric(prob, [2.0], [1.0]).feasible
        grid = prob.x_region.grid()
        statuses[tuple(e)] = [necessary_condition_parametric(prob, x, [1.0]).feasible
                              for x in grid if prob.H.is_feasible(x, [1.0])]
    same = len({tuple(v) for v in statuses.values()}) == 1
    ok &= same
    verdict(5, ok, f"101 front points certified for every e, x=2 infeasible, statuses identical "
                   f"across e: {same}")


# -- 6: joint certificates for the scalar example -----------------------------------------

def test_criterion_6_joint_certificates(verdict):
    fx = load_fixture("J1")

    def grad(x, p):
        Jx, Jp = fx.f.jacobian(x, p)
        return np.concatenate([Jx[0], Jp[0]])

    at_10 = scalar_necessary_condition(grad, fx.H, [1.0], [0.0])
    at_hh = scalar_necessary_condition(grad, fx.H, [0.5], [0.5])
    # KKT on x + p = 1: (2t, 2 - 2t) = mu (1, 1) only at t = 1/2, with mu = 1
    kkt = all(scalar_necessary_condition(grad, fx.H, [t], [1 - t]).feasible == (abs(t - 0.5) < 1e-12)
              for t in np.linspace(0, 1, 11))
    ok = (not at_10.feasible and at_hh.feasible and np.allclose(at_hh.y_star, [1.0])
          and at_hh.residual <= 1e-9 and kkt)
    verdict(6, ok, f"(1,0): {at_10.status}, (1/2,1/2): {at_hh.status} with y*={at_hh.y_star}, "
                   f"KKT sweep agrees: {kkt}")


# -- 7: distances against grid oracles ----------------------------------------------------

def test_criterion_7_distance_oracles(verdict):
    rng = np.random.default_rng(7)
    worst = []
    ok = True
    for name in ("L1", "A2", "A3", "A4", "A5"):
        H = load_fixture(name).H
        orc = AffineGridOracle(H.Tx, H.Tp, H.b, H.cone.halfspaces)
        gap = 0.0
        for _ in range(4):
            x, p, y = (rng.uniform(-1, 1, k) for k in (H.nx, H.np_, H.ny))
            pairs = [(H.value_distance(x, p, y), orc.value_distance(x, p, y)),
                     (H.value_distance(x, p, np.zeros(H.ny)), orc.value_distance(x, p, np.zeros(H.ny))),
                     (H.solution_distance(x, p), orc.solution_distance(x, p)),
                     (H.graph_distance(x, p, y), orc.graph_distance(x, p, y)),
                     (H.graph_distance(x, p, np.zeros(H.ny)), orc.graph_distance(x, p, np.zeros(H.ny))),
                     (H.solution_graph_distance(x, p), orc.solution_graph_distance(x, p))]
            for got, (ref, cell) in pairs:
                if np.isinf(ref) or np.isinf(got):
                    ok &= bool(np.isinf(ref) and np.isinf(got))
                    continue
                ok &= got <= ref + 1e-7 and ref - got <= cell + 1e-9
                gap = max(gap, (ref - got) / cell if cell else abs(ref - got))
        worst.append(f"{name}:{gap:.2f}")
    verdict(7, ok, "four distances within one cell of grid oracles on 5 affine fixtures "
                   "(worst gap in cells " + ", ".join(worst) + ")")


# -- 8: determinism ---------------------------------------------------------------------------

def test_criterion_8_determinism(verdict, tmp_path):
    fixtures = ("L1", "V1", "J1", "A2", "A3", "A4", "A5", "degenerate")
    codes = []
    for run in ("a", "b"):
        for name in fixtures:
            codes.append(main(["--fixture", name, "--command", "all", "--seed", "5",
                               "--out", str(tmp_path / run / name)]))
    files = ["report.json", "certificates.csv", "solves.csv", "front.csv"]
    same = all(filecmp.cmp(tmp_path / "a" / n / f, tmp_path / "b" / n / f, shallow=False)
               for n in fixtures for f in files)
    ok = same and all(c == 0 for c in codes)
    verdict(8, ok, f"two full runs over {len(fixtures)} fixtures byte-identical: {same}")
