import numpy as np
import pytest

from solidopt.fixtures import FixtureError, load_fixture, validate_fixture
from solidopt.setmaps import AffineConeMap, EpigraphicalMap, SampledGraphMap

BUNDLED = ["L1", "V1", "J1", "A2", "A3", "A4", "A5", "degenerate"]

HEADER = 'format = "solidopt-fixture"\nversion = 1\n'
SPACES = "[spaces]\nx = 1\np = 1\ny = 1\n"


def write(tmp_path, body, name="fx.toml"):
    path = tmp_path / name
    path.write_text(HEADER + body)
    return path


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_fixtures_are_clean(name):
    assert validate_fixture(name) == []


def test_l1_contents():
    fx = load_fixture("L1")
    assert isinstance(fx.H, AffineConeMap)
    assert fx.f([0.5], [1.0])[0] == pytest.approx(1.25)
    Jx, Jp = fx.f.jacobian([0.5], [1.0])
    assert Jx.tolist() == [[1.0]] and Jp.tolist() == [[2.0]]
    assert fx.block("constants")["M"] == [[1.0, np.inf]]
    assert fx.region.resolution == (21, 21)
    assert len(fx.sha256) == 64


def test_grid_override():
    assert load_fixture("L1", grid=5).region.resolution == (5, 5)


def test_multivariate_expressions(tmp_path):
    body = ("[spaces]\nx = 2\np = 1\ny = 1\n[objective]\nf = \"x1^2 * x2 - 3 * p + x2 / 2\"\n")
    fx = load_fixture(write(tmp_path, body))
    assert fx.f([2.0, 1.0], [1.0])[0] == pytest.approx(4 - 3 + 0.5)
    Jx, Jp = fx.f.jacobian([2.0, 1.0], [1.0])
    assert np.allclose(Jx, [[4.0, 4.5]]) and np.allclose(Jp, [[-3.0]])


@pytest.mark.parametrize("expr", ["__import__('os')", "sin(x)", "y + 1", "x; 1", "exp(x)"])
def test_expression_grammar_is_closed(tmp_path, expr):
    body = SPACES + f'[objective]\nf = "{expr}"\n'
    with pytest.raises(FixtureError) as exc:
        load_fixture(write(tmp_path, body))
    assert exc.value.line == 8


def test_epigraphical_and_sampled_kinds(tmp_path):
    body = (SPACES + '[map]\nkind = "epigraphical"\nF = ["1 - x - p"]\n[map.cone]\nhalfspaces = [[1.0]]\n'
            "[region]\nlower = [-1.0, -1.0]\nupper = [1.0, 1.0]\nresolution = 11\n")
    fx = load_fixture(write(tmp_path, body))
    assert isinstance(fx.H, EpigraphicalMap)
    assert fx.H.value_distance([0.0], [0.0], [0.0]) == pytest.approx(1.0)
    body = SPACES + '[map]\nkind = "sampled"\ntriples = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]\n'
    fx = load_fixture(write(tmp_path, body, "s.toml"))
    assert isinstance(fx.H, SampledGraphMap) and fx.H.is_feasible([1.0], [0.0])


def test_parse_error_has_line_number(tmp_path):
    path = write(tmp_path, SPACES + "[map]\nkind = \n")
    with pytest.raises(FixtureError) as exc:
        load_fixture(path)
    assert exc.value.line == 8


def test_dimension_mismatch_has_line_number(tmp_path):
    body = SPACES + '[map]\nkind = "affine"\nTx = [[1.0, 2.0]]\n[map.cone]\nhalfspaces = [[1.0]]\n'
    diags = validate_fixture(write(tmp_path, body))
    assert len(diags) == 1 and diags[0].line == 7 and "spaces" in diags[0].message


def test_wrong_header(tmp_path):
    path = tmp_path / "old.toml"
    path.write_text('format = "other"\nversion = 1\n' + SPACES)
    with pytest.raises(FixtureError):
        load_fixture(path)


def test_contradictory_cone_names_generator(tmp_path):
    body = SPACES + '[map]\nkind = "affine"\nTx = [[1.0]]\n[map.cone]\nhalfspaces = [[1.0]]\ngenerators = [[-1.0]]\n'
    diags = validate_fixture(write(tmp_path, body))
    assert any("generator 0" in d.message for d in diags)
    assert all(d.line == 10 for d in diags)


def test_lipschitz_too_small(tmp_path):
    body = (SPACES + '[objective]\nf = "x^2 + p^2"\nlipschitz = 0.5\n'
            "[region]\nlower = [-1.0, -1.0]\nupper = [1.0, 1.0]\n")
    diags = validate_fixture(write(tmp_path, body))
    assert len(diags) == 1
    assert "violated" in diags[0].message and "between" in diags[0].message
    assert diags[0].line == 9


def test_ordering_checks(tmp_path):
    body = SPACES + "[ordering]\nhalfspaces = [[1.0, 0.0]]\ndirection = [1.0, 0.0]\n"
    diags = validate_fixture(write(tmp_path, body))
    assert any("not pointed" in d.message for d in diags)


def test_unreadable_file(tmp_path):
    diags = validate_fixture(tmp_path / "missing.toml")
    assert diags and "no fixture" in diags[0].message
