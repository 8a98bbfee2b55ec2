import json
import math

import numpy as np
import pytest

from cpint.bv_stieltjes import BVFunction, variation
from cpint.config import settings
from cpint.convergence_lab import DistributionSequence
from cpint.errors import DomainError, UnknownFixture
from cpint.fixture_utils import (
    CATALOG,
    cantor_function,
    catalog,
    load_fixture_specs,
    parse_bv_spec,
    random_linear_primitive,
    random_triple,
    resolve_fixture,
    seeded_rng,
    source_distribution,
)
from cpint.integral_core import Distribution, integral, linear_combine


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_primitives_reach_their_limits(name):
    f = catalog(name)
    assert float(f(-1e8)) == pytest.approx(0.0, abs=1e-6)
    assert float(f(1e8)) == pytest.approx(f.total, abs=1e-6)
    assert f.label == name


def test_unknown_catalog_name():
    with pytest.raises(UnknownFixture):
        catalog("hypergeometric")


def test_cantor_function():
    np.testing.assert_allclose(cantor_function(np.array([-1.0, 0.25, 0.5, 0.75, 2.0])),
                               [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("text, point, expected", [
    ("one", 5.0, 1.0),
    ("const:2.5", 0.0, 2.5),
    ("heaviside:1", 1.0, 1.0),
    ("heaviside:1", 0.9, 0.0),
    ("indicator:(0,1]", 0.0, 0.0),
    ("indicator:(0,1]", 1.0, 1.0),
    ("indicator:[-inf,0]", -1e6, 1.0),
])
def test_parse_bv_spec_values(text, point, expected):
    assert parse_bv_spec(text)(point) == expected


@pytest.mark.parametrize("text, expected", [
    ("indicator:[0,1]", 2.0),
    ("indicator:[-inf,0]", 1.0),
    ("staircase", 2.0),
    ("poisson:0,1", 2.0 / math.pi),
    ("blocks:3", 2.0 * (1.0 + 1.0 / 4.0 + 1.0 / 9.0)),
])
def test_parse_bv_spec_variation(text, expected):
    assert variation(parse_bv_spec(text)) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["spline", "indicator:0,1", "const:abc", "poisson:0,-1", "blocks:0"])
def test_parse_bv_spec_rejects(text):
    with pytest.raises(DomainError):
        parse_bv_spec(text)


def test_load_fixture_specs_from_the_repository():
    specs = load_fixture_specs()
    assert {"atan_expr", "unit_block", "power_ramp"} <= set(specs)
    assert specs["power_ramp"].kind == "sequence"
    assert specs["nonabsolute_expr"].support == (0.0, 1.0)


def test_missing_fixture_file_is_empty(tmp_path):
    assert load_fixture_specs(str(tmp_path / "absent.json")) == {}


@pytest.mark.parametrize("payload", [
    [],
    {"broken": {"kind": "primitive"}},
    {"broken": {"kind": "bv", "breaks": [0.0], "pieces": ["0"]}},
    {"broken": {"kind": "sequence"}},
    {"broken": {"kind": "tensor", "expression": "x"}},
])
def test_malformed_fixture_files(tmp_path, payload):
    path = tmp_path / "fixtures.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(DomainError):
        load_fixture_specs(str(path))


@pytest.mark.parametrize("name, total", [
    ("atan_expr", math.pi),
    ("ramp_declared", 2.0),
    ("nonabsolute_expr", math.cos(1.0)),
])
def test_resolve_primitive_fixtures(name, total):
    f = resolve_fixture(name)
    assert isinstance(f, Distribution)
    assert f.total == pytest.approx(total, abs=1e-9)


@pytest.mark.slow
def test_resolve_fresnel_by_panel_quadrature():
    f = resolve_fixture("fresnel_hake")
    assert f.total == pytest.approx(math.sqrt(0.5 * math.pi), abs=1e-8)


def test_resolve_bv_fixtures():
    block = resolve_fixture("unit_block")
    half_open = resolve_fixture("half_open_block")
    assert isinstance(block, BVFunction)
    assert half_open(0.0) == 1.0
    assert half_open(1.0) == 0.0
    assert variation(half_open) == variation(block) == 2.0
    ramp = resolve_fixture("arctan_ramp")
    assert variation(ramp) == pytest.approx(math.pi, abs=1e-9)


def test_resolve_sequence_fixtures():
    seq = resolve_fixture("triangles_cubic")
    assert isinstance(seq, DistributionSequence)
    assert float(seq(2)(2.0)) == pytest.approx(8.0)


def test_resolve_unknown_fixture(tmp_path):
    with pytest.raises(UnknownFixture):
        resolve_fixture("nothing_here")
    with pytest.raises(UnknownFixture):
        resolve_fixture("atan_expr", path=str(tmp_path / "absent.json"))


def test_fixture_path_comes_from_settings(tmp_path, monkeypatch):
    path = tmp_path / "fixtures.json"
    path.write_text(json.dumps({"square": {"kind": "primitive", "expression": "x^2", "support": [0, 3]}}),
                    encoding="utf-8")
    monkeypatch.setattr(settings, "fixture_specs_path", str(path))
    assert resolve_fixture("square").total == pytest.approx(9.0)


def test_source_distribution_variants():
    assert integral(source_distribution(primitive="x^3", a=0.0, b=1.0)) == pytest.approx(1.0)
    assert source_distribution(primitive="x^3", support=(0.0, 2.0)).total == pytest.approx(8.0)
    assert source_distribution(primitive_of="2*x", support=(0.0, 1.0)).total == pytest.approx(1.0, abs=1e-10)
    assert source_distribution(primitive="atan(x)").total == pytest.approx(math.pi, abs=1e-9)
    assert source_distribution(fixture="gaussian").total == 1.0


def test_source_distribution_errors():
    with pytest.raises(DomainError):
        source_distribution()
    with pytest.raises(DomainError):
        source_distribution(primitive="x", fixture="arctan")
    with pytest.raises(DomainError):
        source_distribution(fixture="unit_block")


def test_seeded_generators_are_reproducible():
    first = random_linear_primitive(seeded_rng(7))
    second = random_linear_primitive(seeded_rng(7))
    x = np.linspace(-6.0, 6.0, 25)
    np.testing.assert_array_equal(first(x), second(x))
    assert seeded_rng().integers(1 << 30) == np.random.default_rng(settings.seed).integers(1 << 30)


def test_random_primitives_form_a_vector_space(rng):
    for _ in range(5):
        f, g, h = random_triple(rng)
        left = linear_combine(1.0, linear_combine(1.0, f, g), h)
        right = linear_combine(1.0, f, linear_combine(1.0, g, h))
        x = np.linspace(-6.0, 6.0, 49)
        np.testing.assert_allclose(left(x), right(x), atol=1e-12)
        assert integral(linear_combine(2.5, f, g)) == pytest.approx(2.5 * f.total + g.total)
