import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heinslab import fixtures
from heinslab.errors import DimensionMismatch
from heinslab.expr import ParseError
from heinslab.io import (complex_from_json, complex_to_json, complex_vector_from_json,
                         definition_to_json, digest_of, dumps_report, load_map_definition,
                         parse_vector_arg, read_map_file)

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(finite, finite)
def test_complex_round_trip(re_, im_):
    c = complex(re_, im_)
    assert complex_from_json(json.loads(json.dumps(complex_to_json(c)))) == c


def test_negative_zero_is_cleaned():
    assert json.dumps(complex_to_json(complex(-0.0, -0.0))) == "[0.0, 0.0]"


def test_nonfinite_not_serialised():
    with pytest.raises(ValueError):
        complex_to_json(complex(math.inf, 0))


def test_vector_forms():
    assert complex_vector_from_json([[0.5, 0], [1, -2]]) == [0.5, 1 - 2j]
    # bare reals are one coordinate each
    assert complex_vector_from_json([0.5, 0]) == [0.5, 0]
    assert complex_vector_from_json(0.25) == [0.25]
    assert parse_vector_arg("[[0, 1]]") == [1j]


@pytest.mark.parametrize("bad", ["[[1, 2, 3]]", "[true]", '["a"]', "{}", "[0"])
def test_bad_vectors(bad):
    with pytest.raises(ValueError):
        parse_vector_arg(bad)


def test_definition_round_trip():
    for data in list(fixtures.MAPS.values()) + list(fixtures.FAMILIES.values()):
        defn = fixtures.definition(data)
        again = load_map_definition(json.loads(json.dumps(definition_to_json(defn))))
        assert again.domain == defn.domain
        assert again.param_domain == defn.param_domain
        z = list(defn.domain.center)
        y = [] if defn.param_domain is None else list(defn.param_domain.center)
        assert again.map.call(z, y) == defn.map.call(z, y)


@pytest.mark.parametrize("data, err", [
    ([], ValueError),
    ({"map": ["z1"]}, ValueError),
    ({"domain": fixtures.UNIT_DISK, "map": ["z1", "z2"]}, DimensionMismatch),
    ({"domain": fixtures.UNIT_DISK, "map": ["z1 +"]}, ParseError),
    ({"domain": fixtures.UNIT_DISK, "map": ["y1"], "params": {"names": ["y1"]}}, ValueError),
    ({"domain": fixtures.UNIT_DISK, "map": ["y1"],
      "params": {"names": ["y1", "y2"], "domain": fixtures.UNIT_DISK}}, DimensionMismatch),
    ({"domain": {"kind": "disk", "center": [[0, 0]]}, "map": ["z1"]}, ValueError),
])
def test_invalid_definitions(data, err):
    with pytest.raises(err):
        load_map_definition(data)


def test_custom_space_vars():
    defn = load_map_definition({"domain": fixtures.UNIT_DISK, "space_vars": ["w"], "map": ["w/2"]})
    assert defn.map.call([0.5]) == (0.25,)


def test_read_map_file_digest(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(fixtures.MAPS["affine"]))
    defn, digest = read_map_file(p)
    assert defn.name == "affine"
    assert digest == read_map_file(p)[1]
    assert digest.startswith("sha256:") and len(digest) == 7 + 64


def test_dumps_report_is_canonical():
    a = dumps_report({"b": 1, "a": [0.0, 1.5]})
    assert a == dumps_report({"a": [0.0, 1.5], "b": 1})
    assert a.endswith("\n")
    with pytest.raises(ValueError):
        dumps_report({"x": math.nan})
    assert digest_of({"a": 1}) == digest_of({"a": 1})
