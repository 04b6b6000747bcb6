import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heinslab.domains import (DomainSpec, PointOutsideDomain, boundary_points, contains,
                              kobayashi_distance, sample_points)
from heinslab.errors import DimensionMismatch

from conftest import hmap

KINDS = {
    "disk": DomainSpec.unit_disk(),
    "ball": DomainSpec.unit_ball(3),
    "polydisk": DomainSpec.unit_polydisk(2),
    "shifted_disk": DomainSpec("disk", (0.5 - 1j,), (2.0,)),
    "shifted_ball": DomainSpec("ball", (1j, -2), (0.5,)),
    "shifted_polydisk": DomainSpec("polydisk", (1 + 1j, -2), (0.5, 2.0)),
}


def oracle(dom, z, w):
    """Closed forms evaluated at 50 digits after normalisation."""
    mpmath.mp.dps = 50
    radii = dom._coordinate_radii()
    u = [(mpmath.mpc(a) - mpmath.mpc(c)) / r for a, c, r in zip(z, dom.center, radii)]
    v = [(mpmath.mpc(a) - mpmath.mpc(c)) / r for a, c, r in zip(w, dom.center, radii)]
    if dom.kind == "polydisk":
        return max(mpmath.atanh(abs((a - b) / (1 - mpmath.conj(b) * a))) for a, b in zip(u, v))
    inner = sum(a * mpmath.conj(b) for a, b in zip(u, v))
    nu = sum(abs(a) ** 2 for a in u)
    nv = sum(abs(b) ** 2 for b in v)
    return mpmath.atanh(mpmath.sqrt(1 - (1 - nu) * (1 - nv) / abs(1 - inner) ** 2))


# ------------------------------------------------------------------ contains


def test_contains_examples(disk, bidisk):
    assert contains(disk, [0], 0)
    assert not contains(disk, [0.95], 0.1)
    assert not contains(bidisk, [0.5, 0.99], 0.05)
    assert contains(bidisk, [0.5, 0.9], 0.05)


def test_contains_is_strict(disk):
    assert not contains(disk, [1.0])
    assert not contains(DomainSpec.unit_ball(2), [0.6, 0.8])


def test_contains_rejects_nonfinite(bidisk):
    assert not contains(bidisk, [complex("nan"), 0])
    assert not contains(bidisk, [0, complex("nan")])
    assert not contains(DomainSpec.unit_ball(2), [complex("inf"), 0])


def test_contains_dimension_mismatch(bidisk):
    with pytest.raises(DimensionMismatch):
        contains(bidisk, [0])


def test_contains_negative_margin(disk):
    with pytest.raises(ValueError):
        contains(disk, [0], -0.1)


# ----------------------------------------------------------------- validation


@pytest.mark.parametrize("kind, center, radii", [
    ("disk", (0j, 0j), (1.0,)),
    ("disk", (0j,), (0.0,)),
    ("ball", (0j,), (math.inf,)),
    ("polydisk", (0j, 0j), (1.0,)),
    ("annulus", (0j,), (1.0,)),
])
def test_invalid_domains(kind, center, radii):
    with pytest.raises(ValueError):
        DomainSpec(kind, center, radii)


def test_json_round_trip():
    data = {"kind": "polydisk", "center": [[0, 0], [0, 0]], "radii": [1, 1]}
    dom = DomainSpec.from_json(data)
    assert dom == DomainSpec.unit_polydisk(2)
    assert DomainSpec.from_json(dom.to_json()) == dom


def test_boundary_distance_signed(disk):
    assert disk.boundary_distance([0.25]) == 0.75
    assert disk.boundary_distance([1.5]) == -0.5


# ----------------------------------------------------------------- kobayashi


def test_disk_examples(disk, bidisk):
    assert kobayashi_distance(disk, [0], [0]) == 0
    assert kobayashi_distance(disk, [0], [0.5]) == pytest.approx(0.5493061443340549, abs=1e-15)
    assert kobayashi_distance(bidisk, [0, 0], [0.5, 0.3]) == pytest.approx(0.5493061443340549, abs=1e-15)


def test_outside_point_rejected(disk):
    with pytest.raises(PointOutsideDomain):
        kobayashi_distance(disk, [0], [1.0])


@pytest.mark.parametrize("name", sorted(KINDS))
def test_distance_matches_high_precision_oracle(name):
    dom = KINDS[name]
    pts = sample_points(dom, 60, 11)
    near = sample_points(dom, 60, 12, shell=0.999)
    for z, w in zip(pts + near, pts[30:] + near[::-1] + pts[:30]):
        ref = float(oracle(dom, z, w))
        assert kobayashi_distance(dom, z, w) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_ball_of_dimension_one_is_the_disk():
    ball = DomainSpec.unit_ball(1)
    disk = DomainSpec.unit_disk()
    for z, w in zip(sample_points(disk, 20, 1), sample_points(disk, 20, 2)):
        assert kobayashi_distance(ball, z, w) == pytest.approx(kobayashi_distance(disk, z, w), rel=1e-14)


@pytest.mark.parametrize("name", sorted(KINDS))
def test_metric_axioms(name):
    dom = KINDS[name]
    a = sample_points(dom, 200, 21)
    b = sample_points(dom, 200, 22)
    c = sample_points(dom, 200, 23, shell=0.9)
    for x, y, z in zip(a, b, c):
        dxy = dom.kobayashi_distance(x, y)
        assert dxy == dom.kobayashi_distance(y, x)
        assert dom.kobayashi_distance(x, x) == 0
        assert dxy > 0
        assert dom.kobayashi_distance(x, z) <= dxy + dom.kobayashi_distance(y, z) + 1e-12


@pytest.mark.parametrize("name", sorted(KINDS))
def test_normalization_invariance(name):
    dom = KINDS[name]
    unit = dom.unit_model
    for z, w in zip(sample_points(dom, 100, 31), sample_points(dom, 100, 32)):
        direct = dom.kobayashi_distance(z, w)
        via = unit.kobayashi_distance(dom.normalize(z), dom.normalize(w))
        assert abs(direct - via) <= 1e-12 * max(1.0, direct)


def test_normalize_denormalize_inverse():
    dom = KINDS["shifted_polydisk"]
    for z in sample_points(dom, 20, 5):
        assert np.allclose(dom.denormalize(dom.normalize(z)), z, atol=1e-15)


@pytest.mark.parametrize("components, dom", [
    (("0.3 + 0.4*z1",), DomainSpec.unit_disk()),
    (("z1^2/2 + 0.1i",), DomainSpec.unit_disk()),
    (("(z1 - 0.3)/(1 - 0.3*z1)",), DomainSpec.unit_disk()),  # automorphism: an isometry
    (("0.5*z2", "0.25*z1 + 0.1"), DomainSpec.unit_polydisk(2)),
    (("0.3*z1*z2 + 0.2", "0.4*sin(z1) - 0.1i*z2"), DomainSpec.unit_ball(2)),
])
def test_holomorphic_self_maps_contract(components, dom):
    f = hmap(*components)
    for z, w in zip(sample_points(dom, 200, 41), sample_points(dom, 200, 42)):
        assert dom.kobayashi_distance(f.call(z), f.call(w)) <= dom.kobayashi_distance(z, w) + 1e-12


# ------------------------------------------------------------------ sampling


def test_sampling_rejects_zero_count(disk):
    with pytest.raises(ValueError):
        sample_points(disk, 0, 1)


@pytest.mark.parametrize("shell", [0.0, 1.0, -0.5])
def test_sampling_rejects_bad_shell(disk, shell):
    with pytest.raises(ValueError):
        sample_points(disk, 3, 1, shell=shell)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(KINDS)), st.integers(1, 50), st.integers(0, 2**63))
def test_sampling_is_deterministic_and_interior(name, count, seed):
    dom = KINDS[name]
    pts = sample_points(dom, count, seed)
    assert pts == sample_points(dom, count, seed)
    assert len(pts) == count
    assert all(dom.contains(p) for p in pts)


def test_shell_points_of_unit_disk(disk):
    pts = sample_points(disk, 500, 9, shell=0.99)
    assert all(0.99 <= abs(z[0]) < 1 for z in pts)


@pytest.mark.parametrize("name", sorted(KINDS))
def test_shell_points_in_every_domain(name):
    dom = KINDS[name]
    for p in sample_points(dom, 200, 4, shell=0.95):
        assert 0.95 - 1e-12 <= dom.relative_radius(p) < 1
        assert dom.contains(p)


def test_sampling_is_roughly_uniform(disk):
    # area fraction of the disk of radius 1/2 is 1/4
    pts = sample_points(disk, 20000, 7)
    frac = sum(abs(z[0]) < 0.5 for z in pts) / len(pts)
    assert abs(frac - 0.25) < 0.015


def test_different_seeds_differ(disk):
    assert sample_points(disk, 5, 1) != sample_points(disk, 5, 2)


@pytest.mark.parametrize("name", sorted(KINDS))
def test_boundary_points_on_boundary(name):
    dom = KINDS[name]
    for p in boundary_points(dom, 50, 3):
        assert abs(dom.relative_radius(p) - 1) < 1e-12
