import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heinslab import fixtures
from heinslab.domains import DomainSpec, PointOutsideDomain
from heinslab.errors import DimensionMismatch
from heinslab.heins import (HolcViolation, InconsistentCertificate, ParametricFamily,
                            displacement_identity_residual, dtau_norm, finite_difference_dtau,
                            heins_differential, heins_tau, loglog_slope,
                            perturbation_continuity_probe, remainder_ladder,
                            wirtinger_antiholomorphic_norm)

from conftest import family, family_y0, hmap

DISK = DomainSpec.unit_disk()


def fam(components, params=("y1",), radius=0.9, center=0j, space=DISK, **kw):
    pd = DomainSpec("disk", (center,), (radius,)) if len(params) == 1 else \
        DomainSpec("polydisk", (center,) * len(params), (radius,) * len(params))
    return ParametricFamily(hmap(*components, params=params), space, pd, **kw)


def mp_tau(components, y, guess):
    """Fixed point at 40 digits, solved directly as a root of F(y, z) - z."""
    mpmath.mp.dps = 40
    fns = [eval("lambda z1, z2, y1, y2: " + c.replace("^", "**"), {"exp": mpmath.exp, "sin": mpmath.sin})
           for c in components]
    yy = [mpmath.mpc(v) for v in y] + [0] * (2 - len(y))
    n = len(components)

    def system(*z):
        zz = list(z) + [0] * (2 - n)
        out = [fn(*zz, *yy) - zj for fn, zj in zip(fns, z)]
        return out if n > 1 else out[0]

    x0 = [mpmath.mpc(g) for g in guess]
    root = mpmath.findroot(system, x0 if n > 1 else x0[0])
    return list(root) if n > 1 else [root]


def mp_dtau(components, y0, guess, h=mpmath.mpf("1e-12")):
    m = len(y0)
    cols = []
    for j in range(m):
        e = [0] * m
        e[j] = h
        plus = mp_tau(components, [mpmath.mpc(v) + d for v, d in zip(y0, e)], guess)
        minus = mp_tau(components, [mpmath.mpc(v) - d for v, d in zip(y0, e)], guess)
        cols.append([complex((a - b) / (2 * h)) for a, b in zip(plus, minus)])
    return np.array(cols).T


# ------------------------------------------------------------------ family


def test_family_validates_holc():
    with pytest.raises(HolcViolation) as info:
        fam(["z1 + 0*y1"])
    assert info.value.report is not None


def test_family_needs_parameters():
    with pytest.raises(DimensionMismatch):
        ParametricFamily(hmap("0.5*z1"), DISK, DISK)


def test_family_domain_dimensions():
    with pytest.raises(DimensionMismatch):
        ParametricFamily(hmap("y1*z1", params=("y1",)), DomainSpec.unit_polydisk(2), DISK)


def test_family_validation_can_be_skipped():
    f = fam(["z1 + 0*y1"], validation_samples=0)
    assert f.map.m == 1


# --------------------------------------------------------------------- tau


def test_tau_of_constant_family():
    f = fam(["0*y1 + (0.2-0.3i)"])
    assert heins_tau(f, [0.4])[0] == 0.2 - 0.3j


def test_tau_of_quadratic():
    f = family("quadratic")
    assert abs(heins_tau(f, [0])[0]) < 1e-10
    assert abs(heins_tau(f, [0.5])[0] - (2 - cmath.sqrt(3.5))) < 1e-10
    assert 2 - cmath.sqrt(3.5) == pytest.approx(0.1291713066, abs=1e-10)


def test_tau_outside_parameter_domain():
    with pytest.raises(PointOutsideDomain):
        heins_tau(family("quadratic"), [0.95])


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.85, 0.85), st.floats(-0.85, 0.85))
def test_tau_of_quadratic_everywhere(a, b):
    y = complex(a, b)
    if abs(y) >= 0.9:
        y *= 0.89 / abs(y)
    got = heins_tau(family("quadratic"), [y], tol=1e-13)[0]
    assert abs(got - (2 - cmath.sqrt(4 - y))) < 1e-12


# ------------------------------------------------------------ differential


def test_constants_family():
    rep = heins_differential(family("constants"), [0.3])
    assert rep.jac_space[0, 0] == 0
    assert rep.jac_param[0, 0] == 1
    assert rep.d_tau[0, 0] == 1


def test_quadratic_family():
    rep = heins_differential(family("quadratic"), [0])
    assert abs(rep.tau[0]) < 1e-10
    assert rep.jac_param[0, 0] == 0.25
    assert abs(rep.d_tau[0, 0] - 1 / (2 * cmath.sqrt(4))) < 1e-12


def test_affine_family():
    rep = heins_differential(family("affine_family"), [0.5], tol=1e-13)
    assert abs(rep.tau[0] - 0.6) < 1e-12
    assert abs(rep.jac_space[0, 0] - 0.5) < 1e-15
    assert abs(rep.jac_param[0, 0] - 0.6) < 1e-12
    assert abs(rep.d_tau[0, 0] - 0.3 / (1 - 0.5) ** 2) < 1e-11


def test_trig_family_against_mpmath():
    comps = fixtures.FAMILIES["trig"]["map"]
    y0 = family_y0("trig")
    rep = heins_differential(family("trig"), y0, tol=1e-14)
    tau = mp_tau(comps, y0, [0.1])
    assert abs(rep.tau[0] - complex(tau[0])) < 1e-13
    assert np.max(np.abs(rep.d_tau - mp_dtau(comps, y0, [0.1]))) < 1e-10


def test_coupled_family_against_mpmath():
    comps = fixtures.FAMILIES["coupled2d"]["map"]
    y0 = family_y0("coupled2d")
    rep = heins_differential(family("coupled2d"), y0, tol=1e-14)
    tau = mp_tau(comps, y0, [0, 0.1])
    assert np.max(np.abs(rep.tau - np.array(tau, dtype=complex))) < 1e-13
    assert rep.d_tau.shape == (2, 2)
    assert np.max(np.abs(rep.d_tau - mp_dtau(comps, y0, [0, 0.1]))) < 1e-10


@pytest.mark.parametrize("name", sorted(fixtures.FAMILIES))
def test_report_internal_consistency(name):
    rep = heins_differential(family(name), family_y0(name))
    assert rep.spectral_radius < 1
    lhs = np.eye(len(rep.tau)) - rep.jac_space
    assert np.max(np.abs(lhs @ rep.d_tau - rep.jac_param)) < 1e-12
    assert rep.consistency < 1e-12
    js = rep.to_json()
    assert {"y0", "tau", "d_tau", "jac_space", "jac_param", "spectral_radius"} <= set(js)
    assert "fd_dtau" not in js


def test_certificate_failure_raises():
    # identity in z: validation skipped so the formula itself has to refuse
    f = fam(["z1 + 0*y1"], validation_samples=0)
    with pytest.raises(InconsistentCertificate):
        heins_differential(f, [0])


# ---------------------------------------------------------- finite differences


def test_fd_of_constants_is_exact():
    for y0 in ([0.3], [-0.5j], [0]):
        assert abs(finite_difference_dtau(family("constants"), y0)[0, 0] - 1) < 1e-12


def test_fd_quadratic():
    assert abs(finite_difference_dtau(family("quadratic"), [0], 1e-4)[0, 0] - 0.25) < 1e-8


def test_fd_affine():
    assert abs(finite_difference_dtau(family("affine_family"), [0.5], 1e-4)[0, 0] - 1.2) < 1e-7


def test_fd_step_leaving_domain():
    with pytest.raises(PointOutsideDomain):
        finite_difference_dtau(family("affine_family"), [0.5], 0.2)


@pytest.mark.parametrize("name", sorted(fixtures.FAMILIES))
def test_formula_vs_oracle_on_fixtures(name):
    rep = heins_differential(family(name), family_y0(name), fd_step=1e-4)
    assert rep.fd_agreement < 1e-6
    assert "fd_agreement" in rep.to_json()


@pytest.mark.parametrize("seed", range(20))
def test_formula_vs_oracle_on_random_families(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    f = fixtures.random_polynomial_family(rng, n, m, validation_samples=64)
    y0 = 0.5 * (rng.random(m) - 0.5) + 0.5j * (rng.random(m) - 0.5)
    rep = heins_differential(f, y0, fd_step=1e-4)
    assert rep.fd_agreement < 1e-6


# ------------------------------------------------------------- holomorphy


def test_wirtinger_of_constants():
    assert wirtinger_antiholomorphic_norm(family("constants"), [0.3]) < 1e-12


@pytest.mark.parametrize("name", sorted(fixtures.FAMILIES))
def test_wirtinger_on_fixtures(name):
    assert wirtinger_antiholomorphic_norm(family(name), family_y0(name), 1e-4) < 1e-6


def test_wirtinger_detects_non_holomorphic_function():
    # sanity of the stencil itself: conj is the canonical anti-holomorphic function
    h = 1e-4
    g = np.conj
    y0 = 0.2 + 0.1j
    est = (g(y0 + h) - g(y0 - h) + 1j * g(y0 + 1j * h) - 1j * g(y0 - 1j * h)) / (4 * h)
    assert abs(est - 1) < 1e-12


# ------------------------------------------------------------- continuity


def test_probe_radius_zero():
    assert perturbation_continuity_probe(family("quadratic"), [0], 0) == 0


def test_probe_constants_bounded_by_radius():
    for r in (1e-1, 1e-3):
        assert perturbation_continuity_probe(family("constants"), [0.3], r, trials=32) <= r


def test_probe_quadratic():
    assert perturbation_continuity_probe(family("quadratic"), [0], 1e-3) <= 0.3e-3


def test_probe_ball_must_fit():
    with pytest.raises(PointOutsideDomain):
        perturbation_continuity_probe(family("affine_family"), [0.5], 0.2)


@pytest.mark.parametrize("name", sorted(fixtures.FAMILIES))
def test_probe_decreases_with_radius(name):
    f, y0 = family(name), family_y0(name)
    bound = dtau_norm(heins_differential(f, y0)) + 1
    values = [perturbation_continuity_probe(f, y0, r, seed=1) for r in (1e-2, 1e-3, 1e-4)]
    assert values[0] > values[1] > values[2]
    for v, r in zip(values, (1e-2, 1e-3, 1e-4)):
        assert v <= bound * r


# ------------------------------------------------------- displacement identity


@pytest.mark.parametrize("name", sorted(fixtures.FAMILIES))
def test_displacement_identity(name):
    f, y0 = family(name), np.array(family_y0(name))
    rng = np.random.Generator(np.random.PCG64(7))
    room = f.param_domain.boundary_distance(list(y0))
    for _ in range(20):
        d = rng.standard_normal(len(y0)) + 1j * rng.standard_normal(len(y0))
        y = y0 + 0.5 * room * rng.random() * d / np.linalg.norm(d)
        assert displacement_identity_residual(f, y0, y) < 1e-9


# ------------------------------------------------------------------ scaling


@pytest.mark.parametrize("name", ["affine_family", "trig", "coupled2d"])
def test_remainder_is_quadratic_and_h_is_linear(name):
    out = remainder_ladder(family(name), family_y0(name))
    assert abs(out["remainder_slope"] - 2) <= 0.1
    assert abs(out["sup_h_slope"] - 1) <= 0.1


@pytest.mark.parametrize("name", ["constants", "quadratic"])
def test_remainder_vanishes_when_h_is_constant_in_z(name):
    # h_y = F(y, .) - F(y0, .) does not depend on z here, so the remainder is exactly 0
    out = remainder_ladder(family(name), family_y0(name))
    assert all(r <= 1e-13 for r in out["remainder"])
    assert out["remainder_slope"] is None
    assert abs(out["sup_h_slope"] - 1) <= 0.1


def test_loglog_slope():
    xs = [1e-2, 1e-3, 1e-4]
    assert loglog_slope(xs, [x**2 for x in xs]) == pytest.approx(2)
    assert loglog_slope(xs, [0, 1, 2]) is None
