"""Acceptance gate: one test per criterion, each leaving a PASS/FAIL line.

The verdict lines are printed as they are produced (visible with ``-s``)
and collected into a summary section at the end of every pytest run.
"""

import cmath
import json
import math
import subprocess
import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np

from heinslab import cli, fixtures
from heinslab.calculus import (factorization_norm_ratio, jacobian_symbolic,
                               segment_factorization)
from heinslab.domains import DomainSpec, sample_points
from heinslab.dynamics import check_compact_image, iterate_to_fixed_point
from heinslab.heins import (displacement_identity_residual, finite_difference_dtau,
                            heins_differential, heins_tau, remainder_ladder,
                            wirtinger_antiholomorphic_norm)

import conftest
from conftest import family, family_y0, hmap

ROOT = Path(__file__).resolve().parents[1]
TIME_LIMIT = 5.0


def record(n, title, ok, elapsed, **detail):
    ok = ok and elapsed < TIME_LIMIT
    parts = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in detail.items())
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {title} ({parts}; {elapsed:.2f}s)"
    conftest.ACCEPTANCE[n] = line
    print(line)
    return ok


def fixture_map(name):
    d = fixtures.definition(fixtures.MAPS[name])
    return d.map, d.domain


def test_c01_affine_fixture():
    t = time.perf_counter()
    f, dom = fixture_map("affine")
    taus, rhos = [], []
    for seed in range(20):
        start = sample_points(dom, 1, seed)[0]
        res = iterate_to_fixed_point(f, dom, start=start, tol=1e-12)
        taus.append(res.fixed_point[0])
        rhos.append(res.spectral_radius)
    spread = max(abs(a - b) for a, b in combinations(taus, 2))
    closed = max(abs(a - 0.3 / (1 - 0.4)) for a in taus)
    rho_err = max(abs(r - 0.4) for r in rhos)
    ok = spread <= 1e-9 and closed <= 1e-9 and rho_err <= 1e-9
    assert record(1, "affine tau=0.5, rho=0.4 from 20 seeds", ok, time.perf_counter() - t,
                  pairwise=spread, vs_closed_form=closed, rho_error=rho_err)


def test_c02_quadratic_family():
    t = time.perf_counter()
    fam = family("quadratic")
    tau0 = abs(heins_tau(fam, [0])[0])
    rep = heins_differential(fam, [0])
    closed = 1 / (2 * cmath.sqrt(4 - 0))
    err_closed = abs(rep.d_tau[0, 0] - closed)
    err_fd = abs(rep.d_tau[0, 0] - finite_difference_dtau(fam, [0], 1e-4)[0, 0])
    ok = tau0 <= 1e-10 and err_closed <= 1e-12 and err_fd <= 1e-6 and closed == 0.25
    assert record(2, "quadratic tau(0)=0, d_tau=0.25", ok, time.perf_counter() - t,
                  tau0=tau0, vs_closed_form=err_closed, vs_central_difference=err_fd)


def test_c03_linear2d():
    t = time.perf_counter()
    f, dom = fixture_map("linear2d")
    res = iterate_to_fixed_point(f, dom)
    # oracle: (I - M) tau = b solved directly; eigenvalues of M are +-sqrt(0.5 * 0.25)
    m, b = np.array([[0, 0.5], [0.25, 0]]), np.array([0, 0.1])
    exact = np.linalg.solve(np.eye(2) - m, b)
    err = float(np.max(np.abs(res.fixed_point - exact)))
    lit = float(np.max(np.abs(res.fixed_point - [0.0571428571, 0.1142857143])))
    rho_err = abs(res.spectral_radius - math.sqrt(0.125))
    ok = err <= 1e-9 and lit <= 1e-9 and rho_err <= 1e-9
    assert record(3, "linear2d tau=(0.0571428571, 0.1142857143), rho=sqrt(0.125)", ok,
                  time.perf_counter() - t, tau_error=err, rho_error=rho_err)


def test_c04_segment_factorization():
    t = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(4))
    resid, limit = 0.0, 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        h = fixtures.random_polynomial_map(rng, n, degree=int(rng.integers(1, 5)))
        p0, z = (np.array(p) for p in sample_points(DomainSpec.unit_polydisk(n), 2,
                                                      int(rng.integers(2**31))))
        a = segment_factorization(h, p0, z, quad_nodes=32)
        lhs = np.asarray(h.call(list(z))) - np.asarray(h.call(list(p0)))
        resid = max(resid, float(np.linalg.norm(lhs - a @ (z - p0))))
        diff = segment_factorization(h, p0, p0, quad_nodes=32) - jacobian_symbolic(h, p0)
        limit = max(limit, float(np.max(np.abs(diff))))
    worst = {}
    for n in (1, 2):
        inner = DomainSpec("polydisk", (0j,) * n, (0.5,) * n)
        outer = DomainSpec.unit_polydisk(n)
        for _ in range(25):
            h = fixtures.random_polynomial_map(rng, n, degree=4, with_exp=False)
            r = factorization_norm_ratio(h, inner, outer, samples=32, seed=int(rng.integers(2**31)))
            worst[n] = max(worst.get(n, 0.0), r["ratio"])
    ok = resid < 1e-10 and limit <= 1e-12 and all(w <= 2 * n + 1e-9 for n, w in worst.items())
    assert record(4, "segment factorization residual, limit and 2n bound", ok,
                  time.perf_counter() - t, residual=resid, limit_error=limit,
                  max_ratio_n1=worst[1], max_ratio_n2=worst[2])


def test_c05_displacement_identity():
    t = time.perf_counter()
    worst = 0.0
    for name in sorted(fixtures.FAMILIES):
        fam, y0 = family(name), np.array(family_y0(name))
        rng = np.random.Generator(np.random.PCG64(5))
        room = fam.param_domain.boundary_distance(list(y0))
        for _ in range(20):
            d = rng.standard_normal(len(y0)) + 1j * rng.standard_normal(len(y0))
            y = y0 + 0.5 * room * rng.random() * d / np.linalg.norm(d)
            worst = max(worst, displacement_identity_residual(fam, y0, y))
    assert record(5, "displacement identity on every fixture family", worst <= 1e-9,
                  time.perf_counter() - t, max_residual=worst, families=len(fixtures.FAMILIES))


def test_c06_remainder_slope():
    t = time.perf_counter()
    slopes, zero = {}, {}
    for name in sorted(fixtures.FAMILIES):
        out = remainder_ladder(family(name), family_y0(name), steps=(1e-2, 1e-3, 1e-4))
        if out["remainder_slope"] is None:
            # h_y independent of z: the remainder vanishes identically
            zero[name] = max(out["remainder"])
        else:
            slopes[name] = out["remainder_slope"]
    ok = bool(slopes) and all(abs(s - 2) <= 0.1 for s in slopes.values()) \
        and all(r <= 1e-13 for r in zero.values())
    worst = max(slopes.values(), key=lambda s: abs(s - 2))
    assert record(6, "remainder log-log slope 2 over steps 1e-2..1e-4", ok, time.perf_counter() - t,
                  worst_slope=worst, sloped=",".join(sorted(slopes)),
                  identically_zero=",".join(sorted(zero)))


def test_c07_wirtinger():
    t = time.perf_counter()
    worst = max(wirtinger_antiholomorphic_norm(family(n), family_y0(n), 1e-4)
                for n in sorted(fixtures.FAMILIES))
    assert record(7, "anti-holomorphic part of d_tau vanishes", worst < 1e-6,
                  time.perf_counter() - t, max_norm=worst)


def _contraction_excess(f, dom, seed, y=()):
    pts = sample_points(dom, 400, seed)
    worst = -math.inf
    for z, w in zip(pts[::2], pts[1::2]):
        fz, fw = f.call(list(z), y), f.call(list(w), y)
        worst = max(worst, dom.kobayashi_distance(fz, fw) - dom.kobayashi_distance(z, w))
    return worst


def test_c08_kobayashi():
    t = time.perf_counter()
    excess = -math.inf
    for k, name in enumerate(sorted(fixtures.MAPS)):
        f, dom = fixture_map(name)
        excess = max(excess, _contraction_excess(f, dom, 80 + k))
    for k, name in enumerate(sorted(fixtures.FAMILIES)):
        fam = family(name)
        excess = max(excess, _contraction_excess(fam.map, fam.space_domain, 90 + k, family_y0(name)))
    axioms = 0.0
    for k, dom in enumerate([DomainSpec.unit_disk(), DomainSpec.unit_ball(2),
                             DomainSpec.unit_polydisk(2)]):
        pts = sample_points(dom, 600, 100 + k)
        for x, y, z in zip(pts[::3], pts[1::3], pts[2::3]):
            d = dom.kobayashi_distance
            axioms = max(axioms, abs(d(x, x)), abs(d(x, y) - d(y, x)),
                         d(x, z) - d(x, y) - d(y, z), -d(x, y))
            assert d(x, y) > 0
    ok = excess <= 1e-12 and axioms <= 1e-12
    assert record(8, "Kobayashi contraction (200 pairs) and metric axioms (200 triples)", ok,
                  time.perf_counter() - t, max_excess=excess, max_axiom_violation=axioms)


def test_c09_identity_negative_control(tmp_path):
    t = time.perf_counter()
    f, dom = hmap("z1"), DomainSpec.unit_disk()
    margins = [10.0**-k for k in range(0, 301, 10)] + [1e-6, 0.5, 5e-324]
    compact = [m for m in margins if check_compact_image(f, dom, margin=m).is_compact]
    out = tmp_path / "identity.json"
    code = cli.main(["verify", str(ROOT / "maps" / "identity.json"), "--json", str(out), "--quiet"])
    checks = json.loads(out.read_text())["result"]["checks"]
    failed = [c["id"] for c in checks if c["status"] == "fail"]
    ok = not compact and failed == ["dynamics.compact_image"] and code == 1
    assert record(9, "identity fails compact image for every margin; verify exit 1", ok,
                  time.perf_counter() - t, margins=len(margins), failed=",".join(failed),
                  exit_code=code)


def test_c10_deterministic_verify(tmp_path):
    cmd = [sys.executable, "-m", "heinslab", "verify", "--builtin-fixtures", "--seed", "7", "--quiet"]
    outs, codes, times = [], [], []
    for k in (1, 2):
        out = tmp_path / f"run{k}.json"
        t = time.perf_counter()
        codes.append(subprocess.run(cmd + ["--json", str(out)], cwd=ROOT).returncode)
        times.append(time.perf_counter() - t)
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and codes == [0, 0]
    # each run is timed separately (process start included)
    assert record(10, "verify --builtin-fixtures --seed 7 byte-identical", ok, max(times),
                  bytes=len(outs[0]), exit_codes=codes)
