"""Invariant suite behind ``heinslab verify``.

Every check returns a :class:`Check` with a stable id, a short anchor naming
the mathematical statement it exercises, a subject (the fixture or map it
ran on), a status (``pass``, ``fail`` or ``skip``) and numeric details.
Checks that presuppose a self-map with relatively compact image are
skipped, not failed, when that hypothesis is already refuted, so a broken
map shows up as exactly one failing check.
"""

from __future__ import annotations

import cmath
import math
import zlib
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import fixtures
from .calculus import (factorization_norm_ratio, jacobian_contour, jacobian_symbolic,
                       segment_factorization, spectral_radius)
from .domains import DomainSpec, sample_points
from .dynamics import (EvaluationFailure, IterationError, check_compact_image,
                       iterate_to_fixed_point)
from .errors import HeinslabError
from .expr import HolomorphicMap, parse_expression, to_source
from .heins import (HolcViolation, ParametricFamily, displacement_identity_residual,
                    dtau_norm, heins_differential, perturbation_continuity_probe,
                    remainder_ladder, wirtinger_antiholomorphic_norm)
from .io import MapDefinition

TOL = 1e-10
IMAGE_MARGIN = 1e-6


@dataclass
class Check:
    id: str
    anchor: str
    subject: str
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "subject": self.subject,
                "status": self.status, "detail": _jsonable(self.detail)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real) + 0.0, float(v.imag) + 0.0]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v + 0.0 if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _seed(seed: int, *labels) -> int:
    key = "/".join(str(x) for x in labels).encode()
    return (zlib.crc32(key) ^ (seed * 0x9E3779B1)) & 0xFFFFFFFF


def _check(id, anchor, subject, ok, **detail) -> Check:
    return Check(id, anchor, subject, "pass" if ok else "fail", detail)


def _skip(id, anchor, subject, reason) -> Check:
    return Check(id, anchor, subject, "skip", {"reason": reason})


# ----------------------------------------------------------------- grammar


def check_round_trip(fmap: HolomorphicMap, dom: DomainSpec, subject: str, seed: int) -> Check:
    pts = sample_points(dom, 100, _seed(seed, subject, "roundtrip"))
    y = [0j] * fmap.m
    worst = 0
    for comp in fmap.components:
        again = parse_expression(to_source(comp.ast))
        f1 = comp.compile(fmap.variables)
        f2 = again.compile(fmap.variables)
        worst += sum(f1(*p, *y) != f2(*p, *y) for p in pts)
    return _check("expr.round_trip", "grammar: print/parse round trip", subject, worst == 0,
                  mismatches=worst, points=len(pts))


def check_cauchy_riemann(fmap: HolomorphicMap, dom: DomainSpec, subject: str, seed: int,
                         h: float = 1e-5, bound: float = 1e-6) -> Check:
    """Wirtinger derivative d/d(conj z_j) via the 4-point stencil must vanish."""
    pts = sample_points(dom, 20, _seed(seed, subject, "cr"))
    y = [0j] * fmap.m
    worst = 0.0
    for p in pts:
        for j in range(fmap.n):
            shifted = []
            for d in (h, -h, 1j * h, -1j * h):
                q = list(p)
                q[j] += d
                shifted.append(np.asarray(fmap.call(q, y)))
            est = (shifted[0] - shifted[1] + 1j * shifted[2] - 1j * shifted[3]) / (4 * h)
            worst = max(worst, float(np.max(np.abs(est))))
    return _check("expr.cauchy_riemann", "grammar: holomorphy (d/d conj z = 0)", subject,
                  worst < bound, max_wirtinger=worst, bound=bound)


def check_symbolic_vs_contour(fmap: HolomorphicMap, dom: DomainSpec, subject: str, seed: int,
                              rel: float = 1e-9) -> Check:
    pts = sample_points(dom, 20, _seed(seed, subject, "contour"))
    y = [0j] * fmap.m
    worst = 0.0
    for p in pts:
        js = jacobian_symbolic(fmap, p, y)
        jc = jacobian_contour(fmap, p, y, domain=dom)
        worst = max(worst, float(np.max(np.abs(js - jc))) / max(1.0, float(np.max(np.abs(js)))))
    return _check("calculus.symbolic_vs_contour", "Rem 1.1: Jacobian, symbolic vs Cauchy contour",
                  subject, worst < rel, max_relative_error=worst, bound=rel)


# ----------------------------------------------------------------- domains


def check_metric_axioms(dom: DomainSpec, subject: str, seed: int, triples: int = 200) -> Check:
    s = _seed(seed, subject, "metric")
    pts = sample_points(dom, triples, s) + sample_points(dom, triples, s + 1, shell=0.9) \
        + sample_points(dom, triples, s + 2)
    asym = 0.0
    self_dist = 0.0
    tri = -math.inf
    for a, b, c in zip(pts[:triples], pts[triples:2 * triples], pts[2 * triples:]):
        k = dom.kobayashi_distance
        asym = max(asym, abs(k(a, b) - k(b, a)))
        self_dist = max(self_dist, k(a, a))
        tri = max(tri, k(a, c) - k(a, b) - k(b, c))
    ok = asym == 0.0 and self_dist == 0.0 and tri <= 1e-12
    return _check("domains.metric_axioms", "Lemma 2.1 proof: Kobayashi distance is a metric",
                  subject, ok, max_asymmetry=asym, max_self_distance=self_dist,
                  max_triangle_excess=tri, triples=triples)


def check_normalization(dom: DomainSpec, subject: str, seed: int, pairs: int = 100) -> Check:
    s = _seed(seed, subject, "normalize")
    pts = sample_points(dom, 2 * pairs, s)
    unit = dom.unit_model
    worst = 0.0
    for a, b in zip(pts[:pairs], pts[pairs:]):
        d1 = dom.kobayashi_distance(a, b)
        d2 = unit.kobayashi_distance(dom.normalize(a), dom.normalize(b))
        worst = max(worst, abs(d1 - d2))
    return _check("domains.normalization", "Kobayashi distance invariant under the unit-model map",
                  subject, worst <= 1e-12, max_difference=worst)


# ----------------------------------------------------------------- dynamics

HOLC_ANCHOR = "Thm 1.1 hypothesis: f(X) relatively compact in X"


def check_holc(fmap, dom, y, subject, seed, margin=IMAGE_MARGIN) -> Check:
    try:
        rep = check_compact_image(fmap, dom, y, margin, samples=200, seed=_seed(seed, subject, "holc"))
    except EvaluationFailure as exc:
        return _check("dynamics.compact_image", HOLC_ANCHOR, subject, False,
                      error=str(exc), witness=list(exc.witness))
    return _check("dynamics.compact_image", HOLC_ANCHOR, subject, rep.is_compact,
                  min_boundary_margin=rep.min_boundary_margin, margin_threshold=margin,
                  samples_used=rep.samples_used, witness=list(rep.witness))


def check_contraction(fmap, dom, y, subject, seed, pairs: int = 200) -> Check:
    s = _seed(seed, subject, "contraction")
    pts = sample_points(dom, pairs, s) + sample_points(dom, pairs, s + 1, shell=0.99)
    rng = np.random.Generator(np.random.PCG64(s + 2))
    order = rng.permutation(len(pts))
    excess = -math.inf
    for i in range(pairs):
        a, b = pts[order[2 * i]], pts[order[2 * i + 1]]
        fa, fb = fmap.call(a, y), fmap.call(b, y)
        excess = max(excess, dom.kobayashi_distance(fa, fb) - dom.kobayashi_distance(a, b))
    return _check("lemma2_1.contraction", "Lemma 2.1 proof: Kobayashi distance contracted by f",
                  subject, excess <= 1e-12, max_excess=excess, pairs=pairs)


def check_fixed_point_suite(fmap, dom, y, subject, seed, expected=None) -> list[Check]:
    """Uniqueness, fixed-point property, attraction certificate and orbit monotonicity."""
    out = []
    try:
        base = iterate_to_fixed_point(fmap, dom, y, tol=TOL)
    except IterationError as exc:
        return [_check("thm1_1.convergence", "Thm 1.1: iterates converge", subject, False, error=str(exc))]
    out.append(_check("thm1_1.fixed_point", "Thm 1.1: f(tau) = tau", subject,
                      base.residual <= TOL, residual=base.residual, iterations=base.iterations,
                      tau=list(base.fixed_point)))
    rho = base.spectral_radius
    out.append(_check("rem1_1.attraction", "Rem 1.1: spectral radius of df at tau < 1", subject,
                      rho < 1 - 1e-6, spectral_radius=rho))
    # iteration tolerance shrunk by (1 - rho) so each limit is within TOL of tau
    tight = max(TOL * min(1.0, 1.0 - rho), 1e-15) if rho < 1 else TOL
    starts = sample_points(dom, 20, _seed(seed, subject, "starts"))
    taus = []
    try:
        for st in starts:
            taus.append(iterate_to_fixed_point(fmap, dom, y, st, tol=tight).fixed_point)
    except IterationError as exc:
        out.append(_check("thm1_1.uniqueness", "Thm 1.1: unique fixed point", subject, False,
                          error=str(exc)))
    else:
        spread = max(float(np.linalg.norm(a - b)) for a, b in combinations(taus, 2))
        out.append(_check("thm1_1.uniqueness", "Thm 1.1: unique fixed point", subject,
                          spread <= 2 * TOL, max_pairwise_distance=spread, starts=len(starts),
                          iteration_tol=tight))
    if expected is not None:
        err = float(np.linalg.norm(base.fixed_point - np.asarray(expected["tau"], dtype=complex)))
        rho_err = abs(rho - expected["rho"])
        out.append(_check("thm1_1.closed_form", "Thm 1.1 + Rem 1.1: closed-form tau and rho", subject,
                          err <= 1e-9 and rho_err <= 1e-9, tau_error=err, rho_error=rho_err))
    # orbit monotonicity toward tau
    fine = iterate_to_fixed_point(fmap, dom, y, tol=1e-13 * min(1.0, 1.0 - rho) if rho < 1 else 1e-13)
    tau = fine.fixed_point
    start = sample_points(dom, 1, _seed(seed, subject, "orbit"), shell=0.9)[0]
    orbit = iterate_to_fixed_point(fmap, dom, y, start, tol=TOL, record_orbit=True).orbit
    dists = [dom.kobayashi_distance(p, tau) for p in orbit]
    excess = max((b - a for a, b in zip(dists, dists[1:])), default=0.0)
    out.append(_check("dynamics.orbit_monotone", "Lemma 2.1 proof: k(f^k z, tau) non-increasing",
                      subject, excess <= 1e-12, max_increase=excess, orbit_length=len(orbit)))
    return out


def check_rate(fmap, dom, y, subject, seed, after: int = 20) -> Check:
    """Residual ratio of plain iteration tends to the spectral radius (affine maps)."""
    rho = spectral_radius(jacobian_symbolic(fmap, dom.center, y))
    start = sample_points(dom, 1, _seed(seed, subject, "rate"), shell=0.5)[0]
    z = list(start)
    res = []
    for _ in range(after + 3):
        fz = fmap.call(z, y)
        res.append(math.sqrt(sum(abs(a - b) ** 2 for a, b in zip(fz, z))))
        z = list(fz)
    if res[after] == 0 or rho == 0:
        return _check("dynamics.rate", "Thm 1.1: geometric convergence at rate rho", subject,
                      res[after] == 0, spectral_radius=rho, note="residual vanished")
    # two-step geometric mean copes with eigenvalues of equal modulus (e.g. +-rho)
    observed = math.sqrt(res[after + 2] / res[after])
    rel = abs(observed - rho) / rho
    return _check("dynamics.rate", "Thm 1.1: geometric convergence at rate rho", subject,
                  rel <= 0.05, observed_ratio=observed, spectral_radius=rho, relative_error=rel)


def check_lemma22_on_map(fmap, dom, y, subject, seed, count: int = 20) -> Check:
    s = _seed(seed, subject, "lemma22")
    a_pts = sample_points(dom, count, s)
    b_pts = sample_points(dom, count, s + 1)
    worst = 0.0
    limit = 0.0
    for p0, z in zip(a_pts, b_pts):
        a = segment_factorization(fmap, p0, z, 32, y)
        lhs = np.asarray(fmap.call(z, y)) - np.asarray(fmap.call(p0, y))
        worst = max(worst, float(np.linalg.norm(lhs - a @ (np.asarray(z) - np.asarray(p0)))))
        limit = max(limit, float(np.max(np.abs(segment_factorization(fmap, p0, p0, 32, y)
                                               - jacobian_symbolic(fmap, p0, y)))))
    return _check("lemma2_2.factorization", "Lemma 2.2 (i)-(ii): h(z)-h(p0) = A(z)(z-p0), A(p0) = dh",
                  subject, worst < 1e-10 and limit < 1e-12, max_residual=worst, max_limit_error=limit)


def map_checks(defn: MapDefinition, subject: str, seed: int, expected=None, linear=None) -> list[Check]:
    fmap, dom = defn.map, defn.domain
    y = [0j] * fmap.m
    out = [
        check_round_trip(fmap, dom, subject, seed),
        check_cauchy_riemann(fmap, dom, subject, seed),
        check_symbolic_vs_contour(fmap, dom, subject, seed),
        check_metric_axioms(dom, subject, seed),
        check_normalization(dom, subject, seed),
        check_lemma22_on_map(fmap, dom, y, subject, seed),
    ]
    holc = check_holc(fmap, dom, y, subject, seed)
    out.append(holc)
    dependent = [("lemma2_1.contraction", "Lemma 2.1 proof: Kobayashi distance contracted by f"),
                 ("thm1_1.fixed_point", "Thm 1.1: f(tau) = tau"),
                 ("thm1_1.uniqueness", "Thm 1.1: unique fixed point"),
                 ("rem1_1.attraction", "Rem 1.1: spectral radius of df at tau < 1"),
                 ("dynamics.orbit_monotone", "Lemma 2.1 proof: k(f^k z, tau) non-increasing")]
    if not holc.passed:
        out.extend(_skip(i, a, subject, "compact-image hypothesis failed") for i, a in dependent)
        return out
    out.append(check_contraction(fmap, dom, y, subject, seed))
    out.extend(check_fixed_point_suite(fmap, dom, y, subject, seed, expected))
    if (linear if linear is not None else affine_map(fmap)):
        out.append(check_rate(fmap, dom, y, subject, seed))
    return out


def affine_map(fmap: HolomorphicMap) -> bool:
    """True when every second space derivative is identically zero."""
    from .expr import Const, symbolic_partial

    for c in fmap.components:
        for a in fmap.space_vars:
            da = symbolic_partial(c, a)
            for b in fmap.space_vars:
                node = symbolic_partial(da, b).ast
                if not (isinstance(node, Const) and node.value == 0):
                    return False
    return True


# ----------------------------------------------------------------- families


def family_checks(defn: MapDefinition, y0, subject: str, seed: int, expected_dtau=None) -> list[Check]:
    out = [
        check_round_trip(defn.map, defn.domain, subject, seed),
        check_metric_axioms(defn.domain, subject, seed),
    ]
    anchor = "Thm 2.3 hypothesis: every f_y in Hol_c"
    try:
        family = ParametricFamily(defn.map, defn.domain, defn.param_domain, seed=_seed(seed, subject, "fam"))
    except (HolcViolation, EvaluationFailure) as exc:
        out.append(_check("heins.family_holc", anchor, subject, False, error=str(exc)))
        return out
    out.append(_check("heins.family_holc", anchor, subject, True, validated_parameters=family.validation_samples))
    y0 = np.asarray(y0, dtype=complex)
    try:
        rep = heins_differential(family, y0, tol=1e-13, fd_step=1e-4)
    except HeinslabError as exc:
        out.append(_check("thm2_3.formula_vs_oracle", "Thm 2.3: differential formula vs finite differences",
                          subject, False, error=str(exc)))
        return out
    out.append(_check("thm2_3.formula_vs_oracle", "Thm 2.3: differential formula vs finite differences",
                      subject, rep.fd_agreement < 1e-6, d_tau=rep.d_tau, fd_dtau=rep.fd_dtau,
                      max_abs_difference=rep.fd_agreement))
    out.append(_check("thm2_3.consistency", "Thm 2.3: (I - df) d_tau = dF(., 0)", subject,
                      rep.consistency <= 1e-12 and rep.spectral_radius < 1,
                      residual=rep.consistency, spectral_radius=rep.spectral_radius))
    if expected_dtau is not None:
        err = abs(complex(rep.d_tau[0, 0]) - expected_dtau)
        out.append(_check("thm2_3.closed_form", "Thm 2.3: closed-form derivative of tau", subject,
                          err <= 1e-12, d_tau=rep.d_tau[0, 0], expected=expected_dtau, error=err))

    # displacement identity at random nearby parameters
    reach = 0.5 * family.param_domain.boundary_distance(list(y0))
    ball = DomainSpec("disk" if len(y0) == 1 else "ball", tuple(y0), (reach,))
    ys = sample_points(ball, 20, _seed(seed, subject, "eq21"))
    worst = max(displacement_identity_residual(family, y0, y) for y in ys)
    out.append(_check("eq2_1.identity", "Eq 2.1: p_y - p_0 = (I - A(y))^-1 h_y(p_y)", subject,
                      worst <= 1e-9, max_residual=worst, displacements=len(ys)))

    ladder = remainder_ladder(family, y0, seed=_seed(seed, subject, "ladder"))
    slope = ladder["remainder_slope"]
    degenerate = max(ladder["remainder"]) <= 1e-13
    ok = degenerate or (slope is not None and abs(slope - 2) <= 0.1)
    detail = dict(ladder)
    if degenerate:
        detail["note"] = "remainder vanishes identically (h_y constant in z)"
    out.append(_check("thm2_3.quadratic_remainder", "Thm 2.3 proof: |h_y(p_y) - h_y(p_0)| = O(|y-y0|^2)",
                      subject, ok, **detail))
    s1 = ladder["sup_h_slope"]
    out.append(_check("thm2_3.first_order", "Thm 2.3 proof: sup |h_y| = O(|y-y0|)", subject,
                      s1 is not None and abs(s1 - 1) <= 0.1, steps=ladder["steps"],
                      sup_h=ladder["sup_h"], slope=s1))

    w = wirtinger_antiholomorphic_norm(family, y0, 1e-4)
    out.append(_check("cor2_4.holomorphy", "Cor 2.4: tau is holomorphic (d tau / d conj y = 0)", subject,
                      w < 1e-6, wirtinger_norm=w, step=1e-4))

    radii = [1e-2, 1e-3, 1e-4]
    disp = [perturbation_continuity_probe(family, y0, r, seed=_seed(seed, subject, "cont", r))
            for r in radii]
    bound = dtau_norm(rep) + 1
    ok = all(a > b for a, b in zip(disp, disp[1:])) and all(d <= bound * r for d, r in zip(disp, radii))
    out.append(_check("lemma2_1.continuity", "Lemma 2.1: tau is continuous in the parameter", subject,
                      ok, radii=radii, displacement=disp, bound_factor=bound))
    return out


# ------------------------------------------------------------- global suites


def charpoly_radius(m) -> float:
    """Spectral radius from closed-form roots of the characteristic polynomial (n <= 3)."""
    a = np.asarray(m, dtype=complex)
    n = a.shape[0]
    if n == 1:
        return abs(a[0, 0])
    if n == 2:
        tr, det = a[0, 0] + a[1, 1], a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = cmath.sqrt(tr * tr - 4 * det)
        return max(abs((tr + disc) / 2), abs((tr - disc) / 2))
    if n == 3:
        # x^3 + b x^2 + c x + d
        b = -np.trace(a)
        c = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0] + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
             + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        d = -np.linalg.det(a)
        return max(abs(r) for r in cubic_roots(complex(b), complex(c), complex(d)))
    raise ValueError("closed form only for n <= 3")


def cubic_roots(b: complex, c: complex, d: complex) -> list[complex]:
    """Roots of x^3 + b x^2 + c x + d by Cardano's formula."""
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    disc = cmath.sqrt(q * q / 4 + p**3 / 27)
    u3 = -q / 2 + disc
    if abs(u3) < abs(-q / 2 - disc):
        u3 = -q / 2 - disc
    omega = complex(-0.5, math.sqrt(3) / 2)
    if u3 == 0:
        ts = [0j, 0j, 0j]
    else:
        u = u3 ** (1 / 3)
        ts = [u * omega**k - p / (3 * u * omega**k) for k in range(3)]
    roots = [t - b / 3 for t in ts]
    # one Newton polish step per root
    out = []
    for r in roots:
        for _ in range(2):
            f = r**3 + b * r**2 + c * r + d
            df = 3 * r**2 + 2 * b * r + c
            if df != 0:
                r -= f / df
        out.append(r)
    return out


def global_checks(seed: int) -> list[Check]:
    out = []
    rng = np.random.Generator(np.random.PCG64(_seed(seed, "global")))

    # Lemma 2.2 on random maps
    worst, limit = 0.0, 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        h = fixtures.random_polynomial_map(rng, n, degree=4)
        dom = DomainSpec.unit_polydisk(n)
        p0, z = sample_points(dom, 2, int(rng.integers(2**31)))
        a = segment_factorization(h, p0, z, 32)
        lhs = np.asarray(h.call(z)) - np.asarray(h.call(p0))
        worst = max(worst, float(np.linalg.norm(lhs - a @ (np.asarray(z) - np.asarray(p0)))))
        limit = max(limit, float(np.max(np.abs(segment_factorization(h, p0, p0, 32)
                                               - jacobian_symbolic(h, p0)))))
    out.append(_check("lemma2_2.factorization", "Lemma 2.2 (i)-(ii): h(z)-h(p0) = A(z)(z-p0), A(p0) = dh",
                      "random_maps", worst < 1e-10 and limit < 1e-12, max_residual=worst,
                      max_limit_error=limit, maps=50))

    ratios = []
    for n in (1, 2):
        inner = DomainSpec("polydisk", (0j,) * n, (0.5,) * n)
        outer = DomainSpec.unit_polydisk(n)
        for _ in range(25):
            h = fixtures.random_polynomial_map(rng, n, degree=4, with_exp=False)
            r = factorization_norm_ratio(h, inner, outer, samples=32, seed=int(rng.integers(2**31)))
            ratios.append((n, r["ratio"]))
    ok = all(r <= 2 * n + 1e-9 for n, r in ratios)
    out.append(_check("lemma2_2.cauchy_bound", "Lemma 2.2 (iii): sup|A| over P1 <= C sup|h|, C = 2n",
                      "random_maps", ok, max_ratio_n1=max(r for n, r in ratios if n == 1),
                      max_ratio_n2=max(r for n, r in ratios if n == 2), maps=len(ratios)))

    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        h = fixtures.random_polynomial_map(rng, n, degree=4)
        p = sample_points(DomainSpec.unit_polydisk(n), 1, int(rng.integers(2**31)))[0]
        js = jacobian_symbolic(h, p)
        jc = jacobian_contour(h, p, radius=0.5)
        worst = max(worst, float(np.max(np.abs(js - jc))) / max(1.0, float(np.max(np.abs(js)))))
    out.append(_check("calculus.symbolic_vs_contour", "Rem 1.1: Jacobian, symbolic vs Cauchy contour",
                      "random_maps", worst < 1e-9, max_relative_error=worst, maps=50))

    worst = 0.0
    for _ in range(60):
        n = int(rng.integers(1, 4))
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        worst = max(worst, abs(spectral_radius(m) - charpoly_radius(m)))
    out.append(_check("calculus.spectral_radius", "Rem 1.1: spectral radius vs characteristic roots",
                      "random_matrices", worst <= 1e-9, max_abs_error=worst, matrices=60))

    worst = 0.0
    for k in range(20):
        n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        fam = fixtures.random_polynomial_family(rng, n, m)
        y0 = sample_points(DomainSpec("polydisk", (0j,) * m, (0.5,) * m), 1, int(rng.integers(2**31)))[0]
        rep = heins_differential(fam, y0, fd_step=1e-4)
        worst = max(worst, rep.fd_agreement)
    out.append(_check("thm2_3.formula_vs_oracle", "Thm 2.3: differential formula vs finite differences",
                      "random_families", worst < 1e-6, max_abs_difference=worst, families=20))
    return out


# ----------------------------------------------------------------- drivers


def verify_builtin(seed: int) -> list[Check]:
    checks = []
    for name, data in fixtures.MAPS.items():
        checks += map_checks(fixtures.definition(data), f"map:{name}", seed,
                             fixtures.EXPECTED.get(name), name in fixtures.LINEAR)
    for name, data in fixtures.FAMILIES.items():
        y0 = [complex(*p) if isinstance(p, list) else complex(p) for p in data["y0"]]
        checks += family_checks(fixtures.definition(data), y0, f"family:{name}", seed,
                                fixtures.EXPECTED_DTAU.get(name))
    checks += global_checks(seed)
    return sort_checks(checks)


def verify_definition(defn: MapDefinition, seed: int, y0=None) -> list[Check]:
    subject = defn.name
    if defn.param_domain is None:
        checks = map_checks(defn, subject, seed)
    else:
        y0 = defn.param_domain.center if y0 is None else y0
        checks = family_checks(defn, y0, subject, seed)
    return sort_checks(checks)


def sort_checks(checks: list[Check]) -> list[Check]:
    return sorted(checks, key=lambda c: (c.subject, c.id))
