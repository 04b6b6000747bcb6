"""Fixed points of parametric families and their holomorphic dependence.

For a family ``F(y, z)`` with every ``f_y = F(y, .)`` a self-map with
relatively compact image, ``tau_F(y)`` is the unique fixed point of ``f_y``.
Its differential at ``y0`` is

    d tau_F(y0) = (I - d_z F(y0, tau))^{-1} d_y F(y0, tau),

and the inverse exists because the spectral radius of ``d_z F(y0, tau)``
is below one at an attracting fixed point. The finite-difference,
Wirtinger and continuity probes in this module are independent numerical
checks of that formula and of holomorphy.

Solves that feed difference quotients default to ``tol=1e-13``: with a
step of 1e-4 the solver noise in a quotient is roughly ``tol / step``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import jacobian_symbolic, operator_norm, segment_factorization, solve, spectral_radius
from .domains import DomainSpec, boundary_points, sample_points
from .dynamics import DEFAULT_MAX_ITER, DEFAULT_TOL, check_compact_image, iterate_to_fixed_point
from .errors import DimensionMismatch, HeinslabError, PointOutsideDomain, SingularMatrix
from .expr import HolomorphicMap

PROBE_TOL = 1e-13
DEFAULT_STEP = 1e-4


class HolcViolation(HeinslabError):
    """Some ``f_y`` in the family is not a self-map with relatively compact image."""

    def __init__(self, msg, param, report=None):
        super().__init__(msg)
        self.param = param
        self.report = report


class InconsistentCertificate(SingularMatrix):
    """``I - df`` was singular although the fixed point looked attracting."""


@dataclass(frozen=True)
class ParametricFamily:
    """A jointly holomorphic family ``F(y, z)`` over ``param_domain x space_domain``.

    Construction checks the compact-image property of ``f_y`` on a seeded
    sample of ``validation_samples`` parameters.
    """

    map: HolomorphicMap
    space_domain: DomainSpec
    param_domain: DomainSpec
    validation_samples: int = 64
    seed: int = 0
    image_margin: float = 1e-6

    def __post_init__(self):
        if self.map.m < 1:
            raise DimensionMismatch("a parametric family needs at least one parameter")
        if self.space_domain.n != self.map.n:
            raise DimensionMismatch(f"space domain is in C^{self.space_domain.n}, map in C^{self.map.n}")
        if self.param_domain.n != self.map.m:
            raise DimensionMismatch(
                f"parameter domain is in C^{self.param_domain.n}, map has {self.map.m} parameters")
        if self.validation_samples > 0:
            for i, y in enumerate(sample_points(self.param_domain, self.validation_samples, self.seed)):
                report = check_compact_image(self.map, self.space_domain, y, self.image_margin,
                                             samples=100, seed=self.seed + 17 * i)
                if not report.is_compact:
                    raise HolcViolation(
                        f"f_y for y={y} has boundary margin {report.min_boundary_margin:.3e} "
                        f"< {self.image_margin}", y, report)

    def f(self, y) -> HolomorphicMap:
        return self.map.specialize(list(y))


@dataclass
class HeinsReport:
    y0: np.ndarray
    tau: np.ndarray
    d_tau: np.ndarray
    jac_space: np.ndarray
    jac_param: np.ndarray
    spectral_radius: float
    iterations: int
    fd_dtau: np.ndarray | None = None
    fd_agreement: float | None = None
    consistency: float = field(default=0.0)

    def to_json(self) -> dict:
        from .io import complex_vector_to_json, matrix_to_json

        out = {
            "y0": complex_vector_to_json(self.y0),
            "tau": complex_vector_to_json(self.tau),
            "d_tau": matrix_to_json(self.d_tau),
            "jac_space": matrix_to_json(self.jac_space),
            "jac_param": matrix_to_json(self.jac_param),
            "spectral_radius": self.spectral_radius,
            "iterations": self.iterations,
            "consistency": self.consistency,
        }
        if self.fd_dtau is not None:
            out["fd_dtau"] = matrix_to_json(self.fd_dtau)
            out["fd_agreement"] = self.fd_agreement
        return out


def _vec(y) -> np.ndarray:
    return np.atleast_1d(np.asarray(y, dtype=complex))


def _require_inside(family: ParametricFamily, y) -> None:
    if not family.param_domain.contains(list(y)):
        raise PointOutsideDomain(f"parameter {list(y)} is not inside the parameter domain", tuple(y))


def heins_tau(family: ParametricFamily, y, tol: float = DEFAULT_TOL,
              max_iter: int = DEFAULT_MAX_ITER, start=None) -> np.ndarray:
    """The unique fixed point of ``f_y``."""
    y = _vec(y)
    _require_inside(family, y)
    return iterate_to_fixed_point(family.map, family.space_domain, list(y), start,
                                  tol, max_iter).fixed_point


def heins_differential(family: ParametricFamily, y0, tol: float = DEFAULT_TOL,
                       fd_step: float | None = None, fd_tol: float = PROBE_TOL) -> HeinsReport:
    """Differential of ``tau_F`` at ``y0`` from the closed formula.

    With ``fd_step`` the central-difference oracle is attached and
    ``fd_agreement`` holds the largest entrywise deviation from it.
    """
    y0 = _vec(y0)
    _require_inside(family, y0)
    res = iterate_to_fixed_point(family.map, family.space_domain, list(y0), tol=tol)
    tau = res.fixed_point
    j_space = jacobian_symbolic(family.map, tau, y0, "space")
    j_param = jacobian_symbolic(family.map, tau, y0, "params")
    rho = spectral_radius(j_space)
    if not rho < 1:
        raise InconsistentCertificate(f"spectral radius {rho} >= 1 at the fixed point; formula does not apply")
    lhs = np.eye(family.map.n) - j_space
    try:
        d_tau = solve(lhs, j_param)
    except SingularMatrix as exc:
        raise InconsistentCertificate(f"I - df is singular although spectral radius is {rho}: {exc}") from None
    consistency = float(np.max(np.abs(lhs @ d_tau - j_param)))
    report = HeinsReport(y0, tau, d_tau, j_space, j_param, rho, res.iterations, consistency=consistency)
    if fd_step is not None:
        report.fd_dtau = finite_difference_dtau(family, y0, fd_step, fd_tol)
        report.fd_agreement = float(np.max(np.abs(report.fd_dtau - d_tau)))
    return report


def finite_difference_dtau(family: ParametricFamily, y0, step: float = DEFAULT_STEP,
                           tol: float = PROBE_TOL) -> np.ndarray:
    """Central differences ``(tau(y0 + s e_j) - tau(y0 - s e_j)) / (2 s)``, column by column."""
    y0 = _vec(y0)
    cols = []
    for j in range(len(y0)):
        e = np.zeros(len(y0), dtype=complex)
        e[j] = step
        for y in (y0 + e, y0 - e):
            _require_inside(family, y)
        plus = heins_tau(family, y0 + e, tol)
        minus = heins_tau(family, y0 - e, tol)
        cols.append((plus - minus) / (2 * step))
    return np.column_stack(cols)


def wirtinger_antiholomorphic_norm(family: ParametricFamily, y0, step: float = DEFAULT_STEP,
                                   tol: float = PROBE_TOL) -> float:
    """Stencil estimate of ``d tau / d conj(y)``, maximised over parameter coordinates.

    Uses ``(tau(y+h) - tau(y-h) + i tau(y+ih) - i tau(y-ih)) / (4h)``, which
    is O(h^2) for holomorphic ``tau``.
    """
    y0 = _vec(y0)
    worst = 0.0
    for j in range(len(y0)):
        e = np.zeros(len(y0), dtype=complex)
        e[j] = step
        pts = [y0 + e, y0 - e, y0 + 1j * e, y0 - 1j * e]
        for y in pts:
            _require_inside(family, y)
        t = [heins_tau(family, y, tol) for y in pts]
        est = (t[0] - t[1] + 1j * t[2] - 1j * t[3]) / (4 * step)
        worst = max(worst, float(np.linalg.norm(est)))
    return worst


def _param_ball(y0: np.ndarray, radius: float) -> DomainSpec:
    kind = "disk" if len(y0) == 1 else "ball"
    return DomainSpec(kind, tuple(y0), (radius,))


def perturbation_continuity_probe(family: ParametricFamily, y0, radius: float, trials: int = 16,
                                  seed: int = 0, tol: float = PROBE_TOL) -> float:
    """Largest ``||tau(y) - tau(y0)||`` over ``trials`` random ``y`` within ``radius`` of ``y0``."""
    y0 = _vec(y0)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0:
        return 0.0
    _require_inside(family, y0)
    if family.param_domain.boundary_distance(list(y0)) <= radius:
        raise PointOutsideDomain(f"ball of radius {radius} around {list(y0)} leaves the parameter domain")
    base = heins_tau(family, y0, tol)
    ys = sample_points(_param_ball(y0, radius), trials, seed)
    return max(float(np.linalg.norm(heins_tau(family, y, tol) - base)) for y in ys)


def displacement_identity_residual(family: ParametricFamily, y0, y, quad_nodes: int = 32,
                                   tol: float = PROBE_TOL) -> float:
    """Residual of ``p_y - p_0 = (I - A(y))^{-1} h_y(p_y)``.

    ``A(y)`` is the segment factorization of ``f_{y0}`` between the two
    fixed points ``p_0 = tau(y0)`` and ``p_y = tau(y)``, and
    ``h_y = f_y - f_{y0}``.
    """
    y0, y = _vec(y0), _vec(y)
    p0 = heins_tau(family, y0, tol)
    py = heins_tau(family, y, tol)
    a = segment_factorization(family.map, p0, py, quad_nodes, y=list(y0))
    h = _h(family, y, y0, py)
    rhs = solve(np.eye(family.map.n) - a, h)
    return float(np.linalg.norm((py - p0) - rhs))


def _h(family: ParametricFamily, y, y0, z) -> np.ndarray:
    z = list(z)
    return np.asarray(family.map.call(z, list(y)), dtype=complex) - np.asarray(
        family.map.call(z, list(y0)), dtype=complex)


def _direction(m: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    d = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return d / np.linalg.norm(d)


def remainder_ladder(family: ParametricFamily, y0, steps=(1e-2, 1e-3, 1e-4), seed: int = 0,
                     tol: float = PROBE_TOL, sup_samples: int = 256) -> dict:
    """Scaling data for ``h_y = f_y - f_{y0}`` along a fixed direction.

    For each ``s`` in ``steps`` and ``y = y0 + s d`` records the second-order
    remainder ``||h_y(p_y) - h_y(p_0)||`` and the first-order size
    ``sup ||h_y||`` over the polydisk ``P1`` centred at ``p_0`` with radius
    half its boundary distance (sampled on the distinguished boundary of
    ``P1``, where the sup is attained).
    """
    y0 = _vec(y0)
    d = _direction(len(y0), seed)
    p0 = heins_tau(family, y0, tol)
    r1 = 0.5 * family.space_domain.boundary_distance(list(p0))
    p1 = DomainSpec("polydisk", tuple(p0), (r1,) * len(p0))
    torus = boundary_points(p1, sup_samples, seed + 1)
    remainders, sups = [], []
    for s in steps:
        y = y0 + s * d
        _require_inside(family, y)
        py = heins_tau(family, y, tol)
        remainders.append(float(np.linalg.norm(_h(family, y, y0, py) - _h(family, y, y0, p0))))
        sups.append(max(float(np.linalg.norm(_h(family, y, y0, z))) for z in torus))
    return {
        "steps": list(steps),
        "remainder": remainders,
        "remainder_slope": loglog_slope(steps, remainders),
        "sup_h": sups,
        "sup_h_slope": loglog_slope(steps, sups),
    }


def loglog_slope(xs, ys) -> float | None:
    """Least-squares slope of ``log ys`` against ``log xs``; None if any y is 0."""
    if any(v <= 0 for v in ys):
        return None
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def dtau_norm(report: HeinsReport) -> float:
    return operator_norm(report.d_tau)
