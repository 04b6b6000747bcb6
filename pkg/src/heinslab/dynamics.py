"""Fixed-point iteration for self-maps with relatively compact image.

A holomorphic self-map of a bounded domain whose image stays a positive
distance away from the boundary has exactly one fixed point, and its
iterates converge to it from every starting point. :func:`iterate_to_fixed_point`
runs that plain iteration (no acceleration) and certifies the result with
the spectral radius of the Jacobian at the fixed point, which must be < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import jacobian_symbolic, spectral_radius
from .domains import DomainSpec, boundary_points, sample_points
from .errors import HeinslabError, NumericOverflow
from .expr import HolomorphicMap

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
SHELL = 0.99
# images of boundary points may land this far outside through rounding alone
_OUTSIDE_SLACK = 1e-12


class IterationError(HeinslabError):
    pass


class MaxIterationsExceeded(IterationError):
    """No convergence within the budget.

    Either the contraction is very slow or the map does not have a
    relatively compact image.
    """

    def __init__(self, msg, last_iterate, residual, iterations):
        super().__init__(msg)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class IterateLeftDomain(IterationError):
    def __init__(self, msg, witness, step):
        super().__init__(msg)
        self.witness = witness
        self.step = step


class EvaluationFailure(HeinslabError):
    """The map failed on a sample point or sent it outside the domain."""

    def __init__(self, msg, witness, image=None):
        super().__init__(msg)
        self.witness = witness
        self.image = image


@dataclass
class CompactImageReport:
    is_compact: bool
    min_boundary_margin: float
    samples_used: int
    margin: float
    witness: tuple | None = None

    def to_json(self) -> dict:
        from .io import complex_vector_to_json

        return {
            "is_compact": self.is_compact,
            "min_boundary_margin": self.min_boundary_margin,
            "margin_threshold": self.margin,
            "samples_used": self.samples_used,
            "witness": None if self.witness is None else complex_vector_to_json(self.witness),
        }


@dataclass
class FixedPointResult:
    fixed_point: np.ndarray
    iterations: int
    residual: float
    spectral_radius: float
    converged: bool
    orbit: list | None = field(default=None, repr=False)

    def to_json(self, include_orbit: bool = True) -> dict:
        from .io import complex_vector_to_json

        out = {
            "fixed_point": complex_vector_to_json(self.fixed_point),
            "iterations": self.iterations,
            "residual": self.residual,
            "spectral_radius": self.spectral_radius,
            "converged": self.converged,
        }
        if include_orbit and self.orbit is not None:
            out["orbit"] = [complex_vector_to_json(p) for p in self.orbit]
        return out


def _dist2(u, v) -> float:
    s = 0.0
    for a, b in zip(u, v):
        d = a - b
        s += d.real * d.real + d.imag * d.imag
    return s


def check_compact_image(map: HolomorphicMap, dom: DomainSpec, y=(), margin: float = 1e-6,
                        samples: int = 200, seed: int = 0) -> CompactImageReport:
    """Sampling evidence that ``f_y(dom)`` is relatively compact in ``dom``.

    The map is evaluated on ``samples`` points of the boundary shell
    (relative radius >= 0.99), ``samples`` points of the boundary itself
    (the distinguished boundary for a polydisk) and ``samples // 2``
    interior points. The image of the closed domain is compact and lies
    in ``dom`` exactly when the smallest boundary distance of these images
    stays positive, so the reported minimum is necessary evidence, not a
    proof. ``is_compact`` is true iff that minimum is at least ``margin``.
    """
    if samples < 100:
        raise ValueError("check_compact_image needs at least 100 samples")
    if margin <= 0:
        raise ValueError("margin must be positive")
    y = [complex(v) for v in y]
    pts = (boundary_points(dom, samples, seed)
           + sample_points(dom, samples, seed + 1, shell=SHELL)
           + sample_points(dom, samples // 2, seed + 2))
    best = math.inf
    witness = None
    for p in pts:
        try:
            img = map.call(p, y)
        except NumericOverflow as exc:
            raise EvaluationFailure(f"map fails at {p}: {exc}", p) from None
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in img):
            raise EvaluationFailure(f"map is not finite at {p}", p, img)
        d = dom._bdist(img)
        if d < -_OUTSIDE_SLACK:
            raise EvaluationFailure(f"f({p}) = {img} lies outside the {dom.kind}; not a self-map", p, img)
        if d < best:
            best, witness = d, p
    return CompactImageReport(best >= margin, best, len(pts), margin, witness)


def _certificate(map, y, tau) -> float:
    return spectral_radius(jacobian_symbolic(map, tau, y, "space"))


def iterate_to_fixed_point(map: HolomorphicMap, dom: DomainSpec, y=(), start=None,
                           tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                           record_orbit: bool = False, check_image: bool = False,
                           image_margin: float = 1e-6, seed: int = 0) -> FixedPointResult:
    """Iterate ``z <- f_y(z)`` until both the step and the residual drop below ``tol``.

    ``start`` defaults to the domain center. With ``check_image`` the
    compact-image check runs first and a failing verdict raises
    :class:`EvaluationFailure` carrying the witness.

    ``converged`` on the result additionally requires the spectral-radius
    certificate to be below one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = [complex(v) for v in y]
    if check_image:
        report = check_compact_image(map, dom, y, image_margin, seed=seed)
        if not report.is_compact:
            raise EvaluationFailure(
                f"image is not relatively compact (boundary margin {report.min_boundary_margin:.3e}"
                f" < {image_margin})", report.witness)
    z = list(dom.center) if start is None else [complex(v) for v in np.atleast_1d(start)]
    if not dom.contains(z):
        raise IterateLeftDomain(f"start {z} is not inside the {dom.kind}", tuple(z), 0)
    fn = map._fn
    contains = dom._inside
    orbit = [tuple(z)] if record_orbit else None
    tol2 = tol * tol
    step = 0
    try:
        fz = fn(*z, *y)
        while step < max_iter:
            step += 1
            z_next = fz
            if not contains(z_next):
                raise IterateLeftDomain(
                    f"iterate {step} = {z_next} left the {dom.kind}; the map is not a self-map",
                    tuple(z_next), step)
            if record_orbit:
                orbit.append(tuple(z_next))
            fz = fn(*z_next, *y)
            z_prev, z = z, z_next
            if _dist2(fz, z) < tol2 and _dist2(z, z_prev) < tol2:
                break
        else:
            residual = math.sqrt(_dist2(fz, z))
            raise MaxIterationsExceeded(
                f"no convergence after {max_iter} iterations (residual {residual:.3e}); "
                "the contraction is slow or the image is not relatively compact",
                tuple(z), residual, max_iter)
    except (ZeroDivisionError, OverflowError) as exc:
        raise IterateLeftDomain(f"map failed during iteration: {exc}", tuple(z), step) from None
    residual = math.sqrt(_dist2(fz, z))
    rho = _certificate(map, y, z)
    return FixedPointResult(np.array(z, dtype=complex), step, residual, rho, rho < 1.0, orbit)


def orbit_trace(map: HolomorphicMap, dom: DomainSpec, y=(), start=None, count: int = 10) -> list[tuple]:
    """The first ``count`` iterates ``f(start), f(f(start)), ...``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    y = [complex(v) for v in y]
    z = tuple(dom.center) if start is None else tuple(complex(v) for v in np.atleast_1d(start))
    if not dom.contains(z):
        raise IterateLeftDomain(f"start {z} is not inside the {dom.kind}", z, 0)
    out = []
    for k in range(1, count + 1):
        z = map.call(z, y)
        if not dom.contains(z):
            raise IterateLeftDomain(f"iterate {k} = {z} left the {dom.kind}", z, k)
        out.append(z)
    return out
