"""Complex differentiation and small dense linear algebra.

Matrices are ``numpy`` arrays of dtype ``complex128``; reports serialise them
as nested ``[re, im]`` pairs (see :mod:`heinslab.io`).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .domains import DomainSpec
from .errors import DimensionMismatch, HeinslabError, SingularMatrix
from .expr import HolomorphicMap

PIVOT_THRESHOLD = 1e-13
DEFAULT_QUAD_NODES = 32
DEFAULT_CONTOUR_NODES = 32


class CircleLeavesDomain(HeinslabError, ValueError):
    pass


class NonSquare(HeinslabError, ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


# ---------------------------------------------------------------- Jacobians


def jacobian_symbolic(map: HolomorphicMap, z, y=(), wrt: str = "space") -> np.ndarray:
    """Exact Jacobian from the symbolic partials.

    ``wrt="space"`` gives the n x n matrix of ``d f_i / d z_j``,
    ``wrt="params"`` the n x m matrix of ``d f_i / d y_j``.
    """
    return map.jacobian_values(list(np.atleast_1d(z)), list(y), wrt)


def default_contour_radius(dom: DomainSpec, z) -> float:
    """Half the distance from ``z`` to the boundary, capped at 0.5."""
    return min(0.5, 0.5 * dom.boundary_distance(z))


def _circle_fits(dom: DomainSpec, z, j: int, radius: float) -> bool:
    u = dom.normalize(z)
    if dom.kind == "polydisk":
        return abs(u[j]) + radius / dom.radii[j] < 1
    # farthest point of the circle from the center, in unit-model coordinates
    r = radius / dom.radii[0]
    rest = sum(abs(v) ** 2 for k, v in enumerate(u) if k != j)
    return math.sqrt(rest + (abs(u[j]) + r) ** 2) < 1


def jacobian_contour(map: HolomorphicMap, z, y=(), radius: float | None = None,
                     nodes: int = DEFAULT_CONTOUR_NODES, domain: DomainSpec | None = None) -> np.ndarray:
    """Jacobian by the trapezoid rule on the Cauchy integral.

    Entry (i, j) is ``(1/N) sum_k f_i(z + r e^{i t_k} e_j) e^{-i t_k} / r``
    over N equispaced angles. For entire components the error decays
    geometrically in N.
    """
    z = [complex(v) for v in np.atleast_1d(z)]
    y = [complex(v) for v in y]
    if len(z) != map.n or len(y) != map.m:
        raise DimensionMismatch(f"map expects (n={map.n}, m={map.m}), got ({len(z)}, {len(y)})")
    if nodes < 8:
        raise ValueError("contour quadrature needs at least 8 nodes")
    if radius is None:
        radius = default_contour_radius(domain, z) if domain is not None else 0.5
    if not radius > 0:
        raise CircleLeavesDomain(f"contour radius must be positive, got {radius}")
    if domain is not None:
        for j in range(map.n):
            if not _circle_fits(domain, z, j, radius):
                raise CircleLeavesDomain(
                    f"circle of radius {radius} around coordinate {j + 1} of {z} leaves the {domain.kind}")
    roots = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    jac = np.zeros((map.n, map.n), dtype=complex)
    for j in range(map.n):
        acc = np.zeros(map.n, dtype=complex)
        for w in roots:
            zz = list(z)
            zz[j] = z[j] + radius * w
            acc += np.asarray(map.call(zz, y), dtype=complex) / w
        jac[:, j] = acc / (nodes * radius)
    if not np.all(np.isfinite(jac)):
        raise ValueError("contour Jacobian is not finite; a pole is probably inside the circle")
    return jac


# -------------------------------------------------------- spectral radius


def spectral_radius(m, seed: int = 0) -> float:
    """Largest eigenvalue modulus of a small square matrix.

    Gelfand's formula ``rho = lim ||M^(2^k)||^(1/2^k)`` is evaluated by
    repeated squaring with renormalisation, which is stable and needs no
    eigensolver. Three seeded power iterations then refine the value when
    they converge to an eigenpair whose modulus agrees with the Gelfand
    estimate. Absolute accuracy is about 1e-9 or better for n <= 8 and
    non-defective dominant eigenvalues.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"spectral radius needs a square matrix, got {a.shape}")
    if a.size == 0:
        return 0.0
    rho = _gelfand(a)
    if rho == 0.0:
        return 0.0
    refined = _power_iteration(a, seed)
    if refined is not None and abs(refined - rho) <= 1e-6 * max(1.0, rho):
        return refined
    return rho


def _gelfand(a: np.ndarray, max_squarings: int = 60) -> float:
    s = np.linalg.norm(a)
    if s == 0:
        return 0.0
    b = a / s
    log_rho = math.log(s)  # log ||a^(2^k)|| / 2^k, updated in place
    prev = math.exp(log_rho)
    for k in range(1, max_squarings + 1):
        b = b @ b
        s = np.linalg.norm(b)
        if s == 0:
            return 0.0
        b /= s
        log_rho += math.log(s) / 2.0**k
        cur = math.exp(log_rho)
        if k > 8 and abs(cur - prev) <= 1e-16 * cur:
            break
        prev = cur
    return math.exp(log_rho)


def _power_iteration(a: np.ndarray, seed: int, restarts: int = 3, iters: int = 100) -> float | None:
    """Run ``restarts`` seeded power iterations side by side.

    Returns the largest |lambda| among the starts whose Rayleigh quotient
    became an eigenpair to 1e-13 relative residual and stopped moving, or
    None. The second condition matters for non-normal matrices, where a
    small residual alone still allows a visibly wrong quotient.
    """
    n = a.shape[0]
    if n == 1:
        return abs(complex(a[0, 0]))
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal((n, restarts)) + 1j * rng.standard_normal((n, restarts))
    x /= np.sqrt(np.sum(np.abs(x) ** 2, axis=0))
    scale = np.linalg.norm(a)
    prev = np.full(restarts, np.inf, dtype=complex)
    for _ in range(iters):
        ax = a @ x
        lam = np.sum(x.conj() * ax, axis=0)
        resid = np.sqrt(np.sum(np.abs(ax - lam * x) ** 2, axis=0))
        done = (resid <= 1e-13 * scale) & (np.abs(lam - prev) <= 1e-15 * np.abs(lam))
        prev = lam
        if np.any(done):
            return float(np.max(np.abs(lam[done])))
        nrm = np.sqrt(np.sum(np.abs(ax) ** 2, axis=0))
        if np.any(nrm == 0):
            return None
        x = ax / nrm
    return None


# ------------------------------------------------------------ linear algebra


def solve(a, b) -> np.ndarray:
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    Raises :class:`SingularMatrix` when a pivot falls below 1e-13 in modulus.
    """
    a = as_matrix(a).copy()
    b = np.asarray(b, dtype=complex)
    vector = b.ndim == 1
    b = (b.reshape(-1, 1) if vector else b).copy()
    n = a.shape[0]
    if a.shape != (n, n):
        raise NonSquare(f"cannot solve with a {a.shape} matrix")
    if b.shape[0] != n:
        raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, expected {n}")
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < PIVOT_THRESHOLD:
            raise SingularMatrix(f"pivot {abs(a[p, k]):.3e} below {PIVOT_THRESHOLD} in column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= np.outer(factors, b[k])
    x = np.zeros_like(b)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x[:, 0] if vector else x


def inverse(a) -> np.ndarray:
    a = as_matrix(a)
    return solve(a, np.eye(a.shape[0], dtype=complex))


def operator_norm(a, seed: int = 0, iters: int = 500) -> float:
    """Operator 2-norm by power iteration on ``A^H A``."""
    a = as_matrix(a)
    if a.size == 0 or not np.any(a):
        return 0.0
    g = a.conj().T @ a
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        gx = g @ x
        nrm = np.linalg.norm(gx)
        if nrm == 0:
            break
        new = float(np.vdot(x, gx).real)
        x = gx / nrm
        if abs(new - lam) <= 1e-15 * abs(new):
            lam = new
            break
        lam = new
    # final Rayleigh quotient with the converged vector
    lam = max(lam, float(np.vdot(x, g @ x).real))
    return math.sqrt(max(lam, 0.0))


# ------------------------------------------------------ segment factorization


@lru_cache(maxsize=None)
def gauss_legendre_unit(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1) / 2, w / 2


def segment_factorization(h: HolomorphicMap, p0, z, quad_nodes: int = DEFAULT_QUAD_NODES,
                          y=()) -> np.ndarray:
    """Matrix ``A(z)`` with ``h(z) - h(p0) = A(z) (z - p0)``.

    ``A_ij(z)`` is the integral over t in [0, 1] of ``d h_i / d z_j`` at
    ``p0 + t (z - p0)``, computed with Gauss-Legendre quadrature. At
    ``z = p0`` it reduces to the Jacobian of ``h`` at ``p0``.
    """
    p0 = np.atleast_1d(np.asarray(p0, dtype=complex))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if len(p0) != h.n or len(z) != h.n:
        raise DimensionMismatch(f"points must lie in C^{h.n}")
    if quad_nodes < 4:
        raise ValueError("segment factorization needs at least 4 quadrature nodes")
    ts, ws = gauss_legendre_unit(quad_nodes)
    jacs = h.jacobian_space_batch(p0 + np.outer(ts, z - p0), y)
    return np.tensordot(ws, jacs, axes=1)


def factorization_norm_ratio(h: HolomorphicMap, inner: DomainSpec, outer: DomainSpec,
                             samples: int = 200, seed: int = 0) -> dict:
    """Compare ``sup ||A||`` over ``inner`` with ``sup ||h||`` over ``outer``.

    ``A`` is the segment factorization based at the common center. The sup
    of ``||h||`` uses the distinguished boundary of ``outer`` (where the
    maximum modulus is attained) on a dense torus grid; ``sup ||A||`` is
    sampled over ``inner``. The Cauchy estimates bound the ratio by
    ``n / (1 - r_inner / r_outer)`` for concentric polydisks.
    """
    from .domains import boundary_points, sample_points

    p0 = np.asarray(inner.center, dtype=complex)
    pts = sample_points(inner, samples, seed) + boundary_points(inner, samples, seed + 1)
    sup_a = max(operator_norm(segment_factorization(h, p0, p)) for p in pts)
    per_axis = max(8, int(round(1024 ** (1.0 / h.n))))
    grids = np.meshgrid(*[np.exp(2j * np.pi * np.arange(per_axis) / per_axis)] * h.n, indexing="ij")
    radii = np.array(outer._coordinate_radii())
    center = np.asarray(outer.center, dtype=complex)
    sup_h = 0.0
    for u in zip(*(g.ravel() for g in grids)):
        pt = center + radii * np.asarray(u)
        sup_h = max(sup_h, float(np.linalg.norm(h.call(list(pt)))))
    ratio = sup_a / sup_h if sup_h > 0 else 0.0
    return {"sup_A": sup_a, "sup_h": sup_h, "ratio": ratio}
