"""Model bounded domains: the disk, the Euclidean ball and the polydisk.

Every domain is the image of its unit model (unit disk, unit ball, unit
polydisk) under an affine map ``u -> center + radius * u`` (coordinatewise
radii for the polydisk), so membership, boundary distance and the Kobayashi
distance are all computed after normalising to the unit model.

Kobayashi distances use the classical closed forms: the Poincare distance
``arctanh |(u - v) / (1 - conj(v) u)|`` on the disk, its maximum over
coordinates on the polydisk, and on the ball

    arctanh sqrt(1 - (1 - |u|^2)(1 - |v|^2) / |1 - <u, v>|^2).

Random points come from numpy's ``PCG64`` bit generator seeded with the
caller's integer seed, so sample lists are bit-reproducible across runs
and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, PointOutsideDomain

KINDS = ("disk", "ball", "polydisk")


def _as_vector(z) -> tuple[complex, ...]:
    if isinstance(z, (complex, float, int)):
        return (complex(z),)
    return tuple(complex(v) for v in z)


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    center: tuple[complex, ...]
    radii: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; expected one of {KINDS}")
        center = _as_vector(self.center)
        radii = tuple(float(r) for r in np.atleast_1d(self.radii))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radii", radii)
        if not center:
            raise DimensionMismatch("domain needs at least one coordinate")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in center):
            raise ValueError("domain center must be finite")
        if not all(math.isfinite(r) and r > 0 for r in radii):
            raise ValueError(f"radii must be positive and finite, got {radii}")
        if self.kind == "disk" and len(center) != 1:
            raise DimensionMismatch("a disk lives in C^1")
        if self.kind == "polydisk":
            if len(radii) != len(center):
                raise DimensionMismatch("polydisk needs one radius per coordinate")
        elif len(radii) != 1:
            raise DimensionMismatch(f"{self.kind} takes a single radius")

    # -- constructors ---------------------------------------------------

    @classmethod
    def unit_disk(cls):
        return cls("disk", (0j,), (1.0,))

    @classmethod
    def unit_ball(cls, n: int):
        return cls("ball", (0j,) * n, (1.0,))

    @classmethod
    def unit_polydisk(cls, n: int):
        return cls("polydisk", (0j,) * n, (1.0,) * n)

    @classmethod
    def from_json(cls, data: dict) -> "DomainSpec":
        from .io import complex_vector_from_json

        try:
            kind = data["kind"]
            center = complex_vector_from_json(data["center"])
            radii = data["radii"]
        except KeyError as exc:
            raise ValueError(f"domain block is missing {exc.args[0]!r}") from None
        if isinstance(radii, (int, float)):
            radii = [radii]
        return cls(kind, tuple(center), tuple(float(r) for r in radii))

    def to_json(self) -> dict:
        from .io import complex_vector_to_json

        return {"kind": self.kind, "center": complex_vector_to_json(self.center),
                "radii": list(self.radii)}

    # -- geometry -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def unit_model(self) -> "DomainSpec":
        if self.kind == "polydisk":
            return DomainSpec("polydisk", (0j,) * self.n, (1.0,) * self.n)
        return DomainSpec(self.kind, (0j,) * self.n, (1.0,))

    def _coordinate_radii(self) -> tuple[float, ...]:
        return self.radii if self.kind == "polydisk" else self.radii * self.n

    def normalize(self, z) -> tuple[complex, ...]:
        """Affine image of ``z`` in the unit model."""
        z = self._check(z)
        return tuple((zj - cj) / rj for zj, cj, rj in zip(z, self.center, self._coordinate_radii()))

    def denormalize(self, u) -> tuple[complex, ...]:
        u = self._check(u)
        return tuple(cj + rj * uj for uj, cj, rj in zip(u, self.center, self._coordinate_radii()))

    def _check(self, z) -> tuple[complex, ...]:
        z = _as_vector(z)
        if len(z) != self.n:
            raise DimensionMismatch(f"expected a point of C^{self.n}, got {len(z)} coordinates")
        return z

    def boundary_distance(self, z) -> float:
        """Signed Euclidean distance to the boundary (negative outside)."""
        return self._bdist(self._check(z))

    def _bdist(self, z) -> float:
        # z: sequence of complex of the right length
        if self.kind == "polydisk":
            return min(r - abs(zj - cj) for zj, cj, r in zip(z, self.center, self.radii))
        norm = math.sqrt(sum(abs(zj - cj) ** 2 for zj, cj in zip(z, self.center)))
        return self.radii[0] - norm

    def relative_radius(self, z) -> float:
        """Minkowski gauge of ``z - center``: < 1 inside, 1 on the boundary."""
        u = self.normalize(z)
        if self.kind == "polydisk":
            return max(abs(uj) for uj in u)
        return math.sqrt(sum(abs(uj) ** 2 for uj in u))

    def contains(self, z, margin: float = 0.0) -> bool:
        if margin < 0:
            raise ValueError("margin must be non-negative")
        return self._inside(self._check(z), margin)

    def _inside(self, z, margin: float = 0.0) -> bool:
        # written as comparisons that nan fails, so non-finite points are never inside
        if self.kind == "polydisk":
            return all(abs(zj - cj) < r - margin for zj, cj, r in zip(z, self.center, self.radii))
        s = 0.0
        for zj, cj in zip(z, self.center):
            d = zj - cj
            s += d.real * d.real + d.imag * d.imag
        return math.sqrt(s) < self.radii[0] - margin

    def kobayashi_distance(self, z, w) -> float:
        z, w = self._check(z), self._check(w)
        for p in (z, w):
            if not self.contains(p):
                raise PointOutsideDomain(f"{p} is not inside the {self.kind}", p)
        # fixed argument order makes the result symmetric to the last bit
        if [(c.real, c.imag) for c in w] < [(c.real, c.imag) for c in z]:
            z, w = w, z
        u, v = self.normalize(z), self.normalize(w)
        if self.kind == "polydisk":
            return max(_poincare(a, b) for a, b in zip(u, v))
        if self.n == 1:
            return _poincare(u[0], v[0])
        return _ball_distance(u, v)


def _poincare(u: complex, v: complex) -> float:
    """Poincare distance on the unit disk (curvature -4 normalisation)."""
    if u == v:
        return 0.0
    denom = abs(1 - v.conjugate() * u)
    t = abs(u - v) / denom
    if t < 0.5:
        return math.atanh(t)
    # arctanh t = log(1 + t) - log(1 - t^2) / 2, with 1 - t^2 in product form
    one_minus_t2 = (1 - abs(u)) * (1 + abs(u)) * (1 - abs(v)) * (1 + abs(v)) / denom**2
    return math.log1p(min(t, 1.0)) - 0.5 * math.log(one_minus_t2)


def _ball_distance(u: Sequence[complex], v: Sequence[complex]) -> float:
    if tuple(u) == tuple(v):
        return 0.0
    n = len(u)
    inner = sum(a * b.conjugate() for a, b in zip(u, v))
    denom2 = abs(1 - inner) ** 2
    # |1-<u,v>|^2 - (1-|u|^2)(1-|v|^2) = |u-v|^2 - sum_{j<k} |u_j v_k - u_k v_j|^2
    diff2 = sum(abs(a - b) ** 2 for a, b in zip(u, v))
    cross = sum(abs(u[j] * v[k] - u[k] * v[j]) ** 2 for j in range(n) for k in range(j + 1, n))
    t = math.sqrt(max(diff2 - cross, 0.0) / denom2)
    if t < 0.5:
        return math.atanh(t)
    nu2 = sum(abs(a) ** 2 for a in u)
    nv2 = sum(abs(b) ** 2 for b in v)
    one_minus_t2 = (1 - nu2) * (1 - nv2) / denom2
    return math.log1p(min(t, 1.0)) - 0.5 * math.log(one_minus_t2)


# ------------------------------------------------------------ functional API


def contains(dom: DomainSpec, z, margin: float = 0.0) -> bool:
    """True iff ``z`` lies in ``dom`` shrunk by the Euclidean ``margin``.

    For the polydisk the shrink is applied to every coordinate radius.
    """
    return dom.contains(z, margin)


def kobayashi_distance(dom: DomainSpec, z, w) -> float:
    return dom.kobayashi_distance(z, w)


def _unit_sphere(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    g = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


_BELOW_ONE = np.nextafter(1.0, 0.0)


def sample_points(dom: DomainSpec, count: int, seed: int, shell: float | None = None) -> list[tuple]:
    """Deterministic pseudo-random interior points of ``dom``.

    Points are uniform in volume. With ``shell`` set, they are uniform in
    the region whose relative radius (the gauge of the unit model) lies in
    ``[shell, 1)``; for the polydisk one randomly chosen coordinate is
    pushed into the shell.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if shell is not None and not 0 < shell < 1:
        raise ValueError("shell must lie in (0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = dom.n
    s = 0.0 if shell is None else shell
    if dom.kind == "polydisk":
        theta = rng.uniform(0.0, 2 * np.pi, (count, n))
        rad = np.sqrt(rng.uniform(0.0, 1.0, (count, n)))
        if shell is not None:
            which = rng.integers(0, n, count)
            pushed = np.maximum(np.sqrt(s**2 + rng.uniform(0.0, 1.0, count) * (1 - s**2)), s)
            rad[np.arange(count), which] = pushed
        u = np.minimum(rad, _BELOW_ONE) * np.exp(1j * theta)
    else:
        direction = _unit_sphere(rng, count, n)
        dim = 2 * n
        rad = (s**dim + rng.uniform(0.0, 1.0, count) * (1 - s**dim)) ** (1.0 / dim)
        rad = np.maximum(rad, s)
        u = np.minimum(rad, _BELOW_ONE)[:, None] * direction
    return [_to_domain(dom, row) for row in u]


def boundary_points(dom: DomainSpec, count: int, seed: int) -> list[tuple]:
    """Deterministic points on the boundary of ``dom``.

    Disk and ball: uniform on the sphere. Polydisk: uniform on the
    distinguished boundary (the torus where every coordinate has maximal
    modulus), which carries the maximum of every holomorphic modulus.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    if dom.kind == "polydisk":
        u = np.exp(1j * rng.uniform(0.0, 2 * np.pi, (count, dom.n)))
    else:
        u = _unit_sphere(rng, count, dom.n)
    return [_to_domain(dom, row) for row in u]


def _to_domain(dom: DomainSpec, u_row) -> tuple:
    radii = dom._coordinate_radii()
    return tuple(complex(c + r * complex(uj)) for uj, c, r in zip(u_row, dom.center, radii))
