"""Built-in fixture maps and families, plus seeded random map generators.

Fixtures are stored in map-definition form (the same JSON the CLI reads),
together with closed-form expectations where one exists.
"""

from __future__ import annotations

import itertools

import numpy as np

from .domains import DomainSpec
from .expr import Const, HolomorphicMap, parse_expression, to_source
from .heins import ParametricFamily
from .io import MapDefinition, load_map_definition

UNIT_DISK = {"kind": "disk", "center": [[0, 0]], "radii": [1]}

MAPS = {
    "affine": {
        "metadata": {"name": "affine", "description": "f(z) = 0.3 + 0.4 z; tau = 0.3 / (1 - 0.4)"},
        "domain": UNIT_DISK,
        "map": ["0.3 + 0.4*z1"],
    },
    "linear2d": {
        "metadata": {"name": "linear2d", "description": "z -> M z + b on the unit bidisk"},
        "domain": {"kind": "polydisk", "center": [[0, 0], [0, 0]], "radii": [1, 1]},
        "map": ["0.5*z2", "0.25*z1 + 0.1"],
    },
    "slow": {
        "metadata": {"name": "slow", "description": "f(z) = 0.999 z, spectral radius 0.999"},
        "domain": UNIT_DISK,
        "map": ["0.999*z1"],
    },
    "exp": {
        "metadata": {"name": "exp", "description": "f(z) = exp(z) / 4"},
        "domain": UNIT_DISK,
        "map": ["exp(z1)/4"],
    },
    "ball2d": {
        "metadata": {"name": "ball2d", "description": "nonlinear self-map of the unit ball in C^2"},
        "domain": {"kind": "ball", "center": [[0, 0], [0, 0]], "radii": [1]},
        "map": ["0.3*z1*z2 + 0.2", "0.4*sin(z1) - 0.1i*z2"],
    },
    "shifted_polydisk": {
        "metadata": {"name": "shifted_polydisk", "description": "off-center polydisk with unequal radii"},
        "domain": {"kind": "polydisk", "center": [[1, 1], [-2, 0]], "radii": [0.5, 2]},
        "map": ["(1+1i) + 0.4*(z1 - (1+1i)) + 0.05*(z2 + 2)",
                "-2 + 0.25*(z2 + 2)^2 + 0.5*(z1 - (1+1i))"],
    },
}

# closed-form fixed points (vectors of complex) and spectral radii
EXPECTED = {
    "affine": {"tau": [0.5], "rho": 0.4},
    "linear2d": {"tau": [0.1 * 0.5 / (1 - 0.125), 0.1 / (1 - 0.125)], "rho": 0.125**0.5},
    "slow": {"tau": [0.0], "rho": 0.999},
}

# Affine fixtures where the iteration rate can be compared with the spectral radius.
LINEAR = {"affine", "linear2d", "slow"}

FAMILIES = {
    "constants": {
        "metadata": {"name": "constants", "description": "F(y, z) = y, so tau(y) = y"},
        "domain": UNIT_DISK,
        "map": ["y1"],
        "params": {"names": ["y1"], "domain": {"kind": "disk", "center": [[0, 0]], "radii": [0.9]}},
        "y0": [[0.3, 0]],
    },
    "quadratic": {
        "metadata": {"name": "quadratic", "description": "F(y, z) = (z^2 + y) / 4, tau(y) = 2 - sqrt(4 - y)"},
        "domain": UNIT_DISK,
        "map": ["(z1^2 + y1)/4"],
        "params": {"names": ["y1"], "domain": {"kind": "disk", "center": [[0, 0]], "radii": [0.9]}},
        "y0": [[0, 0]],
    },
    "affine_family": {
        "metadata": {"name": "affine_family", "description": "F(y, z) = 0.3 + y z, tau(y) = 0.3 / (1 - y)"},
        "domain": UNIT_DISK,
        "map": ["0.3 + y1*z1"],
        "params": {"names": ["y1"], "domain": {"kind": "disk", "center": [[0.5, 0]], "radii": [0.15]}},
        "y0": [[0.5, 0]],
    },
    "trig": {
        "metadata": {"name": "trig", "description": "F(y, z) = 0.4 sin(z + y) + 0.1"},
        "domain": UNIT_DISK,
        "map": ["0.4*sin(z1 + y1) + 0.1"],
        "params": {"names": ["y1"], "domain": {"kind": "disk", "center": [[0, 0]], "radii": [0.3]}},
        "y0": [[0, 0.1]],
    },
    "coupled2d": {
        "metadata": {"name": "coupled2d", "description": "two space and two parameter variables"},
        "domain": {"kind": "polydisk", "center": [[0, 0], [0, 0]], "radii": [1, 1]},
        "map": ["0.5*z2 + 0.2*y1*z1", "0.25*z1 + 0.1 + 0.05*y2*exp(z2)"],
        "params": {"names": ["y1", "y2"],
                   "domain": {"kind": "polydisk", "center": [[0, 0], [0, 0]], "radii": [0.5, 0.5]}},
        "y0": [[0.1, 0.1], [-0.2, 0]],
    },
}

# Closed-form derivatives of tau at y0 (1 x 1 families only).
EXPECTED_DTAU = {
    "constants": 1.0,
    "quadratic": 0.25,
    "affine_family": 1.2,
}

IDENTITY = {
    "metadata": {"name": "identity", "description": "the identity is not in Hol_c; negative control"},
    "domain": UNIT_DISK,
    "map": ["z1"],
}


def definition(data: dict) -> MapDefinition:
    return load_map_definition({k: v for k, v in data.items() if k != "y0"})


def family_from_definition(defn: MapDefinition, **kwargs) -> ParametricFamily:
    return ParametricFamily(defn.map, defn.domain, defn.param_domain, **kwargs)


# ----------------------------------------------------------------- generators


def _coef(rng: np.random.Generator) -> complex:
    return complex(rng.standard_normal(), rng.standard_normal())


def _monomials(names, degree):
    """All monomials (as exponent tuples) of total degree <= ``degree``."""
    return [e for e in itertools.product(range(degree + 1), repeat=len(names)) if sum(e) <= degree]


def _term(coef: complex, names, exps) -> str:
    parts = [to_source(Const(coef))]
    for name, k in zip(names, exps):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def random_polynomial_map(rng: np.random.Generator, n: int, degree: int = 4,
                          with_exp: bool = True, scale: float = 1.0) -> HolomorphicMap:
    """Random map whose components are polynomials of degree <= ``degree``,
    optionally plus a ``c * exp(a . z)`` term."""
    names = [f"z{i + 1}" for i in range(n)]
    monos = _monomials(names, degree)
    comps = []
    for _ in range(n):
        keep = rng.random(len(monos)) < 0.6
        terms = [_term(scale * _coef(rng) / len(monos), names, e) for e, k in zip(monos, keep) if k]
        if with_exp and rng.random() < 0.5:
            lin = " + ".join(_term(0.5 * _coef(rng), [nm], (1,)) for nm in names)
            terms.append(f"{to_source(Const(0.3 * _coef(rng)))}*exp({lin})")
        comps.append(" + ".join(terms) if terms else "0")
    return HolomorphicMap(tuple(parse_expression(c) for c in comps), tuple(names))


def random_polynomial_family(rng: np.random.Generator, n: int = 1, m: int = 1, degree: int = 3,
                             bound: float = 0.7, validation_samples: int = 16) -> ParametricFamily:
    """Random polynomial family on the unit polydisk with parameters in a polydisk of radius 0.9.

    Coefficients are scaled so the sum of their moduli is ``bound`` < 1,
    which makes ``sup |F_i| <= bound`` and therefore puts every ``f_y`` in
    Hol_c with margin ``1 - bound``.
    """
    space = [f"z{i + 1}" for i in range(n)]
    params = [f"y{i + 1}" for i in range(m)]
    names = space + params
    monos = _monomials(names, degree)
    comps = []
    for _ in range(n):
        coefs = np.array([_coef(rng) for _ in monos])
        coefs[rng.random(len(monos)) < 0.4] = 0
        if not np.any(coefs):
            coefs[0] = 1
        coefs *= bound / np.sum(np.abs(coefs))
        comps.append(" + ".join(_term(complex(c), names, e) for c, e in zip(coefs, monos) if c != 0))
    fmap = HolomorphicMap(tuple(parse_expression(c) for c in comps), tuple(space), tuple(params))
    return ParametricFamily(fmap, DomainSpec.unit_polydisk(n) if n > 1 else DomainSpec.unit_disk(),
                            DomainSpec("polydisk", (0j,) * m, (0.9,) * m) if m > 1
                            else DomainSpec("disk", (0j,), (0.9,)),
                            validation_samples=validation_samples)
