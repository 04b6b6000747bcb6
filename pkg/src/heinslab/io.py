"""JSON conventions: complex numbers travel as ``[re, im]`` pairs.

A vector entry may also be a bare real number. The map-definition file is::

    {
      "metadata": {"name": "...", "description": "..."},
      "domain": {"kind": "disk", "center": [[0, 0]], "radii": [1]},
      "space_vars": ["z1"],                      # optional, default z1..zn
      "map": ["0.3 + y1*z1"],
      "params": {"names": ["y1"],
                 "domain": {"kind": "disk", "center": [[0.5, 0]], "radii": [0.15]}}
    }
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domains import DomainSpec
from .errors import DimensionMismatch
from .expr import HolomorphicMap, parse_expression

SCHEMA = "heinslab/1"


def complex_from_json(v) -> complex:
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise ValueError(f"expected a number or an [re, im] pair, got {v!r}")


def complex_vector_from_json(data) -> list[complex]:
    if isinstance(data, (int, float)) and not isinstance(data, bool):
        return [complex_from_json(data)]
    if not isinstance(data, (list, tuple)):
        raise ValueError(f"expected a list of complex numbers, got {data!r}")
    return [complex_from_json(v) for v in data]


def complex_to_json(c: complex) -> list[float]:
    c = complex(c)
    return [_clean(c.real), _clean(c.imag)]


def _clean(x: float) -> float:
    # -0.0 would serialise differently from 0.0
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} cannot be serialised")
    return x + 0.0


def complex_vector_to_json(v) -> list[list[float]]:
    return [complex_to_json(c) for c in np.atleast_1d(np.asarray(v, dtype=complex))]


def matrix_to_json(m) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(c) for c in row] for row in m]


def parse_vector_arg(text: str) -> list[complex]:
    """Parse a command-line vector given as JSON (``[[0.5, 0]]`` or ``[0.5]``)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"cannot parse vector {text!r}: {exc}") from None
    return complex_vector_from_json(data)


@dataclass(frozen=True)
class MapDefinition:
    map: HolomorphicMap
    domain: DomainSpec
    param_domain: DomainSpec | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return str(self.metadata.get("name", "map"))


def load_map_definition(data: dict) -> MapDefinition:
    """Build a :class:`MapDefinition` from parsed JSON.

    Raises ``ValueError`` (or a parse error, which subclasses it) on any
    schema or expression problem.
    """
    if not isinstance(data, dict):
        raise ValueError("map definition must be a JSON object")
    if "domain" not in data or "map" not in data:
        raise ValueError("map definition needs 'domain' and 'map' entries")
    domain = DomainSpec.from_json(data["domain"])
    sources = data["map"]
    if isinstance(sources, str):
        sources = [sources]
    if len(sources) != domain.n:
        raise DimensionMismatch(f"{len(sources)} components for a domain in C^{domain.n}")
    space_vars = data.get("space_vars") or [f"z{i + 1}" for i in range(domain.n)]
    param_vars: list[str] = []
    param_domain = None
    params = data.get("params")
    if params:
        param_vars = list(params.get("names", []))
        if "domain" not in params:
            raise ValueError("params block needs a 'domain'")
        param_domain = DomainSpec.from_json(params["domain"])
        if param_domain.n != len(param_vars):
            raise DimensionMismatch(
                f"{len(param_vars)} parameter names for a parameter domain in C^{param_domain.n}")
    comps = tuple(parse_expression(s) for s in sources)
    fmap = HolomorphicMap(comps, tuple(space_vars), tuple(param_vars))
    return MapDefinition(fmap, domain, param_domain, dict(data.get("metadata", {})))


def read_map_file(path) -> tuple[MapDefinition, str]:
    """Load a map-definition file; returns the definition and its sha256 digest."""
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None
    return load_map_definition(data), "sha256:" + hashlib.sha256(raw).hexdigest()


def definition_to_json(defn: MapDefinition) -> dict:
    out = {
        "metadata": defn.metadata,
        "domain": defn.domain.to_json(),
        "space_vars": list(defn.map.space_vars),
        "map": [str(c) for c in defn.map.components],
    }
    if defn.param_domain is not None:
        out["params"] = {"names": list(defn.map.param_vars), "domain": defn.param_domain.to_json()}
    return out


def dumps_report(report: dict) -> str:
    """Canonical serialisation: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def digest_of(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
