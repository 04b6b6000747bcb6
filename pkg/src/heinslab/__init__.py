"""Fixed points of holomorphic self-maps and their dependence on parameters."""

__version__ = "0.1.0"

from .calculus import (jacobian_contour, jacobian_symbolic, segment_factorization, solve,
                       spectral_radius)
from .domains import DomainSpec, boundary_points, contains, kobayashi_distance, sample_points
from .dynamics import (CompactImageReport, FixedPointResult, check_compact_image,
                       iterate_to_fixed_point, orbit_trace)
from .errors import DimensionMismatch, HeinslabError, NumericOverflow, PointOutsideDomain, SingularMatrix
from .expr import Expression, HolomorphicMap, evaluate, parse_expression
from .heins import (HeinsReport, ParametricFamily, displacement_identity_residual,
                    finite_difference_dtau, heins_differential, heins_tau,
                    perturbation_continuity_probe, wirtinger_antiholomorphic_norm)
from .io import MapDefinition, load_map_definition, read_map_file

__all__ = [
    "CompactImageReport", "DimensionMismatch", "DomainSpec", "Expression", "FixedPointResult",
    "HeinsReport", "HeinslabError", "HolomorphicMap", "MapDefinition", "NumericOverflow",
    "ParametricFamily", "PointOutsideDomain", "SingularMatrix", "boundary_points",
    "check_compact_image", "contains", "displacement_identity_residual", "evaluate",
    "finite_difference_dtau", "heins_differential", "heins_tau", "iterate_to_fixed_point",
    "jacobian_contour", "jacobian_symbolic", "kobayashi_distance", "load_map_definition",
    "orbit_trace", "parse_expression", "perturbation_continuity_probe", "read_map_file",
    "sample_points", "segment_factorization", "solve", "spectral_radius",
    "wirtinger_antiholomorphic_norm",
]
