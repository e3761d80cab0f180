"""Manifold representations and the differentiation core."""

from .calculus import (
    apply_vector,
    directional_derivative,
    exterior_derivative_1form,
    gradient,
    hessian,
    lie_bracket,
    partials,
)
from .manifest import (
    Backend,
    EvaluationError,
    Manifest,
    ManifestError,
    ManifoldSpec,
    PreconditionError,
    build_spec,
    load_manifest,
    parse_manifest,
)
from .pointdata import PointFrameData, evaluate_point

__all__ = [
    "Backend",
    "EvaluationError",
    "Manifest",
    "ManifestError",
    "ManifoldSpec",
    "PointFrameData",
    "PreconditionError",
    "apply_vector",
    "build_spec",
    "directional_derivative",
    "evaluate_point",
    "exterior_derivative_1form",
    "gradient",
    "hessian",
    "lie_bracket",
    "load_manifest",
    "parse_manifest",
    "partials",
]
