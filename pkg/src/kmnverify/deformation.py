"""D_a-homothetic deformations: φ̄ = φ, ξ̄ = ξ/a, η̄ = aη, ḡ = ag + a(a-1)η⊗η."""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np

from .expr import Expr, add, div, mul, num, total
from .geometry import ManifoldSpec, PointFrameData, PreconditionError
from .geometry.manifest import content_hash, validate_metric

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeformationParams:
    a: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.a) or self.a <= 0:
            raise PreconditionError(f"Deformation factor must be a positive constant, got {self.a}")

    @property
    def is_identity(self) -> bool:
        return self.a == 1.0


def _eta_components(spec: ManifoldSpec) -> tuple:
    n = spec.dimension
    return tuple(total([mul(spec.metric[i][k], spec.xi[k]) for k in range(n)]) for i in range(n))


def apply_deformation(spec: ManifoldSpec, a: float) -> ManifoldSpec:
    """Deformed spec built by exact expression arithmetic on the component fields.

    The same construction serves both backends: for frames it acts on the
    constant frame metric and the frame components of ξ.
    """
    params = DeformationParams(float(a))
    eta = _eta_components(spec)
    scale: Expr = num(params.a)
    cross: Expr = num(params.a * (params.a - 1.0))
    n = spec.dimension
    metric = tuple(
        tuple(add(mul(scale, spec.metric[i][j]), mul(cross, mul(eta[i], eta[j]))) for j in range(n))
        for i in range(n)
    )
    xi = tuple(div(e, scale) for e in spec.xi)
    deformed = dataclasses.replace(
        spec,
        name=f"{spec.name}|a={params.a:g}",
        description=f"D_a deformation of '{spec.name}' with a = {params.a:g}",
        metric=metric,
        xi=xi,
        expected=None,
        content_hash="",
        source_path=None,
    )
    validate_metric(deformed)
    deformed = dataclasses.replace(deformed, content_hash=content_hash(deformed.to_json()))
    logger.info(f"Deformed '{spec.name}' with a = {params.a:g}")
    return deformed


def deform_point(pd: PointFrameData, a: float) -> PointFrameData:
    """Numeric counterpart of apply_deformation on evaluated point data; h̄ = h/a."""
    params = DeformationParams(float(a))
    g = params.a * pd.g + params.a * (params.a - 1.0) * np.outer(pd.eta, pd.eta)
    return PointFrameData(
        basis=pd.basis,
        point=pd.point,
        g=g,
        g_inv=np.linalg.inv(g),
        phi=pd.phi,
        xi=pd.xi / params.a,
        eta=params.a * pd.eta,
        h=None if pd.h is None else pd.h / params.a,
    )


def predicted_kmn(kappa: float, mu: float, nu: float, a: float) -> Dict[str, float]:
    """κ̄ = (κ + a² - 1)/a², μ̄ = (μ + 2a - 2)/a, ν̄ = ν/a."""
    a = DeformationParams(float(a)).a
    return {
        "kappa": (kappa + a * a - 1.0) / (a * a),
        "mu": (mu + 2.0 * a - 2.0) / a,
        "nu": nu / a,
    }


def predicted_F_and_coeffs(F: float, kappa: float, mu: float, nu: float, a: float) -> Dict[str, float]:
    """Deformed φ-sectional curvature and the three-dimensional coefficients f̄1, f̄3, f̄4, f̄7."""
    a = DeformationParams(float(a)).a
    F_bar = F / a - ((a - 1.0) / (a * a)) * (3.0 * a + 1.0 - kappa)
    return {
        "F": F_bar,
        "f1": F / a - ((a - 1.0) / (a * a)) * (3.0 * a + 1.0 - kappa),
        "f3": F / a + ((a - 2.0) * kappa - 4.0 * a * a + 2.0 * a + 2.0) / (a * a),
        "f4": (mu + 2.0 * a - 2.0) / a,
        "f7": nu / a,
    }


def coefficient_consistency(F: float, kappa: float, mu: float, nu: float, a: float) -> Dict[str, float]:
    """f̄1 = F̄, f̄3 = F̄ - κ̄, f̄4 = μ̄, f̄7 = ν̄ as absolute residuals."""
    coeffs = predicted_F_and_coeffs(F, kappa, mu, nu, a)
    kmn = predicted_kmn(kappa, mu, nu, a)
    return {
        "f1": abs(coeffs["f1"] - coeffs["F"]),
        "f3": abs(coeffs["f3"] - (coeffs["F"] - kmn["kappa"])),
        "f4": abs(coeffs["f4"] - kmn["mu"]),
        "f7": abs(coeffs["f7"] - kmn["nu"]),
    }
