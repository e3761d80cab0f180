"""Schouten and Weyl tensors and the conformal-flatness criteria."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .config import effective_tolerance, settings
from .curvature import (
    CurvatureTensor,
    connection,
    kulkarni,
    nabla_endomorphism,
    oracle_at,
    ricci_and_scalar,
)
from .geometry import ManifoldSpec, PointFrameData, evaluate_point
from .pointmodel import SpaceFormCoefficients, basis_tensor_array, synthetic_curvature
from .structure import compute_h

logger = logging.getLogger(__name__)


def schouten(Q: np.ndarray, tau: float, n: int) -> np.ndarray:
    """L = -Q/(2n-1) + τ/(4n(2n-1)) I."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    m = 2 * n - 1
    return -Q / m + tau / (4 * n * m) * np.eye(Q.shape[0])


def weyl(curvature: CurvatureTensor, L: np.ndarray, pd: Optional[PointFrameData] = None) -> np.ndarray:
    """W(X,Y)Z = R(X,Y)Z - (g(LX,Z)Y - g(LY,Z)X + g(X,Z)LY - g(Y,Z)LX)."""
    g = pd.g if pd is not None else curvature.g
    return curvature.components - kulkarni(L, g)


def weyl_from_curvature(curvature: CurvatureTensor) -> np.ndarray:
    Q, tau = ricci_and_scalar(curvature)
    n = (curvature.dimension - 1) // 2
    return weyl(curvature, schouten(Q, tau, n))


def weyl_trace_residual(W: np.ndarray) -> float:
    """Largest contraction of the upper index against any lower one."""
    return float(
        max(
            np.abs(np.einsum("iijk->jk", W)).max(),
            np.abs(np.einsum("jijk->ik", W)).max(),
            np.abs(np.einsum("kijk->ij", W)).max(),
        )
    )


def ricci_from_coefficients(f: SpaceFormCoefficients, model: PointFrameData) -> np.ndarray:
    """Ricci operator of f1 R1 + ... + f8 R8 (the h factor on the f4/f6 term included)."""
    n = model.n
    h = model.h if model.h is not None else np.zeros_like(model.g)
    return (
        (2 * n * f.f1 + 3 * f.f2 - f.f3) * np.eye(model.dimension)
        - (3 * f.f2 + (2 * n - 1) * f.f3) * np.outer(model.xi, model.eta)
        + ((2 * n - 1) * f.f4 - f.f6) * h
        + ((2 * n - 1) * f.f7 - f.f8) * model.phi @ h
    )


def scalar_from_coefficients(f: SpaceFormCoefficients, n: int) -> float:
    """τ = 2n((2n+1)f1 + 3f2 - 2f3)."""
    return 2 * n * ((2 * n + 1) * f.f1 + 3 * f.f2 - 2 * f.f3)


def predicted_schouten(f: SpaceFormCoefficients, model: PointFrameData) -> np.ndarray:
    n = model.n
    m = 2 * n - 1
    h = model.h if model.h is not None else np.zeros_like(model.g)
    return (
        -0.5 * (f.f1 + 3 * f.f2 / m) * np.eye(model.dimension)
        + (3 * f.f2 / m + f.f3) * np.outer(model.xi, model.eta)
        - (f.f4 - f.f6 / m) * h
        - (f.f7 - f.f8 / m) * model.phi @ h
    )


def predicted_weyl_coefficients(f: SpaceFormCoefficients, n: int) -> SpaceFormCoefficients:
    m = 2 * n - 1
    return SpaceFormCoefficients(
        f1=-3 * f.f2 / m,
        f2=f.f2,
        f3=-3 * f.f2 / m,
        f4=f.f6 / m,
        f5=f.f5,
        f6=f.f6,
        f7=f.f8 / m,
        f8=f.f8,
    )


def predicted_weyl(f: SpaceFormCoefficients, model: PointFrameData) -> np.ndarray:
    return synthetic_curvature(model, predicted_weyl_coefficients(f, model.n)).components


def weyl_xi_residual(W: np.ndarray, f: SpaceFormCoefficients, model: PointFrameData) -> float:
    """W(X,ξ)ξ against (2(1-n)/(2n-1))(f6 hX + f8 φhX)."""
    n = model.n
    h = model.h if model.h is not None else np.zeros_like(model.g)
    expected = (2 * (1 - n) / (2 * n - 1)) * (f.f6 * h + f.f8 * model.phi @ h)
    actual = np.einsum("lijk,j,k->li", W, model.xi, model.xi)
    return float(np.abs(actual - expected).max())


def codazzi_residual(spec: ManifoldSpec, p: Sequence[float], step: Optional[float] = None) -> float:
    """max |(∇_X L)Y - (∇_Y L)X| with ∇L from finite differences of the Schouten field."""
    point = np.asarray(p, dtype=float)
    n = spec.n

    def schouten_field(q: np.ndarray) -> np.ndarray:
        _, _, curvature = oracle_at(spec, q)
        Q, tau = ricci_and_scalar(curvature)
        return schouten(Q, tau, n)

    conn = connection(spec, point)
    N = nabla_endomorphism(spec, conn, schouten_field, point, step or settings.codazzi_step)
    return float(np.abs(N - np.einsum("jki->ikj", N)).max())


class ConformalReport(BaseModel):
    name: str
    dimension: int
    tolerance: float
    weyl_max: float
    trace_max: float
    schouten: List[List[List[float]]] = Field(default_factory=list)
    codazzi_max: Optional[float] = None
    conformally_flat: bool
    theorem_applicable: bool = False
    theorem_reason: str = ""
    theorem_quantities: Dict[str, float] = Field(default_factory=dict)
    theorem_predicts_flat: Optional[bool] = None
    weyl_xi_residual: Optional[float] = None
    kim_criterion: Optional[bool] = None


def _conformal_point(spec: ManifoldSpec, q: np.ndarray) -> Dict[str, object]:
    pd, _, curvature = oracle_at(spec, q)
    Q, tau = ricci_and_scalar(curvature)
    L = schouten(Q, tau, spec.n)
    W = weyl(curvature, L, pd)
    result: Dict[str, object] = {
        "weyl": float(np.abs(W).max()),
        "trace": weyl_trace_residual(W),
        "schouten": L.tolist(),
    }
    if spec.dimension == 3:
        result["codazzi"] = codazzi_residual(spec, q)
    return result


def flatness_test(spec: ManifoldSpec, points: Optional[Sequence[np.ndarray]] = None) -> ConformalReport:
    """Oracle conformal flatness: W ≡ 0 in dimension >= 5, the Codazzi condition in dimension 3."""
    grid = list(points) if points is not None else spec.sample_points()
    tol = effective_tolerance(settings.oracle_flat_tolerance, spec.fd_step or settings.fd_step)
    logger.info(f"Conformal flatness test for '{spec.name}' on {len(grid)} points")
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        results = list(pool.map(lambda q: _conformal_point(spec, q), grid))
    weyl_max = max(float(r["weyl"]) for r in results)
    report = ConformalReport(
        name=spec.name,
        dimension=spec.dimension,
        tolerance=tol,
        weyl_max=weyl_max,
        trace_max=max(float(r["trace"]) for r in results),
        schouten=[r["schouten"] for r in results],  # type: ignore[misc]
        conformally_flat=weyl_max < tol,
    )
    if spec.dimension == 3:
        codazzi = max(float(r["codazzi"]) for r in results)
        codazzi_tol = effective_tolerance(settings.structure_tolerance, spec.fd_step or settings.fd_step)
        report.codazzi_max = codazzi
        report.conformally_flat = codazzi < codazzi_tol
    else:
        center = spec.center()
        model = evaluate_point(spec, center).with_h(compute_h(spec, center))
        h_tol = effective_tolerance(settings.structure_tolerance, spec.fd_step or settings.fd_step)
        reason = theorem_hypotheses(model, h_tol)
        if reason is None:
            report.theorem_applicable = True
        else:
            report.theorem_reason = f"theorem not applicable: {reason}"
            logger.warning(f"Flatness theorem not applicable to '{spec.name}': {reason}")
    return report


def theorem_hypotheses(model: PointFrameData, tolerance: float) -> Optional[str]:
    """Reason the flatness theorem does not apply, or None."""
    if model.dimension < 5:
        return "flatness theorem needs dimension >= 5"
    h = model.h if model.h is not None else np.zeros_like(model.g)
    if float(np.abs(h).max()) < tolerance:
        return "h = 0"
    gh = model.g @ h
    if float(np.abs(gh - gh.T).max()) > tolerance:
        return "h is not symmetric"
    if float(np.abs(h @ model.phi + model.phi @ h).max()) > tolerance:
        return "h does not anticommute with phi"
    return None


def flatness_test_model(model: PointFrameData, f: SpaceFormCoefficients, name: str = "model") -> ConformalReport:
    """Synthetic conformal flatness with the theorem quantities f2, |f5 R5|, f6, f8."""
    tol = settings.synthetic_tolerance
    curvature = synthetic_curvature(model, f)
    W = weyl_from_curvature(curvature)
    weyl_max = float(np.abs(W).max())
    B = basis_tensor_array(model)
    quantities = {
        "f2": abs(f.f2),
        "f5R5": abs(f.f5) * float(np.abs(B[4]).max()),
        "f6": abs(f.f6),
        "f8": abs(f.f8),
    }
    reason = theorem_hypotheses(model, tol)
    report = ConformalReport(
        name=name,
        dimension=model.dimension,
        tolerance=tol,
        weyl_max=weyl_max,
        trace_max=weyl_trace_residual(W),
        conformally_flat=weyl_max < tol,
        theorem_quantities=quantities,
        weyl_xi_residual=weyl_xi_residual(W, f, model),
    )
    if reason is None:
        report.theorem_applicable = True
        report.theorem_predicts_flat = sum(quantities.values()) < tol
    else:
        report.theorem_reason = f"theorem not applicable: {reason}"
        logger.warning(f"Flatness theorem not applicable to '{name}': {reason}")
        if reason == "h = 0" and model.dimension >= 5:
            report.kim_criterion = abs(f.f2) < tol
    return report


def synthetic_is_consistent(report: ConformalReport) -> bool:
    """Flat by Weyl agrees with the prediction from coefficients."""
    if report.theorem_predicts_flat is not None:
        return report.theorem_predicts_flat == report.conformally_flat
    if report.kim_criterion is not None:
        return report.kim_criterion == report.conformally_flat
    return True


__all__ = [
    "ConformalReport",
    "codazzi_residual",
    "flatness_test",
    "flatness_test_model",
    "predicted_schouten",
    "predicted_weyl",
    "predicted_weyl_coefficients",
    "ricci_from_coefficients",
    "scalar_from_coefficients",
    "schouten",
    "synthetic_is_consistent",
    "theorem_hypotheses",
    "weyl",
    "weyl_from_curvature",
    "weyl_trace_residual",
    "weyl_xi_residual",
]
