"""(κ, μ, ν) extraction, three-dimensional decomposition and space-form fits."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, Field

from .config import effective_tolerance, settings
from .curvature import CurvatureTensor, oracle_at, phi_sectional, ricci_and_scalar
from .geometry import ManifoldSpec, PointFrameData
from .pointmodel import (
    BASIS_SIZE,
    SpaceFormCoefficients,
    basis_tensor_array,
    design_matrix,
    synthetic_curvature,
)
from .structure import compute_h, contact_residual, phi_basis

logger = logging.getLogger(__name__)


class KmnResult(BaseModel):
    point: List[float] = Field(default_factory=list)
    kappa: float
    mu: float
    nu: float
    residual: float
    lam: float
    sasakian: bool
    degenerate: bool


def _xi_ansatz(pd: PointFrameData) -> np.ndarray:
    """Columns: η(Y)X - η(X)Y, η(Y)hX - η(X)hY, η(Y)φhX - η(X)φhY over basis pairs."""
    h = pd.h if pd.h is not None else np.zeros_like(pd.g)
    terms = []
    for B in (np.eye(pd.dimension), h, pd.phi @ h):
        terms.append(np.einsum("j,li->lij", pd.eta, B) - np.einsum("i,lj->lij", pd.eta, B))
    return np.stack([t.ravel() for t in terms], axis=1)


def extract_kmn_at(curvature: CurvatureTensor, pd: PointFrameData) -> KmnResult:
    """Least-squares (κ, μ, ν) from R(E_i, E_j)ξ; μ, ν reported as 0 when h ≈ 0."""
    target = np.einsum("lijk,k->lij", curvature.components, pd.xi).ravel()
    design = _xi_ansatz(pd)
    h = pd.h if pd.h is not None else np.zeros_like(pd.g)
    degenerate = float(np.abs(h).max()) < settings.degeneracy_threshold
    if degenerate:
        design = design[:, :1]
    solution, _, _, _ = scipy.linalg.lstsq(design, target)
    coeffs = np.zeros(3)
    coeffs[: solution.shape[0]] = solution
    residual = float(np.abs(design @ solution - target).max()) if target.size else 0.0
    lam = 0.0 if degenerate else phi_basis(pd, h)[1]
    kappa = float(coeffs[0])
    return KmnResult(
        point=[float(x) for x in pd.point],
        kappa=kappa,
        mu=float(coeffs[1]),
        nu=float(coeffs[2]),
        residual=residual,
        lam=lam,
        sasakian=abs(kappa - 1.0) < settings.oracle_tolerance,
        degenerate=degenerate,
    )


def oracle_with_h(spec: ManifoldSpec, p: Sequence[float]) -> Tuple[PointFrameData, CurvatureTensor]:
    pd, _, curvature = oracle_at(spec, p)
    return pd.with_h(compute_h(spec, pd.point)), curvature


def extract_kmn(spec: ManifoldSpec, p: Sequence[float]) -> KmnResult:
    pd, curvature = oracle_with_h(spec, p)
    return extract_kmn_at(curvature, pd)


class KmnGrid(BaseModel):
    results: List[KmnResult]
    spread: Dict[str, float]
    max_residual: float


def extract_over_grid(spec: ManifoldSpec, points: Optional[Sequence[np.ndarray]] = None) -> KmnGrid:
    """Pointwise extraction plus max - min of κ, μ, ν over the grid."""
    grid = list(points) if points is not None else spec.sample_points()
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        results = list(pool.map(lambda q: extract_kmn(spec, q), grid))
    spread = {
        name: max(getattr(r, name) for r in results) - min(getattr(r, name) for r in results)
        for name in ("kappa", "mu", "nu")
    }
    logger.info(f"Extracted (kappa, mu, nu) for '{spec.name}' at {len(results)} points")
    return KmnGrid(results=results, spread=spread, max_residual=max(r.residual for r in results))


class DecompositionResult(BaseModel):
    status: str
    reason: str = ""
    theorem_residual: float = 0.0
    corollary_residual: float = 0.0
    forms_difference: float = 0.0
    phi_sectional_identity: float = 0.0
    ricci_residual: float = 0.0
    F: float = 0.0
    tau: float = 0.0
    kmn: Optional[KmnResult] = None


def ricci_dim3_prediction(pd: PointFrameData, tau: float, kmn: KmnResult) -> np.ndarray:
    """Q = (τ/2 - κ)I + (-τ/2 + 3κ)η⊗ξ + μh + νφh."""
    h = pd.h if pd.h is not None else np.zeros_like(pd.g)
    return (
        (tau / 2 - kmn.kappa) * np.eye(pd.dimension)
        + (-tau / 2 + 3 * kmn.kappa) * np.outer(pd.xi, pd.eta)
        + kmn.mu * h
        + kmn.nu * pd.phi @ h
    )


def decomposition_at(curvature: CurvatureTensor, pd: PointFrameData, kmn: Optional[KmnResult] = None) -> DecompositionResult:
    """Compare the oracle with τ- and F-forms of the three-dimensional decomposition."""
    if pd.dimension != 3:
        return DecompositionResult(status="skipped", reason="decomposition holds in dimension 3 only")
    kmn = kmn or extract_kmn_at(curvature, pd)
    if kmn.kappa >= 1.0 - settings.oracle_tolerance:
        return DecompositionResult(
            status="skipped", reason=f"requires kappa < 1 (kappa = {kmn.kappa:.6g})", kmn=kmn
        )
    Q, tau = ricci_and_scalar(curvature)
    P, _ = phi_basis(pd)
    F = phi_sectional(curvature, pd, P[:, 0])
    B = basis_tensor_array(pd)
    R = curvature.components
    theorem = (tau / 2 - 2 * kmn.kappa) * B[0] + (tau / 2 - 3 * kmn.kappa) * B[2] + kmn.mu * B[3] + kmn.nu * B[6]
    corollary = F * B[0] + (F - kmn.kappa) * B[2] + kmn.mu * B[3] + kmn.nu * B[6]
    return DecompositionResult(
        status="computed",
        theorem_residual=float(np.abs(R - theorem).max()),
        corollary_residual=float(np.abs(R - corollary).max()),
        forms_difference=float(np.abs(theorem - corollary).max()),
        phi_sectional_identity=abs(F - (tau / 2 - 2 * kmn.kappa)),
        ricci_residual=float(np.abs(Q - ricci_dim3_prediction(pd, tau, kmn)).max()),
        F=F,
        tau=tau,
        kmn=kmn,
    )


def verify_dim3_decomposition(spec: ManifoldSpec, p: Sequence[float]) -> DecompositionResult:
    if spec.dimension != 3:
        return DecompositionResult(status="skipped", reason="decomposition holds in dimension 3 only")
    pd, curvature = oracle_with_h(spec, p)
    tol = effective_tolerance(settings.structure_tolerance, spec.fd_step or settings.fd_step)
    if contact_residual(spec, pd) > tol:
        return DecompositionResult(status="skipped", reason="structure is not contact metric")
    return decomposition_at(curvature, pd)


class SpaceFormFit(BaseModel):
    coefficients: Dict[str, float]
    columns: List[int]
    residual: float
    rank: int
    nullspace_dim: int
    nullspace: List[List[float]] = Field(default_factory=list)

    def as_coefficients(self) -> SpaceFormCoefficients:
        return SpaceFormCoefficients(**self.coefficients)

    @property
    def kappa(self) -> float:
        return self.as_coefficients().kappa

    @property
    def mu(self) -> float:
        return self.as_coefficients().mu

    @property
    def nu(self) -> float:
        return self.as_coefficients().nu


def fit_space_form_at(
    curvature: CurvatureTensor,
    pd: PointFrameData,
    columns: Optional[Sequence[int]] = None,
    rcond: float = 1e-10,
) -> SpaceFormFit:
    """Minimal-norm least squares R ≈ Σ f_a R_a over the selected (1-based) basis tensors."""
    cols = list(columns) if columns is not None else list(range(1, BASIS_SIZE + 1))
    design = design_matrix(pd)[:, [c - 1 for c in cols]]
    target = curvature.components.ravel()
    solution, _, rank, _ = scipy.linalg.lstsq(design, target, cond=rcond)
    null = scipy.linalg.null_space(design, rcond=rcond)
    values = np.zeros(BASIS_SIZE)
    values[[c - 1 for c in cols]] = solution
    embedded = []
    for k in range(null.shape[1]):
        v = np.zeros(BASIS_SIZE)
        v[[c - 1 for c in cols]] = null[:, k]
        embedded.append([float(x) for x in v])
    return SpaceFormFit(
        coefficients=SpaceFormCoefficients.from_array(values).as_dict(),
        columns=cols,
        residual=float(np.abs(design @ solution - target).max()),
        rank=int(rank),
        nullspace_dim=int(null.shape[1]),
        nullspace=embedded,
    )


def fit_space_form(spec: ManifoldSpec, p: Sequence[float], columns: Optional[Sequence[int]] = None) -> SpaceFormFit:
    pd, curvature = oracle_with_h(spec, p)
    return fit_space_form_at(curvature, pd, columns)


def dim3_reduction(fit: SpaceFormFit) -> Dict[str, float]:
    """Collapse an eight-term fit with R2 = 3(R1+R3), R5 = 0, R6 = -R4, R8 = -R7."""
    f = fit.as_coefficients()
    return {
        "f1": f.f1 + 3 * f.f2,
        "f3": f.f3 + 3 * f.f2,
        "f4": f.f4 - f.f6,
        "f7": f.f7 - f.f8,
        "F": f.f1 + 3 * f.f2,
    }


def same_modulo_nullspace(fit: SpaceFormFit, expected: SpaceFormCoefficients) -> float:
    """Distance from ``expected`` to the affine set fit + span(null space)."""
    diff = expected.as_array() - fit.as_coefficients().as_array()
    if fit.nullspace:
        N = np.array(fit.nullspace).T
        diff = diff - N @ (N.T @ diff)
    return float(np.abs(diff).max())


class RigidityReport(BaseModel):
    applicable: bool
    reason: str = ""
    relations: Dict[str, float] = Field(default_factory=dict)
    proposition: Dict[str, float] = Field(default_factory=dict)
    max_residual: float = 0.0
    rigid: bool = False


def check_dim5_rigidity(
    fit: SpaceFormFit,
    model: Optional[PointFrameData] = None,
    kmn: Optional[KmnResult] = None,
    tolerance: Optional[float] = None,
) -> RigidityReport:
    """Residuals of the dimension >= 5 coefficient relations, κ = -f6, μ = 1 - f6, ν = f7 = f8 = 0, F = 2f6 - 1."""
    tol = tolerance if tolerance is not None else settings.synthetic_tolerance
    f = fit.as_coefficients()
    proposition: Dict[str, float] = {}
    if model is not None:
        if kmn is None:
            kmn = extract_kmn_at(synthetic_curvature(model, f), model)
    if kmn is not None:
        proposition = {
            "kappa": abs(kmn.kappa - f.kappa),
            "mu": abs(kmn.mu - f.mu) if not kmn.degenerate else 0.0,
            "nu": abs(kmn.nu - f.nu) if not kmn.degenerate else 0.0,
        }
    if model is not None and model.dimension < 5:
        return RigidityReport(applicable=False, reason="rigidity applies in dimension >= 5", proposition=proposition)

    F = f.f1 + 3 * f.f2
    if model is not None:
        P, _ = phi_basis(model)
        F = phi_sectional(synthetic_curvature(model, f), model, P[:, 0])
    relations = {
        "f1": abs(f.f1 - (f.f6 + 1) / 2),
        "f2": abs(f.f2 - (f.f6 - 1) / 2),
        "f3": abs(f.f3 - (3 * f.f6 + 1) / 2),
        "kappa": abs(f.kappa + f.f6),
        "mu": abs(f.mu - (1 - f.f6)),
        "nu": abs(f.nu),
        "f7": abs(f.f7),
        "f8": abs(f.f8),
        "phi_sectional": abs(F - (2 * f.f6 - 1)),
    }
    worst = max(relations.values())
    if worst >= tol:
        logger.warning(f"Rigidity relations violated: max residual {worst:.3e}")
    return RigidityReport(
        applicable=True,
        relations=relations,
        proposition=proposition,
        max_residual=worst,
        rigid=worst < tol,
    )
