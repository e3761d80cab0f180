"""Almost contact metric axioms, structure classes and the tensor h."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel

from .config import effective_tolerance, settings
from .curvature import Connection, connection, nabla_endomorphism, nabla_vector
from .geometry import (
    ManifoldSpec,
    PointFrameData,
    evaluate_point,
    exterior_derivative_1form,
    lie_bracket,
)

logger = logging.getLogger(__name__)


def _norm(m: np.ndarray) -> float:
    m = np.atleast_2d(m)
    return float(np.linalg.norm(m, 2))


def axiom_residuals(pd: PointFrameData) -> Dict[str, float]:
    """Operator-norm residuals of the five almost contact metric axioms."""
    I = np.eye(pd.dimension)
    return {
        "eta_xi": abs(float(pd.eta @ pd.xi) - 1.0),
        "phi_squared": _norm(pd.phi @ pd.phi + I - np.outer(pd.xi, pd.eta)),
        "compatibility": _norm(pd.phi.T @ pd.g @ pd.phi - pd.g + np.outer(pd.eta, pd.eta)),
        "phi_xi": float(np.linalg.norm(pd.phi @ pd.xi)),
        "eta_phi": float(np.linalg.norm(pd.eta @ pd.phi)),
    }


def verify_axioms(spec: ManifoldSpec, p: Sequence[float]) -> Dict[str, float]:
    return axiom_residuals(evaluate_point(spec, p))


def compute_h(spec: ManifoldSpec, p: Sequence[float]) -> np.ndarray:
    """h = ½ L_ξ φ from brackets: (L_ξ φ)E_j = [ξ, φE_j] - φ[ξ, E_j]."""
    point = np.asarray(p, dtype=float)
    n = spec.dimension
    phi = spec.phi_at(point)
    columns = []
    for j in range(n):
        e_j = np.eye(n)[j]
        phi_e = lie_bracket(spec, spec.xi_at, lambda q, j=j: spec.phi_at(q)[:, j], point)
        basis_e = lie_bracket(spec, spec.xi_at, lambda q, e_j=e_j: e_j, point)
        columns.append(phi_e - phi @ basis_e)
    return 0.5 * np.column_stack(columns)


def contact_residual(spec: ManifoldSpec, pd: PointFrameData) -> float:
    """max |dη - Φ| with Φ(X, Y) = g(X, φY)."""
    d_eta = exterior_derivative_1form(spec, spec.eta_at, pd.point)
    return float(np.abs(d_eta - pd.g @ pd.phi).max())


def nabla_xi(spec: ManifoldSpec, conn: Connection, p: Sequence[float]) -> np.ndarray:
    return nabla_vector(spec, conn, spec.xi_at, p)


def nabla_phi(spec: ManifoldSpec, conn: Connection, p: Sequence[float]) -> np.ndarray:
    return nabla_endomorphism(spec, conn, spec.phi_at, p)


def sasakian_residual(pd: PointFrameData, nphi: np.ndarray) -> float:
    """max |(∇_X φ)Y - g(X,Y)ξ + η(Y)X| over basis pairs."""
    I = np.eye(pd.dimension)
    residual = nphi - np.einsum("ij,k->ikj", pd.g, pd.xi) + np.einsum("j,ki->ikj", pd.eta, I)
    return float(np.abs(residual).max())


def h_identity_residuals(pd: PointFrameData, h: np.ndarray, nxi: np.ndarray) -> Dict[str, float]:
    """Residuals of hξ = 0, ∇ξ = -φ - φh, hφ = -φh, tr h = 0, η∘h = 0 and g-symmetry of h."""
    gh = pd.g @ h
    return {
        "h_xi": float(np.linalg.norm(h @ pd.xi)),
        "nabla_xi": float(np.abs(nxi + pd.phi + pd.phi @ h).max()),
        "h_phi_anticommute": float(np.abs(h @ pd.phi + pd.phi @ h).max()),
        "trace_h": abs(float(np.trace(h))),
        "eta_h": float(np.linalg.norm(pd.eta @ h)),
        "h_symmetric": float(np.abs(gh - gh.T).max()),
    }


def verify_h_identities(spec: ManifoldSpec, p: Sequence[float]) -> Dict[str, float]:
    pd = evaluate_point(spec, p)
    conn = connection(spec, pd.point)
    return h_identity_residuals(pd, compute_h(spec, pd.point), nabla_xi(spec, conn, pd.point))


def phi_basis(pd: PointFrameData, h: Optional[np.ndarray] = None) -> Tuple[np.ndarray, float]:
    """Orthonormal φ-basis (e_1..e_n, φe_1..φe_n, ξ) as matrix columns, plus λ.

    The e_i are taken from the g-orthonormal eigenvectors of h in decreasing
    eigenvalue order, so e_1 satisfies he_1 = λe_1 with λ the largest eigenvalue.
    """
    h = pd.h if h is None else h
    if h is None:
        h = np.zeros_like(pd.g)
    gh = pd.g @ h
    values, vectors = scipy.linalg.eigh(0.5 * (gh + gh.T), pd.g)
    order = np.argsort(values)[::-1]
    chosen: List[np.ndarray] = []
    spanned: List[np.ndarray] = [pd.xi / np.sqrt(pd.inner(pd.xi, pd.xi))]
    candidates = [vectors[:, k] for k in order] + list(np.eye(pd.dimension))
    for v in candidates:
        if len(chosen) == pd.n:
            break
        w = v.astype(float).copy()
        for u in spanned:
            w = w - pd.inner(u, w) * u
        norm = np.sqrt(max(pd.inner(w, w), 0.0))
        if norm < 1e-8:
            continue
        e = w / norm
        chosen.append(e)
        spanned.extend([e, pd.phi @ e])
    P = np.column_stack(chosen + [pd.phi @ e for e in chosen] + [spanned[0]])
    lam = float(max(values.max(), 0.0))
    return P, lam


@dataclass(frozen=True)
class StructurePoint:
    point: np.ndarray
    axioms: Dict[str, float]
    contact: float
    k_contact: float
    sasakian: float
    h_identities: Dict[str, float]
    h: np.ndarray


def structure_at(
    spec: ManifoldSpec,
    p: Sequence[float],
    pd: Optional[PointFrameData] = None,
    conn: Optional[Connection] = None,
) -> StructurePoint:
    pd = pd if pd is not None else evaluate_point(spec, p)
    conn = conn if conn is not None else connection(spec, pd.point)
    h = compute_h(spec, pd.point)
    nxi = nabla_xi(spec, conn, pd.point)
    return StructurePoint(
        point=pd.point,
        axioms=axiom_residuals(pd),
        contact=contact_residual(spec, pd),
        k_contact=float(np.abs(nxi + pd.phi).max()),
        sasakian=sasakian_residual(pd, nabla_phi(spec, conn, pd.point)),
        h_identities=h_identity_residuals(pd, h, nxi),
        h=h,
    )


class StructureReport(BaseModel):
    name: str
    points: int
    tolerance: float
    axioms: Dict[str, float]
    contact: float
    k_contact: float
    sasakian: float
    h_identities: Dict[str, float]
    h_norm: float
    almost_contact_metric: bool
    is_contact: bool
    is_k_contact: bool
    is_sasakian: bool


def _max_map(maps: Sequence[Dict[str, float]]) -> Dict[str, float]:
    return {key: max(m[key] for m in maps) for key in maps[0]}


def classify(
    spec: ManifoldSpec,
    points: Optional[Sequence[np.ndarray]] = None,
    tolerance: Optional[float] = None,
) -> StructureReport:
    """Max-over-grid residuals and class flags.

    Sasakian implies K-contact implies contact: each flag requires the previous one.
    """
    grid = list(points) if points is not None else spec.sample_points()
    if not grid:
        raise ValueError("classification needs a non-empty sample grid")
    tol = effective_tolerance(
        tolerance if tolerance is not None else settings.structure_tolerance,
        spec.fd_step or settings.fd_step,
    )
    logger.info(f"Classifying '{spec.name}' on {len(grid)} points")
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        results = list(pool.map(lambda q: structure_at(spec, q), grid))
    return summarize_structure(spec.name, results, tol)


def summarize_structure(name: str, results: Sequence[StructurePoint], tol: float) -> StructureReport:
    axioms = _max_map([r.axioms for r in results])
    h_ids = _max_map([r.h_identities for r in results])
    contact = max(r.contact for r in results)
    k_contact = max(r.k_contact for r in results)
    sasakian = max(r.sasakian for r in results)
    almost = max(axioms.values()) < max(tol, settings.axiom_tolerance)
    is_contact = almost and contact < tol
    is_k_contact = is_contact and k_contact < tol
    is_sasakian = is_k_contact and sasakian < tol
    return StructureReport(
        name=name,
        points=len(results),
        tolerance=tol,
        axioms=axioms,
        contact=contact,
        k_contact=k_contact,
        sasakian=sasakian,
        h_identities=h_ids,
        h_norm=max(float(np.abs(r.h).max()) for r in results),
        almost_contact_metric=almost,
        is_contact=is_contact,
        is_k_contact=is_k_contact,
        is_sasakian=is_sasakian,
    )
