"""Levi-Civita connection and curvature: the numeric oracle.

Conventions:

* ``gamma[l, i, j]``: ∇_{E_i} E_j = sum_l gamma[l, i, j] E_l.
* ``R[l, i, j, k]``: component l of R(E_i, E_j) E_k with
  R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z.
* Lowered form ``R_low[i, j, k, l] = g(R(E_i, E_j) E_k, E_l)``.
* Ricci(X, Y) = tr(Z -> R(Z, X) Y), so the unit sphere has positive scalar curvature.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .geometry import (
    EvaluationError,
    ManifoldSpec,
    PointFrameData,
    PreconditionError,
    evaluate_point,
    gradient,
    hessian,
    partials,
)

logger = logging.getLogger(__name__)

ORACLE = "oracle"
SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class Connection:
    point: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray  # dgamma[a, l, i, j] = E_a(gamma[l, i, j])
    brackets: np.ndarray  # c[k, i, j] of the basis fields; zero for charts
    metric_derivative: np.ndarray  # dg[a, i, j] = E_a(g_ij)

    def covariant(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """∇_X Y for constant-component Y at this point."""
        return np.einsum("lij,i,j->l", self.gamma, X, Y)


@dataclass(frozen=True)
class CurvatureTensor:
    point: np.ndarray
    components: np.ndarray
    g: np.ndarray
    source: str = ORACLE

    @property
    def dimension(self) -> int:
        return self.g.shape[0]

    @property
    def lowered(self) -> np.ndarray:
        return np.einsum("mijk,ml->ijkl", self.components, self.g)

    def apply(self, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        return np.einsum("lijk,i,j,k->l", self.components, X, Y, Z)

    def change_basis(self, P: np.ndarray) -> "CurvatureTensor":
        P_inv = np.linalg.inv(P)
        R = np.einsum("lm,mabc,ai,bj,ck->lijk", P_inv, self.components, P, P, P)
        return CurvatureTensor(self.point, R, P.T @ self.g @ P, self.source)

    def symmetry_residuals(self) -> Dict[str, float]:
        R = self.components
        low = self.lowered
        bianchi = R + np.einsum("ljki->lijk", R) + np.einsum("lkij->lijk", R)
        return {
            "antisymmetry_xy": float(np.abs(low + np.einsum("jikl->ijkl", low)).max()),
            "antisymmetry_zw": float(np.abs(low + np.einsum("ijlk->ijkl", low)).max()),
            "pair_symmetry": float(np.abs(low - np.einsum("klij->ijkl", low)).max()),
            "first_bianchi": float(np.abs(bianchi).max()),
        }


def kulkarni(A: np.ndarray, g: np.ndarray) -> np.ndarray:
    """K(A)(X,Y)Z = g(AX,Z)Y - g(AY,Z)X + g(X,Z)AY - g(Y,Z)AX as R[l, i, j, k]."""
    I = np.eye(g.shape[0])
    GA = g @ A
    return (
        np.einsum("ki,lj->lijk", GA, I)
        - np.einsum("kj,li->lijk", GA, I)
        + np.einsum("ik,lj->lijk", g, A)
        - np.einsum("jk,li->lijk", g, A)
    )


def koszul_gamma(G: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Levi-Civita coefficients of a frame with constant metric G and brackets c."""
    C = np.einsum("mij,mk->ijk", c, G)
    lowered = 0.5 * (C - np.einsum("jki->ijk", C) + np.einsum("kij->ijk", C))
    return np.einsum("lk,ijk->lij", np.linalg.inv(G), lowered)


def _chart_connection(spec: ManifoldSpec, p: np.ndarray) -> Connection:
    g = spec.metric_at(p)
    g_inv = np.linalg.inv(g)
    dg = partials(spec, spec.metric_at, p)
    ddg = hessian(spec.metric_at, p)
    T = np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg) - dg
    gamma = 0.5 * np.einsum("lm,mij->lij", g_inv, T)
    dT = (
        np.einsum("aimj->amij", ddg)
        + np.einsum("ajmi->amij", ddg)
        - ddg
    )
    dg_inv = -np.einsum("lp,apq,qm->alm", g_inv, dg, g_inv)
    dgamma = 0.5 * (
        np.einsum("alm,mij->alij", dg_inv, T) + np.einsum("lm,amij->alij", g_inv, dT)
    )
    n = spec.dimension
    return Connection(p, gamma, dgamma, np.zeros((n, n, n)), dg)


def _frame_connection(spec: ManifoldSpec, p: np.ndarray) -> Connection:
    G = spec.metric_at(p)
    c = spec.brackets_at(p)
    gamma = koszul_gamma(G, c)
    n = spec.dimension
    if spec.constant_frame:
        dgamma = np.zeros((n,) * 4)
    else:
        dgamma = gradient(spec, lambda q: koszul_gamma(G, spec.brackets_at(q)), p)
    return Connection(p, gamma, dgamma, c, np.zeros((n, n, n)))


def connection(spec: ManifoldSpec, p: Sequence[float]) -> Connection:
    """Levi-Civita connection at p: Christoffel symbols (chart) or Koszul (frame)."""
    point = np.asarray(p, dtype=float)
    try:
        if spec.is_frame:
            return _frame_connection(spec, point)
        return _chart_connection(spec, point)
    except np.linalg.LinAlgError as e:
        raise EvaluationError(f"Failed to compute connection: {e}", point) from e


def compatibility_residual(conn: Connection, g: np.ndarray) -> float:
    """max |(∇_i g)(E_j, E_k)|."""
    nabla_g = (
        conn.metric_derivative
        - np.einsum("mij,mk->ijk", conn.gamma, g)
        - np.einsum("mik,jm->ijk", conn.gamma, g)
    )
    return float(np.abs(nabla_g).max())


def torsion_residual(conn: Connection) -> float:
    """max |∇_i E_j - ∇_j E_i - [E_i, E_j]|."""
    torsion = conn.gamma - np.einsum("lji->lij", conn.gamma) - conn.brackets
    return float(np.abs(torsion).max())


def riemann_from_connection(conn: Connection) -> np.ndarray:
    gamma = conn.gamma
    return (
        np.einsum("iljk->lijk", conn.dgamma)
        - np.einsum("jlik->lijk", conn.dgamma)
        + np.einsum("mjk,lim->lijk", gamma, gamma)
        - np.einsum("mik,ljm->lijk", gamma, gamma)
        - np.einsum("mij,lmk->lijk", conn.brackets, gamma)
    )


def riemann(spec: ManifoldSpec, p: Sequence[float], conn: Optional[Connection] = None) -> CurvatureTensor:
    point = np.asarray(p, dtype=float)
    conn = conn or connection(spec, point)
    return CurvatureTensor(point, riemann_from_connection(conn), spec.metric_at(point), ORACLE)


def ricci_and_scalar(curvature: CurvatureTensor) -> Tuple[np.ndarray, float]:
    """Ricci operator Q and scalar curvature τ = tr Q."""
    ricci = np.einsum("iijk->jk", curvature.components)
    Q = np.linalg.inv(curvature.g) @ ricci
    return Q, float(np.trace(Q))


def _check_admissible(pd: PointFrameData, X: np.ndarray, tolerance: float = 1e-8) -> None:
    if abs(pd.inner(X, X) - 1.0) > tolerance or abs(float(pd.eta @ X)) > tolerance:
        raise PreconditionError("phi-sectional curvature needs a unit vector orthogonal to xi")


def phi_sectional(curvature: CurvatureTensor, pd: PointFrameData, X: Sequence[float]) -> float:
    """F = g(R(X, φX)φX, X) for a unit X orthogonal to ξ."""
    x = np.asarray(X, dtype=float)
    _check_admissible(pd, x)
    phi_x = pd.phi @ x
    return pd.inner(curvature.apply(x, phi_x, phi_x), x)


def admissible_vector(pd: PointFrameData, seed: Optional[np.ndarray] = None) -> np.ndarray:
    """Project ``seed`` (default the first basis vector) onto ker η and normalize."""
    v = np.asarray(seed, dtype=float) if seed is not None else np.eye(pd.dimension)[0]
    v = v - float(pd.eta @ v) * pd.xi
    norm = np.sqrt(pd.inner(v, v))
    if norm < 1e-12:
        v = np.eye(pd.dimension)[1] - float(pd.eta[1]) * pd.xi
        norm = np.sqrt(pd.inner(v, v))
    return v / norm


def xi_curvature_residual(curvature: CurvatureTensor, pd: PointFrameData) -> float:
    """max |R(X,Y)ξ - (η(Y)X - η(X)Y)| over basis pairs."""
    R_xi = np.einsum("lijk,k->lij", curvature.components, pd.xi)
    I = np.eye(pd.dimension)
    expected = np.einsum("j,li->lij", pd.eta, I) - np.einsum("i,lj->lij", pd.eta, I)
    return float(np.abs(R_xi - expected).max())


def dim3_curvature_from_ricci(Q: np.ndarray, tau: float, g: np.ndarray) -> np.ndarray:
    """g(Y,Z)QX - g(X,Z)QY + g(QY,Z)X - g(QX,Z)Y - (τ/2)(g(Y,Z)X - g(X,Z)Y)."""
    return -kulkarni(Q, g) + 0.25 * tau * kulkarni(np.eye(g.shape[0]), g)


def dim3_ricci_residual(curvature: CurvatureTensor) -> float:
    Q, tau = ricci_and_scalar(curvature)
    predicted = dim3_curvature_from_ricci(Q, tau, curvature.g)
    return float(np.abs(curvature.components - predicted).max())


def self_adjoint_residual(Q: np.ndarray, g: np.ndarray) -> float:
    gQ = g @ Q
    return float(np.abs(gQ - gQ.T).max())


def nabla_vector(
    spec: ManifoldSpec, conn: Connection, field: Callable[[np.ndarray], np.ndarray], p: Sequence[float]
) -> np.ndarray:
    """N[k, i] = (∇_{E_i} V)^k, i.e. the matrix of X -> ∇_X V."""
    point = np.asarray(p, dtype=float)
    dV = gradient(spec, field, point)
    return dV.T + np.einsum("kij,j->ki", conn.gamma, np.asarray(field(point)))


def nabla_endomorphism(
    spec: ManifoldSpec,
    conn: Connection,
    field: Callable[[np.ndarray], np.ndarray],
    p: Sequence[float],
    step: Optional[float] = None,
) -> np.ndarray:
    """N[i, k, j] = component k of (∇_{E_i} A) E_j."""
    point = np.asarray(p, dtype=float)
    A = np.asarray(field(point))
    dA = gradient(spec, field, point, step)
    return (
        dA
        + np.einsum("kim,mj->ikj", conn.gamma, A)
        - np.einsum("km,mij->ikj", A, conn.gamma)
    )


def oracle_at(spec: ManifoldSpec, p: Sequence[float]) -> Tuple[PointFrameData, Connection, CurvatureTensor]:
    """Point data, connection and oracle curvature at p in one pass."""
    pd = evaluate_point(spec, p)
    conn = connection(spec, pd.point)
    curvature = CurvatureTensor(pd.point, riemann_from_connection(conn), pd.g, ORACLE)
    logger.debug(f"Oracle curvature at {pd.point.tolist()}: max |R| = {np.abs(curvature.components).max():.3e}")
    return pd, conn, curvature


def symmetry_tolerance(curvature: CurvatureTensor) -> float:
    return settings.oracle_tolerance if curvature.source == ORACLE else settings.synthetic_tolerance
