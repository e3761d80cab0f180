"""Pointwise algebra: the eight basis tensors and synthetic space-form curvature.

The basis tensors are built from any :class:`PointFrameData` carrying h, so the
synthetic models and the manifold pipelines share one set of formulas.
"""

import logging
from dataclasses import dataclass, fields
from typing import Dict, Optional, Sequence

import numpy as np

from .curvature import SYNTHETIC, CurvatureTensor, kulkarni
from .geometry import PointFrameData
from .structure import axiom_residuals, phi_basis

logger = logging.getLogger(__name__)

BASIS_SIZE = 8


@dataclass(frozen=True)
class AlgebraicModel(PointFrameData):
    lam: float = 0.0


def standard_model(n: int, lam: float) -> AlgebraicModel:
    """φe_i = e_{n+i}, ξ = e_{2n+1}, h = λ diag(I_n, -I_n, 0), g = I."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    dim = 2 * n + 1
    I_n = np.eye(n)
    phi = np.zeros((dim, dim))
    phi[n : 2 * n, :n] = I_n
    phi[:n, n : 2 * n] = -I_n
    xi = np.eye(dim)[-1]
    h = lam * np.diag(np.concatenate([np.ones(n), -np.ones(n), [0.0]]))
    return AlgebraicModel(
        basis="model",
        point=np.zeros(dim),
        g=np.eye(dim),
        g_inv=np.eye(dim),
        phi=phi,
        xi=xi,
        eta=xi.copy(),
        h=h,
        lam=float(lam),
    )


def conjugate(model: AlgebraicModel, Q: np.ndarray) -> AlgebraicModel:
    """Re-express the model in the orthonormal basis given by the columns of Q."""
    pd = model.change_basis(Q)
    return AlgebraicModel(
        basis="model",
        point=model.point,
        g=pd.g,
        g_inv=pd.g_inv,
        phi=pd.phi,
        xi=pd.xi,
        eta=pd.eta,
        h=pd.h,
        lam=model.lam,
    )


def aligned_model(pd: PointFrameData) -> AlgebraicModel:
    """Point data re-expressed in its φ-basis; matches standard_model(n, λ) when h has that shape."""
    if pd.h is None:
        raise ValueError("aligned_model needs point data with h filled in")
    P, lam = phi_basis(pd)
    aligned = pd.change_basis(P)
    return AlgebraicModel(
        basis="model",
        point=pd.point,
        g=aligned.g,
        g_inv=aligned.g_inv,
        phi=aligned.phi,
        xi=aligned.xi,
        eta=aligned.eta,
        h=aligned.h,
        lam=lam,
    )


def model_invariants(model: PointFrameData) -> Dict[str, float]:
    h = model.h if model.h is not None else np.zeros_like(model.g)
    gh = model.g @ h
    residuals = axiom_residuals(model)
    residuals.update(
        {
            "g_symmetric": float(np.abs(model.g - model.g.T).max()),
            "h_symmetric": float(np.abs(gh - gh.T).max()),
            "h_phi_anticommute": float(np.abs(h @ model.phi + model.phi @ h).max()),
            "h_xi": float(np.abs(h @ model.xi).max()),
            "trace_h": abs(float(np.trace(h))),
        }
    )
    return residuals


def basis_tensor_array(pd: PointFrameData) -> np.ndarray:
    """Stack B[a, l, i, j, k] = component l of R_{a+1}(E_i, E_j)E_k."""
    if pd.h is None:
        raise ValueError("basis tensors need h")
    G, P, H = pd.g, pd.phi, pd.h
    A = P @ H
    e, x = pd.eta, pd.xi
    I = np.eye(pd.dimension)
    GP, GH, GA = G @ P, G @ H, G @ A

    def eta_term(B: np.ndarray, GB: np.ndarray) -> np.ndarray:
        return (
            np.einsum("i,k,lj->lijk", e, e, B)
            - np.einsum("j,k,li->lijk", e, e, B)
            + np.einsum("ki,j,l->lijk", GB, e, x)
            - np.einsum("kj,i,l->lijk", GB, e, x)
        )

    R1 = -0.5 * kulkarni(I, G)
    R2 = (
        np.einsum("ik,lj->lijk", GP, P)
        - np.einsum("jk,li->lijk", GP, P)
        + 2.0 * np.einsum("ij,lk->lijk", GP, P)
    )
    R3 = eta_term(I, G)
    R4 = -kulkarni(H, G)
    R5 = (
        np.einsum("kj,li->lijk", GH, H)
        - np.einsum("ki,lj->lijk", GH, H)
        + np.einsum("ki,lj->lijk", GA, A)
        - np.einsum("kj,li->lijk", GA, A)
    )
    R6 = eta_term(H, GH)
    R7 = -kulkarni(A, G)
    R8 = eta_term(A, GA)
    return np.stack([R1, R2, R3, R4, R5, R6, R7, R8])


def basis_tensor(index: int, model: PointFrameData, X: Sequence[float], Y: Sequence[float], Z: Sequence[float]) -> np.ndarray:
    """R_index(X, Y)Z for index in 1..8."""
    if not 1 <= index <= BASIS_SIZE:
        raise IndexError(f"basis tensor index must be in 1..{BASIS_SIZE}, got {index}")
    return np.einsum(
        "lijk,i,j,k->l",
        basis_tensor_array(model)[index - 1],
        np.asarray(X, dtype=float),
        np.asarray(Y, dtype=float),
        np.asarray(Z, dtype=float),
    )


@dataclass(frozen=True)
class SpaceFormCoefficients:
    f1: float = 0.0
    f2: float = 0.0
    f3: float = 0.0
    f4: float = 0.0
    f5: float = 0.0
    f6: float = 0.0
    f7: float = 0.0
    f8: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "SpaceFormCoefficients":
        values = [float(v) for v in values]
        if len(values) != BASIS_SIZE:
            raise ValueError(f"expected {BASIS_SIZE} coefficients, got {len(values)}")
        return cls(*values)

    def as_dict(self) -> Dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @property
    def kappa(self) -> float:
        return self.f1 - self.f3

    @property
    def mu(self) -> float:
        return self.f4 - self.f6

    @property
    def nu(self) -> float:
        return self.f7 - self.f8


def sasakian_space_form(c: float) -> SpaceFormCoefficients:
    """Sasakian space form of constant φ-sectional curvature c."""
    return SpaceFormCoefficients(f1=(c + 3) / 4, f2=(c - 1) / 4, f3=(c - 1) / 4)


def kappa_mu_space_form(F: float, kappa: float, mu: float) -> SpaceFormCoefficients:
    """(κ,μ)-space form of constant φ-sectional curvature F."""
    return SpaceFormCoefficients(
        f1=(F + 3) / 4,
        f2=(F - 1) / 4,
        f3=(F + 3) / 4 - kappa,
        f4=1.0,
        f5=0.5,
        f6=1.0 - mu,
    )


def rigid_family(f6: float) -> SpaceFormCoefficients:
    """The only admissible coefficients on a contact metric space form of dimension >= 5."""
    return SpaceFormCoefficients(
        f1=(f6 + 1) / 2,
        f2=(f6 - 1) / 2,
        f3=(3 * f6 + 1) / 2,
        f4=1.0,
        f5=0.5,
        f6=f6,
    )


def dim3_space_form(F: float, kappa: float, mu: float, nu: float) -> SpaceFormCoefficients:
    """R = F R1 + (F - κ) R3 + μ R4 + ν R7."""
    return SpaceFormCoefficients(f1=F, f3=F - kappa, f4=mu, f7=nu)


def synthetic_curvature(model: PointFrameData, f: SpaceFormCoefficients) -> CurvatureTensor:
    components = np.einsum("a,alijk->lijk", f.as_array(), basis_tensor_array(model))
    return CurvatureTensor(model.point, components, model.g, SYNTHETIC)


def contact_identities(model: PointFrameData) -> Dict[str, float]:
    """Residuals of R2 = 3(R1 + R3), R5 = 0, R6 = -R4 and, in dimension 3, R8 = -R7.

    The identities are theorems for three-dimensional contact metric points; for
    larger dimensions the residuals are recorded, not expected to vanish.
    """
    B = basis_tensor_array(model)
    residuals = {
        "r2_equals_3_r1_plus_r3": float(np.abs(B[1] - 3 * (B[0] + B[2])).max()),
        "r5_vanishes": float(np.abs(B[4]).max()),
        "r6_equals_minus_r4": float(np.abs(B[5] + B[3]).max()),
    }
    if model.n == 1:
        residuals["r8_equals_minus_r7"] = float(np.abs(B[7] + B[6]).max())
    return residuals


def random_coefficients(rng: np.random.Generator, scale: float = 1.0, **fixed: float) -> SpaceFormCoefficients:
    values = rng.uniform(-scale, scale, BASIS_SIZE)
    f = SpaceFormCoefficients.from_array(values).as_dict()
    f.update({k: float(v) for k, v in fixed.items()})
    return SpaceFormCoefficients(**f)


def design_matrix(model: PointFrameData, basis: Optional[np.ndarray] = None) -> np.ndarray:
    """Columns are the flattened basis tensors; used by the space-form fit."""
    B = basis_tensor_array(model) if basis is None else basis
    return B.reshape(BASIS_SIZE, -1).T
