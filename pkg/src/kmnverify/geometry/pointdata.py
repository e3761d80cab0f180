"""Pointwise structure tensors in a chosen basis."""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .manifest import EvaluationError, ManifoldSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointFrameData:
    """g, φ, ξ, η (and later h) at one point.

    Matrices act on column vectors of basis components: φ[k, j] is the k-th
    component of φE_j. ``basis`` is "coordinate", "frame" or "custom" after a
    change of basis.
    """

    basis: str
    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    h: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return self.g.shape[0]

    @property
    def n(self) -> int:
        return (self.dimension - 1) // 2

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.g @ y)

    def with_h(self, h: np.ndarray) -> "PointFrameData":
        return replace(self, h=np.asarray(h, dtype=float))

    def change_basis(self, P: np.ndarray) -> "PointFrameData":
        """Re-express every tensor in the basis E'_i = sum_a P[a, i] E_a."""
        P = np.asarray(P, dtype=float)
        P_inv = np.linalg.inv(P)
        g = P.T @ self.g @ P
        return PointFrameData(
            basis="custom",
            point=self.point,
            g=g,
            g_inv=np.linalg.inv(g),
            phi=P_inv @ self.phi @ P,
            xi=P_inv @ self.xi,
            eta=P.T @ self.eta,
            h=None if self.h is None else P_inv @ self.h @ P,
        )


def evaluate_point(spec: ManifoldSpec, p: Sequence[float]) -> PointFrameData:
    """Evaluate the structure tensors at p; h is left unset."""
    point = np.asarray(p, dtype=float)
    if not spec.contains(point):
        logger.warning(f"Point {point.tolist()} lies outside the sample domain of '{spec.name}'")
    g = spec.metric_at(point)
    if np.linalg.eigvalsh(g).min() <= 0:
        raise EvaluationError(f"Metric of '{spec.name}' is not positive definite", point)
    xi = spec.xi_at(point)
    return PointFrameData(
        basis="frame" if spec.is_frame else "coordinate",
        point=point,
        g=g,
        g_inv=np.linalg.inv(g),
        phi=spec.phi_at(point),
        xi=xi,
        eta=g @ xi,
    )
