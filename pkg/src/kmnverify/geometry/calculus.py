"""Finite-difference calculus on a manifold spec.

Fields are callables ``p -> array`` returning components in the manifold's basis
(coordinate basis for charts, the declared frame for the frame backend).
Derivatives along frame vectors use the frame matrix, so ``gradient(...)[i]``
is always E_i applied to the field.
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from ..config import settings
from .manifest import ManifoldSpec

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray], np.ndarray]


def _resolve_step(spec: Optional[ManifoldSpec], step: Optional[float]) -> float:
    if step is not None:
        return step
    if spec is not None and spec.fd_step is not None:
        return spec.fd_step
    return settings.fd_step


def central_difference(field: Field, p: np.ndarray, v: np.ndarray, step: float) -> np.ndarray:
    forward = np.asarray(field(p + step * v), dtype=float)
    backward = np.asarray(field(p - step * v), dtype=float)
    return (forward - backward) / (2.0 * step)


def directional_derivative(
    spec: Optional[ManifoldSpec],
    field: Field,
    direction: Sequence[float],
    p: Sequence[float],
    step: Optional[float] = None,
    richardson: Optional[bool] = None,
) -> np.ndarray:
    """Derivative of ``field`` at p along the coordinate vector ``direction``.

    Central differences with step δ, followed by one Richardson step
    (4 D(δ/2) - D(δ)) / 3 unless disabled.
    """
    point = np.asarray(p, dtype=float)
    v = np.asarray(direction, dtype=float)
    delta = _resolve_step(spec, step)
    if delta <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {delta}")
    coarse = central_difference(field, point, v, delta)
    if not (settings.richardson if richardson is None else richardson):
        return coarse
    fine = central_difference(field, point, v, delta / 2)
    return (4.0 * fine - coarse) / 3.0


def partials(
    spec: Optional[ManifoldSpec],
    field: Field,
    p: Sequence[float],
    step: Optional[float] = None,
    richardson: Optional[bool] = None,
) -> np.ndarray:
    """Coordinate partials: result[a] = ∂_a field at p."""
    point = np.asarray(p, dtype=float)
    basis = np.eye(point.shape[0])
    return np.stack(
        [directional_derivative(spec, field, basis[a], point, step, richardson) for a in range(point.shape[0])]
    )


def gradient(
    spec: ManifoldSpec,
    field: Field,
    p: Sequence[float],
    step: Optional[float] = None,
    richardson: Optional[bool] = None,
) -> np.ndarray:
    """result[i] = E_i(field) at p, with E_i the manifold's basis vector fields."""
    point = np.asarray(p, dtype=float)
    d = partials(spec, field, point, step, richardson)
    P = spec.frame_at(point)
    return np.tensordot(P.T, d, axes=1)


def _second_difference(field: Field, p: np.ndarray, a: int, b: int, h: float) -> np.ndarray:
    ea = np.zeros_like(p)
    eb = np.zeros_like(p)
    ea[a] = h
    eb[b] = h
    total = (
        np.asarray(field(p + ea + eb))
        - np.asarray(field(p + ea - eb))
        - np.asarray(field(p - ea + eb))
        + np.asarray(field(p - ea - eb))
    )
    return total / (4.0 * h * h)


def hessian(
    field: Field,
    p: Sequence[float],
    step: Optional[float] = None,
    richardson: Optional[bool] = None,
) -> np.ndarray:
    """result[a, b] = ∂_a ∂_b field at p via the symmetric four-point stencil."""
    point = np.asarray(p, dtype=float)
    h = step if step is not None else settings.second_step
    use_richardson = settings.richardson if richardson is None else richardson
    dim = point.shape[0]
    sample = np.asarray(field(point), dtype=float)
    out = np.zeros((dim, dim) + sample.shape)
    for a in range(dim):
        for b in range(a, dim):
            value = _second_difference(field, point, a, b, h)
            if use_richardson:
                value = (4.0 * _second_difference(field, point, a, b, h / 2) - value) / 3.0
            out[a, b] = value
            out[b, a] = value
    return out


def apply_vector(X: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """X(f) = sum_i X^i E_i(f) given grad[i] = E_i(f)."""
    return np.tensordot(X, grad, axes=1)


def lie_bracket(
    spec: ManifoldSpec,
    X: Field,
    Y: Field,
    p: Sequence[float],
    step: Optional[float] = None,
) -> np.ndarray:
    """[X,Y]^k = X(Y^k) - Y(X^k) + X^a Y^b c^k_ab in the manifold's basis."""
    point = np.asarray(p, dtype=float)
    x = np.asarray(X(point), dtype=float)
    y = np.asarray(Y(point), dtype=float)
    bracket = apply_vector(x, gradient(spec, Y, point, step)) - apply_vector(
        y, gradient(spec, X, point, step)
    )
    if spec.is_frame:
        bracket = bracket + np.einsum("kab,a,b->k", spec.brackets_at(point), x, y)
    return bracket


def exterior_derivative_1form(
    spec: ManifoldSpec,
    omega: Field,
    p: Sequence[float],
    step: Optional[float] = None,
) -> np.ndarray:
    """dω[i, j] = dω(E_i, E_j), scaled by ``settings.exterior_derivative_factor``."""
    point = np.asarray(p, dtype=float)
    d = gradient(spec, omega, point, step)
    result = d - d.T
    if spec.is_frame:
        result = result - np.einsum("k,kij->ij", np.asarray(omega(point)), spec.brackets_at(point))
    return settings.exterior_derivative_factor * result
