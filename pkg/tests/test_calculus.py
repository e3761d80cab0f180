import numpy as np
import pytest

from kmnverify.config import settings
from kmnverify.geometry import (
    directional_derivative,
    exterior_derivative_1form,
    gradient,
    hessian,
    lie_bracket,
    partials,
)


def _exp_field(p):
    return np.array([np.exp(p[0])])


def test_central_difference_is_second_order():
    p = np.array([0.3, 0.0, 0.0])
    exact = np.exp(0.3)
    errors = [
        abs(directional_derivative(None, _exp_field, [1, 0, 0], p, step=h, richardson=False)[0] - exact)
        for h in (1e-2, 5e-3)
    ]
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_richardson_improves_accuracy():
    p = np.array([0.3, 0.0, 0.0])
    exact = np.exp(0.3)
    plain = directional_derivative(None, _exp_field, [1, 0, 0], p, step=1e-2, richardson=False)[0]
    extrapolated = directional_derivative(None, _exp_field, [1, 0, 0], p, step=1e-2, richardson=True)[0]
    assert abs(extrapolated - exact) < 1e-8 < abs(plain - exact)


def test_non_positive_step_is_rejected():
    with pytest.raises(ValueError, match="step must be positive"):
        directional_derivative(None, _exp_field, [1, 0, 0], [0, 0, 0], step=0.0)


def test_partials_of_polynomial():
    field = lambda q: np.array([q[0] * q[1], q[2] ** 2])
    d = partials(None, field, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(d, [[2.0, 0.0], [1.0, 0.0], [0.0, 6.0]], atol=1e-8)


def test_hessian_of_polynomial():
    field = lambda q: np.array([q[0] * q[1], q[2] ** 2, np.sin(q[0])])
    H = hessian(field, [0.5, -1.0, 2.0])
    assert H[0, 1, 0] == pytest.approx(1.0, abs=1e-6)
    assert H[1, 0, 0] == pytest.approx(1.0, abs=1e-6)
    assert H[2, 2, 1] == pytest.approx(2.0, abs=1e-6)
    assert H[0, 0, 2] == pytest.approx(-np.sin(0.5), abs=1e-6)
    assert H[0, 0, 0] == pytest.approx(0.0, abs=1e-6)


def test_gradient_uses_frame_vectors(heisenberg):
    p = np.array([0.1, 0.4, -0.2])
    d = gradient(heisenberg, lambda q: np.array([q[2]]), p)[:, 0]
    np.testing.assert_allclose(d, [0.8, 0.0, 2.0], atol=1e-8)


def test_lie_bracket_on_frame(heisenberg, ns_half):
    p = np.zeros(3)
    e = np.eye(3)
    np.testing.assert_allclose(lie_bracket(heisenberg, lambda q: e[0], lambda q: e[1], p), [0, 0, 2], atol=1e-12)
    np.testing.assert_allclose(lie_bracket(ns_half, lambda q: e[2], lambda q: e[0], p), [0, 1, 0], atol=1e-12)


def test_lie_bracket_on_chart(euclidean3):
    X = lambda q: np.array([-q[1], q[0], 0.0])
    Y = lambda q: np.array([1.0, 0.0, 0.0])
    np.testing.assert_allclose(lie_bracket(euclidean3, X, Y, [0.2, 0.3, 0.0]), [0.0, -1.0, 0.0], atol=1e-8)


def test_exterior_derivative_scaling(euclidean3):
    omega = lambda q: np.array([-q[1], q[0], 0.0])
    d = exterior_derivative_1form(euclidean3, omega, [0.1, 0.2, 0.3])
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 0] = 2.0, -2.0
    np.testing.assert_allclose(d, settings.exterior_derivative_factor * expected, atol=1e-8)


def test_exterior_derivative_on_frame(ns_half):
    # dη(E1, E2) = -factor * η([E1, E2]) = -2 * factor
    d = exterior_derivative_1form(ns_half, ns_half.eta_at, np.zeros(3))
    assert d[0, 1] == pytest.approx(-2.0 * settings.exterior_derivative_factor)
    assert d[0, 2] == pytest.approx(0.0)
