import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from kmnverify.config import settings
from kmnverify.curvature import (
    CurvatureTensor,
    admissible_vector,
    compatibility_residual,
    connection,
    dim3_ricci_residual,
    kulkarni,
    oracle_at,
    phi_sectional,
    ricci_and_scalar,
    riemann,
    self_adjoint_residual,
    torsion_residual,
    xi_curvature_residual,
)
from kmnverify.geometry import PreconditionError, evaluate_point, parse_manifest, partials
from kmnverify.structure import compute_h, phi_basis

P = [0.2, -0.4, 0.3]


def test_flat_space_has_no_curvature(euclidean3, euclidean5):
    for spec in (euclidean3, euclidean5):
        pd, conn, curvature = oracle_at(spec, spec.center() + 0.1)
        Q, tau = ricci_and_scalar(curvature)
        assert np.abs(curvature.components).max() < 1e-8
        assert np.abs(Q).max() < 1e-8
        assert abs(tau) < 1e-8


@pytest.mark.parametrize("name", ["sasakian", "heisenberg", "ns_half"])
def test_connection_is_levi_civita(request, name):
    spec = request.getfixturevalue(name)
    pd = evaluate_point(spec, P)
    conn = connection(spec, P)
    assert compatibility_residual(conn, pd.g) < 1e-8
    assert torsion_residual(conn) < 1e-8


@pytest.mark.parametrize("name", ["sasakian", "heisenberg", "ns_half"])
def test_curvature_symmetries(request, name):
    spec = request.getfixturevalue(name)
    curvature = riemann(spec, P)
    assert max(curvature.symmetry_residuals().values()) < 1e-6


@pytest.mark.parametrize("name", ["sasakian", "heisenberg"])
def test_sasakian_scalar_and_phi_sectional(request, name):
    spec = request.getfixturevalue(name)
    pd, _, curvature = oracle_at(spec, P)
    Q, tau = ricci_and_scalar(curvature)
    assert tau == pytest.approx(-2.0, abs=1e-5)
    assert self_adjoint_residual(Q, pd.g) < 1e-6
    e = admissible_vector(pd)
    assert phi_sectional(curvature, pd, e) == pytest.approx(-3.0, abs=1e-5)
    assert xi_curvature_residual(curvature, pd) < 1e-5


def test_ns_scalar_curvature(ns_half):
    _, _, curvature = oracle_at(ns_half, P)
    _, tau = ricci_and_scalar(curvature)
    assert tau == pytest.approx(-0.5, abs=1e-10)


@pytest.mark.parametrize("name", ["sasakian", "ns_half", "broken_sasakian"])
def test_dim3_curvature_is_determined_by_ricci(request, name):
    curvature = riemann(request.getfixturevalue(name), P)
    assert dim3_ricci_residual(curvature) < 1e-6


def test_backends_agree_on_the_heisenberg_structure(sasakian, heisenberg):
    # Coordinate curvature re-expressed in the frame E1, E2, E3 matches the frame backend.
    p = np.array([0.3, 0.5, -0.2])
    frame = heisenberg.frame_at(p)
    pd_chart, _, chart_curvature = oracle_at(sasakian, p)
    pd_frame, _, frame_curvature = oracle_at(heisenberg, p)
    moved = pd_chart.change_basis(frame)
    np.testing.assert_allclose(moved.g, pd_frame.g, atol=1e-12)
    np.testing.assert_allclose(moved.phi, pd_frame.phi, atol=1e-12)
    np.testing.assert_allclose(moved.xi, pd_frame.xi, atol=1e-12)
    np.testing.assert_allclose(chart_curvature.change_basis(frame).components, frame_curvature.components, atol=1e-5)


def test_phi_sectional_rejects_inadmissible_vectors(ns_half):
    pd, _, curvature = oracle_at(ns_half, P)
    with pytest.raises(PreconditionError):
        phi_sectional(curvature, pd, pd.xi)
    with pytest.raises(PreconditionError):
        phi_sectional(curvature, pd, [2.0, 0.0, 0.0])


def test_phi_sectional_is_independent_of_direction_in_dim3(ns_half):
    pd, _, curvature = oracle_at(ns_half, P)
    values = [
        phi_sectional(curvature, pd, np.array([np.cos(t), np.sin(t), 0.0])) for t in np.linspace(0, np.pi, 7)
    ]
    np.testing.assert_allclose(values, -1.75, atol=1e-10)


def test_kulkarni_of_identity_is_constant_curvature():
    g = np.eye(3)
    R = -0.5 * kulkarni(np.eye(3), g)
    X, Y = np.eye(3)[0], np.eye(3)[1]
    curvature = CurvatureTensor(np.zeros(3), R, g)
    np.testing.assert_allclose(curvature.apply(X, Y, Y), X)
    assert max(curvature.symmetry_residuals().values()) < 1e-15


@hyp_settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False), min_size=6, max_size=6))
def test_kulkarni_of_symmetric_operator_has_curvature_symmetries(entries):
    S = np.zeros((3, 3))
    S[np.triu_indices(3)] = entries
    S = S + np.triu(S, 1).T
    R = kulkarni(S, np.eye(3))
    assert max(CurvatureTensor(np.zeros(3), R, np.eye(3)).symmetry_residuals().values()) < 1e-12


def test_change_basis_preserves_scalar_curvature(ns_half, rng):
    _, _, curvature = oracle_at(ns_half, P)
    M = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    _, tau = ricci_and_scalar(curvature)
    _, tau_moved = ricci_and_scalar(curvature.change_basis(M))
    assert tau_moved == pytest.approx(tau, abs=1e-10)


def test_metric_partials_converge_at_second_order(sasakian):
    # Central differences on the quadratic metric are exact; a transcendental
    # rescaling makes the truncation error visible.
    p = np.array([0.2, 0.3, 0.1])
    field = lambda q: np.exp(q[0]) * sasakian.metric_at(q)
    exact = np.exp(p[0]) * sasakian.metric_at(p)
    errors = [
        np.abs(partials(None, field, p, h, richardson=False)[0] - exact).max() for h in (1e-2, 5e-3)
    ]
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_oracle_phi_basis_on_ns(ns_half):
    pd, _, _ = oracle_at(ns_half, P)
    B, lam = phi_basis(pd.with_h(compute_h(ns_half, P)))
    assert lam == pytest.approx(np.sqrt(1 - 0.75), abs=1e-8)


def test_christoffel_symbols_converge_at_second_order(manifest_data, monkeypatch):
    data = manifest_data("euclidean-r3")
    data["metric"][0][0] = "exp(x)"
    data.pop("expected")
    base = parse_manifest(data)
    monkeypatch.setattr(settings, "richardson", False)
    p = [0.3, 0.0, 0.0]
    # Γ^x_xx = 1/2 everywhere
    errors = [
        abs(connection(dataclasses.replace(base, fd_step=h), p).gamma[0, 0, 0] - 0.5) for h in (1e-2, 5e-3)
    ]
    assert 3.5 <= errors[0] / errors[1] <= 4.5
