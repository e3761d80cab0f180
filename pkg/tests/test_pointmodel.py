import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from kmnverify.curvature import phi_sectional
from kmnverify.geometry import evaluate_point
from kmnverify.pointmodel import (
    BASIS_SIZE,
    SpaceFormCoefficients,
    aligned_model,
    basis_tensor,
    basis_tensor_array,
    conjugate,
    contact_identities,
    design_matrix,
    dim3_space_form,
    kappa_mu_space_form,
    model_invariants,
    random_coefficients,
    rigid_family,
    sasakian_space_form,
    standard_model,
    synthetic_curvature,
)
from kmnverify.structure import compute_h


def test_standard_model_is_a_contact_metric_point(model3, model_high):
    for model in (model3, model_high):
        assert max(model_invariants(model).values()) < 1e-15


def test_standard_model_rejects_bad_arguments():
    with pytest.raises(ValueError):
        standard_model(0, 0.5)
    with pytest.raises(ValueError):
        standard_model(1, -0.1)


def test_three_dimensional_identities(model3):
    residuals = contact_identities(model3)
    assert set(residuals) == {
        "r2_equals_3_r1_plus_r3",
        "r5_vanishes",
        "r6_equals_minus_r4",
        "r8_equals_minus_r7",
    }
    assert max(residuals.values()) < 1e-12


def test_identities_do_not_hold_in_higher_dimension(model_high):
    residuals = contact_identities(model_high)
    assert "r8_equals_minus_r7" not in residuals
    assert residuals["r5_vanishes"] > 0.1


def test_r2_phi_sectional_value_is_three(model3, model_high):
    for model in (model3, model_high):
        e = np.eye(model.dimension)[0]
        phi_e = model.phi @ e
        assert model.inner(basis_tensor(2, model, e, phi_e, phi_e), e) == pytest.approx(3.0)
        assert model.inner(basis_tensor(1, model, e, phi_e, phi_e), e) == pytest.approx(1.0)


def test_basis_tensor_index_range(model3):
    e = np.eye(3)[0]
    with pytest.raises(IndexError):
        basis_tensor(0, model3, e, e, e)
    with pytest.raises(IndexError):
        basis_tensor(9, model3, e, e, e)


def test_basis_tensors_need_h(model3):
    with pytest.raises(ValueError, match="need h"):
        basis_tensor_array(dataclasses.replace(model3, h=None))


def test_basis_tensors_are_algebraic_curvature_tensors(model_high):
    B = basis_tensor_array(model_high)
    for a in range(BASIS_SIZE):
        curvature = synthetic_curvature(model_high, SpaceFormCoefficients.from_array(np.eye(BASIS_SIZE)[a]))
        assert max(curvature.symmetry_residuals().values()) < 1e-12
    assert design_matrix(model_high, B).shape == (model_high.dimension**4, BASIS_SIZE)


@hyp_settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_conjugation_preserves_the_identities(seed):
    model = standard_model(1, 0.7)
    Q = ortho_group.rvs(3, random_state=seed)
    moved = conjugate(model, Q)
    assert max(model_invariants(moved).values()) < 1e-12
    assert max(contact_identities(moved).values()) < 1e-12


def test_coefficient_builders():
    assert sasakian_space_form(-3.0).kappa == pytest.approx(1.0)
    f = kappa_mu_space_form(F=-1.0, kappa=0.5, mu=1.25)
    assert (f.kappa, f.mu, f.nu) == pytest.approx((0.5, 1.25, 0.0))
    assert (f.f4, f.f5) == (1.0, 0.5)
    r = rigid_family(0.3)
    assert r.kappa == pytest.approx(-0.3)
    assert r.mu == pytest.approx(0.7)
    d = dim3_space_form(F=-1.75, kappa=0.75, mu=1.0, nu=0.2)
    assert (d.kappa, d.mu, d.nu) == pytest.approx((0.75, 1.0, 0.2))


def test_phi_sectional_of_space_forms(model3, model_high):
    e = np.eye(3)[0]
    f = dim3_space_form(F=-1.75, kappa=0.75, mu=1.0, nu=0.0)
    assert phi_sectional(synthetic_curvature(model3, f), model3, e) == pytest.approx(-1.75)
    e = np.eye(model_high.dimension)[0]
    # the h-dependent tensors vanish on the plane of an h-eigenvector, so F = f1 + 3 f2
    f = kappa_mu_space_form(F=-2.0, kappa=1 - 0.36, mu=0.4)
    assert phi_sectional(synthetic_curvature(model_high, f), model_high, e) == pytest.approx(-2.0)


def test_coefficient_arrays():
    f = SpaceFormCoefficients.from_array(range(1, 9))
    assert f.as_dict()["f8"] == 8.0
    np.testing.assert_array_equal(f.as_array(), np.arange(1, 9, dtype=float))
    with pytest.raises(ValueError):
        SpaceFormCoefficients.from_array([1.0, 2.0])


def test_random_coefficients_respects_fixed_values(rng):
    f = random_coefficients(rng, 2.0, f2=0.0, f6=0.0)
    assert f.f2 == 0.0 and f.f6 == 0.0
    assert np.all(np.abs(f.as_array()) <= 2.0)


def test_aligned_model_of_ns_point(ns_half):
    p = [0.1, 0.2, 0.3]
    pd = evaluate_point(ns_half, p).with_h(compute_h(ns_half, p))
    model = aligned_model(pd)
    assert model.lam == pytest.approx(0.5)
    np.testing.assert_allclose(np.abs(np.diag(model.h)), [0.5, 0.5, 0.0], atol=1e-12)
    np.testing.assert_allclose(model.g, np.eye(3), atol=1e-12)
