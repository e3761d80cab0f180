import numpy as np
import pytest

from kmnverify.conformal import (
    flatness_test,
    flatness_test_model,
    predicted_schouten,
    predicted_weyl,
    ricci_from_coefficients,
    scalar_from_coefficients,
    schouten,
    synthetic_is_consistent,
    weyl_from_curvature,
    weyl_trace_residual,
)
from kmnverify.curvature import ricci_and_scalar
from kmnverify.pointmodel import (
    SpaceFormCoefficients,
    random_coefficients,
    standard_model,
    synthetic_curvature,
)

MODELS = [(1, 0.4), (2, 0.6), (3, 0.35)]


@pytest.mark.parametrize("n,lam", MODELS)
def test_ricci_and_scalar_from_coefficients(n, lam, rng):
    model = standard_model(n, lam)
    for _ in range(25):
        f = random_coefficients(rng)
        Q, tau = ricci_and_scalar(synthetic_curvature(model, f))
        predicted = ricci_from_coefficients(f, model)
        assert np.abs(Q - predicted).max() < 1e-10
        assert abs(np.trace(predicted) - scalar_from_coefficients(f, n)) < 1e-10
        assert tau == pytest.approx(scalar_from_coefficients(f, n), abs=1e-10)


@pytest.mark.parametrize("n,lam", MODELS)
def test_schouten_and_weyl_predictions(n, lam, rng):
    model = standard_model(n, lam)
    for _ in range(25):
        f = random_coefficients(rng)
        curvature = synthetic_curvature(model, f)
        Q, tau = ricci_and_scalar(curvature)
        assert np.abs(schouten(Q, tau, n) - predicted_schouten(f, model)).max() < 1e-10
        W = weyl_from_curvature(curvature)
        assert np.abs(W - predicted_weyl(f, model)).max() < 1e-10
        assert weyl_trace_residual(W) < 1e-10


def test_schouten_rejects_bad_n():
    with pytest.raises(ValueError):
        schouten(np.eye(3), 0.0, 0)


def test_flatness_biconditional(model_high, rng):
    flat = 0
    for _ in range(400):
        f = random_coefficients(rng)
        if rng.random() < 0.5:
            f = SpaceFormCoefficients(**{**f.as_dict(), "f2": 0.0, "f5": 0.0, "f6": 0.0, "f8": 0.0})
            flat += 1
        report = flatness_test_model(model_high, f)
        assert report.theorem_applicable
        assert synthetic_is_consistent(report)
        assert report.weyl_xi_residual < 1e-10
    assert 0 < flat < 400


def test_flat_coefficients_give_zero_weyl(model_high):
    f = SpaceFormCoefficients(f1=0.3, f3=-0.2, f4=1.1, f7=0.4)
    report = flatness_test_model(model_high, f)
    assert report.conformally_flat
    assert report.theorem_predicts_flat


def test_k_contact_criterion_when_h_vanishes():
    model = standard_model(2, 0.0)
    flat = flatness_test_model(model, SpaceFormCoefficients(f1=0.7, f3=0.2, f4=0.5))
    assert not flat.theorem_applicable
    assert flat.theorem_reason == "theorem not applicable: h = 0"
    assert flat.kim_criterion and flat.conformally_flat
    curved = flatness_test_model(model, SpaceFormCoefficients(f1=0.7, f2=0.3))
    assert curved.kim_criterion is False
    assert not curved.conformally_flat
    assert synthetic_is_consistent(curved)


def test_theorem_needs_dimension_five(model3, rng):
    report = flatness_test_model(model3, random_coefficients(rng))
    assert report.theorem_reason == "theorem not applicable: flatness theorem needs dimension >= 5"
    assert report.weyl_max < 1e-10
    assert synthetic_is_consistent(report)


def test_oracle_weyl_vanishes_in_dimension_three(ns_half, sasakian):
    for spec in (ns_half, sasakian):
        report = flatness_test(spec, spec.sample_points(2))
        assert report.weyl_max < 1e-6
        assert report.trace_max < 1e-6
        assert report.codazzi_max is not None


@pytest.mark.parametrize("name", ["euclidean3", "euclidean5"])
def test_euclidean_space_is_conformally_flat(request, name):
    spec = request.getfixturevalue(name)
    report = flatness_test(spec, spec.sample_points(2))
    assert report.conformally_flat
    assert report.weyl_max < 1e-10
    assert len(report.schouten) == 2 ** spec.dimension


def test_heisenberg_fails_codazzi(heisenberg):
    report = flatness_test(heisenberg, [heisenberg.center()])
    assert report.codazzi_max > 0.1
    assert not report.conformally_flat


def test_oracle_report_states_theorem_applicability(euclidean5, caplog):
    with caplog.at_level("WARNING"):
        report = flatness_test(euclidean5, euclidean5.sample_points(2))
    assert not report.theorem_applicable
    assert report.theorem_reason == "theorem not applicable: h = 0"
    assert "not applicable" in caplog.text


def test_three_dimensional_oracle_report_leaves_theorem_unset(sasakian):
    report = flatness_test(sasakian, [sasakian.center()])
    assert report.theorem_reason == ""
