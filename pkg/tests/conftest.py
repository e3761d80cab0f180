import json
from typing import Any, Callable, Dict

import numpy as np
import pytest

from kmnverify.examples import get_entry, manifest_text
from kmnverify.geometry import ManifoldSpec, parse_manifest
from kmnverify.pointmodel import AlgebraicModel, standard_model


@pytest.fixture(scope="session")
def euclidean3() -> ManifoldSpec:
    return get_entry("euclidean-r3").spec


@pytest.fixture(scope="session")
def euclidean5() -> ManifoldSpec:
    return get_entry("euclidean-r5").spec


@pytest.fixture(scope="session")
def sasakian() -> ManifoldSpec:
    return get_entry("sasakian-r3").spec


@pytest.fixture(scope="session")
def heisenberg() -> ManifoldSpec:
    return get_entry("heisenberg-frame").spec


@pytest.fixture(scope="session")
def ns_half() -> ManifoldSpec:
    return get_entry("ns-half").spec


@pytest.fixture
def manifest_data() -> Callable[[str], Dict[str, Any]]:
    """Fresh, mutable copy of a registry manifest document."""

    def load(name: str = "sasakian-r3") -> Dict[str, Any]:
        return json.loads(manifest_text(name))

    return load


@pytest.fixture(scope="session")
def broken_sasakian() -> ManifoldSpec:
    # Transverse metric doubled: still almost contact metric, no longer contact.
    data = json.loads(manifest_text("sasakian-r3"))
    data["name"] = "sasakian-r3-broken"
    data["metric"][0][0] = "1/2 + y^2/4"
    data["metric"][1][1] = "1/2"
    data.pop("expected")
    return parse_manifest(data)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture(params=[0.3, 0.7])
def model3(request) -> AlgebraicModel:
    return standard_model(1, request.param)


@pytest.fixture(params=[2, 3])
def model_high(request) -> AlgebraicModel:
    return standard_model(request.param, 0.6)
