import numpy as np
import pytest

from kmnverify.examples import ENTRY_NAMES, get_entry, manifest_text, ns_family, registry
from kmnverify.examples.registry import check_axioms_at_load, load_entry
from kmnverify.geometry import ManifestError, evaluate_point, parse_manifest
from kmnverify.structure import contact_residual


def test_registry_loads_every_entry():
    entries = registry()
    assert [e.name for e in entries] == list(ENTRY_NAMES)
    for entry in entries:
        assert entry.spec.content_hash
        assert entry.spec.source_path.endswith(f"{entry.name}.json")


@pytest.mark.parametrize("name", ENTRY_NAMES)
def test_declared_contact_entries_satisfy_d_eta(name):
    entry = get_entry(name)
    for p in entry.spec.sample_points(2):
        residual = contact_residual(entry.spec, evaluate_point(entry.spec, p))
        if entry.expected.contact:
            assert residual < 1e-6
        else:
            assert residual > 0.1


def test_unknown_entry():
    with pytest.raises(KeyError):
        get_entry("no-such-manifold")
    with pytest.raises(ManifestError, match="Failed to find registry manifest"):
        load_entry("no-such-manifold")


def test_manifest_text_is_json():
    assert manifest_text("ns-half").lstrip().startswith("{")


def test_ns_family_matches_entry(ns_half):
    family = ns_family(0.5)
    p = [0.3, -0.2, 0.7]
    assert np.array_equal(family.metric_at(p), ns_half.metric_at(p))
    assert np.array_equal(family.brackets_at(p), ns_half.brackets_at(p))
    assert family.expected.kappa == pytest.approx(0.75)
    assert family.expected.mu == pytest.approx(1.0)


@pytest.mark.parametrize("lambda0", [0.0, 1.0, 1.5, -0.2])
def test_ns_family_range(lambda0):
    with pytest.raises(ValueError, match="lambda0"):
        ns_family(lambda0)


def test_axiom_check_rejects_broken_phi(manifest_data):
    data = manifest_data("ns-half")
    data["phi"][0][1] = "-2"
    with pytest.raises(ManifestError, match="almost contact metric axioms"):
        check_axioms_at_load(parse_manifest(data))
