"""Built-in manifold registry, loaded from the packaged manifest files."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import List, Optional, Tuple

from ..config import settings
from ..geometry import ManifestError, ManifoldSpec, parse_manifest
from ..geometry.manifest import (
    Backend,
    BracketEntry,
    ExpectedProperties,
    Manifest,
    SampleDomain,
    build_spec,
)
from ..structure import verify_axioms

logger = logging.getLogger(__name__)

# Registry order; file stem equals entry name.
ENTRY_NAMES: Tuple[str, ...] = (
    "euclidean-r3",
    "euclidean-r5",
    "sasakian-r3",
    "heisenberg-frame",
    "ns-half",
    "ns-half-a0.5",
    "ns-half-a2",
    "ns-half-a3",
)


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    spec: ManifoldSpec
    expected: ExpectedProperties


def manifest_text(name: str) -> str:
    path = resources.files("kmnverify.examples").joinpath("manifests", f"{name}.json")
    return path.read_text(encoding="utf-8")


def check_axioms_at_load(spec: ManifoldSpec) -> float:
    """Max axiom residual over the sample grid; raises ManifestError above tolerance."""
    worst = 0.0
    for p in spec.sample_points():
        worst = max(worst, max(verify_axioms(spec, p).values()))
    if worst > settings.axiom_tolerance:
        raise ManifestError(
            f"'{spec.name}' violates the almost contact metric axioms (residual {worst:.3e})"
        )
    return worst


def load_entry(name: str) -> RegistryEntry:
    try:
        text = manifest_text(name)
    except FileNotFoundError as e:
        raise ManifestError(f"Failed to find registry manifest '{name}': {e}") from e
    spec = parse_manifest(text, source_path=f"kmnverify.examples/manifests/{name}.json")
    check_axioms_at_load(spec)
    return RegistryEntry(name=spec.name, spec=spec, expected=spec.expected or ExpectedProperties())


@lru_cache(maxsize=1)
def _load_all() -> Tuple[RegistryEntry, ...]:
    entries = tuple(load_entry(name) for name in ENTRY_NAMES)
    logger.info(f"Loaded {len(entries)} registry entries")
    return entries


def registry() -> List[RegistryEntry]:
    return list(_load_all())


def get_entry(name: str) -> RegistryEntry:
    for entry in _load_all():
        if entry.name == name:
            return entry
    raise KeyError(f"Unknown registry entry '{name}'")


def ns_family(lambda0: float, resolution: Optional[int] = None) -> ManifoldSpec:
    """NS(λ0): [E1,E2] = 2E3, [E2,E3] = 0, [E3,E1] = 2λ0 E2, with φE1 = E2 and ξ = E3."""
    if not 0 < lambda0 < 1:
        raise ValueError(f"lambda0 must lie in (0, 1), got {lambda0}")
    manifest = Manifest(
        name=f"ns-{lambda0:g}",
        description="Non-Sasakian contact metric unimodular Lie group",
        dimension=3,
        backend=Backend.FRAME,
        coordinates=["x", "y", "z"],
        constants={"lambda0": lambda0},
        phi=[["0", "-1", "0"], ["1", "0", "0"], ["0", "0", "0"]],
        xi=["0", "0", "1"],
        brackets=[
            BracketEntry(k=3, i=1, j=2, value="2"),
            BracketEntry(k=2, i=1, j=3, value="-2*lambda0"),
        ],
        domain=SampleDomain(lower=[-1, -1, -1], upper=[1, 1, 1], resolution=resolution or 3),
        expected=ExpectedProperties(
            contact=True,
            k_contact=False,
            sasakian=False,
            kappa=1 - lambda0**2,
            mu=2 - 2 * lambda0,
            nu=0.0,
            lam=lambda0,
            provenance="unimodular family closed forms",
        ),
    )
    return build_spec(manifest)
