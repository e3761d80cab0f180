"""Built-in manifold registry."""

from .registry import ENTRY_NAMES, RegistryEntry, get_entry, manifest_text, ns_family, registry

__all__ = ["ENTRY_NAMES", "RegistryEntry", "get_entry", "manifest_text", "ns_family", "registry"]
