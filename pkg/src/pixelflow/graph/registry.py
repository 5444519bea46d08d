"""Module registry: the catalog every graph is validated and executed against."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from ..canonical import content_digest
from ..errors import DuplicateConflict, UnknownModule
from .types import ModuleSpec

# Runner contract: fn(inputs, params, seed) -> {output port: Value}.
# Must be a pure function of its arguments (no ambient state or clock).
ModuleFn = Callable[[Mapping[str, Any], Mapping[str, Any], int], Mapping[str, Any]]


@dataclass(frozen=True)
class ModuleEntry:
    spec: ModuleSpec
    fn: ModuleFn | None = None


class ModuleRegistry:
    """All registered module versions, resolvable by (id, version).

    Re-registering an id at a new version replaces the catalog listing but
    keeps earlier versions resolvable, so pipelines pinned to an old
    version still validate and replay.
    """

    def __init__(self):
        self._entries: dict[str, dict[int, ModuleEntry]] = {}
        self._lock = threading.Lock()

    def register(self, spec: ModuleSpec, fn: ModuleFn | None = None) -> ModuleEntry:
        """Add a module spec (idempotent for identical content).

        Raises DuplicateConflict when the same id+version is re-registered
        with different content, InvalidSpec when the spec itself is broken
        (enforced by ModuleSpec construction).
        """
        entry = ModuleEntry(spec=spec, fn=fn)
        with self._lock:
            versions = self._entries.setdefault(spec.id, {})
            existing = versions.get(spec.version)
            if existing is not None:
                if content_digest(existing.spec.to_json()) != content_digest(spec.to_json()):
                    raise DuplicateConflict(
                        f"module {spec.id!r} v{spec.version} already registered with different content"
                    )
                if fn is not None:
                    versions[spec.version] = entry
                return versions[spec.version]
            versions[spec.version] = entry
        return entry

    def resolve(self, module_id: str, version: int) -> ModuleEntry | None:
        with self._lock:
            return self._entries.get(module_id, {}).get(version)

    def get(self, module_id: str, version: int) -> ModuleEntry:
        entry = self.resolve(module_id, version)
        if entry is None:
            raise UnknownModule(f"module {module_id!r} v{version} is not registered")
        return entry

    def latest(self, module_id: str) -> ModuleEntry | None:
        with self._lock:
            versions = self._entries.get(module_id)
            if not versions:
                return None
            return versions[max(versions)]

    def list_specs(self) -> list[ModuleSpec]:
        """Catalog snapshot: latest version per id, sorted by id."""
        with self._lock:
            return [
                versions[max(versions)].spec
                for _, versions in sorted(self._entries.items())
            ]
