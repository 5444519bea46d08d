import pytest

from pixelflow.canonical import content_digest
from pixelflow.errors import DuplicateConflict, UnknownModule
from pixelflow.graph.registry import ModuleRegistry
from pixelflow.graph.types import NUMBER, TEXT, ModuleSpec, PortSpec


def spec(version=1, out_port="value", description=""):
    return ModuleSpec(id="synth.scene", version=version, display_name="Scene",
                      description=description, outputs=(PortSpec(out_port, TEXT),))


def test_first_registration_listed():
    reg = ModuleRegistry()
    reg.register(spec())
    assert [s.id for s in reg.list_specs()] == ["synth.scene"]
    assert reg.get("synth.scene", 1).spec == spec()


def test_identical_reregistration_is_idempotent():
    reg = ModuleRegistry()
    reg.register(spec())
    reg.register(spec())
    assert len(reg.list_specs()) == 1


def test_changed_content_conflicts():
    # oracle: the conflict predicate is byte inequality of the canonical
    # spec serializations
    reg = ModuleRegistry()
    a = spec()
    b = spec(out_port="other")
    assert content_digest(a.to_json()) != content_digest(b.to_json())
    reg.register(a)
    with pytest.raises(DuplicateConflict):
        reg.register(b)


def test_description_change_is_content_change():
    reg = ModuleRegistry()
    reg.register(spec())
    with pytest.raises(DuplicateConflict):
        reg.register(spec(description="now different"))


def test_new_version_replaces_listing_but_keeps_old_resolvable():
    reg = ModuleRegistry()
    reg.register(spec(version=1))
    reg.register(spec(version=2))
    listed = reg.list_specs()
    assert len(listed) == 1 and listed[0].version == 2
    assert reg.get("synth.scene", 1).spec.version == 1
    assert reg.latest("synth.scene").spec.version == 2


def test_unknown_module_raises():
    reg = ModuleRegistry()
    with pytest.raises(UnknownModule):
        reg.get("no.such", 1)
    assert reg.resolve("no.such", 1) is None


def test_listing_sorted_by_id():
    reg = ModuleRegistry()
    for mid in ["z.last", "a.first", "m.middle"]:
        reg.register(ModuleSpec(id=mid, version=1, display_name=mid,
                                outputs=(PortSpec("v", NUMBER),)))
    assert [s.id for s in reg.list_specs()] == ["a.first", "m.middle", "z.last"]
