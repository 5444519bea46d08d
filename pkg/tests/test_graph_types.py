import pytest
from hypothesis import given
from hypothesis import strategies as st

from pixelflow.errors import InvalidSpec
from pixelflow.graph.types import (
    BOOLEAN,
    IMAGE,
    MASK,
    NUMBER,
    TEXT,
    DataType,
    HyperparamSpec,
    Kind,
    ModuleSpec,
    ParamKind,
    PortSpec,
    list_of,
)

SCALARS = [TEXT, IMAGE, MASK, NUMBER, BOOLEAN]


def dtype_strategy():
    scalar = st.sampled_from(SCALARS)
    return st.one_of(
        scalar,
        scalar.map(list_of),
        scalar.map(lambda t: list_of(list_of(t))),
    )


@given(dtype_strategy(), dtype_strategy())
def test_edge_legality_is_structural_equality(a, b):
    # the engine admits an edge iff the types compare equal; equality must
    # be structural, i.e. depend only on (kind, inner) recursively
    structurally_same = a.kind == b.kind and (
        a.kind is not Kind.LIST or a.inner == b.inner
    )
    assert (a == b) == structurally_same


def test_list_depth_capped_at_two():
    assert list_of(list_of(IMAGE)).depth() == 2
    with pytest.raises(InvalidSpec):
        list_of(list_of(list_of(IMAGE)))


def test_scalar_cannot_carry_inner():
    with pytest.raises(InvalidSpec):
        DataType(Kind.IMAGE, inner=TEXT)
    with pytest.raises(InvalidSpec):
        DataType(Kind.LIST)


def test_dtype_json_round_trip():
    for t in SCALARS + [list_of(NUMBER), list_of(list_of(TEXT))]:
        assert DataType.from_json(t.to_json()) == t


def test_port_name_must_be_identifier():
    with pytest.raises(InvalidSpec):
        PortSpec("BadName", TEXT)
    with pytest.raises(InvalidSpec):
        PortSpec("9lives", TEXT)
    PortSpec("ok_name2", TEXT)


class TestHyperparamSpec:
    def test_default_must_satisfy_bounds(self):
        with pytest.raises(InvalidSpec):
            HyperparamSpec("x", ParamKind.INT, 5, min=10)
        HyperparamSpec("x", ParamKind.INT, 10, min=10)

    def test_default_must_satisfy_choices(self):
        with pytest.raises(InvalidSpec):
            HyperparamSpec("mode", ParamKind.ENUM, "c", choices=("a", "b"))
        spec = HyperparamSpec("mode", ParamKind.ENUM, "a", choices=("a", "b"))
        assert spec.check_value("b") is None
        assert spec.check_value("z") is not None

    def test_enum_requires_choices(self):
        with pytest.raises(InvalidSpec):
            HyperparamSpec("mode", ParamKind.ENUM, "a")

    def test_bool_is_not_an_int(self):
        spec = HyperparamSpec("n", ParamKind.INT, 1)
        assert spec.check_value(True) is not None

    def test_float_accepts_int_and_normalizes(self):
        spec = HyperparamSpec("rate", ParamKind.FLOAT, 0.5, min=0.0, max=1.0)
        assert spec.check_value(1) is None
        assert spec.normalize(1) == 1.0
        assert isinstance(spec.normalize(1), float)

    def test_int_rejects_float(self):
        spec = HyperparamSpec("n", ParamKind.INT, 1)
        assert spec.check_value(2.5) is not None


class TestModuleSpec:
    def test_id_must_be_namespaced(self):
        with pytest.raises(InvalidSpec):
            ModuleSpec(id="plain", version=1, display_name="x", outputs=(PortSpec("v", TEXT),))
        with pytest.raises(InvalidSpec):
            ModuleSpec(id="Upper.case", version=1, display_name="x", outputs=(PortSpec("v", TEXT),))

    def test_outputs_required(self):
        with pytest.raises(InvalidSpec):
            ModuleSpec(id="a.b", version=1, display_name="x")

    def test_version_positive_integer(self):
        with pytest.raises(InvalidSpec):
            ModuleSpec(id="a.b", version=0, display_name="x", outputs=(PortSpec("v", TEXT),))

    def test_duplicate_port_names_rejected(self):
        with pytest.raises(InvalidSpec):
            ModuleSpec(id="a.b", version=1, display_name="x",
                       outputs=(PortSpec("v", TEXT), PortSpec("v", NUMBER)))
        # same name on both sides is fine
        ModuleSpec(id="a.b", version=1, display_name="x",
                   inputs=(PortSpec("v", TEXT),), outputs=(PortSpec("v", TEXT),))

    def test_default_params_are_normalized(self):
        spec = ModuleSpec(
            id="a.b", version=1, display_name="x",
            outputs=(PortSpec("v", TEXT),),
            hyperparams=(HyperparamSpec("rate", ParamKind.FLOAT, 1),),
        )
        assert spec.default_params() == {"rate": 1.0}
        assert isinstance(spec.default_params()["rate"], float)
