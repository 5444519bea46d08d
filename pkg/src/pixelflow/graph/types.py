"""Value type system and pipeline graph model.

Everything here is an immutable value after construction; graphs, specs,
and types can be shared freely across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

from ..errors import InvalidSpec

IDENT_RE = re.compile(r"^[a-z][a-z0-9_]*$")
MODULE_ID_RE = re.compile(r"^[a-z][a-z0-9_]*(\.[a-z][a-z0-9_]*)+$")

MAX_LIST_DEPTH = 2


class Kind(str, Enum):
    TEXT = "text"
    IMAGE = "image"
    MASK = "mask"
    NUMBER = "number"
    BOOLEAN = "boolean"
    LIST = "list"


@dataclass(frozen=True)
class DataType:
    """A port/edge type. Equality is structural; edges are legal iff the
    endpoint types compare equal."""

    kind: Kind
    inner: "DataType | None" = None

    def __post_init__(self):
        if self.kind is Kind.LIST:
            if self.inner is None:
                raise InvalidSpec("list type requires an inner type")
            if self.depth() > MAX_LIST_DEPTH:
                raise InvalidSpec(f"list nesting depth exceeds {MAX_LIST_DEPTH}")
        elif self.inner is not None:
            raise InvalidSpec(f"{self.kind.value} type cannot carry an inner type")

    def depth(self) -> int:
        return 0 if self.kind is not Kind.LIST else 1 + self.inner.depth()

    def to_json(self) -> Any:
        if self.kind is Kind.LIST:
            return {"kind": "list", "inner": self.inner.to_json()}
        return self.kind.value

    @classmethod
    def from_json(cls, obj: Any) -> "DataType":
        if isinstance(obj, str):
            if obj == "list":
                raise InvalidSpec("list type requires an inner type")
            return cls(Kind(obj))
        if isinstance(obj, dict) and obj.get("kind") == "list":
            return cls(Kind.LIST, cls.from_json(obj["inner"]))
        raise InvalidSpec(f"unrecognized data type: {obj!r}")

    def __str__(self) -> str:
        if self.kind is Kind.LIST:
            return f"list[{self.inner}]"
        return self.kind.value


TEXT = DataType(Kind.TEXT)
IMAGE = DataType(Kind.IMAGE)
MASK = DataType(Kind.MASK)
NUMBER = DataType(Kind.NUMBER)
BOOLEAN = DataType(Kind.BOOLEAN)


def list_of(inner: DataType) -> DataType:
    return DataType(Kind.LIST, inner)


@dataclass(frozen=True)
class PortSpec:
    """One named input or output of a module."""

    name: str
    dtype: DataType
    required: bool = True
    description: str = ""

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise InvalidSpec(f"port name {self.name!r} is not a lowercase identifier")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dtype": self.dtype.to_json(),
            "required": self.required,
            "description": self.description,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "PortSpec":
        return cls(
            name=obj["name"],
            dtype=DataType.from_json(obj["dtype"]),
            required=bool(obj.get("required", True)),
            description=obj.get("description", ""),
        )


class ParamKind(str, Enum):
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    BOOL = "bool"
    ENUM = "enum"


@dataclass(frozen=True)
class HyperparamSpec:
    """Schema for one tunable module setting."""

    name: str
    kind: ParamKind
    default: Any
    min: float | None = None
    max: float | None = None
    choices: tuple[str, ...] | None = None

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise InvalidSpec(f"hyperparam name {self.name!r} is not a lowercase identifier")
        if self.kind is ParamKind.ENUM and not self.choices:
            raise InvalidSpec(f"hyperparam {self.name!r}: enum kind requires choices")
        if self.kind is not ParamKind.ENUM and self.choices:
            raise InvalidSpec(f"hyperparam {self.name!r}: choices only valid for enum kind")
        problem = self.check_value(self.default)
        if problem:
            raise InvalidSpec(f"hyperparam {self.name!r}: default {problem}")

    def check_value(self, value: Any) -> str | None:
        """Return a problem description, or None if the value is admissible."""
        if self.kind is ParamKind.INT:
            if isinstance(value, bool) or not isinstance(value, int):
                return f"must be an integer, got {value!r}"
        elif self.kind is ParamKind.FLOAT:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return f"must be a number, got {value!r}"
        elif self.kind is ParamKind.BOOL:
            if not isinstance(value, bool):
                return f"must be a boolean, got {value!r}"
        elif self.kind in (ParamKind.STRING, ParamKind.ENUM):
            if not isinstance(value, str):
                return f"must be a string, got {value!r}"
        if self.kind in (ParamKind.INT, ParamKind.FLOAT):
            if self.min is not None and value < self.min:
                return f"{value!r} is below minimum {self.min}"
            if self.max is not None and value > self.max:
                return f"{value!r} is above maximum {self.max}"
        if self.kind is ParamKind.ENUM and value not in self.choices:
            return f"{value!r} is not one of {list(self.choices)}"
        return None

    def normalize(self, value: Any) -> Any:
        """Coerce an admissible value to its canonical Python type."""
        if self.kind is ParamKind.FLOAT:
            return float(value)
        return value

    def to_json(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "kind": self.kind.value, "default": self.default}
        if self.min is not None:
            out["min"] = self.min
        if self.max is not None:
            out["max"] = self.max
        if self.choices is not None:
            out["choices"] = list(self.choices)
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "HyperparamSpec":
        return cls(
            name=obj["name"],
            kind=ParamKind(obj["kind"]),
            default=obj["default"],
            min=obj.get("min"),
            max=obj.get("max"),
            choices=tuple(obj["choices"]) if obj.get("choices") is not None else None,
        )


@dataclass(frozen=True)
class ModuleSpec:
    """Identity, typed ports, and hyperparameter schema of one module."""

    id: str
    version: int
    display_name: str
    description: str = ""
    labels: frozenset[str] = frozenset()
    inputs: tuple[PortSpec, ...] = ()
    outputs: tuple[PortSpec, ...] = ()
    hyperparams: tuple[HyperparamSpec, ...] = ()

    def __post_init__(self):
        if not MODULE_ID_RE.match(self.id):
            raise InvalidSpec(f"module id {self.id!r} must be namespaced lowercase (e.g. 'synth.scene')")
        if not isinstance(self.version, int) or isinstance(self.version, bool) or self.version < 1:
            raise InvalidSpec(f"module {self.id!r}: version must be an integer >= 1")
        if not self.outputs:
            raise InvalidSpec(f"module {self.id!r}: outputs must be non-empty")
        for ports, side in ((self.inputs, "input"), (self.outputs, "output")):
            names = [p.name for p in ports]
            if len(names) != len(set(names)):
                raise InvalidSpec(f"module {self.id!r}: duplicate {side} port name")
        pnames = [p.name for p in self.hyperparams]
        if len(pnames) != len(set(pnames)):
            raise InvalidSpec(f"module {self.id!r}: duplicate hyperparam name")

    def input(self, name: str) -> PortSpec | None:
        for p in self.inputs:
            if p.name == name:
                return p
        return None

    def output(self, name: str) -> PortSpec | None:
        for p in self.outputs:
            if p.name == name:
                return p
        return None

    def hyperparam(self, name: str) -> HyperparamSpec | None:
        for h in self.hyperparams:
            if h.name == name:
                return h
        return None

    def default_params(self) -> dict[str, Any]:
        return {h.name: h.normalize(h.default) for h in self.hyperparams}

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "display_name": self.display_name,
            "description": self.description,
            "labels": sorted(self.labels),
            "inputs": [p.to_json() for p in self.inputs],
            "outputs": [p.to_json() for p in self.outputs],
            "hyperparams": [h.to_json() for h in self.hyperparams],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ModuleSpec":
        return cls(
            id=obj["id"],
            version=obj["version"],
            display_name=obj["display_name"],
            description=obj.get("description", ""),
            labels=frozenset(obj.get("labels", ())),
            inputs=tuple(PortSpec.from_json(p) for p in obj.get("inputs", ())),
            outputs=tuple(PortSpec.from_json(p) for p in obj.get("outputs", ())),
            hyperparams=tuple(HyperparamSpec.from_json(h) for h in obj.get("hyperparams", ())),
        )


@dataclass(frozen=True)
class NodeInstance:
    """A module placed in a graph with bound hyperparameters.

    ``params`` holds explicit bindings only; unbound hyperparams take their
    defaults. Values are checked against the ModuleSpec during validation.
    """

    node_id: str
    module_id: str
    module_version: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True)
class Endpoint:
    node: str
    port: str

    def to_json(self) -> dict:
        return {"node": self.node, "port": self.port}


@dataclass(frozen=True)
class Edge:
    """Directed typed connection from an output port to an input port."""

    src: Endpoint
    dst: Endpoint

    @classmethod
    def between(cls, from_node: str, from_port: str, to_node: str, to_port: str) -> "Edge":
        return cls(Endpoint(from_node, from_port), Endpoint(to_node, to_port))

    def sort_key(self) -> tuple[str, str, str, str]:
        return (self.src.node, self.src.port, self.dst.node, self.dst.port)


EXTERNAL_INPUTS_KEY = "external_inputs"

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PipelineGraph:
    """Nodes plus directed typed edges; the exportable artifact.

    ``metadata`` is a flat string map. The reserved key ``external_inputs``
    lists unfed required ports (comma-separated ``node_id.port``) that the
    caller must supply at execution time.
    """

    name: str
    nodes: tuple[NodeInstance, ...]
    edges: tuple[Edge, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def node(self, node_id: str) -> NodeInstance | None:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        return None

    def node_ids(self) -> list[str]:
        return [n.node_id for n in self.nodes]

    def external_inputs(self) -> list[tuple[str, str]]:
        """Declared external input ports as (node_id, port) pairs."""
        raw = self.metadata.get(EXTERNAL_INPUTS_KEY, "")
        out = []
        for item in raw.split(","):
            item = item.strip()
            if not item:
                continue
            node, _, port = item.partition(".")
            out.append((node, port))
        return out

    def predecessors(self) -> dict[str, set[str]]:
        """node_id -> set of node_ids feeding it."""
        preds: dict[str, set[str]] = {n.node_id: set() for n in self.nodes}
        for e in self.edges:
            if e.dst.node in preds and e.src.node in preds:
                preds[e.dst.node].add(e.src.node)
        return preds

    def successors(self) -> dict[str, set[str]]:
        succs: dict[str, set[str]] = {n.node_id: set() for n in self.nodes}
        for e in self.edges:
            if e.dst.node in succs and e.src.node in succs:
                succs[e.src.node].add(e.dst.node)
        return succs


def graph_from_parts(
    name: str,
    nodes: Sequence[NodeInstance],
    edges: Sequence[Edge],
    metadata: Mapping[str, str] | None = None,
) -> PipelineGraph:
    return PipelineGraph(name=name, nodes=tuple(nodes), edges=tuple(edges), metadata=dict(metadata or {}))
