"""Core types and pure queries for collaborative service models.

A model names the partner roles, the information classes that objects move
through, the business processes that create or transform those objects, and
the data privileges each role holds on each class. Values are immutable
after construction and every query here is a pure function, so a model can
be shared between threads without coordination.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple


class ModelError(Exception):
    """Structural problem with a model or with a query against it."""


class UnresolvedReference(ModelError):
    """A name is used but never declared."""

    def __init__(self, name: str, site: str) -> None:
        super().__init__(f"undeclared name {name!r} at {site}")
        self.name = name
        self.site = site


class DuplicateName(ModelError):
    """Two declarations of the same kind share a name."""


class InvalidTransform(ModelError):
    """A transform whose endpoints break its process contract."""


class UnknownRole(ModelError):
    pass


class UnknownProcess(ModelError):
    pass


class UnknownClass(ModelError):
    pass


class Privilege(enum.Enum):
    """Data privileges a role may hold on a class.

    The plain privileges concern instances the role created itself; the
    ``+`` variants concern instances created by other roles. Declaration
    order here is the canonical listing order.
    """

    CREATION = "creation"
    MODIFICATION = "modification"
    REFERENCE = "reference"
    SUPPRESSION = "suppression"
    MODIFICATION_PLUS = "modification+"
    REFERENCE_PLUS = "reference+"
    SUPPRESSION_PLUS = "suppression+"


# A privilege set is an unordered, duplicate-free collection of privileges.
PrivilegeSet = frozenset  # of Privilege

PLUS_PRIVILEGES = frozenset(
    {Privilege.MODIFICATION_PLUS, Privilege.REFERENCE_PLUS, Privilege.SUPPRESSION_PLUS}
)

_PRIV_ORDER = {p: i for i, p in enumerate(Privilege)}
_PRIV_BY_TEXT = {p.value: p for p in Privilege}


def privilege_sort_key(priv: Privilege) -> int:
    """Position of a privilege in the canonical listing order."""
    return _PRIV_ORDER[priv]


def privilege_from_text(text: str) -> Privilege:
    try:
        return _PRIV_BY_TEXT[text]
    except KeyError:
        raise ModelError(f"unknown privilege {text!r}") from None


class StatusPoint(enum.Enum):
    """Class annotations that matter to service realization."""

    WAITING = "waiting"
    FAIL = "fail"
    DECISION = "decision"


_POINT_ORDER = {s: i for i, s in enumerate(StatusPoint)}
_POINT_BY_TEXT = {s.value: s for s in StatusPoint}


def status_point_sort_key(point: StatusPoint) -> int:
    return _POINT_ORDER[point]


def status_point_from_text(text: str) -> StatusPoint:
    try:
        return _POINT_BY_TEXT[text]
    except KeyError:
        raise ModelError(f"unknown status point {text!r}") from None


class TransformMode(enum.Enum):
    """Whether the source token survives the firing that transforms it."""

    REMAINING = "remaining"
    LEAVING = "leaving"


class ProcessPrivilege(enum.Enum):
    OWNER = "owner"
    RESPONSIBILITY = "responsibility"


@dataclass(frozen=True)
class ClassDef:
    """An information class, optionally a significant dynamic state."""

    name: str
    dynamic: bool = False
    status_points: frozenset[StatusPoint] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "status_points", frozenset(self.status_points))


@dataclass(frozen=True)
class Transform:
    """One state change declared by a process: source class to target class."""

    source: str
    target: str
    mode: TransformMode


@dataclass(frozen=True)
class ProcessDef:
    """A business process with its inputs, outputs, transforms and roles.

    ``role_privileges`` is a partial map: a role absent from it holds no
    privilege on the process at all.
    """

    name: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    transforms: tuple[Transform, ...] = ()
    role_privileges: Mapping[str, ProcessPrivilege] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "transforms", tuple(self.transforms))
        object.__setattr__(self, "role_privileges", dict(self.role_privileges))

    @property
    def privileged_roles(self) -> frozenset[str]:
        return frozenset(self.role_privileges)

    @property
    def owners(self) -> tuple[str, ...]:
        return tuple(
            sorted(
                r
                for r, pp in self.role_privileges.items()
                if pp is ProcessPrivilege.OWNER
            )
        )

    @property
    def responsibles(self) -> tuple[str, ...]:
        return tuple(
            sorted(
                r
                for r, pp in self.role_privileges.items()
                if pp is ProcessPrivilege.RESPONSIBILITY
            )
        )

    @property
    def is_generator(self) -> bool:
        """True when the process has no inputs and mints fresh objects."""
        return not self.inputs


@dataclass(frozen=True)
class Model:
    """A complete collaborative service model.

    ``class_grants`` maps ``(role, class)`` to the set of data privileges
    the role holds on the class; missing pairs mean no privileges.
    """

    name: str
    roles: tuple[str, ...] = ()
    classes: tuple[ClassDef, ...] = ()
    processes: tuple[ProcessDef, ...] = ()
    class_grants: Mapping[tuple[str, str], frozenset[Privilege]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "processes", tuple(self.processes))
        object.__setattr__(
            self,
            "class_grants",
            {key: frozenset(privs) for key, privs in dict(self.class_grants).items()},
        )

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)

    @property
    def process_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.processes)

    def class_def(self, name: str) -> ClassDef:
        for c in self.classes:
            if c.name == name:
                return c
        raise UnknownClass(name)

    def process_def(self, name: str) -> ProcessDef:
        for p in self.processes:
            if p.name == name:
                return p
        raise UnknownProcess(name)

    def require_role(self, name: str) -> None:
        if name not in self.roles:
            raise UnknownRole(name)

    def grants(self, role: str, class_name: str) -> frozenset[Privilege]:
        return self.class_grants.get((role, class_name), frozenset())

    def process_privilege(self, role: str, process: str) -> ProcessPrivilege | None:
        return self.process_def(process).role_privileges.get(role)


def _ensure_unique(names: Iterable[str], kind: str) -> None:
    seen: set[str] = set()
    for n in names:
        if n in seen:
            raise DuplicateName(f"duplicate {kind} {n!r}")
        seen.add(n)


def canonicalize(model: Model) -> Model:
    """Return the canonical form of ``model``.

    Members are sorted lexicographically by name, empty grants are dropped,
    and every reference is checked against the declarations. Idempotent;
    two models are equal exactly when their canonical forms are equal.
    """
    _ensure_unique(model.roles, "role")
    _ensure_unique((c.name for c in model.classes), "class")
    _ensure_unique((p.name for p in model.processes), "process")

    role_set = set(model.roles)
    class_set = {c.name for c in model.classes}

    processes = []
    for p in sorted(model.processes, key=lambda p: p.name):
        site = f"process {p.name}"
        for r in p.role_privileges:
            if r not in role_set:
                raise UnresolvedReference(r, site)
        for c in (*p.inputs, *p.outputs):
            if c not in class_set:
                raise UnresolvedReference(c, site)
        inputs = set(p.inputs)
        outputs = set(p.outputs)
        for t in p.transforms:
            for end in (t.source, t.target):
                if end not in class_set:
                    raise UnresolvedReference(end, site)
            if t.source == t.target:
                raise InvalidTransform(
                    f"{site}: transform may not map {t.source!r} to itself"
                )
            if t.source not in inputs:
                raise InvalidTransform(
                    f"{site}: transform source {t.source!r} is not an input"
                )
            if t.target not in outputs:
                raise InvalidTransform(
                    f"{site}: transform target {t.target!r} is not an output"
                )
        processes.append(
            ProcessDef(
                name=p.name,
                inputs=tuple(sorted(inputs)),
                outputs=tuple(sorted(outputs)),
                transforms=tuple(
                    sorted(
                        set(p.transforms),
                        key=lambda t: (t.source, t.target, t.mode.value),
                    )
                ),
                role_privileges={
                    r: p.role_privileges[r] for r in sorted(p.role_privileges)
                },
            )
        )

    grants: dict[tuple[str, str], frozenset[Privilege]] = {}
    for (role, class_name) in sorted(model.class_grants):
        privs = model.class_grants[(role, class_name)]
        if role not in role_set:
            raise UnresolvedReference(role, f"grant {role} on {class_name}")
        if class_name not in class_set:
            raise UnresolvedReference(class_name, f"grant {role} on {class_name}")
        if privs:
            grants[(role, class_name)] = frozenset(privs)

    return Model(
        name=model.name,
        roles=tuple(sorted(model.roles)),
        classes=tuple(sorted(model.classes, key=lambda c: c.name)),
        processes=tuple(processes),
        class_grants=grants,
    )


def input_classes(model: Model, process: str) -> frozenset[str]:
    """Classes the process consumes."""
    return frozenset(model.process_def(process).inputs)


def output_classes(model: Model, process: str) -> frozenset[str]:
    """Classes the process produces."""
    return frozenset(model.process_def(process).outputs)


def shared_processes(model: Model, r1: str, r2: str) -> frozenset[str]:
    """Processes on which both roles hold some process privilege."""
    model.require_role(r1)
    model.require_role(r2)
    return frozenset(
        p.name
        for p in model.processes
        if r1 in p.role_privileges and r2 in p.role_privileges
    )


class SharedClass(NamedTuple):
    """A class one role creates and the other reads across the boundary."""

    class_name: str
    producer: str
    consumer: str


def shared_classes(model: Model, r1: str, r2: str) -> frozenset[SharedClass]:
    """Classes shared between the two roles, with producer/consumer direction.

    A class is shared when one role holds creation on it and the other
    holds any of the ``+`` privileges (rights over foreign data).
    """
    model.require_role(r1)
    model.require_role(r2)
    found = set()
    for producer, consumer in ((r1, r2), (r2, r1)):
        for c in model.classes:
            if Privilege.CREATION in model.grants(producer, c.name) and (
                model.grants(consumer, c.name) & PLUS_PRIVILEGES
            ):
                found.add(SharedClass(c.name, producer, consumer))
    return frozenset(found)
