"""Shared test utilities: generators, oracles, and mini syntax checkers.

``brute_validate`` is an intentionally naive re-implementation of the rule
catalog by direct set arithmetic over all (role, process, class) triples;
it shares no code with ``csm.validator`` and serves as its oracle.
"""

from __future__ import annotations

import random
import re

from csm.model import (
    ClassDef,
    Model,
    PLUS_PRIVILEGES,
    Privilege,
    ProcessDef,
    ProcessPrivilege,
    StatusPoint,
    Transform,
    TransformMode,
    canonicalize,
)


def random_model(rng: random.Random, name: str = "random") -> Model:
    """A structurally resolvable model; rule violations are intentional."""
    roles = [f"R{i}" for i in range(rng.randint(1, 6))]
    classes = []
    for i in range(rng.randint(1, 8)):
        points = frozenset(pt for pt in StatusPoint if rng.random() < 0.2)
        classes.append(
            ClassDef(f"C{i}", dynamic=rng.random() < 0.7, status_points=points)
        )
    cnames = [c.name for c in classes]
    processes = []
    for i in range(rng.randint(0, 6)):
        inputs = rng.sample(cnames, rng.randint(0, min(2, len(cnames))))
        outputs = rng.sample(cnames, rng.randint(0, min(2, len(cnames))))
        transforms = []
        for s in inputs:
            for t in outputs:
                if s != t and rng.random() < 0.5:
                    transforms.append(
                        Transform(s, t, rng.choice(list(TransformMode)))
                    )
        role_privs = {}
        for r in roles:
            x = rng.random()
            if x < 0.25:
                role_privs[r] = ProcessPrivilege.OWNER
            elif x < 0.45:
                role_privs[r] = ProcessPrivilege.RESPONSIBILITY
        processes.append(
            ProcessDef(f"P{i}", tuple(inputs), tuple(outputs), tuple(transforms), role_privs)
        )
    grants = {}
    for r in roles:
        for c in cnames:
            if rng.random() < 0.35:
                privs = frozenset(p for p in Privilege if rng.random() < 0.4)
                if privs:
                    grants[(r, c)] = privs
    return canonicalize(
        Model(name, tuple(roles), tuple(classes), tuple(processes), grants)
    )


def random_valid_model(rng: random.Random, name: str = "valid") -> Model:
    """A random model that satisfies every error rule by construction."""
    roles = [f"R{i}" for i in range(rng.randint(1, 5))]
    classes = []
    for i in range(rng.randint(1, 7)):
        points = frozenset(pt for pt in StatusPoint if rng.random() < 0.25)
        classes.append(
            ClassDef(f"C{i}", dynamic=rng.random() < 0.8, status_points=points)
        )
    cnames = [c.name for c in classes]
    dynamic = {c.name for c in classes if c.dynamic}
    grants: dict[tuple[str, str], set[Privilege]] = {}

    def grant(role, cname, *privs):
        grants.setdefault((role, cname), set()).update(privs)

    processes = []
    for i in range(rng.randint(0, 5)):
        inputs = rng.sample(cnames, rng.randint(0, min(2, len(cnames))))
        outputs = rng.sample(cnames, rng.randint(0, min(2, len(cnames))))
        transforms = [
            Transform(s, t, rng.choice(list(TransformMode)))
            for s in inputs
            for t in outputs
            if s != t and s in dynamic and t in dynamic and rng.random() < 0.5
        ]
        role_privs = {rng.choice(roles): rng.choice(list(ProcessPrivilege))}
        for r in roles:
            if r not in role_privs and rng.random() < 0.25:
                role_privs[r] = rng.choice(list(ProcessPrivilege))
        for r, pp in role_privs.items():
            for c in inputs:
                grant(r, c, Privilege.REFERENCE)
            for c in outputs:
                grant(r, c, Privilege.CREATION, Privilege.REFERENCE)
            if pp is ProcessPrivilege.OWNER:
                for c in {*inputs, *outputs}:
                    grant(r, c, Privilege.REFERENCE_PLUS)
        processes.append(
            ProcessDef(f"P{i}", tuple(inputs), tuple(outputs), tuple(transforms), role_privs)
        )
    for r in roles:
        for c in cnames:
            if rng.random() < 0.25:
                extra = {p for p in Privilege if rng.random() < 0.35}
                if Privilege.CREATION in extra:
                    extra.add(Privilege.REFERENCE)
                grant(r, c, *extra)
    return canonicalize(
        Model(
            name,
            tuple(roles),
            tuple(classes),
            tuple(processes),
            {k: frozenset(v) for k, v in grants.items()},
        )
    )


def brute_validate(model: Model) -> list[tuple[str, str]]:
    """(code, site) pairs by direct enumeration; independent of the validator."""
    found: list[tuple[str, str]] = []
    grants = dict(model.class_grants)

    def g(role, cname):
        return grants.get((role, cname), frozenset())

    for p in model.processes:
        for t in p.transforms:
            for c in model.classes:
                if c.name in (t.source, t.target) and not c.dynamic:
                    found.append(
                        ("E-C1", f"process={p.name} transform={t.source}->{t.target} class={c.name}")
                    )

    for r in model.roles:
        for c in model.classes:
            privs = g(r, c.name)
            if Privilege.CREATION in privs and Privilege.REFERENCE not in privs:
                found.append(("E-C2", f"role={r} class={c.name}"))

    for r in model.roles:
        for p in model.processes:
            if r not in p.role_privileges:
                continue
            for c in model.classes:
                if c.name in p.inputs and Privilege.REFERENCE not in g(r, c.name):
                    found.append(("E-C3", f"role={r} process={p.name} class={c.name}"))
                if c.name in p.outputs and Privilege.CREATION not in g(r, c.name):
                    found.append(("E-C4", f"role={r} process={p.name} class={c.name}"))
                if (
                    p.role_privileges[r] is ProcessPrivilege.OWNER
                    and c.name in set(p.inputs) | set(p.outputs)
                    and Privilege.REFERENCE_PLUS not in g(r, c.name)
                ):
                    found.append(("E-C5", f"role={r} process={p.name} class={c.name}"))

    for p in model.processes:
        if not p.role_privileges:
            found.append(("E-ORPHAN-P", f"process={p.name}"))

    def consumer_count(cname):
        return sum(1 for p in model.processes if cname in p.inputs)

    def is_shared(cname):
        for r1 in model.roles:
            for r2 in model.roles:
                if r1 == r2:
                    continue
                if Privilege.CREATION in g(r1, cname) and g(r2, cname) & PLUS_PRIVILEGES:
                    return True
        return False

    for c in model.classes:
        n = consumer_count(c.name)
        if StatusPoint.DECISION in c.status_points and n < 2:
            found.append(("W-DP", f"class={c.name}"))
        if StatusPoint.DECISION not in c.status_points and n >= 2:
            found.append(("W-DP-MISS", f"class={c.name}"))
        if StatusPoint.FAIL in c.status_points and n < 2:
            found.append(("W-FP", f"class={c.name}"))
        if StatusPoint.WAITING in c.status_points and not is_shared(c.name):
            found.append(("W-WP", f"class={c.name}"))

    return sorted(found)


_ADD_RE = re.compile(r"^add (.+) to grant (\S+) on (\S+)$")
_DYNAMIC_RE = re.compile(r"^declare class (\S+) dynamic$")


def apply_suggestion(model: Model, suggestion: str) -> Model:
    """Apply a validator repair suggestion, returning the fixed model."""
    m = _ADD_RE.match(suggestion)
    if m:
        privs_text, role, cname = m.groups()
        extra = frozenset(
            Privilege(p.strip()) for p in privs_text.split(" and ")
        )
        grants = dict(model.class_grants)
        grants[(role, cname)] = grants.get((role, cname), frozenset()) | extra
        return canonicalize(
            Model(model.name, model.roles, model.classes, model.processes, grants)
        )
    m = _DYNAMIC_RE.match(suggestion)
    if m:
        cname = m.group(1)
        classes = tuple(
            ClassDef(c.name, True, c.status_points) if c.name == cname else c
            for c in model.classes
        )
        return canonicalize(
            Model(model.name, model.roles, classes, model.processes, model.class_grants)
        )
    raise ValueError(f"unrecognized suggestion: {suggestion!r}")


def toggle_waiting(model: Model, cname: str) -> Model:
    classes = []
    for c in model.classes:
        if c.name == cname:
            points = set(c.status_points) ^ {StatusPoint.WAITING}
            classes.append(ClassDef(c.name, c.dynamic, frozenset(points)))
        else:
            classes.append(c)
    return canonicalize(
        Model(model.name, model.roles, tuple(classes), model.processes, model.class_grants)
    )


# -- minimal structural syntax checks for the diagram formats ---------------

_DOT_LINE_RES = [
    re.compile(r'^digraph "[^"]*" \{$'),
    re.compile(r"^\s*rankdir=LR;$"),
    re.compile(r'^\s*subgraph "cluster_[A-Za-z0-9_]+" \{$'),
    re.compile(r'^\s*label="[^"]*";$'),
    re.compile(r'^\s*"[A-Za-z0-9_]+" \[.*\];$'),
    re.compile(r'^\s*"[A-Za-z0-9_]+" -> "[A-Za-z0-9_]+"( \[label="[^"]*"\])?;$'),
    re.compile(r"^\s*\}$"),
]


def check_dot_syntax(text: str) -> None:
    lines = text.rstrip("\n").split("\n")
    assert lines[0].startswith('digraph "')
    depth = 0
    for line in lines:
        assert any(r.match(line) for r in _DOT_LINE_RES), f"bad DOT line: {line!r}"
        depth += line.count("{") - line.count("}")
        assert depth >= 0
    assert depth == 0, "unbalanced braces"


_MERMAID_LINE_RES = [
    re.compile(r"^flowchart LR$"),
    re.compile(r"^\s*subgraph [A-Za-z0-9_]+$"),
    re.compile(r"^\s*end$"),
    re.compile(r'^\s*[A-Za-z0-9_]+\["[^"]*"\]$'),
    re.compile(r'^\s*[A-Za-z0-9_]+\(\["[^"]*"\]\)$'),
    re.compile(r"^\s*[A-Za-z0-9_]+ -->(\|[^|]*\|)? [A-Za-z0-9_]+$"),
    re.compile(r"^\s*style [A-Za-z0-9_]+ stroke-dasharray: 5 5$"),
]


def check_mermaid_syntax(text: str) -> None:
    lines = text.rstrip("\n").split("\n")
    assert lines[0] == "flowchart LR"
    depth = 0
    for line in lines[1:]:
        assert any(r.match(line) for r in _MERMAID_LINE_RES), f"bad Mermaid line: {line!r}"
        if line.strip().startswith("subgraph"):
            depth += 1
        elif line.strip() == "end":
            depth -= 1
        assert depth >= 0
    assert depth == 0, "unbalanced subgraph/end"
