"""Diagram emitters: Graphviz DOT and Mermaid flowchart text.

Visual mapping: an oval is a class, a box is a process, one swim-lane
cluster per role holds the processes that role owns. A process shared
across roles is drawn once in its home lane with a dashed alias node in
every other privileged role's lane. Status points show up as W/F/D
suffixes on the class label; transform output edges carry "remains" or
"leaves". Output is deterministic: identical models give identical bytes.
"""

from __future__ import annotations

from .model import (
    Model,
    Privilege,
    StatusPoint,
    TransformMode,
    canonicalize,
    privilege_sort_key,
)
from .validator import ensure_valid

_POINT_LETTER = {
    StatusPoint.WAITING: "W",
    StatusPoint.FAIL: "F",
    StatusPoint.DECISION: "D",
}

_PRIV_ABBREV = {
    Privilege.CREATION: "c",
    Privilege.MODIFICATION: "m",
    Privilege.REFERENCE: "r",
    Privilege.SUPPRESSION: "s",
    Privilege.MODIFICATION_PLUS: "m+",
    Privilege.REFERENCE_PLUS: "r+",
    Privilege.SUPPRESSION_PLUS: "s+",
}


def _class_label(model: Model, name: str, show_privileges: bool) -> str:
    cdef = model.class_def(name)
    label = name
    letters = [
        _POINT_LETTER[pt]
        for pt in (StatusPoint.WAITING, StatusPoint.FAIL, StatusPoint.DECISION)
        if pt in cdef.status_points
    ]
    if letters:
        label += f" [{''.join(letters)}]"
    if show_privileges:
        for role in model.roles:
            privs = model.grants(role, name)
            if privs:
                listed = ",".join(
                    _PRIV_ABBREV[p] for p in sorted(privs, key=privilege_sort_key)
                )
                label += f"\\n{role}: {listed}"
    return label


def _home_role(p) -> str | None:
    """Lane a process is drawn in: first owner, else first responsible."""
    if p.owners:
        return p.owners[0]
    if p.responsibles:
        return p.responsibles[0]
    return None


def _pid(name: str) -> str:
    return f"p_{name}"


def _cid(name: str) -> str:
    return f"c_{name}"


def _edge_label(p, output: str) -> str | None:
    modes = sorted(
        {
            "remains" if t.mode is TransformMode.REMAINING else "leaves"
            for t in p.transforms
            if t.target == output
        }
    )
    return "/".join(modes) if modes else None


def to_dot(model: Model, show_privileges: bool = False) -> str:
    """Render the model as a Graphviz digraph."""
    ensure_valid(model)
    m = canonicalize(model)
    lines = [f'digraph "{m.name}" {{']
    if m.roles or m.classes or m.processes:
        lines.append("  rankdir=LR;")
    for role in m.roles:
        lines.append(f'  subgraph "cluster_{role}" {{')
        lines.append(f'    label="{role}";')
        for p in m.processes:
            if _home_role(p) == role:
                lines.append(f'    "{_pid(p.name)}" [shape=box, label="{p.name}"];')
            elif role in p.role_privileges:
                lines.append(
                    f'    "{_pid(p.name)}__{role}" '
                    f'[shape=box, style=dashed, label="{p.name}"];'
                )
        lines.append("  }")
    for c in m.classes:
        lines.append(
            f'  "{_cid(c.name)}" '
            f'[shape=oval, label="{_class_label(m, c.name, show_privileges)}"];'
        )
    for p in m.processes:
        for c in p.inputs:
            lines.append(f'  "{_cid(c)}" -> "{_pid(p.name)}";')
        for c in p.outputs:
            label = _edge_label(p, c)
            attr = f' [label="{label}"]' if label else ""
            lines.append(f'  "{_pid(p.name)}" -> "{_cid(c)}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_mermaid(model: Model) -> str:
    """Render the model as a Mermaid flowchart."""
    ensure_valid(model)
    m = canonicalize(model)
    lines = ["flowchart LR"]
    dashed: list[str] = []
    for role in m.roles:
        lines.append(f"  subgraph {role}")
        for p in m.processes:
            if _home_role(p) == role:
                lines.append(f'    {_pid(p.name)}["{p.name}"]')
            elif role in p.role_privileges:
                alias = f"{_pid(p.name)}__{role}"
                lines.append(f'    {alias}["{p.name}"]')
                dashed.append(alias)
        lines.append("  end")
    for c in m.classes:
        lines.append(f'  {_cid(c.name)}(["{_class_label(m, c.name, False)}"])')
    for p in m.processes:
        for c in p.inputs:
            lines.append(f"  {_cid(c)} --> {_pid(p.name)}")
        for c in p.outputs:
            label = _edge_label(p, c)
            arrow = f" -->|{label}| " if label else " --> "
            lines.append(f"  {_pid(p.name)}{arrow}{_cid(c)}")
    for alias in dashed:
        lines.append(f"  style {alias} stroke-dasharray: 5 5")
    return "\n".join(lines) + "\n"
