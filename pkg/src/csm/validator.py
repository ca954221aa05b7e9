"""Consistency rules over a model and a stable diagnostic catalog.

Error rules cover privilege closure between process privileges and data
privileges, plus structural well-formedness; warning rules check that
status-point annotations are justified by the surrounding structure.
"""

from __future__ import annotations

from .diagnostics import Diagnostic, Severity
from .model import (
    Model,
    ModelError,
    PLUS_PRIVILEGES,
    Privilege,
    ProcessPrivilege,
    StatusPoint,
    shared_classes,
)


class UnknownCode(ModelError):
    """Asked to explain a diagnostic code that is not in the catalog."""


class InvalidModel(ModelError):
    """An operation that needs an error-free model was given one with errors."""

    def __init__(self, codes: list[str]) -> None:
        super().__init__(f"model has error diagnostics: {', '.join(codes)}")
        self.codes = codes


CATALOG: dict[str, tuple[Severity, str]] = {
    "E-C1": (
        Severity.ERROR,
        "Every class that appears as a transform endpoint must be declared a "
        "Dynamic state class: only dynamic states can be entered or left "
        "through a process firing.",
    ),
    "E-C2": (
        Severity.ERROR,
        "A role holding the creation privilege on a class also has the "
        "reference privilege on that class.",
    ),
    "E-C3": (
        Severity.ERROR,
        "A role holding owner or responsibility on a process must hold the "
        "reference privilege on all input classes of that process.",
    ),
    "E-C4": (
        Severity.ERROR,
        "A role holding owner or responsibility on a process must hold the "
        "creation privilege on all output classes of that process.",
    ),
    "E-C5": (
        Severity.ERROR,
        "A role holding owner privilege on a process must hold the "
        "reference+ privilege on all input and output classes of that "
        "process.",
    ),
    "E-ORPHAN-P": (
        Severity.ERROR,
        "Every process must name at least one owner or responsible role; a "
        "process nobody answers for cannot be executed.",
    ),
    "W-DP": (
        Severity.WARNING,
        "A class flagged as a decision point should be consumed by at least "
        "two processes, otherwise there is no choice to make at that state.",
    ),
    "W-DP-MISS": (
        Severity.WARNING,
        "A class consumed by two or more processes represents a choice "
        "between alternative next steps and should be flagged as a decision "
        "point.",
    ),
    "W-FP": (
        Severity.WARNING,
        "A class flagged as a fail point should have a second consuming "
        "process acting as a backup path when the service meets an obstacle.",
    ),
    "W-WP": (
        Severity.WARNING,
        "A class flagged as a waiting point should be shared between two "
        "distinct roles; otherwise no partner is waiting on it.",
    ),
}


def explain(code: str) -> str:
    """Human-readable rule text for a catalog code."""
    try:
        return CATALOG[code][1]
    except KeyError:
        raise UnknownCode(code) from None


def _diag(code: str, site: str, message: str, suggestion: str | None = None) -> Diagnostic:
    return Diagnostic(
        code=code,
        severity=CATALOG[code][0],
        site=site,
        message=message,
        suggestion=suggestion,
    )


def validate(model: Model) -> list[Diagnostic]:
    """Evaluate every rule; returns diagnostics sorted by (code, site)."""
    out: list[Diagnostic] = []

    # E-C1: transform endpoints must be dynamic states.
    for p in model.processes:
        for t in p.transforms:
            for end in (t.source, t.target):
                if not model.class_def(end).dynamic:
                    out.append(
                        _diag(
                            "E-C1",
                            f"process={p.name} transform={t.source}->{t.target} class={end}",
                            f"transform endpoint {end!r} is not a dynamic state",
                            f"declare class {end} dynamic",
                        )
                    )

    # E-C2: creation implies reference.
    for (role, class_name), privs in model.class_grants.items():
        if Privilege.CREATION in privs and Privilege.REFERENCE not in privs:
            out.append(
                _diag(
                    "E-C2",
                    f"role={role} class={class_name}",
                    f"role {role!r} creates {class_name!r} without the reference privilege",
                    f"add reference to grant {role} on {class_name}",
                )
            )

    # E-C3 / E-C4 / E-C5: process privileges imply data privileges.
    for p in model.processes:
        for role, ppriv in p.role_privileges.items():
            for c in p.inputs:
                if Privilege.REFERENCE not in model.grants(role, c):
                    out.append(
                        _diag(
                            "E-C3",
                            f"role={role} process={p.name} class={c}",
                            f"role {role!r} is privileged on {p.name!r} but lacks "
                            f"reference on input {c!r}",
                            f"add reference to grant {role} on {c}",
                        )
                    )
            for c in p.outputs:
                privs = model.grants(role, c)
                if Privilege.CREATION not in privs:
                    wanted = "creation"
                    if Privilege.REFERENCE not in privs:
                        wanted = "creation and reference"
                    out.append(
                        _diag(
                            "E-C4",
                            f"role={role} process={p.name} class={c}",
                            f"role {role!r} is privileged on {p.name!r} but lacks "
                            f"creation on output {c!r}",
                            f"add {wanted} to grant {role} on {c}",
                        )
                    )
            if ppriv is ProcessPrivilege.OWNER:
                for c in sorted({*p.inputs, *p.outputs}):
                    if Privilege.REFERENCE_PLUS not in model.grants(role, c):
                        out.append(
                            _diag(
                                "E-C5",
                                f"role={role} process={p.name} class={c}",
                                f"owner {role!r} of {p.name!r} lacks reference+ on {c!r}",
                                f"add reference+ to grant {role} on {c}",
                            )
                        )

    # E-ORPHAN-P: every process has a responsible party.
    for p in model.processes:
        if not p.role_privileges:
            out.append(
                _diag(
                    "E-ORPHAN-P",
                    f"process={p.name}",
                    f"process {p.name!r} has no owner or responsible role",
                    f"declare an owner or responsible role for process {p.name}",
                )
            )

    # Status-point warnings.
    consumers: dict[str, int] = {c.name: 0 for c in model.classes}
    for p in model.processes:
        for c in p.inputs:
            consumers[c] += 1
    shared_names: set[str] = set()
    for i, r1 in enumerate(model.roles):
        for r2 in model.roles[i + 1 :]:
            shared_names.update(s.class_name for s in shared_classes(model, r1, r2))
    for c in model.classes:
        n = consumers[c.name]
        if StatusPoint.DECISION in c.status_points and n < 2:
            out.append(
                _diag(
                    "W-DP",
                    f"class={c.name}",
                    f"decision point {c.name!r} is consumed by {n} process(es); "
                    "no alternative to choose between",
                    f"add a second consuming process or drop the decision flag on {c.name}",
                )
            )
        if StatusPoint.DECISION not in c.status_points and n >= 2:
            out.append(
                _diag(
                    "W-DP-MISS",
                    f"class={c.name}",
                    f"class {c.name!r} is consumed by {n} processes but is not "
                    "flagged as a decision point",
                    f"flag class {c.name} as a decision point",
                )
            )
        if StatusPoint.FAIL in c.status_points and n < 2:
            out.append(
                _diag(
                    "W-FP",
                    f"class={c.name}",
                    f"fail point {c.name!r} has no second consuming process to "
                    "act as a backup",
                    f"add a backup process consuming {c.name}",
                )
            )
        if StatusPoint.WAITING in c.status_points and c.name not in shared_names:
            out.append(
                _diag(
                    "W-WP",
                    f"class={c.name}",
                    f"waiting point {c.name!r} is not shared between two roles; "
                    "nobody is waiting on it",
                    f"share {c.name} across roles or drop the waiting flag",
                )
            )

    out.sort(key=lambda d: d.sort_key)
    return out


def ensure_valid(model: Model) -> None:
    """Raise InvalidModel when any error-level rule fires."""
    codes = [d.code for d in validate(model) if d.severity is Severity.ERROR]
    if codes:
        raise InvalidModel(codes)
