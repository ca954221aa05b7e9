"""Collaboration-level inference from privilege patterns.

Between two co-provider roles the collaboration level is judged per shared
artifact, not per pair: a process both roles are privileged on, or a class
one role creates and the other reads. A pair of roles can therefore carry a
mix of levels at once.

Level patterns, checked in precedence order per artifact (first match wins):

* very tight  - one role owns the process, the other is responsible for it,
  and on some output the owner may modify foreign data while the partner
  may read it.
* tight       - both roles own the process and on the outputs they share
  each may only read the other's data (reference+ but no modification+ or
  suppression+).
* loose       - one role creates a class the other may only read via
  reference+, and the class is a waiting point: the reader is blocked on it.
* very loose  - the same sharing shape without the waiting point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

from .model import (
    Model,
    ModelError,
    Privilege,
    ProcessPrivilege,
    StatusPoint,
)
from .validator import InvalidModel, ensure_valid


class SameRole(ModelError):
    """Collaboration levels are defined between distinct roles only."""


class Level(enum.Enum):
    VERY_TIGHT = "very tight"
    TIGHT = "tight"
    LOOSE = "loose"
    VERY_LOOSE = "very loose"


@dataclass(frozen=True)
class LevelFinding:
    """One (producer, consumer, artifact) judgement with its evidence."""

    producer: str
    consumer: str
    artifact: str
    artifact_kind: str  # "process" or "class"
    level: Level
    evidence: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "producer": self.producer,
            "consumer": self.consumer,
            "artifact": self.artifact,
            "artifact_kind": self.artifact_kind,
            "level": self.level.value,
            "evidence": list(self.evidence),
        }


@dataclass(frozen=True)
class CollaborationReport:
    findings: tuple[LevelFinding, ...]

    @cached_property
    def pair_summary(self) -> dict[tuple[str, str], frozenset[Level]]:
        summary: dict[tuple[str, str], set[Level]] = {}
        for f in self.findings:
            summary.setdefault((f.producer, f.consumer), set()).add(f.level)
        return {pair: frozenset(levels) for pair, levels in summary.items()}

    def levels_between(self, r1: str, r2: str) -> frozenset[Level]:
        """Levels found for the unordered pair, either direction."""
        levels: set[Level] = set()
        for pair in ((r1, r2), (r2, r1)):
            levels.update(self.pair_summary.get(pair, frozenset()))
        return frozenset(levels)

    def to_dict(self) -> dict:
        return {
            "findings": [f.to_dict() for f in self.findings],
            "pair_summary": {
                f"{producer}->{consumer}": sorted(l.value for l in levels)
                for (producer, consumer), levels in sorted(self.pair_summary.items())
            },
        }

    def to_table(self) -> str:
        header = ("LEVEL", "PRODUCER", "CONSUMER", "ARTIFACT")
        rows = [
            (f.level.value, f.producer, f.consumer, f.artifact)
            for f in self.findings
        ]
        widths = [
            max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
            for i in range(4)
        ]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*header)]
        lines.extend(fmt.format(*r) for r in rows)
        return "\n".join(lines) + "\n"


# Privileges a pure consumer must not hold on the shared class.
_FORBIDDEN_FOR_CONSUMER = frozenset(
    {
        Privilege.CREATION,
        Privilege.MODIFICATION,
        Privilege.SUPPRESSION,
        Privilege.MODIFICATION_PLUS,
        Privilege.SUPPRESSION_PLUS,
    }
)

_WRITE_PLUS = frozenset({Privilege.MODIFICATION_PLUS, Privilege.SUPPRESSION_PLUS})


def _co_privileged_output(model: Model, class_name: str, r1: str, r2: str) -> bool:
    return any(
        class_name in p.outputs
        and r1 in p.role_privileges
        and r2 in p.role_privileges
        for p in model.processes
    )


def classify_pair(model: Model, r1: str, r2: str) -> list[LevelFinding]:
    """Findings for the ordered pair: r1 as owner/producer side.

    Tight is symmetric and is reported with the roles in lexicographic
    order regardless of the argument order.
    """
    model.require_role(r1)
    model.require_role(r2)
    if r1 == r2:
        raise SameRole(r1)

    findings: list[LevelFinding] = []
    for p in sorted(model.processes, key=lambda p: p.name):
        pp1 = p.role_privileges.get(r1)
        pp2 = p.role_privileges.get(r2)
        if pp1 is ProcessPrivilege.OWNER and pp2 is ProcessPrivilege.RESPONSIBILITY:
            hits = [
                c
                for c in sorted(p.outputs)
                if Privilege.MODIFICATION_PLUS in model.grants(r1, c)
                and Privilege.REFERENCE_PLUS in model.grants(r2, c)
            ]
            if hits:
                findings.append(
                    LevelFinding(
                        producer=r1,
                        consumer=r2,
                        artifact=p.name,
                        artifact_kind="process",
                        level=Level.VERY_TIGHT,
                        evidence=(
                            f"owner({r1},{p.name})",
                            f"responsibility({r2},{p.name})",
                            *(
                                f"modification+({r1},{c}) & reference+({r2},{c})"
                                for c in hits
                            ),
                        ),
                    )
                )
                continue
        if pp1 is ProcessPrivilege.OWNER and pp2 is ProcessPrivilege.OWNER:
            shared_outputs = [
                c
                for c in sorted(p.outputs)
                if model.grants(r1, c) and model.grants(r2, c)
            ]
            if shared_outputs and all(
                Privilege.REFERENCE_PLUS in model.grants(r, c)
                and not (model.grants(r, c) & _WRITE_PLUS)
                for c in shared_outputs
                for r in (r1, r2)
            ):
                lo, hi = sorted((r1, r2))
                findings.append(
                    LevelFinding(
                        producer=lo,
                        consumer=hi,
                        artifact=p.name,
                        artifact_kind="process",
                        level=Level.TIGHT,
                        evidence=(
                            f"owner({lo},{p.name})",
                            f"owner({hi},{p.name})",
                            *(
                                f"read-only sharing of {c} (reference+ both ways)"
                                for c in shared_outputs
                            ),
                        ),
                    )
                )

    for c in sorted(model.classes, key=lambda c: c.name):
        g1 = model.grants(r1, c.name)
        g2 = model.grants(r2, c.name)
        if (
            Privilege.CREATION in g1
            and Privilege.REFERENCE_PLUS in g2
            and not (g2 & _FORBIDDEN_FOR_CONSUMER)
            and not _co_privileged_output(model, c.name, r1, r2)
        ):
            waiting = StatusPoint.WAITING in c.status_points
            findings.append(
                LevelFinding(
                    producer=r1,
                    consumer=r2,
                    artifact=c.name,
                    artifact_kind="class",
                    level=Level.LOOSE if waiting else Level.VERY_LOOSE,
                    evidence=(
                        f"creation({r1},{c.name})",
                        f"reference+({r2},{c.name})",
                        "waiting point" if waiting else "no waiting point",
                    ),
                )
            )
    return findings


def classify_all(model: Model) -> CollaborationReport:
    """Findings for every ordered pair of distinct roles.

    Raises InvalidModel when the model carries error-level diagnostics;
    level patterns assume the privilege-closure rules hold.
    """
    ensure_valid(model)
    findings: list[LevelFinding] = []
    seen: set[LevelFinding] = set()
    for r1 in sorted(model.roles):
        for r2 in sorted(model.roles):
            if r1 == r2:
                continue
            for f in classify_pair(model, r1, r2):
                if f not in seen:
                    seen.add(f)
                    findings.append(f)
    return CollaborationReport(findings=tuple(findings))


__all__ = [
    "Level",
    "LevelFinding",
    "CollaborationReport",
    "SameRole",
    "InvalidModel",
    "classify_pair",
    "classify_all",
]
