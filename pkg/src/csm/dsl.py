"""Textual and JSON forms of a service model.

Text grammar (free-form whitespace, ``#`` comments to end of line):

    model  := "model" STRING "{" item* "}"
    item   := "role" IDENT
            | "class" IDENT ["dynamic"] ["{" point ("," point)* "}"]
            | "process" IDENT "{" pitem* "}"
            | "grant" IDENT "on" IDENT "{" priv ("," priv)* "}"
    pitem  := "owner" IDENT | "responsible" IDENT
            | "input" IDENT | "output" IDENT
            | "transform" IDENT "->" IDENT ("remaining" | "leaving")
    point  := "waiting" | "fail" | "decision"
    priv   := "creation" | "modification" | "reference" | "suppression"
            | "modification+" | "reference+" | "suppression+"

Parsing recovers at item boundaries so several independent mistakes are
reported in one pass. A transform's mode keyword is mandatory: there is no
default for whether the source token survives the firing.
"""

from __future__ import annotations

import bisect
import json
import re
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, Severity, SourceSpan, has_errors
from .model import (
    ClassDef,
    Model,
    Privilege,
    ProcessDef,
    ProcessPrivilege,
    StatusPoint,
    Transform,
    TransformMode,
    canonicalize,
    privilege_sort_key,
    status_point_sort_key,
)

ITEM_KEYWORDS = frozenset({"role", "class", "process", "grant"})
PITEM_KEYWORDS = frozenset({"owner", "responsible", "input", "output", "transform"})


@dataclass(frozen=True)
class ParseResult:
    """Outcome of a parse: a canonical model unless errors were found."""

    model: Model | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "string" | "punct" | "junk" | "eof"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r'"[^"\n]*"|[A-Za-z][A-Za-z0-9_]*|->|[{}+,]')
_COMMENT_RE = re.compile(r"#[^\n]*")
_WS_RE = re.compile(r"\s+")


def _lex(source: str) -> list[_Token]:
    # Blank out comments so offsets stay valid for span computation.
    text = _COMMENT_RE.sub(lambda m: " " * len(m.group()), source)
    line_starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            line_starts.append(i + 1)

    def at(offset: int) -> tuple[int, int]:
        li = bisect.bisect_right(line_starts, offset) - 1
        return li + 1, offset - line_starts[li] + 1

    tokens: list[_Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        ws = _WS_RE.match(text, pos)
        if ws:
            pos = ws.end()
            continue
        m = _TOKEN_RE.match(text, pos)
        line, col = at(pos)
        if m:
            lexeme = m.group()
            if lexeme.startswith('"'):
                kind = "string"
                lexeme = lexeme[1:-1]
            elif lexeme[0].isalpha():
                kind = "ident"
            else:
                kind = "punct"
            tokens.append(_Token(kind, lexeme, line, col))
            pos = m.end()
        else:
            tokens.append(_Token("junk", text[pos], line, col))
            pos += 1
    eol_line, eol_col = at(n)
    tokens.append(_Token("eof", "", eol_line, eol_col))
    return tokens


@dataclass
class _ProcessItem:
    name: str
    span: SourceSpan
    owners: list[tuple[str, SourceSpan]] = field(default_factory=list)
    responsibles: list[tuple[str, SourceSpan]] = field(default_factory=list)
    inputs: list[tuple[str, SourceSpan]] = field(default_factory=list)
    outputs: list[tuple[str, SourceSpan]] = field(default_factory=list)
    transforms: list[tuple[str, str, TransformMode, SourceSpan]] = field(
        default_factory=list
    )


@dataclass
class _Draft:
    """Raw declarations plus spans, before name resolution."""

    name: str = ""
    roles: list[tuple[str, SourceSpan]] = field(default_factory=list)
    classes: list[tuple[ClassDef, SourceSpan]] = field(default_factory=list)
    processes: list[_ProcessItem] = field(default_factory=list)
    grants: list[tuple[str, str, frozenset[Privilege], SourceSpan]] = field(
        default_factory=list
    )


class _Recover(Exception):
    """Internal signal: abandon the current item and resynchronize."""


class _Parser:
    def __init__(self, tokens: list[_Token], file_label: str) -> None:
        self.tokens = tokens
        self.pos = 0
        self.file = file_label
        self.diagnostics: list[Diagnostic] = []
        self.draft = _Draft()

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def span(self, tok: _Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.column, max(len(tok.text), 1))

    def error(self, code: str, message: str, tok: _Token, site: str = "") -> None:
        self.diagnostics.append(
            Diagnostic(
                code=code,
                severity=Severity.ERROR,
                site=site or (tok.text or "end of input"),
                message=message,
                span=self.span(tok),
            )
        )

    def expect_ident(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.error("E-SYN", f"expected {what}, got {tok.text!r}", tok)
            raise _Recover
        return self.advance()

    def expect_keyword(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            self.error("E-SYN", f"expected {word!r}, got {tok.text!r}", tok)
            raise _Recover
        return self.advance()

    def expect_punct(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != text:
            self.error("E-SYN", f"expected {text!r}, got {tok.text!r}", tok)
            raise _Recover
        return self.advance()

    def sync_item(self) -> None:
        """Skip ahead to the next top-level item keyword or closing brace."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "punct" and tok.text == "{":
                depth += 1
            elif tok.kind == "punct" and tok.text == "}":
                if depth == 0:
                    return
                depth -= 1
            elif depth == 0 and tok.kind == "ident" and tok.text in ITEM_KEYWORDS:
                return
            self.advance()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> _Draft | None:
        try:
            self.expect_keyword("model")
            name_tok = self.peek()
            if name_tok.kind != "string":
                self.error("E-SYN", "expected quoted model name", name_tok)
                raise _Recover
            self.advance()
            self.draft.name = name_tok.text
            self.expect_punct("{")
        except _Recover:
            return None
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                self.error("E-SYN", "unexpected end of input, missing '}'", tok)
                break
            if tok.kind == "punct" and tok.text == "}":
                self.advance()
                break
            if tok.kind == "ident" and tok.text in ITEM_KEYWORDS:
                try:
                    self.parse_item(tok.text)
                except _Recover:
                    self.sync_item()
            else:
                self.error("E-SYN", f"expected a declaration, got {tok.text!r}", tok)
                self.advance()
                self.sync_item()
        trailing = self.peek()
        if trailing.kind != "eof":
            self.error("E-SYN", f"unexpected input after model: {trailing.text!r}", trailing)
        return self.draft

    def parse_item(self, keyword: str) -> None:
        if keyword == "role":
            self.advance()
            tok = self.expect_ident("role name")
            self.draft.roles.append((tok.text, self.span(tok)))
        elif keyword == "class":
            self.parse_class()
        elif keyword == "process":
            self.parse_process()
        else:
            self.parse_grant()

    def parse_class(self) -> None:
        self.advance()
        name_tok = self.expect_ident("class name")
        dynamic = False
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "dynamic":
            self.advance()
            dynamic = True
        points: set[StatusPoint] = set()
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "{":
            self.advance()
            while True:
                pt = self.expect_ident("status point")
                try:
                    points.add(StatusPoint(pt.text))
                except ValueError:
                    self.error("E-SYN", f"unknown status point {pt.text!r}", pt)
                tok = self.peek()
                if tok.kind == "punct" and tok.text == ",":
                    self.advance()
                    continue
                break
            self.expect_punct("}")
        self.draft.classes.append(
            (
                ClassDef(name_tok.text, dynamic=dynamic, status_points=frozenset(points)),
                self.span(name_tok),
            )
        )

    def parse_process(self) -> None:
        self.advance()
        name_tok = self.expect_ident("process name")
        proc = _ProcessItem(name=name_tok.text, span=self.span(name_tok))
        self.expect_punct("{")
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == "}":
                self.advance()
                break
            if tok.kind == "eof":
                self.error("E-SYN", "unexpected end of input in process body", tok)
                break
            if tok.kind == "ident" and tok.text in PITEM_KEYWORDS:
                try:
                    self.parse_pitem(proc, tok.text)
                except _Recover:
                    self.sync_pitem()
            else:
                self.error("E-SYN", f"expected a process item, got {tok.text!r}", tok)
                self.advance()
                self.sync_pitem()
        self.draft.processes.append(proc)

    def sync_pitem(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "punct" and tok.text == "}":
                return
            if tok.kind == "ident" and tok.text in PITEM_KEYWORDS:
                return
            self.advance()

    def parse_pitem(self, proc: _ProcessItem, keyword: str) -> None:
        kw_tok = self.advance()
        if keyword == "transform":
            src = self.expect_ident("transform source class")
            self.expect_punct("->")
            dst = self.expect_ident("transform target class")
            tok = self.peek()
            if tok.kind == "ident" and tok.text in ("remaining", "leaving"):
                self.advance()
                proc.transforms.append(
                    (src.text, dst.text, TransformMode(tok.text), self.span(src))
                )
            else:
                self.error(
                    "E-TRF-MODE",
                    "transform requires an explicit 'remaining' or 'leaving' mode",
                    kw_tok,
                    site=f"process={proc.name} transform={src.text}->{dst.text}",
                )
            return
        tok = self.expect_ident(f"{keyword} name")
        entry = (tok.text, self.span(tok))
        if keyword == "owner":
            proc.owners.append(entry)
        elif keyword == "responsible":
            proc.responsibles.append(entry)
        elif keyword == "input":
            proc.inputs.append(entry)
        else:
            proc.outputs.append(entry)

    def parse_grant(self) -> None:
        self.advance()
        role_tok = self.expect_ident("role name")
        self.expect_keyword("on")
        class_tok = self.expect_ident("class name")
        self.expect_punct("{")
        privs: set[Privilege] = set()
        while True:
            pt = self.expect_ident("privilege")
            text = pt.text
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.text == "+":
                self.advance()
                text += "+"
            try:
                privs.add(Privilege(text))
            except ValueError:
                self.error("E-SYN", f"unknown privilege {text!r}", pt)
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                self.advance()
                continue
            break
        self.expect_punct("}")
        self.draft.grants.append(
            (role_tok.text, class_tok.text, frozenset(privs), self.span(role_tok))
        )


def _resolve(draft: _Draft, file_label: str) -> tuple[Model | None, list[Diagnostic]]:
    """Name resolution and duplicate checks over a parsed draft."""
    diags: list[Diagnostic] = []

    def err(code: str, site: str, message: str, span: SourceSpan | None) -> None:
        diags.append(
            Diagnostic(code=code, severity=Severity.ERROR, site=site, message=message, span=span)
        )

    roles: list[str] = []
    for name, span in draft.roles:
        if name in roles:
            err("E-DUP", f"role={name}", f"role {name!r} declared twice", span)
        else:
            roles.append(name)

    classes: list[ClassDef] = []
    class_names: set[str] = set()
    for cdef, span in draft.classes:
        if cdef.name in class_names:
            err("E-DUP", f"class={cdef.name}", f"class {cdef.name!r} declared twice", span)
        else:
            class_names.add(cdef.name)
            classes.append(cdef)

    processes: list[ProcessDef] = []
    proc_names: set[str] = set()
    for proc in draft.processes:
        if proc.name in proc_names:
            err(
                "E-DUP",
                f"process={proc.name}",
                f"process {proc.name!r} declared twice",
                proc.span,
            )
            continue
        proc_names.add(proc.name)
        role_privileges: dict[str, ProcessPrivilege] = {}
        for entries, priv in (
            (proc.owners, ProcessPrivilege.OWNER),
            (proc.responsibles, ProcessPrivilege.RESPONSIBILITY),
        ):
            for rname, span in entries:
                if rname not in roles:
                    err(
                        "E-REF",
                        f"process={proc.name} role={rname}",
                        f"role {rname!r} is not declared",
                        span,
                    )
                elif rname in role_privileges:
                    err(
                        "E-DUP",
                        f"process={proc.name} role={rname}",
                        f"role {rname!r} already holds a privilege on this process",
                        span,
                    )
                else:
                    role_privileges[rname] = priv
        inputs: list[str] = []
        outputs: list[str] = []
        for entries, target in ((proc.inputs, inputs), (proc.outputs, outputs)):
            for cname, span in entries:
                if cname not in class_names:
                    err(
                        "E-REF",
                        f"process={proc.name} class={cname}",
                        f"class {cname!r} is not declared",
                        span,
                    )
                elif cname not in target:
                    target.append(cname)
        transforms: list[Transform] = []
        for src, dst, mode, span in proc.transforms:
            site = f"process={proc.name} transform={src}->{dst}"
            if src == dst:
                err("E-TRF-END", site, "a transform may not map a class to itself", span)
                continue
            ok = True
            if src not in inputs:
                err(
                    "E-TRF-END",
                    site,
                    f"transform source {src!r} is not an input of the process",
                    span,
                )
                ok = False
            if dst not in outputs:
                err(
                    "E-TRF-END",
                    site,
                    f"transform target {dst!r} is not an output of the process",
                    span,
                )
                ok = False
            if ok:
                transforms.append(Transform(src, dst, mode))
        processes.append(
            ProcessDef(
                name=proc.name,
                inputs=tuple(inputs),
                outputs=tuple(outputs),
                transforms=tuple(transforms),
                role_privileges=role_privileges,
            )
        )

    grants: dict[tuple[str, str], frozenset[Privilege]] = {}
    for role, class_name, privs, span in draft.grants:
        site = f"grant role={role} class={class_name}"
        if role not in roles:
            err("E-REF", site, f"role {role!r} is not declared", span)
            continue
        if class_name not in class_names:
            err("E-REF", site, f"class {class_name!r} is not declared", span)
            continue
        if (role, class_name) in grants:
            err("E-DUP", site, "grant declared twice for this role and class", span)
            continue
        grants[(role, class_name)] = privs

    if diags:
        return None, diags
    model = canonicalize(
        Model(
            name=draft.name,
            roles=tuple(roles),
            classes=tuple(classes),
            processes=tuple(processes),
            class_grants=grants,
        )
    )
    return model, diags


def parse_text(source: str, file_label: str = "<string>") -> ParseResult:
    """Parse model source text; recover at item boundaries on errors."""
    parser = _Parser(_lex(source), file_label)
    draft = parser.parse()
    diagnostics = list(parser.diagnostics)
    model: Model | None = None
    if draft is not None:
        model, semantic = _resolve(draft, file_label)
        diagnostics.extend(semantic)
    diagnostics.sort(
        key=lambda d: (d.span.line, d.span.column) if d.span else (0, 0)
    )
    if has_errors(diagnostics):
        model = None
    return ParseResult(model=model, diagnostics=diagnostics)


def emit_text(model: Model) -> str:
    """Pretty-print the canonical form; parses back to the same model."""
    m = canonicalize(model)
    lines = [f'model "{m.name}" {{']
    for r in m.roles:
        lines.append(f"  role {r}")
    for c in m.classes:
        head = f"  class {c.name}"
        if c.dynamic:
            head += " dynamic"
        if c.status_points:
            pts = ", ".join(
                s.value for s in sorted(c.status_points, key=status_point_sort_key)
            )
            head += f" {{ {pts} }}"
        lines.append(head)
    for p in m.processes:
        lines.append(f"  process {p.name} {{")
        for r in p.owners:
            lines.append(f"    owner {r}")
        for r in p.responsibles:
            lines.append(f"    responsible {r}")
        for c in p.inputs:
            lines.append(f"    input {c}")
        for c in p.outputs:
            lines.append(f"    output {c}")
        for t in p.transforms:
            lines.append(f"    transform {t.source} -> {t.target} {t.mode.value}")
        lines.append("  }")
    for (role, class_name), privs in m.class_grants.items():
        listed = ", ".join(p.value for p in sorted(privs, key=privilege_sort_key))
        lines.append(f"  grant {role} on {class_name} {{ {listed} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def model_to_dict(model: Model) -> dict:
    """JSON-ready document for the canonical form of the model."""
    m = canonicalize(model)
    return {
        "name": m.name,
        "roles": list(m.roles),
        "classes": [
            {
                "name": c.name,
                "dynamic": c.dynamic,
                "status_points": [
                    s.value for s in sorted(c.status_points, key=status_point_sort_key)
                ],
            }
            for c in m.classes
        ],
        "processes": [
            {
                "name": p.name,
                "inputs": list(p.inputs),
                "outputs": list(p.outputs),
                "transforms": [
                    {"from": t.source, "to": t.target, "mode": t.mode.value}
                    for t in p.transforms
                ],
                "owners": list(p.owners),
                "responsibles": list(p.responsibles),
            }
            for p in m.processes
        ],
        "grants": [
            {
                "role": role,
                "class": class_name,
                "privileges": [
                    p.value for p in sorted(privs, key=privilege_sort_key)
                ],
            }
            for (role, class_name), privs in m.class_grants.items()
        ],
    }


def emit_json(model: Model) -> bytes:
    """Deterministic JSON bytes: sorted keys, canonical member order."""
    return (
        json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"
    ).encode("utf-8")


def _json_error(message: str, site: str = "document") -> Diagnostic:
    return Diagnostic(
        code="E-JSON", severity=Severity.ERROR, site=site, message=message
    )


def parse_json(data: bytes | str, file_label: str = "<json>") -> ParseResult:
    """Parse the JSON interchange form into a canonical model."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            return ParseResult(None, [_json_error(f"not valid UTF-8: {exc}")])
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        return ParseResult(None, [_json_error(f"malformed JSON: {exc}")])

    diags: list[Diagnostic] = []

    def need(obj: dict, key: str, site: str):
        if not isinstance(obj, dict) or key not in obj:
            diags.append(_json_error(f"missing required key {key!r}", site))
            return None
        return obj[key]

    if not isinstance(doc, dict):
        return ParseResult(None, [_json_error("top-level value must be an object")])

    name = need(doc, "name", "document")
    if name is not None and not isinstance(name, str):
        diags.append(_json_error("'name' must be a string"))
        name = None

    draft = _Draft(name=name or "")

    roles = need(doc, "roles", "document") or []
    if not isinstance(roles, list):
        diags.append(_json_error("'roles' must be an array"))
        roles = []
    for r in roles:
        if isinstance(r, str):
            draft.roles.append((r, None))  # type: ignore[arg-type]
        else:
            diags.append(_json_error("role entries must be strings", "roles"))

    classes = need(doc, "classes", "document") or []
    if not isinstance(classes, list):
        diags.append(_json_error("'classes' must be an array"))
        classes = []
    for entry in classes:
        site = "classes"
        cname = need(entry, "name", site)
        if not isinstance(cname, str):
            continue
        points: set[StatusPoint] = set()
        for pt in entry.get("status_points", []):
            try:
                points.add(StatusPoint(pt))
            except (ValueError, TypeError):
                diags.append(_json_error(f"unknown status point {pt!r}", f"class={cname}"))
        draft.classes.append(
            (
                ClassDef(
                    cname,
                    dynamic=bool(entry.get("dynamic", False)),
                    status_points=frozenset(points),
                ),
                None,  # type: ignore[arg-type]
            )
        )

    processes = need(doc, "processes", "document") or []
    if not isinstance(processes, list):
        diags.append(_json_error("'processes' must be an array"))
        processes = []
    for entry in processes:
        pname = need(entry, "name", "processes")
        if not isinstance(pname, str):
            continue
        proc = _ProcessItem(name=pname, span=None)  # type: ignore[arg-type]
        for key, target in (
            ("owners", proc.owners),
            ("responsibles", proc.responsibles),
            ("inputs", proc.inputs),
            ("outputs", proc.outputs),
        ):
            for v in entry.get(key, []):
                if isinstance(v, str):
                    target.append((v, None))  # type: ignore[arg-type]
                else:
                    diags.append(
                        _json_error(f"'{key}' entries must be strings", f"process={pname}")
                    )
        for t in entry.get("transforms", []):
            src = t.get("from") if isinstance(t, dict) else None
            dst = t.get("to") if isinstance(t, dict) else None
            mode = t.get("mode") if isinstance(t, dict) else None
            if not (isinstance(src, str) and isinstance(dst, str)):
                diags.append(
                    _json_error("transform needs 'from' and 'to' strings", f"process={pname}")
                )
                continue
            try:
                tmode = TransformMode(mode)
            except ValueError:
                diags.append(
                    _json_error(
                        f"transform mode must be 'remaining' or 'leaving', got {mode!r}",
                        f"process={pname}",
                    )
                )
                continue
            proc.transforms.append((src, dst, tmode, None))  # type: ignore[arg-type]
        draft.processes.append(proc)

    grants = need(doc, "grants", "document") or []
    if not isinstance(grants, list):
        diags.append(_json_error("'grants' must be an array"))
        grants = []
    for entry in grants:
        role = need(entry, "role", "grants")
        cname = need(entry, "class", "grants")
        if not (isinstance(role, str) and isinstance(cname, str)):
            continue
        privs: set[Privilege] = set()
        bad = False
        for pv in entry.get("privileges", []):
            try:
                privs.add(Privilege(pv))
            except (ValueError, TypeError):
                diags.append(
                    _json_error(f"unknown privilege {pv!r}", f"grant role={role} class={cname}")
                )
                bad = True
        if not bad:
            draft.grants.append((role, cname, frozenset(privs), None))  # type: ignore[arg-type]

    if diags:
        return ParseResult(None, diags)
    model, semantic = _resolve(draft, file_label)
    diags.extend(semantic)
    if has_errors(diags):
        model = None
    return ParseResult(model=model, diagnostics=diags)
