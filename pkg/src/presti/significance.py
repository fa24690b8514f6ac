"""Classify Java source changes into low/medium/high/crucial significance counts.

A lightweight structural grammar (types, fields, method signatures, statements)
feeds a tree diff whose edit operations map onto a fixed significance table:

    StmtInsert, StmtDelete                          -> Low
    StmtUpdate, ConditionChange, FieldAdd           -> Medium
    MethodAdd, MethodSignatureChange, MethodRemove,
    FieldRemove, FieldTypeChange                    -> High
    TypeDeclChange, TypeAdd, TypeRemove             -> Crucial

Body-level edits never rank above Medium; declaration-level edits never rank Low.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .miner import STATUS_ADDED, STATUS_DELETED, CommitRecord

logger = logging.getLogger(__name__)

LOW = "Low"
MEDIUM = "Medium"
HIGH = "High"
CRUCIAL = "Crucial"

SIGNIFICANCE_OF = {
    "StmtInsert": LOW,
    "StmtDelete": LOW,
    "StmtUpdate": MEDIUM,
    "ConditionChange": MEDIUM,
    "FieldAdd": MEDIUM,
    "MethodAdd": HIGH,
    "MethodSignatureChange": HIGH,
    "MethodRemove": HIGH,
    "FieldRemove": HIGH,
    "FieldTypeChange": HIGH,
    "TypeDeclChange": CRUCIAL,
    "TypeAdd": CRUCIAL,
    "TypeRemove": CRUCIAL,
}

_MODIFIERS = {
    "public", "protected", "private", "static", "final", "abstract",
    "synchronized", "native", "transient", "volatile", "strictfp",
    "default", "sealed", "non-sealed",
}

_TYPE_DECL_RE = re.compile(
    r"^(?P<mods>(?:[\w$-]+\s+)*?)(?P<kind>class|interface|enum)\s+(?P<name>[A-Za-z_$][\w$]*)(?P<rest>.*)$",
    re.DOTALL,
)

_STATEMENT_KIND = (
    ("if", "If"), ("else", "If"),
    ("for", "Loop"), ("while", "Loop"), ("do", "Loop"),
    ("try", "Try"), ("catch", "Try"), ("finally", "Try"),
    ("return", "Return"),
    ("throw", "Throw"),
)


@dataclass
class StatementNode:
    normalized_text: str
    kind: str = "Plain"


@dataclass
class FieldDecl:
    name: str
    type_text: str
    modifiers: tuple[str, ...] = ()


@dataclass
class MethodDecl:
    name: str
    param_types: tuple[str, ...]
    return_type: str
    modifiers: tuple[str, ...] = ()
    body: list[StatementNode] = field(default_factory=list)

    @property
    def arity(self) -> int:
        return len(self.param_types)


@dataclass
class TypeDecl:
    kind: str  # class | interface | enum
    name: str
    modifiers: tuple[str, ...] = ()
    supertypes: tuple[str, ...] = ()
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)


@dataclass
class StructureTree:
    type_decls: list[TypeDecl] = field(default_factory=list)
    degraded: bool = False


@dataclass
class EditOp:
    kind: str
    subject: str = ""

    @property
    def significance(self) -> str:
        return SIGNIFICANCE_OF[self.kind]


@dataclass
class SignificanceProfile:
    lcc: int = 0
    mcc: int = 0
    hcc: int = 0
    ccc: int = 0

    @property
    def total(self) -> int:
        return self.lcc + self.mcc + self.hcc + self.ccc

    def as_dict(self) -> dict[str, int]:
        return {"lcc": self.lcc, "mcc": self.mcc, "hcc": self.hcc, "ccc": self.ccc}


# --- source masking -------------------------------------------------------


def _mask(source: str) -> str:
    """Blank out comments and the contents of string/char literals."""
    out = list(source)
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        elif ch == "/" and i + 1 < n and source[i + 1] == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (source[i] == "*" and i + 1 < n and source[i + 1] == "/"):
                if source[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = out[i + 1] = " "
                i += 2
        elif ch in "\"'":
            quote = ch
            i += 1
            while i < n and source[i] != quote:
                if source[i] == "\\" and i + 1 < n:
                    out[i] = out[i + 1] = " "
                    i += 2
                    continue
                if source[i] != "\n":
                    out[i] = " "
                i += 1
            i += 1
        else:
            i += 1
    return "".join(out)


def _strip_annotations(text: str) -> str:
    """Remove @Name and @Name(...) constructs, including brace-array arguments."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text[i] == "@":
            i += 1
            while i < n and (text[i].isalnum() or text[i] in "._$"):
                i += 1
            while i < n and text[i].isspace():
                i += 1
            if i < n and text[i] == "(":
                depth = 0
                while i < n:
                    if text[i] in "({":
                        depth += 1
                    elif text[i] in ")}":
                        depth -= 1
                        if depth == 0:
                            i += 1
                            break
                    i += 1
            out.append(" ")
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _strip_generics(text: str) -> str:
    """Drop <...> sections (best-effort, depth-matched)."""
    out = []
    depth = 0
    for ch in text:
        if ch == "<":
            depth += 1
        elif ch == ">" and depth > 0:
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


# --- chunk scanning -------------------------------------------------------


class _Scanner:
    """Splits masked text into (header, block-or-None) chunks at one nesting level."""

    def __init__(self) -> None:
        self.degraded = False

    def chunks(self, text: str) -> list[tuple[str, str | None]]:
        result: list[tuple[str, str | None]] = []
        buf: list[str] = []
        i = 0
        n = len(text)
        parens = 0
        while i < n:
            ch = text[i]
            if ch == "(":
                parens += 1
            elif ch == ")":
                parens = max(0, parens - 1)
            if parens > 0:
                # `for (a; b; c)` separators and lambda bodies stay in one chunk
                buf.append(ch)
                i += 1
                continue
            if ch == ";":
                result.append(("".join(buf), None))
                buf = []
                i += 1
            elif ch == "{":
                block, end = self._block(text, i)
                result.append(("".join(buf), block))
                buf = []
                i = end
            elif ch == "}":
                self.degraded = True
                i += 1
            else:
                buf.append(ch)
                i += 1
        if _normalize("".join(buf)):
            result.append(("".join(buf), None))
            self.degraded = True  # trailing text without terminator
        return result

    def _block(self, text: str, open_idx: int) -> tuple[str, int]:
        depth = 0
        for j in range(open_idx, len(text)):
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
                if depth == 0:
                    return text[open_idx + 1 : j], j + 1
        self.degraded = True
        return text[open_idx + 1 :], len(text)


def _statement_kind(text: str) -> str:
    first = text.split(None, 1)[0] if text.split() else ""
    first = first.split("(")[0]
    for keyword, kind in _STATEMENT_KIND:
        if first == keyword:
            return kind
    return "Plain"


def _scan_statements(text: str, scanner: _Scanner) -> list[StatementNode]:
    stmts: list[StatementNode] = []
    for header, block in scanner.chunks(text):
        head = _normalize(header)
        if block is None:
            if head:
                stmts.append(StatementNode(head + ";", _statement_kind(head)))
            continue
        if head:
            stmts.append(StatementNode(head, _statement_kind(head)))
        stmts.extend(_scan_statements(block, scanner))
    return stmts


def _split_top_level(text: str, sep: str) -> list[str]:
    parts: list[str] = []
    depth = 0
    buf: list[str] = []
    for ch in text:
        if ch in "(<[":
            depth += 1
        elif ch in ")>]":
            depth = max(0, depth - 1)
        if ch == sep and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def _split_modifiers(tokens: list[str]) -> tuple[tuple[str, ...], list[str]]:
    mods = []
    rest = list(tokens)
    while rest and rest[0] in _MODIFIERS:
        mods.append(rest.pop(0))
    return tuple(sorted(mods)), rest


def _parse_params(params_text: str) -> tuple[str, ...]:
    params_text = params_text.strip()
    if not params_text:
        return ()
    types = []
    for part in _split_top_level(params_text, ","):
        tokens = [t for t in _normalize(part).split() if t != "final"]
        if not tokens:
            continue
        if len(tokens) == 1:
            types.append(tokens[0])
        else:
            # trailing token is the parameter name; array suffix stays on the type
            name = tokens[-1]
            type_text = " ".join(tokens[:-1])
            if name.endswith("[]"):
                type_text += "[]"
            types.append(type_text)
    return tuple(types)


def _parse_method(header: str, block: str | None, scanner: _Scanner) -> MethodDecl | None:
    paren = header.find("(")
    if paren < 0:
        return None
    close = header.rfind(")")
    if close < paren:
        return None
    before = _normalize(header[:paren])
    params = _parse_params(header[paren + 1 : close])
    tokens = before.split()
    if not tokens:
        return None
    name = tokens[-1]
    mods, rest = _split_modifiers(tokens[:-1])
    return_type = _normalize(_strip_generics(" ".join(rest)))
    body = _scan_statements(block, scanner) if block is not None else []
    return MethodDecl(
        name=name,
        param_types=params,
        return_type=return_type,
        modifiers=mods,
        body=body,
    )


def _parse_fields(header: str) -> list[FieldDecl]:
    eq = _split_top_level(header, "=")[0]
    tokens = _normalize(eq).split()
    mods, rest = _split_modifiers(tokens)
    if len(rest) < 2:
        return []
    declarator = rest[-1].rstrip("[]")
    type_text = " ".join(rest[:-1])
    fields = [FieldDecl(name=declarator, type_text=type_text, modifiers=mods)]
    # extra declarators after commas: `int a = 1, b = 2;`
    for part in _split_top_level(header, ",")[1:]:
        name = _normalize(_split_top_level(part, "=")[0]).split()
        if name:
            fields.append(FieldDecl(name=name[-1].rstrip("[]"), type_text=type_text, modifiers=mods))
    return fields


def _parse_supertypes(rest: str) -> tuple[str, ...]:
    cleaned = _strip_generics(rest)
    names = []
    for keyword in ("extends", "implements"):
        for m in re.finditer(rf"\b{keyword}\b([^{{]*?)(?=\bimplements\b|\bextends\b|$)", cleaned):
            for part in m.group(1).split(","):
                ident = part.strip().split()
                if ident:
                    names.append(ident[0])
    return tuple(names)


def _parse_type(header: str, block: str, scanner: _Scanner, prefix: str, out: list[TypeDecl]) -> None:
    m = _TYPE_DECL_RE.match(_normalize(header))
    if not m:
        return
    mod_tokens = [t for t in m.group("mods").split() if t in _MODIFIERS]
    name = prefix + m.group("name")
    decl = TypeDecl(
        kind=m.group("kind"),
        name=name,
        modifiers=tuple(sorted(mod_tokens)),
        supertypes=_parse_supertypes(m.group("rest")),
    )
    out.append(decl)
    for chunk_header, chunk_block in scanner.chunks(block):
        head = _normalize(chunk_header)
        if not head and chunk_block is not None:
            continue  # instance initializer
        if head in ("static", ""):
            continue
        tm = _TYPE_DECL_RE.match(head)
        if tm and chunk_block is not None:
            _parse_type(head, chunk_block, scanner, name + ".", out)
            continue
        paren = head.find("(")
        eq = head.find("=")
        if paren >= 0 and (eq < 0 or paren < eq):
            method = _parse_method(head, chunk_block, scanner)
            if method is not None:
                decl.methods.append(method)
            continue
        if eq >= 0 or chunk_block is None:
            # plain fields, or fields with array-initializer blocks
            decl.fields.extend(_parse_fields(head))


def parse_structure(source: str) -> StructureTree:
    """Best-effort structural parse of Java source."""
    masked = _strip_annotations(_mask(source))
    scanner = _Scanner()
    tree = StructureTree()
    for header, block in scanner.chunks(masked):
        if block is None:
            continue  # package/import/stray declarations
        _parse_type(header, block, scanner, "", tree.type_decls)
    tree.degraded = scanner.degraded
    return tree


# --- structural diff ------------------------------------------------------


def _lcs_opcodes(a: list[str], b: list[str]) -> list[tuple[str, int, int]]:
    """Longest-common-subsequence opcodes: (op, i, j) with op in {equal, delete, insert}."""
    n, m = len(a), len(b)
    lengths = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = lengths[i]
        nxt = lengths[i + 1]
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = max(nxt[j], row[j + 1])
    ops: list[tuple[str, int, int]] = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            ops.append(("equal", i, j))
            i += 1
            j += 1
        elif lengths[i + 1][j] >= lengths[i][j + 1]:
            ops.append(("delete", i, j))
            i += 1
        else:
            ops.append(("insert", i, j))
            j += 1
    while i < n:
        ops.append(("delete", i, j))
        i += 1
    while j < m:
        ops.append(("insert", i, j))
        j += 1
    return ops


_CONDITIONAL_KINDS = {"If", "Loop"}


def _diff_bodies(old: list[StatementNode], new: list[StatementNode], subject: str) -> list[EditOp]:
    ops = _lcs_opcodes([s.normalized_text for s in old], [s.normalized_text for s in new])
    result: list[EditOp] = []
    idx = 0
    while idx < len(ops):
        op = ops[idx][0]
        if op == "equal":
            idx += 1
            continue
        deletes: list[StatementNode] = []
        inserts: list[StatementNode] = []
        while idx < len(ops) and ops[idx][0] != "equal":
            kind, i, j = ops[idx]
            if kind == "delete":
                deletes.append(old[i])
            else:
                inserts.append(new[j])
            idx += 1
        paired = min(len(deletes), len(inserts))
        for k in range(paired):
            if deletes[k].kind in _CONDITIONAL_KINDS and inserts[k].kind in _CONDITIONAL_KINDS:
                result.append(EditOp("ConditionChange", subject))
            else:
                result.append(EditOp("StmtUpdate", subject))
        for stmt in deletes[paired:]:
            result.append(EditOp("StmtDelete", f"{subject}: {stmt.normalized_text}"))
        for stmt in inserts[paired:]:
            result.append(EditOp("StmtInsert", f"{subject}: {stmt.normalized_text}"))
    return result


def _type_member_ops(decl: TypeDecl, op_suffix: str) -> list[EditOp]:
    ops = [EditOp(f"Type{op_suffix}", decl.name)]
    for method in decl.methods:
        ops.append(EditOp(f"Method{op_suffix}", f"{decl.name}.{method.name}/{method.arity}"))
    for fld in decl.fields:
        ops.append(EditOp(f"Field{op_suffix}", f"{decl.name}.{fld.name}"))
    return ops


def _match_methods(
    old: list[MethodDecl], new: list[MethodDecl]
) -> tuple[list[tuple[MethodDecl, MethodDecl]], list[MethodDecl], list[MethodDecl]]:
    pairs: list[tuple[MethodDecl, MethodDecl]] = []
    remaining_new = list(new)
    unmatched_old: list[MethodDecl] = []

    def take(predicate) -> MethodDecl | None:
        for idx, cand in enumerate(remaining_new):
            if predicate(cand):
                return remaining_new.pop(idx)
        return None

    # pass 1: exact signature
    for m_old in old:
        hit = take(lambda m: m.name == m_old.name and m.param_types == m_old.param_types)
        if hit is not None:
            pairs.append((m_old, hit))
        else:
            unmatched_old.append(m_old)
    # pass 2: same name and arity, in declaration order
    still_old: list[MethodDecl] = []
    for m_old in unmatched_old:
        hit = take(lambda m: m.name == m_old.name and m.arity == m_old.arity)
        if hit is not None:
            pairs.append((m_old, hit))
        else:
            still_old.append(m_old)
    return pairs, still_old, remaining_new


def diff_structures(old: StructureTree, new: StructureTree) -> list[EditOp]:
    """Edit operations turning `old` into `new`."""
    ops: list[EditOp] = []
    old_types = {t.name: t for t in old.type_decls}
    new_types = {t.name: t for t in new.type_decls}
    for name, t_old in old_types.items():
        if name not in new_types:
            ops.extend(_type_member_ops(t_old, "Remove"))
    for name, t_new in new_types.items():
        if name not in old_types:
            ops.extend(_type_member_ops(t_new, "Add"))
            continue
        t_old = old_types[name]
        if (
            t_old.kind != t_new.kind
            or t_old.modifiers != t_new.modifiers
            or t_old.supertypes != t_new.supertypes
        ):
            ops.append(EditOp("TypeDeclChange", name))
        old_fields = {f.name: f for f in t_old.fields}
        new_fields = {f.name: f for f in t_new.fields}
        for fname, f_old in old_fields.items():
            if fname not in new_fields:
                ops.append(EditOp("FieldRemove", f"{name}.{fname}"))
            else:
                f_new = new_fields[fname]
                if f_old.type_text != f_new.type_text or f_old.modifiers != f_new.modifiers:
                    ops.append(EditOp("FieldTypeChange", f"{name}.{fname}"))
        for fname in new_fields:
            if fname not in old_fields:
                ops.append(EditOp("FieldAdd", f"{name}.{fname}"))
        pairs, removed, added = _match_methods(t_old.methods, t_new.methods)
        for method in removed:
            ops.append(EditOp("MethodRemove", f"{name}.{method.name}/{method.arity}"))
        for method in added:
            ops.append(EditOp("MethodAdd", f"{name}.{method.name}/{method.arity}"))
        for m_old, m_new in pairs:
            subject = f"{name}.{m_new.name}/{m_new.arity}"
            if (
                m_old.param_types != m_new.param_types
                or m_old.return_type != m_new.return_type
                or m_old.modifiers != m_new.modifiers
            ):
                ops.append(EditOp("MethodSignatureChange", subject))
            ops.extend(_diff_bodies(m_old.body, m_new.body, subject))
    return ops


def classify_significance(ops: list[EditOp]) -> SignificanceProfile:
    """Count edit operations per significance level."""
    profile = SignificanceProfile()
    for op in ops:
        level = op.significance
        if level == LOW:
            profile.lcc += 1
        elif level == MEDIUM:
            profile.mcc += 1
        elif level == HIGH:
            profile.hcc += 1
        else:
            profile.ccc += 1
    return profile


def profile_commit(record: CommitRecord) -> SignificanceProfile:
    """Aggregate significance over a commit's Java file diffs."""
    total = SignificanceProfile()
    for diff in record.files:
        if not diff.is_java:
            continue
        if diff.status == STATUS_ADDED:
            old_src, new_src = "", diff.new_text
        elif diff.status == STATUS_DELETED:
            old_src, new_src = diff.old_text, ""
        else:
            old_src, new_src = diff.old_text, diff.new_text
        if old_src is None or new_src is None:
            continue  # binary or unreadable blob
        old_tree = parse_structure(old_src)
        new_tree = parse_structure(new_src)
        if old_tree.degraded or new_tree.degraded:
            logger.warning(
                "degraded parse for %s in %s; file skipped", diff.path, record.sha[:10]
            )
            continue
        part = classify_significance(diff_structures(old_tree, new_tree))
        total.lcc += part.lcc
        total.mcc += part.mcc
        total.hcc += part.hcc
        total.ccc += part.ccc
    return total
