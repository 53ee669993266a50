"""Parser for ``.tk`` files describing finite groups and a lattice action.

Grammar (one statement per line, ``#`` starts a comment, newlines inside
brackets are ignored)::

    spec      := stmt*
    stmt      := groupdef | actiondef | setting
    groupdef  := "group" NAME "=" ("cyclic(" INT ")" | "table(" rows ")")
    rows      := row ("," row)*
    row       := "[" INT ("," INT)* "]"
    actiondef := "action" NAME "=" ( "free_product(" NAME ("," NAME)* ")"
                 | "amalgam(" NAME "," NAME "," "over" "=" NAME ","
                   "embed1" "=" intmap "," "embed2" "=" intmap ")" )
    setting   := "set" ("tree_model" "=" ("edge" | "star") | "k" "=" INT)
    intmap    := "[" INT "->" INT ("," INT "->" INT)* "]"
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .exceptions import GroupError, HypothesisError, TreeckError
from .groups import Embedding, check_embedding, from_table, make_cyclic
from .tree import Amalgam, EdgeFreeProduct, StarFreeProduct


@dataclass(frozen=True)
class Location:
    line: int
    column: int
    offset: int

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "lexical" | "syntax" | "semantic"
    message: str
    location: Location
    expected: tuple = ()

    def format(self, filename: str = "<input>") -> str:
        text = f"{filename}:{self.location}: {self.kind} error: {self.message}"
        if self.expected:
            text += " (expected " + ", ".join(self.expected) + ")"
        return text

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "line": self.location.line,
                "column": self.location.column, "expected": list(self.expected)}


class SpecError(TreeckError):
    """One or more diagnostics for a ``.tk`` source."""

    def __init__(self, diagnostics, filename="<input>"):
        self.diagnostics = list(diagnostics)
        self.filename = filename
        super().__init__("\n".join(d.format(filename) for d in self.diagnostics))


@dataclass(frozen=True)
class SpecSource:
    text: str
    filename: str = "<input>"

    @classmethod
    def from_bytes(cls, data: bytes, filename: str = "<input>") -> "SpecSource":
        try:
            return cls(data.decode("utf-8"), filename)
        except UnicodeDecodeError as exc:
            head = data[:exc.start].decode("utf-8", errors="replace")
            line = head.count("\n") + 1
            col = len(head) - (head.rfind("\n") + 1) + 1
            diag = Diagnostic("lexical", f"invalid UTF-8 byte 0x{data[exc.start]:02x}",
                              Location(line, col, len(head)))
            raise SpecError([diag], filename) from None


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicDef:
    order: int
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class TableDef:
    rows: tuple
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class GroupDef:
    name: str
    body: Union[CyclicDef, TableDef]
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class NameRef:
    name: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class FreeProductDef:
    factors: tuple


@dataclass(frozen=True)
class AmalgamDef:
    left: NameRef
    right: NameRef
    over: NameRef
    embed1: tuple
    embed2: tuple
    embed1_loc: Optional[Location] = field(default=None, compare=False)
    embed2_loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class ActionDef:
    name: str
    body: Union[FreeProductDef, AmalgamDef]
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class Setting:
    key: str
    value: Union[str, int]
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class SpecAst:
    groups: tuple
    action: ActionDef
    settings: tuple = ()

    def group(self, name: str) -> GroupDef:
        return next(g for g in self.groups if g.name == name)

    def setting(self, key: str, default=None):
        for s in self.settings:
            if s.key == key:
                return s.value
        return default


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<arrow>->)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\],=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # NAME INT PUNCT NEWLINE EOF
    value: str
    loc: Location

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "NEWLINE":
            return "end of line"
        return repr(self.value)


def _tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    depth = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        loc = Location(line, pos - line_start + 1, pos)
        if m is None:
            raise SpecError([Diagnostic("lexical", f"unexpected character {text[pos]!r}", loc)])
        kind = m.lastgroup
        value = m.group()
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("NEWLINE", value, loc))
            line += 1
            line_start = m.end()
        elif kind == "int":
            tokens.append(Token("INT", value, loc))
        elif kind == "name":
            tokens.append(Token("NAME", value, loc))
        elif kind in ("punct", "arrow"):
            if value in "([":
                depth += 1
            elif value in ")]":
                depth = max(0, depth - 1)
            tokens.append(Token("PUNCT", value, loc))
        pos = m.end()
    # report end of input just past the last real token, so an unclosed
    # bracket is flagged on the line where it was left open
    last = next((t for t in reversed(tokens) if t.kind != "NEWLINE"), None)
    if last is None:
        end = Location(1, 1, 0)
    else:
        end = Location(last.loc.line, last.loc.column + len(last.value),
                       last.loc.offset + len(last.value))
    tokens.append(Token("EOF", "", end))
    return tokens


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, expected):
        tok = self.tok
        exp = tuple(sorted(expected))
        raise SpecError([Diagnostic("syntax", f"unexpected {tok.describe()}", tok.loc, exp)])

    def punct(self, value) -> Token:
        if self.tok.kind == "PUNCT" and self.tok.value == value:
            tok = self.tok
            self.i += 1
            return tok
        self.fail([repr(value)])

    def keyword(self, *values) -> Token:
        if self.tok.kind == "NAME" and self.tok.value in values:
            tok = self.tok
            self.i += 1
            return tok
        self.fail([repr(v) for v in values])

    def name(self) -> Token:
        if self.tok.kind == "NAME":
            tok = self.tok
            self.i += 1
            return tok
        self.fail(["name"])

    def integer(self) -> Token:
        if self.tok.kind == "INT":
            tok = self.tok
            self.i += 1
            return tok
        self.fail(["integer"])

    def end_of_statement(self):
        if self.tok.kind == "NEWLINE":
            self.i += 1
        elif self.tok.kind != "EOF":
            self.fail(["end of line"])

    def statements(self):
        out = []
        while True:
            while self.tok.kind == "NEWLINE":
                self.i += 1
            if self.tok.kind == "EOF":
                return out
            if self.tok.kind == "NAME" and self.tok.value == "group":
                out.append(self.groupdef())
            elif self.tok.kind == "NAME" and self.tok.value == "action":
                out.append(self.actiondef())
            elif self.tok.kind == "NAME" and self.tok.value == "set":
                out.append(self.setting())
            else:
                self.fail(["'action'", "'group'", "'set'"])
            self.end_of_statement()

    def groupdef(self) -> GroupDef:
        start = self.keyword("group")
        name = self.name()
        self.punct("=")
        kind = self.keyword("cyclic", "table")
        self.punct("(")
        if kind.value == "cyclic":
            n = self.integer()
            self.punct(")")
            body = CyclicDef(int(n.value), n.loc)
        else:
            rows = [self.row()]
            while self.tok.kind == "PUNCT" and self.tok.value == ",":
                self.i += 1
                rows.append(self.row())
            self.punct(")")
            body = TableDef(tuple(rows), kind.loc)
        return GroupDef(name.value, body, start.loc)

    def row(self) -> tuple:
        self.punct("[")
        vals = [int(self.integer().value)]
        while self.tok.kind == "PUNCT" and self.tok.value == ",":
            self.i += 1
            vals.append(int(self.integer().value))
        self.punct("]")
        return tuple(vals)

    def intmap(self):
        start = self.punct("[")
        pairs = []
        while True:
            a = int(self.integer().value)
            self.punct("->")
            b = int(self.integer().value)
            pairs.append((a, b))
            if self.tok.kind == "PUNCT" and self.tok.value == ",":
                self.i += 1
                continue
            break
        self.punct("]")
        return tuple(pairs), start.loc

    def ref(self) -> NameRef:
        tok = self.name()
        return NameRef(tok.value, tok.loc)

    def actiondef(self) -> ActionDef:
        start = self.keyword("action")
        name = self.name()
        self.punct("=")
        kind = self.keyword("free_product", "amalgam")
        self.punct("(")
        if kind.value == "free_product":
            refs = [self.ref()]
            while self.tok.kind == "PUNCT" and self.tok.value == ",":
                self.i += 1
                refs.append(self.ref())
            self.punct(")")
            body = FreeProductDef(tuple(refs))
        else:
            left = self.ref()
            self.punct(",")
            right = self.ref()
            self.punct(",")
            self.keyword("over")
            self.punct("=")
            over = self.ref()
            self.punct(",")
            self.keyword("embed1")
            self.punct("=")
            e1, l1 = self.intmap()
            self.punct(",")
            self.keyword("embed2")
            self.punct("=")
            e2, l2 = self.intmap()
            self.punct(")")
            body = AmalgamDef(left, right, over, e1, e2, l1, l2)
        return ActionDef(name.value, body, start.loc)

    def setting(self) -> Setting:
        start = self.keyword("set")
        key = self.keyword("tree_model", "k")
        self.punct("=")
        if key.value == "tree_model":
            value = self.keyword("edge", "star").value
        else:
            value = int(self.integer().value)
        return Setting(key.value, value, start.loc)


def parse_spec(src) -> SpecAst:
    """Parse and resolve a ``.tk`` source.

    ``src`` may be a :class:`SpecSource`, ``str`` or ``bytes``.

    Raises
    ------
    SpecError
        Lexical and syntax errors stop at the first problem; semantic errors
        (undefined or duplicate names, arity, missing action) are collected.
    """
    if isinstance(src, bytes):
        src = SpecSource.from_bytes(src)
    elif isinstance(src, str):
        src = SpecSource(src)
    try:
        stmts = _Parser(_tokenize(src.text)).statements()
    except SpecError as exc:
        raise SpecError(exc.diagnostics, src.filename) from None

    diags = []
    groups, actions, settings = {}, [], {}
    for st in stmts:
        if isinstance(st, GroupDef):
            if st.name in groups:
                diags.append(Diagnostic("semantic", f"duplicate definition of group {st.name!r}",
                                        st.loc))
            else:
                groups[st.name] = st
        elif isinstance(st, ActionDef):
            actions.append(st)
        else:
            if st.key in settings:
                diags.append(Diagnostic("semantic", f"setting {st.key!r} given twice", st.loc))
            settings[st.key] = st

    def resolve(ref: NameRef, used_at: Location):
        if ref.name not in groups:
            diags.append(Diagnostic("semantic", f"undefined name {ref.name!r}", ref.loc))
        elif groups[ref.name].loc.offset > used_at.offset:
            diags.append(Diagnostic("semantic", f"group {ref.name!r} used before its definition",
                                    ref.loc))

    if not actions:
        end = Location(src.text.count("\n") + 1, 1, len(src.text))
        diags.append(Diagnostic("semantic", "no action defined", end))
    for extra in actions[1:]:
        diags.append(Diagnostic("semantic", f"more than one action (extra action {extra.name!r})",
                                extra.loc))
    for act in actions[:1]:
        body = act.body
        if isinstance(body, FreeProductDef):
            for ref in body.factors:
                resolve(ref, act.loc)
            if len(body.factors) < 2:
                diags.append(Diagnostic(
                    "semantic", f"free_product needs at least 2 factors, got {len(body.factors)}",
                    act.loc))
        else:
            for ref in (body.left, body.right, body.over):
                resolve(ref, act.loc)
    if diags:
        diags.sort(key=lambda d: d.location.offset)
        raise SpecError(diags, src.filename)
    return SpecAst(tuple(groups.values()), actions[0],
                   tuple(settings[k] for k in sorted(settings)))


def format_spec(ast: SpecAst) -> str:
    """Render an AST back to source text; ``parse_spec(format_spec(a)) == a``."""
    lines = []
    for g in ast.groups:
        if isinstance(g.body, CyclicDef):
            lines.append(f"group {g.name} = cyclic({g.body.order})")
        else:
            rows = ", ".join("[" + ", ".join(map(str, r)) + "]" for r in g.body.rows)
            lines.append(f"group {g.name} = table({rows})")
    for s in ast.settings:
        lines.append(f"set {s.key} = {s.value}")
    body = ast.action.body
    if isinstance(body, FreeProductDef):
        args = ", ".join(r.name for r in body.factors)
        lines.append(f"action {ast.action.name} = free_product({args})")
    else:
        def fmt(pairs):
            return "[" + ", ".join(f"{a} -> {b}" for a, b in pairs) + "]"
        lines.append(f"action {ast.action.name} = amalgam({body.left.name}, {body.right.name}, "
                     f"over={body.over.name}, embed1={fmt(body.embed1)}, embed2={fmt(body.embed2)})")
    return "\n".join(lines) + "\n"


# -- lowering ----------------------------------------------------------------

@dataclass(frozen=True)
class Settings:
    tree_model: Optional[str] = None
    k: Optional[int] = None


def _group_value(gdef: GroupDef, filename: str):
    try:
        if isinstance(gdef.body, CyclicDef):
            return make_cyclic(gdef.body.order)
        return from_table(gdef.body.rows)
    except GroupError as exc:
        loc = gdef.body.loc or gdef.loc
        raise SpecError([Diagnostic("semantic", f"group {gdef.name!r}: {exc}", loc)],
                        filename) from None


def _embedding(pairs, sub, target, where: str, loc, filename) -> Embedding:
    image = {}
    for a, b in pairs:
        if a in image:
            raise SpecError([Diagnostic("semantic", f"{where}: element {a} mapped twice", loc)],
                            filename)
        image[a] = b
    if set(image) != set(range(sub.order)):
        missing = sorted(set(range(sub.order)) - set(image))
        extra = sorted(set(image) - set(range(sub.order)))
        msg = f"{where}: map must cover the elements 0..{sub.order - 1} of the subgroup"
        if missing:
            msg += f"; missing {missing}"
        if extra:
            msg += f"; unknown {extra}"
        raise SpecError([Diagnostic("semantic", msg, loc)], filename)
    try:
        return check_embedding(Embedding(sub, target, tuple(image[h] for h in range(sub.order))))
    except GroupError as exc:
        raise SpecError([Diagnostic("semantic", f"{where}: {exc}", loc)], filename) from None


def lower_to_action(ast: SpecAst, tree_model: Optional[str] = None, k: Optional[int] = None,
                    filename: str = "<input>"):
    """Build the lattice action described by ``ast``.

    ``tree_model`` and ``k`` override the file's ``set`` statements.

    Returns
    -------
    (LatticeAction, Settings)
    """
    model = tree_model or ast.setting("tree_model")
    kval = k if k is not None else ast.setting("k")
    cache = {}

    def group(ref: NameRef):
        if ref.name not in cache:
            cache[ref.name] = _group_value(ast.group(ref.name), filename)
        return cache[ref.name]

    act = ast.action
    body = act.body
    if isinstance(body, FreeProductDef):
        factors = tuple(group(r) for r in body.factors)
        chosen = model or ("edge" if len(factors) == 2 else "star")
        if chosen == "edge":
            if len(factors) != 2:
                raise SpecError([Diagnostic(
                    "semantic", f"tree_model = edge needs exactly 2 factors, got {len(factors)}",
                    act.loc)], filename)
            action = EdgeFreeProduct(factors)
        else:
            action = StarFreeProduct(factors)
    else:
        if model == "star":
            raise SpecError([Diagnostic("semantic", "tree_model = star applies to free products only",
                                        act.loc)], filename)
        left, right, sub = group(body.left), group(body.right), group(body.over)
        e1 = _embedding(body.embed1, sub, left, "embed1", body.embed1_loc, filename)
        e2 = _embedding(body.embed2, sub, right, "embed2", body.embed2_loc, filename)
        action = Amalgam(left, right, sub, e1, e2)
        chosen = "edge"
    if kval is not None and kval < 1:
        raise SpecError([Diagnostic("semantic", "k must be at least 1", act.loc)], filename)
    return action, Settings(chosen, kval)


def load_spec(src, tree_model=None, k=None):
    """Parse and lower in one step."""
    filename = src.filename if isinstance(src, SpecSource) else "<input>"
    ast = parse_spec(src)
    return lower_to_action(ast, tree_model, k, filename)


__all__ = ["SpecSource", "SpecAst", "SpecError", "Diagnostic", "Settings", "parse_spec",
           "format_spec", "lower_to_action", "load_spec", "HypothesisError"]
