"""Plain-text formats for AFSs and ordering-constraint problems.

An AFS file has ``SORTS``, ``SIG``, ``VARS`` and ``RULES`` sections::

    SORTS nat natlist
    SIG
      nil    : natlist
      cons   : [nat * natlist] => natlist
    VARS
      h : nat    t : natlist
    RULES
      append(nil, t) -> t

A constraint problem additionally has a ``SETTING`` line and a ``CONSTRAINTS``
section whose lines use ``>`` (strict), ``>=`` (weak) or ``>?`` (weak, and
strict for at least one such constraint).  In the dynamic setting, ``SIG`` may
declare subterm constants as ``!c : type``.

Application is juxtaposition; abstractions are written ``\\x:type. body``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .core import (
    AFS,
    Abs,
    App,
    Arrow,
    ArityMismatch,
    Base,
    BVar,
    FunApp,
    Rule,
    Setting,
    Signature,
    SimpleType,
    Term,
    TermError,
    TypeDeclaration,
    TypeMismatch,
    UnknownVariable,
    Var,
    ValidationReport,
    check_rule,
    free_vars,
    show_term,
    symbols_of,
    validate,
)


class ParseError(ValueError):
    """A located syntax or well-formedness error in an input file."""

    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        super().__init__(f"{line}:{col}: {message}")


class InvalidSystem(ParseError):
    """The input parsed but violates the rule invariants; ``report`` lists them all."""

    def __init__(self, report: ValidationReport, line: int, col: int = 1):
        self.report = report
        reasons = "; ".join(str(v) for v in report.violations)
        super().__init__(f"invalid system: {reasons}", line, col)


class SettingMismatch(ParseError):
    pass


class ConstraintKind(enum.Enum):
    STRICT = ">"
    WEAK = ">="
    ORIENTED = ">?"


@dataclass(frozen=True)
class OrderingRequirement:
    """One input line ``lhs OP rhs`` of a constraint problem."""

    lhs: Term
    rhs: Term
    kind: ConstraintKind

    def __str__(self) -> str:
        taken = free_vars(self.lhs) | free_vars(self.rhs)
        return f"{show_term(self.lhs, taken)} {self.kind.value} {show_term(self.rhs, taken)}"


@dataclass
class ConstraintProblem:
    signature: Signature
    constraints: list[OrderingRequirement]
    setting: Setting
    variables: dict[str, SimpleType] = field(default_factory=dict)
    subterm_constants: frozenset[str] = frozenset()


# ---------------------------------------------------------------------------
# lexing

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<op>->|=>|>=|>\?|>|→|⇒|≥|[()\[\],:*.\\λ!×])"
    r"|(?P<id>[A-Za-z0-9_][A-Za-z0-9_'#]*)"
)
_ALIASES = {"→": "->", "⇒": "=>", "≥": ">=", "λ": "\\", "×": "*"}


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int
    ident: bool


def _strip_comment(line: str) -> str:
    for m in re.finditer(r"#", line):
        i = m.start()
        if i == 0 or line[i - 1].isspace():
            return line[:i]
    return line


def tokenize(text: str, line: int) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        if m.lastgroup != "ws":
            tok = m.group()
            out.append(Token(_ALIASES.get(tok, tok), line, pos + 1, m.lastgroup == "id"))
        pos = m.end()
    return out


class _Stream:
    def __init__(self, tokens: list[Token], line: int, width: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line
        self.end_col = width + 1

    def peek(self, k: int = 0) -> Token | None:
        i = self.pos + k
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, *texts: str) -> bool:
        t = self.peek()
        return t is not None and not t.ident and t.text in texts

    def where(self) -> tuple[int, int]:
        t = self.peek()
        return (t.line, t.col) if t else (self.line, self.end_col)

    def fail(self, expected: str) -> ParseError:
        t = self.peek()
        got = repr(t.text) if t else "end of line"
        line, col = self.where()
        return ParseError(f"expected {expected}, got {got}", line, col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def ident(self, what: str = "an identifier") -> Token:
        t = self.peek()
        if t is None or not t.ident:
            raise self.fail(what)
        self.pos += 1
        return t

    def done(self) -> bool:
        return self.pos >= len(self.tokens)


# ---------------------------------------------------------------------------
# types


def _parse_type(s: _Stream, sorts: set[str] | None) -> SimpleType:
    if s.at("("):
        s.expect("(")
        left = _parse_type(s, sorts)
        s.expect(")")
    else:
        tok = s.ident("a type")
        if sorts is not None and tok.text not in sorts:
            raise ParseError(f"unknown sort {tok.text}", tok.line, tok.col, "a declared sort")
        left = Base(tok.text)
    if s.at("=>"):
        s.expect("=>")
        return Arrow(left, _parse_type(s, sorts))
    return left


def _parse_declaration(s: _Stream, sorts: set[str] | None) -> TypeDeclaration:
    if s.at("["):
        s.expect("[")
        inputs = [] if s.at("]") else [_parse_type(s, sorts)]
        while s.at("*"):
            s.expect("*")
            inputs.append(_parse_type(s, sorts))
        s.expect("]")
        s.expect("=>")
        return TypeDeclaration(tuple(inputs), _parse_type(s, sorts))
    return TypeDeclaration((), _parse_type(s, sorts))


# ---------------------------------------------------------------------------
# terms (parsed and typed together, so errors are located precisely)

_STOP = {")", ",", "->", ">=", ">?", ">", "]"}


class _TermParser:
    def __init__(self, sig: Signature, env: dict[str, SimpleType], s: _Stream):
        self.sig = sig
        self.env = env
        self.s = s

    def _error(self, err: TermError, tok: Token | tuple[int, int]) -> TermError:
        err.line, err.col = (tok.line, tok.col) if isinstance(tok, Token) else tok
        return err

    def term(self, bound: list[tuple[str, SimpleType]]) -> tuple[Term, SimpleType]:
        if self.s.at("\\"):
            return self.abstraction(bound)
        start = self.s.where()
        head, ty = self.atom(bound)
        while not self.s.done() and not self.s.at(*_STOP):
            arg_pos = self.s.where()
            if self.s.at("\\"):
                arg, aty = self.abstraction(bound)
            else:
                arg, aty = self.atom(bound)
            head = App(head, arg)
            if not isinstance(ty, Arrow):
                raise self._error(TypeMismatch(f"a term of type {ty} is applied but not functional", head), start)
            if ty.left != aty:
                raise self._error(TypeMismatch(f"argument has type {aty}, expected {ty.left}", head), arg_pos)
            ty = ty.right
        return head, ty

    def abstraction(self, bound):
        self.s.expect("\\")
        name = self.s.ident("a binder name").text
        self.s.expect(":")
        bty = _parse_type(self.s, None)
        self.s.expect(".")
        body, rty = self.term(bound + [(name, bty)])
        return Abs(bty, body, hint=name), Arrow(bty, rty)

    def atom(self, bound) -> tuple[Term, SimpleType]:
        s = self.s
        if s.at("("):
            s.expect("(")
            t = self.term(bound)
            s.expect(")")
            return t
        if s.at("!"):
            s.expect("!")
        tok = s.ident("a term")
        name = tok.text
        for depth, (bname, bty) in enumerate(reversed(bound)):
            if bname == name:
                return BVar(depth), bty
        if name in self.sig:
            decl = self.sig[name]
            args: list[Term] = []
            if s.at("(") and decl.arity > 0:
                s.expect("(")
                while True:
                    pos = s.where()
                    a, aty = self.term(bound)
                    i = len(args)
                    if i < decl.arity and aty != decl.inputs[i]:
                        raise self._error(
                            TypeMismatch(f"argument {i + 1} of {name} has type {aty}, expected {decl.inputs[i]}", a),
                            pos,
                        )
                    args.append(a)
                    if s.at(","):
                        s.expect(",")
                        continue
                    break
                s.expect(")")
            term = FunApp(name, tuple(args))
            if len(args) != decl.arity:
                raise self._error(
                    ArityMismatch(f"{name} expects {decl.arity} argument(s), got {len(args)}", term), tok
                )
            return term, decl.output
        if name in self.env:
            return Var(name), self.env[name]
        raise self._error(UnknownVariable(f"unknown variable or symbol {name}", Var(name)), tok)


def _located(err: TermError) -> ParseError:
    out = ParseError(f"{type(err).__name__}: {err.args[0]}", err.line or 0, err.col or 0)
    out.__cause__ = err
    return out


def parse_term(text: str, sig: Signature, env: dict[str, SimpleType], line: int = 1) -> Term:
    """Parse a single term; raises a located ``TermError`` or ``ParseError``."""
    s = _Stream(tokenize(text, line), line, len(text))
    term, _ = _TermParser(sig, env, s).term([])
    if not s.done():
        raise s.fail("end of term")
    return term


# ---------------------------------------------------------------------------
# files

_SECTIONS = ("SORTS", "SIG", "VARS", "RULES", "CONSTRAINTS", "SETTING")


@dataclass
class _Line:
    number: int
    text: str
    tokens: list[Token]


def _sections(text: str) -> dict[str, list[_Line]]:
    out: dict[str, list[_Line]] = {}
    current: str | None = None
    for number, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        words = body.split()
        if words[0] == "SETTING":
            if "SETTING" in out:
                raise ParseError("duplicate section SETTING", number, 1)
            col = body.index("SETTING") + 1
            value = " ".join(words[1:])
            out["SETTING"] = [_Line(number, body, [Token(value, number, col + 8, True)] if value else [])]
            current = None
            continue
        tokens = tokenize(body, number)
        first = tokens[0]
        if first.ident and first.text in _SECTIONS:
            current = first.text
            if current in out:
                raise ParseError(f"duplicate section {current}", number, first.col)
            out[current] = []
            rest = tokens[1:]
            if rest:
                out[current].append(_Line(number, body, rest))
            continue
        if current is None:
            raise ParseError("expected a section header", number, first.col, " or ".join(_SECTIONS))
        out[current].append(_Line(number, body, tokens))
    return out


def _stream(line: _Line) -> _Stream:
    return _Stream(line.tokens, line.number, len(line.text))


def _parse_header(sections: dict[str, list[_Line]]):
    sorts: set[str] | None = None
    if "SORTS" in sections:
        sorts = {t.text for ln in sections["SORTS"] for t in ln.tokens if t.ident}
    symbols: dict[str, TypeDeclaration] = {}
    constants: set[str] = set()
    for ln in sections.get("SIG", []):
        s = _stream(ln)
        while not s.done():
            marked = s.at("!")
            if marked:
                s.expect("!")
            tok = s.ident("a symbol name")
            if tok.text in symbols:
                raise ParseError(f"symbol {tok.text} declared twice", tok.line, tok.col)
            s.expect(":")
            decl = _parse_declaration(s, sorts)
            if marked:
                if decl.arity:
                    raise ParseError("subterm constants take no arguments", tok.line, tok.col)
                constants.add(tok.text)
            symbols[tok.text] = decl
    base = frozenset(sorts) if sorts is not None else frozenset(_bases(symbols.values()))
    sig = Signature(symbols, base)
    env: dict[str, SimpleType] = {}
    for ln in sections.get("VARS", []):
        s = _stream(ln)
        while not s.done():
            tok = s.ident("a variable name")
            if tok.text in symbols:
                raise ParseError(f"{tok.text} is both a symbol and a variable", tok.line, tok.col)
            if tok.text in env:
                raise ParseError(f"variable {tok.text} declared twice", tok.line, tok.col)
            s.expect(":")
            env[tok.text] = _parse_type(s, sorts)
    return sig, env, frozenset(constants)


def _bases(decls) -> set[str]:
    out: set[str] = set()

    def walk(t: SimpleType) -> None:
        if isinstance(t, Arrow):
            walk(t.left)
            walk(t.right)
        else:
            out.add(t.name)

    for d in decls:
        for t in (*d.inputs, d.output):
            walk(t)
    return out


def _parse_pair(ln: _Line, sig, env, ops: tuple[str, ...]) -> tuple[Term, str, Term]:
    s = _stream(ln)
    p = _TermParser(sig, env, s)
    try:
        lhs, _ = p.term([])
        if not s.at(*ops):
            raise s.fail(" or ".join(repr(o) for o in ops))
        op = s.peek().text
        s.pos += 1
        rhs, _ = p.term([])
    except TermError as e:
        raise _located(e) from e
    if not s.done():
        raise s.fail("end of line")
    return lhs, op, rhs


def parse_afs(text: str) -> AFS:
    """Parse and validate an AFS file."""
    sections = _sections(text)
    for bad in ("CONSTRAINTS", "SETTING"):
        if bad in sections:
            line = sections[bad][0].number if sections[bad] else 1
            raise ParseError(f"{bad} belongs in a constraint problem, not an AFS", line, 1)
    sig, env, constants = _parse_header(sections)
    if constants:
        raise SettingMismatch("subterm constants only exist in dynamic-dp constraint problems", 1, 1)
    rules: list[Rule] = []
    lines: list[int] = []
    for ln in sections.get("RULES", []):
        lhs, _, rhs = _parse_pair(ln, sig, env, ("->",))
        rules.append(Rule(lhs, rhs))
        lines.append(ln.number)
    afs = AFS(sig, rules, env)
    report = validate(afs)
    if not report.ok:
        first = report.violations[0]
        line = lines[first.rule_index] if first.rule_index is not None else 1
        raise InvalidSystem(report, line)
    return afs


def parse_constraint_problem(text: str) -> ConstraintProblem:
    sections = _sections(text)
    if not sections.get("SETTING"):
        raise ParseError("expected exactly one SETTING line", 1, 1, "SETTING rule-removal|static-dp|dynamic-dp")
    setting_line = sections["SETTING"][0]
    value = setting_line.tokens[0].text
    try:
        setting = Setting(value)
    except ValueError:
        raise ParseError(
            f"unknown setting {value!r}", setting_line.number, setting_line.tokens[0].col,
            "rule-removal, static-dp or dynamic-dp",
        ) from None
    if "RULES" in sections:
        raise ParseError("constraint problems list CONSTRAINTS, not RULES", sections["RULES"][0].number, 1)
    sig, env, constants = _parse_header(sections)
    if constants and setting is not Setting.DYNAMIC_DP:
        raise SettingMismatch(f"subterm constants are only allowed in dynamic-dp, not {setting}", 1, 1)
    constraints: list[OrderingRequirement] = []
    for ln in sections.get("CONSTRAINTS", []):
        lhs, op, rhs = _parse_pair(ln, sig, env, (">?", ">=", ">"))
        kind = ConstraintKind(op)
        if kind is ConstraintKind.ORIENTED and setting is Setting.RULE_REMOVAL:
            raise SettingMismatch("'>?' constraints only exist in the dependency pair settings", ln.number, 1)
        if symbols_of(lhs) & constants:
            raise SettingMismatch("subterm constants may only occur in right-hand sides", ln.number, 1)
        violations = [
            v for v in check_rule(Rule(lhs, rhs), sig, env, len(constraints))
            if v.kind.value in ("TypeError", "SideTypeMismatch", "FreeVarNotInLhs")
        ]
        if violations:
            raise InvalidSystem(ValidationReport(violations, sig.is_second_order()), ln.number)
        constraints.append(OrderingRequirement(lhs, rhs, kind))
    report = validate(AFS(sig, [], env))
    if not report.ok:
        raise InvalidSystem(report, 1)
    return ConstraintProblem(sig, constraints, setting, env, constants)


def is_constraint_problem(text: str) -> bool:
    """True if the text has a ``SETTING`` or ``CONSTRAINTS`` header."""
    for raw in text.splitlines():
        words = _strip_comment(raw).split()
        if words and words[0] in ("SETTING", "CONSTRAINTS"):
            return True
    return False


# ---------------------------------------------------------------------------
# printing


def _print_header(sig: Signature, env: dict[str, SimpleType], constants: frozenset[str] = frozenset()) -> list[str]:
    lines = ["SORTS " + " ".join(sorted(sig.base_types)), "SIG"]
    for name, decl in sig.symbols.items():
        mark = "!" if name in constants else ""
        lines.append(f"  {mark}{name} : {decl}")
    lines.append("VARS")
    lines.extend(f"  {name} : {ty}" for name, ty in env.items())
    return lines


def print_afs(afs: AFS) -> str:
    lines = _print_header(afs.signature, afs.variables)
    lines.append("RULES")
    lines.extend(f"  {r}" for r in afs.rules)
    return "\n".join(lines) + "\n"


def print_constraint_problem(p: ConstraintProblem) -> str:
    lines = [f"SETTING {p.setting}"] + _print_header(p.signature, p.variables, p.subterm_constants)
    lines.append("CONSTRAINTS")
    lines.extend(f"  {c}" for c in p.constraints)
    return "\n".join(lines) + "\n"
