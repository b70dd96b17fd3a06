"""Simple types, terms, typing and well-formedness of algebraic functional systems.

Bound variables are stored as de Bruijn indices (``BVar``); free variables are
named (``Var``).  Binder names on ``Abs`` are only printing hints and do not take
part in equality, so structural equality of terms is alpha-equivalence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    left: "SimpleType"
    right: "SimpleType"

    def __str__(self) -> str:
        left = f"({self.left})" if isinstance(self.left, Arrow) else str(self.left)
        return f"{left} => {self.right}"


SimpleType = Union[Base, Arrow]


def arrow(*types: SimpleType) -> SimpleType:
    """Build ``t1 => t2 => ... => tn`` (right-associative)."""
    if not types:
        raise ValueError("arrow() needs at least one type")
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def split_type(t: SimpleType) -> tuple[tuple[SimpleType, ...], Base]:
    """Write ``t`` as ``s1 => ... => sk => base`` and return ``((s1..sk), base)``."""
    args = []
    while isinstance(t, Arrow):
        args.append(t.left)
        t = t.right
    return tuple(args), t


def is_functional(t: SimpleType) -> bool:
    return isinstance(t, Arrow)


@dataclass(frozen=True)
class TypeDeclaration:
    inputs: tuple[SimpleType, ...]
    output: SimpleType

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def as_type(self) -> SimpleType:
        return arrow(*self.inputs, self.output)

    def __str__(self) -> str:
        if not self.inputs:
            return str(self.output)
        shown = (f"({t})" if isinstance(t, Arrow) else str(t) for t in self.inputs)
        return "[" + " * ".join(shown) + f"] => {self.output}"


def order_of(t: SimpleType | TypeDeclaration) -> int:
    match t:
        case Base():
            return 0
        case Arrow(left, right):
            return max(order_of(left) + 1, order_of(right))
        case TypeDeclaration(inputs, output):
            return max([order_of(s) + 1 for s in inputs] + [order_of(output)])
    raise TypeError(f"not a type: {t!r}")


class Setting(enum.Enum):
    RULE_REMOVAL = "rule-removal"
    STATIC_DP = "static-dp"
    DYNAMIC_DP = "dynamic-dp"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    """A free variable."""

    name: str


@dataclass(frozen=True)
class BVar:
    """A bound variable as a de Bruijn index (0 = innermost binder)."""

    index: int


@dataclass(frozen=True)
class Abs:
    binder_type: SimpleType
    body: "Term"
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class FunApp:
    symbol: str
    args: tuple["Term", ...] = ()


Term = Union[Var, BVar, Abs, App, FunApp]


def app(head: Term, *args: Term) -> Term:
    """Left-associated application ``head a1 ... an``."""
    for a in args:
        head = App(head, a)
    return head


def fun(symbol: str, *args: Term) -> FunApp:
    return FunApp(symbol, tuple(args))


def _abstract(t: Term, name: str, depth: int) -> Term:
    match t:
        case Var(n):
            return BVar(depth) if n == name else t
        case BVar():
            return t
        case Abs(ty, body, hint):
            return Abs(ty, _abstract(body, name, depth + 1), hint)
        case App(f, a):
            return App(_abstract(f, name, depth), _abstract(a, name, depth))
        case FunApp(sym, args):
            return FunApp(sym, tuple(_abstract(a, name, depth) for a in args))
    raise TypeError(f"not a term: {t!r}")


def lam(name: str, binder_type: SimpleType, body: Term) -> Abs:
    """``\\name:type. body`` where ``body`` mentions ``name`` as a free ``Var``."""
    return Abs(binder_type, _abstract(body, name, 0), name)


def _instantiate(t: Term, value: Term, depth: int) -> Term:
    # value is locally closed, so it never needs shifting
    match t:
        case BVar(i):
            if i == depth:
                return value
            return BVar(i - 1) if i > depth else t
        case Var():
            return t
        case Abs(ty, body, hint):
            return Abs(ty, _instantiate(body, value, depth + 1), hint)
        case App(f, a):
            return App(_instantiate(f, value, depth), _instantiate(a, value, depth))
        case FunApp(sym, args):
            return FunApp(sym, tuple(_instantiate(a, value, depth) for a in args))
    raise TypeError(f"not a term: {t!r}")


def instantiate(abstraction: Abs, value: Term) -> Term:
    """The body of ``abstraction`` with its bound variable replaced by ``value``."""
    return _instantiate(abstraction.body, value, 0)


def beta(redex: App) -> Term:
    if not isinstance(redex.fun, Abs):
        raise ValueError("not a beta-redex")
    return instantiate(redex.fun, redex.arg)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    match t:
        case Abs(_, body):
            yield from subterms(body)
        case App(f, a):
            yield from subterms(f)
            yield from subterms(a)
        case FunApp(_, args):
            for a in args:
                yield from subterms(a)


def free_vars(t: Term) -> set[str]:
    return {s.name for s in subterms(t) if isinstance(s, Var)}


def symbols_of(t: Term) -> set[str]:
    return {s.symbol for s in subterms(t) if isinstance(s, FunApp)}


def head_and_args(t: Term) -> tuple[Term, list[Term]]:
    """Split ``h a1 ... an`` into ``(h, [a1..an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    return t, args[::-1]


def has_beta_redex(t: Term) -> bool:
    return any(isinstance(s, App) and isinstance(s.fun, Abs) for s in subterms(t))


def substitute(
    t: Term,
    subst: Mapping[str, Term],
    sig: "Signature | None" = None,
    env: Mapping[str, SimpleType] | None = None,
) -> Term:
    """Capture-avoiding substitution of free variables.

    Replacement terms are locally closed (they contain no dangling de Bruijn
    indices), so inserting them under binders cannot capture anything.  When
    ``sig`` and ``env`` are given, every replacement is checked to preserve the
    type of the variable it replaces.
    """
    if sig is not None and env is not None:
        for name, value in subst.items():
            expected = env[name]
            actual = typecheck(value, sig, env)
            if actual != expected:
                raise TypeMismatch(f"{name} : {expected} cannot be replaced by a term of type {actual}", value)
    return _substitute(t, subst)


def _substitute(t: Term, subst: Mapping[str, Term]) -> Term:
    match t:
        case Var(n):
            return subst.get(n, t)
        case BVar():
            return t
        case Abs(ty, body, hint):
            return Abs(ty, _substitute(body, subst), hint)
        case App(f, a):
            return App(_substitute(f, subst), _substitute(a, subst))
        case FunApp(sym, args):
            return FunApp(sym, tuple(_substitute(a, subst) for a in args))
    raise TypeError(f"not a term: {t!r}")


def show_term(t: Term, taken: frozenset[str] | set[str] = frozenset()) -> str:
    """Print a term in the input syntax, choosing binder names that avoid capture."""
    avoid = set(taken) | free_vars(t)
    return _show(t, [], avoid)


def _fresh_name(hint: str, avoid: set[str]) -> str:
    if hint not in avoid:
        return hint
    i = 1
    while f"{hint}{i}" in avoid:
        i += 1
    return f"{hint}{i}"


def _show(t: Term, names: list[str], avoid: set[str], arg_pos: bool = False) -> str:
    match t:
        case Var(n):
            return n
        case BVar(i):
            return names[-1 - i] if i < len(names) else f"#{i}"
        case FunApp(sym, args):
            if not args:
                return sym
            return sym + "(" + ", ".join(_show(a, names, avoid) for a in args) + ")"
        case Abs(ty, body, hint):
            name = _fresh_name(hint, avoid | set(names))
            inner = _show(body, names + [name], avoid)
            s = f"\\{name}:{ty}. {inner}"
            return f"({s})" if arg_pos else s
        case App(f, a):
            left = _show(f, names, avoid)
            if isinstance(f, Abs):
                left = f"({left})"
            right = _show(a, names, avoid, arg_pos=True)
            if isinstance(a, App):
                right = f"({right})"
            return f"{left} {right}"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# typing


class TermError(Exception):
    """Base class for typing errors; ``term`` names the offending subterm."""

    def __init__(self, message: str, term: Term | None = None):
        super().__init__(message)
        self.term = term
        self.line: int | None = None
        self.col: int | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        if self.line is not None:
            return f"{self.line}:{self.col}: {msg}"
        return msg


class UnknownSymbol(TermError):
    pass


class UnknownVariable(TermError):
    pass


class ArityMismatch(TermError):
    pass


class TypeMismatch(TermError):
    pass


@dataclass
class Signature:
    symbols: dict[str, TypeDeclaration]
    base_types: frozenset[str] = frozenset()

    def __contains__(self, name: str) -> bool:
        return name in self.symbols

    def __getitem__(self, name: str) -> TypeDeclaration:
        return self.symbols[name]

    def is_second_order(self) -> bool:
        return all(order_of(d) <= 2 for d in self.symbols.values())


def typecheck(
    term: Term,
    sig: Signature,
    env: Mapping[str, SimpleType],
    _bound: tuple[SimpleType, ...] = (),
) -> SimpleType:
    """Return the unique type of ``term`` or raise a ``TermError``."""
    match term:
        case Var(n):
            if n not in env:
                raise UnknownVariable(f"unknown variable {n}", term)
            return env[n]
        case BVar(i):
            if i >= len(_bound):
                raise UnknownVariable(f"dangling bound variable #{i}", term)
            return _bound[-1 - i]
        case Abs(ty, body):
            return Arrow(ty, typecheck(body, sig, env, _bound + (ty,)))
        case App(f, a):
            ft = typecheck(f, sig, env, _bound)
            at = typecheck(a, sig, env, _bound)
            if not isinstance(ft, Arrow):
                raise TypeMismatch(f"{show_term(f)} : {ft} is applied but not functional", term)
            if ft.left != at:
                raise TypeMismatch(
                    f"argument {show_term(a)} has type {at}, expected {ft.left}", term
                )
            return ft.right
        case FunApp(sym, args):
            if sym not in sig:
                raise UnknownSymbol(f"unknown symbol {sym}", term)
            decl = sig[sym]
            if len(args) != decl.arity:
                raise ArityMismatch(
                    f"{sym} expects {decl.arity} argument(s), got {len(args)}", term
                )
            for i, (a, expected) in enumerate(zip(args, decl.inputs)):
                at = typecheck(a, sig, env, _bound)
                if at != expected:
                    raise TypeMismatch(
                        f"argument {i + 1} of {sym} has type {at}, expected {expected}", term
                    )
            return decl.output
    raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# rules and systems


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        taken = free_vars(self.lhs) | free_vars(self.rhs)
        return f"{show_term(self.lhs, taken)} -> {show_term(self.rhs, taken)}"


@dataclass
class AFS:
    signature: Signature
    rules: list[Rule]
    variables: dict[str, SimpleType] = field(default_factory=dict)


class ViolationKind(enum.Enum):
    TYPE_ERROR = "TypeError"
    SIDE_TYPE_MISMATCH = "SideTypeMismatch"
    FREE_VAR_NOT_IN_LHS = "FreeVarNotInLhs"
    ILLEGAL_LHS_HEAD = "IllegalLhsHead"
    BETA_REDEX = "BetaRedex"
    ORDER_TOO_HIGH = "OrderTooHigh"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    reason: str
    rule_index: int | None = None  # None for signature-level violations

    def __str__(self) -> str:
        where = f"rule {self.rule_index}" if self.rule_index is not None else "signature"
        return f"{where}: {self.kind.value}: {self.reason}"


@dataclass
class ValidationReport:
    violations: list[Violation]
    second_order: bool

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> list[ViolationKind]:
        return [v.kind for v in self.violations]


def check_rule(rule: Rule, sig: Signature, env: Mapping[str, SimpleType], index: int | None = None) -> list[Violation]:
    out: list[Violation] = []

    def report(kind: ViolationKind, reason: str) -> None:
        out.append(Violation(kind, reason, index))

    types = []
    for side in (rule.lhs, rule.rhs):
        try:
            types.append(typecheck(side, sig, env))
        except TermError as e:
            report(ViolationKind.TYPE_ERROR, f"{type(e).__name__}: {e}")
    if len(types) == 2 and types[0] != types[1]:
        report(ViolationKind.SIDE_TYPE_MISMATCH, f"lhs has type {types[0]}, rhs has type {types[1]}")

    missing = free_vars(rule.rhs) - free_vars(rule.lhs)
    if missing:
        report(ViolationKind.FREE_VAR_NOT_IN_LHS, "variables " + ", ".join(sorted(missing)) + " do not occur in the lhs")

    head, _ = head_and_args(rule.lhs)
    if not isinstance(head, FunApp):
        report(ViolationKind.ILLEGAL_LHS_HEAD, "lhs must have the form f(l1,...,ln) l(n+1) ... lm")
    for s in subterms(rule.lhs):
        if isinstance(s, App) and isinstance(head_and_args(s)[0], Var):
            report(ViolationKind.ILLEGAL_LHS_HEAD, f"lhs contains the application {show_term(s)} of a free variable")
            break
    for side, name in ((rule.lhs, "lhs"), (rule.rhs, "rhs")):
        if has_beta_redex(side):
            report(ViolationKind.BETA_REDEX, f"{name} contains a beta-redex")
    return out


def validate(afs: AFS) -> ValidationReport:
    """Check every rule and the second-order condition; never raises."""
    violations: list[Violation] = []
    for name, decl in afs.signature.symbols.items():
        if order_of(decl) > 2:
            violations.append(
                Violation(ViolationKind.ORDER_TOO_HIGH, f"{name} : {decl} has order {order_of(decl)} > 2")
            )
    for i, rule in enumerate(afs.rules):
        violations.extend(check_rule(rule, afs.signature, afs.variables, i))
    return ValidationReport(violations, afs.signature.is_second_order())
