"""Higher-order polynomials over the naturals with unknown parameters.

A ``Poly`` is a sum of monomials ``c * p1*...*pk * A1*...*Al`` where ``c`` is a
positive natural, the ``pi`` are parameters (unknown naturals, to be fixed by the
solver) and the ``Ai`` are atoms: base-type variables, applications ``F(q1..qn)``
of functional variables to polynomials, or binary ``max`` atoms.  Polynomials
are kept in a canonical form, so equality is structural.

``LambdaPoly`` is a polynomial abstracted over named binders; it is the value
of a functional term or the interpretation of a function symbol.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Union

from .core import Arrow, SimpleType, split_type


def _natural_key(name: str) -> tuple:
    return tuple(int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", name) if tok)


class ParamKind(enum.Enum):
    COEFFICIENT = "coefficient"
    BIT = "bit"
    SPLIT = "split"


_KIND_ORDER = {ParamKind.COEFFICIENT: 0, ParamKind.BIT: 1, ParamKind.SPLIT: 2}


@dataclass(frozen=True)
class Param:
    name: str
    kind: ParamKind = ParamKind.COEFFICIENT

    @cached_property
    def sort_key(self) -> tuple:
        return (_natural_key(self.name), _KIND_ORDER[self.kind])

    def __str__(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class TermVar:
    name: str

    @cached_property
    def sort_key(self) -> tuple:
        return (0, _natural_key(self.name))


@dataclass(frozen=True)
class FunApp:
    fvar: str
    args: tuple["Poly", ...]

    @cached_property
    def sort_key(self) -> tuple:
        return (1, _natural_key(self.fvar), tuple(a.sort_key for a in self.args))


@dataclass(frozen=True)
class Max:
    left: "Poly"
    right: "Poly"

    @cached_property
    def sort_key(self) -> tuple:
        return (2, self.left.sort_key, self.right.sort_key)


Atom = Union[TermVar, FunApp, Max]


def atom_head(a: Atom) -> str | None:
    """The variable an atom is built on (``None`` for ``max``)."""
    if isinstance(a, TermVar):
        return a.name
    if isinstance(a, FunApp):
        return a.fvar
    return None


class Monomial(NamedTuple):
    coeff: int
    params: tuple[Param, ...]
    atoms: tuple[Atom, ...]

    @property
    def key(self) -> tuple[tuple[Param, ...], tuple[Atom, ...]]:
        return (self.params, self.atoms)


def _mono_sort_key(key: tuple[tuple[Param, ...], tuple[Atom, ...]]) -> tuple:
    params, atoms = key
    return (len(atoms), tuple(a.sort_key for a in atoms), len(params), tuple(p.sort_key for p in params))


def _merge(xs: tuple, ys: tuple) -> tuple:
    if not xs:
        return ys
    if not ys:
        return xs
    return tuple(sorted(xs + ys, key=lambda z: z.sort_key))


class Poly:
    """A canonical higher-order polynomial; immutable and hashable."""

    __slots__ = ("_terms", "_hash", "__dict__")

    def __init__(self, terms: Mapping[tuple, int] | None = None):
        items = [(k, c) for k, c in (terms or {}).items() if c != 0]
        if any(c < 0 for _, c in items):
            raise ValueError("polynomials over the naturals have non-negative coefficients")
        items.sort(key=lambda kc: _mono_sort_key(kc[0]))
        self._terms: tuple[tuple[tuple, int], ...] = tuple(items)
        self._hash: int | None = None

    # construction -----------------------------------------------------------

    @staticmethod
    def const(n: int) -> "Poly":
        return Poly({((), ()): n})

    @staticmethod
    def var(name: str) -> "Poly":
        return Poly({((), (TermVar(name),)): 1})

    @staticmethod
    def param(p: Param | str) -> "Poly":
        if isinstance(p, str):
            p = Param(p)
        return Poly({((p,), ()): 1})

    @staticmethod
    def atom(a: Atom) -> "Poly":
        return Poly({((), (a,)): 1})

    @staticmethod
    def call(fvar: str, *args: "Poly | int") -> "Poly":
        return Poly.atom(FunApp(fvar, tuple(_lift(a) for a in args)))

    @staticmethod
    def from_monomials(monos: Iterable[Monomial]) -> "Poly":
        acc: dict[tuple, int] = {}
        for m in monos:
            acc[m.key] = acc.get(m.key, 0) + m.coeff
        return Poly(acc)

    # inspection -------------------------------------------------------------

    def monomials(self) -> list[Monomial]:
        return [Monomial(c, k[0], k[1]) for k, c in self._terms]

    def as_dict(self) -> dict[tuple, int]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_ground(self) -> bool:
        """True if no atoms occur (only parameters and constants)."""
        return all(not k[1] for k, _ in self._terms)

    def is_numeral(self) -> bool:
        return all(not k[0] and not k[1] for k, _ in self._terms)

    def numeral(self) -> int:
        if not self.is_numeral():
            raise ValueError(f"{self} is not a numeral")
        return sum(c for _, c in self._terms)

    def constant_term(self) -> int:
        return dict(self._terms).get(((), ()), 0)

    def atoms(self) -> Iterator[Atom]:
        """Top-level atom occurrences (with multiplicity)."""
        for (_, atoms), _c in self._terms:
            yield from atoms

    def all_atoms(self) -> Iterator[Atom]:
        """Every atom occurrence, including those nested in arguments."""
        for a in self.atoms():
            yield a
            if isinstance(a, FunApp):
                for arg in a.args:
                    yield from arg.all_atoms()
            elif isinstance(a, Max):
                yield from a.left.all_atoms()
                yield from a.right.all_atoms()

    def params(self) -> set[Param]:
        out: set[Param] = set()
        for (ps, atoms), _c in self._terms:
            out.update(ps)
            for a in atoms:
                for sub in _subpolys(a):
                    out |= sub.params()
        return out

    def names(self) -> set[str]:
        """Names of all variables (base and functional) occurring anywhere."""
        return {h for a in self.all_atoms() if (h := atom_head(a)) is not None}

    def has_max(self) -> bool:
        return any(isinstance(a, Max) for a in self.all_atoms())

    @property
    def sort_key(self) -> tuple:
        key = self.__dict__.get("_key")
        if key is None:
            key = tuple((_mono_sort_key(k), c) for k, c in self._terms)
            self.__dict__["_key"] = key
        return key

    # arithmetic -------------------------------------------------------------

    def __add__(self, other: "Poly | int") -> "Poly":
        other = _lift(other)
        acc = dict(self._terms)
        for k, c in other._terms:
            acc[k] = acc.get(k, 0) + c
        return Poly(acc)

    __radd__ = __add__

    def __mul__(self, other: "Poly | int") -> "Poly":
        other = _lift(other)
        acc: dict[tuple, int] = {}
        for (p1, a1), c1 in self._terms:
            for (p2, a2), c2 in other._terms:
                k = (_merge(p1, p2), _merge(a1, a2))
                acc[k] = acc.get(k, 0) + c1 * c2
        return Poly(acc)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    # substitution -----------------------------------------------------------

    def map_atoms(self, fn: Callable[[Atom], "Poly"]) -> "Poly":
        """Rebuild the polynomial bottom-up, replacing every atom by ``fn(atom)``.

        Arguments of ``FunApp`` and ``Max`` atoms are rewritten before ``fn`` sees
        the atom, so the substitution is simultaneous and never revisits inserted
        values.
        """
        result = Poly()
        for (ps, atoms), c in self._terms:
            term = Poly({(ps, ()): c})
            for a in atoms:
                term = term * fn(_rebuild(a, fn))
            result = result + term
        return result

    def subst_atoms(self, mapping: Mapping[str, "Poly | LambdaPoly"]) -> "Poly":
        """Replace base variables by polynomials and functional variables by
        lambda-polynomials (applied to their arguments), simultaneously."""
        if not mapping:
            return self

        def fn(a: Atom) -> Poly:
            if isinstance(a, TermVar) and a.name in mapping:
                v = mapping[a.name]
                if not isinstance(v, Poly):
                    raise TypeError(f"base variable {a.name} mapped to a function")
                return v
            if isinstance(a, FunApp) and a.fvar in mapping:
                v = mapping[a.fvar]
                if not isinstance(v, LambdaPoly):
                    raise TypeError(f"functional variable {a.fvar} mapped to a polynomial")
                out = v.apply(list(a.args))
                assert isinstance(out, Poly)
                return out
            return _atom_poly(a)

        return self.map_atoms(fn)

    def subst_params(self, mapping: Mapping[Param, "int | Poly"]) -> "Poly":
        if not mapping:
            return self
        result = Poly()
        for (ps, atoms), c in self._terms:
            term = Poly.const(c)
            kept = []
            for p in ps:
                if p in mapping:
                    term = term * _lift(mapping[p])
                else:
                    kept.append(p)
            factor = Poly({(tuple(kept), ()): 1})
            for a in atoms:
                factor = factor * _atom_poly(_rebuild(a, _atom_poly, lambda q: q.subst_params(mapping)))
            result = result + term * factor
        return result

    # evaluation -------------------------------------------------------------

    def evaluate(
        self,
        param_val: Mapping[Param, int] | None = None,
        var_val: Mapping[str, int] | None = None,
        fun_val: Mapping[str, Callable[..., int]] | None = None,
    ) -> int:
        return eval_numeric(self, param_val or {}, var_val or {}, fun_val or {})

    # printing ---------------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r})"


def _lift(x: "Poly | int") -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, int):
        return Poly.const(x)
    raise TypeError(f"cannot use {x!r} as a polynomial")


def _subpolys(a: Atom) -> tuple[Poly, ...]:
    if isinstance(a, FunApp):
        return a.args
    if isinstance(a, Max):
        return (a.left, a.right)
    return ()


def _atom_poly(a: Atom) -> Poly:
    if isinstance(a, Max):
        return make_max(a.left, a.right)
    return Poly.atom(a)


def _rebuild(a: Atom, fn: Callable[[Atom], Poly], sub: Callable[[Poly], Poly] | None = None) -> Atom:
    if sub is None:
        sub = lambda q: q.map_atoms(fn)  # noqa: E731
    if isinstance(a, FunApp):
        return FunApp(a.fvar, tuple(sub(x) for x in a.args))
    if isinstance(a, Max):
        return Max(sub(a.left), sub(a.right))
    return a


def make_max(p: Poly, q: Poly) -> Poly:
    """``max(p, q)`` with the obvious simplifications applied."""
    if p == q or q.is_zero():
        return p
    if p.is_zero():
        return q
    if p.is_numeral() and q.is_numeral():
        return Poly.const(max(p.numeral(), q.numeral()))
    if q.sort_key < p.sort_key:
        p, q = q, p
    return Poly.atom(Max(p, q))


ZERO = Poly()
ONE = Poly.const(1)


# ---------------------------------------------------------------------------
# lambda-polynomials

_fresh_counter = itertools.count(1)


def fresh_name(prefix: str = "_") -> str:
    """A variable name that cannot clash with parsed identifiers."""
    return f"{prefix}{next(_fresh_counter)}"


@dataclass(frozen=True)
class LambdaPoly:
    """``Lam[x1 .. xk]. body``; binders may be base-typed or first-order functions."""

    binders: tuple[tuple[str, SimpleType], ...]
    body: Poly

    @property
    def arity(self) -> int:
        return len(self.binders)

    def apply(self, args: list["Poly | LambdaPoly"]) -> "Poly | LambdaPoly":
        if len(args) > len(self.binders):
            raise ArityOverflow(f"{len(args)} arguments given to a function of {len(self.binders)}")
        mapping: dict[str, Poly | LambdaPoly] = {}
        for (name, ty), value in zip(self.binders, args):
            if isinstance(ty, Arrow) != isinstance(value, LambdaPoly):
                raise TypeError(f"argument for {name} : {ty} has the wrong shape: {value}")
            mapping[name] = value
        rest = self.binders[len(args):]
        if rest:
            renamed = tuple((fresh_name(), ty) for _, ty in rest)
            for (old, ty), (new, _) in zip(rest, renamed):
                mapping[old] = variable_value(new, ty)
            return LambdaPoly(renamed, self.body.subst_atoms(mapping))
        return self.body.subst_atoms(mapping)

    def subst_params(self, mapping: Mapping[Param, "int | Poly"]) -> "LambdaPoly":
        return LambdaPoly(self.binders, self.body.subst_params(mapping))

    def params(self) -> set[Param]:
        return self.body.params()

    def __str__(self) -> str:
        return "Lam[" + " ".join(n for n, _ in self.binders) + "]. " + format_poly(self.body)


Value = Union[Poly, LambdaPoly]


class ArityOverflow(ValueError):
    pass


class MissingAssignment(KeyError):
    pass


def variable_value(name: str, ty: SimpleType) -> Value:
    """The symbolic value of a free variable: an atom, or ``Lam[y..]. name(y..)``."""
    if not isinstance(ty, Arrow):
        return Poly.var(name)
    arg_types, _ = split_type(ty)
    if any(isinstance(t, Arrow) for t in arg_types):
        raise NotImplementedError(f"variable {name} : {ty} has order > 1")
    binders = tuple((fresh_name(), t) for t in arg_types)
    return LambdaPoly(binders, Poly.call(name, *(Poly.var(b) for b, _ in binders)))


def zero_value(ty: SimpleType) -> Value:
    """The constant zero functional of type ``ty``."""
    if not isinstance(ty, Arrow):
        return ZERO
    arg_types, _ = split_type(ty)
    return LambdaPoly(tuple((fresh_name(), t) for t in arg_types), ZERO)


def lowest(v: Value) -> Poly:
    """``v(0, ..., 0)``: a base value itself, a function applied to zero functionals."""
    if isinstance(v, Poly):
        return v
    out = v.apply([zero_value(t) for _, t in v.binders])
    assert isinstance(out, Poly)
    return out


def pointwise(v: Value, combine: Callable[[Poly], Poly]) -> Value:
    """Apply ``combine`` to the result of ``v`` (under its binders)."""
    if isinstance(v, Poly):
        return combine(v)
    return LambdaPoly(v.binders, combine(v.body))


# ---------------------------------------------------------------------------
# evaluation


def eval_numeric(
    p: Poly,
    param_val: Mapping[Param, int],
    var_val: Mapping[str, int],
    fun_val: Mapping[str, Callable[..., int]],
) -> int:
    """Evaluate ``p`` to a natural number under full assignments."""
    total = 0
    for (ps, atoms), c in p._terms:
        value = c
        for prm in ps:
            try:
                value *= param_val[prm]
            except KeyError:
                raise MissingAssignment(f"no value for parameter {prm}") from None
        for a in atoms:
            if value == 0:
                break
            value *= _eval_atom(a, param_val, var_val, fun_val)
        total += value
    return total


def _eval_atom(a: Atom, param_val, var_val, fun_val) -> int:
    if isinstance(a, TermVar):
        try:
            return var_val[a.name]
        except KeyError:
            raise MissingAssignment(f"no value for variable {a.name}") from None
    if isinstance(a, FunApp):
        try:
            f = fun_val[a.fvar]
        except KeyError:
            raise MissingAssignment(f"no value for function {a.fvar}") from None
        return f(*(eval_numeric(x, param_val, var_val, fun_val) for x in a.args))
    return max(eval_numeric(a.left, param_val, var_val, fun_val), eval_numeric(a.right, param_val, var_val, fun_val))


def evaluate_value(v: Value, param_val, var_val, fun_val):
    """An integer for a ``Poly``; a Python function for a ``LambdaPoly``.

    Functional binders expect Python callables as arguments.
    """
    if isinstance(v, Poly):
        return eval_numeric(v, param_val, var_val, fun_val)

    def call(*args):
        if len(args) != v.arity:
            raise ArityOverflow(f"expected {v.arity} arguments, got {len(args)}")
        vv, fv = dict(var_val), dict(fun_val)
        for (name, ty), a in zip(v.binders, args):
            (fv if isinstance(ty, Arrow) else vv)[name] = a
        return eval_numeric(v.body, param_val, vv, fv)

    return call


# ---------------------------------------------------------------------------
# printing and parsing


def format_monomial(m: Monomial, mul: str = "·") -> str:
    factors = [str(p) for p in m.params] + [format_atom(a, mul) for a in m.atoms]
    if m.coeff != 1 or not factors:
        factors.insert(0, str(m.coeff))
    return mul.join(factors)


def format_atom(a: Atom, mul: str = "·") -> str:
    if isinstance(a, TermVar):
        return a.name
    if isinstance(a, FunApp):
        return a.fvar + "(" + ", ".join(format_poly(x, mul) for x in a.args) + ")"
    return f"max({format_poly(a.left, mul)}, {format_poly(a.right, mul)})"


def format_poly(p: Poly, mul: str = "·", order: Callable[[Monomial], object] | None = None) -> str:
    monos = p.monomials()
    if not monos:
        return "0"
    if order is not None:
        monos.sort(key=order)
    return " + ".join(format_monomial(m, mul) for m in monos)


_PARAM_NAME = re.compile(r"^[aoek]\d+(_\d+)*$")


def default_param_kind(name: str) -> ParamKind | None:
    """Classify names like ``a3``, ``o1``, ``e1_2``: parameter kinds by prefix."""
    if not _PARAM_NAME.match(name):
        return None
    if name[0] == "o":
        return ParamKind.BIT
    if name[0] in "ek":
        return ParamKind.SPLIT
    return ParamKind.COEFFICIENT


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_'#]*)|(.))")


def parse_poly(text: str, params: Callable[[str], ParamKind | None] | Iterable[str] | None = None) -> Poly:
    """Parse the debug notation, e.g. ``a2·a6·t·F(a1*h + a2*t + a3)``.

    Identifiers followed by ``(`` are functional variables (``max`` is the max
    atom); other identifiers are parameters when ``params`` says so, and base
    variables otherwise.
    """
    if params is None:
        classify = default_param_kind
    elif callable(params):
        classify = params
    else:
        names = set(params)
        classify = lambda n: ParamKind.COEFFICIENT if n in names else None  # noqa: E731
    toks: list[str] = []
    for m in _TOKEN.finditer(text.replace("·", "*")):
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok and not tok.isspace():
            toks.append(tok)
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'a token'} at token {pos} in {text!r}, got {tok!r}")
        pos += 1
        return tok

    def expr() -> Poly:
        result = term()
        while peek() == "+":
            take("+")
            result = result + term()
        return result

    def term() -> Poly:
        result = factor()
        while peek() == "*":
            take("*")
            result = result * factor()
        return result

    def factor() -> Poly:
        tok = take()
        if tok == "(":
            inner = expr()
            take(")")
            return inner
        if tok.isdigit():
            return Poly.const(int(tok))
        if peek() == "(":
            take("(")
            args = [] if peek() == ")" else [expr()]
            while peek() == ",":
                take(",")
                args.append(expr())
            take(")")
            if tok == "max":
                if len(args) < 2:
                    raise ValueError("max needs at least two arguments")
                out = args[-1]
                for a in reversed(args[:-1]):
                    out = make_max(a, out)
                return out
            return Poly.call(tok, *args)
        kind = classify(tok)
        if kind is not None:
            return Poly.param(Param(tok, kind))
        return Poly.var(tok)

    result = expr()
    if peek() is not None:
        raise ValueError(f"unexpected {peek()!r} in {text!r}")
    return result
