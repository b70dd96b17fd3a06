"""Parametric interpretations of function symbols and symbolic term interpretation.

Every symbol gets a lambda-polynomial whose coefficients are parameters.  The
application operator is interpreted per setting:

* rule removal: ``s t`` becomes ``[s]([t]) + [t](0..0)``
* dynamic DP:   ``s t`` becomes ``max([s]([t]), [t](0..0))``
* static DP:    ``s t`` becomes ``[s]([t])``

where ``v(0..0)`` is the lowest value of ``v``: ``v`` itself for a number, and
``v`` applied to zero functions otherwise.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .constraints import ParamConstraint, at_least
from .core import (
    Abs,
    App,
    Arrow,
    BVar,
    FunApp,
    Setting,
    Signature,
    SimpleType,
    Term,
    TypeDeclaration,
    Var,
    order_of,
    split_type,
)
from .poly import (
    LambdaPoly,
    Max,
    Param,
    ParamKind,
    Poly,
    Value,
    fresh_name,
    lowest,
    make_max,
    parse_poly,
    pointwise,
    variable_value,
    zero_value,
)

DEFAULT_COMBINATION_LIMIT = 8

_BASE_NAMES = ("n", "m", "k", "l", "i", "j")
_FUN_NAMES = ("f", "g", "h", "u", "v", "w")


class OrderTooHigh(ValueError):
    pass


class MissingInterpretation(KeyError):
    pass


class ParamFactory:
    """Hands out fresh coefficient parameters ``a1, a2, ...``."""

    def __init__(self, prefix: str = "a", kind: ParamKind = ParamKind.COEFFICIENT, start: int = 1):
        self.prefix = prefix
        self.kind = kind
        self._counter = itertools.count(start)

    def __call__(self) -> Param:
        return Param(f"{self.prefix}{next(self._counter)}", self.kind)


@dataclass
class Shape:
    """A parametric interpretation of one symbol plus its side constraints."""

    value: LambdaPoly
    side_constraints: list[ParamConstraint]
    params: list[Param]


@dataclass
class Interpretation:
    per_symbol: dict[str, LambdaPoly]
    setting: Setting
    side_constraints: list[ParamConstraint] = field(default_factory=list)
    params: list[Param] = field(default_factory=list)

    def __getitem__(self, name: str) -> LambdaPoly:
        try:
            return self.per_symbol[name]
        except KeyError:
            raise MissingInterpretation(f"no interpretation for {name}") from None

    def substitute(self, valuation: Mapping[Param, int]) -> "Interpretation":
        return Interpretation(
            {f: v.subst_params(valuation) for f, v in self.per_symbol.items()},
            self.setting,
            [],
            [],
        )


def binder_names(types: Iterable[SimpleType]) -> list[str]:
    """Readable binder names: ``n m k ..`` for base types, ``f g ..`` for functions."""
    counts = {False: 0, True: 0}
    out = []
    for t in types:
        functional = isinstance(t, Arrow)
        pool = _FUN_NAMES if functional else _BASE_NAMES
        i = counts[functional]
        counts[functional] += 1
        out.append(pool[i] if i < len(pool) else f"{pool[0]}{i + 1}")
    return out


def _binders(decl: TypeDeclaration) -> tuple[tuple[str, SimpleType], ...]:
    trailing, _ = split_type(decl.output)
    types = list(decl.inputs) + list(trailing)
    for t in types:
        if isinstance(t, Arrow) and any(isinstance(a, Arrow) for a in split_type(t)[0]):
            raise OrderTooHigh(f"argument type {t} has order {order_of(t)} > 1")
    return tuple(zip(binder_names(types), types))


def _side_constraints(coeffs: list[Param], decl: TypeDeclaration, setting: Setting) -> list[ParamConstraint]:
    n = decl.arity
    match setting:
        case Setting.RULE_REMOVAL:
            chosen = coeffs[:n]
        case Setting.DYNAMIC_DP:
            chosen = coeffs[n:]
        case _:
            chosen = []
    return [at_least(p) for p in chosen]


def default_shape(
    symbol: str,
    decl: TypeDeclaration,
    setting: Setting,
    fresh: ParamFactory | None = None,
    combination_limit: int = DEFAULT_COMBINATION_LIMIT,
    pairs: bool = False,
) -> Shape:
    """``Lam[x1..xm]. sum a_i*x_i(0..0) + (combinations) + a``.

    For every functional ``x_j`` taking ``k`` arguments and every ``k``-tuple
    ``y`` of base-typed binders, add ``c*y1*..*yk*x_j(y) + d*x_j(y)``; at most
    ``combination_limit`` tuples per symbol.  With ``pairs``, also add
    ``c*x_i*x_j`` for base binders ``i < j`` (the fallback shape).
    """
    if order_of(decl) > 2:
        raise OrderTooHigh(f"{symbol} : {decl} has order {order_of(decl)} > 2")
    fresh = fresh or ParamFactory()
    binders = _binders(decl)
    params: list[Param] = []

    def new() -> Poly:
        p = fresh()
        params.append(p)
        return Poly.param(p)

    body = Poly()
    for name, ty in binders:
        body = body + new() * lowest(variable_value(name, ty))
    coeffs = list(params)

    base = [Poly.var(name) for name, ty in binders if not isinstance(ty, Arrow)]
    budget = combination_limit
    for name, ty in binders:
        if not isinstance(ty, Arrow) or not base:
            continue
        k = len(split_type(ty)[0])
        for combo in itertools.product(base, repeat=k):
            if budget <= 0:
                break
            budget -= 1
            call = Poly.call(name, *combo)
            prod = Poly.const(1)
            for y in combo:
                prod = prod * y
            body = body + new() * prod * call + new() * call
    if pairs:
        for x, y in itertools.combinations(base, 2):
            body = body + new() * x * y
    body = body + new()
    return Shape(LambdaPoly(binders, body), _side_constraints(coeffs, decl, setting), params)


def fallback_shape(symbol, decl, setting, fresh=None, combination_limit=DEFAULT_COMBINATION_LIMIT) -> Shape:
    """The default shape plus ``c_ij * x_i * x_j`` for base-typed binders ``i < j``."""
    return default_shape(symbol, decl, setting, fresh, combination_limit, pairs=True)


def zero_interpretation(ty: SimpleType) -> LambdaPoly:
    """The interpretation of a subterm constant ``c : ty``: the zero functional."""
    v = zero_value(ty)
    if isinstance(v, Poly):
        return LambdaPoly((), v)
    return LambdaPoly(tuple(zip(binder_names(t for _, t in v.binders), (t for _, t in v.binders))), v.body)


def parametric_interpretation(
    sig: Signature,
    setting: Setting,
    fallback: bool = False,
    subterm_constants: Iterable[str] = (),
    combination_limit: int = DEFAULT_COMBINATION_LIMIT,
    fresh: ParamFactory | None = None,
) -> Interpretation:
    fresh = fresh or ParamFactory()
    constants = set(subterm_constants)
    per_symbol: dict[str, LambdaPoly] = {}
    side: list[ParamConstraint] = []
    params: list[Param] = []
    for name, decl in sig.symbols.items():
        if name in constants:
            per_symbol[name] = zero_interpretation(decl.as_type())
            continue
        shape = default_shape(name, decl, setting, fresh, combination_limit, pairs=fallback)
        per_symbol[name] = shape.value
        side.extend(shape.side_constraints)
        params.extend(shape.params)
    return Interpretation(per_symbol, setting, side, params)


# ---------------------------------------------------------------------------
# concrete interpretations written as text


def lam_poly(decl: TypeDeclaration | SimpleType, text: str, params=None) -> LambdaPoly:
    """Parse ``Lam[f n]. f(0) + 2*n`` (or a bare polynomial for constants).

    Binder types come from ``decl``; ``params`` is passed to ``parse_poly``.
    """
    if isinstance(decl, TypeDeclaration):
        trailing, _ = split_type(decl.output)
        types = list(decl.inputs) + list(trailing)
    else:
        types = list(split_type(decl)[0])
    m = re.match(r"\s*(?:Lam|λλ|\\\\)\s*\[([^\]]*)\]\s*\.\s*(.*)$", text, re.S)
    if m:
        names, body = m.group(1).split(), m.group(2)
    else:
        names, body = [], text
    if len(names) != len(types):
        raise ValueError(f"{text!r} binds {len(names)} variables, the type needs {len(types)}")
    return LambdaPoly(tuple(zip(names, types)), parse_poly(body, params))


def interpretation_from_table(
    sig: Signature, table: Mapping[str, str], setting: Setting, subterm_constants: Iterable[str] = ()
) -> Interpretation:
    per_symbol = {name: lam_poly(sig[name], text) for name, text in table.items()}
    for c in subterm_constants:
        per_symbol[c] = zero_interpretation(sig[c].as_type())
    return Interpretation(per_symbol, setting)


# ---------------------------------------------------------------------------
# term interpretation


def app_interpretation(setting: Setting, fun: Value, arg: Value) -> Value:
    """The value of ``s t`` given ``[s] = fun`` and ``[t] = arg``."""
    if not isinstance(fun, LambdaPoly):
        raise TypeError("application of a non-function")
    applied = fun.apply([arg])
    match setting:
        case Setting.RULE_REMOVAL:
            low = lowest(arg)
            return pointwise(applied, lambda p: p + low)
        case Setting.DYNAMIC_DP:
            low = lowest(arg)
            return pointwise(applied, lambda p: make_max(p, low))
    return applied


def interpret(
    term: Term,
    J: Interpretation,
    env: Mapping[str, SimpleType],
    val_free: Mapping[str, Value] | None = None,
    _bound: tuple[Value, ...] = (),
) -> Value:
    """Symbolic value of ``term``; free variables stay symbolic unless in ``val_free``."""
    match term:
        case Var(x):
            if val_free and x in val_free:
                return val_free[x]
            if x not in env:
                raise KeyError(f"no type for variable {x}")
            return variable_value(x, env[x])
        case BVar(i):
            return _bound[-1 - i]
        case FunApp(f, args):
            values = [interpret(a, J, env, val_free, _bound) for a in args]
            return J[f].apply(values)
        case Abs(ty, body):
            name = fresh_name()
            inner = interpret(body, J, env, val_free, _bound + (variable_value(name, ty),))
            if isinstance(inner, LambdaPoly):
                return LambdaPoly(((name, ty),) + inner.binders, inner.body)
            return LambdaPoly(((name, ty),), inner)
        case App(s, t):
            return app_interpretation(J.setting, interpret(s, J, env, val_free, _bound), interpret(t, J, env, val_free, _bound))
    raise TypeError(f"not a term: {term!r}")


def interpret_pair(lhs: Term, rhs: Term, J: Interpretation, env: Mapping[str, SimpleType]) -> tuple[Poly, Poly]:
    """Interpret both sides of a rule; functional sides are applied to shared fresh variables."""
    left = interpret(lhs, J, env)
    right = interpret(rhs, J, env)
    if isinstance(left, LambdaPoly) != isinstance(right, LambdaPoly):
        raise TypeError("sides of different types")
    if isinstance(left, LambdaPoly):
        args = [variable_value(fresh_name("z"), t) for _, t in left.binders]
        left, right = left.apply(args), right.apply(args)
    assert isinstance(left, Poly) and isinstance(right, Poly)
    return left, right


def drop_left_max(p: Poly) -> Poly:
    """Replace every ``max(q, r)`` in ``p`` by ``q``: a sound lower bound for a left-hand side."""

    def fn(a):
        if isinstance(a, Max):
            return a.left
        return Poly.atom(a)

    return p.map_atoms(fn)
