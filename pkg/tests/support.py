"""Shared fixtures for the test suite: problem files, hand-written interpretations,
random well-typed terms and a reference one-step rewriter."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Iterator, Mapping

from hopoterm.core import (
    Abs,
    App,
    Arrow,
    Base,
    BVar,
    FunApp,
    Rule,
    Setting,
    Signature,
    SimpleType,
    Term,
    TypeDeclaration,
    Var,
    app,
    arrow,
    beta,
    fun,
    lam,
    split_type,
)
from hopoterm.interp import Interpretation, binder_names, interpret, interpretation_from_table, lam_poly
from hopoterm.oracle import OracleFunction, random_function, random_higher_order_poly
from hopoterm.parse import parse_afs, parse_constraint_problem
from hopoterm.poly import LambdaPoly, Param, ParamKind, Poly, eval_numeric

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"

NAT = Base("nat")
NATLIST = Base("natlist")
NN = Arrow(NAT, NAT)


def problem_text(name: str) -> str:
    return (PROBLEMS / name).read_text()


def shuffle_afs():
    return parse_afs(problem_text("shuffle.afs"))


def map_afs():
    return parse_afs(problem_text("map.afs"))


def static_problem():
    return parse_constraint_problem(problem_text("shuffle_static.dp"))


def collapse_problem():
    return parse_constraint_problem(problem_text("collapse.dp"))


# ---------------------------------------------------------------------------
# hand-written reference interpretations

SHUFFLE_TABLE = {
    "nil": "0",
    "cons": "Lam[n m]. n + m + 3",
    "append": "Lam[n m]. n + m",
    "reverse": "Lam[n]. n + 1",
    "shuffle": "Lam[f n]. 2*n + f(0) + n*f(n) + 1",
}

STATIC_TABLE = {
    "shuffle#": "Lam[f n]. n",
    "cons": "Lam[n m]. m + 1",
    "nil": "0",
    "reverse": "Lam[n]. n",
    "append": "Lam[n m]. n + m",
}

COLLAPSE_TABLE = {
    "0": "0",
    "nil": "0",
    "diff": "Lam[n m]. n + m",
    "gcd": "Lam[n m]. n + m",
    "s": "Lam[n]. 3*n",
    "build": "Lam[n]. 3*n",
    "min": "Lam[n m]. 0",
    "collapse": "Lam[n]. n",
    "collapse#": "Lam[n]. n + 1",
    "cons": "Lam[f n]. f(n) + n",
}

POINT_VALUE_TABLE = {
    "0": "1",
    "s": "Lam[n]. n + 2",
    "cons": "Lam[n m]. n + m",
    "shuffle": "Lam[f n]. f(n)",
}


def table_interpretation(sig: Signature, table: Mapping[str, str], setting: Setting, constants=()) -> Interpretation:
    return interpretation_from_table(sig, table, setting, constants)


# ---------------------------------------------------------------------------
# the map example with hand-picked shapes

MAP_REFERENCE_VALUATION = {
    "a1": 1, "a2": 1, "a3": 1, "a4": 1, "a5": 2, "a6": 1, "a7": 0,
    "e1_1": 1, "e1_2": 0, "e2_1": 0, "e2_2": 1, "k1_1": 1, "o1": 1,
}


def map_reference_interpretation() -> Interpretation:
    afs = map_afs()
    sig = afs.signature
    J = Interpretation(
        {
            "cons": lam_poly(sig["cons"], "Lam[n m]. a1*n + a2*m + a3"),
            "map": lam_poly(sig["map"], "Lam[f n]. a4*f(0) + a5*n + a6*n*f(n) + a7"),
        },
        Setting.RULE_REMOVAL,
    )
    from hopoterm.constraints import at_least

    J.side_constraints = [at_least(Param(a, ParamKind.COEFFICIENT)) for a in ("a1", "a2", "a4", "a5")]
    J.params = [Param(f"a{i}", ParamKind.COEFFICIENT) for i in range(1, 8)]
    return J


def param(name: str) -> Param:
    from hopoterm.poly import default_param_kind

    return Param(name, default_param_kind(name))


def valuation(names: Mapping[str, int]) -> dict[Param, int]:
    return {param(n): v for n, v in names.items()}


# ---------------------------------------------------------------------------
# random well-typed terms

NUMERAL_SIG = Signature(
    {
        "0": TypeDeclaration((), NAT),
        "s": TypeDeclaration((NAT,), NAT),
        "add": TypeDeclaration((NAT, NAT), NAT),
        "nil": TypeDeclaration((), NATLIST),
        "cons": TypeDeclaration((NAT, NATLIST), NATLIST),
        "map": TypeDeclaration((NN, NATLIST), NATLIST),
        "sum": TypeDeclaration((NATLIST,), NAT),
        "fold": TypeDeclaration((arrow(NAT, NAT, NAT), NAT, NATLIST), NAT),
        "twice": TypeDeclaration((NN, NAT), NAT),
    },
    frozenset({"nat", "natlist"}),
)

NUMERAL_ENV: dict[str, SimpleType] = {
    "x": NAT,
    "y": NAT,
    "l": NATLIST,
    "F": NN,
    "G": arrow(NAT, NAT, NAT),
}


class TermGen:
    """Random well-typed terms of a requested type."""

    def __init__(self, rng: random.Random, sig: Signature = NUMERAL_SIG, env: Mapping[str, SimpleType] = NUMERAL_ENV):
        self.rng = rng
        self.sig = sig
        self.env = dict(env)
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"b{self.counter}"

    def term(self, ty: SimpleType, depth: int = 3, scope: tuple[tuple[str, SimpleType], ...] = ()) -> Term:
        rng = self.rng
        if isinstance(ty, Arrow):
            candidates = [n for n, t in list(self.env.items()) + list(scope) if t == ty]
            if candidates and rng.random() < 0.4:
                return Var(rng.choice(candidates))
            name = self.fresh()
            body = self.term(ty.right, depth - 1, scope + ((name, ty.left),))
            return lam(name, ty.left, body)
        leaves: list[Term] = [Var(n) for n, t in list(self.env.items()) + list(scope) if t == ty]
        leaves += [fun(f) for f, d in self.sig.symbols.items() if d.arity == 0 and d.output == ty]
        if depth <= 0 or (leaves and rng.random() < 0.3):
            return rng.choice(leaves)
        options = []
        for f, d in self.sig.symbols.items():
            if d.arity and d.output == ty:
                options.append(("sym", f))
        for n, t in list(self.env.items()) + list(scope):
            args, out = split_type(t)
            if args and out == ty and not any(isinstance(a, Arrow) for a in args):
                options.append(("var", n))
        options.append(("redex", None))
        kind, name = rng.choice(options)
        if kind == "sym":
            d = self.sig[name]
            return FunApp(name, tuple(self.term(a, depth - 1, scope) for a in d.inputs))
        if kind == "var":
            args, _ = split_type(self.env.get(name) or dict(scope)[name])
            return app(Var(name), *(self.term(a, depth - 1, scope) for a in args))
        return self.redex(ty, depth, scope)

    def redex(self, ty: SimpleType, depth: int = 3, scope=()) -> App:
        """A beta-redex ``(\\b. s) t`` of type ``ty`` with ``b : nat``."""
        name = self.fresh()
        body = self.term(ty, depth - 1, scope + ((name, NAT),))
        if not _mentions(body, name):
            body = FunApp("add", (Var(name), body)) if ty == NAT and "add" in self.sig else body
        return App(lam(name, NAT, body), self.term(NAT, depth - 1, scope))


def _mentions(t: Term, name: str) -> bool:
    from hopoterm.core import free_vars

    return name in free_vars(t)


def random_concrete_interpretation(rng: random.Random, sig: Signature, setting: Setting) -> Interpretation:
    """Every symbol gets a random polynomial with constant coefficients."""
    per_symbol = {}
    for f, d in sig.symbols.items():
        trailing, _ = split_type(d.output)
        types = list(d.inputs) + list(trailing)
        names = binder_names(types)
        base = [n for n, t in zip(names, types) if not isinstance(t, Arrow)]
        funs = {n: len(split_type(t)[0]) for n, t in zip(names, types) if isinstance(t, Arrow)}
        body = random_higher_order_poly(rng, base, funs, depth=1, terms=3)
        per_symbol[f] = LambdaPoly(tuple(zip(names, types)), body)
    return Interpretation(per_symbol, setting)


def random_env_values(rng: random.Random, env: Mapping[str, SimpleType], max_value: int = 12):
    var_val: dict[str, int] = {}
    fun_val: dict[str, OracleFunction] = {}
    for n, t in env.items():
        if isinstance(t, Arrow):
            fun_val[n] = random_function(rng, len(split_type(t)[0]))
        else:
            var_val[n] = rng.randint(0, max_value)
    return var_val, fun_val


def evaluate_term(t: Term, J: Interpretation, env, var_val, fun_val) -> int:
    value = interpret(t, J, env)
    assert isinstance(value, Poly)
    return eval_numeric(value, {}, var_val, fun_val)


# ---------------------------------------------------------------------------
# reference one-step rewriter (tests only)


def _loose(t: Term, depth: int = 0) -> bool:
    """Does ``t`` contain a bound variable pointing outside it?"""
    match t:
        case BVar(i):
            return i >= depth
        case Abs(_, body):
            return _loose(body, depth + 1)
        case App(f, a):
            return _loose(f, depth) or _loose(a, depth)
        case FunApp(_, args):
            return any(_loose(a, depth) for a in args)
    return False


def match(pattern: Term, term: Term, subst: dict[str, Term] | None = None) -> dict[str, Term] | None:
    """Syntactic matching of a rule lhs (free variables only at non-applied positions)."""
    subst = dict(subst or {})
    match pattern:
        case Var(x):
            if _loose(term):
                return None
            if x in subst:
                return subst if subst[x] == term else None
            subst[x] = term
            return subst
        case FunApp(f, ps):
            if not isinstance(term, FunApp) or term.symbol != f or len(term.args) != len(ps):
                return None
            for p, a in zip(ps, term.args):
                subst = match(p, a, subst)
                if subst is None:
                    return None
            return subst
        case App(pf, pa):
            if not isinstance(term, App):
                return None
            subst = match(pf, term.fun, subst)
            return None if subst is None else match(pa, term.arg, subst)
        case Abs(ty, body):
            if not isinstance(term, Abs) or term.binder_type != ty:
                return None
            return match(body, term.body, subst)
        case BVar():
            return subst if term == pattern else None
    return None


def reducts(t: Term, rules: list[Rule]) -> Iterator[Term]:
    """All terms reachable in one rule step or one beta step."""
    from hopoterm.core import substitute

    for r in rules:
        s = match(r.lhs, t)
        if s is not None:
            yield substitute(r.rhs, s)
    if isinstance(t, App) and isinstance(t.fun, Abs):
        yield beta(t)
    match t:
        case App(f, a):
            for f2 in reducts(f, rules):
                yield App(f2, a)
            for a2 in reducts(a, rules):
                yield App(f, a2)
        case Abs(ty, body, hint):
            for b2 in reducts(body, rules):
                yield Abs(ty, b2, hint)
        case FunApp(g, args):
            for i, a in enumerate(args):
                for a2 in reducts(a, rules):
                    yield FunApp(g, args[:i] + (a2,) + args[i + 1:])
