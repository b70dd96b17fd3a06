"""Reduce polynomial inequalities with variables to inequalities over parameters.

Each constraint ``lhs >= rhs`` is read as "for all variables".  The clauses below
replace a constraint by a set of constraints that together imply it:

1. trivial:      cancel identical monomials; drop ``p >= 0``
2. zero split:   ``0 >= p1 + .. + pn`` becomes ``0 >= pi``; ``0 >= a`` fixes ``a := 0``
3. max split:    ``P >= Q[max(r, s)]`` becomes ``P >= Q[r]`` and ``P >= Q[s]``
4. group split:  split off the monomials that have some variable ``x`` as a component
5. divide:       remove a component shared by every monomial
6. match:        ``s*F(p..) >= s*F(q..)`` becomes ``s*p >= s*q`` argumentwise
7. abstract:     ``sum r_i*P_i >= sum s_j*Q_j`` over one spine of functional
                 variables, via fresh parameters ``e_ij``

The pipeline tries them in the fixed order 3, 1, 2, 4, 5, 6, 7.
"""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .constraints import (
    NONSTRICT,
    Bit,
    MaxOnLeft,
    OrderingConstraint,
    Oriented,
    ParamConstraint,
)
from .poly import (
    FunApp,
    Max,
    Monomial,
    Param,
    ParamKind,
    Poly,
    _natural_key,
    atom_head,
    make_max,
)


class StuckConstraint(Exception):
    """No clause applies to a constraint that still has variables."""

    def __init__(self, constraint: OrderingConstraint):
        super().__init__(f"no simplification applies to {constraint}")
        self.constraint = constraint


class NoOrientable(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Fix:
    """Result of clause 2 on ``0 >= c*a``: the parameter ``a`` must be 0."""

    param: Param


ClauseResult = list[OrderingConstraint] | Fix | None


def _c(lhs: Poly, rhs: Poly, origin: str = "") -> OrderingConstraint:
    return OrderingConstraint(lhs, rhs, NONSTRICT, origin)


def make_strictness_bits(
    constraints: Sequence[OrderingConstraint], prefix: str = "o"
) -> tuple[list[OrderingConstraint], ParamConstraint, list[Param]]:
    """Give every ``Oriented`` constraint a fresh 0/1 bit; demand the bits sum to >= 1."""
    out: list[OrderingConstraint] = []
    bits: list[Param] = []
    for c in constraints:
        if isinstance(c.strict, Oriented):
            o = Param(f"{prefix}{len(bits) + 1}", ParamKind.BIT)
            bits.append(o)
            c = OrderingConstraint(c.lhs, c.rhs, Bit(o), c.origin)
        out.append(c)
    if not bits:
        raise NoOrientable("no constraint may be oriented strictly")
    total = Poly()
    for o in bits:
        total = total + Poly.param(o)
    return out, ParamConstraint(total, Poly.const(1)), bits


# ---------------------------------------------------------------------------
# helpers


def _scalar(m: Monomial) -> Poly:
    return Poly({(m.params, ()): m.coeff})


def _from_monos(monos: Iterable[Monomial]) -> Poly:
    return Poly.from_monomials(monos)


def _has_component(m: Monomial, name: str) -> bool:
    return any(atom_head(a) == name for a in m.atoms)


def _first_max(p: Poly) -> Max | None:
    for a in p.atoms():
        if isinstance(a, Max):
            return a
    for a in p.atoms():
        if isinstance(a, FunApp):
            for arg in a.args:
                found = _first_max(arg)
                if found is not None:
                    return found
    return None


def _replace_atom(p: Poly, target: Max, value: Poly) -> Poly:
    def fn(a):
        if a == target:
            return value
        if isinstance(a, Max):
            return make_max(a.left, a.right)
        return Poly.atom(a)

    return p.map_atoms(fn)


def measure(c: OrderingConstraint) -> tuple[int, int, int]:
    """(max atoms, variable occurrences, size): decreases along productive steps."""
    maxes = occurrences = size = 0
    for p in (c.lhs, c.rhs):
        for a in p.all_atoms():
            if isinstance(a, Max):
                maxes += 1
            else:
                occurrences += 1
        for m in p.monomials():
            size += 1 + len(m.params) + len(m.atoms) + m.coeff.bit_length()
    return (maxes, occurrences, size)


# ---------------------------------------------------------------------------
# clauses


def clause_max_split(c: OrderingConstraint) -> ClauseResult:
    """Clause 3: replace one ``max(r, s)`` (every occurrence of it) by ``r`` and by ``s``."""
    if _first_max(c.lhs) is not None:
        raise MaxOnLeft(str(c))
    target = _first_max(c.rhs)
    if target is None:
        return None
    return [_c(c.lhs, _replace_atom(c.rhs, target, side), c.origin) for side in (target.left, target.right)]


def clause_trivial(c: OrderingConstraint) -> ClauseResult:
    """Clause 1: cancel identical monomials and drop ``p >= 0``."""
    left, right = c.lhs.as_dict(), c.rhs.as_dict()
    changed = False
    for key in set(left) & set(right):
        common = min(left[key], right[key])
        left[key] -= common
        right[key] -= common
        changed = True
    lhs, rhs = Poly(left), Poly(right)
    if rhs.is_zero():
        return []
    if not changed:
        return None
    return [_c(lhs, rhs, c.origin)]


def clause_zero_split(c: OrderingConstraint) -> ClauseResult:
    """Clause 2: split ``0 >= sum`` into summands; ``0 >= k*a`` fixes ``a := 0``."""
    if not c.lhs.is_zero():
        return None
    monos = c.rhs.monomials()
    if len(monos) > 1:
        return [_c(Poly(), _from_monos([m]), c.origin) for m in monos]
    if len(monos) == 1:
        m = monos[0]
        if not m.atoms and len(m.params) == 1:
            return Fix(m.params[0])
    return None


def _components(c: OrderingConstraint) -> list[str]:
    names = {atom_head(a) for p in (c.lhs, c.rhs) for a in p.atoms()} - {None}
    return sorted(names, key=_natural_key)


def clause_group_split(c: OrderingConstraint, on: str | None = None) -> ClauseResult:
    """Clause 4: split on the smallest variable that is a component of some, not all, monomials.

    ``on`` forces the variable to split on.  The monomials without the variable
    come first in the result.
    """
    monos = [(side, m) for side, p in ((0, c.lhs), (1, c.rhs)) for m in p.monomials()]
    for name in [on] if on is not None else _components(c):
        inside = [_has_component(m, name) for _, m in monos]
        if any(inside) and not all(inside):
            groups = []
            for want in (False, True):
                chosen = [sm for sm, flag in zip(monos, inside) if flag == want]
                lhs = _from_monos(m for side, m in chosen if side == 0)
                rhs = _from_monos(m for side, m in chosen if side == 1)
                groups.append(_c(lhs, rhs, c.origin))
            return groups
    return None


def clause_divide(c: OrderingConstraint) -> ClauseResult:
    """Clause 5: divide out a variable or an identical functional application present in all monomials."""
    monos = c.lhs.monomials() + c.rhs.monomials()
    if not monos:
        return None
    shared = Counter(monos[0].atoms)
    for m in monos[1:]:
        shared &= Counter(m.atoms)
    if not shared:
        return None
    target = min(shared, key=lambda a: a.sort_key)

    def divide(p: Poly) -> Poly:
        out = []
        for m in p.monomials():
            atoms = list(m.atoms)
            atoms.remove(target)
            out.append(Monomial(m.coeff, m.params, tuple(atoms)))
        return _from_monos(out)

    return [_c(divide(c.lhs), divide(c.rhs), c.origin)]


def _spine(m: Monomial) -> tuple[str, ...] | None:
    """Heads of the functional applications of ``m``, or None if ``m`` has another atom."""
    if not m.atoms or not all(isinstance(a, FunApp) for a in m.atoms):
        return None
    return tuple(a.fvar for a in m.atoms)


def _match_args(scalar: Poly, left: Monomial, right: Monomial, origin: str) -> list[OrderingConstraint]:
    out = []
    for p_atom, q_atom in zip(left.atoms, right.atoms):
        assert isinstance(p_atom, FunApp) and isinstance(q_atom, FunApp)
        for p, q in zip(p_atom.args, q_atom.args):
            out.append(_c(scalar * p, scalar * q, origin))
    return out


def clause_funapp_match(c: OrderingConstraint) -> ClauseResult:
    """Clause 6: ``s*x1(p..)*..*xn(p..) >= s*x1(q..)*..*xn(q..)`` becomes ``s*p >= s*q`` argumentwise."""
    lm, rm = c.lhs.monomials(), c.rhs.monomials()
    if len(lm) != 1 or len(rm) != 1:
        return None
    left, right = lm[0], rm[0]
    spine = _spine(left)
    if spine is None or spine != _spine(right) or _scalar(left) != _scalar(right):
        return None
    return _match_args(_scalar(left), left, right, c.origin)


SplitNamer = Callable[[int, int], Param]


def split_namer(group: int) -> SplitNamer:
    """Names of the fresh parameters of the ``group``-th abstraction: e_ij, then k_ij, then e<g>_ij."""
    prefix = {1: "e", 2: "k"}.get(group, f"e{group}_")
    return lambda i, j: Param(f"{prefix}{i}_{j}", ParamKind.SPLIT)


def clause_funapp_abstract(c: OrderingConstraint, fresh: SplitNamer | None = None, shortcut: bool = False) -> ClauseResult:
    """Clause 7: distribute the left monomials over the right ones with fresh weights ``e_ij``.

    Emits ``r_i >= sum_j e_ij``, ``sum_i e_ij >= s_j`` and, through clause 6,
    ``e_ij * p >= e_ij * q`` for the arguments.  With ``shortcut`` and a single
    left monomial, ``e_1j`` is ``s_j`` itself.
    """
    lm, rm = c.lhs.monomials(), c.rhs.monomials()
    if not lm or not rm:
        return None
    spine = _spine(lm[0])
    if spine is None or any(_spine(m) != spine for m in lm + rm):
        return None
    fresh = fresh or split_namer(1)
    out: list[OrderingConstraint] = []
    if shortcut and len(lm) == 1:
        r = _scalar(lm[0])
        total = Poly()
        for q in rm:
            total = total + _scalar(q)
        out.append(_c(r, total, c.origin))
        for q in rm:
            out.extend(_match_args(_scalar(q), lm[0], q, c.origin))
        return out
    e = [[Poly.param(fresh(i + 1, j + 1)) for j in range(len(rm))] for i in range(len(lm))]
    for i, p in enumerate(lm):
        total = Poly()
        for j in range(len(rm)):
            total = total + e[i][j]
        out.append(_c(_scalar(p), total, c.origin))
    for j, q in enumerate(rm):
        total = Poly()
        for i in range(len(lm)):
            total = total + e[i][j]
        out.append(_c(total, _scalar(q), c.origin))
    for i, p in enumerate(lm):
        for j, q in enumerate(rm):
            out.extend(_match_args(e[i][j], p, q, c.origin))
    return out


def group_split_all(c: OrderingConstraint) -> list[OrderingConstraint]:
    """Apply clause 4 exhaustively (and nothing else)."""
    todo, out = [c.folded()], []
    while todo:
        cur = todo.pop(0)
        res = clause_group_split(cur)
        if res is None:
            out.append(cur)
        else:
            todo[:0] = res
    return out


# ---------------------------------------------------------------------------
# pipeline

CLAUSES: tuple[tuple[str, int], ...] = (
    ("max-split", 3),
    ("trivial", 1),
    ("zero-split", 2),
    ("group-split", 4),
    ("divide", 5),
    ("funapp-match", 6),
    ("funapp-abstract", 7),
)


@dataclass
class Step:
    clause: str
    before: OrderingConstraint
    after: list[OrderingConstraint] | Fix


@dataclass
class SimplifyResult:
    constraints: list[ParamConstraint]
    fixings: dict[Param, int]
    steps: list[Step] = field(default_factory=list)
    split_params: list[Param] = field(default_factory=list)

    def dump(self) -> str:
        lines = []
        for s in self.steps:
            if isinstance(s.after, Fix):
                lines.append(f"[{s.clause}] {s.before}  ==>  {s.after.param} := 0")
            elif not s.after:
                lines.append(f"[{s.clause}] {s.before}  ==>  (removed)")
            else:
                lines.append(f"[{s.clause}] {s.before}  ==>  " + " ; ".join(str(a) for a in s.after))
        lines.append("-- ground system --")
        lines.extend(str(c) for c in self.constraints)
        for p, v in sorted(self.fixings.items(), key=lambda kv: kv[0].sort_key):
            lines.append(f"{p} := {v}")
        return "\n".join(lines)


class Timeout(Exception):
    pass


def simplify_to_ground(
    constraints: Iterable[OrderingConstraint | ParamConstraint],
    *,
    shortcut: bool = False,
    record: bool = False,
    deadline: float | None = None,
) -> SimplifyResult:
    """Run the clause pipeline to a fixpoint; raise ``StuckConstraint`` if it gets stuck."""
    live: deque[OrderingConstraint] = deque()
    for c in constraints:
        if isinstance(c, ParamConstraint):
            c = _c(c.lhs, c.rhs)
        live.append(c.folded())
    done: list[OrderingConstraint] = []
    fixings: dict[Param, int] = {}
    steps: list[Step] = []
    split_params: list[Param] = []
    groups = 0

    def namer(i: int, j: int) -> Param:
        p = split_namer(groups)(i, j)
        split_params.append(p)
        return p

    ops: dict[str, Callable[[OrderingConstraint], ClauseResult]] = {
        "max-split": clause_max_split,
        "trivial": clause_trivial,
        "zero-split": clause_zero_split,
        "group-split": clause_group_split,
        "divide": clause_divide,
        "funapp-match": clause_funapp_match,
        "funapp-abstract": lambda c: clause_funapp_abstract(c, namer, shortcut),
    }
    while live:
        if deadline is not None and time.monotonic() > deadline:
            raise Timeout("simplification ran out of time")
        c = live.popleft()
        if fixings:
            c = OrderingConstraint(c.lhs.subst_params(fixings), c.rhs.subst_params(fixings), NONSTRICT, c.origin)
        for name, _num in CLAUSES:
            if name == "funapp-abstract":
                groups += 1
            res = ops[name](c)
            if name == "funapp-abstract" and res is None:
                groups -= 1
            if res is None:
                continue
            if record:
                steps.append(Step(name, c, res))
            if isinstance(res, Fix):
                fixings[res.param] = 0
                back = [d for d in done if res.param in d.lhs.params() | d.rhs.params()]
                done = [d for d in done if d not in back]
                live.extendleft(reversed(back))
            else:
                live.extendleft(reversed(res))
            break
        else:
            if not (c.lhs.is_ground() and c.rhs.is_ground()):
                raise StuckConstraint(c)
            done.append(c)
    ground = [ParamConstraint(c.lhs, c.rhs) for c in done]
    return SimplifyResult(ground, fixings, steps, split_params)
