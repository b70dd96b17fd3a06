"""Bounded search for parameter values satisfying ground constraints.

Both sides of a ground constraint are polynomials with natural coefficients, so
each side is monotone in every parameter.  With interval bounds ``[lo, hi]`` per
parameter, ``lhs(hi) < rhs(lo)`` refutes a constraint, and bounds of parameters
occurring on one side only can be tightened.  The search branches on strictness
bits first (trying 1 first), then on the most frequent parameters.
"""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .constraints import ParamConstraint
from .poly import MissingAssignment, Param, ParamKind


@dataclass
class SolverConfig:
    max_coefficient: int = 3
    timeout: float | None = 60.0  # seconds
    backend: str = "internal"  # "internal" or "dimacs"
    split_bound: int | None = None  # bound of fresh split parameters; None means max_coefficient
    sat_solver: str | None = None  # external command for the dimacs backend
    dimacs_out: str | None = None  # where to write the CNF for the dimacs backend

    def __post_init__(self) -> None:
        if self.max_coefficient < 1:
            raise ValueError("max_coefficient must be at least 1")
        if self.backend not in ("internal", "dimacs"):
            raise ValueError(f"unknown backend {self.backend!r}")

    def bound(self, p: Param) -> int:
        if p.kind is ParamKind.BIT:
            return 1
        if p.kind is ParamKind.SPLIT and self.split_bound is not None:
            return self.split_bound
        return self.max_coefficient


@dataclass
class Valuation:
    assignment: dict[Param, int]

    def __getitem__(self, p: Param) -> int:
        return self.assignment[p]

    def get(self, p: Param, default: int = 0) -> int:
        return self.assignment.get(p, default)

    def by_name(self) -> dict[str, int]:
        return {p.name: v for p, v in sorted(self.assignment.items(), key=lambda kv: kv[0].sort_key)}


@dataclass(frozen=True)
class Unsat:
    reason: str = "no solution within the parameter bounds"


class SolverTimeout(Exception):
    pass


def params_of(constraints: Iterable[ParamConstraint]) -> list[Param]:
    seen: set[Param] = set()
    for c in constraints:
        seen |= c.params()
    return sorted(seen, key=lambda p: p.sort_key)


def verify(v: Valuation | Mapping[Param, int], constraints: Iterable[ParamConstraint]) -> bool:
    """Check every constraint numerically; raises ``MissingAssignment`` on uncovered parameters."""
    assignment = v.assignment if isinstance(v, Valuation) else v
    return all(c.holds(assignment) for c in constraints)


# ---------------------------------------------------------------------------
# internal backend

Side = list[tuple[int, tuple[int, ...]]]  # (coefficient, parameter indices)


def _compile(p, index: Mapping[Param, int]) -> Side:
    return [(m.coeff, tuple(index[q] for q in m.params)) for m in p.monomials()]


def _eval(side: Side, vals: list[int]) -> int:
    total = 0
    for coeff, idxs in side:
        v = coeff
        for i in idxs:
            v *= vals[i]
            if not v:
                break
        total += v
    return total


def _eval_with(side: Side, vals: list[int], var: int, value: int) -> int:
    total = 0
    for coeff, idxs in side:
        v = coeff
        for i in idxs:
            v *= value if i == var else vals[i]
            if not v:
                break
        total += v
    return total


class _Search:
    def __init__(self, constraints: Sequence[ParamConstraint], params: list[Param], cfg: SolverConfig, deadline):
        self.params = params
        index = {p: i for i, p in enumerate(params)}
        self.cons = [(_compile(c.lhs, index), _compile(c.rhs, index)) for c in constraints]
        self.lvars = [{i for _, idxs in l for i in idxs} for l, _ in self.cons]
        self.rvars = [{i for _, idxs in r for i in idxs} for _, r in self.cons]
        self.watch: list[list[int]] = [[] for _ in params]
        for ci in range(len(self.cons)):
            for i in self.lvars[ci] | self.rvars[ci]:
                self.watch[i].append(ci)
        counts = Counter(i for ci in range(len(self.cons)) for i in self.lvars[ci] | self.rvars[ci])
        self.order = sorted(
            range(len(params)),
            key=lambda i: (params[i].kind is not ParamKind.BIT, -counts[i], params[i].sort_key),
        )
        self.lo = [0] * len(params)
        self.hi = [cfg.bound(p) for p in params]
        self.deadline = deadline
        self.nodes = 0

    def propagate(self, changed: Iterable[int] | None) -> bool:
        lo, hi = self.lo, self.hi
        queue = deque(range(len(self.cons)) if changed is None else {ci for i in changed for ci in self.watch[i]})
        queued = set(queue)
        while queue:
            ci = queue.popleft()
            queued.discard(ci)
            left, right = self.cons[ci]
            lmax, rmin = _eval(left, hi), _eval(right, lo)
            if lmax < rmin:
                return False
            moved = []
            for i in self.rvars[ci] - self.lvars[ci]:
                if lo[i] == hi[i]:
                    continue
                v = hi[i]
                while v > lo[i] and _eval_with(right, lo, i, v) > lmax:
                    v -= 1
                if v != hi[i]:
                    hi[i] = v
                    moved.append(i)
            for i in self.lvars[ci] - self.rvars[ci]:
                if lo[i] == hi[i]:
                    continue
                v = lo[i]
                while v < hi[i] and _eval_with(left, hi, i, v) < rmin:
                    v += 1
                if v != lo[i]:
                    lo[i] = v
                    moved.append(i)
            for i in moved:
                for cj in self.watch[i]:
                    if cj not in queued:
                        queued.add(cj)
                        queue.append(cj)
        return True

    def run(self) -> list[int] | None:
        if not self.propagate(None):
            return None
        return self._branch()

    def _branch(self) -> list[int] | None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise SolverTimeout("parameter search ran out of time")
        var = next((i for i in self.order if self.lo[i] < self.hi[i]), None)
        if var is None:
            vals = list(self.lo)
            return vals if all(_eval(l, vals) >= _eval(r, vals) for l, r in self.cons) else None
        values = range(self.lo[var], self.hi[var] + 1)
        if self.params[var].kind is ParamKind.BIT:
            values = reversed(values)
        saved_lo, saved_hi = list(self.lo), list(self.hi)
        for v in values:
            self.lo[var] = self.hi[var] = v
            if self.propagate([var]):
                found = self._branch()
                if found is not None:
                    return found
            self.lo[:], self.hi[:] = saved_lo, saved_hi
        return None


def solve(constraints: Sequence[ParamConstraint], cfg: SolverConfig | None = None, extra_params: Iterable[Param] = ()) -> Valuation | Unsat:
    """Find a valuation within the bounds, or prove there is none; raises ``SolverTimeout``.

    Parameters in ``extra_params`` that occur in no constraint are set to 0.
    """
    cfg = cfg or SolverConfig()
    deadline = None if cfg.timeout is None else time.monotonic() + cfg.timeout
    params = params_of(constraints)
    if cfg.backend == "dimacs":
        from .dimacs import solve_external

        result = solve_external(constraints, cfg)
    else:
        vals = _Search(constraints, params, cfg, deadline).run()
        result = Unsat() if vals is None else Valuation(dict(zip(params, vals)))
    if isinstance(result, Valuation):
        for p in extra_params:
            result.assignment.setdefault(p, 0)
        if not verify(result, constraints):
            raise AssertionError("solver returned a valuation that fails verification")
    return result


def brute_force(constraints: Sequence[ParamConstraint], cfg: SolverConfig | None = None) -> Valuation | Unsat:
    """Exhaustive enumeration; only for tiny systems and tests."""
    import itertools

    cfg = cfg or SolverConfig()
    params = params_of(constraints)
    for vals in itertools.product(*(range(cfg.bound(p) + 1) for p in params)):
        v = dict(zip(params, vals))
        if verify(v, constraints):
            return Valuation(v)
    return Unsat()


__all__ = [
    "MissingAssignment",
    "SolverConfig",
    "SolverTimeout",
    "Unsat",
    "Valuation",
    "brute_force",
    "params_of",
    "solve",
    "verify",
]
