"""Proof search: iterated rule removal for AFSs, and one-shot orientation of constraint problems."""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .constraints import NONSTRICT, STRICT, OrderingConstraint, Oriented, ParamConstraint
from .core import AFS, Arrow, Setting, Signature, SimpleType, Term, free_vars, split_type, symbols_of
from .interp import (
    DEFAULT_COMBINATION_LIMIT,
    Interpretation,
    drop_left_max,
    interpret_pair,
    parametric_interpretation,
)
from .oracle import random_assignment
from .parse import ConstraintKind, ConstraintProblem
from .poly import LambdaPoly, Monomial, Param, eval_numeric, format_monomial
from .simplify import SimplifyResult, StuckConstraint, Timeout, make_strictness_bits, simplify_to_ground
from .solve import SolverConfig, SolverTimeout, Unsat, Valuation, solve

YES = "YES"
MAYBE = "MAYBE"


class SoundnessViolation(AssertionError):
    """The numeric tripwire found a claimed orientation that does not hold."""


@dataclass
class ProverConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    timeout: float = 60.0  # seconds for the whole proof
    combination_limit: int = DEFAULT_COMBINATION_LIMIT
    shortcut: bool = False  # single-monomial special case of clause 7
    samples: int = 500  # numeric re-checks per oriented rule
    seed: int = 0
    record: bool = False  # keep the simplification trace


@dataclass
class Round:
    number: int
    shape: str  # "default" or "fallback"
    interpretation: Interpretation  # with the valuation substituted
    valuation: Valuation
    strict: list[int]
    remaining: list[int]
    trace: str = ""


@dataclass
class ProofOutcome:
    verdict: str
    mode: str  # "rule-removal" or "orient"
    setting: Setting
    rounds: list[Round] = field(default_factory=list)
    items: list[str] = field(default_factory=list)  # printed rules or constraints, by index
    diagnostic: str = ""
    timed_out: bool = False


# ---------------------------------------------------------------------------
# numeric check of a found interpretation


def _fun_arities(names: set[str], env: Mapping[str, SimpleType]) -> tuple[list[str], dict[str, int]]:
    base, funs = [], {}
    for x in sorted(names):
        ty = env[x]
        if isinstance(ty, Arrow):
            funs[x] = len(split_type(ty)[0])
        else:
            base.append(x)
    return base, funs


def check_orientation(
    lhs: Term,
    rhs: Term,
    J: Interpretation,
    env: Mapping[str, SimpleType],
    strict: bool,
    samples: int = 500,
    rng: random.Random | None = None,
) -> bool:
    """Sample ``[lhs] >= [rhs] (+1)`` under random values and weakly monotonic functions."""
    rng = rng or random.Random(0)
    left, right = interpret_pair(lhs, rhs, J, env)
    names = left.names() | right.names()
    base, funs = _fun_arities(names & (free_vars(lhs) | free_vars(rhs)), env)
    extra = sorted(names - set(base) - set(funs))  # fresh variables from functional sides
    for _ in range(samples):
        var_val, fun_val = random_assignment(rng, base + extra, funs)
        if eval_numeric(left, {}, var_val, fun_val) < eval_numeric(right, {}, var_val, fun_val) + int(strict):
            return False
    return True


# ---------------------------------------------------------------------------
# one attempt: shapes -> constraints -> ground system -> valuation


@dataclass
class _Attempt:
    valuation: Valuation | None
    interpretation: Interpretation
    bits: list[Param]
    diagnostic: str = ""
    timed_out: bool = False
    trace: str = ""
    final: bool = False  # no point in trying another shape


def _restrict(sig: Signature, terms: Sequence[Term]) -> Signature:
    used: set[str] = set()
    for t in terms:
        used |= symbols_of(t)
    return Signature({f: d for f, d in sig.symbols.items() if f in used}, sig.base_types)


def _attempt(
    items: Sequence[tuple[Term, Term, object]],
    sig: Signature,
    env: Mapping[str, SimpleType],
    setting: Setting,
    fallback: bool,
    cfg: ProverConfig,
    budget: float,
    subterm_constants=(),
) -> _Attempt:
    deadline = time.monotonic() + budget
    J = parametric_interpretation(
        _restrict(sig, [t for l, r, _ in items for t in (l, r)]),
        setting,
        fallback=fallback,
        subterm_constants=subterm_constants,
        combination_limit=cfg.combination_limit,
    )
    constraints: list[OrderingConstraint | ParamConstraint] = []
    ordering = []
    for lhs, rhs, strict in items:
        left, right = interpret_pair(lhs, rhs, J, env)
        ordering.append(OrderingConstraint(drop_left_max(left), right, strict))
    bits: list[Param] = []
    if any(isinstance(c.strict, Oriented) for c in ordering):
        ordering, total, bits = make_strictness_bits(ordering)
        constraints.append(total)
    constraints = list(ordering) + constraints + list(J.side_constraints)
    try:
        simplified: SimplifyResult = simplify_to_ground(
            constraints, shortcut=cfg.shortcut, record=cfg.record, deadline=deadline
        )
    except StuckConstraint as e:
        return _Attempt(None, J, bits, f"stuck: {e}")
    except Timeout as e:
        return _Attempt(None, J, bits, str(e), timed_out=True)
    solver_cfg = SolverConfig(**{**cfg.solver.__dict__, "timeout": max(deadline - time.monotonic(), 0.001)})
    try:
        result = solve(simplified.constraints, solver_cfg, extra_params=J.params + bits)
    except SolverTimeout as e:
        return _Attempt(None, J, bits, str(e), timed_out=True)
    trace = simplified.dump() if cfg.record else ""
    if isinstance(result, Unsat):
        external_only = cfg.solver.backend == "dimacs" and not cfg.solver.sat_solver
        reason = result.reason if external_only else f"unsatisfiable: {result.reason}"
        return _Attempt(None, J, bits, reason, trace=trace, final=external_only)
    for p, v in simplified.fixings.items():
        result.assignment[p] = v
    return _Attempt(result, J, bits, trace=trace)


def _shape_passes(items, sig, env, setting, cfg, budget, subterm_constants=()):
    """Try the default shape, then the fallback shape; return the first success or the last failure."""
    last = None
    timed_out = False
    for fallback in (False, True):
        att = _attempt(items, sig, env, setting, fallback, cfg, budget / 2, subterm_constants)
        timed_out |= att.timed_out
        if att.valuation is not None:
            return att, "fallback" if fallback else "default", timed_out
        last = att
        if att.final:
            break
    return last, None, timed_out


# ---------------------------------------------------------------------------
# entry points


def prove_rule_removal(afs: AFS, cfg: ProverConfig | None = None) -> ProofOutcome:
    cfg = cfg or ProverConfig()
    rng = random.Random(cfg.seed)
    out = ProofOutcome(MAYBE, "rule-removal", Setting.RULE_REMOVAL, items=[str(r) for r in afs.rules])
    remaining = list(range(len(afs.rules)))
    deadline = time.monotonic() + cfg.timeout
    while remaining:
        budget = max(deadline - time.monotonic(), 0.0) / len(remaining)
        if budget <= 0:
            out.timed_out = True
            out.diagnostic = "out of time"
            return out
        items = [(afs.rules[i].lhs, afs.rules[i].rhs, Oriented()) for i in remaining]
        att, shape, timed_out = _shape_passes(items, afs.signature, afs.variables, Setting.RULE_REMOVAL, cfg, budget)
        if shape is None:
            out.timed_out = timed_out
            out.diagnostic = f"round {len(out.rounds) + 1}: {att.diagnostic}"
            return out
        J = att.interpretation.substitute(att.valuation.assignment)
        strict = [i for i, o in zip(remaining, att.bits) if att.valuation.get(o) == 1]
        for i in remaining:
            rule = afs.rules[i]
            if not check_orientation(rule.lhs, rule.rhs, J, afs.variables, i in strict, cfg.samples, rng):
                raise SoundnessViolation(f"numeric check failed for rule {i}: {rule}")
        remaining = [i for i in remaining if i not in strict]
        out.rounds.append(Round(len(out.rounds) + 1, shape, J, att.valuation, strict, list(remaining), att.trace))
        if not strict:
            out.diagnostic = "no rule could be removed"
            return out
    out.verdict = YES
    return out


_KIND = {ConstraintKind.STRICT: STRICT, ConstraintKind.WEAK: NONSTRICT}


def orient(problem: ConstraintProblem, cfg: ProverConfig | None = None) -> ProofOutcome:
    """Find one interpretation satisfying every constraint; ``>?`` ones strictly at least once."""
    cfg = cfg or ProverConfig()
    rng = random.Random(cfg.seed)
    out = ProofOutcome(MAYBE, "orient", problem.setting, items=[str(c) for c in problem.constraints])
    kinds = [c.kind for c in problem.constraints]
    if not any(k in (ConstraintKind.STRICT, ConstraintKind.ORIENTED) for k in kinds):
        out.diagnostic = "nothing to orient strictly: no '>' or '>?' constraint"
        return out
    items = [(c.lhs, c.rhs, _KIND.get(c.kind, Oriented())) for c in problem.constraints]
    att, shape, timed_out = _shape_passes(
        items, problem.signature, problem.variables, problem.setting, cfg, cfg.timeout, problem.subterm_constants
    )
    if shape is None:
        out.diagnostic = att.diagnostic
        out.timed_out = timed_out
        return out
    J = att.interpretation.substitute(att.valuation.assignment)
    oriented = [i for i, k in enumerate(kinds) if k is ConstraintKind.ORIENTED]
    strict = [i for i, k in enumerate(kinds) if k is ConstraintKind.STRICT]
    strict += [i for i, o in zip(oriented, att.bits) if att.valuation.get(o) == 1]
    strict.sort()
    for i, c in enumerate(problem.constraints):
        if not check_orientation(c.lhs, c.rhs, J, problem.variables, i in strict, cfg.samples, rng):
            raise SoundnessViolation(f"numeric check failed for constraint {i}: {c}")
    out.rounds.append(Round(1, shape, J, att.valuation, strict, [], att.trace))
    out.verdict = YES
    return out


# ---------------------------------------------------------------------------
# output


def _binder_position(m: Monomial, binders: list[str]) -> tuple:
    from .poly import atom_head

    return tuple(binders.index(h) if (h := atom_head(a)) in binders else len(binders) for a in m.atoms)


def render_value(v: LambdaPoly) -> str:
    """``Lam[f n]. f(0) + 2*n + n*f(n)``: by degree and binder position, constant last."""
    names = [n for n, _ in v.binders]
    monos = sorted(
        v.body.monomials(),
        key=lambda m: (not m.atoms, len(m.atoms), _binder_position(m, names), m.params),
    )
    body = " + ".join(format_monomial(m, "*") for m in monos) if monos else "0"
    if not v.binders:
        return body
    return f"Lam[{' '.join(names)}]. {body}"


def render_interpretation(J: Interpretation) -> list[str]:
    return [f"J({f}) = {render_value(v)}" for f, v in J.per_symbol.items()]


def render_proof(p: ProofOutcome) -> str:
    if p.verdict == YES and not p.items:
        return "YES (no rules)\n"
    lines = [p.verdict]
    what = "rules" if p.mode == "rule-removal" else "constraints"
    for r in p.rounds:
        lines.append(f"round {r.number} ({r.shape} shapes, {p.setting}):")
        lines.extend("  " + s for s in render_interpretation(r.interpretation))
        lines.append(f"  strictly oriented {what}:")
        lines.extend(f"    [{i}] {p.items[i]}" for i in r.strict)
        if not r.strict:
            lines.append("    (none)")
        if p.mode == "rule-removal":
            lines.append(f"  remaining {what}: {len(r.remaining)}")
    if p.diagnostic:
        lines.append(("timeout: " if p.timed_out else "") + p.diagnostic)
    return "\n".join(lines) + "\n"


def proof_to_dict(p: ProofOutcome) -> dict:
    return {
        "verdict": p.verdict,
        "mode": p.mode,
        "setting": str(p.setting),
        "items": p.items,
        "rounds": [
            {
                "round": r.number,
                "shape": r.shape,
                "interpretation": {f: render_value(v) for f, v in r.interpretation.per_symbol.items()},
                "valuation": r.valuation.by_name(),
                "strict": r.strict,
                "remaining": r.remaining,
            }
            for r in p.rounds
        ],
        "diagnostic": p.diagnostic,
        "timed_out": p.timed_out,
    }


def proof_to_json(p: ProofOutcome) -> str:
    return json.dumps(proof_to_dict(p), indent=2, sort_keys=False) + "\n"
