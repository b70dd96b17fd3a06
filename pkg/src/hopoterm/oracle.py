"""Random weakly monotonic functions and polynomials for numeric checking.

Every function built here is a polynomial (possibly with ``max``) with constant
natural coefficients, hence weakly monotonic in all its arguments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .poly import Param, ParamKind, Poly, eval_numeric, format_poly, make_max


@dataclass(frozen=True)
class OracleFunction:
    """A concrete weakly monotonic function ``N^k -> N`` given by a polynomial in ``x0..x(k-1)``."""

    arity: int
    body: Poly

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise TypeError(f"expected {self.arity} arguments, got {len(args)}")
        return eval_numeric(self.body, {}, {f"x{i}": a for i, a in enumerate(args)}, {})

    def __str__(self) -> str:
        return f"Lam[{' '.join(f'x{i}' for i in range(self.arity))}]. {format_poly(self.body)}"


def random_monomial(rng: random.Random, variables: Sequence[str], max_degree: int = 2, max_coeff: int = 3) -> Poly:
    m = Poly.const(rng.randint(1, max_coeff))
    for _ in range(rng.randint(0, max_degree)):
        if variables:
            m = m * Poly.var(rng.choice(list(variables)))
    return m


def random_oracle_poly(rng: random.Random, variables: Sequence[str], terms: int = 3, allow_max: bool = True) -> Poly:
    p = Poly.const(rng.randint(0, 2))
    for _ in range(rng.randint(0, terms)):
        p = p + random_monomial(rng, variables)
    if allow_max and variables and rng.random() < 0.25:
        p = p + make_max(random_monomial(rng, variables), random_monomial(rng, variables))
    return p


def random_function(rng: random.Random, arity: int) -> OracleFunction:
    return OracleFunction(arity, random_oracle_poly(rng, [f"x{i}" for i in range(arity)]))


def dominating_function(rng: random.Random, f: OracleFunction) -> OracleFunction:
    """A function ``g`` with ``g >= f`` pointwise."""
    return OracleFunction(f.arity, f.body + random_oracle_poly(rng, [f"x{i}" for i in range(f.arity)], terms=2))


def random_higher_order_poly(
    rng: random.Random,
    base_vars: Sequence[str],
    fun_vars: dict[str, int],
    params: Sequence[Param] = (),
    depth: int = 2,
    terms: int = 3,
) -> Poly:
    """A random polynomial over base variables, functional variables (name -> arity) and parameters."""
    p = Poly.const(rng.randint(0, 3))
    for _ in range(rng.randint(1, terms)):
        m = Poly.const(rng.randint(1, 3))
        for _ in range(rng.randint(0, 2)):
            choice = rng.random()
            if params and choice < 0.3:
                m = m * Poly.param(rng.choice(list(params)))
            elif fun_vars and depth > 0 and choice < 0.6:
                name = rng.choice(sorted(fun_vars))
                args = [random_higher_order_poly(rng, base_vars, fun_vars, params, depth - 1, 2) for _ in range(fun_vars[name])]
                m = m * Poly.call(name, *args)
            elif base_vars:
                m = m * Poly.var(rng.choice(list(base_vars)))
        p = p + m
    return p


def random_params(rng: random.Random, params, bound: int = 3) -> dict[Param, int]:
    return {p: rng.randint(0, 1 if p.kind is ParamKind.BIT else bound) for p in params}


def random_assignment(
    rng: random.Random, base_vars: Sequence[str], fun_vars: dict[str, int], max_value: int = 20
) -> tuple[dict[str, int], dict[str, OracleFunction]]:
    var_val = {x: rng.randint(0, max_value) for x in base_vars}
    fun_val = {f: random_function(rng, k) for f, k in fun_vars.items()}
    return var_val, fun_val
