"""Inequality constraints between polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .poly import Max, Param, ParamKind, Poly, eval_numeric, format_poly


@dataclass(frozen=True)
class Strict:
    """``lhs >= rhs + 1``."""


@dataclass(frozen=True)
class NonStrict:
    """``lhs >= rhs``."""


@dataclass(frozen=True)
class Bit:
    """``lhs >= rhs + o`` for a 0/1 parameter ``o``."""

    param: Param


@dataclass(frozen=True)
class Oriented:
    """``lhs >= rhs``, and strict for at least one constraint of the group; becomes a ``Bit``."""


Strictness = Union[Strict, NonStrict, Bit, Oriented]
STRICT = Strict()
NONSTRICT = NonStrict()


class MaxOnLeft(ValueError):
    pass


def _extra(strict: Strictness) -> Poly:
    match strict:
        case Strict():
            return Poly.const(1)
        case Bit(p):
            return Poly.param(p)
    return Poly()


@dataclass(frozen=True)
class OrderingConstraint:
    """``lhs >= rhs (+ strictness)``, quantified over all variables."""

    lhs: Poly
    rhs: Poly
    strict: Strictness = NONSTRICT
    origin: str = ""

    def __post_init__(self) -> None:
        if any(isinstance(a, Max) for a in self.lhs.all_atoms()):
            raise MaxOnLeft(f"max atom on the left of {self}")
        if isinstance(self.strict, Bit) and self.strict.param.kind is not ParamKind.BIT:
            raise ValueError(f"{self.strict.param} is not a strictness bit")

    def folded(self) -> "OrderingConstraint":
        """The same constraint with the strictness moved into the rhs."""
        if isinstance(self.strict, Oriented):
            raise ValueError("oriented constraints need a strictness bit first")
        if isinstance(self.strict, NonStrict):
            return self
        return OrderingConstraint(self.lhs, self.rhs + _extra(self.strict), NONSTRICT, self.origin)

    def holds(self, param_val, var_val, fun_val) -> bool:
        c = self.folded()
        return eval_numeric(c.lhs, param_val, var_val, fun_val) >= eval_numeric(c.rhs, param_val, var_val, fun_val)

    def __str__(self) -> str:
        rhs = format_poly(self.rhs)
        match self.strict:
            case Strict():
                return f"{format_poly(self.lhs)} > {rhs}"
            case Bit(p):
                rhs = f"{p}" if self.rhs.is_zero() else f"{rhs} + {p}"
            case Oriented():
                return f"{format_poly(self.lhs)} ≥? {rhs}"
        return f"{format_poly(self.lhs)} ≥ {rhs}"


@dataclass(frozen=True)
class ParamConstraint:
    """``lhs >= rhs`` over parameters and constants only."""

    lhs: Poly
    rhs: Poly

    def __post_init__(self) -> None:
        if not (self.lhs.is_ground() and self.rhs.is_ground()):
            raise ValueError(f"parameter constraint with variables: {self}")

    def params(self) -> set[Param]:
        return self.lhs.params() | self.rhs.params()

    def holds(self, valuation: Mapping[Param, int]) -> bool:
        return eval_numeric(self.lhs, valuation, {}, {}) >= eval_numeric(self.rhs, valuation, {}, {})

    def __str__(self) -> str:
        return f"{format_poly(self.lhs)} ≥ {format_poly(self.rhs)}"


def at_least(p: Param | Poly, n: int = 1) -> ParamConstraint:
    lhs = p if isinstance(p, Poly) else Poly.param(p)
    return ParamConstraint(lhs, Poly.const(n))
