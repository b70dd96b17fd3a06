import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopoterm.core import Arrow, Base
from hopoterm.oracle import (
    OracleFunction,
    dominating_function,
    random_assignment,
    random_function,
    random_higher_order_poly,
    random_params,
)
from hopoterm.poly import (
    ArityOverflow,
    LambdaPoly,
    MissingAssignment,
    Param,
    ParamKind,
    Poly,
    eval_numeric,
    format_poly,
    lowest,
    make_max,
    parse_poly,
    zero_value,
)

NAT = Base("nat")
A = [Param(f"a{i}", ParamKind.COEFFICIENT) for i in range(1, 6)]
BASE = ["x", "y", "z"]
FUNS = {"F": 1, "G": 2}


def P(text: str) -> Poly:
    return parse_poly(text)


def test_like_terms_merge():
    assert P("2*x") + P("3*x") == P("5*x")


def test_product_distributes():
    assert P("a1*h + a2*t + a3") * P("a5") == P("a1*a5*h + a2*a5*t + a3*a5")


def test_zero_annihilates():
    assert (P("a1*h + F(x) + 3") * Poly.const(0)).is_zero()


def test_printing_uses_dot_notation():
    assert format_poly(P("a2*a6*t*F(a1*h + a2*t + a3)")) == "a2·a6·t·F(a3 + a1·h + a2·t)"
    assert format_poly(Poly()) == "0"


def test_constants_print_first():
    assert format_poly(P("x + 3 + a1")) == "3 + a1 + x"


def test_apply_lambda():
    f = LambdaPoly((("y", NAT),), P("F(y) + y"))
    assert f.apply([P("a3")]) == P("F(a3) + a3")
    g = LambdaPoly((("y", NAT),), P("y + x"))
    assert g.apply([Poly.const(0)]) == P("x")
    k = LambdaPoly((("y", NAT),), Poly.const(5))
    assert k.apply([P("p")]) == Poly.const(5)


def test_apply_functional_argument():
    # Lam[f n]. f(n) + n applied to Lam[m]. m + 2 and 40
    h = LambdaPoly((("f", Arrow(NAT, NAT)), ("n", NAT)), P("f(n) + n"))
    succ2 = LambdaPoly((("m", NAT),), P("m + 2"))
    assert h.apply([succ2, Poly.const(40)]) == Poly.const(82)


def test_partial_application_renames():
    h = LambdaPoly((("n", NAT), ("m", NAT)), P("n + m"))
    part = h.apply([P("m")])
    assert isinstance(part, LambdaPoly) and part.arity == 1
    assert part.apply([P("n")]) == P("m + n")


def test_arity_overflow():
    with pytest.raises(ArityOverflow):
        LambdaPoly((("n", NAT),), P("n")).apply([P("x"), P("y")])


def test_lowest_value():
    f = LambdaPoly((("n", NAT), ("m", NAT)), P("n*m + 2*n + 7"))
    assert lowest(f) == Poly.const(7)
    assert lowest(zero_value(Arrow(NAT, NAT))) == Poly.const(0)


def test_eval_max():
    succ = OracleFunction(1, P("x0 + 1"))
    assert eval_numeric(make_max(P("F(t)"), P("t")), {}, {"t": 5}, {"F": succ}) == 6
    assert eval_numeric(Poly(), {}, {}, {}) == 0


def test_make_max_folds_numerals():
    assert make_max(Poly.const(2), Poly.const(5)) == Poly.const(5)
    assert make_max(P("x"), P("x")) == P("x")


def test_missing_assignment():
    with pytest.raises(MissingAssignment):
        eval_numeric(P("a1*x"), {}, {"x": 1}, {})


def test_param_substitution():
    p = P("a1*x + a2*F(a1)")
    assert p.subst_params({A[0]: 2, A[1]: 0}) == P("2*x")


def _random_poly(rng, with_params=True):
    p = random_higher_order_poly(rng, BASE, FUNS, A if with_params else (), depth=2, terms=4)
    if rng.random() < 0.3:
        p = p + make_max(random_higher_order_poly(rng, BASE, FUNS, depth=1), P("x"))
    return p


def _env(rng):
    var_val, fun_val = random_assignment(rng, BASE, FUNS, 15)
    return random_params(rng, A), var_val, fun_val


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_ring_laws(seed):
    rng = random.Random(seed)
    p, q = _random_poly(rng), _random_poly(rng)
    pv, vv, fv = _env(rng)
    ev = lambda r: eval_numeric(r, pv, vv, fv)  # noqa: E731
    assert ev(p + q) == ev(p) + ev(q)
    assert ev(p * q) == ev(p) * ev(q)
    assert p + q == q + p and p * q == q * p


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_canonical_form_round_trips(seed):
    rng = random.Random(seed)
    p = _random_poly(rng)
    again = parse_poly(format_poly(p))
    assert again == p
    assert format_poly(again) == format_poly(p)
    pv, vv, fv = _env(rng)
    assert eval_numeric(again, pv, vv, fv) == eval_numeric(p, pv, vv, fv)


def weak_monotonicity_violations(rng: random.Random, polys: int, pairs: int) -> int:
    """Count cases where raising the assignment lowers the value."""
    bad = 0
    for _ in range(polys):
        p = _random_poly(rng)
        for _ in range(pairs):
            pv, small_v, small_f = _env(rng)
            big_v = {x: v + rng.randint(0, 5) for x, v in small_v.items()}
            big_f = {f: dominating_function(rng, g) for f, g in small_f.items()}
            if eval_numeric(p, pv, big_v, big_f) < eval_numeric(p, pv, small_v, small_f):
                bad += 1
    return bad


def strong_monotonicity_violations(rng: random.Random, shapes: int, points: int) -> int:
    """Shapes with an addend ``c * x_i(...)``, c >= 1: a strict increase of x_i must raise the value."""
    bad = 0
    for _ in range(shapes):
        target = rng.choice(BASE + sorted(FUNS))
        p = _random_poly(rng, with_params=False)
        c = Poly.const(rng.randint(1, 3))
        if target in FUNS:
            args = [random_higher_order_poly(rng, BASE, {}, depth=0, terms=2) for _ in range(FUNS[target])]
            p = p + c * Poly.call(target, *args)
        else:
            p = p + c * Poly.var(target)
        for _ in range(points):
            _, var_val, fun_val = _env(rng)
            before = eval_numeric(p, {}, var_val, fun_val)
            if target in FUNS:
                g = fun_val[target]
                bigger = OracleFunction(g.arity, g.body + Poly.const(1) + random_function(rng, g.arity).body)
                after = eval_numeric(p, {}, var_val, {**fun_val, target: bigger})
            else:
                after = eval_numeric(p, {}, {**var_val, target: var_val[target] + rng.randint(1, 5)}, fun_val)
            if after <= before:
                bad += 1
    return bad


def test_weak_monotonicity_sampled():
    assert weak_monotonicity_violations(random.Random(1), 100, 20) == 0


def test_strong_monotonicity_sampled():
    assert strong_monotonicity_violations(random.Random(2), 50, 20) == 0
