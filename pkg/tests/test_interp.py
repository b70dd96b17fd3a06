import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopoterm.core import (
    App,
    Arrow,
    Setting,
    Signature,
    TypeDeclaration,
    Var,
    app,
    beta,
    free_vars,
    fun,
    lam,
    split_type,
    substitute,
    typecheck,
)
from hopoterm.interp import (
    Interpretation,
    OrderTooHigh,
    ParamFactory,
    default_shape,
    fallback_shape,
    interpret,
    interpret_pair,
    parametric_interpretation,
    zero_interpretation,
)
from hopoterm.oracle import dominating_function, random_function, random_params
from hopoterm.poly import LambdaPoly, Poly, eval_numeric, evaluate_value, format_atom, make_max, parse_poly
from support import (
    COLLAPSE_TABLE,
    NAT,
    NATLIST,
    NN,
    NUMERAL_ENV,
    NUMERAL_SIG,
    POINT_VALUE_TABLE,
    SHUFFLE_TABLE,
    TermGen,
    collapse_problem,
    map_afs,
    map_reference_interpretation,
    random_concrete_interpretation,
    random_env_values,
    shuffle_afs,
    table_interpretation,
)

P = parse_poly


def test_first_order_default_shape():
    decl = TypeDeclaration((NAT, NATLIST), NATLIST)
    shape = default_shape("cons", decl, Setting.RULE_REMOVAL)
    assert str(shape.value) == "Lam[n m]. a3 + a2·m + a1·n"
    assert [str(c) for c in shape.side_constraints] == ["a1 ≥ 1", "a2 ≥ 1"]


def test_higher_order_default_shape_has_expected_addends():
    decl = TypeDeclaration((NN, NATLIST), NATLIST)
    shape = default_shape("map", decl, Setting.RULE_REMOVAL)
    body = shape.value.body
    names = [b for b, _ in shape.value.binders]
    assert names == ["f", "n"]
    keys = {tuple(format_atom(a) for a in m.atoms) for m in body.monomials()}
    for addend in [("f(0)",), ("n",), ("n", "f(n)"), ("f(n)",), ()]:
        assert addend in keys, addend


def test_constant_shape():
    shape = default_shape("nil", TypeDeclaration((), NATLIST), Setting.RULE_REMOVAL)
    assert shape.value.arity == 0
    assert str(shape.value.body) == "a1"
    assert shape.side_constraints == []


def test_fallback_pairs():
    default = default_shape("append", TypeDeclaration((NATLIST, NATLIST), NATLIST), Setting.RULE_REMOVAL)
    fb = fallback_shape("append", TypeDeclaration((NATLIST, NATLIST), NATLIST), Setting.RULE_REMOVAL)
    assert len(fb.value.body.monomials()) == len(default.value.body.monomials()) + 1
    assert any(len(m.atoms) == 2 for m in fb.value.body.monomials())
    unary = TypeDeclaration((NAT,), NAT)
    assert len(fallback_shape("s", unary, Setting.RULE_REMOVAL).value.body.monomials()) == len(
        default_shape("s", unary, Setting.RULE_REMOVAL).value.body.monomials()
    )
    ternary = TypeDeclaration((NAT, NAT, NAT), NAT)
    assert len(fallback_shape("t", ternary, Setting.RULE_REMOVAL).value.body.monomials()) == 4 + 3


def test_side_constraints_by_setting():
    decl = TypeDeclaration((NAT,), NN)  # one argument, one trailing argument
    rr = default_shape("k", decl, Setting.RULE_REMOVAL, ParamFactory())
    dyn = default_shape("k", decl, Setting.DYNAMIC_DP, ParamFactory())
    st_ = default_shape("k", decl, Setting.STATIC_DP, ParamFactory())
    assert [str(c) for c in rr.side_constraints] == ["a1 ≥ 1"]
    assert [str(c) for c in dyn.side_constraints] == ["a2 ≥ 1"]
    assert st_.side_constraints == []


def test_combination_limit():
    # a binary function argument and three base arguments: 9 pairs, capped at 8
    decl = TypeDeclaration((Arrow(NAT, Arrow(NAT, NAT)), NAT, NAT, NAT), NAT)
    shape = default_shape("g", decl, Setting.STATIC_DP, combination_limit=8)
    calls = [
        m for m in shape.value.body.monomials()
        if any(format_atom(a).startswith("f(") and format_atom(a) != "f(0, 0)" for a in m.atoms)
    ]
    assert len(calls) == 2 * 8


def test_order_three_is_rejected():
    decl = TypeDeclaration((Arrow(NN, NAT),), NAT)
    with pytest.raises(OrderTooHigh):
        default_shape("h", decl, Setting.RULE_REMOVAL)


def test_application_per_setting():
    env = {"F": NN, "h": NAT}
    sig = Signature({})
    t = App(Var("F"), Var("h"))
    assert interpret(t, Interpretation({}, Setting.STATIC_DP), env) == P("F(h)")
    assert interpret(t, Interpretation({}, Setting.RULE_REMOVAL), env) == P("F(h) + h")
    assert interpret(t, Interpretation({}, Setting.DYNAMIC_DP), env) == make_max(P("F(h)"), P("h"))
    assert typecheck(t, sig, env) == NAT


def test_dynamic_application_of_collapse():
    p = collapse_problem()
    J = table_interpretation(p.signature, COLLAPSE_TABLE, Setting.DYNAMIC_DP)
    rhs = App(Var("F"), fun("collapse", Var("t")))
    assert interpret(rhs, J, p.variables) == make_max(P("F(t)"), P("t"))


def test_variable_clause():
    assert interpret(Var("x"), Interpretation({}, Setting.STATIC_DP), {"x": NAT}) == P("x")


def test_map_lhs_matches_worked_example():
    J = map_reference_interpretation()
    rule = map_afs().rules[0]
    left = interpret(rule.lhs, J, map_afs().variables)
    expected = P(
        "a7 + a3*a5 + a1*a5*h + a2*a5*t + a4*F(0) + a1*a6*h*F(a1*h + a2*t + a3)"
        " + a2*a6*t*F(a1*h + a2*t + a3) + a3*a6*F(a1*h + a2*t + a3)"
    )
    assert left == expected


def test_map_rhs():
    J = map_reference_interpretation()
    rule = map_afs().rules[0]
    right = interpret(rule.rhs, J, map_afs().variables)
    # cons(F h, map(F, t)) with the application F h read as F(h) + h
    expected = P("a3 + a2*a7 + a1*h + a2*a5*t + a2*a4*F(0) + a1*F(h) + a2*a6*t*F(t)")
    assert right == expected


def test_shuffle_lhs_under_hand_interpretation():
    afs = shuffle_afs()
    J = table_interpretation(afs.signature, SHUFFLE_TABLE, Setting.RULE_REMOVAL)
    left = interpret(afs.rules[4].lhs, J, afs.variables)
    expected = P("7 + 2*h + 2*t + F(0) + h*F(h + t + 3) + t*F(h + t + 3) + 3*F(h + t + 3)")
    assert left == expected


def test_point_value():
    afs = shuffle_afs()
    sig = Signature(
        {**afs.signature.symbols, "0": TypeDeclaration((), NAT), "s": TypeDeclaration((NAT,), NAT)},
        afs.signature.base_types,
    )
    J = table_interpretation(sig, POINT_VALUE_TABLE, Setting.STATIC_DP)
    term = fun("shuffle", lam("x", NAT, fun("s", Var("x"))), fun("cons", fun("s", fun("0")), Var("z")))
    value = interpret(term, J, {"z": NATLIST})
    assert eval_numeric(value, {}, {"z": 37}, {}) == 42


def test_functional_sides_are_applied():
    sig = Signature({"k": TypeDeclaration((NAT,), NN)})
    J = Interpretation({"k": LambdaPoly((("n", NAT), ("m", NAT)), P("n + m + 1"))}, Setting.STATIC_DP)
    left, right = interpret_pair(fun("k", Var("x")), fun("k", Var("x")), J, {"x": NAT})
    assert left == right and isinstance(left, Poly)
    assert sig["k"].arity == 1


def test_zero_interpretation():
    z = zero_interpretation(NN)
    assert z.arity == 1 and z.body.is_zero()


# ---------------------------------------------------------------------------
# properties with random interpretations


def contains_beta_violations(rng: random.Random, setting: Setting, redexes: int, samples: int = 5) -> int:
    """Count numeric failures of [(\\x.s) t] >= [s[x:=t]] inside random contexts."""
    bad = 0
    for _ in range(redexes):
        gen = TermGen(rng)
        ty = rng.choice([NAT, NATLIST])
        redex = gen.redex(ty, 3)
        contractum = beta(redex)
        env = {**NUMERAL_ENV, "hole": ty}
        context = TermGen(rng, NUMERAL_SIG, env).term(NAT, 2) if rng.random() < 0.5 else Var("hole")
        if "hole" not in free_vars(context):
            context = Var("hole") if ty == NAT else fun("sum", Var("hole"))
        before = substitute(context, {"hole": redex})
        after = substitute(context, {"hole": contractum})
        J = random_concrete_interpretation(rng, NUMERAL_SIG, setting)
        left = interpret(before, J, NUMERAL_ENV)
        right = interpret(after, J, NUMERAL_ENV)
        for _ in range(samples):
            var_val, fun_val = random_env_values(rng, NUMERAL_ENV)
            if eval_numeric(left, {}, var_val, fun_val) < eval_numeric(right, {}, var_val, fun_val):
                bad += 1
    return bad


@pytest.mark.parametrize("setting", list(Setting))
def test_contains_beta(setting):
    assert contains_beta_violations(random.Random(list(Setting).index(setting)), setting, 60) == 0


def test_static_beta_is_exact():
    rng = random.Random(5)
    for _ in range(40):
        redex = TermGen(rng).redex(NAT, 3)
        J = random_concrete_interpretation(rng, NUMERAL_SIG, Setting.STATIC_DP)
        assert interpret(redex, J, NUMERAL_ENV) == interpret(beta(redex), J, NUMERAL_ENV)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(Setting)))
def test_substitution_lemma(seed, setting):
    rng = random.Random(seed)
    gen = TermGen(rng)
    s = gen.term(NAT, 3)
    gamma = {x: gen.term(NUMERAL_ENV[x], 2) for x in free_vars(s) if rng.random() < 0.7}
    J = random_concrete_interpretation(rng, NUMERAL_SIG, setting)
    composed = {x: interpret(t, J, NUMERAL_ENV) for x, t in gamma.items()}
    direct = interpret(substitute(s, gamma), J, NUMERAL_ENV)
    via_valuation = interpret(s, J, NUMERAL_ENV, composed)
    assert direct == via_valuation


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32))
def test_dynamic_application_lemma(seed):
    """[s t1 .. tn] = max([s]([t1], .., [tn]), [t1](0), .., [tn](0)) numerically."""
    rng = random.Random(seed)
    gen = TermGen(rng)
    J = random_concrete_interpretation(rng, NUMERAL_SIG, Setting.DYNAMIC_DP)
    head_type = rng.choice([NN, Arrow(NAT, NN)])
    head = gen.term(head_type, 3)
    n = 1 if head_type == NN else 2
    args = [gen.term(NAT, 2) for _ in range(n)]
    whole = interpret(app(head, *args), J, NUMERAL_ENV)
    head_value = interpret(head, J, NUMERAL_ENV)
    arg_values = [interpret(a, J, NUMERAL_ENV) for a in args]
    for _ in range(5):
        var_val, fun_val = random_env_values(rng, NUMERAL_ENV)
        f = evaluate_value(head_value, {}, var_val, fun_val)
        nums = [eval_numeric(a, {}, var_val, fun_val) for a in arg_values]
        expected = max([f(*nums)] + nums)
        assert eval_numeric(whole, {}, var_val, fun_val) == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(Setting)), st.booleans())
def test_generated_shapes_are_weakly_monotonic(seed, setting, fallback):
    rng = random.Random(seed)
    J = parametric_interpretation(NUMERAL_SIG, setting, fallback=fallback)
    pv = random_params(rng, J.params)
    for name, value in J.per_symbol.items():
        base = [b for b, t in value.binders if not isinstance(t, Arrow)]
        funs = [b for b, t in value.binders if isinstance(t, Arrow)]
        var_small = {b: rng.randint(0, 9) for b in base}
        var_big = {b: v + rng.randint(0, 4) for b, v in var_small.items()}
        fun_small = {f: random_function(rng, len(split_type(dict(value.binders)[f])[0])) for f in funs}
        fun_big = {f: dominating_function(rng, g) for f, g in fun_small.items()}
        assert eval_numeric(value.body, pv, var_big, fun_big) >= eval_numeric(value.body, pv, var_small, fun_small), name


def test_dynamic_subterm_requirement_holds():
    """[s t] >= [t c] with subterm constants interpreted as zero functionals."""
    rng = random.Random(9)
    sig = Signature({**NUMERAL_SIG.symbols, "c": TypeDeclaration((), NAT)}, NUMERAL_SIG.base_types)
    for _ in range(100):
        gen = TermGen(rng)
        J = random_concrete_interpretation(rng, NUMERAL_SIG, Setting.DYNAMIC_DP)
        J.per_symbol["c"] = zero_interpretation(NAT)
        s = gen.term(Arrow(NN, NAT), 2)
        t = gen.term(NN, 2)
        left = interpret(App(s, t), J, NUMERAL_ENV)
        right = interpret(App(t, fun("c")), J, NUMERAL_ENV)
        assert typecheck(App(t, fun("c")), sig, NUMERAL_ENV) == NAT
        for _ in range(5):
            var_val, fun_val = random_env_values(rng, NUMERAL_ENV)
            assert eval_numeric(left, {}, var_val, fun_val) >= eval_numeric(right, {}, var_val, fun_val)
