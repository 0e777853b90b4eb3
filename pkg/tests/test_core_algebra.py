import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finalg.algebra import (
    AlgebraError,
    FiniteAlgebra,
    NotACongruenceError,
    ResourceLimitError,
    constant_expansion,
    eval_term,
    find_identity_counterexample,
    holds_identity,
    is_subuniverse,
    power,
    product,
    quotient_algebra,
    subalgebra,
    subuniverse_closure,
    term_operation,
)
from finalg.relations import Congruence
from finalg.terms import Op, TermError, Var, depth, parse_term, substitute, to_prefix, variables

from conftest import algebras, chain, cyclic, semilattice, z2


# ---------------------------------------------------------------------------
# terms

symbols = st.sampled_from(["f", "g", "add", "c0"])


@st.composite
def terms(draw, max_depth=3):
    if max_depth == 0 or draw(st.booleans()):
        if draw(st.integers(0, 4)) == 0:
            return Op(draw(symbols), ())
        return Var(draw(st.integers(1, 5)))
    k = draw(st.integers(1, 3))
    return Op(draw(symbols), [draw(terms(max_depth - 1)) for _ in range(k)])


@given(terms())
def test_prefix_round_trip(t):
    assert parse_term(to_prefix(t)) == t


def test_term_helpers():
    t = parse_term("f(x2, g(x1, c), x2)")
    assert variables(t) == [1, 2]
    assert depth(t) == 2
    assert to_prefix(substitute(t, {2: Var(3)})) == "f(x3,g(x1,c),x3)"
    assert parse_term("c()") == Op("c", ())
    # variables start at x1; x0 is an ordinary constant symbol
    assert parse_term("x0") == Op("x0", ())


@pytest.mark.parametrize("bad", ["f(x1", "f(x1,)", "f x1", "f(x1))", ""])
def test_parse_errors(bad):
    with pytest.raises(TermError):
        parse_term(bad)


def test_eval_error_reports_path():
    with pytest.raises(TermError) as info:
        eval_term(z2(), parse_term("add(x1, add(x2, x3, x1))"), {1: 0, 2: 1, 3: 1})
    assert info.value.path == (1,)
    with pytest.raises(TermError):
        eval_term(z2(), parse_term("mul(x1, x1)"), {1: 0})


# ---------------------------------------------------------------------------
# algebras


def test_table_validation():
    with pytest.raises(AlgebraError):
        FiniteAlgebra(2, [("f", 2, [0, 1, 1])])
    with pytest.raises(AlgebraError):
        FiniteAlgebra(2, [("f", 1, [0, 2])])
    with pytest.raises(AlgebraError):
        FiniteAlgebra(2, [("f", 1, [0, 1]), ("f", 1, [1, 0])])
    with pytest.raises(AlgebraError):
        FiniteAlgebra(0, [])


def test_apply_and_eval():
    a = z2()
    assert a.apply("add", 1, 1) == 0
    t = parse_term("add(x1, add(x2, x3))")
    assert [eval_term(a, t, dict(zip((1, 2, 3), v))) for v in itertools.product(range(2), repeat=3)] == \
        [0, 1, 1, 0, 1, 0, 0, 1]
    assert term_operation(a, t).tolist() == [0, 1, 1, 0, 1, 0, 0, 1]


def test_identities():
    a = semilattice()
    assert holds_identity(a, parse_term("meet(x1, x2)"), parse_term("meet(x2, x1)"))
    assert holds_identity(a, parse_term("meet(x1, x1)"), parse_term("x1"))
    assert find_identity_counterexample(z2(), parse_term("add(x1, x1)"), parse_term("x1")) == {1: 1}


def test_power_and_product():
    sq = power(z2(), 2)
    assert sq.size == 4
    # (1,0) + (1,1) = (0,1), codes x*2+y
    assert sq.apply("add", 2, 3) == 1
    assert product(z2(), z2()) == sq
    with pytest.raises(ResourceLimitError):
        power(cyclic(5), 9)


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=3), st.data())
def test_power_is_coordinatewise(alg, data):
    sq = power(alg, 2)
    n = alg.size
    for o in alg.operations:
        args = data.draw(st.lists(st.integers(0, n * n - 1), min_size=o.arity, max_size=o.arity))
        got = sq.apply(o.symbol, *args)
        left = alg.apply(o.symbol, *[a // n for a in args])
        right = alg.apply(o.symbol, *[a % n for a in args])
        assert got == left * n + right


@settings(max_examples=60, deadline=None)
@given(algebras(max_size=4), st.data())
def test_subuniverse_closure_is_least(alg, data):
    seed = data.draw(st.sets(st.integers(0, alg.size - 1), min_size=1))
    s = subuniverse_closure(alg, seed)
    assert set(seed) <= s
    assert is_subuniverse(alg, s)
    # least: every subuniverse containing the seed contains s
    for size in range(1, alg.size + 1):
        for cand in itertools.combinations(range(alg.size), size):
            if set(seed) <= set(cand) and is_subuniverse(alg, cand):
                assert s <= set(cand)


def test_subalgebra_relabels():
    c = chain(4)
    sub, elems = subalgebra(c, [1, 3])
    assert elems == [1, 3]
    assert sub.op("meet").table.tolist() == [0, 0, 0, 1]
    with pytest.raises(AlgebraError):
        subalgebra(cyclic(4), [1, 2])


def test_quotient():
    q, labels = quotient_algebra(cyclic(4), Congruence([0, 1, 0, 1]))
    assert labels == (0, 1, 0, 1)
    assert q == FiniteAlgebra(2, [("add", 2, [0, 1, 1, 0])])
    with pytest.raises(NotACongruenceError) as info:
        quotient_algebra(cyclic(4), Congruence([0, 0, 1, 1]))
    assert info.value.witness["operation"] == "add"


def test_constant_expansion_avoids_clash():
    a = FiniteAlgebra(2, [("c0", 0, [1])])
    e = constant_expansion(a)
    assert [o.symbol for o in e.operations] == ["c0", "_c0", "_c1"]


def test_digest_ignores_name():
    assert z2().digest() == z2().renamed("other").digest()
    assert np.array_equal(z2().op("add").table, [0, 1, 1, 0])
