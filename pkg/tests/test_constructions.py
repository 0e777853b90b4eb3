import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from finalg.algebra import quotient_algebra
from finalg.centrality import is_strongly_abelian, zero_is_subuniverse
from finalg.certificates import replay
from finalg.constructions import (
    DegenerateCollapseError,
    PreconditionError,
    build_s,
    coarsen_quasiorder,
    collapse_to_ordered,
    delta_congruence,
    graph_algebra,
    independence_check,
    lemma_witness_pipeline,
    property_p_chain,
    theorem2_pipeline,
)
from finalg.relations import (
    BinaryRelation,
    Congruence,
    compatible_closure,
    intersect_with_converse,
    quotient_relation,
    validate,
)

from conftest import algebras, bare_set, cyclic, left_zero, semilattice, z2


def _green(cert):
    assert cert.verdict == "green"
    assert replay(cert.to_json()) == []


def test_build_s_on_bare_set():
    s, cert = build_s(bare_set(2), Congruence.full(2))
    assert s.s_alg.size == 3 and s.zero == 0
    assert s.graph_encoding == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert s.delta.to_json() == [[0, 3], [1], [2]]
    _green(cert)
    names = [st_.name for st_ in cert.stages]
    assert names[-4:] == ["item 1: more than one element", "item 2: zero is a subuniverse",
                          "item 3: Property P", "item 4: independence within budget"]


def test_build_s_on_left_zero_band():
    s, cert = build_s(left_zero(), Congruence.full(2))
    assert s.s_alg.op("f").table.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    _green(cert)


@pytest.mark.parametrize("alg, theta, message", [
    (z2(), Congruence.full(2), "theta not strongly abelian"),
    (semilattice(), Congruence.full(2), "A not abelian"),
    (bare_set(2), Congruence.identity(2), "theta is the identity congruence"),
    (cyclic(4), Congruence([0, 0, 1, 1]), "theta not a congruence"),
])
def test_build_s_preconditions(alg, theta, message):
    with pytest.raises(PreconditionError) as info:
        build_s(alg, theta)
    assert info.value.hypothesis == message
    assert info.value.certificate.verdict == "precondition failed"


def test_precondition_witness():
    with pytest.raises(PreconditionError) as info:
        build_s(z2(), Congruence.full(2))
    assert info.value.witness["matrix"] == [[1, 0], [0, 1]]


def test_delta_requires_abelian():
    with pytest.raises(PreconditionError):
        delta_congruence(semilattice(), Congruence.full(2))
    g, pairs = graph_algebra(z2(), Congruence.full(2))
    assert g.size == 4 and pairs[1] == (0, 1)


def test_collapse_and_theorem2_chain():
    s, _ = build_s(bare_set(2), Congruence.full(2))
    t, z, order, cert = collapse_to_ordered(s)
    assert (t.size, z) == (3, 0)
    assert order.to_json() == [[0, 0], [1, 0], [1, 1], [2, 0], [2, 2]]
    _green(cert)
    t2, cert2 = theorem2_pipeline(t, order, z)
    assert t2.size == 2
    assert cert2.get("order'").to_json() == [[0, 0], [1, 0], [1, 1]]
    assert cert2.get("zero'") == 0
    assert is_strongly_abelian(t2)
    _green(cert2)


def test_collapse_degenerate():
    with pytest.raises(DegenerateCollapseError) as info:
        collapse_to_ordered(z2(), 0)
    assert info.value.certificate.verdict == "degenerate"


def test_theorem2_needs_least_zero():
    order = BinaryRelation.diagonal(2)
    with pytest.raises(PreconditionError) as info:
        theorem2_pipeline(left_zero(), order, 0)
    assert "least element" in info.value.hypothesis
    ge = BinaryRelation.from_pairs(2, [(0, 0), (1, 1), (1, 0)])
    t2, cert = theorem2_pipeline(left_zero(), ge, 0)
    _green(cert)


def test_coarsening_on_chain_order():
    # bare 3-set, zero 0: constants separate everything, so the coarsening is "x above 0"
    r = coarsen_quasiorder(bare_set(3), 0)
    assert r.pairs() == [(0, 0), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]
    with pytest.raises(PreconditionError):
        coarsen_quasiorder(z2(), 1)


@settings(max_examples=60, deadline=None)
@given(algebras(max_size=3, max_ops=1), st.data())
def test_coarsening_extends_every_order_with_least_zero(alg, data):
    z = data.draw(st.integers(0, alg.size - 1))
    assume(zero_is_subuniverse(alg, z))
    q = compatible_closure(alg, [(x, z) for x in range(alg.size)], reflexive=True, transitive=True)
    sigma = Congruence.from_relation(intersect_with_converse(q))
    t, labels = quotient_algebra(alg, sigma)
    order = quotient_relation(q, sigma)
    assert validate(t, order, "partial-order").holds
    coarse = coarsen_quasiorder(t, labels[z])
    assert order <= coarse
    assert validate(t, coarse, "quasiorder").holds


def test_property_p_chain():
    ge = BinaryRelation.from_pairs(2, [(0, 0), (1, 1), (1, 0)])
    assert property_p_chain(left_zero(), ge, 0).holds
    v = property_p_chain(left_zero(), BinaryRelation.diagonal(2), 0)
    assert v.fails and v.witness == {"element": 1}


def test_independence():
    assert independence_check(bare_set(2), bare_set(3)).holds
    # x + x = y + y in Z2, but doubling depends on x in Z3
    v = independence_check(z2(), cyclic(3), max_arity=2)
    assert v.fails
    assert v.witness["term"] == "add(x1,x1)" and v.witness["position"] == 1
    v = independence_check(left_zero(), left_zero(), max_arity=2)
    assert v.holds and v.details["complete"]


def test_lemma_witness_no_witness_branch():
    v, cert = lemma_witness_pipeline(left_zero(), Congruence.full(2))
    assert v.holds and v.witness is None
    _green(cert)
    v, cert = lemma_witness_pipeline(bare_set(3), Congruence([0, 0, 1]))
    assert v.holds
    _green(cert)


def test_lemma_witness_preconditions():
    with pytest.raises(PreconditionError) as info:
        lemma_witness_pipeline(z2(), Congruence.full(2))
    assert info.value.hypothesis == "B not strongly abelian"
