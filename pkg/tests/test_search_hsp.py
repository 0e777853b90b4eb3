import pytest

from finalg import oracle
from finalg.hsp import (
    dichotomy_sweep,
    hs_abelian,
    hs_check_by_quotients,
    hs_strongly_abelian,
    principal_labels,
    small_algebras,
    subuniverses,
)
from finalg.algebra import power
from finalg.relations import congruence_generated
from finalg.search import (
    And,
    Atom,
    Not,
    PredicateError,
    Quant,
    enumerate_algebras,
    evaluate,
    is_canonical,
    parse_predicate,
    search,
    space_size,
)

from conftest import chain, left_zero, semilattice, z2


def test_parse_predicate():
    e = parse_predicate("strongly-abelian & !affine(term)")
    assert e == And(Atom("strongly-abelian"), Not(Atom("affine", "term")))
    assert parse_predicate("strongly-abelian ∧ ¬affine(term)") == e
    assert parse_predicate("strongly-abelian and not affine(term)") == e
    q = parse_predicate("exists-theta (theta-nontrivial & c11)")
    assert isinstance(q, Quant) and q.kind == "exists-theta"


@pytest.mark.parametrize("text", [
    "abelian &", "bogus", "c11", "affine(bad)", "exists-theta exists-theta c11", "abelian)", "abelian $",
])
def test_predicate_errors(text):
    with pytest.raises(PredicateError):
        parse_predicate(text)


def test_evaluate():
    assert evaluate("abelian & affine(term)", z2())
    assert not evaluate("abelian", semilattice())
    assert evaluate("rectangular & !abelian", semilattice())
    assert evaluate("property-p(0)", semilattice())
    assert evaluate("exists-theta (theta-nontrivial & theta-proper & c11)", chain(3)) is False
    assert evaluate("forall-theta c11", left_zero())


def test_enumeration_order_and_size():
    algs = list(enumerate_algebras(2, [1]))
    assert [a.operations[0].table.tolist() for a in algs] == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert space_size(2, [2]) == 16 and space_size(3, [1, 1]) == 729


def test_search_counts_match_oracle():
    res = search(2, [2], "abelian")
    expected = sum(oracle.term_condition_by_oracle(a, "abelian", 3) for a in enumerate_algebras(2, [2]))
    assert len(res.matches) == expected == 8
    assert not res.inconclusive
    res = search(2, [2], "strongly-abelian & !affine(term)")
    assert len(res.matches) == 6
    assert any(a.operations[0].table.tolist() == [0, 0, 1, 1] for a in res.matches)


def test_search_budget_and_limit():
    res = search(2, [2], "abelian", budget=5)
    assert res.budget_exhausted and res.inconclusive and res.visited == 5
    res = search(2, [2], "abelian", limit=2)
    assert res.limit_reached and len(res.matches) == 2


def test_isomorph_filter():
    res = search(2, [1], "trivial | !trivial", isomorph_filter=True)
    # constant maps collapse to one class, identity and swap stay
    assert [a.operations[0].table.tolist() for a in res.matches] == [[0, 0], [0, 1], [1, 0]]
    assert is_canonical(z2())


def test_subuniverses_and_principal_labels():
    assert subuniverses(chain(3)) == [frozenset({0}), frozenset({1}), frozenset({2}), frozenset({0, 1}),
                                      frozenset({0, 2}), frozenset({1, 2}), frozenset({0, 1, 2})]
    lab = principal_labels(chain(3))
    assert tuple(lab[0, 2]) == congruence_generated(chain(3), [(0, 2)]).labels


def test_principal_reduction_matches_quotient_scan():
    algs = [a for a in small_algebras(2, 2)] + [power(left_zero(), 2), chain(3)]
    for alg in algs:
        for fast, cond in ((hs_abelian, "abelian"), (hs_strongly_abelian, "strongly-abelian")):
            assert (fast(alg) is None) == (hs_check_by_quotients(alg, cond) is None)


def test_hs_violation_witness():
    bad = hs_abelian(power(semilattice(), 2))
    assert bad is not None and "matrix" in bad
    assert hs_strongly_abelian(left_zero()) is None


def test_small_dichotomy_sweep():
    rep = dichotomy_sweep(max_size=2, max_arity=2)
    assert rep.third == []
    assert rep.pairs == rep.rectangular + len(rep.witnesses)
    assert rep.to_json()["third_outcomes"] == []
