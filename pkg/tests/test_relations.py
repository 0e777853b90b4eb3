import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finalg import oracle
from finalg.algebra import AlgebraError, power
from finalg.relations import (
    BinaryRelation,
    Congruence,
    all_congruences,
    compatible_closure,
    congruence_generated,
    intersect_with_converse,
    quotient_relation,
    validate,
)

from conftest import algebras, bare_set, chain, cyclic, z2

# [DERIVED] by scanning every partition with the oracle
FROZEN_CONGRUENCES = {
    "chain3": [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 2)],
    "Z3": [(0, 0, 0), (0, 1, 2)],
    "Z4": [(0, 0, 0, 0), (0, 1, 0, 1), (0, 1, 2, 3)],
}


def test_congruence_normalizes_labels():
    c = Congruence([5, 2, 5, 7])
    assert c.labels == (0, 1, 0, 2)
    assert c.blocks == ((0, 2), (1,), (3,))
    assert c == Congruence.from_blocks(4, [[3], [0, 2], [1]])
    with pytest.raises(AlgebraError):
        Congruence.from_blocks(3, [[0, 1], [1, 2]])
    with pytest.raises(AlgebraError):
        Congruence.from_blocks(3, [[0, 1]])


def test_lattice_operations():
    a = Congruence([0, 0, 1, 1])
    b = Congruence([0, 1, 1, 2])
    assert a.meet(b) == Congruence.identity(4)
    assert a.join(b) == Congruence.full(4)
    assert Congruence.identity(4) <= a <= Congruence.full(4)
    assert Congruence([0, 0, 1, 1, 2, 2]).over(Congruence([0, 0, 1, 1, 2, 3])) == Congruence([0, 1, 2, 2])


def test_validate_reports_defects():
    r = BinaryRelation.from_pairs(3, [(0, 1)])
    v = validate(chain(3), r, "congruence")
    assert v.fails and v.witness == {"property": "reflexive", "element": 0}
    v = validate(cyclic(4), Congruence([0, 0, 1, 1]), "congruence")
    assert v.fails and v.witness["property"] == "compatible"
    le = BinaryRelation.from_pairs(3, [(a, b) for a in range(3) for b in range(3) if a >= b])
    assert validate(chain(3), le, "partial-order").holds
    assert validate(chain(3), le | le.T, "partial-order").fails


@pytest.mark.parametrize("alg", [chain(3), cyclic(3), cyclic(4)], ids=["chain3", "Z3", "Z4"])
def test_congruence_lattices_frozen(alg):
    got = [c.labels for c in all_congruences(alg)]
    assert sorted(got) == sorted(FROZEN_CONGRUENCES[alg.name])


def test_bare_set_has_all_partitions():
    # Bell number B4
    assert len(all_congruences(bare_set(4))) == 15


@settings(max_examples=60, deadline=None)
@given(algebras(max_size=4))
def test_all_congruences_match_partition_scan(alg):
    ours = {c.labels for c in all_congruences(alg)}
    theirs = {Congruence(lab).labels for lab in oracle.all_congruences_by_partitions(alg)}
    assert ours == theirs


@settings(max_examples=80, deadline=None)
@given(algebras(max_size=5), st.data())
def test_generation_algorithms_agree(alg, data):
    n = alg.size
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3))
    rel = congruence_generated(alg, pairs, "relational")
    mc = congruence_generated(alg, pairs, "maltsev-chain")
    assert rel == mc
    assert validate(alg, rel, "congruence").holds
    assert all(rel.relates(a, b) for a, b in pairs)


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=4), st.data())
def test_generated_congruence_is_least(alg, data):
    n = alg.size
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2))
    got = congruence_generated(alg, pairs)
    assert got.labels == Congruence(oracle.congruence_by_partitions(alg, pairs)).labels


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=4), st.data())
def test_compatible_closure_invariants(alg, data):
    n = alg.size
    seed = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3))
    q = compatible_closure(alg, seed, reflexive=True, transitive=True)
    assert validate(alg, q, "quasiorder").holds
    assert all((a, b) in q for a, b in seed)
    again = compatible_closure(alg, q.pairs(), reflexive=True, transitive=True)
    assert again == q


def test_quotient_relation():
    q = BinaryRelation.from_pairs(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (2, 0), (2, 1)])
    sigma = Congruence.from_relation(intersect_with_converse(q))
    assert sigma == Congruence([0, 0, 1])
    assert quotient_relation(q, sigma).pairs() == [(0, 0), (1, 0), (1, 1)]


def test_generation_on_z2_power():
    big = power(z2(), 2)
    # (0,0) ~ (1,0) forces the first-coordinate kernel
    assert congruence_generated(big, [(0, 2)], "both") == Congruence([0, 1, 0, 1])
    assert np.array_equal(congruence_generated(big, []).labels, list(range(4)))
