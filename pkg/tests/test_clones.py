import pytest
from hypothesis import given, settings

from finalg import oracle
from finalg.algebra import FiniteAlgebra, constant_expansion, term_operation
from finalg.clones import (
    FiniteMap,
    find_maltsev,
    is_maltsev,
    pol1_tables,
    polynomial_clone,
    term_clone,
    unary_polynomials,
)
from finalg.terms import to_prefix

from conftest import algebras, left_zero, semilattice, z2

# [DERIVED] clone sizes for arities 1, 2, 3 by depth-by-depth enumeration
FROZEN_TERM = {"Z2": [2, 4, 8], "meet-semilattice": [1, 3, 7], "left-zero band": [1, 2, 3]}
FROZEN_POLY = {"Z2": [4, 8, 16], "meet-semilattice": [3, 5, 9]}


@pytest.mark.parametrize("alg", [z2(), semilattice(), left_zero()], ids=lambda a: a.name)
def test_term_clone_sizes_frozen(alg):
    assert [len(term_clone(alg, k)) for k in (1, 2, 3)] == FROZEN_TERM[alg.name]


@pytest.mark.parametrize("alg", [z2(), semilattice()], ids=lambda a: a.name)
def test_polynomial_clone_sizes_frozen(alg):
    assert [len(polynomial_clone(alg, k)) for k in (1, 2, 3)] == FROZEN_POLY[alg.name]


def test_z2_binary_term_operations():
    # x + x = 0 is a term operation, so the binary clone is {0, x, y, x+y}
    tables = {f.table for f in term_clone(z2(), 2)}
    assert tables == {(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0)}


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=3))
def test_clones_match_depth_enumeration(alg):
    # binary clones on 3 elements can be all 3^9 operations; too slow for the oracle
    for k in ((1, 2) if alg.size <= 2 else (1,)):
        assert term_clone(alg, k).as_set() == set(_maps(oracle.operations_by_depth(alg, k, False), k))
        assert polynomial_clone(alg, k).as_set() == set(_maps(oracle.operations_by_depth(alg, k, True), k))


def _maps(tables, k):
    return [FiniteMap(k, t) for t in tables]


@settings(max_examples=30, deadline=None)
@given(algebras(max_size=3))
def test_derivations_replay(alg):
    k = 2 if alg.size <= 2 else 1
    expanded = constant_expansion(alg)
    for cs in (term_clone(alg, k, with_derivations=True), unary_polynomials(alg, with_derivations=True)):
        for f in cs:
            t = cs.derivation(f)
            assert tuple(int(v) for v in term_operation(expanded, t, cs.arity)) == f.table


def test_closure_stops_when_every_operation_is_found():
    primal = FiniteAlgebra(3, [("f", 2, [1, 2, 0, 2, 0, 1, 0, 1, 1])])
    assert len(term_clone(primal, 2)) == 3 ** 9


def test_unary_polynomials_and_cache():
    pols = unary_polynomials(semilattice())
    assert {f.table for f in pols} == {(0, 0), (1, 1), (0, 1)}
    t = pol1_tables(semilattice())
    assert t.shape == (3, 2)
    assert pol1_tables(semilattice()) is t


def test_maltsev_search():
    v = find_maltsev(z2(), "term")
    assert v.holds
    assert v.witness.map.table == (0, 1, 1, 0, 1, 0, 0, 1)
    assert to_prefix(v.witness.derivation).count("add") == 2
    assert is_maltsev(z2(), v.witness.map.table)
    v = find_maltsev(semilattice(), "polynomial")
    assert v.fails and v.witness["clone_size"] == 9
    assert find_maltsev(z2(), "term", cap=3).inconclusive
    with pytest.raises(ValueError):
        find_maltsev(z2(), "bogus")


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=2, max_ops=1))
def test_maltsev_agrees_with_oracle(alg):
    for mode, constants in (("term", False), ("polynomial", True)):
        ours = find_maltsev(alg, mode)
        assert ours.holds == (oracle.maltsev_by_oracle(alg, constants) is not None)


def test_nullary_arity_polynomials():
    a = FiniteAlgebra(3, [("f", 1, [1, 2, 0])])
    assert len(polynomial_clone(a, 0)) == 3
    with pytest.raises(ValueError):
        term_clone(a, 0)
