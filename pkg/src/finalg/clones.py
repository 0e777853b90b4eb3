"""Term and polynomial clones as subuniverses of function algebras.

A k-ary operation on A is a row of length n**k (row-major over A^k).
Clones are closures of projections (and constants, for polynomials) under
the basic operations applied pointwise, so completeness does not depend on
guessing a term depth.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _closure
from .algebra import (
    FiniteAlgebra,
    constant_expansion,
    constant_term,
    encode,
    term_operation,
    tuples_array,
)
from .relations import InternalCheckError
from .terms import Op, Term, Var, to_prefix
from .verdict import Verdict, fails, holds, inconclusive

DEFAULT_CLONE_CAP = 10 ** 6


@dataclass(frozen=True)
class FiniteMap:
    arity: int
    table: tuple[int, ...]

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise TypeError(f"map of arity {self.arity} called with {len(args)} arguments")
        n = round(len(self.table) ** (1 / self.arity)) if self.arity else 1
        return self.table[encode(args, n)]

    def to_json(self) -> dict:
        return {"arity": self.arity, "table": list(self.table)}


@dataclass(frozen=True)
class MapWitness:
    map: FiniteMap
    derivation: Term

    def to_json(self) -> dict:
        return {"table": list(self.map.table), "term": to_prefix(self.derivation)}


class CloneSet:
    """The k-ary part of a clone, in discovery order, with optional derivations.

    Derivations are terms over the constant expansion: variables are the
    projections, 0-ary symbols ``c<a>`` are constants.
    """

    def __init__(self, alg: FiniteAlgebra, arity: int, result: _closure.ClosureResult,
                 leaf_terms: list, ops: list, cap: Optional[int], with_derivations: bool):
        self.algebra = alg
        self.arity = arity
        self.exhausted = result.exhausted
        self.cap = cap
        self._result = result
        self._leaves = leaf_terms
        self._ops = ops
        self.tables = result.rows
        self.maps = tuple(FiniteMap(arity, tuple(int(v) for v in row)) for row in result.rows)
        self._terms: Optional[list] = None
        self.derivations: Optional[dict] = None
        if with_derivations:
            terms = self._all_terms()
            self.derivations = dict(zip(self.maps, terms))
            self.verify_derivations()

    def __len__(self) -> int:
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    def __contains__(self, f) -> bool:
        if isinstance(f, FiniteMap):
            f = f.table
        return self._result.find(np.asarray(f)) is not None

    def as_set(self) -> frozenset:
        return frozenset(self.maps)

    def _all_terms(self) -> list:
        if self._terms is None:
            self._terms = self._result.build(
                lambda g: self._leaves[g], lambda o, kids: Op(self._ops[o], kids))
        return self._terms

    def derivation(self, f) -> Term:
        if isinstance(f, FiniteMap):
            f = f.table
        i = self._result.find(np.asarray(f))
        if i is None:
            raise KeyError("map not in clone")
        if self._terms is not None:
            return self._terms[i]
        return self._result.fold_one(i, lambda g: self._leaves[g],
                                     lambda o, kids: Op(self._ops[o], kids))

    def verify_derivations(self) -> None:
        expanded = constant_expansion(self.algebra)
        for f, t in zip(self.maps, self._all_terms()):
            tab = term_operation(expanded, t, self.arity)
            if tuple(int(v) for v in tab) != f.table:
                raise InternalCheckError(f"derivation {to_prefix(t)} does not replay")


def projection_rows(n: int, k: int) -> np.ndarray:
    return tuples_array(n, k).T.copy()


def _clone(alg: FiniteAlgebra, arity: int, constants: bool, cap: Optional[int],
           with_derivations: bool, stop=None) -> CloneSet:
    n = alg.size
    m = n ** arity
    gens = [row for row in projection_rows(n, arity)]
    leaves: list = [Var(i + 1) for i in range(arity)]
    if constants:
        for a in range(n):
            gens.append(np.full(m, a))
            leaves.append(constant_term(alg, a))
    ops = alg.closure_ops()
    names = [o.symbol for o in alg.operations]
    res = _closure.generate(n, ops, np.array(gens, dtype=np.int64).reshape(-1, m), m, cap=cap, stop=stop)
    return CloneSet(alg, arity, res, leaves, names, cap, with_derivations)


def unary_polynomials(alg: FiniteAlgebra, with_derivations: bool = False) -> CloneSet:
    """Pol_1(alg): closure of the identity and all constant maps."""
    return _clone(alg, 1, True, None, with_derivations)


@lru_cache(maxsize=512)
def pol1_tables(alg: FiniteAlgebra) -> np.ndarray:
    """Tables of all unary polynomials, shape (count, n). Cached per algebra."""
    t = np.array(unary_polynomials(alg).tables, dtype=np.int64)
    t.flags.writeable = False
    return t


def term_clone(alg: FiniteAlgebra, arity: int, cap: Optional[int] = DEFAULT_CLONE_CAP,
               with_derivations: bool = False) -> CloneSet:
    if arity < 1:
        raise ValueError("term clone arity must be at least 1")
    return _clone(alg, arity, False, cap, with_derivations)


def polynomial_clone(alg: FiniteAlgebra, arity: int, cap: Optional[int] = DEFAULT_CLONE_CAP,
                     with_derivations: bool = False) -> CloneSet:
    """Term clone of the full constant expansion at the given arity (may be 0)."""
    if arity < 0:
        raise ValueError("arity must be non-negative")
    expanded = constant_expansion(alg)
    cs = _clone(expanded, arity, False, cap, with_derivations=False)
    # derivations are already terms over the expansion; rebind to the base algebra
    out = CloneSet(alg, arity, cs._result, cs._leaves, cs._ops, cap, with_derivations)
    return out


def maltsev_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices of m(x,x,y) and m(y,x,x) in a ternary table, and the expected y."""
    xy = tuples_array(n, 2)
    xs, ys = xy[:, 0], xy[:, 1]
    left = xs * n * n + xs * n + ys
    right = ys * n * n + xs * n + xs
    return left, right, ys


def find_maltsev(alg: FiniteAlgebra, mode: str = "polynomial",
                 cap: Optional[int] = DEFAULT_CLONE_CAP) -> Verdict:
    """Search the ternary term or polynomial clone for a Maltsev operation.

    holds: witness is a :class:`MapWitness`; fails: the clone was exhausted
    without a hit; inconclusive: the cap was reached first.
    """
    if mode not in ("term", "polynomial"):
        raise ValueError(f"mode must be 'term' or 'polynomial', not {mode!r}")
    left, right, ys = maltsev_index_arrays(alg.size)

    def stop(rows):
        ok = np.all(rows[:, left] == ys, axis=1) & np.all(rows[:, right] == ys, axis=1)
        hit = np.nonzero(ok)[0]
        return int(hit[0]) if len(hit) else None

    target = constant_expansion(alg) if mode == "polynomial" else alg
    cs = _clone(target, 3, False, cap, False, stop=stop)
    base = CloneSet(alg, 3, cs._result, cs._leaves, cs._ops, cap, False)
    res = cs._result
    if res.stopped is not None:
        row = res.rows[res.stopped]
        f = FiniteMap(3, tuple(int(v) for v in row))
        return holds(f"Maltsev {mode} operation found", MapWitness(f, base.derivation(f)),
                     mode=mode, searched=len(res))
    if not res.exhausted:
        return inconclusive(f"ternary {mode} clone exceeds cap {cap}", mode=mode, searched=len(res))
    return fails({"mode": mode, "clone_size": len(res)},
                 f"no Maltsev operation among the {len(res)} ternary {mode} operations",
                 mode=mode)


def is_maltsev(alg: FiniteAlgebra, table) -> bool:
    left, right, ys = maltsev_index_arrays(alg.size)
    table = np.asarray(table)
    return bool(np.all(table[left] == ys) and np.all(table[right] == ys))
