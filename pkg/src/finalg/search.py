"""Exhaustive search over small algebras with a property predicate.

Predicates combine property atoms with ``&``/``∧``/``and``, ``|``/``∨``/``or``
and ``!``/``¬``/``not``, parentheses, and the bounded quantifiers
``exists-theta`` and ``forall-theta`` over Con(A)::

    strongly-abelian & !affine(term)
    exists-theta (theta-nontrivial & c11 & !congruence-strongly-abelian)

Evaluation is three-valued: an atom that hits a resource cap makes the
result None (inconclusive) unless the connectives decide it anyway.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .algebra import FiniteAlgebra, ResourceLimitError, tuples_array
from .centrality import (
    ABELIAN,
    STRONGLY_ABELIAN,
    STRONGLY_RECTANGULAR,
    check_affine,
    check_matrix_condition,
    check_property_p,
    check_strongly_solvable,
    congruence_strongly_abelian,
    search_rectangulating_order,
    term_condition_c11,
    zero_is_subuniverse,
)
from .clones import find_maltsev
from .relations import Congruence, all_congruences


class PredicateError(ValueError):
    pass


# ---------------------------------------------------------------------------
# grammar

_TOKEN = re.compile(r"\s*(?:(?P<op>[()&|!∧∨¬])|(?P<word>[A-Za-z][A-Za-z0-9_-]*)(?:\((?P<arg>[^()]*)\))?)")
_WORDS = {"and": "&", "or": "|", "not": "!", "∧": "&", "∨": "|", "¬": "!"}

PLAIN_ATOMS = {
    "abelian": None, "strongly-rectangular": None, "strongly-abelian": None,
    "rectangular": None, "affine": ("polynomial", "term"), "maltsev": ("polynomial", "term"),
    "strongly-solvable": None, "property-p": "element", "trivial": None,
}
THETA_ATOMS = {"c11", "congruence-strongly-abelian", "theta-nontrivial", "theta-proper"}
QUANTIFIERS = {"exists-theta", "forall-theta"}


@dataclass(frozen=True)
class Atom:
    name: str
    arg: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.name}({self.arg})" if self.arg is not None else self.name


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Quant:
    kind: str
    body: object


def _tokens(text: str) -> list:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PredicateError(f"unexpected character {text[pos:].lstrip()[:1]!r} at {pos}")
        if m.group("op"):
            out.append(_WORDS.get(m.group("op"), m.group("op")))
        else:
            w = m.group("word")
            if w in ("and", "or", "not") and m.group("arg") is None:
                out.append(_WORDS[w])
            else:
                out.append(Atom(w, m.group("arg").strip() if m.group("arg") is not None else None))
        pos = m.end()
    return out


def parse_predicate(text: str):
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        t = peek()
        if t is None or (expected is not None and t != expected):
            raise PredicateError(f"expected {expected or 'a term'} at token {pos}")
        pos += 1
        return t

    def disj(in_q):
        left = conj(in_q)
        while peek() == "|":
            take()
            left = Or(left, conj(in_q))
        return left

    def conj(in_q):
        left = unary(in_q)
        while peek() == "&":
            take()
            left = And(left, unary(in_q))
        return left

    def unary(in_q):
        t = peek()
        if t == "!":
            take()
            return Not(unary(in_q))
        if t == "(":
            take()
            e = disj(in_q)
            take(")")
            return e
        if isinstance(t, Atom):
            take()
            if t.name in QUANTIFIERS:
                if in_q:
                    raise PredicateError("nested theta quantifiers are not supported")
                return Quant(t.name, unary(True))
            _check_atom(t, in_q)
            return t
        raise PredicateError(f"unexpected token {t!r}")

    expr = disj(False)
    if pos != len(toks):
        raise PredicateError(f"trailing input at token {pos}")
    return expr


def _check_atom(a: Atom, in_q: bool) -> None:
    if a.name in THETA_ATOMS:
        if not in_q:
            raise PredicateError(f"{a.name} needs an enclosing exists-theta/forall-theta")
        if a.arg is not None:
            raise PredicateError(f"{a.name} takes no option")
        return
    if a.name not in PLAIN_ATOMS:
        raise PredicateError(f"unknown property {a.name!r}")
    spec = PLAIN_ATOMS[a.name]
    if spec is None and a.arg is not None:
        raise PredicateError(f"{a.name} takes no option")
    if isinstance(spec, tuple) and a.arg is not None and a.arg not in spec:
        raise PredicateError(f"{a.name} option must be one of {spec}")
    if spec == "element" and a.arg is not None and not a.arg.isdigit():
        raise PredicateError(f"{a.name} option must be an element")


# ---------------------------------------------------------------------------
# evaluation


class Evaluator:
    """Evaluates predicates on one algebra, caching atom results."""

    def __init__(self, alg: FiniteAlgebra):
        self.alg = alg
        self._cache: dict = {}
        self._cons: Optional[list] = None

    def congruences(self) -> list:
        if self._cons is None:
            self._cons = all_congruences(self.alg)
        return self._cons

    def __call__(self, expr, theta: Optional[Congruence] = None) -> Optional[bool]:
        if isinstance(expr, Atom):
            key = (expr, theta)
            if key not in self._cache:
                try:
                    self._cache[key] = self._atom(expr, theta)
                except ResourceLimitError:
                    self._cache[key] = None
            return self._cache[key]
        if isinstance(expr, Not):
            v = self(expr.body, theta)
            return None if v is None else not v
        if isinstance(expr, And):
            a = self(expr.left, theta)
            if a is False:
                return False
            b = self(expr.right, theta)
            if b is False:
                return False
            return None if a is None or b is None else True
        if isinstance(expr, Or):
            a = self(expr.left, theta)
            if a is True:
                return True
            b = self(expr.right, theta)
            if b is True:
                return True
            return None if a is None or b is None else False
        if isinstance(expr, Quant):
            want = expr.kind == "exists-theta"
            unknown = False
            for th in self.congruences():
                v = self(expr.body, th)
                if v is want:
                    return want
                unknown |= v is None
            return None if unknown else not want
        raise TypeError(expr)

    def _verdict(self, v) -> Optional[bool]:
        return None if v.inconclusive else v.holds

    def _atom(self, a: Atom, theta) -> Optional[bool]:
        alg = self.alg
        name = a.name
        if name in (ABELIAN, STRONGLY_RECTANGULAR, STRONGLY_ABELIAN):
            return check_matrix_condition(alg, name, canonical=False).holds
        if name == "rectangular":
            return self._verdict(search_rectangulating_order(alg))
        if name == "affine":
            return self._verdict(check_affine(alg, a.arg or "polynomial"))
        if name == "maltsev":
            return self._verdict(find_maltsev(alg, a.arg or "polynomial"))
        if name == "strongly-solvable":
            return self._verdict(check_strongly_solvable(alg))
        if name == "trivial":
            return alg.size == 1
        if name == "property-p":
            z = int(a.arg) if a.arg is not None else 0
            if z >= alg.size or not zero_is_subuniverse(alg, z):
                return False
            return check_property_p(alg, z).holds
        if name == "c11":
            return term_condition_c11(alg, theta, cross_check=False).holds
        if name == "congruence-strongly-abelian":
            return self._verdict(congruence_strongly_abelian(alg, theta))
        if name == "theta-nontrivial":
            return not theta.is_identity
        if name == "theta-proper":
            return not theta.is_full
        raise PredicateError(f"unknown property {name!r}")


def evaluate(expr, alg: FiniteAlgebra) -> Optional[bool]:
    if isinstance(expr, str):
        expr = parse_predicate(expr)
    return Evaluator(alg)(expr)


# ---------------------------------------------------------------------------
# enumeration


def op_symbols(signature) -> list[str]:
    return [f"f{i}" for i in range(len(signature))]


def space_size(size: int, signature) -> int:
    return size ** sum(size ** k for k in signature)


def enumerate_algebras(size: int, signature) -> Iterator[FiniteAlgebra]:
    """Every algebra on 0..size-1 with the given arities, lexicographic in the tables."""
    lengths = [size ** k for k in signature]
    names = op_symbols(signature)
    for flat in itertools.product(range(size), repeat=sum(lengths)):
        ops, pos = [], 0
        for name, k, ln in zip(names, signature, lengths):
            ops.append((name, k, flat[pos:pos + ln]))
            pos += ln
        yield FiniteAlgebra(size, ops)


def _conjugate(table: np.ndarray, arity: int, perm: np.ndarray, inv: np.ndarray, n: int) -> np.ndarray:
    # new(x1..xk) = perm(old(inv(x1)..inv(xk)))
    args = tuples_array(n, arity)
    code = np.zeros(len(args), np.int64)
    for p in range(arity):
        code = code * n + inv[args[:, p]]
    return perm[table[code]]


def is_canonical(alg: FiniteAlgebra) -> bool:
    """True iff no relabelling of the universe gives lexicographically smaller tables."""
    n = alg.size
    flat = np.concatenate([o.table for o in alg.operations]) if alg.operations else np.zeros(0, np.int64)
    for perm in itertools.permutations(range(n)):
        perm = np.array(perm)
        inv = np.argsort(perm)
        other = np.concatenate([_conjugate(o.table, o.arity, perm, inv, n) for o in alg.operations]) \
            if alg.operations else flat
        diff = np.nonzero(other != flat)[0]
        if len(diff) and other[diff[0]] < flat[diff[0]]:
            return False
    return True


@dataclass
class SearchResult:
    matches: list
    visited: int
    space: int
    undecided: int
    budget_exhausted: bool = False
    limit_reached: bool = False

    @property
    def inconclusive(self) -> bool:
        return self.budget_exhausted or self.undecided > 0

    def summary(self) -> dict:
        return {"space": self.space, "visited": self.visited, "matched": len(self.matches),
                "undecided": self.undecided, "budget_exhausted": self.budget_exhausted,
                "limit_reached": self.limit_reached}


def search(size: int, signature, predicate, limit: Optional[int] = None,
           budget: Optional[int] = None, isomorph_filter: bool = False,
           on_match=None) -> SearchResult:
    """Scan the table space in lexicographic order, collecting matching algebras.

    ``budget`` bounds the number of candidates visited; running out marks
    the result incomplete.  ``limit`` stops after that many matches.
    Candidates whose predicate value is inconclusive are counted, not
    matched.
    """
    expr = parse_predicate(predicate) if isinstance(predicate, str) else predicate
    total = space_size(size, signature)
    matches, visited, undecided = [], 0, 0
    out_of_budget = limited = False
    for alg in enumerate_algebras(size, signature):
        if budget is not None and visited >= budget:
            out_of_budget = True
            break
        visited += 1
        if isomorph_filter and not is_canonical(alg):
            continue
        v = Evaluator(alg)(expr)
        if v is None:
            undecided += 1
        elif v:
            matches.append(alg)
            if on_match is not None:
                on_match(alg)
            if limit is not None and len(matches) >= limit:
                limited = True
                break
    return SearchResult(matches, visited, total, undecided, out_of_budget, limited)
