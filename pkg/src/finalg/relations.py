"""Binary relations on finite algebras: validation, closures, congruences.

Order-like relations follow one convention throughout: the pair ``(a, b)``
belongs to an order ``ge`` when ``a >= b``.
"""
from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from . import _closure
from .algebra import AlgebraError, FiniteAlgebra, ResourceLimitError, tuples_array
from .verdict import Verdict, fails, holds

DEFAULT_CONGRUENCE_CAP = 10 ** 5


class InternalCheckError(AssertionError):
    """Two independent computations disagreed; this is a bug, never an answer."""


class BinaryRelation:
    __slots__ = ("size", "bits")

    def __init__(self, size: int, bits):
        bits = np.array(bits, dtype=bool)
        if bits.shape != (size, size):
            raise AlgebraError(f"relation matrix must be {size}x{size}")
        bits.flags.writeable = False
        self.size = size
        self.bits = bits

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable) -> "BinaryRelation":
        bits = np.zeros((size, size), dtype=bool)
        for a, b in pairs:
            if not (0 <= a < size and 0 <= b < size):
                raise AlgebraError(f"pair ({a}, {b}) out of range for size {size}")
            bits[a, b] = True
        return cls(size, bits)

    @classmethod
    def diagonal(cls, size: int) -> "BinaryRelation":
        return cls(size, np.eye(size, dtype=bool))

    @classmethod
    def full(cls, size: int) -> "BinaryRelation":
        return cls(size, np.ones((size, size), dtype=bool))

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(self.bits))]

    def __contains__(self, pair) -> bool:
        a, b = pair
        return bool(self.bits[a, b])

    def __len__(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryRelation) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.size, self.bits.tobytes()))

    def __and__(self, other: "BinaryRelation") -> "BinaryRelation":
        return BinaryRelation(self.size, self.bits & other.bits)

    def __or__(self, other: "BinaryRelation") -> "BinaryRelation":
        return BinaryRelation(self.size, self.bits | other.bits)

    def __le__(self, other: "BinaryRelation") -> bool:
        return bool(np.all(~self.bits | other.bits))

    def __repr__(self) -> str:
        return f"BinaryRelation({self.size}, {self.pairs()})"

    @property
    def T(self) -> "BinaryRelation":
        return BinaryRelation(self.size, self.bits.T)

    def to_json(self) -> list:
        return [list(p) for p in self.pairs()]


class Congruence:
    """A partition of ``0..size-1`` with blocks ordered by least member.

    Being a congruence of a particular algebra is checked by :func:`validate`,
    not assumed by construction.
    """

    __slots__ = ("size", "labels", "blocks")

    def __init__(self, labels: Iterable[int]):
        labels = list(labels)
        canon: dict[int, int] = {}
        out = []
        for v in labels:
            if v not in canon:
                canon[v] = len(canon)
            out.append(canon[v])
        self.size = len(out)
        self.labels = tuple(out)
        blocks: list[list[int]] = [[] for _ in canon]
        for e, c in enumerate(out):
            blocks[c].append(e)
        self.blocks = tuple(tuple(b) for b in blocks)

    @classmethod
    def from_blocks(cls, size: int, blocks: Iterable[Iterable[int]]) -> "Congruence":
        labels = [-1] * size
        for i, block in enumerate(blocks):
            block = list(block)
            if not block:
                raise AlgebraError("empty block in partition")
            for e in block:
                if not 0 <= e < size:
                    raise AlgebraError(f"element {e} out of range for size {size}")
                if labels[e] != -1:
                    raise AlgebraError(f"element {e} occurs in two blocks")
                labels[e] = i
        if -1 in labels:
            raise AlgebraError(f"element {labels.index(-1)} missing from partition")
        return cls(labels)

    @classmethod
    def identity(cls, size: int) -> "Congruence":
        return cls(range(size))

    @classmethod
    def full(cls, size: int) -> "Congruence":
        return cls([0] * size)

    @classmethod
    def from_relation(cls, r: BinaryRelation) -> "Congruence":
        v = validate_structure(r, EQUIVALENCE_PROPS)
        if v is not None:
            raise AlgebraError(f"relation is not an equivalence: {v}")
        labels = [int(np.argmax(r.bits[a])) for a in range(r.size)]
        return cls(labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, Congruence) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"Congruence({self.to_json()})"

    def __len__(self) -> int:
        return len(self.blocks)

    def relates(self, a: int, b: int) -> bool:
        return self.labels[a] == self.labels[b]

    def relation(self) -> BinaryRelation:
        lab = np.array(self.labels)
        return BinaryRelation(self.size, lab[:, None] == lab[None, :])

    @property
    def is_identity(self) -> bool:
        return len(self.blocks) == self.size

    @property
    def is_full(self) -> bool:
        return len(self.blocks) == 1

    def __le__(self, other: "Congruence") -> bool:
        return all(other.labels[b[0]] == other.labels[e] for b in self.blocks for e in b)

    def __lt__(self, other: "Congruence") -> bool:
        return self <= other and self != other

    def meet(self, other: "Congruence") -> "Congruence":
        return Congruence(list(zip(self.labels, other.labels)))

    def join(self, other: "Congruence") -> "Congruence":
        return Congruence(_components(self.size, self.pairs_spanning() + other.pairs_spanning()))

    def pairs_spanning(self) -> list[tuple[int, int]]:
        return [(b[0], e) for b in self.blocks for e in b[1:]]

    def over(self, lower: "Congruence") -> "Congruence":
        """This congruence as a congruence of the quotient by ``lower`` (requires lower <= self)."""
        if not lower <= self:
            raise AlgebraError("quotient congruence requires lower <= self")
        return Congruence([self.labels[b[0]] for b in lower.blocks])

    def sort_key(self):
        return (-len(self.blocks), self.labels)

    def to_json(self) -> list:
        return [list(b) for b in self.blocks]


def _components(size: int, pairs) -> list[int]:
    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return [find(x) for x in range(size)]


class RelationKind(str, Enum):
    EQUIVALENCE = "equivalence"
    CONGRUENCE = "congruence"
    QUASIORDER = "quasiorder"
    PARTIAL_ORDER = "partial-order"
    TOLERANCE = "tolerance"


EQUIVALENCE_PROPS = ("reflexive", "symmetric", "transitive")
_KIND_PROPS = {
    RelationKind.EQUIVALENCE: (EQUIVALENCE_PROPS, False),
    RelationKind.CONGRUENCE: (EQUIVALENCE_PROPS, True),
    RelationKind.QUASIORDER: (("reflexive", "transitive"), True),
    RelationKind.PARTIAL_ORDER: (("reflexive", "antisymmetric", "transitive"), True),
    RelationKind.TOLERANCE: (("reflexive", "symmetric"), True),
}


def validate_structure(r: BinaryRelation, props) -> Optional[dict]:
    """First structural defect of ``r`` among ``props`` or None."""
    b = r.bits
    n = r.size
    for prop in props:
        if prop == "reflexive":
            missing = np.nonzero(~np.diag(b))[0]
            if len(missing):
                return {"property": "reflexive", "element": int(missing[0])}
        elif prop == "symmetric":
            bad = np.argwhere(b & ~b.T)
            if len(bad):
                return {"property": "symmetric", "pair": [int(bad[0][0]), int(bad[0][1])]}
        elif prop == "antisymmetric":
            bad = np.argwhere(b & b.T & ~np.eye(n, dtype=bool))
            if len(bad):
                return {"property": "antisymmetric", "pair": [int(bad[0][0]), int(bad[0][1])]}
        elif prop == "transitive":
            for a in range(n):
                for m in np.nonzero(b[a])[0]:
                    miss = np.nonzero(b[m] & ~b[a])[0]
                    if len(miss):
                        c = int(miss[0])
                        return {"property": "transitive", "pairs": [[a, int(m)], [int(m), c]]}
        else:
            raise ValueError(f"unknown property {prop}")
    return None


def compatibility_violation(alg: FiniteAlgebra, r: BinaryRelation) -> Optional[dict]:
    """First (operation, argument pairs) whose image leaves ``r``, or None."""
    pairs = np.array(r.pairs(), dtype=np.int64).reshape(-1, 2)
    for o in alg.operations:
        if o.arity == 0:
            c = int(o.table[0])
            if not r.bits[c, c]:
                return {"property": "compatible", "operation": o.symbol, "pairs": [], "image": [c, c]}
            continue
        if len(pairs) == 0:
            continue
        total = len(pairs) ** o.arity
        dims = (len(pairs),) * o.arity
        for lo in range(0, total, _closure.CHUNK):
            flat = np.arange(lo, min(lo + _closure.CHUNK, total))
            idx = np.unravel_index(flat, dims)
            left = np.zeros(len(flat), np.int64)
            right = np.zeros(len(flat), np.int64)
            for p in range(o.arity):
                left = left * alg.size + pairs[idx[p], 0]
                right = right * alg.size + pairs[idx[p], 1]
            x, y = o.table[left], o.table[right]
            bad = np.nonzero(~r.bits[x, y])[0]
            if len(bad):
                j = bad[0]
                args = [[int(pairs[idx[p][j], 0]), int(pairs[idx[p][j], 1])] for p in range(o.arity)]
                return {"property": "compatible", "operation": o.symbol, "pairs": args,
                        "image": [int(x[j]), int(y[j])]}
    return None


def validate(alg: FiniteAlgebra, r, kind) -> Verdict:
    """Check that ``r`` is a relation of the given kind on ``alg``."""
    kind = RelationKind(kind)
    if isinstance(r, Congruence):
        r = r.relation()
    if r.size != alg.size:
        raise AlgebraError(f"relation size {r.size} does not match algebra size {alg.size}")
    props, compat = _KIND_PROPS[kind]
    bad = validate_structure(r, props)
    if bad is None and compat:
        bad = compatibility_violation(alg, r)
    if bad is not None:
        return fails(bad, f"not a {kind.value}: {bad['property']} fails")
    return holds(f"valid {kind.value}")


def _transitive(bits: np.ndarray) -> np.ndarray:
    bits = bits.copy()
    for k in range(len(bits)):
        bits |= bits[:, k:k + 1] & bits[k:k + 1, :]
    return bits


def compatible_closure(alg: FiniteAlgebra, seed: Iterable, reflexive: bool = False,
                       symmetric: bool = False, transitive: bool = False) -> BinaryRelation:
    """Least subuniverse of alg^2 containing ``seed`` with the flagged properties."""
    n = alg.size
    bits = np.zeros((n, n), dtype=bool)
    for a, b in seed:
        if not (0 <= a < n and 0 <= b < n):
            raise AlgebraError(f"pair ({a}, {b}) out of range")
        bits[a, b] = True
    if reflexive:
        bits |= np.eye(n, dtype=bool)
    ops = alg.closure_ops()
    while True:
        gens = np.argwhere(bits)
        res = _closure.generate(n, ops, gens, 2)
        new = np.zeros((n, n), dtype=bool)
        if len(res.rows):
            new[res.rows[:, 0], res.rows[:, 1]] = True
        if symmetric:
            new |= new.T
        if transitive:
            new = _transitive(new)
        if np.array_equal(new, bits):
            return BinaryRelation(n, bits)
        bits = new


def congruence_generated(alg: FiniteAlgebra, pairs: Iterable, algorithm: str = "relational") -> Congruence:
    """Least congruence containing ``pairs``.

    ``algorithm`` is ``"relational"`` (compatible closure), ``"maltsev-chain"``
    (images of the pairs under all unary polynomials, then equivalence
    closure) or ``"both"``, which runs the two and raises
    :class:`InternalCheckError` if they differ.
    """
    pairs = [(int(a), int(b)) for a, b in pairs]
    if algorithm == "relational":
        r = compatible_closure(alg, pairs, reflexive=True, symmetric=True, transitive=True)
        return Congruence.from_relation(r)
    if algorithm == "maltsev-chain":
        from .clones import pol1_tables

        if not pairs:
            return Congruence.identity(alg.size)
        F = pol1_tables(alg)
        links = []
        for a, b in pairs:
            links.append(np.stack([F[:, a], F[:, b]], axis=1))
        links = np.unique(np.concatenate(links), axis=0)
        return Congruence(_components(alg.size, links))
    if algorithm == "both":
        rel = congruence_generated(alg, pairs, "relational")
        mc = congruence_generated(alg, pairs, "maltsev-chain")
        if rel != mc:
            raise InternalCheckError(
                f"congruence generation disagrees on {pairs}: relational {rel.to_json()} "
                f"vs Maltsev chain {mc.to_json()}"
            )
        return rel
    raise ValueError(f"unknown algorithm {algorithm!r}")


def principal_congruences(alg: FiniteAlgebra) -> dict[tuple[int, int], Congruence]:
    return {(a, b): congruence_generated(alg, [(a, b)])
            for a, b in itertools.combinations(range(alg.size), 2)}


def all_congruences(alg: FiniteAlgebra, cap: int = DEFAULT_CONGRUENCE_CAP) -> list[Congruence]:
    """Con(alg) as joins of principal congruences, from 0 (finest) to 1."""
    principals = sorted(set(principal_congruences(alg).values()), key=Congruence.sort_key)
    zero = Congruence.identity(alg.size)
    found = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for c in frontier:
            for p in principals:
                j = c.join(p)
                if j not in found:
                    found.add(j)
                    nxt.append(j)
                    if len(found) > cap:
                        raise ResourceLimitError(f"more than {cap} congruences")
        frontier = nxt
    return sorted(found, key=Congruence.sort_key)


def intersect_with_converse(r: BinaryRelation) -> BinaryRelation:
    return BinaryRelation(r.size, r.bits & r.bits.T)


def quotient_relation(r: BinaryRelation, theta: Congruence) -> BinaryRelation:
    """``r`` read on the classes of ``theta``; raises if ``r`` is not theta-saturated."""
    if r.size != theta.size:
        raise AlgebraError("relation and congruence sizes differ")
    k = len(theta.blocks)
    out = np.zeros((k, k), dtype=bool)
    for i, bi in enumerate(theta.blocks):
        for j, bj in enumerate(theta.blocks):
            sub = r.bits[np.ix_(bi, bj)]
            if sub.any() and not sub.all():
                a, b = np.argwhere(sub)[0]
                c, d = np.argwhere(~sub)[0]
                raise AlgebraError(
                    f"relation not saturated by the congruence: ({bi[a]},{bj[b]}) in it "
                    f"but ({bi[c]},{bj[d]}) not"
                )
            out[i, j] = sub.all()
    return BinaryRelation(k, out)
