"""JSON algebra documents.

A document looks like::

    {"name": "Z2", "size": 2,
     "operations": [{"symbol": "add", "arity": 2, "table": [0, 1, 1, 0]}],
     "congruences": {"theta": [[0, 1]]},
     "orders": {"le": [[0, 0], [1, 0], [1, 1]]},
     "zero": 0}

Only ``size`` and ``operations`` are required.  Order pairs ``[a, b]``
mean a >= b.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .algebra import AlgebraError, FiniteAlgebra
from .relations import BinaryRelation, Congruence


class DocumentError(ValueError):
    """Malformed document; ``line``/``column`` are set for syntax errors."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class AlgebraDocument:
    algebra: FiniteAlgebra
    congruences: dict = field(default_factory=dict)
    orders: dict = field(default_factory=dict)
    zero: Optional[int] = None

    @property
    def name(self) -> str:
        return self.algebra.name

    def to_dict(self) -> dict:
        d = self.algebra.to_dict()
        d.setdefault("name", "")
        if self.congruences:
            d["congruences"] = {k: v.to_json() for k, v in self.congruences.items()}
        if self.orders:
            d["orders"] = {k: v.to_json() for k, v in self.orders.items()}
        if self.zero is not None:
            d["zero"] = self.zero
        return d

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraDocument):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def algebra_from_dict(d) -> FiniteAlgebra:
    if not isinstance(d, dict):
        raise DocumentError("document must be a JSON object")
    size = d.get("size")
    if not _is_int(size) or size < 1:
        raise DocumentError(f"'size' must be a positive integer, got {size!r}")
    ops_in = d.get("operations", [])
    if not isinstance(ops_in, list):
        raise DocumentError("'operations' must be a list")
    ops, seen = [], set()
    for i, o in enumerate(ops_in):
        where = f"operations[{i}]"
        if not isinstance(o, dict):
            raise DocumentError(f"{where} must be an object")
        sym, arity, table = o.get("symbol"), o.get("arity"), o.get("table")
        if not isinstance(sym, str) or not sym:
            raise DocumentError(f"{where}: 'symbol' must be a non-empty string")
        where = f"{where} {sym!r}"
        if sym in seen:
            raise DocumentError(f"{where}: duplicate symbol")
        seen.add(sym)
        if not _is_int(arity) or arity < 0:
            raise DocumentError(f"{where}: 'arity' must be a non-negative integer")
        if not isinstance(table, list) or not all(_is_int(v) for v in table):
            raise DocumentError(f"{where}: 'table' must be a list of integers")
        if len(table) != size ** arity:
            raise DocumentError(f"{where}: table has {len(table)} entries, expected {size ** arity}")
        for j, v in enumerate(table):
            if not 0 <= v < size:
                raise DocumentError(f"{where}: table entry {j} = {v} outside 0..{size - 1}")
        ops.append((sym, arity, table))
    name = d.get("name", "")
    if not isinstance(name, str):
        raise DocumentError("'name' must be a string")
    try:
        return FiniteAlgebra(size, ops, name=name)
    except AlgebraError as exc:
        raise DocumentError(str(exc)) from None


def parse_congruence(size: int, blocks, where: str = "congruence") -> Congruence:
    if not isinstance(blocks, list) or not all(
            isinstance(b, list) and all(_is_int(x) for x in b) for b in blocks):
        raise DocumentError(f"{where}: expected a list of blocks (lists of elements)")
    flat = [x for b in blocks for x in b]
    for x in flat:
        if not 0 <= x < size:
            raise DocumentError(f"{where}: element {x} outside 0..{size - 1}")
    if len(set(flat)) != len(flat):
        raise DocumentError(f"{where}: blocks overlap")
    # elements left out are singleton blocks
    return Congruence.from_blocks(size, [list(b) for b in blocks if b] +
                                  [[x] for x in range(size) if x not in set(flat)])


def parse_relation(size: int, pairs, where: str = "relation") -> BinaryRelation:
    if not isinstance(pairs, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(_is_int(x) for x in p) for p in pairs):
        raise DocumentError(f"{where}: expected a list of [a, b] pairs")
    for a, b in pairs:
        if not (0 <= a < size and 0 <= b < size):
            raise DocumentError(f"{where}: pair [{a}, {b}] outside 0..{size - 1}")
    return BinaryRelation.from_pairs(size, [tuple(p) for p in pairs])


def document_from_dict(d) -> AlgebraDocument:
    alg = algebra_from_dict(d)
    n = alg.size
    cons, orders = {}, {}
    raw = d.get("congruences", {})
    if not isinstance(raw, dict):
        raise DocumentError("'congruences' must map names to block lists")
    for k, v in raw.items():
        cons[k] = parse_congruence(n, v, f"congruences[{k!r}]")
    raw = d.get("orders", {})
    if not isinstance(raw, dict):
        raise DocumentError("'orders' must map names to pair lists")
    for k, v in raw.items():
        orders[k] = parse_relation(n, v, f"orders[{k!r}]")
    zero = d.get("zero")
    if zero is not None and (not _is_int(zero) or not 0 <= zero < n):
        raise DocumentError(f"'zero' must be an element of 0..{n - 1}, got {zero!r}")
    unknown = set(d) - {"name", "size", "operations", "congruences", "orders", "zero"}
    if unknown:
        raise DocumentError(f"unknown keys {sorted(unknown)}")
    return AlgebraDocument(alg, cons, orders, zero)


def parse_algebra(text: str) -> AlgebraDocument:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, exc.lineno, exc.colno) from None
    return document_from_dict(d)


def serialize(doc) -> str:
    if isinstance(doc, FiniteAlgebra):
        doc = AlgebraDocument(doc)
    return json.dumps(doc.to_dict(), sort_keys=True) + "\n"


def load(path) -> AlgebraDocument:
    with open(path) as fh:
        return parse_algebra(fh.read())
