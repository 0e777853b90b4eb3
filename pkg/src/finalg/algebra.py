"""Finite algebras given by operation tables.

The universe of an algebra of size ``n`` is always ``0..n-1``.  A k-ary
table lists ``f(a1,...,ak)`` at index ``a1*n**(k-1) + ... + ak``; powers
encode tuples the same way, so ``(a, b)`` in A^2 is element ``a*n + b``.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import _closure
from .terms import Op, Term, TermError, Var, variables

DEFAULT_POWER_CAP = 10 ** 6
DEFAULT_TABLE_CAP = 10 ** 7


class AlgebraError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    """A configured size cap was exceeded; the answer is inconclusive."""


class NotACongruenceError(AlgebraError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Operation:
    symbol: str
    arity: int
    table: np.ndarray



def encode(tup: Sequence[int], n: int) -> int:
    code = 0
    for a in tup:
        code = code * n + int(a)
    return code


def decode(code: int, n: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        code, r = divmod(code, n)
        out.append(r)
    return tuple(reversed(out))


def tuples_array(n: int, k: int) -> np.ndarray:
    """All k-tuples over 0..n-1 in row-major order, shape (n**k, k)."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((n,) * k).reshape(k, -1)
    return grids.T.astype(np.int64)


class FiniteAlgebra:
    """An algebra on ``0..size-1`` with an ordered list of operations.

    >>> z2 = FiniteAlgebra(2, [("add", 2, [0, 1, 1, 0])], name="Z2")
    >>> z2.apply("add", 1, 1)
    0
    """

    __slots__ = ("size", "operations", "name", "_by_symbol", "_digest")

    def __init__(self, size: int, operations: Iterable = (), name: str = ""):
        if not isinstance(size, (int, np.integer)) or size < 1:
            raise AlgebraError(f"size must be a positive integer, got {size!r}")
        self.size = int(size)
        self.name = name
        ops = []
        seen = set()
        for item in operations:
            if isinstance(item, Operation):
                symbol, arity, table = item.symbol, item.arity, item.table
            else:
                symbol, arity, table = item
            if symbol in seen:
                raise AlgebraError(f"duplicate operation symbol {symbol!r}")
            seen.add(symbol)
            if arity < 0:
                raise AlgebraError(f"operation {symbol!r}: negative arity")
            table = np.asarray(table, dtype=np.int64).ravel()
            if len(table) != self.size ** arity:
                raise AlgebraError(
                    f"operation {symbol!r}: table length {len(table)} != {self.size}^{arity}"
                )
            if len(table) and (table.min() < 0 or table.max() >= self.size):
                bad = int(np.nonzero((table < 0) | (table >= self.size))[0][0])
                raise AlgebraError(f"operation {symbol!r}: entry {bad} out of range")
            ops.append(Operation(symbol, int(arity), _frozen(table.copy())))
        self.operations = tuple(ops)
        self._by_symbol = {o.symbol: o for o in ops}
        self._digest = None

    def __repr__(self) -> str:
        sig = ", ".join(f"{o.symbol}/{o.arity}" for o in self.operations)
        label = f"{self.name!r}, " if self.name else ""
        return f"FiniteAlgebra({label}size={self.size}, [{sig}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return self.size == other.size and self.signature == other.signature and all(
            np.array_equal(a.table, b.table) for a, b in zip(self.operations, other.operations)
        )

    def __hash__(self) -> int:
        return hash(self.digest())

    @property
    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((o.symbol, o.arity) for o in self.operations)

    @property
    def universe(self) -> range:
        return range(self.size)

    def op(self, symbol: str) -> Operation:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise AlgebraError(f"unknown operation symbol {symbol!r}") from None

    def has_op(self, symbol: str) -> bool:
        return symbol in self._by_symbol

    def apply(self, symbol: str, *args: int) -> int:
        o = self.op(symbol)
        if len(args) != o.arity:
            raise AlgebraError(f"{symbol} expects {o.arity} arguments, got {len(args)}")
        return int(o.table[encode(args, self.size)])

    def closure_ops(self) -> list[tuple[int, np.ndarray]]:
        return [(o.arity, o.table) for o in self.operations]

    def to_dict(self) -> dict:
        d = {
            "size": self.size,
            "operations": [
                {"symbol": o.symbol, "arity": o.arity, "table": [int(v) for v in o.table]}
                for o in self.operations
            ],
        }
        if self.name:
            d["name"] = self.name
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical table content (name excluded)."""
        if self._digest is None:
            d = self.to_dict()
            d.pop("name", None)
            blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
            self._digest = hashlib.sha256(blob).hexdigest()
        return self._digest

    def renamed(self, name: str) -> "FiniteAlgebra":
        return FiniteAlgebra(self.size, self.operations, name=name)


# ---------------------------------------------------------------------------
# evaluation


def eval_term_vec(alg: FiniteAlgebra, t: Term, env: Mapping[int, np.ndarray]) -> np.ndarray:
    """Evaluate ``t`` on parallel arrays of variable values.

    Shared subterms are evaluated once.
    """
    length = None
    for v in env.values():
        length = len(v)
        break
    memo: dict[int, np.ndarray] = {}
    # iterative post-order with explicit paths for error reporting
    stack = [(t, (), False)]
    while stack:
        node, path, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if isinstance(node, Var):
            if node.index not in env:
                raise TermError(f"variable x{node.index} not covered by assignment", path)
            memo[key] = np.asarray(env[node.index], dtype=np.int64)
            continue
        if not alg.has_op(node.symbol):
            raise TermError(f"unknown symbol {node.symbol!r}", path)
        o = alg.op(node.symbol)
        if len(node.args) != o.arity:
            raise TermError(
                f"symbol {node.symbol!r} has arity {o.arity} but {len(node.args)} arguments", path
            )
        if not ready:
            stack.append((node, path, True))
            for i, a in enumerate(node.args):
                if id(a) not in memo:
                    stack.append((a, path + (i,), False))
            continue
        if o.arity == 0:
            n_out = 1 if length is None else length
            memo[key] = np.full(n_out, int(o.table[0]), dtype=np.int64)
            continue
        code = 0
        for a in node.args:
            code = code * alg.size + memo[id(a)]
        memo[key] = o.table[code]
    return memo[id(t)]


def eval_term(alg: FiniteAlgebra, t: Term, asg: Mapping[int, int]) -> int:
    """Value of term ``t`` in ``alg`` under the assignment ``asg`` (var index -> element)."""
    for k, v in asg.items():
        if not 0 <= int(v) < alg.size:
            raise TermError(f"value {v} of x{k} outside the universe")
    env = {k: np.array([int(v)], dtype=np.int64) for k, v in asg.items()}
    if not env:
        env = {}
    out = eval_term_vec(alg, t, env)
    return int(out[0])


def term_operation(alg: FiniteAlgebra, t: Term, arity: Optional[int] = None) -> np.ndarray:
    """Table of ``t`` as an ``arity``-ary operation (default: largest variable index)."""
    vs = variables(t)
    if arity is None:
        arity = max(vs, default=0)
    if vs and vs[-1] > arity:
        raise TermError(f"term uses x{vs[-1]} but arity is {arity}")
    tup = tuples_array(alg.size, arity)
    env = {i + 1: tup[:, i] for i in range(arity)}
    out = eval_term_vec(alg, t, env) if env else eval_term_vec(alg, t, {})
    return np.broadcast_to(out, (len(tup),)).copy()


def find_identity_counterexample(alg: FiniteAlgebra, s: Term, t: Term) -> Optional[dict[int, int]]:
    """First assignment (lexicographic in variable order) where s and t differ."""
    vs = sorted(set(variables(s)) | set(variables(t)))
    tup = tuples_array(alg.size, len(vs))
    env = {v: tup[:, i] for i, v in enumerate(vs)}
    left = np.broadcast_to(eval_term_vec(alg, s, env), (len(tup),))
    right = np.broadcast_to(eval_term_vec(alg, t, env), (len(tup),))
    bad = np.nonzero(left != right)[0]
    if len(bad) == 0:
        return None
    row = tup[bad[0]]
    return {v: int(row[i]) for i, v in enumerate(vs)}


def holds_identity(alg: FiniteAlgebra, s: Term, t: Term) -> bool:
    return find_identity_counterexample(alg, s, t) is None


# ---------------------------------------------------------------------------
# constructions on algebras


def power(alg: FiniteAlgebra, k: int, cap: int = DEFAULT_POWER_CAP,
          table_cap: int = DEFAULT_TABLE_CAP) -> FiniteAlgebra:
    """The direct power alg^k with coordinatewise operations."""
    if k < 1:
        raise AlgebraError("power exponent must be at least 1")
    n = alg.size
    big = n ** k
    if big > cap:
        raise ResourceLimitError(f"power universe {n}^{k} = {big} exceeds cap {cap}")
    if k == 1:
        return FiniteAlgebra(n, alg.operations, name=alg.name)
    digits = tuples_array(n, k)
    weights = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
    ops = []
    for o in alg.operations:
        if big ** o.arity > table_cap:
            raise ResourceLimitError(
                f"table of {o.symbol} on the power has {big ** o.arity} entries (cap {table_cap})"
            )
        args = tuples_array(big, o.arity)
        code = np.zeros((len(args), k), dtype=np.int64)
        for p in range(o.arity):
            code = code * n + digits[args[:, p]]
        coords = o.table[code] if o.arity else np.full((1, k), int(o.table[0]))
        ops.append((o.symbol, o.arity, coords @ weights))
    name = f"{alg.name}^{k}" if alg.name else ""
    return FiniteAlgebra(big, ops, name=name)


def product(a: FiniteAlgebra, b: FiniteAlgebra, table_cap: int = DEFAULT_TABLE_CAP) -> FiniteAlgebra:
    """a x b; element (x, y) is encoded as x * b.size + y."""
    if a.signature != b.signature:
        raise AlgebraError("product of algebras with different signatures")
    size = a.size * b.size
    ops = []
    for oa, ob in zip(a.operations, b.operations):
        if size ** oa.arity > table_cap:
            raise ResourceLimitError(f"product table for {oa.symbol} too large")
        args = tuples_array(size, oa.arity)
        xa = args // b.size
        xb = args % b.size
        ca = np.zeros(len(args), np.int64)
        cb = np.zeros(len(args), np.int64)
        for p in range(oa.arity):
            ca = ca * a.size + xa[:, p]
            cb = cb * b.size + xb[:, p]
        ops.append((oa.symbol, oa.arity, oa.table[ca] * b.size + ob.table[cb]))
    return FiniteAlgebra(size, ops)


def subuniverse_closure(alg: FiniteAlgebra, seed: Iterable[int]) -> frozenset[int]:
    """Least subuniverse containing ``seed`` (and every constant)."""
    seed = sorted(set(int(s) for s in seed))
    for s in seed:
        if not 0 <= s < alg.size:
            raise AlgebraError(f"seed element {s} outside universe")
    if not seed and not any(o.arity == 0 for o in alg.operations):
        raise AlgebraError("empty subuniverse undefined: empty seed and no constants")
    res = _closure.generate(alg.size, alg.closure_ops(), [[s] for s in seed], 1)
    return frozenset(int(v) for v in res.rows[:, 0])


def subalgebra(alg: FiniteAlgebra, elements: Iterable[int], name: str = "") -> tuple[FiniteAlgebra, list[int]]:
    """The subalgebra on a subuniverse, relabelled in increasing element order.

    Returns the algebra and the list mapping new index -> old element.
    """
    elems = sorted(set(int(e) for e in elements))
    pos = {e: i for i, e in enumerate(elems)}
    k = len(elems)
    if k == 0:
        raise AlgebraError("empty subalgebra")
    ops = []
    arr = np.array(elems, dtype=np.int64)
    for o in alg.operations:
        args = tuples_array(k, o.arity)
        code = np.zeros(len(args), np.int64)
        for p in range(o.arity):
            code = code * alg.size + arr[args[:, p]]
        vals = o.table[code]
        try:
            ops.append((o.symbol, o.arity, [pos[int(v)] for v in vals]))
        except KeyError as exc:
            raise AlgebraError(f"elements not closed under {o.symbol}: produces {exc.args[0]}") from None
    return FiniteAlgebra(k, ops, name=name), elems


def quotient_algebra(alg: FiniteAlgebra, theta, name: str = ""):
    """alg/theta with classes ordered by least member, plus the projection map.

    Raises :class:`NotACongruenceError` with an ``(operation, args_a, args_b)``
    witness when ``theta`` is not compatible.
    """
    from .relations import Congruence, compatibility_violation

    if not isinstance(theta, Congruence):
        raise TypeError("theta must be a Congruence")
    if theta.size != alg.size:
        raise AlgebraError("congruence size does not match algebra")
    bad = compatibility_violation(alg, theta.relation())
    if bad is not None:
        raise NotACongruenceError(f"partition is not compatible with {bad['operation']}", bad)
    labels = np.array(theta.labels, dtype=np.int64)
    reps = np.array([b[0] for b in theta.blocks], dtype=np.int64)
    k = len(reps)
    ops = []
    for o in alg.operations:
        args = tuples_array(k, o.arity)
        code = np.zeros(len(args), np.int64)
        for p in range(o.arity):
            code = code * alg.size + reps[args[:, p]]
        ops.append((o.symbol, o.arity, labels[o.table[code]]))
    return FiniteAlgebra(k, ops, name=name), tuple(int(v) for v in labels)


def constant_symbol_prefix(alg: FiniteAlgebra) -> str:
    prefix = "c"
    while any(s.startswith(prefix) and s[len(prefix):].isdigit() for s, _ in alg.signature):
        prefix = "_" + prefix
    return prefix


def constant_expansion(alg: FiniteAlgebra) -> FiniteAlgebra:
    """Add a 0-ary symbol ``c<a>`` for each element ``a`` (prefix adjusted on clash)."""
    prefix = constant_symbol_prefix(alg)
    ops = list(alg.operations) + [(f"{prefix}{a}", 0, [a]) for a in alg.universe]
    return FiniteAlgebra(alg.size, ops, name=f"{alg.name}_A" if alg.name else "")


def constant_term(alg: FiniteAlgebra, a: int) -> Op:
    return Op(f"{constant_symbol_prefix(alg)}{a}", ())


def is_subuniverse(alg: FiniteAlgebra, elements: Iterable[int]) -> bool:
    elems = set(int(e) for e in elements)
    if not elems:
        return not any(o.arity == 0 for o in alg.operations)
    return subuniverse_closure(alg, elems) == frozenset(elems)


def all_tuples(n: int, k: int):
    return itertools.product(range(n), repeat=k)
