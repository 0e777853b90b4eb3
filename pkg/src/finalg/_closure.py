"""Semi-naive subuniverse closure in a power A^m with first-discovery provenance.

Elements of A^m are rows of length m.  An operation of arity k acts
coordinatewise through its flat row-major table.  Every element records how
it was first produced: either as the j-th generator, as the value of a 0-ary
operation, or as ``op(child_1, ..., child_k)`` where the children are
indices of earlier elements.  Discovery order is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

# candidate rows processed per numpy batch
CHUNK = 1 << 20
# dense membership bitmap is used when n**m is at most this
DENSE_LIMIT = 1 << 24


@dataclass
class ClosureResult:
    rows: np.ndarray
    # -1 for generators, otherwise index into the operation list
    op: list[int]
    # generator index (for generators) or tuple of child indices
    src: list
    exhausted: bool
    stopped: Optional[int] = None
    index: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.op)

    def find(self, row) -> Optional[int]:
        return self.index.get(_key(np.asarray(row, dtype=self.rows.dtype)))

    def build(self, leaf: Callable[[int], object], node: Callable[[int, list], object]) -> list:
        """Fold provenance bottom-up: leaf(gen_index) and node(op_index, child_values)."""
        out: list = [None] * len(self.op)
        for i, (o, s) in enumerate(zip(self.op, self.src)):
            if o < 0:
                out[i] = leaf(s)
            else:
                out[i] = node(o, [out[c] for c in s])
        return out

    def fold_one(self, target: int, leaf, node):
        """Like :meth:`build` but only for the ancestors of ``target``."""
        needed = set()
        stack = [target]
        while stack:
            i = stack.pop()
            if i in needed:
                continue
            needed.add(i)
            if self.op[i] >= 0:
                stack.extend(self.src[i])
        memo: dict[int, object] = {}
        for i in sorted(needed):
            if self.op[i] < 0:
                memo[i] = leaf(self.src[i])
            else:
                memo[i] = node(self.op[i], [memo[c] for c in self.src[i]])
        return memo[target]


def _key(row: np.ndarray) -> bytes:
    return row.tobytes()


def _dtype(n: int):
    return np.uint8 if n <= 256 else np.int32


def generate(
    n: int,
    ops: Sequence[tuple[int, np.ndarray]],
    gens,
    m: int,
    *,
    cap: Optional[int] = None,
    stop: Optional[Callable[[np.ndarray], Optional[int]]] = None,
) -> ClosureResult:
    """Close ``gens`` (rows in A^m) under ``ops`` given as ``(arity, flat_table)``.

    ``stop`` is called on each batch of new rows and may return the position
    of a row inside the batch; closure halts right after recording it.
    ``cap`` bounds the number of elements (``exhausted`` is False if hit).
    """
    dt = _dtype(n)
    gens = np.asarray(gens, dtype=np.int64).reshape(-1, m) if len(gens) else np.zeros((0, m), np.int64)
    dense = n ** m <= DENSE_LIMIT
    if dense:
        powers = (n ** np.arange(m - 1, -1, -1, dtype=np.int64)) if m else np.zeros(0, np.int64)
        present = np.zeros(n ** m, dtype=bool)
    index: dict[bytes, int] = {}
    rows_list: list[np.ndarray] = []
    op_list: list[int] = []
    src_list: list = []
    size = 0
    result = ClosureResult(np.zeros((0, m), dt), op_list, src_list, True, None, index)

    def add_batch(cand: np.ndarray, origin_op, origin_src) -> Optional[int]:
        """Append unseen rows of ``cand`` (first occurrence wins); return stop hit."""
        nonlocal size
        if len(cand) == 0:
            return None
        cand = cand.astype(dt, copy=False)
        if dense:
            codes = cand.astype(np.int64) @ powers if m else np.zeros(len(cand), np.int64)
            uniq, first = np.unique(codes, return_index=True)
            keep = ~present[uniq]
            first = np.sort(first[keep])
            if len(first) == 0:
                return None
            present[codes[first]] = True
        else:
            view = np.ascontiguousarray(cand).view(np.dtype((np.void, cand.dtype.itemsize * m)))
            _, first = np.unique(view.ravel(), return_index=True)
            first = np.sort(first)
            first = np.array([f for f in first if _key(cand[f]) not in index], dtype=np.int64)
            if len(first) == 0:
                return None
        new = np.ascontiguousarray(cand[first])
        if cap is not None and size + len(new) > cap:
            new = new[: max(cap - size, 0)]
            first = first[: len(new)]
            result.exhausted = False
        for j, f in enumerate(first):
            index[_key(new[j])] = size + j
            op_list.append(origin_op)
            src_list.append(origin_src(int(f)))
        rows_list.append(new)
        size += len(new)
        if stop is not None and len(new):
            hit = stop(new)
            if hit is not None:
                result.stopped = size - len(new) + int(hit)
                return result.stopped
        return None

    def finish() -> ClosureResult:
        result.rows = np.concatenate(rows_list) if rows_list else np.zeros((0, m), dt)
        return result

    if add_batch(gens, -1, lambda f: f) is not None or not result.exhausted:
        return finish()
    for oi, (k, table) in enumerate(ops):
        if k == 0:
            const = np.full((1, m), int(table[0]), dtype=np.int64)
            if add_batch(const, oi, lambda f: ()) is not None or not result.exhausted:
                return finish()

    start = 0
    while True:
        end = size
        if start >= end:
            break
        all_rows = np.concatenate(rows_list) if len(rows_list) > 1 else rows_list[0]
        rows_list[:] = [all_rows]
        all64 = all_rows.astype(np.int64)
        for oi, (k, table) in enumerate(ops):
            if k == 0:
                continue
            weights = [n ** (k - 1 - pos) for pos in range(k)]
            for j in range(k):
                dims = [start] * j + [end - start] + [end] * (k - 1 - j)
                offs = [0] * j + [start] + [0] * (k - 1 - j)
                total = int(np.prod(dims, dtype=np.int64))
                if total == 0:
                    continue
                for lo in range(0, total, CHUNK):
                    flat = np.arange(lo, min(lo + CHUNK, total), dtype=np.int64)
                    idx = np.unravel_index(flat, dims)
                    members = [idx[p] + offs[p] for p in range(k)]
                    code = np.zeros((len(flat), m), dtype=np.int64)
                    for p in range(k):
                        code += all64[members[p]] * weights[p]
                    cand = table[code]
                    stacked = np.stack(members, axis=1)
                    hit = add_batch(cand, oi, lambda f, s=stacked: tuple(int(c) for c in s[f]))
                    if hit is not None or not result.exhausted or size == n ** m:
                        # the last case: every row of A^m is present, nothing left to find
                        return finish()
        start = end
    return finish()
