"""Brute-force oracles used to cross-check the closure-based algorithms.

Nothing here touches the closure engine: operations are enumerated level by
level (all terms of depth <= d, deduplicated by table) until two
consecutive depths agree, and 1,1-matrices are read off directly from the
definition.
"""
from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

from .algebra import FiniteAlgebra, ResourceLimitError


def _tuples(n, k):
    return list(itertools.product(range(n), repeat=k))


def operations_by_depth(alg: FiniteAlgebra, arity: int, constants: bool,
                        max_depth: Optional[int] = None, cap: int = 200_000) -> set[tuple[int, ...]]:
    """Tables of all term (or polynomial) operations of the given arity.

    Stops when a depth adds nothing new, or at ``max_depth``.
    """
    n = alg.size
    points = _tuples(n, arity)
    level = {tuple(p[i] for p in points) for i in range(arity)}
    if constants:
        level |= {tuple([c] * len(points)) for c in range(n)}
    for o in alg.operations:
        if o.arity == 0:
            level.add(tuple([int(o.table[0])] * len(points)))
    depth = 0
    while max_depth is None or depth < max_depth:
        current = np.array(sorted(level), dtype=np.int64)
        new = set(level)
        for o in alg.operations:
            if o.arity == 0:
                continue
            # every o.arity-tuple of current operations, applied pointwise
            for combo in _chunks(len(current), o.arity):
                code = np.zeros((len(combo), len(points)), dtype=np.int64)
                for pos in range(o.arity):
                    code = code * n + current[combo[:, pos]]
                new.update(map(tuple, _unique_rows(o.table[code], n).tolist()))
                if len(new) > cap:
                    raise ResourceLimitError(f"more than {cap} operations of arity {arity}")
        depth += 1
        if new == level:
            break
        level = new
    return level


def _unique_rows(rows: np.ndarray, n: int) -> np.ndarray:
    width = rows.shape[1]
    if n ** width < 2 ** 62:
        weights = n ** np.arange(width - 1, -1, -1, dtype=np.int64)
        _, first = np.unique(rows @ weights, return_index=True)
        return rows[first]
    return np.unique(rows, axis=0)


def _chunks(count: int, k: int, size: int = 1 << 18):
    total = count ** k
    for lo in range(0, total, size):
        flat = np.arange(lo, min(lo + size, total))
        yield np.stack(np.unravel_index(flat, (count,) * k), axis=1)


def polynomial_matrices(alg: FiniteAlgebra, max_arity: int = 3, theta_row=None, theta_col=None,
                        cap: int = 200_000) -> set[tuple[int, int, int, int]]:
    """All matrices t(a,u) t(a,v) / t(b,u) t(b,v) for polynomials of arity <= max_arity.

    Coordinates are split into a row block and a column block in every way;
    with congruences given, a_i ~ b_i and u_i ~ v_i are required.
    """
    if max_arity < 1:
        raise ValueError("max_arity must be at least 1")
    n = alg.size
    row_ok = (lambda a, b: theta_row.relates(a, b)) if theta_row is not None else (lambda a, b: True)
    col_ok = (lambda a, b: theta_col.relates(a, b)) if theta_col is not None else (lambda a, b: True)
    row_pairs = [(a, b) for a in range(n) for b in range(n) if row_ok(a, b)]
    col_pairs = [(a, b) for a in range(n) for b in range(n) if col_ok(a, b)]
    out: set = set()
    for k in range(1, max_arity + 1):
        ops = np.array(sorted(operations_by_depth(alg, k, True, cap=cap)), dtype=np.int64)
        for mask in range(1 << k):
            xs = [i for i in range(k) if mask >> i & 1]
            ys = [i for i in range(k) if not mask >> i & 1]
            idx = {key: [] for key in "pqrs"}
            for rp in itertools.product(row_pairs, repeat=len(xs)):
                for cp in itertools.product(col_pairs, repeat=len(ys)):
                    for key, ri, ci in (("p", 0, 0), ("q", 0, 1), ("r", 1, 0), ("s", 1, 1)):
                        point = [0] * k
                        for pos, pr in zip(xs, rp):
                            point[pos] = pr[ri]
                        for pos, pr in zip(ys, cp):
                            point[pos] = pr[ci]
                        code = 0
                        for v in point:
                            code = code * n + v
                        idx[key].append(code)
            cols = [ops[:, np.array(idx[key], dtype=np.int64)] for key in "pqrs"]
            stacked = np.stack(cols, axis=-1).reshape(-1, 4)
            out.update(map(tuple, _unique_rows(stacked, n).tolist()))
    return out


def term_condition_by_oracle(alg: FiniteAlgebra, condition: str, max_arity: int = 3) -> bool:
    mats = polynomial_matrices(alg, max_arity)
    return all(_satisfies(m, condition) for m in mats)


def _satisfies(m, condition) -> bool:
    p, q, r, s = m
    ab = (p != q or r == s) and (p != r or q == s)
    sr = q != r or r == s
    return {"abelian": ab, "strongly-rectangular": sr, "strongly-abelian": ab and sr}[condition]


def property_p_by_oracle(alg: FiniteAlgebra, zero: int, max_arity: int = 3) -> bool:
    n = alg.size
    for k in range(1, max_arity + 1):
        zero_code = sum(zero * n ** i for i in range(k))
        for f in operations_by_depth(alg, k, True):
            if f[zero_code] == zero:
                continue
            if zero in f:
                return False
    return True


def maltsev_by_oracle(alg: FiniteAlgebra, constants: bool) -> Optional[tuple[int, ...]]:
    n = alg.size
    for f in sorted(operations_by_depth(alg, 3, constants)):
        if all(f[x * n * n + x * n + y] == y and f[y * n * n + x * n + x] == y
               for x in range(n) for y in range(n)):
            return f
    return None


def congruence_by_partitions(alg: FiniteAlgebra, pairs) -> list[int]:
    """Least congruence containing ``pairs`` by scanning every partition (n <= 6)."""
    n = alg.size
    best = None
    for labels in _set_partitions(n):
        if not all(labels[a] == labels[b] for a, b in pairs):
            continue
        if not _compatible(alg, labels):
            continue
        if best is None or _finer(labels, best):
            best = labels
    return best


def all_congruences_by_partitions(alg: FiniteAlgebra) -> list[tuple[int, ...]]:
    return [lab for lab in _set_partitions(alg.size) if _compatible(alg, lab)]


def _finer(a, b) -> bool:
    return all(b[i] == b[j] for i in range(len(a)) for j in range(len(a)) if a[i] == a[j])


def _compatible(alg, labels) -> bool:
    n = alg.size
    for o in alg.operations:
        if o.arity == 0:
            continue
        for args in itertools.product(range(n), repeat=o.arity):
            for other in itertools.product(range(n), repeat=o.arity):
                if all(labels[x] == labels[y] for x, y in zip(args, other)):
                    ca = sum(v * n ** (o.arity - 1 - i) for i, v in enumerate(args))
                    cb = sum(v * n ** (o.arity - 1 - i) for i, v in enumerate(other))
                    if labels[int(o.table[ca])] != labels[int(o.table[cb])]:
                        return False
    return True


def _set_partitions(n):
    """Restricted growth strings of length n."""
    def rec(prefix, mx):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(mx + 2):
            yield from rec(prefix + [v], max(mx, v))
    if n == 0:
        yield ()
    else:
        yield from rec([0], 0)
