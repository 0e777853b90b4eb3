"""Subalgebras, their quotients, and finite sweeps over them.

``hs_check`` decides whether every quotient of every subalgebra has a
property; the sweeps run the lemma-witness dichotomy and the
"HS(B^2) abelian implies HS(B) strongly abelian" implication over every
algebra of a small search space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .algebra import FiniteAlgebra, power, quotient_algebra, subalgebra, subuniverse_closure
from .centrality import (
    STRONGLY_ABELIAN,
    MatrixSet,
    _c11_route_matrices,
    check_matrix_condition,
    is_strongly_abelian,
)
from .certificates import AssertionFailed
from .constructions import LemmaWitness, PreconditionError, lemma_witness_pipeline
from .relations import Congruence, InternalCheckError, all_congruences, congruence_generated
from .search import enumerate_algebras


def subuniverses(alg: FiniteAlgebra, cap: int = 1 << 16) -> list[frozenset]:
    """All nonempty subuniverses, smallest first then lexicographic."""
    n = alg.size
    start = {subuniverse_closure(alg, [x]) for x in range(n)}
    found = set(start)
    frontier = list(start)
    while frontier:
        nxt = []
        for s in frontier:
            for x in range(n):
                if x in s:
                    continue
                t = subuniverse_closure(alg, s | {x})
                if t not in found:
                    found.add(t)
                    nxt.append(t)
                    if len(found) > cap:
                        raise RuntimeError(f"more than {cap} subuniverses")
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _full(n: int) -> Congruence:
    return Congruence.full(n)


def principal_labels(alg: FiniteAlgebra) -> np.ndarray:
    """``L[x, y]`` is the label array of Cg(x, y)."""
    n = alg.size
    out = np.empty((n, n, n), dtype=np.int64)
    for x in range(n):
        out[x, x] = np.arange(n)
        for y in range(x + 1, n):
            out[x, y] = out[y, x] = congruence_generated(alg, [(x, y)]).labels
    return out


# (premise pair, conclusion pair) as column indices into (p, q, r, s)
_ABELIAN_RULES = (((0, 1), (2, 3)),)
_STRONG_RULES = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((1, 2), (2, 3)))


def _hs_violation(alg: FiniteAlgebra, rules, strong: bool) -> Optional[dict]:
    """Some quotient of a subalgebra where a matrix implication breaks.

    A quotient C/theta breaks ``X in theta => Y in theta`` for a 1,1-matrix of
    C exactly when Y is outside Cg(X), so principal congruences suffice.
    Every reported witness is re-checked on the actual quotient.
    """
    for u in subuniverses(alg):
        c, elems = subalgebra(alg, u)
        ms = MatrixSet(c, _full(c.size), _full(c.size))
        L = principal_labels(c)
        m = ms.rows
        for (i, j), (k, l) in rules:
            lab = L[m[:, i], m[:, j]]                      # (N, |C|)
            rows = np.arange(len(m))
            bad = lab[rows, m[:, k]] != lab[rows, m[:, l]]
            if bad.any():
                t = int(np.nonzero(bad)[0][0])
                th = Congruence(L[m[t, i], m[t, j]])
                q, _ = quotient_algebra(c, th)
                cond = STRONGLY_ABELIAN if strong else "abelian"
                if check_matrix_condition(q, cond, canonical=False).holds:
                    raise InternalCheckError("principal-congruence reduction disagrees with the quotient")
                return {"subuniverse": list(elems), "theta": th.to_json(),
                        "matrix": ms.witness(t).to_json()}
    return None


def hs_abelian(alg: FiniteAlgebra) -> Optional[dict]:
    """First non-abelian quotient of a subalgebra, or None."""
    return _hs_violation(alg, _ABELIAN_RULES, strong=False)


def hs_strongly_abelian(alg: FiniteAlgebra) -> Optional[dict]:
    """First quotient of a subalgebra that is not strongly abelian, or None."""
    return _hs_violation(alg, _STRONG_RULES, strong=True)


def hs_check_by_quotients(alg: FiniteAlgebra, condition: str) -> Optional[dict]:
    """Same question answered by forming every quotient (slow; for cross-checks)."""
    for u in subuniverses(alg):
        c, elems = subalgebra(alg, u)
        for th in all_congruences(c):
            q, _ = quotient_algebra(c, th)
            v = check_matrix_condition(q, condition, canonical=False)
            if not v.holds:
                return {"subuniverse": list(elems), "theta": th.to_json()}
    return None


def small_algebras(max_size: int, max_arity: int) -> Iterable[FiniteAlgebra]:
    """Every algebra with one operation, size <= max_size, arity <= max_arity."""
    for n in range(1, max_size + 1):
        for k in range(0, max_arity + 1):
            yield from enumerate_algebras(n, [k])


@dataclass
class DichotomyReport:
    algebras: int = 0
    strongly_abelian: int = 0
    pairs: int = 0
    rectangular: int = 0
    witnesses: list = field(default_factory=list)
    third: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"algebras": self.algebras, "strongly_abelian": self.strongly_abelian,
                "pairs": self.pairs, "strongly_rectangular_quotient": self.rectangular,
                "witnesses": len(self.witnesses), "third_outcomes": self.third}


def dichotomy_sweep(max_size: int = 3, max_arity: int = 2, algebras=None) -> DichotomyReport:
    """Run the lemma-witness pipeline on every (B, theta) with B strongly abelian and B/theta abelian.

    Each pair must end either with a strongly rectangular quotient or with
    a LemmaWitness whose C/gamma fails C(1,1;gamma); anything else is a
    third outcome and is recorded.
    """
    rep = DichotomyReport()
    for b in (algebras if algebras is not None else small_algebras(max_size, max_arity)):
        rep.algebras += 1
        if not is_strongly_abelian(b):
            continue
        rep.strongly_abelian += 1
        ms = MatrixSet(b, _full(b.size), _full(b.size))
        for th in all_congruences(b):
            if _c11_route_matrices(ms, th) is not None:
                continue
            rep.pairs += 1
            tag = {"algebra": b.to_dict(), "theta": th.to_json()}
            try:
                v, cert = lemma_witness_pipeline(b, th)
            except (PreconditionError, AssertionFailed) as exc:
                rep.third.append({**tag, "error": str(exc)})
                continue
            if v.holds and cert.verdict == "green":
                rep.rectangular += 1
            elif v.fails and isinstance(v.witness, LemmaWitness) and cert.verdict == "green":
                rep.witnesses.append((b, th, v.witness))
            else:
                rep.third.append({**tag, "verdict": v.to_json()})
    return rep


@dataclass
class HSReport:
    algebras: int = 0
    strongly_abelian: int = 0
    hypothesis: int = 0
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"algebras": self.algebras, "strongly_abelian": self.strongly_abelian,
                "square_hs_abelian": self.hypothesis, "violations": self.violations}


def hs_fragment_sweep(max_size: int = 3, max_arity: int = 2, algebras=None) -> HSReport:
    """For strongly abelian B with HS(B^2) abelian, check that HS(B) is strongly abelian."""
    rep = HSReport()
    for b in (algebras if algebras is not None else small_algebras(max_size, max_arity)):
        rep.algebras += 1
        if not is_strongly_abelian(b):
            continue
        rep.strongly_abelian += 1
        if hs_abelian(power(b, 2)) is not None:
            continue
        rep.hypothesis += 1
        bad = hs_strongly_abelian(b)
        if bad is not None:
            rep.violations.append({"algebra": b.to_dict(), **bad})
    return rep
