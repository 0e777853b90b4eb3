"""Constructive pipelines: the graph-algebra quotient S, its ordered collapse,
the quasiorder coarsening, and the C/gamma witness for non-rectangular
quotients of strongly abelian algebras.

Every pipeline returns a :class:`~finalg.certificates.PipelineCertificate`
whose assertions are evaluated by the checks registered below, so the same
code runs at construction time and on replay.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import oracle
from .algebra import (
    FiniteAlgebra,
    constant_expansion,
    eval_term_vec,
    is_subuniverse,
    power,
    quotient_algebra,
    subalgebra,
    subuniverse_closure,
    term_operation,
    tuples_array,
)
from .centrality import (
    ABELIAN,
    STRONGLY_ABELIAN,
    STRONGLY_RECTANGULAR,
    MatrixWitness,
    _check_rect,
    check_matrix_condition,
    check_property_p,
    congruence_strongly_abelian,
    matrix_set,
    term_condition_c11,
    zero_is_subuniverse,
)
from .certificates import AssertionFailed, PipelineCertificate, check
from .clones import pol1_tables, polynomial_clone, term_clone
from .relations import (
    BinaryRelation,
    Congruence,
    InternalCheckError,
    compatible_closure,
    congruence_generated,
    intersect_with_converse,
    quotient_relation,
    validate,
)
from .terms import Op, Var, parse_term, to_prefix
from .verdict import Verdict, fails, holds

DEFAULT_MAX_ARITY = 4
DEFAULT_TERM_CAP = 20_000


class PreconditionError(ValueError):
    """A hypothesis of a pipeline does not hold for the given input."""

    def __init__(self, hypothesis: str, witness=None, certificate: Optional[PipelineCertificate] = None):
        self.hypothesis = hypothesis
        self.witness = witness
        self.certificate = certificate
        super().__init__(hypothesis)


class DegenerateCollapseError(RuntimeError):
    """The ordered collapse identified every element of S."""

    def __init__(self, certificate: PipelineCertificate):
        self.certificate = certificate
        super().__init__("degenerate collapse: S/sigma has one element")


# ---------------------------------------------------------------------------
# domain types


@dataclass
class SAlgebra:
    s_alg: FiniteAlgebra
    zero: int
    source: FiniteAlgebra
    theta: Congruence
    graph: FiniteAlgebra
    graph_encoding: list        # index in the graph algebra -> pair (a, b)
    delta: Congruence
    projection: tuple           # graph index -> element of S

    def to_json(self) -> dict:
        return {"size": self.s_alg.size, "zero": self.zero,
                "graph_encoding": [list(p) for p in self.graph_encoding],
                "delta": self.delta.to_json()}


@dataclass
class LemmaWitness:
    b_alg: FiniteAlgebra
    theta: Congruence
    failing_matrix: MatrixWitness
    c_alg: FiniteAlgebra
    c_pairs: list               # index in C -> pair of B
    gamma: Congruence
    final_matrix: tuple         # C-indices of (p,q), (r,s), (p,p), (r,r)

    def to_json(self) -> dict:
        return {
            "failing_matrix": self.failing_matrix.to_json(),
            "c_size": self.c_alg.size,
            "c_pairs": [list(p) for p in self.c_pairs],
            "gamma": self.gamma.to_json(),
            "final_matrix": [list(self.c_pairs[i]) for i in self.final_matrix],
        }


# ---------------------------------------------------------------------------
# building blocks


def graph_algebra(alg: FiniteAlgebra, theta: Congruence) -> tuple[FiniteAlgebra, list]:
    """The subalgebra of alg^2 on the theta-related pairs, in lexicographic order."""
    n = alg.size
    pairs = [(a, b) for a in range(n) for b in range(n) if theta.relates(a, b)]
    sq = power(alg, 2)
    codes = [a * n + b for a, b in pairs]
    if not is_subuniverse(sq, codes):
        raise InternalCheckError("graph of theta is not a subuniverse of A^2")
    g, _ = subalgebra(sq, codes, name=f"{alg.name}(theta)" if alg.name else "")
    return g, pairs


def _diagonal(pairs) -> list[int]:
    return [i for i, (a, b) in enumerate(pairs) if a == b]


def _delta_of(graph: FiniteAlgebra, pairs) -> Congruence:
    diag = _diagonal(pairs)
    return congruence_generated(graph, [(diag[0], d) for d in diag[1:]])


def delta_congruence(alg: FiniteAlgebra, theta: Congruence, graph=None) -> Congruence:
    """Congruence of the graph algebra generated by D x D; D must be one class."""
    v = check_matrix_condition(alg, ABELIAN)
    if not v.holds:
        raise PreconditionError("A not abelian", v.witness)
    g, pairs = graph if graph is not None else graph_algebra(alg, theta)
    delta = _delta_of(g, pairs)
    diag = _diagonal(pairs)
    cls = {i for i in range(len(pairs)) if delta.relates(diag[0], i)}
    if cls != set(diag):
        extra = sorted(cls - set(diag))
        raise InternalCheckError(f"diagonal is not a Delta-class: it absorbs {pairs[extra[0]]}")
    return delta


def coarsen_quasiorder(alg: FiniteAlgebra, zero: int) -> BinaryRelation:
    """a above b iff every unary polynomial sending a to zero sends b to zero.

    Pairs are read (a, b) = a above b.  Raises PreconditionError when {zero}
    is not a subuniverse or zero is not the least element of the result.
    """
    if not zero_is_subuniverse(alg, zero):
        raise PreconditionError(f"{{{zero}}} is not a subuniverse")
    r = _coarse(alg, zero)
    v = validate(alg, r, "quasiorder")
    if not v.holds:
        raise InternalCheckError(f"coarsened relation is not a compatible quasiorder: {v.witness}")
    below = [x for x in range(alg.size) if not r.bits[x, zero]]
    if below:
        raise PreconditionError(f"zero is not least: {below[0]} is not above {zero}",
                                {"element": below[0]})
    if r.bits[zero].sum() != 1:
        raise InternalCheckError("zero is above a nonzero element")
    return r


def _coarse(alg: FiniteAlgebra, zero: int) -> BinaryRelation:
    z = pol1_tables(alg) == zero
    bits = ~(z[:, :, None] & ~z[:, None, :]).any(axis=0)
    return BinaryRelation(alg.size, bits)


@lru_cache(maxsize=16)
def _rgs_groups(n: int, m: int):
    """Variable identifications of two m-tuples, grouped by number of variables.

    Returns {k: (rgs array, sigma codes, tau codes)} where codes index an
    m-ary table for every assignment of the k variables.
    """
    def rec(prefix, mx):
        if len(prefix) == 2 * m:
            yield tuple(prefix)
            return
        for v in range(mx + 2):
            yield from rec(prefix + [v], max(mx, v))

    by_k: dict[int, list] = {}
    for r in rec([0], 0):
        by_k.setdefault(max(r) + 1, []).append(r)
    w = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    out = {}
    for k, rs in by_k.items():
        rs = np.array(rs, dtype=np.int64)
        asg = tuples_array(n, k)
        sig = asg[:, rs[:, :m]] @ w          # (n^k, R)
        tau = asg[:, rs[:, m:]] @ w
        out[k] = (rs, sig.T.copy(), tau.T.copy())
    return out


def _identity_moving(table: np.ndarray, n: int, m: int, i: int):
    """Some t(sigma) = t(tau) identity of the table with sigma_i != tau_i, or None."""
    for k, (rs, sig, tau) in sorted(_rgs_groups(n, m).items()):
        ok = (rs[:, i] != rs[:, m + i]) & (table[sig] == table[tau]).all(axis=1)
        hit = np.nonzero(ok)[0]
        if len(hit):
            r = rs[hit[0]]
            return [int(x) + 1 for x in r[:m]], [int(x) + 1 for x in r[m:]]
    return None


def independence_check(source: FiniteAlgebra, target: FiniteAlgebra,
                       max_arity: int = DEFAULT_MAX_ARITY, cap: int = DEFAULT_TERM_CAP) -> Verdict:
    """Terms t with t(x) = t(y) in the source, x_i != y_i, must not depend on i in the target.

    Enumerates the term clone of the source at each arity up to
    ``max_arity`` (complete unless ``cap`` is reached); identities are
    decided in the source, dependence by evaluating t in the target.
    """
    n = source.size
    counts, complete = {}, True
    for m in range(1, max_arity + 1):
        cs = term_clone(source, m, cap=cap, with_derivations=True)
        complete &= cs.exhausted
        counts[m] = len(cs)
        for f in cs.maps:
            t = cs.derivations[f]
            ts = term_operation(target, t, m).reshape((target.size,) * m)
            table = np.asarray(f.table, dtype=np.int64)
            for i in range(m):
                if (ts == ts.take([0], axis=i)).all():
                    continue
                ident = _identity_moving(table, n, m, i)
                if ident is not None:
                    return fails({"term": to_prefix(t), "arity": m, "position": i + 1,
                                  "left": ident[0], "right": ident[1]},
                                 "identity moves a variable the target depends on",
                                 term_operations=counts, complete=complete)
    note = "checked over the complete term clones" if complete else f"checked within cap {cap}"
    return holds(note, term_operations=counts, complete=complete, max_arity=max_arity)


def property_p_chain(alg: FiniteAlgebra, order: BinaryRelation, zero: int,
                     max_arity: int = 3) -> Verdict:
    """Property P for polynomials up to ``max_arity`` by zeroing coordinates one at a time.

    Each step replaces s_i by zero; it is licensed by s_i >= zero and the
    order characterization, and the value zero is confirmed at every step.
    """
    n = alg.size
    steps = 0
    for k in range(1, max_arity + 1):
        polys = np.array(polynomial_clone(alg, k).tables, dtype=np.int64)
        pts = tuples_array(n, k)
        w = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
        cur = pts.copy()
        alive = polys[:, pts @ w] == zero            # (P, n^k)
        for i in range(k):
            if not order.bits[cur[:, i], zero].all():
                bad = int(np.nonzero(~order.bits[cur[:, i], zero])[0][0])
                return fails({"element": int(cur[bad, i])}, "element not above zero")
            cur[:, i] = zero
            nxt = polys[:, cur @ w] == zero
            broken = alive & ~nxt
            if broken.any():
                p, s = (int(x) for x in np.argwhere(broken)[0])
                return fails({"table": polys[p].tolist(), "s": pts[s].tolist(), "step": i + 1},
                             "zeroing a coordinate lost the value zero")
            steps += int(alive.sum())
    return holds("every chain reaches p(0,...,0) = 0", steps=steps, max_arity=max_arity)


# ---------------------------------------------------------------------------
# registered checks (args are object keys unless noted)


def _pairs(v) -> list:
    return [tuple(p) for p in v]


@check("congruence")
def _chk_congruence(ctx, alg, theta):
    return validate(ctx[alg], ctx[theta], "congruence")


@check("relation-kind")
def _chk_kind(ctx, alg, relation, kind):
    return validate(ctx[alg], ctx[relation], kind)


@check("abelian")
def _chk_abelian(ctx, alg):
    return check_matrix_condition(ctx[alg], ABELIAN)


@check("strongly-rectangular")
def _chk_sr(ctx, alg):
    return check_matrix_condition(ctx[alg], STRONGLY_RECTANGULAR)


@check("strongly-abelian")
def _chk_sa(ctx, alg):
    return check_matrix_condition(ctx[alg], STRONGLY_ABELIAN)


@check("congruence-strongly-abelian")
def _chk_csa(ctx, alg, theta):
    return congruence_strongly_abelian(ctx[alg], ctx[theta])


@check("c11")
def _chk_c11(ctx, alg, theta):
    return term_condition_c11(ctx[alg], ctx[theta])


@check("c11-fails")
def _chk_c11_fails(ctx, alg, theta):
    v = term_condition_c11(ctx[alg], ctx[theta])
    return v.fails, v.note


@check("nontrivial")
def _chk_nontrivial(ctx, theta):
    return not ctx[theta].is_identity, "theta is the identity congruence"


@check("graph-algebra")
def _chk_graph(ctx, source, theta, graph, encoding):
    g, pairs = graph_algebra(ctx[source], ctx[theta])
    return g == ctx[graph] and pairs == _pairs(ctx[encoding])


@check("delta-generated")
def _chk_delta(ctx, graph, encoding, delta):
    return _delta_of(ctx[graph], _pairs(ctx[encoding])) == ctx[delta]


@check("diagonal-is-class")
def _chk_diag_class(ctx, encoding, delta):
    pairs, d = _pairs(ctx[encoding]), ctx[delta]
    diag = _diagonal(pairs)
    cls = {i for i in range(len(pairs)) if d.relates(diag[0], i)}
    return cls == set(diag)


@check("quotient")
def _chk_quotient(ctx, alg, theta, quotient):
    q, _ = quotient_algebra(ctx[alg], ctx[theta])
    return q == ctx[quotient]


@check("class-of")
def _chk_class_of(ctx, theta, element, image):
    return ctx[theta].labels[ctx[element]] == ctx[image]


@check("more-than-one-element")
def _chk_size(ctx, alg):
    return ctx[alg].size > 1, f"size {ctx[alg].size}"


@check("zero-subuniverse")
def _chk_zero_sub(ctx, alg, zero):
    return zero_is_subuniverse(ctx[alg], ctx[zero])


@check("zero-fixed")
def _chk_zero_fixed(ctx, alg, zero):
    a, z = ctx[alg], ctx[zero]
    return all(int(o.table[sum(z * a.size ** j for j in range(o.arity))]) == z
               for o in a.operations)


@check("property-p")
def _chk_pp(ctx, alg, zero):
    return check_property_p(ctx[alg], ctx[zero])


@check("property-p-oracle")
def _chk_pp_oracle(ctx, alg, zero, max_arity):
    return oracle.property_p_by_oracle(ctx[alg], ctx[zero], max_arity)


@check("property-p-chain")
def _chk_pp_chain(ctx, alg, order, zero, max_arity):
    return property_p_chain(ctx[alg], ctx[order], ctx[zero], max_arity)


@check("independence")
def _chk_indep(ctx, source, alg, max_arity, cap):
    return independence_check(ctx[source], ctx[alg], max_arity, cap)


@check("quasiorder-generated")
def _chk_qgen(ctx, alg, zero, relation):
    a, z = ctx[alg], ctx[zero]
    q = compatible_closure(a, [(x, z) for x in range(a.size)], reflexive=True, transitive=True)
    return q == ctx[relation]


@check("symmetric-part")
def _chk_sym(ctx, relation, theta):
    return Congruence.from_relation(intersect_with_converse(ctx[relation])) == ctx[theta]


@check("quotient-relation")
def _chk_qrel(ctx, relation, theta, image):
    return quotient_relation(ctx[relation], ctx[theta]) == ctx[image]


@check("least-element")
def _chk_least(ctx, order, zero):
    o, z = ctx[order], ctx[zero]
    return bool(o.bits[:, z].all())


@check("coarsening")
def _chk_coarse(ctx, alg, zero, relation):
    return _coarse(ctx[alg], ctx[zero]) == ctx[relation]


@check("extends")
def _chk_extends(ctx, larger, smaller):
    return ctx[smaller] <= ctx[larger]


@check("zero-only-above-itself")
def _chk_zero_min(ctx, relation, zero):
    return int(ctx[relation].bits[ctx[zero]].sum()) == 1


@check("order-by-polynomials")
def _chk_eq3(ctx, alg, order, zero):
    """a >= b exactly when f(a) = 0 implies f(b) = 0 for every unary polynomial f."""
    return _coarse(ctx[alg], ctx[zero]) == ctx[order]


@check("rectangulates")
def _chk_rect(ctx, alg, order):
    a = ctx[alg]
    return _check_rect(matrix_set(a), ctx[order])


def _witness_from_json(d) -> MatrixWitness:
    p, q = d["matrix"][0]
    r, s = d["matrix"][1]
    return MatrixWitness((p, q, r, s), parse_term(d["term"]), tuple(d["a"]), tuple(d["b"]),
                         tuple(d["u"]), tuple(d["v"]))


@check("matrix-witness")
def _chk_mw(ctx, alg, witness):
    w = _witness_from_json(ctx[witness])
    return w.replay(ctx[alg]) == w.matrix


@check("side-condition")
def _chk_side(ctx, theta, witness):
    p, q, r, s = _witness_from_json(ctx[witness]).matrix
    th = ctx[theta]
    return th.relates(q, r) and not th.relates(r, s)


@check("no-related-entries")
def _chk_claim_theta(ctx, theta, witness):
    p, q, r, s = _witness_from_json(ctx[witness]).matrix
    th = ctx[theta]
    bad = [pair for pair in ((p, q), (r, s), (p, r), (q, s)) if th.relates(*pair)]
    return not bad, f"theta-related: {bad}" if bad else ""


def _c_generators(n: int, w: MatrixWitness) -> list[int]:
    return sorted({z * n + z for z in range(n)} | {u * n + v for u, v in zip(w.u, w.v)})


@check("generated-subalgebra")
def _chk_c(ctx, alg, witness, c_alg, c_pairs):
    b = ctx[alg]
    n = b.size
    sq = power(b, 2)
    univ = subuniverse_closure(sq, _c_generators(n, _witness_from_json(ctx[witness])))
    c, elems = subalgebra(sq, univ)
    return c == ctx[c_alg] and [divmod(e, n) for e in elems] == _pairs(ctx[c_pairs])


def _eval_on_pairs(b: FiniteAlgebra, w: MatrixWitness, rows, cols) -> tuple[int, int]:
    """Evaluate the witness term on B^2 with pair arguments; constants c act diagonally."""
    n = b.size
    sq = power(b, 2)
    expanded = constant_expansion(b)
    # constant symbols of B become diagonal constants of B^2
    consts = [(o.symbol, 0, [int(o.table[0]) * n + int(o.table[0])])
              for o in expanded.operations if o.arity == 0 and not b.has_op(o.symbol)]
    sq_c = FiniteAlgebra(sq.size, list(sq.operations) + consts)
    env = {}
    for i, (x, y) in enumerate(rows):
        env[i + 1] = np.array([x * n + y])
    k = len(rows)
    for j, (x, y) in enumerate(cols):
        env[k + j + 1] = np.array([x * n + y])
    code = int(eval_term_vec(sq_c, w.term, env)[0])
    return divmod(code, n)


def _eq9_entries(b: FiniteAlgebra, w: MatrixWitness) -> list[tuple[int, int]]:
    aa = [(x, x) for x in w.a]
    bb = [(x, x) for x in w.b]
    uv = list(zip(w.u, w.v))
    uu = [(x, x) for x in w.u]
    return [_eval_on_pairs(b, w, aa, uv), _eval_on_pairs(b, w, bb, uv),
            _eval_on_pairs(b, w, aa, uu), _eval_on_pairs(b, w, bb, uu)]


@check("entries-in-c")
def _chk_entries(ctx, alg, witness, c_pairs):
    b, w = ctx[alg], _witness_from_json(ctx[witness])
    p, q, r, s = w.matrix
    got = _eq9_entries(b, w)
    members = set(_pairs(ctx[c_pairs]))
    args_in_c = all(pr in members for pr in
                    [(x, x) for x in w.a + w.b + w.u] + list(zip(w.u, w.v)))
    return got == [(p, q), (r, s), (p, p), (r, r)] and all(g in members for g in got) and args_in_c


@check("principal-congruence")
def _chk_principal(ctx, alg, theta, pair):
    x, y = ctx[pair]
    return congruence_generated(ctx[alg], [(x, y)]) == ctx[theta]


@check("gamma-on-diagonal")
def _chk_gamma_diag(ctx, c_pairs, gamma, theta):
    pairs, g, th = _pairs(ctx[c_pairs]), ctx[gamma], ctx[theta]
    diag = [i for i, (x, y) in enumerate(pairs) if x == y]
    dset = set(diag)
    for i in diag:
        for j in range(len(pairs)):
            if g.relates(i, j):
                if j not in dset:
                    return False, f"gamma-class of {pairs[i]} leaves the diagonal at {pairs[j]}"
                if not th.relates(pairs[i][0], pairs[j][0]):
                    return False, f"{pairs[i]} gamma {pairs[j]} but not theta-related"
    return True, ""


@check("not-related")
def _chk_not_related(ctx, theta, x, y):
    return not ctx[theta].relates(ctx[x], ctx[y])


@check("final-matrix")
def _chk_final(ctx, alg, witness, c_alg, c_pairs, matrix):
    pairs = _pairs(ctx[c_pairs])
    idx = {p: i for i, p in enumerate(pairs)}
    want = [idx.get(e) for e in _eq9_entries(ctx[alg], _witness_from_json(ctx[witness]))]
    if want != list(ctx[matrix]):
        return False, "entries differ from the evaluated matrix"
    return tuple(want) in matrix_set(ctx[c_alg]), "not in the matrix set of C"


@check("no-witness-matrix")
def _chk_none(ctx, alg, theta):
    return _find_side_matrix(matrix_set(ctx[alg]), ctx[theta]) is None


@check("quotient-strongly-rectangular")
def _chk_qsr(ctx, alg, theta):
    q, _ = quotient_algebra(ctx[alg], ctx[theta])
    return check_matrix_condition(q, STRONGLY_RECTANGULAR)


# ---------------------------------------------------------------------------
# pipelines


def _require(cert: PipelineCertificate, name: str, message: str, **args) -> None:
    if not cert.check(name, hard=False, **args):
        cert.verdict = "precondition failed"
        raise PreconditionError(message, cert.stages[-1].assertions[-1].witness, cert)


def build_s(alg: FiniteAlgebra, theta: Congruence, varietal_checks: bool = True,
            max_arity: int = DEFAULT_MAX_ARITY, term_cap: int = DEFAULT_TERM_CAP,
            oracle_arity: int = 3) -> tuple[SAlgebra, PipelineCertificate]:
    """S = A(theta)/Delta with its zero, certified for items (1)-(4)."""
    cert = PipelineCertificate("build-s", {"varietal_checks": varietal_checks, "max_arity": max_arity,
                                           "term_cap": term_cap, "oracle_arity": oracle_arity})
    cert.put("A", alg)
    cert.put("theta", theta)
    cert.stage("preconditions", ["A", "theta"])
    _require(cert, "congruence", "theta not a congruence", alg="A", theta="theta")
    _require(cert, "abelian", "A not abelian", alg="A")
    _require(cert, "congruence-strongly-abelian", "theta not strongly abelian", alg="A", theta="theta")
    _require(cert, "nontrivial", "theta is the identity congruence", theta="theta")

    g, pairs = graph_algebra(alg, theta)
    cert.stage("graph algebra", ["A", "theta"], [cert.put("A(theta)", g), cert.put("encoding", pairs)])
    cert.check("graph-algebra", source="A", theta="theta", graph="A(theta)", encoding="encoding")

    delta = delta_congruence(alg, theta, (g, pairs))
    cert.stage("Delta", ["A(theta)", "encoding"], [cert.put("Delta", delta)])
    cert.check("delta-generated", graph="A(theta)", encoding="encoding", delta="Delta")
    cert.check("diagonal-is-class", encoding="encoding", delta="Delta")

    s_alg, labels = quotient_algebra(g, delta, name="S")
    zero = labels[_diagonal(pairs)[0]]
    cert.put("diagonal-element", _diagonal(pairs)[0])
    cert.stage("quotient", ["A(theta)", "Delta"], [cert.put("S", s_alg), cert.put("zero", zero)])
    cert.check("quotient", alg="A(theta)", theta="Delta", quotient="S")
    cert.check("class-of", theta="Delta", element="diagonal-element", image="zero")

    cert.stage("item 1: more than one element", ["S"])
    cert.check("more-than-one-element", alg="S")
    cert.stage("item 2: zero is a subuniverse", ["S", "zero"])
    cert.check("zero-subuniverse", alg="S", zero="zero")
    cert.check("zero-fixed", alg="S", zero="zero")
    cert.stage("item 3: Property P", ["S", "zero"])
    cert.check("property-p", alg="S", zero="zero")
    cert.check("property-p-oracle", alg="S", zero="zero", max_arity=oracle_arity)
    if varietal_checks:
        cert.stage("item 4: independence within budget", ["A", "S"])
        cert.check("independence", source="A", alg="S", max_arity=max_arity, cap=term_cap)
    s = SAlgebra(s_alg, zero, alg, theta, g, pairs, delta, labels)
    return s, cert.finish()


def collapse_to_ordered(s, zero: Optional[int] = None, varietal_checks: bool = True,
                        max_arity: int = DEFAULT_MAX_ARITY, term_cap: int = DEFAULT_TERM_CAP,
                        oracle_arity: int = 3):
    """Quotient S by the symmetric part of the quasiorder generated by all (x, zero).

    ``s`` is an :class:`SAlgebra` or a plain algebra with ``zero`` given (then
    item 4 is skipped, there being no generating algebra).  Returns
    ``(T, zero, order, certificate)``; order pairs (a, b) mean a >= b.
    """
    if isinstance(s, SAlgebra):
        s_alg, zero, source = s.s_alg, s.zero, s.source
    else:
        s_alg, source = s, None
        if zero is None:
            raise ValueError("zero is required when collapsing a plain algebra")
    cert = PipelineCertificate("collapse-ordered", {"varietal_checks": varietal_checks and source is not None,
                                                    "max_arity": max_arity, "term_cap": term_cap,
                                                    "oracle_arity": oracle_arity})
    cert.put("S", s_alg)
    cert.put("zero", zero)
    if source is not None:
        cert.put("A", source)
    cert.stage("preconditions", ["S", "zero"])
    _require(cert, "more-than-one-element", "|S| > 1 required", alg="S")
    _require(cert, "zero-subuniverse", f"{{{zero}}} is not a subuniverse", alg="S", zero="zero")

    q = compatible_closure(s_alg, [(x, zero) for x in range(s_alg.size)], reflexive=True, transitive=True)
    cert.stage("quasiorder", ["S", "zero"], [cert.put("Q", q)])
    cert.check("quasiorder-generated", alg="S", zero="zero", relation="Q")
    cert.check("relation-kind", alg="S", relation="Q", kind="quasiorder")

    sigma = Congruence.from_relation(intersect_with_converse(q))
    cert.stage("symmetric part", ["Q"], [cert.put("sigma", sigma)])
    cert.check("symmetric-part", relation="Q", theta="sigma")
    cert.check("congruence", alg="S", theta="sigma")

    t_alg, labels = quotient_algebra(s_alg, sigma, name="S/sigma")
    order = quotient_relation(q, sigma)
    tzero = labels[zero]
    cert.stage("ordered quotient", ["S", "sigma", "Q"],
               [cert.put("T", t_alg), cert.put("order", order), cert.put("zero'", tzero)])
    cert.check("quotient", alg="S", theta="sigma", quotient="T")
    cert.check("quotient-relation", relation="Q", theta="sigma", image="order")
    cert.check("class-of", theta="sigma", element="zero", image="zero'")
    cert.check("relation-kind", alg="T", relation="order", kind="partial-order")
    cert.check("least-element", order="order", zero="zero'")

    cert.stage("item 1 on S/sigma", ["T"])
    if not cert.check("more-than-one-element", hard=False, alg="T"):
        cert.verdict = "degenerate"
        raise DegenerateCollapseError(cert)
    cert.stage("item 2 on S/sigma", ["T", "zero'"])
    cert.check("zero-subuniverse", alg="T", zero="zero'")
    cert.stage("item 3 on S/sigma", ["T", "zero'"])
    cert.check("property-p", alg="T", zero="zero'")
    cert.check("property-p-oracle", alg="T", zero="zero'", max_arity=oracle_arity)
    if varietal_checks and source is not None:
        cert.stage("item 4 on S/sigma", ["A", "T"])
        cert.check("independence", source="A", alg="T", max_arity=max_arity, cap=term_cap)
    return t_alg, tzero, order, cert.finish()


def theorem2_pipeline(alg: FiniteAlgebra, order: BinaryRelation, zero: int,
                      chain_arity: int = 3) -> tuple[FiniteAlgebra, PipelineCertificate]:
    """Coarsen the order by the unary-polynomial rule and certify the quotient T'.

    Returns ``T'`` (named ``T'``); its order and zero are stored in the
    certificate as ``order'`` and ``zero'``.
    """
    cert = PipelineCertificate("theorem2", {"chain_arity": chain_arity})
    cert.put("T", alg)
    cert.put("order", order)
    cert.put("zero", zero)
    cert.stage("preconditions", ["T", "order", "zero"])
    _require(cert, "abelian", "T not abelian", alg="T")
    _require(cert, "relation-kind", "order is not a compatible partial order",
             alg="T", relation="order", kind="partial-order")
    _require(cert, "least-element", f"{zero} is not the least element of the order",
             order="order", zero="zero")
    _require(cert, "zero-subuniverse", f"{{{zero}}} is not a subuniverse", alg="T", zero="zero")

    coarse = coarsen_quasiorder(alg, zero)
    cert.stage("coarsened quasiorder", ["T", "zero"], [cert.put("coarse", coarse)])
    cert.check("coarsening", alg="T", zero="zero", relation="coarse")
    cert.check("relation-kind", alg="T", relation="coarse", kind="quasiorder")
    cert.check("extends", larger="coarse", smaller="order")
    cert.check("least-element", order="coarse", zero="zero")
    cert.check("zero-only-above-itself", relation="coarse", zero="zero")

    theta = Congruence.from_relation(intersect_with_converse(coarse))
    t2, labels = quotient_algebra(alg, theta, name="T'")
    order2 = quotient_relation(coarse, theta)
    zero2 = labels[zero]
    cert.stage("quotient by the symmetric part", ["T", "coarse"],
               [cert.put("theta", theta), cert.put("T'", t2), cert.put("order'", order2),
                cert.put("zero'", zero2)])
    cert.check("symmetric-part", relation="coarse", theta="theta")
    cert.check("quotient", alg="T", theta="theta", quotient="T'")
    cert.check("quotient-relation", relation="coarse", theta="theta", image="order'")
    cert.check("class-of", theta="theta", element="zero", image="zero'")
    cert.check("relation-kind", alg="T'", relation="order'", kind="partial-order")

    cert.stage("(i) order characterized by unary polynomials", ["T'", "order'", "zero'"])
    cert.check("order-by-polynomials", alg="T'", order="order'", zero="zero'")
    cert.stage("(ii) Property P", ["T'", "order'", "zero'"])
    cert.check("property-p-chain", alg="T'", order="order'", zero="zero'", max_arity=chain_arity)
    cert.check("property-p", alg="T'", zero="zero'")
    cert.stage("(iii) rectangulation", ["T'", "order'"])
    cert.check("rectangulates", alg="T'", order="order'")
    cert.stage("(iv) strong rectangularity", ["T'"])
    cert.check("strongly-rectangular", alg="T'")
    cert.stage("(v) strongly abelian", ["T'"])
    cert.check("abelian", alg="T'")
    cert.check("strongly-abelian", alg="T'")
    return t2, cert.finish()


def _find_side_matrix(ms, theta: Congruence) -> Optional[int]:
    """Matrix with q theta r but not r theta s, smallest (p,q,r,s) code first."""
    lab = np.array(theta.labels)[ms.rows]
    mask = (lab[:, 1] == lab[:, 2]) & (lab[:, 2] != lab[:, 3])
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return None
    return int(idx[np.argmin(ms.codes[idx])])


def lemma_witness_pipeline(b_alg: FiniteAlgebra, theta: Congruence) -> tuple[Verdict, PipelineCertificate]:
    """Either b/theta is strongly rectangular, or build C <= B^2 and gamma with C/gamma not abelian.

    The verdict holds when no witness exists (the quotient is strongly
    rectangular) and fails with a :class:`LemmaWitness` otherwise.  Both
    outcomes come with a green certificate; any internal assertion failure
    raises :class:`~finalg.certificates.AssertionFailed`.
    """
    cert = PipelineCertificate("lemma-witness", {})
    cert.put("B", b_alg)
    cert.put("theta", theta)
    cert.stage("preconditions", ["B", "theta"])
    _require(cert, "strongly-abelian", "B not strongly abelian", alg="B")
    _require(cert, "congruence", "theta not a congruence", alg="B", theta="theta")
    _require(cert, "c11", "B/theta not abelian", alg="B", theta="theta")

    ms = matrix_set(b_alg)
    hit = _find_side_matrix(ms, theta)
    if hit is None:
        cert.stage("no witness", ["B", "theta"])
        cert.check("no-witness-matrix", alg="B", theta="theta")
        cert.check("quotient-strongly-rectangular", alg="B", theta="theta")
        cert.finish()
        return holds("strongly rectangular quotient, no witness exists"), cert

    w = ms.witness(hit)
    cert.stage("failing matrix", ["B", "theta"], [cert.put("matrix", w)])
    cert.check("matrix-witness", alg="B", witness="matrix")
    cert.check("side-condition", theta="theta", witness="matrix")
    cert.check("no-related-entries", theta="theta", witness="matrix")

    n = b_alg.size
    sq = power(b_alg, 2)
    c_alg, elems = subalgebra(sq, subuniverse_closure(sq, _c_generators(n, w)), name="C")
    c_pairs = [divmod(e, n) for e in elems]
    cert.stage("C", ["B", "matrix"], [cert.put("C", c_alg), cert.put("C-pairs", c_pairs)])
    cert.check("generated-subalgebra", alg="B", witness="matrix", c_alg="C", c_pairs="C-pairs")
    cert.check("entries-in-c", alg="B", witness="matrix", c_pairs="C-pairs")

    p, q, r, s = w.matrix
    idx = {pr: i for i, pr in enumerate(c_pairs)}
    final = (idx[(p, q)], idx[(r, s)], idx[(p, p)], idx[(r, r)])
    gamma = congruence_generated(c_alg, [final[:2]])
    cert.put("generator", list(final[:2]))
    cert.put("(p,p)", final[2])
    cert.put("(r,r)", final[3])
    cert.stage("gamma", ["C", "generator"], [cert.put("gamma", gamma)])
    cert.check("principal-congruence", alg="C", theta="gamma", pair="generator")
    cert.check("gamma-on-diagonal", c_pairs="C-pairs", gamma="gamma", theta="theta")
    cert.check("not-related", theta="gamma", x="(p,p)", y="(r,r)")

    cert.stage("C/gamma not abelian", ["C", "gamma"], [cert.put("final-matrix", list(final))])
    cert.check("final-matrix", alg="B", witness="matrix", c_alg="C", c_pairs="C-pairs", matrix="final-matrix")
    cert.check("c11-fails", alg="C", theta="gamma")
    lw = LemmaWitness(b_alg, theta, w, c_alg, c_pairs, gamma, final)
    cert.finish()
    return fails(lw, "quotient not strongly rectangular; C/gamma is not abelian"), cert


__all__ = [
    "AssertionFailed", "DegenerateCollapseError", "LemmaWitness", "PreconditionError", "SAlgebra",
    "build_s", "coarsen_quasiorder", "collapse_to_ordered", "delta_congruence", "graph_algebra",
    "independence_check", "lemma_witness_pipeline", "property_p_chain", "theorem2_pipeline",
]
