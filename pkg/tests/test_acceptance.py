"""Acceptance criteria 1-9, each timed against its runtime bound.

Every test prints one ``criterion N: PASS|FAIL`` line (also under pytest's
output capture) before asserting.
"""
import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from finalg import oracle
from finalg.algebra import FiniteAlgebra
from finalg.centrality import (
    CONDITIONS,
    check_affine,
    check_matrix_condition,
    check_property_p,
    check_strongly_solvable,
    matrix_set,
    search_rectangulating_order,
)
from finalg.cli import run, strip_timing
from finalg.constructions import LemmaWitness, build_s
from finalg.hsp import dichotomy_sweep, hs_fragment_sweep
from finalg.relations import Congruence, congruence_generated
from finalg.search import enumerate_algebras

from conftest import bare_set, chain, cyclic, left_zero, semilattice, trivial, write_doc, z2


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def timed(number: int, title: str, bound: float):
        start = time.perf_counter()
        failure = None
        try:
            yield
        except AssertionError as exc:
            failure = exc
        elapsed = time.perf_counter() - start
        in_time = elapsed < bound
        ok = failure is None and in_time
        detail = f"{elapsed:.2f}s (bound {bound:g}s)"
        if failure is not None:
            detail += f"; {failure}"
        elif not in_time:
            detail += "; over the runtime bound"
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {title}  {detail}")
        if failure is not None:
            raise failure
        assert in_time, f"criterion {number} took {elapsed:.2f}s, bound {bound}s"
    return timed


def _verdict(report):
    return report["result"]["verdict"]


# ---------------------------------------------------------------------------


def test_criterion_1_checkers_match_oracle(criterion, tmp_path):
    with criterion(1, "16 two-element binary algebras x {abelian, strongly-abelian} vs oracle", 5):
        algs = list(enumerate_algebras(2, [2]))
        assert len(algs) == 16
        for i, alg in enumerate(algs):
            p = write_doc(tmp_path / f"a{i}.json", alg)
            for prop in ("abelian", "strongly-abelian"):
                report, code = run(["check", p, "--property", prop])
                expected = oracle.term_condition_by_oracle(alg, prop, 3)
                assert (code == 0) == expected, f"{alg.operations[0].table.tolist()} {prop}"
                assert _verdict(report)["outcome"] == ("holds" if expected else "fails")


def test_criterion_2_known_verdicts(criterion, tmp_path):
    with criterion(2, "known-verdict corpus", 1):
        zp = write_doc(tmp_path / "z2.json", z2())
        report, code = run(["check", zp, "--property", "abelian"])
        assert code == 0
        report, code = run(["check", zp, "--property", "affine", "--mode", "term"])
        w = _verdict(report)["witness"]
        assert code == 0 and w["table"] == [0, 1, 1, 0, 1, 0, 0, 1]      # x + y + z
        assert w["term"] == "add(add(x1,x2),x3)"
        report, code = run(["check", zp, "--property", "strongly-abelian"])
        assert code == 1 and _verdict(report)["witness"]["matrix"] == [[1, 0], [0, 1]]

        sp = write_doc(tmp_path / "sl.json", semilattice())
        report, code = run(["check", sp, "--property", "abelian"])
        assert code == 1 and _verdict(report)["witness"]["matrix"] == [[0, 0], [1, 0]]

        lp = write_doc(tmp_path / "lz.json", left_zero())
        assert run(["check", lp, "--property", "strongly-abelian"])[1] == 0

        one = trivial()
        assert all(check_matrix_condition(one, c).holds for c in CONDITIONS)
        assert check_affine(one, "term").holds and check_affine(one).holds
        assert search_rectangulating_order(one).holds
        assert check_strongly_solvable(one).holds
        assert check_property_p(one, 0).holds


def _corpus_n3():
    named = [z2(), semilattice(), left_zero(), trivial(), bare_set(2), bare_set(3), cyclic(3), chain(3),
             FiniteAlgebra(3, [("f", 1, [1, 2, 0]), ("g", 1, [0, 0, 2])]),
             FiniteAlgebra(3, [("f", 2, [0, 0, 0, 1, 1, 1, 2, 2, 2])])]
    s, _ = build_s(bare_set(2), Congruence.full(2), varietal_checks=False)
    return named + [s.s_alg] + list(enumerate_algebras(2, [2]))


def test_criterion_3_matrix_set_two_inclusion(criterion):
    with criterion(3, "oracle matrices (arity <= 3) inside the closure set; every derivation replays", 60):
        corpus = _corpus_n3()
        assert all(a.size <= 3 for a in corpus)
        for alg in corpus:
            ms = matrix_set(alg, with_derivations=True)     # raises if any derivation fails to replay
            missing = oracle.polynomial_matrices(alg, 3) - ms.matrices()
            assert not missing, f"{alg!r}: closure misses {sorted(missing)[:3]}"


def test_criterion_4_congruence_generation_agreement(criterion):
    with criterion(4, "relational vs Maltsev-chain generation on 100 random instances", 30):
        rng = np.random.default_rng(20261015)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            ops = []
            for j in range(int(rng.integers(1, 3))):
                k = int(rng.integers(0, 3))
                ops.append((f"f{j}", k, rng.integers(0, n, size=n ** k).tolist()))
            alg = FiniteAlgebra(n, ops)
            a, b = (int(v) for v in rng.integers(0, n, size=2))
            rel = congruence_generated(alg, [(a, b)], "relational")
            mc = congruence_generated(alg, [(a, b)], "maltsev-chain")
            assert rel == mc, f"{alg.to_dict()} pair {(a, b)}"


@pytest.fixture(scope="module")
def constructed(tmp_path_factory):
    d = tmp_path_factory.mktemp("construct")
    src = write_doc(d / "set2.json", bare_set(2), congruences={"full": [[0, 1]]})
    return d, src


def _assertions(bundle):
    return [(st["name"], a) for c in bundle["certificates"] for st in c["stages"] for a in st["assertions"]]


def test_criterion_5_build_s(criterion, constructed):
    d, src = constructed
    with criterion(5, "build-s on the 2-element set with theta = 1", 5):
        report, code = run(["construct", "build-s", src, "--theta", "full", "--out", str(d / "s.json")])
        assert code == 0
        assert report["result"]["summary"]["size"] == 3
        bundle = report["result"]["certificate"]
        assert [c["verdict"] for c in bundle["certificates"]] == ["green"]
        stages = {st["name"]: st for st in bundle["certificates"][0]["stages"]}
        for item in ("item 1: more than one element", "item 2: zero is a subuniverse",
                     "item 3: Property P", "item 4: independence within budget"):
            assert stages[item]["assertions"] and all(a["holds"] for a in stages[item]["assertions"])
        pp = {a["check"] for a in stages["item 3: Property P"]["assertions"]}
        assert pp == {"property-p", "property-p-oracle"}
        assert run(["replay", str(d / "s.cert.json")])[1] == 0


def test_criterion_6_theorem2(criterion, constructed):
    d, src = constructed
    if not (d / "s.json").exists():
        run(["construct", "build-s", src, "--theta", "full", "--out", str(d / "s.json")])
    with criterion(6, "theorem2 on the collapsed S", 10):
        assert run(["construct", "collapse-ordered", str(d / "s.json"), "--out", str(d / "t.json")])[1] == 0
        report, code = run(["construct", "theorem2", str(d / "t.json"), "--out", str(d / "t2.json")])
        assert code == 0
        checks = {a["check"]: a["holds"] for _, a in _assertions(report["result"]["certificate"])}
        for name in ("order-by-polynomials", "property-p-chain", "property-p", "rectangulates",
                     "strongly-rectangular", "strongly-abelian"):
            assert checks.get(name) is True, name
        t2 = json.loads((d / "t2.json").read_text())
        assert run(["check", str(d / "t2.json"), "--property", "strongly-abelian"])[1] == 0
        assert t2["size"] == 2
        assert run(["replay", str(d / "t2.cert.json")])[1] == 0


def test_criterion_7_dichotomy_sweep(criterion):
    with criterion(7, "lemma-witness dichotomy over strongly abelian n <= 3, arity <= 2", 600):
        rep = dichotomy_sweep(max_size=3, max_arity=2)
        assert rep.third == [], rep.third[:2]
        assert rep.pairs == rep.rectangular + len(rep.witnesses)
        # witnesses are only counted when their certificate is green
        assert all(isinstance(w, LemmaWitness) for _, _, w in rep.witnesses)
        summary = rep.to_json()
        assert summary["strongly_abelian"] > 0 and summary["pairs"] > 0


def test_criterion_8_hs_fragment(criterion):
    with criterion(8, "HS(B^2) abelian implies HS(B) strongly abelian, same space", 600):
        rep = hs_fragment_sweep(max_size=3, max_arity=2)
        assert rep.violations == []
        assert rep.hypothesis > 0


def test_criterion_9_determinism(criterion, tmp_path):
    with criterion(9, "every command twice gives identical reports modulo timing", 120):
        zp = write_doc(tmp_path / "z2.json", z2())
        src = write_doc(tmp_path / "set2.json", bare_set(2), congruences={"full": [[0, 1]]})
        commands = [
            ["check", zp, "--property", "abelian", "--oracle"],
            ["check", zp, "--property", "strongly-abelian"],
            ["check", zp, "--property", "affine", "--mode", "term"],
            ["congruences", zp, "--oracle"],
            ["search", "--size", "2", "--signature", "2", "--property", "strongly-abelian & !affine(term)"],
            ["construct", "build-s", src, "--theta", "full", "--out", str(tmp_path / "s.json")],
            ["replay", str(tmp_path / "s.cert.json")],
            ["construct", "collapse-ordered", str(tmp_path / "s.json"), "--out", str(tmp_path / "t.json")],
            ["construct", "theorem2", str(tmp_path / "t.json"), "--out", str(tmp_path / "t2.json")],
            ["construct", "lemma-witness", write_doc(tmp_path / "lz.json", left_zero()), "--theta", "[[0,1]]"],
        ]
        for argv in commands:
            first, c1 = run(argv)
            second, c2 = run(argv)
            assert c1 == c2, argv
            assert json.dumps(strip_timing(first), sort_keys=True) == \
                json.dumps(strip_timing(second), sort_keys=True), argv
