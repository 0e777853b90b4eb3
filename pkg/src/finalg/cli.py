"""Command-line interface: check, construct, replay, search, congruences.

Every command prints one JSON report (sorted keys).  The ``timing``
section is the only part that varies between identical runs; the
``report_digest`` field hashes everything else.

Exit codes: 0 holds / success, 1 fails (witness emitted), 2 inconclusive,
3 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__, oracle
from .algebra import AlgebraError, ResourceLimitError
from .certificates import AssertionFailed, digest_of, replay
from .centrality import (
    CONDITIONS,
    check_affine,
    check_matrix_condition,
    check_property_p,
    check_rectangular,
    check_strongly_solvable,
    congruence_strongly_abelian,
    search_rectangulating_order,
    term_condition_c11,
    zero_is_subuniverse,
)
from .constructions import (
    DegenerateCollapseError,
    PreconditionError,
    build_s,
    collapse_to_ordered,
    lemma_witness_pipeline,
    theorem2_pipeline,
)
from .documents import AlgebraDocument, DocumentError, load, parse_congruence, parse_relation
from .relations import Congruence, InternalCheckError, all_congruences, congruence_generated, validate
from .search import PredicateError, search
from .verdict import to_jsonable

PROPERTIES = CONDITIONS + ("rectangular", "affine", "strongly-solvable", "property-p", "c11",
                           "congruence-strongly-abelian")
PIPELINES = ("build-s", "collapse-ordered", "theorem2", "lemma-witness")

EXIT_HOLDS, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# option helpers


def _theta(doc: AlgebraDocument, value: Optional[str], required: bool = True) -> Optional[Congruence]:
    if value is None:
        if required:
            raise InputError("--theta is required")
        return None
    n = doc.algebra.size
    if value.lstrip().startswith("["):
        try:
            th = parse_congruence(n, json.loads(value), "--theta")
        except json.JSONDecodeError as exc:
            raise InputError(f"--theta: {exc}") from None
        except DocumentError as exc:
            raise InputError(str(exc)) from None
    elif value in doc.congruences:
        th = doc.congruences[value]
    else:
        raise InputError(f"--theta: no congruence named {value!r} in the document")
    v = validate(doc.algebra, th, "congruence")
    if not v.holds:
        raise InputError(f"--theta is not a congruence: {json.dumps(to_jsonable(v.witness))}")
    return th


def _order(doc: AlgebraDocument, value: Optional[str], allow_search: bool = False):
    n = doc.algebra.size
    if value is None:
        if len(doc.orders) == 1:
            return next(iter(doc.orders.values()))
        raise InputError("--order is required")
    if value == "search" and allow_search:
        return "search"
    if value.lstrip().startswith("["):
        try:
            return parse_relation(n, json.loads(value), "--order")
        except json.JSONDecodeError as exc:
            raise InputError(f"--order: {exc}") from None
        except DocumentError as exc:
            raise InputError(str(exc)) from None
    if value in doc.orders:
        return doc.orders[value]
    raise InputError(f"--order: no order named {value!r} in the document")


def _zero(doc: AlgebraDocument, value: Optional[int]) -> int:
    z = value if value is not None else doc.zero
    if z is None:
        raise InputError("--zero is required (or a 'zero' entry in the document)")
    if not 0 <= z < doc.algebra.size:
        raise InputError(f"--zero {z} outside 0..{doc.algebra.size - 1}")
    return z


def _load(path: str) -> AlgebraDocument:
    try:
        return load(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except DocumentError as exc:
        raise InputError(f"{path}: {exc}") from None


def _doc_input(doc: AlgebraDocument) -> dict:
    return {"name": doc.name, "size": doc.algebra.size, "digest": digest_of(doc.to_dict())}


# ---------------------------------------------------------------------------
# commands; each returns (result dict, exit code)


def _oracle_verdict(alg, prop: str, args, theta, order, zero) -> Optional[bool]:
    k = args.max_arity
    if prop in CONDITIONS:
        return oracle.term_condition_by_oracle(alg, prop, k)
    if prop == "property-p":
        return oracle.property_p_by_oracle(alg, zero, k)
    if prop == "affine":
        ab = oracle.term_condition_by_oracle(alg, "abelian", k)
        return ab and oracle.maltsev_by_oracle(alg, args.mode == "polynomial") is not None
    if prop in ("c11", "congruence-strongly-abelian"):
        if prop == "c11":
            mats = oracle.polynomial_matrices(alg, k)
            lab = theta.labels
            return all(lab[p] != lab[q] or lab[r] == lab[s] for p, q, r, s in mats)
        mats = oracle.polynomial_matrices(alg, k, theta, theta)
        return all(oracle._satisfies(m, "strongly-abelian") for m in mats)
    if prop == "rectangular" and order != "search":
        b = order.bits
        mats = oracle.polynomial_matrices(alg, k)
        return all(not (b[u, q] and b[u, r]) or b[u, s]
                   for _, q, r, s in mats for u in range(alg.size))
    return None


def cmd_check(args) -> tuple[dict, int]:
    doc = _load(args.document)
    alg = doc.algebra
    prop = args.property
    if prop not in PROPERTIES:
        raise InputError(f"unknown property {prop!r}; choose from {', '.join(PROPERTIES)}")
    theta = order = zero = None
    if prop in CONDITIONS:
        v = check_matrix_condition(alg, prop)
    elif prop == "rectangular":
        order = _order(doc, args.order, allow_search=True)
        if order == "search":
            v = search_rectangulating_order(alg)
        else:
            vv = validate(alg, order, "partial-order")
            if not vv.holds:
                raise InputError(f"--order is not a compatible partial order: "
                                 f"{json.dumps(to_jsonable(vv.witness))}")
            v = check_rectangular(alg, order)
    elif prop == "affine":
        v = check_affine(alg, args.mode)
    elif prop == "strongly-solvable":
        v = check_strongly_solvable(alg)
    elif prop == "property-p":
        zero = _zero(doc, args.zero)
        if not zero_is_subuniverse(alg, zero):
            raise InputError(f"{{{zero}}} is not a subuniverse")
        v = check_property_p(alg, zero)
    elif prop == "c11":
        theta = _theta(doc, args.theta)
        v = term_condition_c11(alg, theta)
    else:
        theta = _theta(doc, args.theta)
        v = congruence_strongly_abelian(alg, theta)
    result = {"property": prop, "verdict": v.to_json()}
    code = v.exit_code
    if args.oracle:
        ov = _oracle_verdict(alg, prop, args, theta, order, zero)
        if ov is None:
            result["oracle"] = {"available": False}
        else:
            agrees = (ov == v.holds) and not v.inconclusive
            result["oracle"] = {"available": True, "max_arity": args.max_arity, "holds": ov,
                                "agrees": agrees}
            if not agrees and not v.inconclusive:
                result["oracle"]["note"] = "oracle and closure verdicts differ"
                code = EXIT_FAILS
    return result, code


def _write_doc(path: Path, doc: AlgebraDocument) -> None:
    path.write_text(json.dumps(doc.to_dict(), sort_keys=True) + "\n")


def _cert_path(out: Path, explicit: Optional[str]) -> Path:
    if explicit:
        return Path(explicit)
    return out.with_name(out.stem + ".cert.json")


def _stage_summary(certs) -> list:
    return [{"pipeline": c.pipeline, "stage": st.name,
             "assertions": [a.check for a in st.assertions],
             "holds": all(a.holds for a in st.assertions)}
            for c in certs for st in c.stages]


def cmd_construct(args) -> tuple[dict, int]:
    doc = _load(args.document)
    alg = doc.algebra
    pipeline = args.pipeline
    certs = []
    out_doc = None
    result: dict = {"pipeline": pipeline}
    try:
        if pipeline == "build-s":
            s, cert = build_s(alg, _theta(doc, args.theta))
            certs.append(cert)
            out_doc = AlgebraDocument(s.s_alg, zero=s.zero)
            result["summary"] = {"size": s.s_alg.size, "zero": s.zero,
                                 "graph_encoding": [list(p) for p in s.graph_encoding]}
        elif pipeline == "collapse-ordered":
            if args.theta is not None:
                s, cert = build_s(alg, _theta(doc, args.theta))
                certs.append(cert)
                t, z, order, cert = collapse_to_ordered(s)
            else:
                t, z, order, cert = collapse_to_ordered(alg, _zero(doc, args.zero))
            certs.append(cert)
            out_doc = AlgebraDocument(t, orders={"order": order}, zero=z)
            result["summary"] = {"size": t.size, "zero": z, "order": order.to_json()}
        elif pipeline == "theorem2":
            order = _order(doc, args.order)
            t2, cert = theorem2_pipeline(alg, order, _zero(doc, args.zero))
            certs.append(cert)
            z2, o2 = cert.get("zero'"), cert.get("order'")
            out_doc = AlgebraDocument(t2, orders={"order": o2}, zero=z2)
            result["summary"] = {"size": t2.size, "zero": z2, "order": o2.to_json()}
        elif pipeline == "lemma-witness":
            v, cert = lemma_witness_pipeline(alg, _theta(doc, args.theta))
            certs.append(cert)
            result["verdict"] = v.to_json()
            if v.fails:
                w = v.witness
                out_doc = AlgebraDocument(w.c_alg, congruences={"gamma": w.gamma})
                result["summary"] = {"branch": "witness", "c_size": w.c_alg.size}
            else:
                result["summary"] = {"branch": "strongly rectangular quotient"}
        else:
            raise InputError(f"unknown pipeline {pipeline!r}; choose from {', '.join(PIPELINES)}")
    except PreconditionError as exc:
        if exc.certificate is not None:
            certs.append(exc.certificate)
        result.update(error={"kind": "precondition", "hypothesis": exc.hypothesis,
                             "witness": to_jsonable(exc.witness)},
                      stages=_stage_summary(certs))
        return result, EXIT_FAILS
    except DegenerateCollapseError as exc:
        certs.append(exc.certificate)
        result.update(error={"kind": "degenerate-collapse", "message": str(exc)},
                      stages=_stage_summary(certs))
        return result, EXIT_FAILS
    bundle = {"certificates": [c.to_json() for c in certs]}
    result["stages"] = _stage_summary(certs)
    result["certificate"] = bundle
    if args.out:
        out = Path(args.out)
        if out_doc is not None:
            _write_doc(out, out_doc)
            result["document"] = out_doc.to_dict()
        cp = _cert_path(out, args.certificate)
        cp.write_text(json.dumps(bundle, sort_keys=True, indent=1) + "\n")
    elif out_doc is not None:
        result["document"] = out_doc.to_dict()
    return result, EXIT_HOLDS


def cmd_replay(args) -> tuple[dict, int]:
    try:
        data = json.loads(Path(args.certificate).read_text())
    except OSError as exc:
        raise InputError(f"{args.certificate}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.certificate}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(data, dict) and "certificate" in data and "certificates" not in data:
        data = data["certificate"]          # a construct report
    certs = data.get("certificates", [data]) if isinstance(data, dict) else None
    if not certs:
        raise InputError("no certificate found")
    results, ok = [], True
    for c in certs:
        problems = replay(c) if isinstance(c, dict) else ["not a certificate object"]
        ok &= not problems
        results.append({"pipeline": c.get("pipeline") if isinstance(c, dict) else None,
                        "assertions": sum(len(s.get("assertions", [])) for s in c.get("stages", []))
                        if isinstance(c, dict) else 0,
                        "problems": problems})
    return {"replayed": results, "verified": ok}, (EXIT_HOLDS if ok else EXIT_FAILS)


def _signature(text: str) -> list[int]:
    try:
        sig = [int(x) for x in text.replace("[", "").replace("]", "").split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--signature must be a comma-separated list of arities, got {text!r}") from None
    if any(k < 0 for k in sig):
        raise InputError("arities must be non-negative")
    return sig


def cmd_search(args) -> tuple[dict, int]:
    if args.size is None or args.size < 1:
        raise InputError("--size must be a positive integer")
    sig = _signature(args.signature)
    if args.property is None:
        raise InputError("--property (predicate expression) is required")
    space = args.size ** sum(args.size ** k for k in sig)
    if args.budget is None and space > args.space_cap:
        raise InputError(f"table space {space} exceeds {args.space_cap}; pass --budget to scan a prefix")
    try:
        res = search(args.size, sig, args.property, limit=args.limit, budget=args.budget,
                     isomorph_filter=args.isomorph_filter)
    except PredicateError as exc:
        raise InputError(f"predicate: {exc}") from None
    result = {"summary": res.summary(), "matches": [a.to_dict() for a in res.matches]}
    return result, (EXIT_INCONCLUSIVE if res.inconclusive else EXIT_HOLDS)


def cmd_congruences(args) -> tuple[dict, int]:
    doc = _load(args.document)
    alg = doc.algebra
    cons = all_congruences(alg)
    result = {"count": len(cons), "congruences": [c.to_json() for c in cons]}
    code = EXIT_HOLDS
    if args.oracle:
        if alg.size > 7:
            result["oracle"] = {"available": False, "note": "partition scan limited to size 7"}
        else:
            by_part = {Congruence(lab) for lab in oracle.all_congruences_by_partitions(alg)}
            agrees = by_part == set(cons)
            chains = all(congruence_generated(alg, [(a, b)], "both") is not None
                         for a in range(alg.size) for b in range(a + 1, alg.size))
            result["oracle"] = {"available": True, "agrees": agrees, "principal_algorithms_agree": chains}
            if not agrees:
                code = EXIT_FAILS
    return result, code


COMMANDS = {"check": cmd_check, "construct": cmd_construct, "replay": cmd_replay,
            "search": cmd_search, "congruences": cmd_congruences}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="finalg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"finalg {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="decide a property of an algebra")
    c.add_argument("document")
    c.add_argument("--property", required=True)
    c.add_argument("--theta", help="congruence name in the document or JSON block list")
    c.add_argument("--order", help="order name, JSON pair list, or 'search'")
    c.add_argument("--zero", type=int)
    c.add_argument("--mode", choices=("term", "polynomial"), default="polynomial")
    c.add_argument("--oracle", action="store_true", help="cross-check with brute-force enumeration")
    c.add_argument("--max-arity", type=int, default=3)
    c.add_argument("--out")

    k = sub.add_parser("construct", help="run a certified construction")
    k.add_argument("pipeline", choices=PIPELINES)
    k.add_argument("document")
    k.add_argument("--theta")
    k.add_argument("--order")
    k.add_argument("--zero", type=int)
    k.add_argument("--out", help="write the constructed algebra document here")
    k.add_argument("--certificate", help="certificate path (default: <out>.cert.json)")

    r = sub.add_parser("replay", help="re-verify a certificate")
    r.add_argument("certificate")
    r.add_argument("--out")

    s = sub.add_parser("search", help="scan all algebras of a size and signature")
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--signature", required=True, help="comma-separated arities, e.g. 2 or 2,1")
    s.add_argument("--property", "--predicate", dest="property", help="predicate expression")
    s.add_argument("--limit", type=int)
    s.add_argument("--budget", type=int, help="maximum number of candidates to visit")
    s.add_argument("--isomorph-filter", action="store_true")
    s.add_argument("--space-cap", type=int, default=10 ** 6)
    s.add_argument("--out")

    g = sub.add_parser("congruences", help="list Con(A)")
    g.add_argument("document")
    g.add_argument("--oracle", action="store_true")
    g.add_argument("--out")
    return p


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "command"}


def run(argv=None) -> tuple[dict, int]:
    """Parse ``argv``, run the command, and return (report, exit code)."""
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = {"tool": {"name": "finalg", "version": __version__},
              "command": args.command, "config": _config(args)}
    try:
        if getattr(args, "document", None):
            report["inputs"] = {"document": _doc_input(_load(args.document))}
        result, code = COMMANDS[args.command](args)
        report["result"] = result
    except InputError as exc:
        report["error"] = {"kind": "input", "message": str(exc)}
        code = EXIT_INPUT
    except (AlgebraError, ResourceLimitError) as exc:
        kind = "resource" if isinstance(exc, ResourceLimitError) else "input"
        report["error"] = {"kind": kind, "message": str(exc)}
        code = EXIT_INCONCLUSIVE if kind == "resource" else EXIT_INPUT
    except (InternalCheckError, AssertionFailed) as exc:
        report["error"] = {"kind": "internal", "message": str(exc)}
        code = EXIT_FAILS
    report["exit_code"] = code
    report["report_digest"] = digest_of(report)
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return report, code


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def main(argv=None) -> int:
    report, code = run(argv)
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    out = report.get("config", {}).get("out")
    if out and report.get("command") != "construct":
        Path(out).write_text(text)
    sys.stdout.write(text)
    err = report.get("error") or report.get("result", {}).get("error")
    if err:
        sys.stderr.write(f"finalg: {err.get('message') or err.get('hypothesis')}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
