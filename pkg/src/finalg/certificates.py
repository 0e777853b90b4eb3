"""Replayable pipeline certificates.

A certificate stores every object a pipeline produced (algebras,
congruences, relations, elements, plain values) with a content digest, and
an ordered list of stages.  Each stage lists named assertions whose
arguments refer to stored objects by key.  Assertions are evaluated by the
functions registered in :data:`CHECKS`, both while the pipeline runs and
again on replay, so replay needs nothing but the certificate itself.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable

from .algebra import FiniteAlgebra
from .relations import BinaryRelation, Congruence
from .verdict import Verdict, to_jsonable

FORMAT = "finalg-certificate/1"

CHECKS: dict[str, Callable] = {}


def check(name: str):
    """Register an assertion evaluator ``fn(ctx, **args) -> bool | (bool, note)``."""
    def deco(fn):
        CHECKS[name] = fn
        return fn
    return deco


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest_of(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def encode_object(obj) -> dict:
    if isinstance(obj, FiniteAlgebra):
        return {"type": "algebra", "value": obj.to_dict()}
    if isinstance(obj, Congruence):
        return {"type": "congruence", "value": {"size": obj.size, "blocks": obj.to_json()}}
    if isinstance(obj, BinaryRelation):
        return {"type": "relation", "value": {"size": obj.size, "pairs": obj.to_json()}}
    if isinstance(obj, bool):
        return {"type": "value", "value": obj}
    if isinstance(obj, int):
        return {"type": "element", "value": int(obj)}
    return {"type": "value", "value": json.loads(json.dumps(to_jsonable(obj)))}


def decode_object(entry: dict):
    kind, value = entry["type"], entry["value"]
    if kind == "algebra":
        from .documents import algebra_from_dict
        return algebra_from_dict(value)
    if kind == "congruence":
        return Congruence.from_blocks(value["size"], value["blocks"])
    if kind == "relation":
        return BinaryRelation.from_pairs(value["size"], value["pairs"])
    if kind == "element":
        return int(value)
    if kind == "value":
        return value
    raise ValueError(f"unknown object type {kind!r}")


class Context:
    """Decoded certificate objects, addressed by key."""

    def __init__(self, objects: dict):
        self._raw = objects
        self._cache: dict[str, Any] = {}

    def __getitem__(self, key: str):
        if key not in self._cache:
            self._cache[key] = decode_object(self._raw[key])
        return self._cache[key]

    def put(self, key: str, obj) -> None:
        self._cache[key] = obj


@dataclass
class Assertion:
    check: str
    args: dict
    holds: bool
    note: str = ""
    witness: Any = None

    def to_json(self) -> dict:
        out = {"check": self.check, "args": self.args, "holds": self.holds}
        if self.note:
            out["note"] = self.note
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Stage:
    name: str
    inputs: list
    outputs: list = field(default_factory=list)
    assertions: list = field(default_factory=list)


class AssertionFailed(Exception):
    def __init__(self, stage: str, assertion: Assertion):
        self.stage = stage
        self.assertion = assertion
        super().__init__(f"stage {stage!r}: {assertion.check} failed"
                         + (f" ({assertion.note})" if assertion.note else ""))


def _run_check(ctx: Context, name: str, args: dict) -> tuple[bool, str, Any]:
    out = CHECKS[name](ctx, **args)
    if isinstance(out, Verdict):
        w = to_jsonable(out.witness) if out.witness is not None else None
        return out.holds, out.note, w
    if isinstance(out, tuple):
        return bool(out[0]), str(out[1]), None
    return bool(out), "", None


class PipelineCertificate:
    def __init__(self, pipeline: str, config: dict | None = None):
        self.pipeline = pipeline
        self.config = dict(config or {})
        self.objects: dict[str, dict] = {}
        self.stages: list[Stage] = []
        self.verdict = "incomplete"
        self._ctx = Context(self.objects)

    # building -------------------------------------------------------------

    def put(self, key: str, obj) -> str:
        entry = encode_object(obj)
        entry["digest"] = digest_of(entry["value"])
        self.objects[key] = entry
        # checks see exactly what a replay will decode
        self._ctx.put(key, decode_object(entry))
        return key

    def get(self, key: str):
        return self._ctx[key]

    def stage(self, name: str, inputs=(), outputs=()) -> Stage:
        st = Stage(name, list(inputs), list(outputs))
        self.stages.append(st)
        return st

    def add_outputs(self, *keys: str) -> None:
        self.stages[-1].outputs.extend(keys)

    def check(self, name: str, hard: bool = True, **args) -> bool:
        ok, note, witness = _run_check(self._ctx, name, args)
        a = Assertion(name, args, ok, note, witness)
        self.stages[-1].assertions.append(a)
        if hard and not ok:
            self.verdict = "failed"
            raise AssertionFailed(self.stages[-1].name, a)
        return ok

    def finish(self, verdict: str = "green") -> "PipelineCertificate":
        self.verdict = verdict
        return self

    # serialization --------------------------------------------------------

    def _stage_digest(self, keys) -> str:
        return digest_of([[k, self.objects[k]["digest"]] for k in keys])

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "pipeline": self.pipeline,
            "config": self.config,
            "objects": self.objects,
            "stages": [
                {
                    "name": st.name,
                    "inputs": st.inputs,
                    "outputs": st.outputs,
                    "input_digest": self._stage_digest(st.inputs),
                    "output_digest": self._stage_digest(st.outputs),
                    "assertions": [a.to_json() for a in st.assertions],
                }
                for st in self.stages
            ],
            "verdict": self.verdict,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @property
    def assertion_count(self) -> int:
        return sum(len(s.assertions) for s in self.stages)


def replay(cert: dict) -> list[str]:
    """Re-verify a serialized certificate; returns the list of problems (empty = ok)."""
    from . import constructions  # noqa: F401  (registers the checks)

    problems: list[str] = []
    if cert.get("format") != FORMAT:
        return [f"unknown certificate format {cert.get('format')!r}"]
    objects = cert.get("objects", {})
    for key, entry in objects.items():
        if digest_of(entry.get("value")) != entry.get("digest"):
            problems.append(f"object {key!r}: digest mismatch")
    if problems:
        return problems
    ctx = Context(objects)
    for st in cert.get("stages", []):
        for side in ("inputs", "outputs"):
            keys = st.get(side, [])
            missing = [k for k in keys if k not in objects]
            if missing:
                problems.append(f"stage {st['name']!r}: missing objects {missing}")
                continue
            d = digest_of([[k, objects[k]["digest"]] for k in keys])
            if d != st.get(side[:-1] + "_digest"):
                problems.append(f"stage {st['name']!r}: {side} digest mismatch")
        for a in st.get("assertions", []):
            name = a.get("check")
            if name not in CHECKS:
                problems.append(f"stage {st['name']!r}: unknown check {name!r}")
                continue
            try:
                ok, note, _ = _run_check(ctx, name, a.get("args", {}))
            except Exception as exc:  # a tampered object may not even decode
                ok, note = False, f"{type(exc).__name__}: {exc}"
            if not ok:
                problems.append(f"stage {st['name']!r}: {name} does not re-verify"
                                + (f" ({note})" if note else ""))
            elif not a.get("holds", False):
                problems.append(f"stage {st['name']!r}: {name} recorded as failing")
    if cert.get("verdict") != "green" and not problems:
        problems.append(f"certificate verdict is {cert.get('verdict')!r}")
    return problems
