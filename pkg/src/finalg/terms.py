"""Terms over a finite signature, with prefix-notation printing and parsing.

Variables are written ``x1, x2, ...``; applications as ``f(t1,...,tk)``;
0-ary symbols as ``c`` or ``c()``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


class TermError(ValueError):
    """Raised for malformed terms or failed evaluation.

    ``path`` is the list of child positions leading from the root to the
    offending node.
    """

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        self.path = tuple(path)
        where = "root" if not path else "root" + "".join(f"[{i}]" for i in path)
        super().__init__(f"{message} (at {where})")


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise TermError(f"variable index must be positive, got {self.index}")

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Op:
    symbol: str
    args: tuple["Term", ...] = ()

    def __init__(self, symbol: str, args=()):
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "args", tuple(args))

    def __str__(self) -> str:
        return to_prefix(self)


Term = Union[Var, Op]


def x(i: int) -> Var:
    return Var(i)


def nodes(t: Term) -> Iterator[tuple[tuple[int, ...], Term]]:
    """Yield ``(path, node)`` for every node, preorder."""
    stack = [((), t)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, Op):
            for i in range(len(node.args) - 1, -1, -1):
                stack.append((path + (i,), node.args[i]))


def variables(t: Term) -> list[int]:
    """Sorted list of variable indices occurring in ``t``."""
    seen: set[int] = set()
    memo: set[int] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in memo:
            continue
        memo.add(id(node))
        if isinstance(node, Var):
            seen.add(node.index)
        else:
            stack.extend(node.args)
    return sorted(seen)


def depth(t: Term) -> int:
    memo: dict[int, int] = {}

    def go(node):
        key = id(node)
        if key not in memo:
            if isinstance(node, Var) or not node.args:
                memo[key] = 0
            else:
                memo[key] = 1 + max(go(a) for a in node.args)
        return memo[key]

    return go(t)


def substitute(t: Term, mapping: dict[int, Term]) -> Term:
    """Replace variables by terms; unmapped variables are kept."""
    memo: dict[int, Term] = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            out = mapping.get(node.index, node)
        else:
            out = Op(node.symbol, [go(a) for a in node.args])
        memo[key] = out
        return out

    return go(t)


def to_prefix(t: Term) -> str:
    parts: list[str] = []
    stack: list[Union[Term, str]] = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        elif isinstance(node, Var):
            parts.append(f"x{node.index}")
        elif not node.args:
            parts.append(node.symbol)
        else:
            parts.append(node.symbol + "(")
            stack.append(")")
            for i in range(len(node.args) - 1, -1, -1):
                stack.append(node.args[i])
                if i:
                    stack.append(",")
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_.\-]*)|(?P<punct>[(),]))")
_VAR = re.compile(r"x([1-9][0-9]*)$")


def parse_term(text: str) -> Term:
    """Parse prefix notation. Names matching ``x<k>`` are variables."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermError(f"unexpected character {text[pos]!r} at column {pos + 1}")
        tokens.append(m.group("name") or m.group("punct"))
        pos = m.end()
    i = 0

    def parse() -> Term:
        nonlocal i
        if i >= len(tokens):
            raise TermError("unexpected end of term")
        tok = tokens[i]
        if tok in "(),":
            raise TermError(f"unexpected {tok!r}")
        i += 1
        if i < len(tokens) and tokens[i] == "(":
            i += 1
            args = []
            if i < len(tokens) and tokens[i] == ")":
                i += 1
                return Op(tok, ())
            while True:
                args.append(parse())
                if i >= len(tokens):
                    raise TermError("unclosed parenthesis")
                if tokens[i] == ",":
                    i += 1
                    continue
                if tokens[i] == ")":
                    i += 1
                    return Op(tok, args)
                raise TermError(f"unexpected {tokens[i]!r}")
        m = _VAR.match(tok)
        if m:
            return Var(int(m.group(1)))
        return Op(tok, ())

    t = parse()
    if i != len(tokens):
        raise TermError(f"trailing input after term: {tokens[i]!r}")
    return t
