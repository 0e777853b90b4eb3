import json

import pytest
from hypothesis import strategies as st

from finalg.algebra import FiniteAlgebra


def z2() -> FiniteAlgebra:
    return FiniteAlgebra(2, [("add", 2, [0, 1, 1, 0])], name="Z2")


def semilattice() -> FiniteAlgebra:
    return FiniteAlgebra(2, [("meet", 2, [0, 0, 0, 1])], name="meet-semilattice")


def left_zero() -> FiniteAlgebra:
    return FiniteAlgebra(2, [("f", 2, [0, 0, 1, 1])], name="left-zero band")


def trivial() -> FiniteAlgebra:
    return FiniteAlgebra(1, [("f", 2, [0])], name="one-element")


def bare_set(n: int = 2) -> FiniteAlgebra:
    return FiniteAlgebra(n, [], name=f"set{n}")


def cyclic(n: int) -> FiniteAlgebra:
    return FiniteAlgebra(n, [("add", 2, [(x + y) % n for x in range(n) for y in range(n)])], name=f"Z{n}")


def chain(n: int) -> FiniteAlgebra:
    return FiniteAlgebra(n, [("meet", 2, [min(x, y) for x in range(n) for y in range(n)])], name=f"chain{n}")


@st.composite
def algebras(draw, max_size: int = 3, arities=(0, 1, 2), max_ops: int = 2, min_size: int = 1):
    """Random small algebras with one or two operations."""
    n = draw(st.integers(min_size, max_size))
    count = draw(st.integers(1, max_ops))
    ops = []
    for i in range(count):
        k = draw(st.sampled_from(arities))
        table = draw(st.lists(st.integers(0, n - 1), min_size=n ** k, max_size=n ** k))
        ops.append((f"f{i}", k, table))
    return FiniteAlgebra(n, ops)


def write_doc(path, alg: FiniteAlgebra, **extra) -> str:
    d = alg.to_dict()
    d.update(extra)
    path.write_text(json.dumps(d))
    return str(path)


@pytest.fixture
def doc_path(tmp_path):
    def make(alg: FiniteAlgebra, name: str = "alg.json", **extra) -> str:
        return write_doc(tmp_path / name, alg, **extra)
    return make
