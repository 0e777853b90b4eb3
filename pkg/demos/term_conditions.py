"""Term-condition verdicts on a few two-element algebras, with witnesses."""
from finalg import FiniteAlgebra, check_affine, check_matrix_condition, search_rectangulating_order

ALGEBRAS = {
    "Z2": FiniteAlgebra(2, [("add", 2, [0, 1, 1, 0])], name="Z2"),
    "meet semilattice": FiniteAlgebra(2, [("meet", 2, [0, 0, 0, 1])], name="meet"),
    "left-zero band": FiniteAlgebra(2, [("f", 2, [0, 0, 1, 1])], name="left-zero"),
}

for label, alg in ALGEBRAS.items():
    print(f"== {label}")
    for cond in ("abelian", "strongly-rectangular", "strongly-abelian"):
        v = check_matrix_condition(alg, cond)
        extra = f"  failing matrix {v.to_json()['witness']['matrix']}" if v.fails else ""
        print(f"  {cond:22s} {v.outcome.value}{extra}")
    v = check_affine(alg, "term")
    extra = f"  Maltsev term {v.to_json()['witness']['term']}" if v.holds else ""
    print(f"  {'affine (term)':22s} {v.outcome.value}{extra}")
    v = search_rectangulating_order(alg)
    extra = f"  order {v.to_json()['witness']}" if v.holds else ""
    print(f"  {'rectangular':22s} {v.outcome.value}{extra}")
