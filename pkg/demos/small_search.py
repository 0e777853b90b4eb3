"""Exhaustive search over two-element binary algebras and the small dichotomy sweep."""
from finalg.hsp import dichotomy_sweep
from finalg.search import search

for pred in ("abelian", "strongly-abelian", "strongly-abelian & !affine(term)", "rectangular & !abelian"):
    res = search(2, [2], pred)
    tables = [a.operations[0].table.tolist() for a in res.matches]
    print(f"{pred:36s} {len(tables):2d} of {res.visited}: {tables}")

rep = dichotomy_sweep(max_size=2, max_arity=2)
print("dichotomy sweep, size <= 2:", rep.to_json())
