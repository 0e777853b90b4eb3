"""From a strongly abelian congruence to a two-element ordered strongly abelian algebra.

Starts with the two-element set (no operations) and theta = full, builds
S = A(theta)/Delta, collapses it to an ordered quotient, then runs the
ordered pipeline.  Each step leaves a certificate that replays on its own.
"""
from finalg.certificates import replay
from finalg.constructions import build_s, collapse_to_ordered, theorem2_pipeline
from finalg.relations import Congruence
from finalg import FiniteAlgebra

a = FiniteAlgebra(2, [], name="2-set")
s, cert = build_s(a, Congruence.full(2))
print(f"S has {s.s_alg.size} elements, zero = {s.zero}")
print(f"graph encoding {s.graph_encoding}, Delta blocks {s.delta.to_json()}")
print(f"build_s certificate: {cert.verdict}, {cert.assertion_count} assertions, replay problems {replay(cert.to_json())}")

t, zero, order, cert = collapse_to_ordered(s)
print(f"ordered quotient T: {t.size} elements, zero {zero}, order pairs {order.to_json()}")
print(f"collapse certificate: {cert.verdict}")

t2, cert = theorem2_pipeline(t, order, zero)
order2 = cert.get("order'")
print(f"T' has {t2.size} elements, order' {order2.to_json()}")
for st in cert.stages:
    checks = ", ".join(f"{x.check}={'ok' if x.holds else 'FAIL'}" for x in st.assertions)
    print(f"  {st.name}: {checks}")
print(f"replay problems: {replay(cert.to_json())}")
