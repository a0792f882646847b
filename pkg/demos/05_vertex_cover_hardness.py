"""Why combinatorial clearing is hard: vertex cover in disguise.

A graph and a budget k become an options book plus a fixed fill. The
fill loses money at some price vector exactly when the graph has a vertex
cover of size k or less, so the engine's worst-case search decides vertex
cover.
"""

from __future__ import annotations

from optclear import HardnessConfig, gen_vertex_cover_instance, lower_violation
from optclear.experiment import VC_COLUMNS, format_rows, vertex_cover_table

edges = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")]
vertices = ["a", "b", "c", "d"]

cfg = HardnessConfig(tuple(vertices), tuple(edges), k=2)
m, gamma, delta = gen_vertex_cover_instance(cfg)
low = lower_violation(m, gamma, delta, 0.0)
chosen = [v for v, s in zip(m.universe.assets, low.S) if s > 0.5]
print(f"== k=2 on a 4-cycle with a chord: {m.M} buys, {m.N} sells")
print(f"   worst loss {low.z:.3f} at the indicator of {chosen}\n")

print("== verdict vs exhaustive search for every valid k")
print(format_rows(vertex_cover_table(vertices, edges), VC_COLUMNS))
