#!/usr/bin/env python3
"""Build a small network, route demands, and read off per-link loads.

Demands live on ordered origin-destination pairs. Routing turns a demand
vector x into link loads b = A x, where A holds the fraction of each pair's
traffic crossing each directed link.
"""

import numpy as np

from tmest import (
    all_pairs,
    build_routing_matrix,
    from_edges,
    simulate_loads,
    support_from_names,
)

# A diamond: two equal-cost two-hop routes from a to c, plus a return path.
topo = from_edges(
    [
        ("a", "b", 1.0),
        ("b", "c", 1.0),
        ("a", "d", 1.0),
        ("d", "c", 1.0),
        ("c", "a", 1.0),
    ]
)
print(f"nodes={topo.n_nodes} links={topo.n_links}")

support = support_from_names(topo, [("a", "c"), ("b", "c"), ("c", "a")])

for mode in ("sp", "ecmp"):
    A = build_routing_matrix(topo, support, mode)
    print(f"\nrouting matrix ({mode}), rows=links in file order, cols=OD pairs:")
    for e, (u, v) in enumerate(A.row_links):
        row = " ".join(f"{val:4.2f}" for val in A.entries[e])
        print(f"  {topo.nodes[u]}->{topo.nodes[v]}: {row}")

# Single-path routing picks one deterministic shortest path per pair
# (smallest node-index sequence); ECMP splits a->c half/half over b and d.

x = np.array([8.0, 4.0, 2.0])  # Mbps per OD pair
A = build_routing_matrix(topo, support, "ecmp")
b = simulate_loads(A, x)
print("\ndemands (Mbps):", dict(zip([f"{topo.nodes[s]}>{topo.nodes[d]}" for s, d in support.pairs], x)))
print("link loads (Mbps):")
for e, (u, v) in enumerate(A.row_links):
    print(f"  {topo.nodes[u]}->{topo.nodes[v]}: {b.values[e]:.1f}")

# With no support file every ordered pair may carry demand:
print("\ndefault support size for this topology:", all_pairs(topo).size)
