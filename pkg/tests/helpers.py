"""Shared topology builders and independent oracles for the test suite."""

import numpy as np

from tmest import SupportSet, from_edges, make_rng


def ring_topology(n, extra_links, seed, weight_jitter=0.0):
    """Strongly connected digraph: a ring plus `extra_links` random arcs."""
    rng = make_rng(seed)
    nodes = [f"v{i}" for i in range(n)]
    edges = [(nodes[i], nodes[(i + 1) % n], 1.0) for i in range(n)]
    have = {(i, (i + 1) % n) for i in range(n)}
    while len(edges) < n + extra_links:
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u != v and (u, v) not in have:
            w = 1.0 + (weight_jitter * float(rng.random()) if weight_jitter else 0.0)
            have.add((u, v))
            edges.append((nodes[u], nodes[v], w))
    return from_edges(edges)


def pick_support(topo, p, seed):
    rng = make_rng(seed)
    n = topo.n_nodes
    pairs = [(s, d) for s in range(n) for d in range(n) if s != d]
    idx = rng.choice(len(pairs), size=p, replace=False)
    return SupportSet(tuple(pairs[i] for i in sorted(idx)))


def bellman_ford(topo, src):
    """Distance oracle independent of the Dijkstra implementation."""
    n = topo.n_nodes
    dist = np.full(n, np.inf)
    dist[src] = 0.0
    ends = topo.link_endpoints()
    weights = [lk.weight for lk in topo.links]
    for _ in range(n - 1):
        changed = False
        for (u, v), w in zip(ends, weights):
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist


def enumerate_shortest_paths(topo, s, d, tol=1e-9):
    """All minimum-cost s->d paths as link-index lists, by exhaustive DFS."""
    ends = topo.link_endpoints()
    out = [[] for _ in range(topo.n_nodes)]
    for e, (u, v) in enumerate(ends):
        out[u].append((v, e))
    best = [np.inf]
    paths = []

    def dfs(u, cost, seen, links):
        if cost > best[0] + tol:
            return
        if u == d:
            if cost < best[0] - tol:
                best[0] = cost
                paths.clear()
            paths.append(list(links))
            return
        for v, e in out[u]:
            if v not in seen:
                seen.add(v)
                links.append(e)
                dfs(v, cost + topo.links[e].weight, seen, links)
                links.pop()
                seen.remove(v)

    dfs(s, 0.0, {s}, [])
    min_cost = min(sum(topo.links[e].weight for e in path) for path in paths)
    return [p for p in paths if sum(topo.links[e].weight for e in p) <= min_cost + tol]


def ecmp_fractions_oracle(topo, s, d):
    """Per-link ECMP fractions by equal splitting over the enumerated DAG."""
    paths = enumerate_shortest_paths(topo, s, d)
    on_dag = sorted({e for p in paths for e in p})
    ends = topo.link_endpoints()
    next_hops = {}
    indeg = {s: 0}
    for e in on_dag:
        u, v = ends[e]
        next_hops.setdefault(u, []).append((v, e))
        indeg[v] = indeg.get(v, 0) + 1
        indeg.setdefault(u, 0)
    frac = np.zeros(topo.n_links)
    inflow = {s: 1.0}
    ready = [u for u, k in indeg.items() if k == 0]
    while ready:
        u = ready.pop()
        if u == d or u not in next_hops:
            continue
        share = inflow.get(u, 0.0) / len(next_hops[u])
        for v, e in next_hops[u]:
            frac[e] += share
            inflow[v] = inflow.get(v, 0.0) + share
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return frac
