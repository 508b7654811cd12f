"""Network graph, shortest-path routing and routing-matrix construction.

A topology is a directed weighted graph. Demands live on ordered
origin-destination (OD) pairs; the routing matrix maps per-pair demand to
per-link load. Two routing modes are supported:

* ``"sp"``: a single shortest path per pair, ties broken by the
  lexicographically smallest node-index sequence.
* ``"ecmp"``: flow split equally over all shortest-path next hops at every
  node, recursively.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import TmestError, UnreachablePair

# Two link-weight sums within this relative tolerance count as equal cost.
_COST_RTOL = 1e-12


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    weight: float
    capacity: float | None = None


@dataclass(frozen=True)
class Topology:
    """Directed weighted graph. Immutable after construction."""

    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    node_index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise TmestError("topology needs at least 2 nodes")
        if len(self.links) < 1:
            raise TmestError("topology needs at least 1 link")
        if len(set(self.nodes)) != len(self.nodes):
            raise TmestError("duplicate node names")
        index = {name: i for i, name in enumerate(self.nodes)}
        object.__setattr__(self, "node_index", index)
        seen: set[tuple[str, str]] = set()
        for lk in self.links:
            if lk.src == lk.dst:
                raise TmestError(f"self-loop link {lk.src!r}->{lk.dst!r}")
            if lk.src not in index or lk.dst not in index:
                raise TmestError(f"link endpoint not in node list: {lk.src!r}->{lk.dst!r}")
            if (lk.src, lk.dst) in seen:
                raise TmestError(f"duplicate directed link {lk.src!r}->{lk.dst!r}")
            if not (lk.weight > 0 and np.isfinite(lk.weight)):
                raise TmestError(f"non-positive weight on link {lk.src!r}->{lk.dst!r}")
            seen.add((lk.src, lk.dst))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_links(self) -> int:
        return len(self.links)

    def link_endpoints(self) -> list[tuple[int, int]]:
        """Dense (src, dst) index pairs, one per link, in declared order."""
        ix = self.node_index
        return [(ix[lk.src], ix[lk.dst]) for lk in self.links]


def from_edges(edges, nodes=None) -> Topology:
    """Build a Topology from (src, dst, weight[, capacity]) tuples.

    Node order defaults to first appearance in the edge list.
    """
    links = []
    order: list[str] = list(nodes) if nodes is not None else []
    seen = set(order)
    for e in edges:
        src, dst, weight = e[0], e[1], float(e[2])
        cap = float(e[3]) if len(e) > 3 and e[3] is not None else None
        for name in (src, dst):
            if name not in seen:
                seen.add(name)
                order.append(name)
        links.append(Link(src, dst, weight, cap))
    return Topology(tuple(order), tuple(links))


@dataclass(frozen=True)
class SupportSet:
    """Ordered OD pairs carrying demand; pair k maps to matrix column k."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for s, d in self.pairs:
            if s == d:
                raise TmestError(f"support pair with identical endpoints: {s}")
            if (s, d) in seen:
                raise TmestError(f"duplicate support pair ({s}, {d})")
            seen.add((s, d))

    @property
    def size(self) -> int:
        return len(self.pairs)

    def column_of(self, pair: tuple[int, int]) -> int:
        return self.pairs.index(pair)

    def lookup(self) -> dict[tuple[int, int], int]:
        return {pair: j for j, pair in enumerate(self.pairs)}

    def validate_against(self, topo: Topology) -> None:
        n = topo.n_nodes
        for s, d in self.pairs:
            if not (0 <= s < n and 0 <= d < n):
                raise TmestError(f"support pair ({s}, {d}) outside node range 0..{n - 1}")


def all_pairs(topo: Topology) -> SupportSet:
    """Default support: every ordered pair, lexicographic in dense indices."""
    n = topo.n_nodes
    return SupportSet(tuple((s, d) for s in range(n) for d in range(n) if s != d))


def support_from_names(topo: Topology, name_pairs) -> SupportSet:
    ix = topo.node_index
    pairs = []
    for s, d in name_pairs:
        if s not in ix or d not in ix:
            raise TmestError(f"support pair references unknown node: {s!r}->{d!r}")
        pairs.append((ix[s], ix[d]))
    return SupportSet(tuple(pairs))


@dataclass(frozen=True)
class RoutingMatrix:
    """m x p fractional routing matrix with its row/column index maps."""

    entries: np.ndarray
    row_links: tuple[tuple[int, int], ...]
    support: SupportSet
    mode: str

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def shortest_paths(topo: Topology, src: int) -> tuple[np.ndarray, list[list[int]]]:
    """Dijkstra from a dense source index.

    Returns (dist, pred) where dist[v] is the minimal cost (inf when
    unreachable) and pred[v] lists the indices of links (u, v) lying on some
    shortest path into v.
    """
    n = topo.n_nodes
    out_links: list[list[tuple[int, int, float]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(topo.link_endpoints()):
        out_links[u].append((v, e, topo.links[e].weight))

    dist = np.full(n, np.inf)
    dist[src] = 0.0
    done = np.zeros(n, dtype=bool)
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, _e, w in out_links[u]:
            nd = d + w
            if nd < dist[v] and not _costs_equal(nd, dist[v]):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))

    pred: list[list[int]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(topo.link_endpoints()):
        if np.isfinite(dist[u]) and _costs_equal(dist[u] + topo.links[e].weight, dist[v]):
            pred[v].append(e)
    return dist, pred


def _costs_equal(a: float, b: float) -> bool:
    if np.isinf(a) or np.isinf(b):
        return a == b
    return abs(a - b) <= _COST_RTOL * max(1.0, abs(a), abs(b))


def build_routing_matrix(topo: Topology, support: SupportSet, mode: str = "sp") -> RoutingMatrix:
    """Construct the link-by-pair routing matrix.

    ``"sp"`` puts 1 on each link of one deterministic shortest path per pair;
    ``"ecmp"`` puts the equal-split flow fraction in [0, 1] on every
    shortest-path link of the pair.
    """
    if mode not in ("sp", "ecmp"):
        raise TmestError(f"unknown routing mode {mode!r}")
    support.validate_against(topo)
    endpoints = topo.link_endpoints()
    m, p = topo.n_links, support.size
    A = np.zeros((m, p))

    sources = sorted({s for s, _ in support.pairs})
    fwd = {s: shortest_paths(topo, s) for s in sources}
    rev_topo = _reversed(topo)
    dests = sorted({d for _, d in support.pairs})
    rev = {d: shortest_paths(rev_topo, d)[0] for d in dests}

    # Link e=(u,v) lies on a shortest s->d path iff
    # dist_s(u) + w(e) + dist_rev_d(v) == dist_s(d).
    out_links: list[list[tuple[int, int]]] = [[] for _ in range(topo.n_nodes)]
    for e, (u, v) in enumerate(endpoints):
        out_links[u].append((v, e))

    for j, (s, d) in enumerate(support.pairs):
        dist_s = fwd[s][0]
        dist_to_d = rev[d]
        total = dist_s[d]
        if not np.isfinite(total):
            raise UnreachablePair(topo.nodes[s], topo.nodes[d])

        def on_path(u: int, v: int, w: float) -> bool:
            return (
                np.isfinite(dist_s[u])
                and np.isfinite(dist_to_d[v])
                and _costs_equal(dist_s[u] + w + dist_to_d[v], total)
            )

        if mode == "sp":
            u = s
            while u != d:
                # Smallest feasible next node gives the lexicographically
                # smallest full path, since every feasible hop completes.
                best = None
                for v, e in out_links[u]:
                    if on_path(u, v, topo.links[e].weight) and (best is None or v < best[0]):
                        best = (v, e)
                assert best is not None
                A[best[1], j] = 1.0
                u = best[0]
        else:
            # Equal split per node over the shortest-path DAG. Nodes are
            # processed in increasing distance from s, so all inbound flow
            # accumulates before a node splits it (the DAG is acyclic).
            flow = {s: 1.0}
            heap = [(0.0, s)]
            visited = set()
            while heap:
                _, u = heapq.heappop(heap)
                if u in visited or u == d:
                    continue
                visited.add(u)
                hops = [
                    (v, e)
                    for v, e in out_links[u]
                    if on_path(u, v, topo.links[e].weight)
                ]
                share = flow[u] / len(hops)
                for v, e in hops:
                    A[e, j] += share
                    flow[v] = flow.get(v, 0.0) + share
                    if v not in visited and v != d:
                        heapq.heappush(heap, (dist_s[v], v))
    return RoutingMatrix(A, tuple(endpoints), support, mode)


def _reversed(topo: Topology) -> Topology:
    links = tuple(Link(lk.dst, lk.src, lk.weight, lk.capacity) for lk in topo.links)
    return Topology(topo.nodes, links)


def read_topology(path) -> Topology:
    """Parse a topology CSV with header ``src,dst,weight[,capacity]``."""
    edges = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "src" not in cols or "dst" not in cols or "weight" not in cols:
            raise TmestError(f"{path}: expected header src,dst,weight[,capacity]")
        for row in reader:
            cap = row.get("capacity")
            edges.append(
                (
                    row["src"],
                    row["dst"],
                    float(row["weight"]),
                    float(cap) if cap not in (None, "") else None,
                )
            )
    if not edges:
        raise TmestError(f"{path}: no links")
    return from_edges(edges)


def write_topology(path, topo: Topology) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        any_cap = any(lk.capacity is not None for lk in topo.links)
        writer.writerow(["src", "dst", "weight", "capacity"] if any_cap else ["src", "dst", "weight"])
        for lk in topo.links:
            row = [lk.src, lk.dst, repr(lk.weight)]
            if any_cap:
                row.append("" if lk.capacity is None else repr(lk.capacity))
            writer.writerow(row)


def read_support(path, topo: Topology) -> SupportSet:
    """Parse a support CSV with header ``src,dst``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "src" not in cols or "dst" not in cols:
            raise TmestError(f"{path}: expected header src,dst")
        pairs = [(row["src"], row["dst"]) for row in reader]
    if not pairs:
        raise TmestError(f"{path}: no support pairs")
    return support_from_names(topo, pairs)


def write_support(path, topo: Topology, support: SupportSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst"])
        for s, d in support.pairs:
            writer.writerow([topo.nodes[s], topo.nodes[d]])
