"""Demand and link-load vectors, the forward map, and CSV file I/O.

All quantities are Mbps as 64-bit floats. Solvers operate on plain numpy
arrays; :class:`TrafficVector` and :class:`LinkLoadVector` wrap validated
nonnegative vectors at the file and reporting boundaries.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TmestError, UnknownPair, ZeroLoadNorm
from .topology import RoutingMatrix, SupportSet, Topology


def _validated(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise TmestError(f"{what} must be a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise TmestError(f"{what} has non-finite entries")
    if np.any(arr < 0):
        raise TmestError(f"{what} has negative entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TrafficVector:
    """Per-OD-pair demands (Mbps), aligned with a SupportSet's columns."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _validated(self.values, "demand vector"))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class LinkLoadVector:
    """Per-link loads (Mbps), aligned with the routing matrix rows."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _validated(self.values, "load vector"))

    def __len__(self) -> int:
        return len(self.values)


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, RoutingMatrix):
        return A.entries
    return np.asarray(A, dtype=float)


def _as_vector(x) -> np.ndarray:
    if isinstance(x, (TrafficVector, LinkLoadVector)):
        return x.values
    return np.asarray(x, dtype=float)


def simulate_loads(A, x) -> LinkLoadVector:
    """Forward map: load on each link is the sum of demands routed over it."""
    mat = _as_matrix(A)
    vec = _as_vector(x)
    if mat.shape[1] != len(vec):
        raise DimensionMismatch(f"matrix has {mat.shape[1]} columns, demand vector has {len(vec)}")
    return LinkLoadVector(mat @ vec)


def residual(A, x, b) -> tuple[float, float]:
    """L2 residual of the load equations and its value relative to ||b||."""
    mat = _as_matrix(A)
    xv = _as_vector(x)
    bv = _as_vector(b)
    if mat.shape[1] != len(xv):
        raise DimensionMismatch(f"matrix has {mat.shape[1]} columns, demand vector has {len(xv)}")
    if mat.shape[0] != len(bv):
        raise DimensionMismatch(f"matrix has {mat.shape[0]} rows, load vector has {len(bv)}")
    l2 = float(np.linalg.norm(mat @ xv - bv))
    bnorm = float(np.linalg.norm(bv))
    if bnorm == 0.0:
        if l2 == 0.0:
            return 0.0, 0.0
        raise ZeroLoadNorm("nonzero residual against a zero load vector")
    return l2, l2 / bnorm


def read_tm(path, topo: Topology, support: SupportSet) -> TrafficVector:
    """Parse a TM CSV ``src,dst,demand_mbps``; pairs absent from the file are 0."""
    lookup = support.lookup()
    ix = topo.node_index
    x = np.zeros(support.size)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        for need in ("src", "dst", "demand_mbps"):
            if need not in cols:
                raise TmestError(f"{path}: expected header src,dst,demand_mbps")
        for row in reader:
            s, d = row["src"], row["dst"]
            if s not in ix or d not in ix:
                raise UnknownPair(f"{path}: unknown node in pair {s!r}->{d!r}")
            key = (ix[s], ix[d])
            if key not in lookup:
                raise UnknownPair(f"{path}: pair {s!r}->{d!r} outside the support set")
            x[lookup[key]] += float(row["demand_mbps"])
    return TrafficVector(x)


def write_tm(path, x, topo: Topology, support: SupportSet) -> None:
    vec = _as_vector(x)
    if len(vec) != support.size:
        raise DimensionMismatch(f"demand vector has {len(vec)} entries, support has {support.size}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "demand_mbps"])
        for j, (s, d) in enumerate(support.pairs):
            writer.writerow([topo.nodes[s], topo.nodes[d], repr(float(vec[j]))])


def read_loads(path, topo: Topology) -> LinkLoadVector:
    """Parse a link-load CSV ``src,dst,load_mbps``, one row per directed link."""
    ix = topo.node_index
    wanted = {(ix[lk.src], ix[lk.dst]): e for e, lk in enumerate(topo.links)}
    b = np.full(topo.n_links, np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        for need in ("src", "dst", "load_mbps"):
            if need not in cols:
                raise TmestError(f"{path}: expected header src,dst,load_mbps")
        for row in reader:
            s, d = row["src"], row["dst"]
            if s not in ix or d not in ix or (ix[s], ix[d]) not in wanted:
                raise TmestError(f"{path}: load row for unknown link {s!r}->{d!r}")
            b[wanted[(ix[s], ix[d])]] = float(row["load_mbps"])
    if np.any(np.isnan(b)):
        missing = topo.links[int(np.argmax(np.isnan(b)))]
        raise TmestError(f"{path}: missing load for link {missing.src!r}->{missing.dst!r}")
    return LinkLoadVector(b)


def write_loads(path, b, topo: Topology) -> None:
    vec = _as_vector(b)
    if len(vec) != topo.n_links:
        raise DimensionMismatch(f"load vector has {len(vec)} entries, topology has {topo.n_links} links")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "load_mbps"])
        for e, lk in enumerate(topo.links):
            writer.writerow([lk.src, lk.dst, repr(float(vec[e]))])
