"""Graph core: construction, all-pairs hop distances, and the distance boundary.

Vertices are dense indices 0..n-1; external labels belong to the IO layer.
Graphs are finite, simple, unweighted and must be connected. Adjacency is
stored in CSR form (indptr/indices with sorted neighbor lists) so the hot
loops -- BFS sweeps, boundary scans -- are plain array arithmetic.

Distance matrices are dense uint16 (a 10,000-vertex matrix is ~200 MB); all
arithmetic on them is done after widening to int64/float64, never in uint16.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_UNSEEN = 0xFFFF  # BFS sentinel; real distances must stay strictly below


class GraphError(ValueError):
    """Invalid graph input: self-loops, disconnectedness, bad sizes."""


@dataclass(frozen=True)
class Graph:
    """Immutable simple connected graph in CSR adjacency form."""

    n: int
    indptr: np.ndarray   # int64, shape (n+1,)
    indices: np.ndarray  # int32, sorted within each row
    edge_count: int

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n > 1 else 0

    def edges(self) -> np.ndarray:
        """Canonical (u < v) edge array, shape (edge_count, 2), sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        dst = self.indices.astype(np.int64)
        keep = src < dst
        return np.stack([src[keep], dst[keep]], axis=1)


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense symmetric matrix of exact hop distances, plus its maximum."""

    n: int
    d: np.ndarray  # uint16, shape (n, n), read-only
    diam: int

    def row(self, v: int) -> np.ndarray:
        return self.d[v]


@dataclass(frozen=True)
class BoundarySet:
    """Vertices whose average neighbor is strictly closer to some target.

    ``witness[u]`` is the smallest target vertex certifying membership of u.
    """

    n: int
    members: np.ndarray  # sorted int64 vertex indices
    witness: dict[int, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: int) -> bool:
        return bool(self.mask[v])

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.members] = True
        return m


@dataclass(frozen=True)
class IsoperimetricReport:
    boundary_size: int
    lower_bound: float
    satisfied: bool


def build_graph(edges, n: int | None = None) -> Graph:
    """Build a normalized Graph from an edge list.

    Duplicate edges and orientation are collapsed; adjacency comes out
    symmetric with sorted neighbor lists. Raises GraphError on self-loops,
    on a disconnected result, and on n = 0. When ``n`` is omitted it is
    inferred as max index + 1.
    """
    pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if n is None:
        if len(pairs) == 0:
            raise GraphError("cannot infer vertex count from an empty edge list")
        n = int(pairs.max()) + 1
    n = int(n)
    if n <= 0:
        raise GraphError("graph must have at least one vertex")
    if len(pairs) > 0:
        if pairs.min() < 0 or pairs.max() >= n:
            raise GraphError(f"edge endpoint out of range for n={n}")
        if (pairs[:, 0] == pairs[:, 1]).any():
            raise GraphError("self-loops are not allowed")
        pairs = np.unique(
            np.stack([pairs.min(axis=1), pairs.max(axis=1)], axis=1), axis=0
        )

    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int32)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

    indptr.setflags(write=False)
    indices.setflags(write=False)
    g = Graph(n=n, indptr=indptr, indices=indices, edge_count=len(pairs))
    if not _is_connected(g):
        raise GraphError("graph is disconnected")
    return g


def _is_connected(g: Graph) -> bool:
    """One BFS traversal from vertex 0, level-synchronous in numpy."""
    if g.n == 1:
        return True
    visited = np.zeros(g.n, dtype=bool)
    visited[0] = True
    frontier = np.array([0], dtype=np.int64)
    reached = 1
    while frontier.size:
        starts = g.indptr[frontier]
        lens = g.indptr[frontier + 1] - starts
        total = int(lens.sum())
        if total == 0:
            break
        take = np.arange(total) + np.repeat(
            starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens
        )
        nbrs = g.indices[take]
        fresh = nbrs[~visited[nbrs]]
        visited[fresh] = True
        frontier = np.unique(fresh)
        reached += frontier.size
    return bool(visited.all())


if njit is not None:

    @njit(cache=True)
    def _bfs_rows(indptr, indices, out, sources):
        n = out.shape[1]
        queue = np.empty(n, dtype=np.int32)
        for t in range(sources.shape[0]):
            s = sources[t]
            row = out[s]
            for v in range(n):
                row[v] = np.uint16(_UNSEEN)
            row[s] = 0
            queue[0] = s
            head, tail = 0, 1
            while head < tail:
                u = queue[head]
                head += 1
                dnext = row[u] + np.uint16(1)
                for k in range(indptr[u], indptr[u + 1]):
                    v = indices[k]
                    if row[v] == np.uint16(_UNSEEN):
                        row[v] = dnext
                        queue[tail] = v
                        tail += 1


def _bfs_rows_python(g: Graph, out: np.ndarray, sources) -> None:
    from collections import deque

    for s in sources:
        row = out[s]
        row[:] = _UNSEEN
        row[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            dnext = row[u] + 1
            for v in g.neighbors(u):
                if row[v] == _UNSEEN:
                    row[v] = dnext
                    queue.append(v)


def default_threads() -> int:
    """Worker count: BALANCED_EMBED_THREADS env var, else available cores."""
    env = os.environ.get("BALANCED_EMBED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def all_pairs_distances(g: Graph, threads: int | None = None) -> DistanceMatrix:
    """Exact hop distances via one BFS per source vertex.

    Rows are independent; the result is identical for any row schedule, so
    ``threads`` only partitions work (rows are swept in interleaved batches).
    """
    n = g.n
    if n > 0xFFFF:
        raise GraphError(
            f"n={n} cannot be held in 16-bit distance entries (max 65535)"
        )
    if threads is None:
        threads = default_threads()
    out = np.empty((n, n), dtype=np.uint16)
    batches = [np.arange(b, n, threads, dtype=np.int64) for b in range(threads)]
    for sources in batches:
        if sources.size == 0:
            continue
        if njit is not None:
            _bfs_rows(g.indptr, g.indices, out, sources)
        else:  # pragma: no cover - exercised only without numba
            _bfs_rows_python(g, out, sources)
    diam = int(out.max())
    if n > 1 and diam >= _UNSEEN:
        raise GraphError("graph diameter does not fit in 16-bit entries")
    out.setflags(write=False)
    return DistanceMatrix(n=n, d=out, diam=diam)


def boundary(g: Graph, dist: DistanceMatrix) -> BoundarySet:
    """Vertices u with some target v whose average-neighbor distance beats d(u,v).

    Membership is decided by the cross-multiplied integer comparison
    sum_{w ~ u} d(w, v)  <  deg(u) * d(u, v), so no floating point is
    involved. The witness stored per member is the smallest such v.
    """
    members: list[int] = []
    witness: dict[int, int] = {}
    d = dist.d
    for u in range(g.n):
        nb = g.neighbors(u)
        if nb.size == 0:
            continue
        nbr_sums = d[nb].sum(axis=0, dtype=np.int64)
        beats = nbr_sums < nb.size * d[u].astype(np.int64)
        if beats.any():
            members.append(u)
            witness[u] = int(np.argmax(beats))
    arr = np.array(members, dtype=np.int64)
    arr.setflags(write=False)
    return BoundarySet(n=g.n, members=arr, witness=witness)


def isoperimetric_report(g: Graph, dist: DistanceMatrix, b: BoundarySet) -> IsoperimetricReport:
    """Check #boundary >= #V / (2 * max_degree * diam).

    The inequality is a theorem for every connected graph; ``satisfied`` is
    computed by exact integer cross-multiplication and a False value signals
    an implementation bug, not a property of the input.
    """
    if g.n == 1:
        return IsoperimetricReport(boundary_size=len(b), lower_bound=0.0, satisfied=True)
    denom = 2 * g.max_degree * dist.diam
    satisfied = len(b) * denom >= g.n
    return IsoperimetricReport(
        boundary_size=len(b), lower_bound=g.n / denom, satisfied=bool(satisfied)
    )
