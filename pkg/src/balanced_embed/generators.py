"""Graph and point-cloud generators for experiments and fixtures.

All randomness is driven by numpy's PCG64 generator seeded explicitly, so
every generator is deterministic given (parameters, seed) and reproducible
across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .graph import Graph, GraphError, build_graph

NAMED_GRAPHS = ("frucht", "dodecahedral", "desargues", "petersen")


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray                      # (n, dim) float64
    meta: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.size == 0:
            raise ValueError("points must be a nonempty (n, dim) array")
        if not np.isfinite(pts).all():
            raise ValueError("points must have finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])


def gen_path(n: int) -> Graph:
    if n < 2:
        raise GraphError("path needs n >= 2")
    return build_graph([(i, i + 1) for i in range(n - 1)], n=n)


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return build_graph([(i, (i + 1) % n) for i in range(n)], n=n)


def gen_complete(n: int) -> Graph:
    if n < 2:
        raise GraphError("complete graph needs n >= 2")
    return build_graph([(i, j) for i in range(n) for j in range(i + 1, n)], n=n)


def gen_star(n_leaves: int) -> Graph:
    """Center is vertex 0, leaves are 1..n_leaves."""
    if n_leaves < 1:
        raise GraphError("star needs at least one leaf")
    return build_graph([(0, i) for i in range(1, n_leaves + 1)], n=n_leaves + 1)


def gen_grid(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise GraphError("grid needs at least two vertices")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return build_graph(edges, n=rows * cols)


@dataclass(frozen=True)
class GluedPaths:
    """Parallel paths sharing both endpoints, with midpoint metadata.

    Vertex 0 and 1 are the two hubs; path p occupies the contiguous interior
    block starting at 2 + p * (2 * ell). Each path has 2*ell interior
    vertices (2*ell + 1 edges hub to hub), so there are two central interior
    vertices per path; ``midpoints`` lists the canonical one (nearer hub_a)
    and ``central_pairs`` both.
    """

    graph: Graph
    hub_a: int
    hub_b: int
    midpoints: tuple[int, ...]
    central_pairs: tuple[tuple[int, int], ...]


def gen_glued_paths(m: int, ell: int) -> GluedPaths:
    """m internally-disjoint paths of 2*ell + 1 edges glued at both ends."""
    if m < 2:
        raise GraphError("glued paths need m >= 2")
    if ell < 1:
        raise GraphError("glued paths need ell >= 1")
    interior = 2 * ell
    edges = []
    midpoints = []
    pairs = []
    for p in range(m):
        base = 2 + p * interior
        edges.append((0, base))
        for j in range(interior - 1):
            edges.append((base + j, base + j + 1))
        edges.append((base + interior - 1, 1))
        midpoints.append(base + ell - 1)
        pairs.append((base + ell - 1, base + ell))
    g = build_graph(edges, n=2 + m * interior)
    return GluedPaths(
        graph=g,
        hub_a=0,
        hub_b=1,
        midpoints=tuple(midpoints),
        central_pairs=tuple(pairs),
    )


def gen_erdos_renyi(n: int, p: float, seed: int, max_attempts: int = 100) -> Graph:
    """G(n, p), resampled with incremented seed until connected."""
    if n < 2:
        raise GraphError("random graph needs n >= 2")
    if not 0 < p <= 1:
        raise GraphError("edge probability must be in (0, 1]")
    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(max_attempts):
        rng = np.random.default_rng(seed + attempt)
        mask = rng.random(iu.size) < p
        try:
            return build_graph(np.stack([iu[mask], ju[mask]], axis=1), n=n)
        except GraphError:
            continue
    raise GraphError(
        f"no connected G({n}, {p}) found in {max_attempts} attempts from seed {seed}"
    )


def gen_gaussian_clouds(n_per_cluster: int, centers, stddev: float, seed: int) -> PointCloud:
    """Isotropic Gaussian blobs around the given centers; 'cluster' metadata."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers[None, :]
    if len(centers) < 1:
        raise ValueError("need at least one center")
    if stddev <= 0:
        raise ValueError("stddev must be positive")
    rng = np.random.default_rng(seed)
    blobs = [
        c + stddev * rng.standard_normal((n_per_cluster, centers.shape[1]))
        for c in centers
    ]
    labels = np.repeat(np.arange(len(centers)), n_per_cluster).astype(np.float64)
    return PointCloud(points=np.concatenate(blobs, axis=0), meta={"cluster": labels})


def gen_swiss_roll(n: int, seed: int) -> PointCloud:
    """Classic swiss roll (t cos t, h, t sin t), t in [1.5pi, 4.5pi], h in [0, 21].

    The roll parameters are kept as metadata 't' and 'h' so downstream
    embedding quality can be measured against the generating coordinates.
    """
    if n < 10:
        raise ValueError("swiss roll needs n >= 10")
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
    h = 21.0 * rng.random(n)
    points = np.stack([t * np.cos(t), h, t * np.sin(t)], axis=1)
    return PointCloud(points=points, meta={"t": t, "h": h})


def knn_graph(cloud: PointCloud, k: int, chunk: int = 512) -> Graph:
    """Union-symmetrized k-nearest-neighbor graph under Euclidean distance.

    Distance ties are broken toward the smaller vertex index. Raises
    GraphError when the union graph is disconnected (increase k).
    """
    pts = cloud.points
    n = cloud.n
    if not 1 <= k < n:
        raise GraphError(f"k must be in 1..{n - 1}")
    sq = (pts * pts).sum(axis=1)
    pad = min(n - 1, k + 8)
    src_parts = []
    dst_parts = []
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (pts[lo:hi] @ pts.T)
        np.maximum(d2, 0.0, out=d2)
        cand = np.argpartition(d2, pad, axis=1)[:, :pad + 1]
        cand.sort(axis=1)  # ascending index, so a stable sort breaks ties right
        cand_d = np.take_along_axis(d2, cand, axis=1)
        order = np.argsort(cand_d, axis=1, kind="stable")
        sorted_idx = np.take_along_axis(cand, order, axis=1)
        sorted_d = np.take_along_axis(cand_d, order, axis=1)
        for r in range(hi - lo):
            q = lo + r
            row_idx = sorted_idx[r]
            row_d = sorted_d[r]
            # candidate window decides the k+1 closest unless a distance tie
            # crosses its edge; fall back to a full stable scan in that case
            if pad < n - 1 and row_d[-1] <= row_d[min(k, pad)]:
                full = np.lexsort((np.arange(n), d2[r]))
                row_idx = full[:k + 1]
            nbrs = row_idx[row_idx != q][:k]
            src_parts.append(np.full(len(nbrs), q, dtype=np.int64))
            dst_parts.append(nbrs.astype(np.int64))
    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    edges = np.unique(
        np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1), axis=0
    )
    try:
        return build_graph(edges, n=n)
    except GraphError as exc:
        raise GraphError(f"{k}-NN graph is disconnected; increase k") from exc


def load_named(name: str) -> Graph:
    """Load a bundled catalog graph by name."""
    if name not in NAMED_GRAPHS:
        raise GraphError(f"unknown named graph {name!r}; choose from {NAMED_GRAPHS}")
    from .io import parse_edge_list

    text = resources.files("balanced_embed").joinpath(f"data/{name}.txt").read_text()
    return parse_edge_list(text)
