"""Explicit 1-Lipschitz embedding from a balanced measure, with audits.

Vertex v maps to (w_1 d(s_1, v), ..., w_m d(s_m, v)) where s_1..s_m is the
measure's support (ascending) and w_j its weights. Three guarantees hold for
every balanced measure and are audited numerically: the map is 1-Lipschitz
into l1, it sends the support onto the hyperplane of row sum alpha, and
support images are on average at least diam/(2m) apart in l-infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import DistanceMatrix
from .measures import (
    UnbalancedMeasureError,
    VertexMeasure,
    is_balanced,
    transport_costs_exact,
)

_AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class Embedding:
    support: np.ndarray            # ascending vertex indices, shape (m,)
    weights: np.ndarray            # float weights on the support columns
    alpha: float                   # max transport cost of the measure
    coords: np.ndarray             # (n, m); coords[v, j] = weights[j] * d(support[j], v)
    exact_weights: tuple[Fraction, ...] | None = None
    exact_alpha: Fraction | None = None
    exact_support_sums: tuple[Fraction, ...] | None = None
    truncated: bool = False        # True once coordinates have been dropped

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.coords.shape[1])


def embed(dist: DistanceMatrix, mu: VertexMeasure, tol: float | None = None) -> Embedding:
    """Build the embedding for a balanced measure.

    Raises UnbalancedMeasureError when the measure fails the balance check
    at ``tol`` (the guarantees would be void).
    """
    report = is_balanced(mu, dist, tol=tol)
    if not report.balanced:
        raise UnbalancedMeasureError(
            f"measure is not balanced within tol={report.tol} "
            f"(support spread {report.support_spread})"
        )
    support = report.support.astype(np.int64)
    weights = mu.weights[support].copy()
    coords = dist.d[:, support].astype(np.float64) * weights[None, :]
    coords.setflags(write=False)

    exact_weights = exact_alpha = exact_sums = None
    if mu.exact is not None:
        T = transport_costs_exact(mu, dist)
        exact_alpha = max(T)
        exact_weights = tuple(mu.exact[v] for v in support)
        exact_sums = tuple(T[v] for v in support)
    return Embedding(
        support=support,
        weights=weights,
        alpha=float(report.max_transport),
        coords=coords,
        exact_weights=exact_weights,
        exact_alpha=exact_alpha,
        exact_support_sums=exact_sums,
    )


@dataclass(frozen=True)
class LipschitzReport:
    max_ratio: float
    violation_count: int
    worst_pair: tuple[int, int]
    pairs_checked: int
    sampled: bool


def lipschitz_audit(
    emb: Embedding,
    dist: DistanceMatrix,
    max_full_n: int = 5000,
    sample_pairs: int = 1_000_000,
    seed: int = 0,
) -> LipschitzReport:
    """max over pairs of ||phi(u) - phi(v)||_1 / d(u, v); must be <= 1.

    Scans all pairs up to ``max_full_n`` vertices, otherwise a seeded sample
    of ``sample_pairs`` pairs. Violations are ratios above 1 + 1e-9 and must
    be zero for an embedding built from a balanced measure.
    """
    coords = emb.coords
    n = emb.n
    max_ratio = 0.0
    worst = (0, 0)
    violations = 0
    checked = 0
    if n <= max_full_n:
        for u in range(n - 1):
            diffs = np.abs(coords[u + 1:] - coords[u]).sum(axis=1)
            dd = dist.d[u, u + 1:].astype(np.float64)
            ratios = diffs / dd
            checked += ratios.size
            violations += int((ratios > 1.0 + _AUDIT_TOL).sum())
            i = int(np.argmax(ratios))
            if ratios[i] > max_ratio:
                max_ratio = float(ratios[i])
                worst = (u, u + 1 + i)
        return LipschitzReport(max_ratio, violations, worst, checked, sampled=False)

    rng = np.random.default_rng(seed)
    step = 1 << 16
    remaining = sample_pairs
    while remaining > 0:
        size = min(step, remaining)
        u = rng.integers(0, n, size=size)
        v = rng.integers(0, n, size=size)
        keep = u != v
        u, v = u[keep], v[keep]
        if u.size == 0:
            continue
        diffs = np.abs(coords[u] - coords[v]).sum(axis=1)
        dd = dist.d[u, v].astype(np.float64)
        ratios = diffs / dd
        checked += ratios.size
        violations += int((ratios > 1.0 + _AUDIT_TOL).sum())
        i = int(np.argmax(ratios))
        if ratios[i] > max_ratio:
            max_ratio = float(ratios[i])
            worst = (int(u[i]), int(v[i]))
        remaining -= size
    return LipschitzReport(max_ratio, violations, worst, checked, sampled=True)


@dataclass(frozen=True)
class HyperplaneReport:
    max_support_deviation: float
    exact: bool
    degenerate: bool  # single-column support (only the 1-vertex graph)


def hyperplane_check(emb: Embedding) -> HyperplaneReport:
    """Max |row sum - alpha| over support rows; 0 for exact balanced input."""
    degenerate = emb.dimension == 1
    if emb.exact_support_sums is not None:
        dev = max(abs(s - emb.exact_alpha) for s in emb.exact_support_sums)
        return HyperplaneReport(float(dev), exact=True, degenerate=degenerate)
    sums = emb.coords[emb.support].sum(axis=1)
    dev = float(np.abs(sums - emb.alpha).max())
    return HyperplaneReport(dev, exact=False, degenerate=degenerate)


@dataclass(frozen=True)
class SeparationReport:
    min_average: float
    bound: float
    satisfied: bool


def separation_check(emb: Embedding, diam: int) -> SeparationReport:
    """Average l-infinity spread of support images, against diam/(2m).

    Each support vertex's average includes its own zero distance, matching
    the way the guarantee is derived.
    """
    pts = emb.coords[emb.support]
    m = len(emb.support)
    pairwise = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    averages = pairwise.mean(axis=1)
    bound = diam / (2 * m)
    return SeparationReport(
        min_average=float(averages.min()),
        bound=bound,
        satisfied=bool(averages.min() >= bound - _AUDIT_TOL),
    )


def support_l1_averages(emb: Embedding) -> np.ndarray:
    """Per support vertex: average l1 distance to all support images."""
    pts = emb.coords[emb.support]
    pairwise = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    return pairwise.mean(axis=1)


def drop_small_coordinates(emb: Embedding, weight_threshold: float) -> Embedding:
    """Drop columns whose weight is below the threshold.

    Kept coordinates are unchanged (weights are not renormalized); alpha is
    recomputed as the largest retained row sum. Dropping nonnegative
    coordinates can only shrink l1 differences, so the Lipschitz guarantee
    survives; the hyperplane equality generally does not, and the result is
    marked truncated.
    """
    keep = emb.weights >= weight_threshold
    if not keep.any():
        raise ValueError(f"threshold {weight_threshold} drops every coordinate")
    if keep.all():
        return emb
    coords = emb.coords[:, keep]
    alpha = float(coords.sum(axis=1).max())
    return Embedding(
        support=emb.support[keep],
        weights=emb.weights[keep],
        alpha=alpha,
        coords=coords,
        truncated=True,
    )


def drop_to_top(emb: Embedding, k: int) -> Embedding:
    """Keep the k heaviest coordinates (more on exact weight ties)."""
    if not 1 <= k <= emb.dimension:
        raise ValueError(f"k must be in 1..{emb.dimension}")
    threshold = float(np.sort(emb.weights)[::-1][k - 1])
    return drop_small_coordinates(emb, threshold)


def center_project(emb_or_points) -> np.ndarray:
    """Project rows onto the zero-sum hyperplane: subtract each row's mean."""
    pts = emb_or_points.coords if isinstance(emb_or_points, Embedding) else np.asarray(
        emb_or_points, dtype=np.float64
    )
    return pts - pts.mean(axis=1, keepdims=True)


@dataclass(frozen=True)
class PCAResult:
    points: np.ndarray
    explained_variance_ratio: np.ndarray
    components: np.ndarray  # (target_dim, input_dim)


def pca_reduce(points: np.ndarray, target_dim: int) -> PCAResult:
    """Project mean-centered points onto the top principal components.

    Components are ordered by descending eigenvalue with the sign fixed so
    each component's largest-magnitude entry is positive, which makes the
    output deterministic.
    """
    pts = np.asarray(points, dtype=np.float64)
    n, dim = pts.shape
    if target_dim > dim:
        raise ValueError(f"target_dim {target_dim} exceeds dimension {dim}")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / max(1, n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    comps = evecs[:, order].T
    for row in comps:
        i = int(np.argmax(np.abs(row)))
        if row[i] < 0:
            row *= -1.0
    total = float(evals.sum())
    ratios = evals[:target_dim] / total if total > 0 else np.zeros(target_dim)
    comps = comps[:target_dim]
    return PCAResult(
        points=centered @ comps.T,
        explained_variance_ratio=ratios,
        components=comps,
    )


@dataclass(frozen=True)
class DistortionReport:
    c_estimate: float          # median of d(u,v) / ||phi(u) - phi(v)||_1
    in_band_fraction: float    # share of pairs with ratio/c in [1/2, 3/2]
    collapsed_pairs: int       # distinct vertices mapped to the same point
    pairs_checked: int
    histogram_counts: tuple[int, ...]
    histogram_edges: tuple[float, ...]


def distortion_report(
    emb: Embedding,
    dist: DistanceMatrix,
    sample_pairs: int = 100_000,
    seed: int = 0,
) -> DistortionReport:
    """How far from a scaled isometry the embedding is, over sampled pairs."""
    if sample_pairs < 1:
        raise ValueError("sample_pairs must be >= 1")
    n = emb.n
    total = n * (n - 1) // 2
    if total <= sample_pairs:
        us, vs = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(seed)
        us = rng.integers(0, n, size=sample_pairs)
        vs = rng.integers(0, n, size=sample_pairs)
        keep = us != vs
        us, vs = us[keep], vs[keep]
    l1 = np.abs(emb.coords[us] - emb.coords[vs]).sum(axis=1)
    dd = dist.d[us, vs].astype(np.float64)
    collapsed = int((l1 == 0).sum())
    finite = l1 > 0
    ratios = dd[finite] / l1[finite]
    if ratios.size == 0:
        return DistortionReport(
            float("nan"), 0.0, collapsed, int(us.size), (), ()
        )
    c = float(np.median(ratios))
    scaled = ratios / c
    in_band = float(((scaled >= 0.5) & (scaled <= 1.5)).mean())
    counts, edges = np.histogram(scaled, bins=16, range=(0.0, 3.0))
    return DistortionReport(
        c_estimate=c,
        in_band_fraction=in_band,
        collapsed_pairs=collapsed,
        pairs_checked=int(us.size),
        histogram_counts=tuple(int(x) for x in counts),
        histogram_edges=tuple(float(x) for x in edges),
    )
