"""Vertex measures: balance verification, exact refinement, brute-force search.

A measure is *balanced* when every vertex carrying mass attains the global
maximum of the transport cost T = D @ mu. Balanced measures are exactly the
critical points of the energy J(mu) = <mu, D mu> on the probability simplex,
which is what the refinement solver and the brute-force oracles exploit.

Measures produced by refinement and by the supports oracle are exact
rationals; float tolerances only enter for empirical (greedy) measures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import DistanceMatrix

_SUM_TOL = 1e-12
_BALANCE_TOL = 1e-9


class MeasureError(ValueError):
    """Invalid probability measure (negative weight or bad total mass)."""


class UnbalancedMeasureError(ValueError):
    """An operation required a balanced measure and got one that is not."""


@dataclass(frozen=True)
class VertexMeasure:
    """Probability vector over vertices, optionally with exact rational weights."""

    weights: np.ndarray
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise MeasureError("weights must be a nonempty vector")
        if (w < 0).any():
            raise MeasureError("weights must be nonnegative")
        if self.exact is not None:
            if len(self.exact) != w.size:
                raise MeasureError("exact weights have wrong length")
            if any(x < 0 for x in self.exact):
                raise MeasureError("weights must be nonnegative")
            if sum(self.exact) != 1:
                raise MeasureError("exact weights must sum to exactly 1")
        elif abs(float(w.sum()) - 1.0) > _SUM_TOL:
            raise MeasureError(f"weights sum to {w.sum()!r}, not 1")

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def support(self, eps: float = 0.0) -> np.ndarray:
        return np.flatnonzero(self.weights > eps)

    @classmethod
    def from_weights(cls, weights) -> "VertexMeasure":
        return cls(weights=np.asarray(weights, dtype=np.float64))

    @classmethod
    def from_fractions(cls, values) -> "VertexMeasure":
        exact = tuple(Fraction(x) for x in values)
        return cls(weights=np.array([float(x) for x in exact]), exact=exact)

    @classmethod
    def from_counts(cls, counts, total: int) -> "VertexMeasure":
        counts = np.asarray(counts, dtype=np.float64)
        return cls(weights=counts / float(total))

    @classmethod
    def dirac(cls, n: int, v: int) -> "VertexMeasure":
        exact = [Fraction(0)] * n
        exact[v] = Fraction(1)
        return cls.from_fractions(exact)

    @classmethod
    def uniform(cls, n: int) -> "VertexMeasure":
        return cls.from_fractions([Fraction(1, n)] * n)


def _as_weights(mu) -> np.ndarray:
    if isinstance(mu, VertexMeasure):
        return mu.weights
    return np.asarray(mu, dtype=np.float64)


def transport_costs(mu, dist: DistanceMatrix) -> np.ndarray:
    """T(v) = sum_u d(v, u) mu(u) for every vertex v.

    Uses only the support columns when the measure is sparse, so large
    matrices are never widened to float wholesale.
    """
    w = _as_weights(mu)
    if w.size != dist.n:
        raise ValueError(f"measure has {w.size} entries, graph has {dist.n}")
    idx = np.flatnonzero(w)
    if idx.size <= max(8, dist.n // 4):
        return dist.d[:, idx].astype(np.float64) @ w[idx]
    out = np.empty(dist.n)
    step = max(1, (1 << 22) // max(1, dist.n))
    for lo in range(0, dist.n, step):
        hi = min(dist.n, lo + step)
        out[lo:hi] = dist.d[lo:hi].astype(np.float64) @ w
    return out


def transport_costs_exact(mu: VertexMeasure, dist: DistanceMatrix) -> list[Fraction]:
    """Exact rational transport costs; requires an exact measure."""
    if mu.exact is None:
        raise ValueError("exact transport costs need an exact measure")
    supp = [v for v in range(mu.n) if mu.exact[v] > 0]
    denom = math.lcm(*(mu.exact[v].denominator for v in supp))
    scaled = np.array([int(mu.exact[v] * denom) for v in supp], dtype=object)
    cols = dist.d[:, supp].astype(object)
    nums = cols @ scaled
    return [Fraction(int(x), denom) for x in nums]


def energy_quadratic(mu, dist: DistanceMatrix) -> float:
    """J(mu) = <mu, D mu>, the distance energy of the measure."""
    w = _as_weights(mu)
    if w.size != dist.n:
        raise ValueError(f"measure has {w.size} entries, graph has {dist.n}")
    idx = np.flatnonzero(w)
    sub = dist.d[np.ix_(idx, idx)].astype(np.float64)
    return float(w[idx] @ (sub @ w[idx]))


def energy_quadratic_exact(mu: VertexMeasure, dist: DistanceMatrix) -> Fraction:
    if mu.exact is None:
        raise ValueError("exact energy needs an exact measure")
    supp = [v for v in range(mu.n) if mu.exact[v] > 0]
    total = Fraction(0)
    for u in supp:
        for v in supp:
            total += mu.exact[u] * int(dist.d[u, v]) * mu.exact[v]
    return total


@dataclass(frozen=True)
class BalanceReport:
    balanced: bool
    support: np.ndarray
    argmax_set: np.ndarray
    max_transport: float
    support_spread: float
    tol: float
    exact: bool


def is_balanced(mu: VertexMeasure, dist: DistanceMatrix, tol: float | None = None) -> BalanceReport:
    """Check Definition of balance: support is contained in argmax of T.

    Exact measures are checked in rational arithmetic (tol 0 by default);
    float measures use ``tol`` (default 1e-9).
    """
    if isinstance(mu, np.ndarray):
        mu = VertexMeasure.from_weights(mu)
    if mu.n != dist.n:
        raise ValueError(f"measure has {mu.n} entries, graph has {dist.n}")
    if mu.exact is not None and not (tol is not None and math.isinf(tol)):
        frac_tol = Fraction(tol) if tol else Fraction(0)
        T = transport_costs_exact(mu, dist)
        max_T = max(T)
        support = np.array([v for v in range(mu.n) if mu.exact[v] > 0], dtype=np.int64)
        argmax = np.array([v for v in range(mu.n) if T[v] >= max_T - frac_tol], dtype=np.int64)
        supp_T = [T[v] for v in support]
        balanced = all(t >= max_T - frac_tol for t in supp_T)
        return BalanceReport(
            balanced=bool(balanced),
            support=support,
            argmax_set=argmax,
            max_transport=float(max_T),
            support_spread=float(max(supp_T) - min(supp_T)),
            tol=float(frac_tol),
            exact=True,
        )
    if tol is None:
        tol = _BALANCE_TOL
    T = transport_costs(mu, dist)
    max_T = float(T.max())
    support = mu.support()
    argmax = np.flatnonzero(T >= max_T - tol)
    supp_T = T[support]
    return BalanceReport(
        balanced=bool((supp_T >= max_T - tol).all()),
        support=support,
        argmax_set=argmax,
        max_transport=max_T,
        support_spread=float(supp_T.max() - supp_T.min()),
        tol=tol,
        exact=False,
    )


def directional_derivative(mu: VertexMeasure, nu, dist: DistanceMatrix, tol: float = _BALANCE_TOL) -> float:
    """Derivative of J at mu along a signed direction nu: 2 <D mu, nu>.

    nu must sum to zero and be nonnegative off the support of mu (so that
    mu + eps*nu stays a probability measure for small eps > 0).
    """
    nu = np.asarray(nu, dtype=np.float64)
    if nu.shape != mu.weights.shape:
        raise ValueError("direction has wrong shape")
    if abs(float(nu.sum())) > tol:
        raise ValueError("direction must sum to zero")
    off = mu.weights <= 0
    if (nu[off] < -tol).any():
        raise ValueError("direction is negative off the support; not admissible")
    T = transport_costs(mu, dist)
    return 2.0 * float(T @ nu)


def extract_support(mu: VertexMeasure, eps: float | None = None) -> np.ndarray:
    """Vertices with weight above the threshold (default max(1e-3, 0.5/n))."""
    if eps is None:
        eps = max(1e-3, 0.5 / mu.n)
    idx = mu.support(eps)
    if idx.size == 0:
        raise ValueError(f"support threshold {eps} leaves an empty support")
    return idx


# ---------------------------------------------------------------------------
# Exact refinement on a fixed support
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefinementResult:
    ok: bool
    measure: VertexMeasure | None
    reason: str | None  # negative_weight | singular_system | off_support_violation
    transport_value: Fraction | None
    # failure details, for active-set style retries: the raw solved weights
    # (support order) and off-support violators sorted worst-first
    raw_weights: tuple[Fraction, ...] | None = None
    violating: tuple[int, ...] | None = None

    FAILURE_REASONS = ("negative_weight", "singular_system", "off_support_violation")


def _solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gaussian elimination over exact rationals; None when singular."""
    m = len(matrix)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(m):
        pivot = None
        for r in range(col, m):
            if aug[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return None
        if pivot != col:
            aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][m] for i in range(m)]


def refine_on_support(dist: DistanceMatrix, support) -> RefinementResult:
    """Solve for the measure with constant transport cost on ``support``.

    The linear system { (D mu)(v) = c on support, mu = 0 elsewhere,
    sum mu = 1 } is solved in exact rational arithmetic. The result is a
    measure only if all weights are nonnegative and no off-support vertex
    exceeds the common transport value c; otherwise a typed failure is
    returned (failure is a value here, not an exception).
    """
    support = sorted({int(v) for v in np.asarray(support, dtype=np.int64).ravel()})
    if not support:
        raise ValueError("support must be nonempty")
    if min(support) < 0 or max(support) >= dist.n:
        raise ValueError("support vertex out of range")
    m = len(support)

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for v in support:
        rows.append([Fraction(int(dist.d[v, w])) for w in support] + [Fraction(-1)])
        rhs.append(Fraction(0))
    rows.append([Fraction(1)] * m + [Fraction(0)])
    rhs.append(Fraction(1))

    sol = _solve_exact(rows, rhs)
    if sol is None:
        return RefinementResult(False, None, "singular_system", None)
    weights, c = sol[:m], sol[m]
    if any(w < 0 for w in weights):
        return RefinementResult(
            False, None, "negative_weight", None, raw_weights=tuple(weights)
        )

    # Off-support check with a common denominator so the scan is integer-only.
    denom = math.lcm(c.denominator, *(w.denominator for w in weights))
    scaled = np.array([int(w * denom) for w in weights], dtype=object)
    nums = dist.d[:, support].astype(object) @ scaled
    c_scaled = int(c * denom)
    if (nums > c_scaled).any():
        excess = nums - c_scaled
        bad = [v for v in range(dist.n) if excess[v] > 0]
        bad.sort(key=lambda v: (-excess[v], v))
        return RefinementResult(
            False, None, "off_support_violation", None,
            raw_weights=tuple(weights), violating=tuple(bad),
        )

    exact = [Fraction(0)] * dist.n
    for v, w in zip(support, weights):
        exact[v] = w
    return RefinementResult(True, VertexMeasure.from_fractions(exact), None, c)


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

_SCREEN_MAX_DIST = 10_000  # int64 Cramer determinants stay exact below this
_SCREEN_MIN_SUBSETS = 1024


def brute_force_balanced(
    dist: DistanceMatrix,
    mode: str,
    *,
    max_size: int | None = None,
    resolution: Fraction | float | None = None,
    limit: int = 30_000_000,
) -> list[tuple[VertexMeasure, float]]:
    """Enumerate balanced measures at desk scale.

    ``supports`` mode enumerates vertex subsets up to ``max_size``
    (lexicographically) and keeps every subset whose exact refinement
    succeeds -- all rational-support balanced measures up to that size.
    ``grid`` mode scans the probability simplex at step ``resolution`` and
    returns the grid maximizer(s) of the energy J. Both refuse instances
    whose enumeration exceeds ``limit`` points.
    """
    if mode == "supports":
        if max_size is None or max_size < 1:
            raise ValueError("supports mode needs max_size >= 1")
        n = dist.n
        total = sum(math.comb(n, k) for k in range(1, min(max_size, n) + 1))
        if total > limit:
            raise ValueError(f"instance too large: {total} subsets > limit {limit}")
        results: list[tuple[VertexMeasure, float]] = []
        seen: set[tuple[Fraction, ...]] = set()
        for k in range(1, min(max_size, n) + 1):
            if k == 1:
                # a Dirac is balanced only in the one-vertex graph
                if n == 1:
                    results.append((VertexMeasure.dirac(1, 0), 0.0))
                continue
            screened = None
            if math.comb(n, k) > _SCREEN_MIN_SUBSETS and dist.diam <= _SCREEN_MAX_DIST:
                from ._screen import screen_supports

                screened = screen_supports(dist.d, dist.diam, k)
            if screened is not None:
                cands, sing = screened
                to_refine = sorted(cands) + sorted(sing)
            else:
                to_refine = itertools.combinations(range(n), k)
            for support in to_refine:
                res = refine_on_support(dist, support)
                if res.ok and res.measure.exact not in seen:
                    # supersets of a support refine to the same measure with
                    # zero padding; report each distinct measure once
                    seen.add(res.measure.exact)
                    mu = res.measure
                    results.append((mu, float(energy_quadratic(mu, dist))))
        return results

    if mode == "grid":
        if resolution is None:
            raise ValueError("grid mode needs a resolution")
        step = Fraction(resolution) if not isinstance(resolution, Fraction) else resolution
        q = int(round(1 / step))
        if q < 1 or q > 40:
            raise ValueError("grid resolution must be a step between 1 and 1/40")
        if dist.n > 8:
            raise ValueError("grid mode supports n <= 8")
        count = math.comb(q + dist.n - 1, dist.n - 1)
        if count > limit:
            raise ValueError(f"instance too large: {count} grid points > limit {limit}")
        return _grid_maximizers(dist, q)

    raise ValueError(f"unknown mode {mode!r}; use 'grid' or 'supports'")


_COMPOSITION_CACHE: dict[tuple[int, int], np.ndarray] = {}


def simplex_grid(n: int, q: int) -> np.ndarray:
    """All length-n compositions of q, lexicographically ordered (int16)."""
    key = (n, q)
    cached = _COMPOSITION_CACHE.get(key)
    if cached is not None:
        return cached
    count = math.comb(q + n - 1, n - 1)
    out = np.empty((count, n), dtype=np.int16)

    def fill(view: np.ndarray, total: int) -> None:
        cols = view.shape[1]
        if cols == 1:
            view[:, 0] = total
            return
        if cols == 2:
            first = np.arange(total + 1, dtype=np.int16)
            view[:, 0] = first
            view[:, 1] = total - first
            return
        r = 0
        for first in range(total + 1):
            cnt = math.comb(total - first + cols - 2, cols - 2)
            view[r:r + cnt, 0] = first
            fill(view[r:r + cnt, 1:], total - first)
            r += cnt

    fill(out, q)
    out.setflags(write=False)
    _COMPOSITION_CACHE[key] = out
    return out


def _grid_maximizers(dist: DistanceMatrix, q: int) -> list[tuple[VertexMeasure, float]]:
    n = dist.n
    grid = simplex_grid(n, q)
    dense = dist.d.astype(np.float64)
    best = -np.inf
    best_rows: list[np.ndarray] = []
    step = max(1, (1 << 22) // max(1, n))
    for lo in range(0, len(grid), step):
        w = grid[lo:lo + step].astype(np.float64) / q
        j = np.einsum("ij,ij->i", w, w @ dense)
        m = float(j.max())
        if m > best:
            best = m
            best_rows = [grid[lo:lo + step][j == m]]
        elif m == best:
            best_rows.append(grid[lo:lo + step][j == m])
    rows = np.concatenate(best_rows, axis=0)
    out = []
    for row in rows:
        mu = VertexMeasure.from_fractions([Fraction(int(c), q) for c in row])
        out.append((mu, best))
    return out
