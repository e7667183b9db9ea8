"""Greedy remote-vertex procedure with exact integer bookkeeping.

Each step appends a vertex maximizing the running sum of distances to the
sequence so far. The per-vertex sums S and the pair total F (sum of
d(x_i, x_j) over all ordered sequence pairs) are maintained incrementally in
exact integers via the identity F_{m+1} = F_m + 2 * S_m(x_{m+1}); both are
recomputable from scratch, which the diagnostics hooks exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import DistanceMatrix
from .measures import VertexMeasure, transport_costs, transport_costs_exact  # noqa: F401

TIE_BREAKS = ("min_index", "boundary_min_index", "random")


@dataclass
class GreedyState:
    """Mutable trajectory state; single-owner, mutated sequentially."""

    dist: DistanceMatrix
    sequence: list[int]
    counts: np.ndarray          # int64 multiplicities
    sums: np.ndarray            # int64, S(v) = sum_i d(v, x_i)
    pair_sum: int               # F = sum_{i,j} d(x_i, x_j), exact
    tie_break: str = "min_index"
    rng: np.random.Generator | None = None
    boundary_mask: np.ndarray | None = None

    @property
    def m(self) -> int:
        return len(self.sequence)

    def recompute(self) -> tuple[np.ndarray, int]:
        """From-scratch (S, F) for audits, independent of the running values."""
        sums = self.dist.d.astype(np.int64).T @ self.counts
        return sums, int(self.counts @ sums)


def init_state(
    dist: DistanceMatrix,
    initial,
    tie_break: str = "min_index",
    seed: int | None = None,
    boundary=None,
) -> GreedyState:
    seq = [int(v) for v in initial]
    if not seq:
        raise ValueError("initial vertex list must be nonempty")
    if min(seq) < 0 or max(seq) >= dist.n:
        raise ValueError("initial vertex out of range")
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}")
    counts = np.zeros(dist.n, dtype=np.int64)
    sums = np.zeros(dist.n, dtype=np.int64)
    for v in seq:
        counts[v] += 1
        sums += dist.d[v]
    mask = None
    if boundary is not None:
        mask = boundary if isinstance(boundary, np.ndarray) else boundary.mask
    return GreedyState(
        dist=dist,
        sequence=seq,
        counts=counts,
        sums=sums,
        pair_sum=int(counts @ sums),
        tie_break=tie_break,
        rng=np.random.default_rng(seed) if tie_break == "random" else None,
        boundary_mask=mask,
    )


def _select(state: GreedyState) -> int:
    """Argmax of S under the configured tie-break (min index by default)."""
    S = state.sums
    if state.tie_break == "min_index":
        return int(np.argmax(S))
    maximizers = np.flatnonzero(S == S.max())
    if state.tie_break == "boundary_min_index":
        if state.boundary_mask is not None:
            on_boundary = maximizers[state.boundary_mask[maximizers]]
            if on_boundary.size:
                return int(on_boundary[0])
        return int(maximizers[0])
    return int(state.rng.choice(maximizers))


def _apply(state: GreedyState, chosen: int) -> None:
    state.pair_sum += 2 * int(state.sums[chosen])
    state.counts[chosen] += 1
    state.sequence.append(chosen)
    np.add(state.sums, state.dist.d[chosen], out=state.sums)


def greedy_step(state: GreedyState) -> int:
    """Append one vertex; returns the chosen index."""
    chosen = _select(state)
    _apply(state, chosen)
    return chosen


def empirical_measure(state: GreedyState) -> VertexMeasure:
    """Frequency distribution of the sequence so far."""
    return VertexMeasure.from_counts(state.counts, state.m)


@dataclass
class RunConfig:
    max_steps: int = 100_000
    stop_gap: float | None = None  # default 1e-3 * diam
    sample_every: int = 100
    heavy_eps: float = 0.05
    # alternating trajectories cross |max T - E| = 0 transiently long before
    # the gap settles, so termination requires this many consecutive
    # in-tolerance steps (1 restores the bare threshold rule)
    stable_window: int = 10


@dataclass
class Diagnostics:
    """Optional per-step invariant checks, accumulated during a run."""

    check_boundary: bool = False
    check_recurrence: bool = False
    continuity_every: int = 0

    boundary_checked: int = 0
    boundary_violations: int = 0
    recurrence_checked: int = 0
    recurrence_violations: int = 0
    continuity_checked: int = 0
    continuity_violations: int = 0


@dataclass(frozen=True)
class ConvergenceReport:
    steps: int
    energy: float                      # E_m = F / (m (m - 1))
    max_transport: float               # max_v S(v) / m
    gap: float                         # |max transport - energy|
    alpha_estimate: float              # energy at termination
    converged: bool
    energy_trace: tuple[tuple[int, float], ...]
    support_gap: float | None          # max transport deficit on heavy vertices
    heavy_eps: float


def _report(state: GreedyState, converged: bool, trace, heavy_eps: float) -> ConvergenceReport:
    m = state.m
    energy = state.pair_sum / (m * (m - 1)) if m >= 2 else float("nan")
    max_T = float(state.sums.max()) / m
    gap = abs(max_T - energy) if m >= 2 else float("nan")
    heavy = state.counts > heavy_eps * m
    support_gap = None
    if heavy.any():
        T = state.sums / m
        support_gap = float(max_T - T[heavy].min())
    return ConvergenceReport(
        steps=m,
        energy=energy,
        max_transport=max_T,
        gap=gap,
        alpha_estimate=energy,
        converged=converged,
        energy_trace=tuple(trace),
        support_gap=support_gap,
        heavy_eps=heavy_eps,
    )


def run(
    state: GreedyState,
    config: RunConfig | None = None,
    diagnostics: Diagnostics | None = None,
) -> ConvergenceReport:
    """Iterate greedy steps until the energy/transport gap closes.

    Terminates after ``max_steps`` steps or as soon as
    |max_v T_m(v) - E_m| <= stop_gap with m >= 2. Non-convergence is
    reported, not raised.
    """
    if config is None:
        config = RunConfig()
    if config.max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    diam = state.dist.diam
    stop_gap = config.stop_gap if config.stop_gap is not None else 1e-3 * diam
    # S fits int64 comfortably; guard the extreme corner anyway
    if (state.m + config.max_steps) * max(diam, 1) >= (1 << 62):
        raise OverflowError("trajectory would overflow 64-bit distance sums")

    trace: list[tuple[int, float]] = []
    converged = False
    stable = 0
    d = diagnostics
    for step in range(1, config.max_steps + 1):
        m_before = state.m
        chosen = _select(state)

        if d is not None:
            if d.check_boundary and state.boundary_mask is not None:
                d.boundary_checked += 1
                maximizers = state.sums == state.sums.max()
                if not (maximizers & state.boundary_mask).any():
                    d.boundary_violations += 1
            if d.continuity_every and step % d.continuity_every == 0:
                d.continuity_checked += 1
                row = state.dist.d[chosen].astype(np.int64)
                lhs = int(np.abs(m_before * row - state.sums).max())
                if lhs > m_before * diam:
                    d.continuity_violations += 1

        _apply(state, chosen)

        if d is not None and d.check_recurrence:
            d.recurrence_checked += 1
            if state.pair_sum != int(state.counts @ state.sums):
                d.recurrence_violations += 1

        m = state.m
        if m >= 2:
            energy = state.pair_sum / (m * (m - 1))
            gap = abs(float(state.sums.max()) / m - energy)
            if config.sample_every and (step % config.sample_every == 0 or step == 1):
                trace.append((m, energy))
            stable = stable + 1 if gap <= stop_gap else 0
            if stable >= config.stable_window:
                converged = True
                break
    return _report(state, converged, trace, config.heavy_eps)
