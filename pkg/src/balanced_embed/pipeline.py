"""End-to-end pipeline: greedy run, support extraction, exact refinement.

This is the engine behind the `greedy` and `embed --auto` commands and the
fixture suites: run the greedy procedure to convergence, read a candidate
support off the empirical measure, and try to refine it into an exactly
balanced measure. When refinement fails the empirical measure is reported
unrefined (with the failure reason), so callers always get a measure plus
an honest balance report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import DistanceMatrix
from .greedy import (
    ConvergenceReport,
    Diagnostics,
    GreedyState,
    RunConfig,
    empirical_measure,
    init_state,
    run,
)
from .measures import (
    BalanceReport,
    RefinementResult,
    VertexMeasure,
    extract_support,
    is_balanced,
    refine_on_support,
)


@dataclass(frozen=True)
class PipelineResult:
    state: GreedyState
    report: ConvergenceReport
    empirical: VertexMeasure
    support: np.ndarray
    refinement: RefinementResult | None
    measure: VertexMeasure        # refined when possible, else empirical
    refined: bool
    balance: BalanceReport        # balance report of the final measure
    refine_attempts: int = 0


def refine_with_search(
    dist: DistanceMatrix,
    start_support,
    max_rounds: int = 32,
) -> tuple[RefinementResult, int]:
    """Active-set search for a refinable support near the starting one.

    The empirical support of a finite greedy run both misses light vertices
    of the limiting measure and keeps transient ones, so a single refinement
    attempt often fails. The failure modes point at the fix: a negative
    solved weight means a vertex does not belong (drop the most negative),
    an off-support violation means one is missing (add the worst violator).
    Stops on success, a singular system, a repeated support, or the round cap.
    Returns the final result and the number of attempts.
    """
    support = tuple(sorted(int(v) for v in np.asarray(start_support).ravel()))
    seen = {support}
    result = refine_on_support(dist, support)
    rounds = 1
    while not result.ok and rounds < max_rounds:
        if result.reason == "negative_weight":
            drop = min(
                range(len(support)), key=lambda i: (result.raw_weights[i], support[i])
            )
            nxt = support[:drop] + support[drop + 1:]
        elif result.reason == "off_support_violation":
            nxt = tuple(sorted(support + (result.violating[0],)))
        else:  # singular_system has no canonical repair
            break
        if not nxt or nxt in seen:
            break
        seen.add(nxt)
        support = nxt
        result = refine_on_support(dist, support)
        rounds += 1
    return result, rounds


def balanced_measure_pipeline(
    dist: DistanceMatrix,
    initial=(0,),
    config: RunConfig | None = None,
    tie_break: str = "min_index",
    seed: int | None = None,
    boundary=None,
    eps_supp: float | None = None,
    refine: bool = True,
    diagnostics: Diagnostics | None = None,
    balance_tol: float | None = None,
) -> PipelineResult:
    state = init_state(dist, initial, tie_break=tie_break, seed=seed, boundary=boundary)
    report = run(state, config, diagnostics)
    empirical = empirical_measure(state)
    support = extract_support(empirical, eps_supp)
    refinement = None
    attempts = 0
    if refine:
        refinement, attempts = refine_with_search(dist, support)
    if refinement is not None and refinement.ok:
        measure = refinement.measure
        refined = True
    else:
        measure = empirical
        refined = False
    balance = is_balanced(measure, dist, tol=balance_tol)
    return PipelineResult(
        state=state,
        report=report,
        empirical=empirical,
        support=support,
        refinement=refinement,
        measure=measure,
        refined=refined,
        balance=balance,
        refine_attempts=attempts,
    )
