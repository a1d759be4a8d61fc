"""
Experiment Service
==================

Description: Simplex experiments, spot checks and the scaling run
Version: 1.0.0

Simplex experiment: random banded dMf on a full simplex, simplified with the
shallow-first policy, classified per dimension, timed, and spot-checked
against the dense oracle. Independent seeds fan out with joblib.
"""

import logging
import time
from typing import Optional

from joblib import Parallel, delayed

from app.config import (
    EXPERIMENT_SPOT_CHECK_EVERY,
    EXPERIMENT_TIME_BUDGET,
    SCALING_SWEEP_CANCELS,
    SCALING_SWEEP_DIMS,
    VERIFY_DEFAULT,
)
from app.exceptions import OracleScaleExceeded
from app.models.reports import ComplexityReport, ExperimentReport, ScalingPoint
from app.services.document_service import diagram_from_morse_state
from app.services.generator_service import bands_separated, random_dmf, simplex_skeleton
from app.services.morse_state import MorseState
from app.services.oracle_service import brute_reduce, diff_states
from app.services.pairing_service import obstacle_count
from app.services.simplification_service import CancellationResult, simplify_all

logger = logging.getLogger(__name__)


class SpotChecker:
    """on_cancel hook comparing every k-th state with a from-scratch reduction."""

    def __init__(self, every: int = EXPERIMENT_SPOT_CHECK_EVERY):
        self.every = max(1, every)
        self.seen = 0
        self.checks = 0
        self.diffs = 0

    def __call__(self, state: MorseState, result: CancellationResult) -> None:
        self.seen += 1
        if self.seen % self.every:
            return
        try:
            oracle = brute_reduce(state.morse, state.reduced.values)
        except OracleScaleExceeded as e:
            logger.debug(f"Spot check skipped: {e.message}")
            return
        self.checks += 1
        if diff_states(state.reduced, oracle):
            self.diffs += 1
            logger.warning(f"Spot check {self.checks} after {result.pair} found differences")


def scaling_sweep(seed: int, deadline: Optional[float] = None) -> list[ScalingPoint]:
    """Mean time per cancellation over SCALING_SWEEP_CANCELS cancellations, per simplex dimension."""
    points = []
    for dim in SCALING_SWEEP_DIMS:
        if deadline is not None and time.perf_counter() > deadline:
            logger.warning(f"Scaling sweep stopped by the time budget before dimension {dim}")
            break
        X = simplex_skeleton(dim)
        state = MorseState.build(X, random_dmf(X, seed, banded=True))
        pairs = len(state.pairs())
        _, _, results = simplify_all(state, verify=False, deadline=deadline, limit=SCALING_SWEEP_CANCELS)
        mean = sum(r.seconds for r in results) / len(results) if results else 0.0
        points.append(ScalingPoint(dim=dim, cells=len(X), pairs=pairs, cancellations=len(results), mean_seconds=mean))
        logger.info(f"Scaling sweep: {len(X)} cells, {len(results)} cancellations, {mean:.4f}s each")
    return points


def run_experiment(
    d: int,
    seed: int,
    verify: bool = VERIFY_DEFAULT,
    scaling: bool = False,
    time_budget: float = EXPERIMENT_TIME_BUDGET,
) -> ExperimentReport:
    started = time.perf_counter()
    deadline = started + time_budget
    X = simplex_skeleton(d)
    state = MorseState.build(X, random_dmf(X, seed, banded=True))
    logger.info(f"Experiment d={d} seed={seed}: {len(X)} cells, {len(state.off_diagonal())} off-diagonal pairs")

    separated = bands_separated(diagram_from_morse_state(state).pairs)
    if not separated:
        logger.warning(f"Experiment d={d} seed={seed}: dimension bands overlap")

    pairs = state.pairs()
    obstacles = {p.birth: obstacle_count(state.reduced, p, pairs) for p in pairs if p.death is not None}

    checker = SpotChecker()
    _, classification, results = simplify_all(
        state,
        policy="shallow-first-then-regions",
        verify=verify,
        deadline=deadline,
        on_cancel=checker,
    )

    complexity = ComplexityReport(n=len(X), c=len(pairs), obstacles=obstacles, timings=[r.seconds for r in results])
    points = scaling_sweep(seed, deadline) if scaling else []
    incomplete = classification.incomplete or time.perf_counter() > deadline

    report = ExperimentReport(
        d=d,
        seed=seed,
        cells=len(X),
        classification=classification,
        complexity=complexity,
        bands_separated=separated,
        oracle_checks=checker.checks,
        oracle_diffs=checker.diffs,
        scaling=points,
        incomplete=incomplete,
    )
    counts = classification.counts
    logger.info(
        f"Experiment d={d} seed={seed} done in {time.perf_counter() - started:.1f}s: "
        f"{classification.cancelled} cancelled, {len(classification.not_cancellable)} not cancellable, "
        f"{checker.diffs}/{checker.checks} spot-check diffs"
    )
    logger.debug(f"Per-dimension counts: {counts}")
    if not classification.region_cancelled:
        logger.info(f"Experiment d={d} seed={seed}: no pair needed forbidden regions")
    return report


def run_experiments(
    d: int,
    seeds: list[int],
    workers: int = 1,
    verify: bool = VERIFY_DEFAULT,
    scaling: bool = False,
    time_budget: float = EXPERIMENT_TIME_BUDGET,
) -> list[ExperimentReport]:
    """One independent run per seed; results in the order of `seeds`."""
    if workers <= 1 or len(seeds) <= 1:
        return [run_experiment(d, s, verify, scaling, time_budget) for s in seeds]
    return Parallel(n_jobs=workers)(
        delayed(run_experiment)(d, s, verify, scaling, time_budget) for s in seeds
    )


def needs_inspection(reports: list[ExperimentReport]) -> bool:
    """No seed produced a region-cancelled pair."""
    return bool(reports) and not any(r.classification.region_cancelled for r in reports)
