"""Seeded Monte-Carlo execution with order-independent aggregation."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..channel import trial_rng
from ..exceptions import DegenerateChannelError, SolverError

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 20


class ResampleRateError(RuntimeError):
    """Too many trials needed a fresh channel draw."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass
class MonteCarloResult:
    samples: np.ndarray
    resampled: int
    solver_failures: int

    @property
    def trials(self):
        return self.samples.shape[0]

    @property
    def mean(self):
        return self.samples.mean(axis=0)

    @property
    def stderr(self):
        if self.trials < 2:
            return np.zeros(self.samples.shape[1:])
        return self.samples.std(axis=0, ddof=1) / np.sqrt(self.trials)


def _run_trial(seed, trial, draw, evaluate):
    resampled = failures = 0
    for attempt in range(MAX_ATTEMPTS):
        channels = draw(trial_rng(seed, trial, attempt))
        try:
            return np.asarray(evaluate(channels), dtype=float), resampled, failures
        except DegenerateChannelError:
            resampled += 1
        except SolverError:
            failures += 1
        log.debug("trial %d attempt %d rejected; redrawing", trial, attempt)
    raise ResampleRateError(f"trial {trial}: no usable channel after {MAX_ATTEMPTS} draws", None)


def run_monte_carlo(seed, trials, draw, evaluate, workers=1, max_reject_rate=0.01):
    """Evaluate ``evaluate(draw(rng))`` for ``trials`` independently seeded trials.

    Trial ``t`` uses a generator seeded with ``seed ^ t``. Trials whose draw
    turns out degenerate (or whose solver fails) are redrawn from a derived
    sub-seed and counted. Results are stored by trial index, so the output
    does not depend on ``workers``.

    Parameters
    ----------
    seed : int
    trials : int
    draw : callable
        ``draw(rng) -> ChannelSet``.
    evaluate : callable
        ``evaluate(channels) -> array_like`` of a fixed shape.
    workers : int
        Threads used to run trials concurrently.
    max_reject_rate : float
        Fraction of redrawn trials above which :class:`ResampleRateError` is raised.
    """
    if trials < 1:
        raise ValueError("trials must be positive")

    def one(t):
        return _run_trial(seed, t, draw, evaluate)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(t) for t in range(trials)]
    result = MonteCarloResult(
        samples=np.stack([o[0] for o in outcomes]),
        resampled=sum(o[1] for o in outcomes),
        solver_failures=sum(o[2] for o in outcomes),
    )
    if result.resampled + result.solver_failures > max_reject_rate * trials:
        raise ResampleRateError(
            f"{result.resampled} degenerate draws and {result.solver_failures} solver failures "
            f"in {trials} trials exceed {max_reject_rate:.0%}",
            result,
        )
    return result
