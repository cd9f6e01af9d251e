"""Joint grouping and beamforming.

The K_T sources are split into N equal time-division subgroups with pairs
kept together. Every subgroup is served in its own slot with the full relay
power budget, and the N giving the largest sum-rate is selected per channel
realization.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_vector
from .channel import make_pairing
from .metrics import PerformanceReport, _relay_power, rates, sinr
from .mi import _ConstrainedSolver, scale_bisection
from .reduction import build_couplings, reduce, unvec


@dataclass(frozen=True)
class GroupingPlan:
    num_groups: int
    groups: tuple

    @property
    def group_size(self):
        return len(self.groups[0])


def partition(K_T, N, pairing=None):
    """Deal the pairs, in order, into ``N`` contiguous subgroups."""
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if K_T % N or (K_T // N) % 2:
        raise ValueError(f"N={N} does not split {K_T} sources into groups of even size")
    pairing = make_pairing(K_T) if pairing is None else pairing
    if pairing.num_sources != K_T:
        raise ValueError("pairing size does not match K_T")
    pairs = pairing.pairs()
    per = len(pairs) // N
    groups = tuple(tuple(s for pair in pairs[i * per:(i + 1) * per] for s in pair) for i in range(N))
    return GroupingPlan(num_groups=int(N), groups=groups)


def valid_group_counts(K_T, M):
    """Every N splitting ``K_T`` into even groups that ``M`` antennas can serve."""
    return [n for n in range(1, K_T // 2 + 1) if K_T % n == 0 and (K_T // n) % 2 == 0 and M >= K_T // n - 1]


def _group_sinrs(channels, plan, noise_power, relay_powers, beta):
    # SINRs of every source for each entry of relay_powers, shape (len(relay_powers), K_T).
    out = np.zeros((len(relay_powers), channels.num_sources))
    for group in plan.groups:
        sub = channels.subset(group)
        red = reduce(sub)
        gains = None if beta is None else beta[list(group)]
        couplings = build_couplings(red, sub.source_powers, sub.pairing, noise_power, gains)
        B = unvec(_ConstrainedSolver(couplings).weights(couplings.g), red.num_sources)
        base = _relay_power(B, red.Htilde, sub.source_powers, noise_power)
        for i, power in enumerate(relay_powers):
            delta = 1e-9 * np.sqrt(power / base)
            alpha = scale_bisection(B, red, sub.source_powers, noise_power, power, delta_alpha=delta)
            out[i, list(group)] = sinr(alpha * B, red, sub.source_powers, noise_power, sub.pairing)
    return out


def evaluate_grouping(channels, plan, noise_power, relay_power, beta=None):
    """Sum-rate of the MI beamformer applied to every subgroup of ``plan``.

    Parameters
    ----------
    channels : ChannelSet
        Channels of all K_T sources.
    plan : GroupingPlan
    noise_power : float
    relay_power : float
        Linear relay power budget, available in full to every slot.
    beta : array_like, optional
        Desired gains for all K_T sources.

    Returns
    -------
    PerformanceReport
    """
    if beta is not None:
        beta = check_positive_vector(beta, channels.num_sources, "beta")
    gamma = _group_sinrs(channels, plan, noise_power, [relay_power], beta)[0]
    return PerformanceReport(
        sinr=gamma,
        rates=rates(gamma, plan.num_groups),
        relay_power=float(relay_power),
        scheme="MI",
        num_groups=plan.num_groups,
    )


def sum_rates_over_powers(channels, plan, noise_power, relay_powers, beta=None):
    """Sum-rate of ``plan`` at each relay power; the MI direction is computed once."""
    gamma = _group_sinrs(channels, plan, noise_power, list(relay_powers), beta)
    return rates(gamma, plan.num_groups).sum(axis=1)


def select_best(channels, candidate_Ns, noise_power, relay_power, beta=None):
    """Pick the subgroup count with the largest sum-rate for this realization.

    Ties go to the smaller N.

    Returns
    -------
    best : int
    reports : dict
        ``{N: PerformanceReport}`` for every candidate.
    """
    candidates = sorted(set(int(n) for n in candidate_Ns))
    if not candidates:
        raise ValueError("no candidate subgroup counts given")
    reports = {}
    best = None
    for n in candidates:
        plan = partition(channels.num_sources, n, channels.pairing)
        reports[n] = evaluate_grouping(channels, plan, noise_power, relay_power, beta)
        if best is None or reports[n].sum_rate > reports[best].sum_rate:
            best = n
    return best, reports
