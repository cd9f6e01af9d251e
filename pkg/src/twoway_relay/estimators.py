"""Estimator-style wrappers around the relay beamformers.

``fit`` takes the ``M x K`` uplink channel matrix (one column per source,
pairs adjacent) and designs the relay matrix; ``predict`` returns the SINR
each destination sees when that relay matrix is applied to a channel
matrix; ``score`` returns the sum-rate.
"""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_matrix, check_positive_vector
from .channel import ChannelSet, make_pairing
from .grouping import evaluate_grouping, partition, select_best, valid_group_counts
from .metrics import rates, relay_power_relay_domain, sinr_relay_domain
from .mi import mi_beamformer
from .mp import mp_beamformer
from .reduction import lift, reduce


def _channels(H, source_powers):
    H = check_complex_matrix(H, "H")
    K = H.shape[1]
    if K < 2 or K % 2:
        raise ValueError(f"H needs an even number (>= 2) of source columns, got {K}")
    return ChannelSet(H, make_pairing(K), check_positive_vector(source_powers, K, "source_powers"))


class _RelayBase(BaseEstimator):

    def predict(self, H):
        """SINR at every destination with the fitted relay matrix ``A_``."""
        check_is_fitted(self, "A_")
        ch = _channels(H, self.source_powers)
        if ch.H.shape[0] != self.A_.shape[0]:
            raise ValueError(f"H has {ch.H.shape[0]} antennas, the relay was fitted with {self.A_.shape[0]}")
        return sinr_relay_domain(self.A_, ch.H, ch.source_powers, self.noise_power, ch.pairing)

    def score(self, H, y=None):
        """Sum-rate in bits per channel use."""
        return float(rates(self.predict(H)).sum())

    def transmit_power(self, H):
        """Relay transmit power of ``A_`` on ``H``."""
        check_is_fitted(self, "A_")
        ch = _channels(H, self.source_powers)
        return relay_power_relay_domain(self.A_, ch.H, ch.source_powers, self.noise_power)

    def _store(self, ch, red, bf):
        self.reduced_ = red
        self.B_ = bf.B
        self.alpha_ = bf.alpha
        self.A_ = lift(bf.B, red.U)
        self.n_sources_ = ch.num_sources
        self.regularized_ = bf.regularized
        return self


class MIRelayBeamformer(_RelayBase):
    """Minimum-interference relay beamformer scaled to the power budget.

    Parameters
    ----------
    relay_power : float
        Linear relay power budget.
    source_powers : float or array_like
    noise_power : float
    beta : array_like, optional
        Desired gain per destination; ones by default.
    """

    def __init__(self, relay_power=10.0, source_powers=1.0, noise_power=1.0, beta=None):
        self.relay_power = relay_power
        self.source_powers = source_powers
        self.noise_power = noise_power
        self.beta = beta

    def fit(self, H, y=None):
        ch = _channels(H, self.source_powers)
        red = reduce(ch)
        bf = mi_beamformer(red, ch.pairing, ch.source_powers, self.noise_power, self.relay_power, self.beta)
        return self._store(ch, red, bf)


class MPRelayBeamformer(_RelayBase):
    """Minimum-power relay beamformer meeting per-destination SINR targets.

    Parameters
    ----------
    sinr_targets : float or array_like
        Linear SINR targets.
    source_powers : float or array_like
    noise_power : float
    tol : float
        Cone-solver duality-gap tolerance.
    solver : ConeSolver, optional
    """

    def __init__(self, sinr_targets=1.0, source_powers=1.0, noise_power=1.0, tol=1e-6, solver=None):
        self.sinr_targets = sinr_targets
        self.source_powers = source_powers
        self.noise_power = noise_power
        self.tol = tol
        self.solver = solver

    def fit(self, H, y=None):
        ch = _channels(H, self.source_powers)
        red = reduce(ch)
        targets = check_positive_vector(self.sinr_targets, ch.num_sources, "sinr_targets", allow_zero=True)
        bf = mp_beamformer(red, ch.pairing, ch.source_powers, self.noise_power, targets,
                           solver=self.solver, tol=self.tol)
        self._store(ch, red, bf)
        self.power_ = self.transmit_power(ch.H)
        return self


class GroupedMIRelayBeamformer(BaseEstimator):
    """MI beamforming over time-division subgroups with the best group count.

    Parameters
    ----------
    relay_power : float
        Linear budget, available in full to every slot.
    candidate_groups : sequence of int, optional
        Subgroup counts to try; every feasible count by default.
    source_powers : float or array_like
    noise_power : float
    """

    def __init__(self, relay_power=10.0, candidate_groups=None, source_powers=1.0, noise_power=1.0):
        self.relay_power = relay_power
        self.candidate_groups = candidate_groups
        self.source_powers = source_powers
        self.noise_power = noise_power

    def fit(self, H, y=None):
        ch = _channels(H, self.source_powers)
        candidates = self.candidate_groups or valid_group_counts(ch.num_sources, ch.num_antennas)
        if not candidates:
            raise ValueError("no subgroup count fits the antenna array")
        self.n_groups_, self.reports_ = select_best(ch, candidates, self.noise_power, self.relay_power)
        self.plan_ = partition(ch.num_sources, self.n_groups_, ch.pairing)
        # one relay matrix per slot, each for the sources of its group
        self.relay_matrices_ = []
        for group in self.plan_.groups:
            sub = ch.subset(group)
            red = reduce(sub)
            bf = mi_beamformer(red, sub.pairing, sub.source_powers, self.noise_power, self.relay_power)
            self.relay_matrices_.append(lift(bf.B, red.U))
        return self

    def predict(self, H):
        """SINR of every source in its own slot."""
        check_is_fitted(self, "relay_matrices_")
        ch = _channels(H, self.source_powers)
        out = np.zeros(ch.num_sources)
        for A, group in zip(self.relay_matrices_, self.plan_.groups):
            sub = ch.subset(group)
            out[list(group)] = sinr_relay_domain(A, sub.H, sub.source_powers, self.noise_power, sub.pairing)
        return out

    def score(self, H, y=None):
        """Sum-rate with the ``1 / N`` time-sharing loss."""
        return float(rates(self.predict(H), self.n_groups_).sum())

    def evaluate(self, H, num_groups):
        """Performance report for a given subgroup count on ``H``."""
        ch = _channels(H, self.source_powers)
        return evaluate_grouping(ch, partition(ch.num_sources, num_groups, ch.pairing), self.noise_power,
                                 self.relay_power)
