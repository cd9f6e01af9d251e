"""SINR, relay power and rate evaluation."""
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_complex_matrix, check_positive_vector
from .channel import PairingMap


def _sinr(T, rows, p, noise_power, partner):
    # T[k, j] = h_k^T X h_j, rows[k] = h_k^T X for X the beamformer in either domain.
    K = T.shape[0]
    terms = np.abs(T) ** 2 * p[None, :]
    idx = np.arange(K)
    signal = terms[idx, partner]
    interference = terms.sum(axis=1) - signal - terms[idx, idx]
    noise = (np.sum(np.abs(rows) ** 2, axis=1) + 1.0) * noise_power
    return signal / (interference + noise)


def _check(B, Ht, powers, pairing):
    K = Ht.shape[1]
    B = check_complex_matrix(B, "B", shape=(Ht.shape[0], Ht.shape[0]))
    if not isinstance(pairing, PairingMap) or pairing.num_sources != K:
        raise ValueError("pairing does not match the number of sources")
    return B, check_positive_vector(powers, K, "powers")


def sinr(B, red, powers, noise_power, pairing):
    """SINR at every destination for the reduced beamformer ``B``.

    ``red`` may be a :class:`~twoway_relay.reduction.ReducedChannels` or the
    effective channel matrix itself. Self-interference and the partner's
    signal are excluded from the interference sum.
    """
    Ht = getattr(red, "Htilde", red)
    Ht = check_complex_matrix(Ht, "Htilde")
    B, p = _check(B, Ht, powers, pairing)
    rows = Ht.T @ B
    return _sinr(rows @ Ht, rows, p, noise_power, pairing.partner)


def sinr_relay_domain(A, H, powers, noise_power, pairing):
    """SINR computed with the full M x M relay matrix and the raw channels."""
    H = check_complex_matrix(H, "H")
    A, p = _check(A, H, powers, pairing)
    rows = H.T @ A
    return _sinr(rows @ H, rows, p, noise_power, pairing.partner)


def _relay_power(B, Ht, p, noise_power):
    BH = B @ Ht
    return float(np.sum((BH.real**2 + BH.imag**2) @ p) + noise_power * np.sum(B.real**2 + B.imag**2))


def relay_power(B, red, powers, noise_power):
    """Relay transmit power ``sum_k p_k ||B h_k||^2 + sigma^2 ||B||_F^2``."""
    Ht = check_complex_matrix(getattr(red, "Htilde", red), "Htilde")
    B = check_complex_matrix(B, "B", shape=(Ht.shape[0], Ht.shape[0]))
    p = check_positive_vector(powers, Ht.shape[1], "powers")
    return _relay_power(B, Ht, p, noise_power)


def relay_power_relay_domain(A, H, powers, noise_power):
    return relay_power(A, H, powers, noise_power)


def rates(gamma, num_groups=1):
    """Per-source rate ``log2(1 + gamma) / (2 N)`` in bits per channel use.

    The factor 1/2 accounts for the two-slot exchange and 1/N for time
    division among N subgroups.
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("SINR must be nonnegative")
    if num_groups < 1:
        raise ValueError("num_groups must be >= 1")
    return np.log2(1.0 + gamma) / (2.0 * num_groups)


def pair_rates(gamma, pairing, num_groups=1):
    """Rate of each pair, taken as the smaller of its two directions."""
    r = rates(gamma, num_groups)
    return np.array([min(r[k], r[j]) for k, j in pairing.pairs()])


@dataclass
class PerformanceReport:
    sinr: np.ndarray
    rates: np.ndarray
    relay_power: float
    scheme: str
    num_groups: int = 1
    flags: list = field(default_factory=list)

    @property
    def sum_rate(self):
        return float(np.sum(self.rates))


def evaluate(beamformer, red, powers, noise_power, pairing, num_groups=1):
    """Build a :class:`PerformanceReport` for one beamformer on one realization."""
    g = sinr(beamformer.B, red, powers, noise_power, pairing)
    flags = ["regularized"] if beamformer.regularized else []
    return PerformanceReport(
        sinr=g,
        rates=rates(g, num_groups),
        relay_power=relay_power(beamformer.B, red, powers, noise_power),
        scheme=beamformer.scheme,
        num_groups=num_groups,
        flags=flags,
    )
