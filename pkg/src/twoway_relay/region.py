"""Rate-region boundaries for two source pairs.

Both schemes are swept over the same rays in SINR space: destinations of
pair 1 ask for ``s cos(theta)``, those of pair 2 for ``s sin(theta)``, so
both sources of a pair share one requirement. For every ray the largest
``s`` reachable within the relay budget gives one boundary point per scheme.
MI reaches the ray by adjusting its gains; MP by minimizing power for
growing targets.
"""
from dataclasses import dataclass

import numpy as np

from .metrics import pair_rates, rates, sinr
from .mi import mi_beamformer, mi_beamformer_on_ray
from .mp import mp_beamformer_on_ray
from .reduction import reduce

MI = "MI"
MP = "MP"


@dataclass(frozen=True)
class RegionPoint:
    scheme: str
    sweep_param: float
    rate_pair1: float
    rate_pair2: float
    trials: int
    stderr1: float
    stderr2: float


def ray_angles(num_points):
    """``num_points`` angles from 0 to pi/2, endpoints included."""
    if num_points < 2:
        raise ValueError("need at least two sweep points")
    return np.linspace(0.0, 0.5 * np.pi, num_points)


def ray_direction(theta, pairing):
    """Per-destination SINR weights for angle ``theta``; exact zeros at the endpoints."""
    c, s = np.cos(theta), np.sin(theta)
    c = 0.0 if abs(c) < 1e-12 else c
    s = 0.0 if abs(s) < 1e-12 else s
    pairs = pairing.pairs()
    if len(pairs) != 2:
        raise ValueError("rate regions are defined for exactly two pairs")
    w = np.zeros(pairing.num_sources)
    w[list(pairs[0])] = c
    w[list(pairs[1])] = s
    return w


def _pair_weights(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([0.0 if abs(c) < 1e-12 else c, 0.0 if abs(s) < 1e-12 else s])


def region_trial(channels, noise_power, relay_power, angles, schemes=(MI, MP), mp_options=None):
    """Boundary pair-rates of one realization.

    Returns
    -------
    numpy.ndarray
        Shape ``(len(schemes), len(angles), 2)``.
    """
    red = reduce(channels)
    p = channels.source_powers
    out = np.zeros((len(schemes), len(angles), 2))
    for a, theta in enumerate(angles):
        w = ray_direction(theta, channels.pairing)
        pw = _pair_weights(theta)
        s_mi = None
        for i, scheme in enumerate(schemes):
            if scheme == MI:
                _, s_mi = mi_beamformer_on_ray(red, channels.pairing, p, noise_power, relay_power, w)
                out[i, a] = rates(s_mi * pw)
            elif scheme == MP:
                _, s = mp_beamformer_on_ray(red, channels.pairing, p, noise_power, relay_power, w,
                                            s_start=s_mi, **(mp_options or {}))
                out[i, a] = rates(s * pw)
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
    return out


def beta_sweep_trial(channels, noise_power, relay_power, ts):
    """MI pair-rates when pair 1 gets gain ``t`` and pair 2 gain ``1 - t``.

    Each pair's rate is the smaller of its two directions. Shape ``(len(ts), 2)``.
    """
    red = reduce(channels)
    p = channels.source_powers
    pairs = channels.pairing.pairs()
    out = np.zeros((len(ts), 2))
    for a, t in enumerate(ts):
        beta = np.zeros(channels.num_sources)
        beta[list(pairs[0])] = t
        beta[list(pairs[1])] = 1.0 - t
        bf = mi_beamformer(red, channels.pairing, p, noise_power, relay_power, beta)
        out[a] = pair_rates(sinr(bf.B, red, p, noise_power, channels.pairing), channels.pairing)
    return out


def pareto_nondominated(points):
    """Mask of points not strictly dominated by another point of the set."""
    pts = np.asarray(points, dtype=float)
    keep = np.ones(len(pts), dtype=bool)
    for i, x in enumerate(pts):
        dominated = np.all(pts >= x, axis=1) & np.any(pts > x, axis=1)
        keep[i] = not np.any(dominated)
    return keep
