"""Scenario configuration and random channel realizations.

Sources are indexed from 0 inside the library; source ``2i`` and ``2i + 1``
form pair ``i`` under the default pairing.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_complex_matrix, check_positive_vector
from .exceptions import ConfigError


def db_to_linear(x_db):
    """Convert a power in dB to linear scale."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class PairingMap:
    """Fixed-point-free involution on ``range(K)``: ``partner[k]`` exchanges with ``k``."""

    partner: np.ndarray

    def __post_init__(self):
        partner = np.asarray(self.partner, dtype=int)
        k = partner.size
        if partner.ndim != 1 or k < 2 or k % 2:
            raise ValueError(f"pairing must cover an even number >= 2 of sources, got {k}")
        idx = np.arange(k)
        if np.any((partner < 0) | (partner >= k)):
            raise ValueError("partner indices out of range")
        if np.any(partner[partner] != idx) or np.any(partner == idx):
            raise ValueError("pairing must be an involution without fixed points")
        partner.setflags(write=False)
        object.__setattr__(self, "partner", partner)

    @property
    def num_sources(self):
        return self.partner.size

    def pairs(self):
        """Return the pairs as ``(k, partner[k])`` with ``k < partner[k]``, in order of ``k``."""
        return [(k, int(p)) for k, p in enumerate(self.partner) if k < p]

    def interferers(self, k):
        """Sources other than ``k`` and its partner."""
        return [j for j in range(self.num_sources) if j != k and j != self.partner[k]]

    def __eq__(self, other):
        return isinstance(other, PairingMap) and np.array_equal(self.partner, other.partner)

    def __hash__(self):
        return hash(self.partner.tobytes())


def make_pairing(K):
    """Adjacent pairing: sources (0, 1), (2, 3), ... exchange with each other."""
    if not isinstance(K, (int, np.integer)) or K < 2 or K % 2:
        raise ValueError(f"K must be an even integer >= 2, got {K!r}")
    return PairingMap(np.arange(K) ^ 1)


@dataclass(frozen=True)
class ChannelSet:
    """Uplink channels of one realization.

    The downlink channel of source ``k`` is ``H[:, k].T`` by reciprocity, so
    it is never stored separately.
    """

    H: np.ndarray
    pairing: PairingMap
    source_powers: np.ndarray

    def __post_init__(self):
        H = check_complex_matrix(self.H, "H")
        K = H.shape[1]
        if K % 2:
            raise ValueError(f"number of sources must be even, got {K}")
        if self.pairing.num_sources != K:
            raise ValueError("pairing size does not match the number of channel columns")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "source_powers", check_positive_vector(self.source_powers, K, "source_powers"))

    @property
    def num_sources(self):
        return self.H.shape[1]

    @property
    def num_antennas(self):
        return self.H.shape[0]

    def subset(self, sources):
        """Channels of ``sources`` only, re-paired adjacently in the given order."""
        sources = list(sources)
        return ChannelSet(self.H[:, sources], make_pairing(len(sources)), self.source_powers[sources])


def complex_normal(rng, shape):
    """CN(0, 1) samples: real and imaginary parts i.i.d. N(0, 1/2)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def draw_channels(K, M, rho, rng, source_powers=1.0):
    """Draw one uplink channel matrix.

    Each column is ``sqrt(1 - r) g_k + sqrt(r) g_0`` with ``g_0`` shared by
    all sources and ``r = sqrt(rho)``. Every entry stays CN(0, 1) and
    entries of the same antenna row have correlation coefficient
    ``r = sqrt(rho)`` across sources, so ``|r|^2 = rho``.

    Parameters
    ----------
    K : int
        Number of sources (even).
    M : int
        Relay antennas, at least ``K - 1``.
    rho : float
        Correlation knob in ``[0, 1)``.
    rng : numpy.random.Generator
    source_powers : float or array_like
        Linear transmit powers stored with the realization.
    """
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    pairing = make_pairing(K)
    if M < K - 1:
        raise ValueError(f"need M >= K - 1 antennas, got M={M}, K={K}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    H = complex_normal(rng, (M, K))
    if rho > 0:
        common = complex_normal(rng, (M, 1))
        r = np.sqrt(rho)
        H = np.sqrt(1.0 - r) * H + np.sqrt(r) * common
    return ChannelSet(H, pairing, np.broadcast_to(np.asarray(source_powers, float), (K,)).copy())


def trial_rng(seed, trial, attempt=0):
    """Generator for Monte-Carlo trial ``trial``; seeded ``seed XOR trial``.

    Resampling after a degenerate draw uses ``attempt > 0`` as a second
    entropy word so the sub-seed never collides with another trial.
    """
    base = (int(seed) ^ int(trial)) & 0xFFFFFFFFFFFFFFFF
    if attempt == 0:
        return np.random.default_rng(base)
    return np.random.default_rng([base, int(attempt)])


@dataclass(frozen=True)
class ScenarioConfig:
    """All parameters of one experiment. Powers are in dB relative to the noise floor."""

    num_sources_total: int
    antennas: int
    source_powers_db: tuple
    relay_power_db: float
    noise_power: float = 1.0
    correlation: float = 0.0
    seed: int = 0
    trials: int = 1
    sinr_targets_db: tuple | None = None
    beta: tuple | None = None
    subgroups: tuple | None = None
    snr_grid_db: tuple | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        kt = self.num_sources_total
        if not isinstance(kt, int) or kt < 2 or kt % 2:
            raise ConfigError("K_T", f"must be an even integer >= 2, got {kt!r}")
        if not isinstance(self.antennas, int) or self.antennas < 1:
            raise ConfigError("M", f"must be a positive integer, got {self.antennas!r}")
        p = tuple(float(v) for v in np.atleast_1d(self.source_powers_db))
        if len(p) == 1:
            p = p * kt
        if len(p) != kt or not all(np.isfinite(p)):
            raise ConfigError("p_source_db", f"needs 1 or {kt} finite values, got {len(p)}")
        object.__setattr__(self, "source_powers_db", p)
        if not np.isfinite(self.relay_power_db):
            raise ConfigError("p_relay_db", "must be finite")
        if not (np.isfinite(self.noise_power) and self.noise_power > 0):
            raise ConfigError("sigma2", f"must be positive, got {self.noise_power}")
        if not 0.0 <= self.correlation < 1.0:
            raise ConfigError("rho", f"must lie in [0, 1), got {self.correlation}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials", f"must be a positive integer, got {self.trials!r}")
        for key, values in (("sinr_targets_db", self.sinr_targets_db), ("beta", self.beta)):
            if values is not None and len(values) not in (1, kt // 2):
                raise ConfigError(key, f"needs 1 or {kt // 2} per-pair values, got {len(values)}")
        if self.sinr_targets_db is not None and not all(np.isfinite(self.sinr_targets_db)):
            raise ConfigError("sinr_targets_db", "entries must be finite")
        if self.beta is not None and any(not b > 0 for b in self.beta):
            raise ConfigError("beta", "entries must be positive")
        groups = self.subgroups if self.subgroups is not None else (1,)
        for n in groups:
            if n < 1 or kt % n or (kt // n) % 2:
                raise ConfigError("subgroups", f"N={n} does not split K_T={kt} into even groups")
            if self.antennas < kt // n - 1:
                raise ConfigError("M", f"M={self.antennas} < K-1 for group size {kt // n}")

    @property
    def source_powers(self):
        return db_to_linear(np.array(self.source_powers_db))

    @property
    def relay_power(self):
        return db_to_linear(self.relay_power_db)

    def _per_source(self, per_pair):
        # pair i covers sources 2i and 2i+1
        values = np.broadcast_to(np.asarray(per_pair, dtype=float), (self.num_sources_total // 2,))
        return np.repeat(values, 2)

    @property
    def sinr_targets(self):
        """Linear SINR target of every destination, or ``None``."""
        if self.sinr_targets_db is None:
            return None
        return self._per_source(db_to_linear(np.array(self.sinr_targets_db)))

    @property
    def gains(self):
        """Desired gain of every destination, or ``None``."""
        return None if self.beta is None else self._per_source(self.beta)


_REQUIRED = ("K_T", "M", "p_source_db", "p_relay_db", "rho", "seed", "trials")
_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


def _floats(key, text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {text!r}") from None


def _int(key, text):
    try:
        value = int(text, 0)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None
    return value


def parse_config(text):
    """Parse ``key = value`` lines (``#`` starts a comment) into a :class:`ScenarioConfig`."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if m is None:
            raise ConfigError(f"line {lineno}", f"cannot parse {line.strip()!r}")
        raw[m.group(1)] = m.group(2)
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ConfigError(missing[0], "required key is missing")

    def scalar(key):
        vals = _floats(key, raw[key])
        if len(vals) != 1:
            raise ConfigError(key, "expected a single number")
        return vals[0]

    kwargs = dict(
        num_sources_total=_int("K_T", raw.pop("K_T")),
        antennas=_int("M", raw.pop("M")),
        source_powers_db=_floats("p_source_db", raw.pop("p_source_db")),
        relay_power_db=scalar("p_relay_db"),
        correlation=scalar("rho"),
        seed=_int("seed", raw.pop("seed")),
        trials=_int("trials", raw.pop("trials")),
    )
    raw.pop("p_relay_db")
    raw.pop("rho")
    if "sigma2" in raw:
        kwargs["noise_power"] = scalar("sigma2")
        raw.pop("sigma2")
    for key, name in (("sinr_targets_db", "sinr_targets_db"), ("beta", "beta"), ("snr_db", "snr_grid_db")):
        if key in raw:
            kwargs[name] = _floats(key, raw.pop(key))
    if "subgroups" in raw:
        text = raw.pop("subgroups")
        kwargs["subgroups"] = tuple(_int("subgroups", v.strip()) for v in text.split(",") if v.strip())
    kwargs["extra"] = raw
    return ScenarioConfig(**kwargs)


def load_config(path):
    """Read a scenario configuration file."""
    return parse_config(Path(path).read_text())
