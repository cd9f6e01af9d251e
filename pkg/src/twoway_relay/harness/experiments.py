"""Rate-region and sum-rate experiment drivers with CSV output."""
import csv
import io
from dataclasses import dataclass

import numpy as np

from ..channel import db_to_linear, draw_channels
from ..exceptions import ConfigError
from ..grouping import partition, sum_rates_over_powers, valid_group_counts
from ..region import MI, MP, RegionPoint, beta_sweep_trial, ray_angles, region_trial
from .montecarlo import run_monte_carlo

DEFAULT_SNR_GRID_DB = tuple(np.arange(-5.0, 25.0 + 1e-9, 2.5))
REGION_COLUMNS = ("scheme", "sweep_param", "rate_pair1", "rate_pair2", "trials", "stderr1", "stderr2")
SUMRATE_COLUMNS = ("snr_db", "N", "sum_rate", "stderr")


def fmt(x):
    """Numbers are written with 9 significant digits."""
    if isinstance(x, (int, np.integer)) or isinstance(x, str):
        return str(x)
    return f"{float(x):.9g}"


def _drawer(config, K):
    powers = config.source_powers[:K]

    def draw(rng):
        return draw_channels(K, config.antennas, config.correlation, rng, powers)

    return draw


def region_group_size(config):
    """Rate regions need four sources: K_T = 4, or subgroups splitting K_T into fours."""
    if config.num_sources_total == 4:
        return 4
    if config.subgroups and config.num_sources_total // config.subgroups[0] == 4:
        return 4
    raise ConfigError("K_T", f"rate region needs 4 sources per group, got K_T={config.num_sources_total}")


def rate_region(config, num_points=9, schemes=(MI, MP), mi_sweep="ray", workers=1, mp_options=None):
    """Monte-Carlo averaged boundary points of the two-pair rate region.

    With ``mi_sweep="ray"`` both schemes share the ray angle as sweep
    parameter. ``mi_sweep="beta"`` instead sweeps MI over gain splits
    ``(t, 1 - t)`` between the pairs.

    Returns
    -------
    list of RegionPoint
    """
    K = region_group_size(config)
    schemes = tuple(schemes)
    angles = ray_angles(num_points)
    ts = np.linspace(0.0, 1.0, num_points)
    ray_schemes = schemes if mi_sweep == "ray" else tuple(s for s in schemes if s != MI)
    beta_mi = mi_sweep == "beta" and MI in schemes
    if mi_sweep not in ("ray", "beta"):
        raise ValueError(f"mi_sweep must be 'ray' or 'beta', got {mi_sweep!r}")
    sigma2, budget = config.noise_power, config.relay_power

    def evaluate(channels):
        parts = []
        if ray_schemes:
            parts.append(region_trial(channels, sigma2, budget, angles, ray_schemes, mp_options).ravel())
        if beta_mi:
            parts.append(beta_sweep_trial(channels, sigma2, budget, ts).ravel())
        return np.concatenate(parts)

    res = run_monte_carlo(config.seed, config.trials, _drawer(config, K), evaluate, workers=workers)
    mean, err = res.mean, res.stderr
    n_ray = len(ray_schemes) * num_points * 2
    points = []
    ray_mean = mean[:n_ray].reshape(len(ray_schemes), num_points, 2)
    ray_err = err[:n_ray].reshape(len(ray_schemes), num_points, 2)
    for i, scheme in enumerate(ray_schemes):
        for a, theta in enumerate(angles):
            points.append(RegionPoint(scheme, float(theta), *ray_mean[i, a], res.trials, *ray_err[i, a]))
    if beta_mi:
        bm = mean[n_ray:].reshape(num_points, 2)
        be = err[n_ray:].reshape(num_points, 2)
        for a, t in enumerate(ts):
            points.append(RegionPoint(MI, float(t), *bm[a], res.trials, *be[a]))
    order = {s: i for i, s in enumerate(schemes)}
    points.sort(key=lambda p: order[p.scheme])
    return points


def write_region_csv(points, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REGION_COLUMNS)
    for p in points:
        writer.writerow([p.scheme, fmt(p.sweep_param), fmt(p.rate_pair1), fmt(p.rate_pair2),
                         str(p.trials), fmt(p.stderr1), fmt(p.stderr2)])


@dataclass(frozen=True)
class SumRateRow:
    snr_db: float
    N: object
    sum_rate: float
    stderr: float


def sumrate_sweep(config, snr_grid_db=None, groups=None, workers=1):
    """Trial-averaged sum-rate per SNR for each subgroup count, plus the per-realization best.

    The SNR is the relay power over the noise power. Returns a list of
    :class:`SumRateRow` with ``N == "best"`` for the envelope, together with
    the raw :class:`MonteCarloResult` whose samples have shape
    ``(trials, len(snr_grid), len(groups) + 1)``.
    """
    K_T, M = config.num_sources_total, config.antennas
    snr_grid = tuple(snr_grid_db or config.snr_grid_db or DEFAULT_SNR_GRID_DB)
    groups = sorted(groups or config.subgroups or valid_group_counts(K_T, M))
    for n in groups:
        if K_T % n or (K_T // n) % 2 or M < K_T // n - 1:
            raise ConfigError("subgroups", f"N={n} is not valid for K_T={K_T}, M={M}")
    relay_powers = config.noise_power * db_to_linear(np.array(snr_grid))
    sigma2, gains = config.noise_power, config.gains

    def evaluate(channels):
        table = np.empty((len(snr_grid), len(groups) + 1))
        for j, n in enumerate(groups):
            plan = partition(K_T, n, channels.pairing)
            table[:, j] = sum_rates_over_powers(channels, plan, sigma2, relay_powers, gains)
        table[:, -1] = table[:, :-1].max(axis=1)
        return table

    res = run_monte_carlo(config.seed, config.trials, _drawer(config, K_T), evaluate, workers=workers)
    mean, err = res.mean, res.stderr
    rows = []
    for i, snr in enumerate(snr_grid):
        for j, n in enumerate(list(groups) + ["best"]):
            rows.append(SumRateRow(float(snr), n, float(mean[i, j]), float(err[i, j])))
    return rows, res


def write_sumrate_csv(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SUMRATE_COLUMNS)
    for r in rows:
        writer.writerow([fmt(r.snr_db), str(r.N), fmt(r.sum_rate), fmt(r.stderr)])


def to_csv_text(writer, items):
    buf = io.StringIO()
    writer(items, buf)
    return buf.getvalue()
