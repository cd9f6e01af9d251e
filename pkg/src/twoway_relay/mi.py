"""Minimum-interference (MI) relay beamformer.

The MI beamformer minimizes inter-pair interference plus amplified relay
noise, ``b^H Phi b``, subject to fixed desired gains ``C^H b = g``. This is
a linearly constrained minimum-variance problem with the closed form
``Phi^-1 C (C^H Phi^-1 C)^-1 g``. The result is then scaled to the relay
power budget.
"""
import numpy as np
from scipy import linalg

from ._validation import check_positive_scalar, check_positive_vector
from .exceptions import ConsistencyError, DegenerateChannelError
from .metrics import _relay_power, relay_power, sinr
from .reduction import RelayBeamformer, build_couplings, unvec

RIDGE = 1e-12
RESIDUAL_TOL = 1e-6


class _ConstrainedSolver:
    """Factorizations of ``Phi`` and ``C^H Phi^-1 C`` reused across gain vectors."""

    def __init__(self, couplings):
        Phi, C = couplings.Phi, couplings.C
        n = Phi.shape[0]
        self.C = C
        self.regularized = False
        try:
            factor = linalg.cho_factor(Phi, lower=True)
        except linalg.LinAlgError:
            factor = None
        scale = np.trace(Phi).real / n
        if factor is None or np.min(np.abs(np.diag(factor[0]))) ** 2 < RIDGE * scale:
            factor = linalg.cho_factor(Phi + RIDGE * max(scale, 1.0) * np.eye(n), lower=True)
            self.regularized = True
        self.PiC = linalg.cho_solve(factor, C)
        gram = C.conj().T @ self.PiC
        try:
            self.gram = linalg.cho_factor(0.5 * (gram + gram.conj().T), lower=True)
        except linalg.LinAlgError as exc:
            raise DegenerateChannelError("constraint matrix is rank deficient") from exc

    def weights(self, g):
        b = self.PiC @ linalg.cho_solve(self.gram, g)
        residual = np.linalg.norm(self.C.conj().T @ b - g)
        if not np.isfinite(residual) or residual > RESIDUAL_TOL * max(np.linalg.norm(g), 1.0):
            raise DegenerateChannelError(f"gain constraints violated after solve (residual {residual:.3g})")
        return b


def _solve_mi(couplings):
    solver = _ConstrainedSolver(couplings)
    return solver.weights(couplings.g), solver.regularized


def solve_mi(couplings):
    """Closed-form MI weight vector ``b`` for the given coupling set.

    Raises
    ------
    DegenerateChannelError
        If the constraints cannot be met, e.g. when ``C`` loses column rank.
    """
    return _solve_mi(couplings)[0]


def scale_bisection(B, red, powers, noise_power, target_power, delta_alpha=1e-6, alpha_max=None):
    """Scale factor for ``B`` meeting ``target_power``, found by bisection.

    Returns the lower end of the final bracket, so the scaled beamformer
    never exceeds the budget. Relay power is quadratic in the scale, so the
    result is checked against ``sqrt(target_power / p_R(B))``.

    Raises
    ------
    ValueError
        If ``alpha_max`` does not bracket the solution.
    ConsistencyError
        If bisection and the closed form disagree by more than ``delta_alpha``.
    """
    target_power = check_positive_scalar(target_power, "target_power")
    base = relay_power(B, red, powers, noise_power)
    if base <= 0:
        raise ValueError("cannot scale a zero beamformer")
    Ht = red.Htilde
    p = check_positive_vector(powers, Ht.shape[1], "powers")
    alpha_cf = np.sqrt(target_power / base)
    if alpha_max is None:
        alpha_max = 2.0 * alpha_cf
    if _relay_power(alpha_max * B, Ht, p, noise_power) < target_power:
        raise ValueError(f"alpha_max={alpha_max:.6g} too small; use at least {2.0 * alpha_cf:.6g}")
    lower, upper = 0.0, float(alpha_max)
    while upper - lower > delta_alpha:
        alpha = 0.5 * (lower + upper)
        if _relay_power(alpha * B, Ht, p, noise_power) < target_power:
            lower = alpha
        else:
            upper = alpha
    if abs(lower - alpha_cf) > delta_alpha:
        raise ConsistencyError(f"bisection alpha {lower!r} differs from closed form {alpha_cf!r}")
    return lower


def mi_beamformer(red, pairing, powers, noise_power, target_power, beta=None, delta_alpha=None):
    """MI beamformer scaled to the relay power budget.

    Parameters
    ----------
    red : ReducedChannels
    pairing : PairingMap
    powers : array_like
        Linear source powers.
    noise_power : float
    target_power : float
        Linear relay power budget.
    beta : array_like, optional
        Desired gain per destination (all ones by default).
    delta_alpha : float, optional
        Bisection tolerance; defaults to ``1e-9`` times the closed-form scale
        so the achieved power matches the budget to well below ``1e-6``.

    Returns
    -------
    RelayBeamformer
    """
    couplings = build_couplings(red, powers, pairing, noise_power, beta)
    b, regularized = _solve_mi(couplings)
    B = unvec(b, red.num_sources)
    if delta_alpha is None:
        delta_alpha = 1e-9 * np.sqrt(target_power / relay_power(B, red, powers, noise_power))
    alpha = scale_bisection(B, red, powers, noise_power, target_power, delta_alpha)
    return RelayBeamformer(B=alpha * B, alpha=alpha, scheme="MI", regularized=regularized)


def mi_beamformer_on_ray(red, pairing, powers, noise_power, target_power, direction, rtol=1e-6, max_iter=200):
    """MI beamformer whose SINRs are proportional to ``direction``.

    The gains ``beta`` are adjusted multiplicatively until the achieved
    SINRs, after scaling to full power, all equal ``s * direction`` for a
    common ``s``. Entries of ``direction`` equal to zero get zero gain.

    Returns
    -------
    beamformer : RelayBeamformer
    s : float
        The common scale reached, ``min_k gamma_k / direction_k``.
    """
    K = red.num_sources
    w = check_positive_vector(direction, K, "direction", allow_zero=True)
    active = w > 0
    if not np.any(active):
        raise ValueError("direction must have a positive entry")
    p = check_positive_vector(powers, K, "powers")
    solver = _ConstrainedSolver(build_couplings(red, p, pairing, noise_power))
    Ht = red.Htilde
    beta = np.where(active, np.sqrt(w), 0.0)
    for _ in range(max_iter):
        beta /= beta.max()
        B = unvec(solver.weights(beta), K)
        B *= np.sqrt(target_power / _relay_power(B, Ht, p, noise_power))
        ratio = sinr(B, red, p, noise_power, pairing)[active] / w[active]
        s = ratio.min()
        if ratio.max() - s <= rtol * s:
            break
        beta[active] *= (np.exp(np.mean(np.log(ratio))) / ratio) ** 0.5
    bf = mi_beamformer(red, pairing, p, noise_power, target_power, beta)
    ratio = sinr(bf.B, red, p, noise_power, pairing)[active] / w[active]
    return bf, float(ratio.min())
