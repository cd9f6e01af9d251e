"""Minimum-power (MP) relay beamformer.

Relay power ``b^H Psi b`` is minimized subject to ``gamma_k >= target_k``.
Each SINR constraint is

    |f_k^T b|^2 >= target_k * (sum_j |d_kj^T b|^2 + sigma^2 ||G_k b||^2 + sigma^2).

Fixing a reference phase ``theta_k`` and requiring
``Re(exp(-1j theta_k) f_k^T b) / sqrt(target_k) >= ||[d_k b; sigma G_k b; sigma]||``
turns it into a second-order cone. Any point meeting the cone meets the
SINR constraint, so the cone program is an inner approximation; it is
tightened by re-solving with ``theta_k = angle(f_k^T b)`` from the previous
solution, which can only lower the power.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_vector
from .exceptions import InfeasibleError, SolverError
from .metrics import _relay_power, sinr
from .mi import _ConstrainedSolver
from .reduction import RelayBeamformer, build_couplings, unvec, vec
from .socp import (
    INFEASIBLE,
    OPTIMAL,
    BarrierSolver,
    Cone,
    complex_form_to_real,
    complex_rows_to_real,
    hermitian_to_real,
)


@dataclass(frozen=True)
class SocpProblem:
    """Data of the MP cone program in the complex domain.

    ``targets[k] == 0`` marks a destination without an SINR constraint.
    """

    Psi: np.ndarray
    signal: np.ndarray
    interference: tuple
    noise: np.ndarray
    sigma: float
    targets: np.ndarray
    couplings: object

    @property
    def active(self):
        return self.targets > 0

    @property
    def psi_sqrt(self):
        """Upper-triangular ``R`` with ``b^H Psi b == ||R b||^2``."""
        return np.linalg.cholesky(self.Psi).conj().T

    def objective(self, b):
        return float(np.real(b.conj() @ self.Psi @ b))

    def cones(self, phases):
        """Real-domain cones for the given reference phases."""
        cones = []
        for k in np.flatnonzero(self.active):
            rows = np.vstack([self.interference[k], self.sigma * self.noise[k]])
            A = complex_rows_to_real(rows)
            A = np.vstack([A, np.zeros((1, A.shape[1]))])
            b = np.zeros(A.shape[0])
            b[-1] = self.sigma
            c = complex_form_to_real(np.exp(-1j * phases[k]) * self.signal[k])
            cones.append(Cone(A=A, b=b, c=c))
        return cones


def assemble_socp(couplings, red, powers, noise_power, targets):
    """Collect objective and cone blocks of the MP problem.

    Parameters
    ----------
    couplings : CouplingSet
    red : ReducedChannels
    powers : array_like
    noise_power : float
    targets : array_like
        Linear SINR targets; zero disables a constraint.
    """
    Ht = red.Htilde
    K = Ht.shape[1]
    p = check_positive_vector(powers, K, "powers")
    gam = check_positive_vector(targets, K, "targets", allow_zero=True)
    outer = np.einsum("k,ak,bk->ab", p, Ht.conj(), Ht)
    Psi = np.kron(outer, np.eye(K)) + noise_power * np.eye(K * K)
    Psi = 0.5 * (Psi + Psi.conj().T)
    scale = np.where(gam > 0, 1.0 / np.sqrt(np.where(gam > 0, gam, 1.0)), 0.0)
    signal = couplings.f * scale[:, None]
    return SocpProblem(
        Psi=Psi,
        signal=signal,
        interference=couplings.d,
        noise=couplings.G,
        sigma=float(np.sqrt(noise_power)),
        targets=gam,
        couplings=couplings,
    )


def _to_real(b):
    return np.concatenate([b.real, b.imag])


def _to_complex(x):
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def _interference_level(problem, b):
    # sum_j |d_kj^T b|^2 + sigma^2 ||G_k b||^2 for every k
    cp = problem.couplings
    inter = np.array([np.sum(np.abs(dk @ b) ** 2) for dk in cp.d])
    noise = np.sum(np.abs(cp.G @ b) ** 2, axis=1)
    return inter + problem.sigma**2 * noise


def initial_point(problem):
    """Strictly feasible start built from the MI direction, or ``None``.

    The MI weights with gains ``sqrt(target)`` have real positive desired
    terms; scaling them up meets every target whose interference-limited
    SINR exceeds it.
    """
    gam = problem.targets
    cp = problem.couplings
    try:
        solver = _ConstrainedSolver(cp)
        b = solver.weights(np.sqrt(gam))
    except Exception:
        return None
    level = _interference_level(problem, b)[problem.active]
    margin = 1.0 - level
    if np.any(margin <= 0):
        return b
    alpha = 1.5 * np.sqrt(np.max(problem.sigma**2 / margin))
    return alpha * b


def solve_mp(problem, solver=None, tol=1e-6, phases=None, b0=None, max_phase_iter=5, phase_rtol=1e-5):
    """Solve the MP cone program.

    Parameters
    ----------
    problem : SocpProblem
    solver : ConeSolver, optional
        Defaults to :class:`~twoway_relay.socp.BarrierSolver` with ``tol``.
    tol : float
        Duality-gap tolerance handed to the default solver.
    phases : array_like, optional
        Initial reference phases; zeros by default.
    b0 : array_like, optional
        Starting point; by default derived from the MI direction.
    max_phase_iter : int
        Number of cone programs solved while refining the phases.

    Returns
    -------
    numpy.ndarray
        The weight vector ``b``.

    Raises
    ------
    InfeasibleError
        If the first cone program is infeasible.
    SolverError
        If the solver stalls or its output violates an SINR target.
    """
    solver = BarrierSolver(tol=tol) if solver is None else solver
    K = problem.targets.size
    if not np.any(problem.active):
        return np.zeros(K * K, dtype=complex)
    Q = hermitian_to_real(problem.Psi)
    phases = np.zeros(K) if phases is None else np.asarray(phases, dtype=float)
    b_start = initial_point(problem) if b0 is None else np.asarray(b0, dtype=complex)
    best, best_power = None, np.inf
    for it in range(max_phase_iter):
        x0 = None if b_start is None else _to_real(b_start)
        res = solver.solve(Q, None, problem.cones(phases), x0=x0)
        if res.status == INFEASIBLE:
            if best is None:
                raise InfeasibleError("SINR targets cannot be met")
            break
        if res.status != OPTIMAL:
            if best is None:
                raise SolverError(f"cone solver stopped with status {res.status!r}")
            break
        b = _to_complex(res.x)
        power = problem.objective(b)
        improved = best_power - power
        if power < best_power:
            best, best_power = b, power
        if improved <= phase_rtol * power:
            break
        phases = np.angle(problem.signal @ b)
        # the previous optimum sits on the new cones' boundary; a slight
        # scale-up makes it strictly interior
        b_start = 1.01 * b
    best = _shrink_to_targets(problem, best)
    _check_targets(problem, best, tol)
    return best


def _shrink_to_targets(problem, b):
    # SINR(a b) = a^2 S / (a^2 L + sigma^2) grows with a, so the smallest a
    # meeting every target makes one constraint active and lowers the power
    act = problem.active
    gain = np.abs(problem.couplings.f @ b)[act] ** 2
    level = _interference_level(problem, b)[act]
    margin = gain - problem.targets[act] * level
    if np.any(margin <= 0):
        return b
    a = np.sqrt(np.max(problem.targets[act] * problem.sigma**2 / margin))
    return b * a if a < 1.0 else b


def _check_targets(problem, b, tol):
    cp = problem.couplings
    gain = np.abs(cp.f @ b) ** 2
    achieved = gain / (_interference_level(problem, b) + problem.sigma**2)
    need = problem.targets * (1.0 - 10.0 * tol)
    bad = problem.active & (achieved < need)
    if np.any(bad):
        raise SolverError(f"SINR targets violated at {np.flatnonzero(bad).tolist()}")


def mp_beamformer(red, pairing, powers, noise_power, targets, solver=None, tol=1e-6, **kwargs):
    """MP beamformer meeting ``targets`` (linear SINRs) with least relay power."""
    couplings = build_couplings(red, powers, pairing, noise_power)
    problem = assemble_socp(couplings, red, powers, noise_power, targets)
    b = solve_mp(problem, solver=solver, tol=tol, **kwargs)
    return RelayBeamformer(B=unvec(b, red.num_sources), alpha=1.0, scheme="MP")


def mp_power(red, pairing, powers, noise_power, targets, **kwargs):
    bf = mp_beamformer(red, pairing, powers, noise_power, targets, **kwargs)
    p = check_positive_vector(powers, red.num_sources, "powers")
    return _relay_power(bf.B, red.Htilde, p, noise_power)


def mp_beamformer_on_ray(red, pairing, powers, noise_power, target_power, direction, s_start=None,
                         solver=None, tol=1e-6, rtol=1e-4, max_iter=50, max_phase_iter=1):
    """Largest ``s`` such that targets ``s * direction`` are met within ``target_power``.

    Starting from a feasible ``s``, the MP beamformer for ``s * direction``
    is scaled up to the full budget, which raises every SINR; the smallest
    achieved ``gamma_k / direction_k`` becomes the next ``s``. The sequence
    increases monotonically and stops where the MP power equals the budget.
    The cone phases are carried from one step to the next, so phase
    refinement happens along the way rather than in an inner loop.

    Returns
    -------
    beamformer : RelayBeamformer
        Full-power beamformer reaching ``s * direction``.
    s : float
    """
    K = red.num_sources
    p = check_positive_vector(powers, K, "powers")
    w = check_positive_vector(direction, K, "direction", allow_zero=True)
    active = w > 0
    couplings = build_couplings(red, p, pairing, noise_power)
    Ht = red.Htilde

    def scaled_up(B):
        B = B * np.sqrt(target_power / _relay_power(B, Ht, p, noise_power))
        ratio = sinr(B, red, p, noise_power, pairing)[active] / w[active]
        return B, float(ratio.min())

    if s_start is None:
        # equal-gain MI direction gives a feasible starting point
        solver_mi = _ConstrainedSolver(couplings)
        B, s = scaled_up(unvec(solver_mi.weights(np.sqrt(w)), K))
    else:
        B, s = None, float(s_start)
    phases, b0 = None, None
    for _ in range(max_iter):
        problem = assemble_socp(couplings, red, p, noise_power, s * w)
        b = solve_mp(problem, solver=solver, tol=tol, phases=phases, b0=b0, max_phase_iter=max_phase_iter)
        B_next, s_next = scaled_up(unvec(b, K))
        if B is not None and s_next < s:
            break
        B, converged = B_next, s_next <= s * (1.0 + rtol)
        s = s_next
        if converged:
            break
        phases = np.angle(problem.signal @ b)
        b0 = 1.01 * vec(B)
    return RelayBeamformer(B=B, alpha=1.0, scheme="MP"), s
