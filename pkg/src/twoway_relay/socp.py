"""Small dense second-order cone programs.

Problems have the form::

    minimize    x^T Q x + q^T x
    subject to  ||A_i x + b_i|| <= c_i^T x + d_i,   i = 1..m

over real ``x``. :class:`BarrierSolver` is a log-barrier interior-point
method with Newton centering and backtracking; it is sized for a few hundred
variables at most. Any object with the same ``solve`` signature can be used
in its place, e.g. :class:`CvxpySolver`.
"""
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy import linalg

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"


@dataclass(frozen=True)
class Cone:
    """Constraint ``||A x + b|| <= c @ x + d``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float = 0.0


@dataclass
class SocpResult:
    x: np.ndarray
    status: str
    objective: float
    iterations: int
    gap: float


class ConeSolver(Protocol):
    def solve(self, Q, q, cones, x0=None) -> SocpResult: ...


def complex_rows_to_real(rows):
    """Real matrix mapping ``[Re z; Im z]`` to ``[Re(rows @ z); Im(rows @ z)]``."""
    rows = np.atleast_2d(rows)
    re, im = rows.real, rows.imag
    return np.block([[re, -im], [im, re]])


def complex_form_to_real(a):
    """Real vector ``c`` with ``c @ [Re z; Im z] == Re(a @ z)``."""
    a = np.asarray(a)
    return np.concatenate([a.real, -a.imag])


def hermitian_to_real(P):
    """Real symmetric ``Q`` with ``[Re z; Im z]^T Q [Re z; Im z] == z^H P z``."""
    re, im = P.real, P.imag
    return np.block([[re, -im], [im, re]])


class _Stacked:
    """All cones stacked row-wise so residuals are evaluated in one product."""

    def __init__(self, cones, n):
        self.m = len(cones)
        sizes = [np.atleast_1d(c.b).size for c in cones]
        self.A = np.vstack([np.atleast_2d(c.A).reshape(-1, n) for c in cones]) if cones else np.zeros((0, n))
        self.b = np.concatenate([np.atleast_1d(c.b) for c in cones]) if cones else np.zeros(0)
        self.C = np.array([c.c for c in cones]).reshape(self.m, n)
        self.d = np.array([c.d for c in cones], dtype=float)
        # S[i, r] = 1 when row r of the stacked A belongs to cone i
        self.S = np.zeros((self.m, sum(sizes)))
        self.S[np.repeat(np.arange(self.m), sizes), np.arange(sum(sizes))] = 1.0

    def with_slack_column(self):
        """Copy with an extra variable ``tau`` added to every right-hand side."""
        ext = object.__new__(_Stacked)
        ext.m, ext.S, ext.b, ext.d = self.m, self.S, self.b, self.d
        ext.A = np.hstack([self.A, np.zeros((self.A.shape[0], 1))])
        ext.C = np.hstack([self.C, np.ones((self.m, 1))])
        return ext

    def parts(self, x):
        u = self.A @ x + self.b
        s = self.C @ x + self.d
        return u, s, s**2 - self.S @ (u * u)

    def slack(self, x):
        if not self.m:
            return np.inf
        u, s, _ = self.parts(x)
        return float(np.min(s - np.sqrt(self.S @ (u * u))))

    def barrier(self, x):
        _, s, w = self.parts(x)
        if s.min(initial=1.0) <= 0 or w.min(initial=1.0) <= 0:
            return np.inf
        return -float(np.log(w).sum())

    def derivatives(self, x):
        u, s, w = self.parts(x)
        # grad w_i = 2 s_i c_i - 2 A_i^T u_i
        gw = 2.0 * (s[:, None] * self.C - self.S @ (self.A * u[:, None]))
        gw /= w[:, None]
        grad = -gw.sum(axis=0)
        inv_row = (self.S.T @ (2.0 / w))[:, None]
        hess = (self.A * inv_row).T @ self.A - (self.C * (2.0 / w)[:, None]).T @ self.C + gw.T @ gw
        return grad, hess


class BarrierSolver:
    """Log-barrier interior-point method.

    Parameters
    ----------
    tol : float
        Target duality gap, relative to ``max(1, |objective|)``.
    mu : float
        Barrier parameter growth per outer iteration.
    max_newton : int
        Cap on the total number of Newton steps (both phases).
    max_center : int
        Newton steps per centering pass; a pass that has not converged by
        then hands over to the next barrier weight. This keeps nearly empty
        interiors from eating the whole budget.
    """

    def __init__(self, tol=1e-6, mu=50.0, max_newton=500, max_center=50):
        self.tol = tol
        self.mu = mu
        self.max_newton = max_newton
        self.max_center = max_center

    def solve(self, Q, q, cones, x0=None):
        Q = np.asarray(Q, dtype=float)
        n = Q.shape[0]
        q = np.zeros(n) if q is None else np.asarray(q, dtype=float)
        stacked = _Stacked(cones, n)
        x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
        used = 0
        if stacked.m and stacked.slack(x) <= 0:
            x, status, used = self._phase_one(stacked, x)
            if status != OPTIMAL:
                return SocpResult(x, status, np.nan, used, np.inf)
        x, status, it, gap = self._minimize(Q, q, stacked, x, self.max_newton - used, stop=None)
        return SocpResult(x, status, float(x @ Q @ x + q @ x), used + it, gap)

    def _phase_one(self, stacked, x):
        # minimize tau  s.t.  ||A_i x + b_i|| <= c_i^T x + d_i + tau, over (x, tau)
        n = x.size
        ext = stacked.with_slack_column()
        tau = -stacked.slack(x) + 1.0 + 1e-3 * np.linalg.norm(x)
        z = np.concatenate([x, [tau]])
        Q = np.zeros((n + 1, n + 1))
        Q[:n, :n] = 1e-12 * np.eye(n)
        q = np.zeros(n + 1)
        q[-1] = 1.0

        def feasible(zz):
            return zz[-1] < 0 and stacked.slack(zz[:n]) > 0

        z, status, it, gap = self._minimize(Q, q, ext, z, self.max_newton, stop=feasible)
        if status == "stopped":
            return z[:n], OPTIMAL, it
        if status == OPTIMAL or z[-1] - gap > 0:
            return z[:n], INFEASIBLE, it
        return z[:n], MAX_ITER, it

    def _minimize(self, Q, q, stacked, x, budget, stop):
        m = max(stacked.m, 1)
        f0 = abs(float(x @ Q @ x + q @ x))
        t = 2.0 * m / max(f0, 1e-3)
        if stop is None and stacked.m:
            # start on the central path point closest to x (warm starts)
            gf = 2.0 * Q @ x + q
            gb = stacked.derivatives(x)[0]
            t_fit = -(gf @ gb) / max(gf @ gf, 1e-300)
            t = min(max(t, t_fit), 2.0 * m / (1e-3 * max(1.0, f0)))
        iterations = 0
        while True:
            # centering
            for _ in range(min(budget - iterations, self.max_center)):
                bg, bh = stacked.derivatives(x)
                grad = t * (2.0 * Q @ x + q) + bg
                hess = 2.0 * t * Q + bh
                try:
                    step = -np.linalg.solve(hess, grad)
                except np.linalg.LinAlgError:
                    step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
                decrement = -grad @ step
                iterations += 1
                if decrement <= 1e-9:
                    break
                phi0 = t * (x @ Q @ x + q @ x) + stacked.barrier(x)
                alpha = 1.0
                while alpha > 1e-14:
                    xn = x + alpha * step
                    phi = t * (xn @ Q @ xn + q @ xn) + stacked.barrier(xn)
                    if phi <= phi0 - 0.25 * alpha * decrement:
                        break
                    alpha *= 0.5
                else:
                    break
                x = xn
                if stop is not None and stop(x):
                    return x, "stopped", iterations, np.inf
                if decrement < 1e-8:
                    break
            gap = 2.0 * stacked.m / t
            f = float(x @ Q @ x + q @ x)
            if gap <= self.tol * max(1.0, abs(f)):
                return x, OPTIMAL, iterations, gap
            if stop is not None and f - gap > 0:
                # phase one: the optimum is certified positive
                return x, INFEASIBLE, iterations, gap
            if iterations >= budget:
                return x, MAX_ITER, iterations, gap
            t *= self.mu


class CvxpySolver:
    """Adapter running the same problems through cvxpy (Clarabel by default)."""

    def __init__(self, solver="CLARABEL", **options):
        self.solver = solver
        self.options = options

    def solve(self, Q, q, cones, x0=None):
        import cvxpy as cp

        Q = np.asarray(Q, dtype=float)
        n = Q.shape[0]
        x = cp.Variable(n)
        Qs = 0.5 * (Q + Q.T)
        L = linalg.cholesky(Qs + 1e-14 * np.eye(n), lower=True)
        obj = cp.sum_squares(L.T @ x)
        if q is not None:
            obj = obj + np.asarray(q) @ x
        cons = [cp.SOC(c.c @ x + c.d, np.atleast_2d(c.A) @ x + c.b) for c in cones]
        prob = cp.Problem(cp.Minimize(obj), cons)
        prob.solve(solver=self.solver, **self.options)
        if prob.status in ("infeasible", "infeasible_inaccurate"):
            return SocpResult(np.full(n, np.nan), INFEASIBLE, np.nan, 0, np.inf)
        if x.value is None:
            return SocpResult(np.full(n, np.nan), MAX_ITER, np.nan, 0, np.inf)
        val = np.asarray(x.value)
        return SocpResult(val, OPTIMAL, float(val @ Q @ val + (0 if q is None else q @ val)), 0, 0.0)
