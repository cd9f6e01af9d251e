"""Signal-subspace reduction of the relay beamformer.

The relay matrix is restricted to ``A = conj(U) @ B @ U^H`` where ``U`` spans
the uplink channel columns, so every quantity is expressed through the
K x K matrix ``B`` and the effective channels ``Htilde = U^H H``.

Vectorization stacks columns, ``vec(B) = B.reshape(-1, order="F")``; under
that convention ``h_k^T B h_j == kron(h_j, h_k) @ vec(B)``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import check_complex_matrix, check_positive_vector
from .channel import ChannelSet, PairingMap
from .exceptions import DegenerateChannelError

#: Relative singular-value threshold below which a direction counts as missing.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ReducedChannels:
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    Htilde: np.ndarray

    @property
    def num_sources(self):
        return self.Htilde.shape[1]


@dataclass(frozen=True)
class RelayBeamformer:
    """Reduced-space beamformer ``B`` (already including the scale ``alpha``)."""

    B: np.ndarray
    alpha: float
    scheme: str
    regularized: bool = False

    def lift(self, U):
        return lift(self.B, U)


def reduce(channels):
    """Economy SVD of the uplink matrix and the effective channels ``U^H h_k``.

    Parameters
    ----------
    channels : ChannelSet or array_like
        Either a channel realization or the M x K uplink matrix itself.

    Raises
    ------
    DegenerateChannelError
        If the numerical rank of ``H`` is below ``K - 1``.
    """
    H = channels.H if isinstance(channels, ChannelSet) else check_complex_matrix(channels, "H")
    M, K = H.shape
    if M < K - 1:
        raise ValueError(f"need M >= K - 1, got M={M}, K={K}")
    U, s, Vh = np.linalg.svd(H, full_matrices=False)
    if U.shape[1] < K:
        # M == K - 1: pad with a zero column so the reduced space stays K x K.
        U = np.hstack([U, np.zeros((M, K - U.shape[1]))])
        s = np.concatenate([s, np.zeros(K - s.size)])
        Vh = np.linalg.svd(H, full_matrices=True)[2]
    rank = int(np.sum(s > RANK_TOL * max(s[0], np.finfo(float).tiny)))
    if rank < K - 1:
        raise DegenerateChannelError(f"uplink channel rank {rank} < K - 1 = {K - 1}")
    Htilde = U.conj().T @ H
    return ReducedChannels(U=U, sigma=s, V=Vh.conj().T, Htilde=Htilde)


def lift(B, U):
    """Relay-domain matrix ``conj(U) @ B @ U^H``."""
    U = check_complex_matrix(U, "U")
    K = U.shape[1]
    B = check_complex_matrix(B, "B", shape=(K, K))
    return U.conj() @ B @ U.conj().T


def vec(Q):
    """Stack the columns of ``Q`` into one vector."""
    return np.asarray(Q).reshape(-1, order="F")


def unvec(b, K=None):
    """Inverse of :func:`vec` for a K x K matrix."""
    b = np.asarray(b)
    if K is None:
        K = int(round(np.sqrt(b.size)))
    if b.size != K * K:
        raise ValueError(f"vector of length {b.size} is not a {K}x{K} matrix")
    return b.reshape(K, K, order="F")


@dataclass(frozen=True)
class CouplingSet:
    """Linear forms that express SINR terms as functions of ``b = vec(B)``.

    ``f[k] @ b`` is the desired gain at destination ``k`` (scaled by
    ``sqrt(p_partner)``), ``d[k][i] @ b`` the i-th inter-pair interference
    term, and ``G[k] @ b`` equals the row ``h_k^T B``.
    """

    f: np.ndarray
    d: tuple
    G: np.ndarray
    noise_power: float
    g: np.ndarray

    @property
    def num_sources(self):
        return self.f.shape[0]

    @cached_property
    def R(self):
        """Per-destination interference matrices ``sum_j conj(d) d^T``."""
        return np.stack([dk.T.conj() @ dk for dk in self.d])

    @cached_property
    def N(self):
        """Per-destination AF-noise matrices ``G^H G``."""
        return np.einsum("kri,krj->kij", self.G.conj(), self.G)

    @cached_property
    def Phi(self):
        phi = (self.R + self.noise_power * self.N).sum(axis=0)
        return 0.5 * (phi + phi.conj().T)

    @property
    def C(self):
        return self.f.conj().T


def build_couplings(red, powers, pairing, noise_power, beta=None):
    """Form the coupling vectors and the quadratic form of the MI problem.

    Parameters
    ----------
    red : ReducedChannels
    powers : array_like
        Linear source powers.
    pairing : PairingMap
    noise_power : float
    beta : array_like, optional
        Desired gain per destination; ones by default.
    """
    Ht = red.Htilde
    K = Ht.shape[1]
    if not isinstance(pairing, PairingMap) or pairing.num_sources != K:
        raise ValueError("pairing does not match the reduced channels")
    p = check_positive_vector(powers, K, "powers")
    sq = np.sqrt(p)
    partner = pairing.partner
    # kron(h_j, h_k) for every (k, j), scaled by sqrt(p_j): pairs[k, j] is a K^2 vector.
    pairs = np.einsum("aj,bk->kjab", Ht * sq[None, :], Ht).reshape(K, K, K * K)
    f = pairs[np.arange(K), partner]
    d = tuple(pairs[k, pairing.interferers(k)] for k in range(K))
    G = np.einsum("ac,bk->kacb", np.eye(K), Ht).reshape(K, K, K * K)
    g = np.ones(K) if beta is None else check_positive_vector(beta, K, "beta", allow_zero=True)
    return CouplingSet(f=f, d=d, G=G, noise_power=float(noise_power), g=g)
