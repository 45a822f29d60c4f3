"""Complex dense linear-algebra kernels for the receive-filter update.

The interference-plus-noise covariance in this problem is a rank-one update
of a scaled identity, so its inverse never has to be formed: applies go
through the Sherman-Morrison identity and the principal generalized
eigenvector is recovered from a reduced problem whose size is the number of
transmit APs.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianEigResult",
    "hermitian_eig",
    "rank_one_plus_identity_inverse_apply",
    "principal_generalized_direction",
]


@dataclass(frozen=True)
class HermitianEigResult:
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # unitary, columns matched to eigenvalues


def _fix_phase(v):
    # Deterministic phase: the largest-magnitude component is real positive.
    i = int(np.argmax(np.abs(v)))
    a = v[i]
    if np.abs(a) > 0:
        v = v * (np.conj(a) / np.abs(a))
        # argmax component is now real; clear its rounding dust
        v[i] = v[i].real
    return v


def hermitian_eig(A):
    """Full spectral decomposition of a Hermitian matrix.

    The input is symmetrized internally but must already be Hermitian to
    within 1e-10 relative; each eigenvector's largest-magnitude component is
    rotated to be real positive so results are reproducible.
    """
    A = np.asarray(A)
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ValueError("non-finite entries")
    nrm = np.linalg.norm(A)
    if nrm > 0 and np.linalg.norm(A - A.conj().T) > 1e-10 * nrm:
        raise ValueError("matrix is not Hermitian within tolerance")
    H = 0.5 * (A + A.conj().T)
    vals, vecs = np.linalg.eigh(H)
    vecs = np.array([_fix_phase(vecs[:, i].copy()) for i in range(vecs.shape[1])]).T
    return HermitianEigResult(eigenvalues=vals, eigenvectors=vecs)


def rank_one_plus_identity_inverse_apply(c, sigma2, X):
    """Compute (c c^H + sigma2 I)^{-1} X without forming the inverse.

    Sherman-Morrison: (1/sigma2) * (X - c (c^H X) / (sigma2 + c^H c)).
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    c = np.asarray(c, dtype=complex).reshape(-1)
    X = np.asarray(X, dtype=complex)
    cHX = c.conj() @ X
    denom = sigma2 + float(np.real(c.conj() @ c))
    if X.ndim == 1:
        return (X - c * (cHX / denom)) / sigma2
    return (X - np.outer(c, cHX) / denom) / sigma2


def principal_generalized_direction(V, c, sigma2):
    """Principal eigenvector of (c c^H + sigma2 I)^{-1} V V^H.

    Solved through the reduced problem V^H R^{-1} V = Z Lambda Z^H of size
    equal to the number of columns of V; the returned vector is unit norm
    with the standard phase convention.
    """
    V = np.asarray(V, dtype=complex)
    if V.ndim == 1:
        V = V[:, None]
    if np.linalg.norm(V) < 1e-300:
        raise ValueError("V is numerically zero")
    RiV = rank_one_plus_identity_inverse_apply(c, sigma2, V)
    M = V.conj().T @ RiV
    red = hermitian_eig(M)
    z_max = red.eigenvectors[:, -1]
    u = RiV @ z_max
    u = u / np.linalg.norm(u)
    return _fix_phase(u)
