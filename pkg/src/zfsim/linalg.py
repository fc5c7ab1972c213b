"""Dense complex linear-algebra kernel used by every other module.

All matrices are plain complex128 numpy arrays. The factorizations are
written out explicitly (rather than delegating to LAPACK) so that the
singularity policy is a hard contract: any pivot whose magnitude falls
below ``PIVOT_RTOL`` times the largest input entry raises
:class:`SingularMatrix`, and callers are expected to count-and-skip such
instances instead of regularizing them away.
"""

import numpy as np

# Relative pivot threshold shared by both factorizations.
PIVOT_RTOL = 1e-13


class SingularMatrix(Exception):
    """Factorization hit a pivot below the relative threshold."""


def gram(h):
    """Return the Gram matrix H H^H of a stacked row-channel matrix.

    The result is Hermitian positive semi-definite with
    Tr[gram(H)] equal to the squared Frobenius norm of H.
    """
    h = np.asarray(h, dtype=complex)
    g = h @ h.conj().T
    return 0.5 * (g + g.conj().T)


def kron_row(a, b):
    """Kronecker product of two row vectors: out[i*n + k] = a[i] * b[k]."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    return np.kron(a, b)


def _check_hermitian(a):
    scale = max(1.0, float(np.abs(a).max()))
    dev = float(np.abs(a - a.conj().T).max())
    if dev > 1e-10 * scale:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3g})")


def hermitian_inverse(a, pivot_rtol=PIVOT_RTOL):
    """Invert a Hermitian positive-definite matrix via Cholesky elimination.

    Raises SingularMatrix if any pivot magnitude drops below
    ``pivot_rtol`` times the largest entry of ``a`` (an ill-conditioned
    draw; callers discard and count it). The returned inverse is
    re-symmetrized so it is Hermitian exactly.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected square matrix, got {a.shape}")
    _check_hermitian(a)
    threshold = pivot_rtol * float(np.abs(a).max())

    low = np.zeros((n, n), dtype=complex)
    for j in range(n):
        pivot = a[j, j].real - np.sum(np.abs(low[j, :j]) ** 2)
        if not pivot > threshold:
            raise SingularMatrix(
                f"pivot {pivot:.3e} below threshold {threshold:.3e} at column {j}")
        low[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j].conj()) / low[j, j]

    # L y = I (forward), L^H x = y (backward)
    inv = np.eye(n, dtype=complex)
    for j in range(n):
        inv[j] = (inv[j] - low[j, :j] @ inv[:j]) / low[j, j]
    lh = low.conj().T
    for j in range(n - 1, -1, -1):
        inv[j] = (inv[j] - lh[j, j + 1:] @ inv[j + 1:]) / lh[j, j]
    return 0.5 * (inv + inv.conj().T)


def inverse(a, pivot_rtol=PIVOT_RTOL):
    """Invert a general square complex matrix via partially pivoted LU.

    Needed for Hermitian but indefinite matrices (truncated series
    approximations of low order can lose definiteness). Same pivot
    contract as :func:`hermitian_inverse`.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected square matrix, got {a.shape}")
    threshold = pivot_rtol * float(np.abs(a).max()) if n else 0.0

    lu = a.copy()
    aug = np.eye(n, dtype=complex)
    for j in range(n):
        p = j + int(np.argmax(np.abs(lu[j:, j])))
        if np.abs(lu[p, j]) <= threshold:
            raise SingularMatrix(
                f"pivot {np.abs(lu[p, j]):.3e} below threshold {threshold:.3e} at column {j}")
        if p != j:
            lu[[j, p]] = lu[[p, j]]
            aug[[j, p]] = aug[[p, j]]
        factors = lu[j + 1:, j] / lu[j, j]
        lu[j + 1:, j:] -= np.outer(factors, lu[j, j:])
        aug[j + 1:] -= np.outer(factors, aug[j])
    for j in range(n - 1, -1, -1):
        aug[j] = (aug[j] - lu[j, j + 1:] @ aug[j + 1:]) / lu[j, j]
    return aug
