"""Truncated series approximation of the Gram-matrix inverse.

With A = H H^H split around its mean as A = Delta + Xi, the inverse
expands as sum_n (-Delta^-1 Xi)^n Delta^-1; truncating at order N gives
a closed form in A alone. Order 2 expands to

    3 Delta^-1 - 3 Delta^-1 A Delta^-1 + Delta^-1 A Delta^-1 A Delta^-1

and is the basis of the closed-form analysis in :mod:`zfsim.analytics`.
Divergent truncations are a reportable outcome, not an error: the error
metric below is emitted whatever its size.
"""

import numpy as np

from .linalg import SingularMatrix, gram, hermitian_inverse, inverse

MAX_ORDER = 8


class NotEvaluable(Exception):
    """Error metric undefined for this sample (singular approximation)."""


def neumann_inverse(h, delta, order):
    """Order-N series approximation of (H H^H)^-1 around Delta.

    Horner evaluation of sum_{n=0}^{N} (-Delta^-1 (A - Delta))^n Delta^-1
    with A = H H^H. Order 0 returns Delta^-1.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
    delta = np.asarray(delta, dtype=complex)
    a = gram(h)
    delta_inv = hermitian_inverse(delta)
    step = -delta_inv @ (a - delta)
    out = delta_inv.copy()
    for _ in range(order):
        out = delta_inv + step @ out
    return out


def neumann_order2(h, delta):
    """Expanded order-2 closed form of the series inverse.

    Algebraically identical to neumann_inverse(h, delta, 2); both are
    kept so the identity can be asserted rather than assumed.
    """
    delta_inv = hermitian_inverse(np.asarray(delta, dtype=complex))
    a = gram(h)
    ad = delta_inv @ a @ delta_inv
    return 3.0 * delta_inv - 3.0 * ad + ad @ a @ delta_inv


def error_magnitude(true_inv, approx, mode="right_division"):
    """Scalar deviation of an approximate inverse from the exact one.

    Default reading: alpha = Tr[I - true_inv @ approx^-1], which is 0
    iff the approximation is exact. The alternative "elementwise_diagonal"
    reading divides the diagonals entry by entry. Raises NotEvaluable
    when the approximation is singular (possible at low orders); callers
    count those samples separately.
    """
    true_inv = np.asarray(true_inv, dtype=complex)
    approx = np.asarray(approx, dtype=complex)
    n = true_inv.shape[0]
    if mode == "right_division":
        try:
            ratio = true_inv @ inverse(approx)
        except SingularMatrix as exc:
            raise NotEvaluable(str(exc)) from exc
        val = complex(np.trace(np.eye(n) - ratio))
    elif mode == "elementwise_diagonal":
        diag = np.diagonal(approx)
        if np.any(np.abs(diag) < 1e-300):
            raise NotEvaluable("zero diagonal entry in approximation")
        val = complex(np.sum(1.0 - np.diagonal(true_inv) / diag))
    else:
        raise ValueError(f"unknown error-magnitude mode {mode!r}")
    if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
        raise ValueError(f"error magnitude unexpectedly complex: {val}")
    return val.real


def frobenius_error(true_inv, approx):
    """Relative Frobenius deviation ||approx - true|| / ||true||."""
    true_inv = np.asarray(true_inv, dtype=complex)
    approx = np.asarray(approx, dtype=complex)
    return float(np.linalg.norm(approx - true_inv) / np.linalg.norm(true_inv))
