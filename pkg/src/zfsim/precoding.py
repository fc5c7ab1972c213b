"""Zero-forcing precoder and the simulated (ground-truth) link metrics."""

from dataclasses import dataclass

import numpy as np

from . import channel
from .linalg import SingularMatrix, gram, hermitian_inverse


class TooManySingular(Exception):
    """More than the tolerated fraction of realizations were discarded."""


# Fraction of singular realizations above which a scenario is considered
# degenerate rather than unlucky.
MAX_SINGULAR_FRACTION = 0.01


@dataclass(frozen=True)
class ZfResult:
    """Unnormalized precoder G = H^H (H H^H)^-1 and its power penalty.

    normalization is ||G||_F^2 / L = Tr[(H H^H)^-1] / L; every user
    shares it under uniform power allocation.
    """
    precoder: np.ndarray
    normalization: float
    trace_inverse: float


@dataclass(frozen=True)
class SumSeEstimate:
    """Monte-Carlo estimate of the ergodic sum spectral efficiency."""
    mean: float
    std_error: float
    n_used: int
    n_discarded: int


def zf_precode(h):
    """Build the zero-forcing precoder for a stacked row-channel matrix.

    Requires L <= M and an invertible Gram matrix; a singular draw
    propagates SingularMatrix so the caller can discard and count it.
    """
    h = np.asarray(h, dtype=complex)
    n_ues, n_ant = h.shape
    if n_ues > n_ant:
        raise ValueError(f"need at least as many antennas as users, got {h.shape}")
    gram_inv = hermitian_inverse(gram(h))
    trace_inverse = float(np.trace(gram_inv).real)
    return ZfResult(precoder=h.conj().T @ gram_inv,
                    normalization=trace_inverse / n_ues,
                    trace_inverse=trace_inverse)


def snr_from_trace(trace_inverse, n_ues, beta, p_eirp, sigma2):
    """Per-user post-precoding SNR given Tr[(H H^H)^-1].

    SNR_l = p * beta_l * L / (sigma^2 * trace); the denominator is
    common to all users.
    """
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (n_ues,))
    return p_eirp * beta * n_ues / (sigma2 * trace_inverse)


def exact_snr(h, beta, p_eirp, sigma2):
    """Per-user ZF SNR of one channel realization (linear scale)."""
    h = np.asarray(h, dtype=complex)
    zf = zf_precode(h)
    return snr_from_trace(zf.trace_inverse, h.shape[0], beta, p_eirp, sigma2)


def ergodic_sum_se(drop, geom, beta, p_eirp, sigma2, n_realizations, rng):
    """Monte-Carlo ergodic sum spectral efficiency over small-scale fading.

    Averages sum_l log2(1 + SNR_l) over fresh gain realizations of a
    fixed drop. Singular realizations are discarded and counted, never
    imputed; if more than MAX_SINGULAR_FRACTION of them are discarded
    the scenario is reported as degenerate via TooManySingular.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    steering = channel.steering_matrix(drop, geom)
    samples = np.empty(n_realizations)
    n_used = 0
    n_discarded = 0
    for _ in range(n_realizations):
        h = channel.draw_channel(drop, geom, rng, steering=steering)
        try:
            snr = exact_snr(h, beta, p_eirp, sigma2)
        except SingularMatrix:
            n_discarded += 1
            continue
        samples[n_used] = np.sum(np.log2(1.0 + snr))
        n_used += 1
    if n_discarded > MAX_SINGULAR_FRACTION * n_realizations:
        raise TooManySingular(
            f"{n_discarded}/{n_realizations} realizations singular")
    used = samples[:n_used]
    std_error = float(np.std(used, ddof=1) / np.sqrt(n_used)) if n_used > 1 else float("nan")
    return SumSeEstimate(mean=float(np.mean(used)), std_error=std_error,
                         n_used=n_used, n_discarded=n_discarded)
