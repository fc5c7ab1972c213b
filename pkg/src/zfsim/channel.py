"""Finite-multipath planar-array channel generation.

The model: each of L single-antenna users receives over ``n_paths``
discrete departure paths. A drop freezes the per-path departure angles
(drawn uniformly inside the per-user angular support window); the
small-scale state that varies between realizations is only the complex
path gain vector, gamma ~ CN(0, 1/n_paths) i.i.d. across users, paths
and realizations.

Angles are degrees at every public interface and converted to radians
exactly once, here. Spacings are pre-normalized by the carrier
wavelength, so the carrier frequency never appears below configuration.

Randomness follows a stream contract: a master seed plus a purpose tag
and integer indices deterministically name an independent substream
(see :func:`substream`); no function holds generator state.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import kron_row


class WrongGeometry(Exception):
    """Steering routine called with the other array kind."""


class InvalidDistance(Exception):
    """Propagation distance must be strictly positive."""


# Purpose tags for the substream contract. Fixed integers: renumbering
# would silently change every derived stream.
_STREAM_TAGS = {
    "drop": 1,
    "gains": 2,
    "shadow": 3,
    "placement": 4,
    "oracle": 5,
}


def substream(seed, tag, *key):
    """Independent generator for (master seed, purpose tag, integer key).

    Same arguments always return a generator in the same state, so any
    drop/realization can be regenerated in isolation and results do not
    depend on scheduling order.
    """
    entropy = (int(seed) & 0xFFFFFFFFFFFFFFFF, _STREAM_TAGS[tag]) + tuple(int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class ArrayGeometry:
    """Transmit array description.

    kind is "ula" (all elements on the z axis, m_x must be 1) or "upa"
    (m_x columns along x, m_z rows along z). Spacings d_x, d_z are in
    wavelengths.
    """
    kind: str
    m_x: int
    m_z: int
    d_x: float = 0.5
    d_z: float = 0.7

    def __post_init__(self):
        if self.kind not in ("ula", "upa"):
            raise ValueError(f"unknown array kind {self.kind!r}")
        if self.kind == "ula" and self.m_x != 1:
            raise ValueError("a ULA has m_x = 1")
        if self.m_x < 1 or self.m_z < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.d_x <= 0 or self.d_z <= 0:
            raise ValueError("element spacings must be positive")

    @property
    def n_antennas(self):
        return self.m_x * self.m_z


@dataclass(frozen=True)
class UEGeometry:
    """Line-of-sight direction, angular spreads and large-scale gain of one user."""
    az_los: float
    el_los: float
    az_asd: float = 10.0
    el_asd: float = 5.0
    link_gain: float = 1.0

    def __post_init__(self):
        if self.az_asd < 0 or self.el_asd < 0:
            raise ValueError("angular spreads must be >= 0")
        if self.link_gain <= 0:
            raise ValueError("link gain must be positive")


@dataclass(frozen=True)
class Drop:
    """One frozen large-scale realization: per-user, per-path departure angles.

    az_angles and el_angles have shape (n_ues, n_paths), degrees. The
    arrays are write-locked; only path gains vary across realizations.
    """
    ues: tuple
    n_paths: int
    az_angles: np.ndarray
    el_angles: np.ndarray

    def __post_init__(self):
        for arr in (self.az_angles, self.el_angles):
            arr.setflags(write=False)

    @property
    def n_ues(self):
        return len(self.ues)


@dataclass
class CovarianceSet:
    """Per-user spatial covariances plus the (exact) mean Gram matrix."""
    per_ue: list
    mean_gram: np.ndarray = field(default=None)


def steering_vector_ula(geom, az):
    """Steering row of a z-axis ULA toward azimuth ``az`` (degrees).

    Entry m carries phase -2*pi*d_z*m*cos(az); entry 0 is exactly 1.
    """
    if geom.kind != "ula":
        raise WrongGeometry("steering_vector_ula requires a ULA geometry")
    phase = -2.0 * np.pi * geom.d_z * np.cos(np.deg2rad(az))
    return np.exp(1j * phase * np.arange(geom.m_z))


def steering_vector_upa(geom, az, el):
    """Steering row of an x-z planar array toward (az, el) in degrees.

    The x factor advances with sin(el)*cos(az) at spacing d_x, the z
    factor with sin(el)*sin(az) at spacing d_z, and the full response is
    their Kronecker product (x-major ordering).
    """
    if geom.kind != "upa":
        raise WrongGeometry("steering_vector_upa requires a UPA geometry")
    az_r = np.deg2rad(az)
    el_r = np.deg2rad(el)
    u_x = np.sin(el_r) * np.cos(az_r)
    u_z = np.sin(el_r) * np.sin(az_r)
    a_x = np.exp(-2j * np.pi * geom.d_x * u_x * np.arange(geom.m_x))
    a_z = np.exp(-2j * np.pi * geom.d_z * u_z * np.arange(geom.m_z))
    return kron_row(a_x, a_z)


def steering_vector(geom, az, el):
    if geom.kind == "ula":
        return steering_vector_ula(geom, az)
    return steering_vector_upa(geom, az, el)


def draw_drop(ues, n_paths, rng):
    """Draw per-path departure angles for every user.

    Each path angle is uniform over [los - asd, los + asd],
    independently in azimuth and elevation and across (user, path).
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    ues = tuple(ues)
    az = np.empty((len(ues), n_paths))
    el = np.empty((len(ues), n_paths))
    for i, ue in enumerate(ues):
        az[i] = rng.uniform(ue.az_los - ue.az_asd, ue.az_los + ue.az_asd, n_paths)
        el[i] = rng.uniform(ue.el_los - ue.el_asd, ue.el_los + ue.el_asd, n_paths)
    return Drop(ues=ues, n_paths=n_paths, az_angles=az, el_angles=el)


def steering_matrix(drop, geom):
    """Stack of steering rows per user: shape (n_ues, n_paths, M).

    Fixed for the lifetime of a drop; realization loops should compute
    it once and pass it to :func:`draw_channel`.
    """
    out = np.empty((drop.n_ues, drop.n_paths, geom.n_antennas), dtype=complex)
    for l in range(drop.n_ues):
        for p in range(drop.n_paths):
            out[l, p] = steering_vector(geom, drop.az_angles[l, p], drop.el_angles[l, p])
    return out


def draw_channel(drop, geom, rng, steering=None):
    """One small-scale realization: row l = sum_p gamma_{l,p} a_{l,p}.

    gamma ~ CN(0, 1/n_paths) i.i.d.; the drop's angles are left
    untouched. Returns an (n_ues, M) complex matrix.
    """
    if steering is None:
        steering = steering_matrix(drop, geom)
    shape = (drop.n_ues, drop.n_paths)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    gains /= np.sqrt(2.0 * drop.n_paths)
    return np.einsum("lp,lpm->lm", gains, steering)


def compute_covariance(drop, geom, ue, steering=None):
    """Spatial covariance of user ``ue``'s channel row for this drop.

    Exact expectation over the path gains: R = (1/n_paths) A^H A with A
    the user's (n_paths, M) steering stack. Hermitian PSD with trace M.
    """
    if steering is None:
        a = np.stack([steering_vector(geom, drop.az_angles[ue, p], drop.el_angles[ue, p])
                      for p in range(drop.n_paths)])
    else:
        a = steering[ue]
    r = a.conj().T @ a / drop.n_paths
    return 0.5 * (r + r.conj().T)


def compute_mean_gram(n_ues, n_antennas):
    """Expected Gram matrix of the stacked channel: exactly M * I.

    Off-diagonals vanish because independent users have independent
    zero-mean gains; each diagonal is (1/n_paths) * sum_p ||a_p||^2 = M
    regardless of the drop's angles.
    """
    return float(n_antennas) * np.eye(n_ues, dtype=complex)


def build_covariance_set(drop, geom, steering=None):
    if steering is None:
        steering = steering_matrix(drop, geom)
    per_ue = [compute_covariance(drop, geom, l, steering) for l in range(drop.n_ues)]
    return CovarianceSet(per_ue=per_ue,
                         mean_gram=compute_mean_gram(drop.n_ues, geom.n_antennas))


# Distance-power law: gain_dB = -(PL0 + 10*n*log10(d/d0)) + shadowing.
PATHLOSS_EXPONENT = 3.67
SHADOW_STD_DB = 4.0
REF_DISTANCE_M = 1.0
# Free-space intercept at the 1 m reference for a 3.7 GHz carrier.
REF_LOSS_DB = 43.81


def link_gain(distance_m, rng=None, shadow_enabled=False,
              exponent=PATHLOSS_EXPONENT, shadow_std_db=SHADOW_STD_DB,
              ref_distance_m=REF_DISTANCE_M, ref_loss_db=REF_LOSS_DB):
    """Linear large-scale gain at a given distance.

    Deterministic when shadowing is disabled; otherwise adds a
    zero-mean normal term in dB with the given standard deviation.
    """
    if not distance_m > 0:
        raise InvalidDistance(f"distance must be positive, got {distance_m}")
    gain_db = -(ref_loss_db + 10.0 * exponent * np.log10(distance_m / ref_distance_m))
    if shadow_enabled:
        if rng is None:
            raise ValueError("shadowing requires a generator")
        gain_db += shadow_std_db * rng.standard_normal()
    return 10.0 ** (gain_db / 10.0)
