"""Symmetric tensor algebra in norm-preserving (Mandel) storage.

A symmetric 3x3 tensor ``T`` is stored as the 6-vector

    [T11, T22, T33, sqrt(2) T12, sqrt(2) T23, sqrt(2) T13]

so that the Euclidean dot product of two storage vectors equals the double
contraction ``A : B``.  Fourth-order symmetric-to-symmetric tensors are then
plain 6x6 matrices.  All functions accept a single vector of shape ``(6,)``
or a batch ``(..., 6)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)
SQRT6 = np.sqrt(6.0)

#: sin(3 theta) below this value marks d(theta)/d(sigma) as unavailable.
THETA_SINGULAR_TOL = 1e-10

IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
I_VOL = np.outer(IDENTITY, IDENTITY) / 3.0
I_DEV = np.eye(6) - I_VOL

# (row, col) of the matrix entry held by each storage slot
_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))
_SCALE = np.array([1.0, 1.0, 1.0, SQRT2, SQRT2, SQRT2])


class SingularPointError(ValueError):
    """Raised when a derivative is requested where it does not exist (rho = 0)."""


def to_mandel(mat) -> np.ndarray:
    """Convert symmetric matrices ``(..., 3, 3)`` into storage ``(..., 6)``."""
    mat = np.asarray(mat, dtype=float)
    sym = 0.5 * (mat + np.swapaxes(mat, -1, -2))
    return np.stack([sym[..., i, j] for i, j in _INDEX], axis=-1) * _SCALE


def from_mandel(vec) -> np.ndarray:
    """Convert storage ``(..., 6)`` into symmetric matrices ``(..., 3, 3)``."""
    vec = np.asarray(vec, dtype=float)
    comp = vec / _SCALE
    out = np.empty(vec.shape[:-1] + (3, 3))
    for k, (i, j) in enumerate(_INDEX):
        out[..., i, j] = comp[..., k]
        out[..., j, i] = comp[..., k]
    return out


def from_plane_strain(exx, eyy, exy) -> np.ndarray:
    """Build full 3D strain storage from in-plane tensor components (ezz = 0)."""
    exx, eyy, exy = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (exx, eyy, exy)))
    zero = np.zeros_like(exx)
    return np.stack([exx, eyy, zero, SQRT2 * exy, zero, zero], axis=-1)


def engineering_to_mandel(voigt) -> np.ndarray:
    """Map plane-strain engineering strain ``(exx, eyy, gamma_xy)`` to storage."""
    voigt = np.asarray(voigt, dtype=float)
    return from_plane_strain(voigt[..., 0], voigt[..., 1], 0.5 * voigt[..., 2])


#: ``PLANE.T @ sigma`` gives Voigt stress (sxx, syy, sxy); ``PLANE @ e`` maps
#: engineering strain (exx, eyy, gxy) to storage.
PLANE = np.zeros((6, 3))
PLANE[0, 0] = PLANE[1, 1] = 1.0
PLANE[3, 2] = 1.0 / SQRT2


def norm(vec) -> np.ndarray:
    return np.linalg.norm(vec, axis=-1)


def trace(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    return vec[..., 0] + vec[..., 1] + vec[..., 2]


def split(sigma):
    """Return ``(p, s)`` with ``sigma = p I + s`` and ``trace(s) = 0``."""
    sigma = np.asarray(sigma, dtype=float)
    a = sigma[..., 0]
    # exact on the hydrostatic axis, where the plain mean can be off by an ulp
    p = a + ((sigma[..., 1] - a) + (sigma[..., 2] - a)) / 3.0
    s = sigma - p[..., None] * IDENTITY
    return p, s


def square(vec) -> np.ndarray:
    """Tensor square ``T T`` in storage form."""
    mat = from_mandel(vec)
    return to_mandel(mat @ mat)


def det(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    a, b, c = vec[..., 0], vec[..., 1], vec[..., 2]
    d, e, f = vec[..., 3] / SQRT2, vec[..., 4] / SQRT2, vec[..., 5] / SQRT2
    return a * b * c + 2.0 * d * e * f - a * e * e - b * f * f - c * d * d


def outer(a, b) -> np.ndarray:
    return np.einsum("...i,...j->...ij", a, b)


@dataclass(frozen=True)
class Invariants:
    """Haigh-Westergaard coordinates of a stress state (scalars or arrays)."""

    p: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    theta_defined: np.ndarray
    cos3theta_raw: np.ndarray


def _cos3theta(s, rho):
    # (3 sqrt3 / 2) J3 / J2^(3/2) written with the unit deviator n = s / rho,
    # which avoids under- and overflow of J2^(3/2)
    safe = np.where(rho > 0.0, rho, 1.0)
    raw = 3.0 * SQRT6 * det(s / safe[..., None])
    return np.where(rho > 0.0, raw, 1.0)


def invariants(sigma) -> Invariants:
    """Pressure, deviatoric norm and Lode angle of ``sigma``.

    ``theta`` is set to 0 and ``theta_defined`` to False where ``rho == 0``.
    """
    p, s = split(sigma)
    rho = norm(s)
    raw = _cos3theta(s, rho)
    theta = np.arccos(np.clip(raw, -1.0, 1.0)) / 3.0
    defined = rho > 0.0
    theta = np.where(defined, theta, 0.0)
    return Invariants(p=p, rho=rho, theta=theta, theta_defined=defined, cos3theta_raw=raw)


def _check_e(e):
    if not 0.5 <= e <= 1.0:
        raise ValueError(f"eccentricity e={e} outside [0.5, 1]")


def r_e(cos_theta, e: float):
    """Willam-Warnke deviatoric shape factor ``r_e(cos theta)``."""
    _check_e(e)
    c = np.asarray(cos_theta, dtype=float)
    if np.any((c < 0.5 - 1e-12) | (c > 1.0 + 1e-12)):
        raise ValueError("cos(theta) must lie in [1/2, 1]")
    if e == 1.0:
        return np.ones_like(c) if c.ndim else 1.0
    a = 1.0 - e * e
    root = np.sqrt(4.0 * a * c * c + 5.0 * e * e - 4.0 * e)
    num = 4.0 * a * c * c + (2.0 * e - 1.0) ** 2
    den = 2.0 * a * c + (2.0 * e - 1.0) * root
    return num / den


def r_e_prime(cos_theta, e: float):
    """Derivative of :func:`r_e` with respect to ``cos theta``."""
    _check_e(e)
    c = np.asarray(cos_theta, dtype=float)
    if e == 1.0:
        return np.zeros_like(c) if c.ndim else 0.0
    a = 1.0 - e * e
    root = np.sqrt(4.0 * a * c * c + 5.0 * e * e - 4.0 * e)
    num = 4.0 * a * c * c + (2.0 * e - 1.0) ** 2
    den = 2.0 * a * c + (2.0 * e - 1.0) * root
    dnum = 8.0 * a * c
    dden = 2.0 * a + (2.0 * e - 1.0) * 4.0 * a * c / root
    return (dnum * den - num * dden) / (den * den)


def deviatoric_direction(sigma):
    """Unit deviatoric direction and its derivatives.

    Returns ``(n, dn_dsigma, dtheta_dsigma, theta_ok)``.  ``dtheta_dsigma`` is
    zero wherever ``theta_ok`` is False, i.e. where ``sin(3 theta)`` does not
    exceed :data:`THETA_SINGULAR_TOL`.

    Raises
    ------
    SingularPointError
        If any input has a vanishing deviatoric part.
    """
    sigma = np.asarray(sigma, dtype=float)
    _, s = split(sigma)
    rho = norm(s)
    if np.any(rho <= 0.0):
        raise SingularPointError("deviatoric direction undefined at rho = 0")
    n = s / rho[..., None]
    dn = (I_DEV - outer(n, n)) / rho[..., None, None]
    raw = _cos3theta(s, rho)
    sin3 = np.sqrt(np.clip(1.0 - raw * raw, 0.0, None))
    ok = sin3 > THETA_SINGULAR_TOL
    n2 = square(n)
    tr_n3 = np.einsum("...i,...i->...", n2, n)
    dev_n2 = n2 - (trace(n2) / 3.0)[..., None] * IDENTITY
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(ok, SQRT6 / (rho * np.where(ok, sin3, 1.0)), 0.0)
    dtheta = factor[..., None] * (tr_n3[..., None] * n - dev_n2)
    return n, dn, dtheta, ok


@dataclass(frozen=True)
class ElasticModuli:
    """Isotropic linear elasticity through bulk and shear moduli."""

    K: float
    G: float

    def __post_init__(self):
        if not (self.K > 0 and self.G > 0):
            raise ValueError(f"moduli must be positive, got K={self.K}, G={self.G}")

    @classmethod
    def from_young(cls, E: float, nu: float) -> "ElasticModuli":
        return cls(K=E / (3.0 * (1.0 - 2.0 * nu)), G=E / (2.0 * (1.0 + nu)))

    @property
    def stiffness(self) -> np.ndarray:
        return 3.0 * self.K * I_VOL + 2.0 * self.G * I_DEV

    @property
    def compliance(self) -> np.ndarray:
        return I_VOL / (3.0 * self.K) + I_DEV / (2.0 * self.G)


def elastic_apply(moduli: ElasticModuli, eps):
    """Stress ``K tr(eps) I + 2 G dev(eps)``."""
    eps = np.asarray(eps, dtype=float)
    vol, dev = split(eps)
    return 3.0 * moduli.K * vol[..., None] * IDENTITY + 2.0 * moduli.G * dev


def elastic_inverse(moduli: ElasticModuli, sigma):
    """Strain producing ``sigma`` under :func:`elastic_apply`."""
    sigma = np.asarray(sigma, dtype=float)
    p, s = split(sigma)
    return (p / (3.0 * moduli.K))[..., None] * IDENTITY + s / (2.0 * moduli.G)
