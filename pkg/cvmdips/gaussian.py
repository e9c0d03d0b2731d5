"""
Two-mode Gaussian primitives: thermal-state entropy, symplectic spectra of block covariance matrices and the
conditional spectrum left after a heterodyne measurement. Everything is in shot-noise units.
"""
import logging
import math

import numpy as np
from scipy.special import xlogy

from cvmdips.constants import CLAMP_TOL
from cvmdips.data import BipartiteCovariance
from cvmdips.errors import DomainError, PhysicalityError
from cvmdips.typing import Number

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)


def entropy_G(x: Number | np.ndarray) -> float | np.ndarray:
    """
    Von Neumann entropy, in bits, of a thermal state with mean photon number `x`:
    ``(x + 1) log2(x + 1) - x log2(x)``, with the limit value 0 at ``x = 0``.

    :param x: Mean photon number; scalars and arrays are both accepted
    :return: Entropy in bits, of the same shape as the input
    :raises DomainError: if any value lies further than the clamp tolerance below zero
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -CLAMP_TOL) or np.any(np.isnan(arr)):
        raise DomainError(f"Thermal entropy needs a non-negative photon number, got {x!r}")
    arr = np.maximum(arr, 0.0)
    # log1p and xlogy keep both terms exact near zero
    out = ((arr + 1.0) * np.log1p(arr) - xlogy(arr, arr)) / _LN2
    return float(out) if out.ndim == 0 else out


def _clamp_eigenvalue(name: str, value: float) -> float:
    if not value >= 1.0 - CLAMP_TOL:
        raise PhysicalityError(name, value)
    return max(value, 1.0)


def symplectic_pair(cov: BipartiteCovariance) -> tuple[float, float]:
    """
    Symplectic eigenvalues of the two-mode covariance. With ``A = a^2 + b^2 - 2c^2`` and ``B = ab - c^2`` they are
    the roots of ``lambda^4 - A lambda^2 + B^2``; for the block form used here these reduce to
    ``(sqrt((a + b)^2 - 4c^2) +/- |a - b|) / 2``, which is the form evaluated.

    :param cov: The covariance to diagonalize
    :return: ``(lambda1, lambda2)`` with ``lambda1 >= lambda2 >= 1``
    :raises PhysicalityError: when the discriminant is negative or an eigenvalue lies below the vacuum level
        by more than the clamp tolerance
    """
    a, b, c = cov
    # (a + b)^2 - 4c^2 factored to limit cancellation for strongly correlated states
    disc = (a + b - 2.0 * c) * (a + b + 2.0 * c)
    if disc < -CLAMP_TOL * (a + b) ** 2:
        raise PhysicalityError("symplectic discriminant", disc, bound=0.0)
    root = math.sqrt(max(disc, 0.0))
    gap = abs(a - b)
    lambda1 = 0.5 * (root + gap)
    lambda2 = 0.5 * (root - gap)
    return _clamp_eigenvalue("lambda1", lambda1), _clamp_eigenvalue("lambda2", lambda2)


def conditional_eigenvalue(cov: BipartiteCovariance) -> float:
    """
    Symplectic eigenvalue of the first mode once the second has been heterodyned: ``a - c^2 / (b + 1)``.

    :raises PhysicalityError: if the result lies below the vacuum level by more than the clamp tolerance
    """
    a, b, c = cov
    return _clamp_eigenvalue("lambda3", a - c * c / (b + 1.0))


def conditional_matrix(cov: BipartiteCovariance) -> np.ndarray:
    """
    The 2x2 covariance of the first mode conditioned on heterodyning the second,
    ``gamma_A - sigma (gamma_B + I)^-1 sigma^T``, by explicit linear algebra. It is proportional to the identity;
    its diagonal is the value :func:`conditional_eigenvalue` returns in closed form.
    """
    m = cov.as_matrix()
    gamma_a, gamma_b, sigma = m[:2, :2], m[2:, 2:], m[:2, 2:]
    return gamma_a - sigma @ np.linalg.solve(gamma_b + np.eye(2), sigma.T)


def check_physical(cov: BipartiteCovariance) -> BipartiteCovariance:
    """
    Assert the vacuum bound on the full symplectic spectrum.

    :return: The covariance, unchanged, for chaining
    :raises PhysicalityError: if it fails
    """
    lambda1, lambda2 = symplectic_pair(cov)
    log.debug(f"{cov} has symplectic spectrum ({lambda1:.12g}, {lambda2:.12g})")
    return cov
