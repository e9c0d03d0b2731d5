"""
Closed-form model of the two-mode squeezed source and of the k-photon subtraction performed on the mode Alice
sends out: a beam splitter of transmittance ``T_PS`` taps the mode and the event "exactly k photons in the tap"
is post-selected.
"""
import math

from cvmdips.data import SourceParams, SubtractedSource
from cvmdips.errors import DegenerateSourceError, DomainError
from cvmdips.typing import Number


def _xi_sq(V: Number) -> float:
    if not V >= 1.0 or math.isinf(V):
        raise DomainError(f"EPR variance V={V!r} must be finite and >= 1")
    return (V - 1.0) / (V + 1.0)


def xi(V: Number) -> float:
    """
    :param V: EPR variance, in SNU
    :return: ``sqrt((V - 1) / (V + 1))``, i.e. ``tanh(r)`` for squeezing parameter ``r``
    :raises DomainError: for ``V < 1``
    """
    return math.sqrt(_xi_sq(V))


def squeezing_parameter(V: Number) -> float:
    """ The squeezing parameter ``r = arctanh(xi)`` of the two-mode squeezer producing variance `V` """
    return math.atanh(xi(V))


def mean_photon_number(V: Number) -> float:
    """ Mean photon number in either arm of the EPR state, ``(V - 1) / 2 = sinh(r)^2`` """
    _xi_sq(V)
    return (V - 1.0) / 2.0


def success_probability(src: SourceParams) -> float:
    """
    Probability of detecting exactly ``k`` photons in the tapped arm::

        P = (1 - xi^2) xi^(2k) (1 - T_PS)^k / (1 - xi^2 T_PS)^(k + 1)

    The untouched source (``k = 0``, ``T_PS = 1``) returns exactly 1. Degenerate settings (``k >= 1`` with
    ``T_PS = 1`` or with a vacuum input) return 0.0; :func:`subtracted_covariance` is where they are rejected.
    """
    if src.is_baseline:
        return 1.0
    x2 = _xi_sq(src.V)
    k, t = src.k, src.T_PS
    return (1.0 - x2) * x2 ** k * (1.0 - t) ** k / (1.0 - x2 * t) ** (k + 1)


def subtracted_covariance(src: SourceParams) -> SubtractedSource:
    """
    Second moments of the heralded two-mode state, together with its success probability::

        X = 2(1 + k) / (1 - xi^2 T_PS) - 1
        Y = 2(1 + k xi^2 T_PS) / (1 - xi^2 T_PS) - 1
        Z = 2 sqrt(T_PS) xi (1 + k) / (1 - xi^2 T_PS)

    :param src: Source and subtraction parameters
    :return: ``(P, X, Y, Z)``; the untouched source gives exactly ``(1, V, V, sqrt(V^2 - 1))``
    :raises DegenerateSourceError: if the success probability is zero
    """
    V = src.V
    if src.is_baseline:
        return SubtractedSource(P=1.0, X=V, Y=V, Z=math.sqrt((V - 1.0) * (V + 1.0)))

    P = success_probability(src)
    if P <= 0.0:
        reason = "vacuum input" if src.V == 1.0 else "no light reaches the tap (T_PS = 1)"
        raise DegenerateSourceError(src.k, src.T_PS, reason)

    x2 = _xi_sq(V)
    k, t = src.k, src.T_PS
    denom = 1.0 - x2 * t
    X = 2.0 * (1 + k) / denom - 1.0
    Y = 2.0 * (1.0 + k * x2 * t) / denom - 1.0
    Z = 2.0 * math.sqrt(t) * math.sqrt(x2) * (1 + k) / denom
    return SubtractedSource(P=P, X=X, Y=Y, Z=Z)


def optimal_T_PS(V: Number, k: int) -> float:
    """
    The beam-splitter transmittance maximizing the success probability, from stationarity of ``P`` in ``T_PS``:
    ``T* = (k + 1) - k / xi^2``.

    For ``k = 0`` the probability increases monotonically up to ``T_PS = 1``, so the untouched source is returned.

    :param V: EPR variance, in SNU
    :param k: Photons subtracted
    :return: ``T*`` in (0, 1)
    :raises DegenerateSourceError: if ``(k + 1) xi^2 <= k``, where the maximum sits at the boundary ``T_PS -> 0``
    """
    if k < 0:
        raise DomainError(f"Photon number k={k!r} must be non-negative")
    if k == 0:
        return 1.0
    x2 = _xi_sq(V)
    if (k + 1) * x2 <= k:
        raise DegenerateSourceError(k, 0.0, f"no interior maximum for V={V} (needs V > {2 * k + 1})")
    return (k + 1) - k / x2


def optimal_success_probability(V: Number, k: int) -> float:
    """ Success probability at :func:`optimal_T_PS` """
    return success_probability(SourceParams(V=V, k=k, T_PS=optimal_T_PS(V, k)))
