"""
Reduction of the two links to the relay, the relay's Bell measurement and Bob's displacement to an equivalent
one-way channel acting on Alice's mode.
"""
import logging
import math

from cvmdips.data import EffectiveChannel, LinkParams
from cvmdips.errors import DomainError, PhysicalityError
from cvmdips.typing import Number

log = logging.getLogger(__name__)


def transmittance(L: Number, loss_coeff: Number = 0.2) -> float:
    """
    :param L: Fiber length, in km
    :param loss_coeff: Attenuation, in dB/km
    :return: ``10^(-loss_coeff * L / 10)``
    """
    if not L >= 0.0:
        raise DomainError(f"Fiber length L={L!r} must be non-negative")
    return 10.0 ** (-loss_coeff * L / 10.0)


def displacement_gain_sq(V_B: Number, T_B: Number) -> float:
    """
    The squared gain of Bob's displacement that minimizes the equivalent excess noise,
    ``g^2 = 2 (V_B - 1) / (T_B (V_B + 1))``.

    :raises DomainError: if ``V_B <= 1`` (zero gain, no key possible) or ``T_B <= 0``
    """
    if not V_B > 1.0:
        raise DomainError(f"Bob's EPR variance V_B={V_B!r} must exceed 1 for a non-zero displacement gain")
    if not T_B > 0.0:
        raise DomainError(f"Transmittance T_B={T_B!r} must be positive")
    return 2.0 * (V_B - 1.0) / (T_B * (V_B + 1.0))


def equivalent_excess_noise_general(V_B: Number, g: Number, T_A: Number, T_B: Number,
                                    eps_A: Number, eps_B: Number) -> float:
    """
    Equivalent thermal excess noise of the one-way channel for an arbitrary displacement gain `g`::

        eps_th = (T_B / T_A) (sqrt(2 / (T_B g^2)) sqrt(V_B - 1) - sqrt(V_B + 1))^2
                 + (T_B / T_A) (chi_B - 1) + chi_A + 1

    with ``chi_X = 1 / T_X - 1 + eps_X``. The first (mismatch) term vanishes at
    :func:`displacement_gain_sq`.
    """
    if not (T_A > 0.0 and T_B > 0.0):
        raise DomainError(f"Transmittances must be positive, got T_A={T_A!r}, T_B={T_B!r}")
    if not g > 0.0:
        raise DomainError(f"Displacement gain g={g!r} must be positive")
    chi_A = 1.0 / T_A - 1.0 + eps_A
    chi_B = 1.0 / T_B - 1.0 + eps_B
    mismatch = (math.sqrt(2.0 / (T_B * g * g)) * math.sqrt(V_B - 1.0) - math.sqrt(V_B + 1.0)) ** 2
    return (T_B / T_A) * mismatch + (T_B / T_A) * (chi_B - 1.0) + chi_A + 1.0


def effective_channel(link: LinkParams) -> EffectiveChannel:
    """
    Build the equivalent one-way channel at the optimal displacement gain.

    :param link: Links and detector parameters
    :return: Transmittances, gain and every noise term (see :class:`~cvmdips.data.EffectiveChannel`)
    :raises DomainError: if Alice's link transmits nothing (underflow at very long distances)
    :raises PhysicalityError: if the normalized transmittance exceeds 1, which happens when Bob's link is much
        longer than Alice's
    """
    T_A = transmittance(link.L_AC, link.loss_coeff)
    T_B = transmittance(link.L_BC, link.loss_coeff)
    if T_A == 0.0:
        raise DomainError(f"Infinite loss on Alice's link (L_AC={link.L_AC} km)")
    g_sq = displacement_gain_sq(link.V_B, T_B)
    T = T_A * g_sq / 2.0
    if T > 1.0:
        raise PhysicalityError("normalized transmittance T", T, bound=1.0, relation="<=")

    eps_th = (T_B / T_A) * (link.eps_B - 2.0) + link.eps_A + 2.0 / T_A
    chi_line = (1.0 - T) / T + eps_th
    chi_hom = (link.v_el + 1.0 - link.eta) / link.eta
    chi_t = chi_line + 2.0 * chi_hom / T
    log.debug(f"Channel for L_AC={link.L_AC}, L_BC={link.L_BC}: T={T:.6g}, eps_th={eps_th:.6g}, chi_t={chi_t:.6g}")
    return EffectiveChannel(T_A=T_A, T_B=T_B, g_sq=g_sq, T=T, eps_th=eps_th,
                            chi_line=chi_line, chi_hom=chi_hom, chi_t=chi_t)
