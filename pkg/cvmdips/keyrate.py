"""
Asymptotic secret key rate under one-mode collective Gaussian attacks with reverse reconciliation, and the
repeaterless (PLOB) bound it is compared against.
"""
import logging
import math

import numpy as np

from cvmdips.channel import effective_channel
from cvmdips.constants import CLAMP_TOL
from cvmdips.data import BipartiteCovariance, ProtocolConfig, RateReport
from cvmdips.errors import DomainError, PhysicalityError
from cvmdips.gaussian import check_physical, conditional_eigenvalue, entropy_G, symplectic_pair
from cvmdips.source import subtracted_covariance
from cvmdips.typing import Number

log = logging.getLogger(__name__)


def _conditioned(cfg: ProtocolConfig) -> tuple[float, BipartiteCovariance]:
    src = subtracted_covariance(cfg.source)
    ch = effective_channel(cfg.link)
    cov = BipartiteCovariance(a=src.X, b=ch.T * (src.Y + ch.chi_t), c=math.sqrt(ch.T) * src.Z)
    return src.P, check_physical(cov)


def conditioned_covariance(cfg: ProtocolConfig) -> BipartiteCovariance:
    """
    Alice-Bob covariance after the equivalent one-way channel: ``a = X``, ``b = T (Y + chi_t)``,
    ``c = sqrt(T) Z``.

    :raises DegenerateSourceError: for a zero-probability subtraction
    :raises PhysicalityError: if the result violates the vacuum bound
    """
    return _conditioned(cfg)[1]


def mutual_information(cov: BipartiteCovariance) -> float:
    """
    Alice-Bob mutual information for heterodyne detection on both quadratures, in bits::

        I_AB = log2((a + 1) / (a + 1 - c^2 / (b + 1)))
    """
    a, b, c = cov
    return math.log2((a + 1.0) / (a + 1.0 - c * c / (b + 1.0)))


def mutual_information_quadratures(cov: BipartiteCovariance) -> float:
    """
    The same quantity as :func:`mutual_information`, summed quadrature by quadrature from the measured variances
    ``V_AM = (a + 1) / 2`` and ``V_AM|BM = V_AM - c^2 / (4 V_BM)``.
    """
    a, b, c = cov
    v_am = (a + 1.0) / 2.0
    v_bm = (b + 1.0) / 2.0
    v_am_bm = v_am - c * c / (4.0 * v_bm)
    per_quadrature = 0.5 * np.log2(np.array([v_am, v_am]) / v_am_bm)
    return float(per_quadrature.sum())


def _holevo_terms(cov: BipartiteCovariance) -> tuple[float, float, float, float]:
    lambda1, lambda2 = symplectic_pair(cov)
    lambda3 = conditional_eigenvalue(cov)
    g1, g2, g3 = entropy_G(np.array([lambda1 - 1.0, lambda2 - 1.0, lambda3 - 1.0]) / 2.0)
    chi = float(g1 + g2 - g3)
    if chi < -CLAMP_TOL:
        raise PhysicalityError("Holevo bound", chi, bound=0.0)
    return lambda1, lambda2, lambda3, max(chi, 0.0)


def holevo_bound(cov: BipartiteCovariance) -> float:
    """
    Holevo bound on Eve's information about Bob's data, in bits:
    ``G((lambda1 - 1) / 2) + G((lambda2 - 1) / 2) - G((lambda3 - 1) / 2)``.
    """
    return _holevo_terms(cov)[3]


def secret_key_rate(cfg: ProtocolConfig) -> RateReport:
    """
    Key rate per use of the source, ``K = P (beta I_AB - chi_BE)``.

    :param cfg: The operating point
    :return: The full report; ``K_raw`` keeps the sign, ``K`` is clamped at zero
    :raises DegenerateSourceError: for a zero-probability subtraction
    :raises PhysicalityError: if the conditioned state is unphysical
    """
    P, cov = _conditioned(cfg)
    I_AB = mutual_information(cov)
    lambda1, lambda2, lambda3, chi_BE = _holevo_terms(cov)
    K_raw = P * (cfg.beta * I_AB - chi_BE)
    log.debug(f"V={cfg.source.V}, k={cfg.source.k}, T_PS={cfg.source.T_PS:.6g}, L_AC={cfg.link.L_AC}, "
              f"L_BC={cfg.link.L_BC}: I_AB={I_AB:.6g}, chi_BE={chi_BE:.6g}, K_raw={K_raw:.6g}")
    return RateReport(P=P, cov=cov, I_AB=I_AB, lambda1=lambda1, lambda2=lambda2, lambda3=lambda3,
                      chi_BE=chi_BE, K_raw=K_raw, K=max(K_raw, 0.0))


def plob_bound(L_AB: Number, loss_coeff: Number = 0.2) -> float:
    """
    Repeaterless secret key capacity of a pure-loss fiber of the given length, ``-log2(1 - T)``.

    :return: Bits per channel use; ``inf`` at zero length
    """
    if not L_AB >= 0.0:
        raise DomainError(f"Distance L_AB={L_AB!r} must be non-negative")
    T = 10.0 ** (-loss_coeff * L_AB / 10.0)
    if T >= 1.0:
        return math.inf
    return -math.log1p(-T) / math.log(2.0)
