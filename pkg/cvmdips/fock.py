"""
Brute-force check of the closed-form subtraction model in a truncated Fock basis.

The EPR state ``sqrt(1 - xi^2) sum_n xi^n |n, n>`` has its outgoing mode split on a beam splitter; projecting the
tapped port onto ``|k>`` leaves the unnormalized two-mode state ``sum_n d_n |n>_A |n - k>_B`` with::

    d_n = sqrt(1 - xi^2) xi^n sqrt(C(n, k) (1 - T_PS)^k T_PS^(n - k))

Its squared norm is the success probability and its ladder-operator moments are the covariance entries.
"""
import logging
import math
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.special import gammaln, xlogy

from cvmdips.constants import DEFAULT_TRUNCATION_TOL, DEFAULT_VALIDATION_TOL, FOCK_CUTOFF_CAP, VALIDATION_GRID
from cvmdips.data import SourceParams, SubtractedSource, TruncatedBipartiteState, ValidationReport
from cvmdips.errors import (DegenerateSourceError, DomainError, NormalizationError, OracleStructureError,
                            TruncationError)
from cvmdips.source import subtracted_covariance
from cvmdips.utils import parallel_map

log = logging.getLogger(__name__)

NORMALIZATION_MARGIN = 10.0
"""The retained mass must exceed the tail bound by at least this factor"""

STRUCTURE_TOL = 1e-12
"""Absolute slack for moments that vanish by symmetry (after normalization)"""


def cutoff(V: float, tol: float) -> int:
    """
    Smallest ``N`` for which the EPR photon-number tail beyond ``N`` is below `tol`, i.e. ``xi^(2(N + 1)) < tol``.
    """
    if not 0.0 < tol < 1.0:
        raise DomainError(f"Truncation tolerance must lie in (0, 1), got {tol!r}")
    x2 = (V - 1.0) / (V + 1.0)
    if x2 == 0.0:
        return 0
    return int(math.floor(math.log(tol) / math.log(x2)))


def build_projected_state(V: float, T_PS: float, k: int, tol: float = DEFAULT_TRUNCATION_TOL,
                          cap: int = FOCK_CUTOFF_CAP) -> TruncatedBipartiteState:
    """
    Expand the heralded state up to the photon number where the discarded mass falls below `tol`.

    :param V: EPR variance, in SNU
    :param T_PS: Tap transmittance; 1 is only allowed without subtraction
    :param k: Photons detected in the tap
    :param tol: Bound on the discarded probability mass
    :param cap: Largest photon number allowed
    :return: The unnormalized, truncated state
    :raises TruncationError: if more than `cap` photons would be needed
    :raises DegenerateSourceError: if the heralding event is impossible
    """
    src = SourceParams(V=V, k=k, T_PS=T_PS)  # validates the ranges
    if k >= 1 and (T_PS == 1.0 or V == 1.0):
        raise DegenerateSourceError(k, T_PS)

    x2 = (V - 1.0) / (V + 1.0)
    n_max = max(cutoff(V, tol), src.k)
    if n_max > cap:
        raise TruncationError(n_max, cap, tol)
    tail_bound = x2 ** (n_max + 1)

    n = np.arange(src.k, n_max + 1)
    # log(C(n, k)) through gammaln; the binomials overflow long before n_max does
    log_binom = gammaln(n + 1) - gammaln(src.k + 1) - gammaln(n - src.k + 1)
    log_d_sq = (math.log1p(-x2) + xlogy(n, x2) + log_binom
                + xlogy(src.k, 1.0 - T_PS) + xlogy(n - src.k, T_PS))
    coeffs = np.exp(0.5 * log_d_sq)

    log.debug(f"Projected state for V={V}, T_PS={T_PS}, k={k}: N_max={n_max}, tail bound {tail_bound:.3g}")
    return TruncatedBipartiteState(k=src.k, coeffs=coeffs, N_max=n_max, tail_bound=tail_bound)


def _quadratures(dim: int) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """ x = a + a^dag and p = i (a^dag - a) on a Fock space of `dim` levels """
    a = sparse.diags(np.sqrt(np.arange(1, dim, dtype=float)), offsets=1, format="csr")
    ad = a.T.tocsr()
    return (a + ad).tocsr(), (1j * (ad - a)).tocsr()


def _inner(u: sparse.spmatrix, v: sparse.spmatrix) -> complex:
    return complex(u.conj().multiply(v).sum())


def oracle_moments(state: TruncatedBipartiteState) -> SubtractedSource:
    """
    Success probability and normalized second moments of a truncated heralded state.

    The amplitudes are held as a sparse ``dim_A x dim_B`` matrix ``Psi``, so that ``kron(O_A, I) psi`` is
    ``O_A @ Psi`` and ``kron(I, O_B) psi`` is ``Psi @ O_B.T``. Both spaces carry one level above the largest
    occupied one so that ``a^dag`` acts without truncation.

    :return: ``(P, X, Y, Z)`` with ``X = <x_A^2>``, ``Y = <x_B^2>``, ``Z = <x_A x_B>``
    :raises NormalizationError: if the retained mass is below ten times the tail bound
    :raises OracleStructureError: if first moments or the ``x p`` cross moments fail to vanish,
        or ``<p_A p_B> != -Z``
    """
    P = state.norm_sq
    if not P > NORMALIZATION_MARGIN * state.tail_bound:
        raise NormalizationError(f"Retained mass {P:.3g} is within {NORMALIZATION_MARGIN:g}x of the tail bound "
                                 f"{state.tail_bound:.3g}; tighten the truncation tolerance")

    k, n_max = state.k, state.N_max
    dim_a, dim_b = n_max + 2, n_max - k + 2
    n = np.arange(k, n_max + 1)
    psi = sparse.csr_matrix((state.coeffs / math.sqrt(P), (n, n - k)), shape=(dim_a, dim_b), dtype=complex)

    x_a, p_a = _quadratures(dim_a)
    x_b, p_b = _quadratures(dim_b)
    xa_psi, pa_psi = x_a @ psi, p_a @ psi
    xb_psi, pb_psi = psi @ x_b.T, psi @ p_b.T

    X = _inner(xa_psi, xa_psi).real
    Y = _inner(xb_psi, xb_psi).real
    Z = _inner(xa_psi, xb_psi).real

    checks = {
        "<x_A>": _inner(psi, xa_psi), "<p_A>": _inner(psi, pa_psi),
        "<x_B>": _inner(psi, xb_psi), "<p_B>": _inner(psi, pb_psi),
        "<x_A p_B>": _inner(xa_psi, pb_psi), "<p_A x_B>": _inner(pa_psi, xb_psi),
        "<p_A p_B> + Z": _inner(pa_psi, pb_psi) + Z,
    }
    for name, value in checks.items():
        if abs(value) > STRUCTURE_TOL * max(1.0, Z):
            raise OracleStructureError(f"{name} = {value!r} should vanish (k={k}, N_max={n_max})")

    return SubtractedSource(P=P, X=X, Y=Y, Z=Z)


def _relative_error(value: float, reference: float) -> float:
    diff = abs(value - reference)
    return diff / abs(reference) if reference != 0.0 else diff


def validate_against_analytic(V: float, T_PS: float, k: int, tol: float = DEFAULT_VALIDATION_TOL,
                              truncation_tol: float = DEFAULT_TRUNCATION_TOL) -> ValidationReport:
    """
    Run the closed forms and the oracle at one point and compare them.

    :param tol: Relative tolerance for the comparison
    :param truncation_tol: Tail bound for the Fock expansion
    :return: Relative errors of ``P, X, Y, Z`` and whether all of them are within `tol`; ``P`` also passes if
        it is within the tail bound in absolute terms
    """
    analytic = subtracted_covariance(SourceParams(V=V, k=k, T_PS=T_PS))
    state = build_projected_state(V, T_PS, k, tol=truncation_tol)
    oracle = oracle_moments(state)

    err_P, err_X, err_Y, err_Z = (_relative_error(o, a) for o, a in zip(oracle, analytic))
    p_ok = err_P <= tol or abs(oracle.P - analytic.P) <= state.tail_bound
    passed = p_ok and max(err_X, err_Y, err_Z) <= tol
    if not passed:
        log.warning(f"Oracle mismatch at V={V}, T_PS={T_PS}, k={k}: "
                    f"errors P={err_P:.3g} X={err_X:.3g} Y={err_Y:.3g} Z={err_Z:.3g}")
    return ValidationReport(V=V, T_PS=T_PS, k=k, err_P=err_P, err_X=err_X, err_Y=err_Y, err_Z=err_Z,
                            passed=passed, N_max=state.N_max)


def _validate_point(args: tuple) -> ValidationReport:
    return validate_against_analytic(*args)


def validate_grid(grid: Mapping[str, Sequence] | None = None,tol: float = DEFAULT_VALIDATION_TOL,
                  truncation_tol: float = DEFAULT_TRUNCATION_TOL, jobs: int = 1) -> list[ValidationReport]:
    """
    Validate every point of the product grid ``V x T_PS x k`` (in that nesting order).

    :param grid: Mapping with keys ``V``, ``T_PS`` and ``k``; defaults to the acceptance grid
    :param jobs: Worker processes; 0 means one per physical core
    """
    grid = grid if grid is not None else VALIDATION_GRID
    points: Iterable[tuple] = [(V, t, k, tol, truncation_tol)
                               for V in grid["V"] for t in grid["T_PS"] for k in grid["k"]]
    reports = parallel_map(_validate_point, list(points), jobs=jobs)
    log.info(f"Validated {len(reports)} points, {sum(r.passed for r in reports)} passed")
    return reports
