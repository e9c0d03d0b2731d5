import logging
import math
import pprint
from collections import UserDict
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

import numpy as np

from cvmdips.constants import CLAMP_TOL, DEFAULTS, DEFAULT_LOSS_DB_PER_KM, Layout, TpsRule
from cvmdips.errors import DomainError, UnknownFieldError


@dataclass(frozen=True)
class BipartiteCovariance:
    """
    Symmetric two-mode covariance matrix in block form, in shot-noise units (vacuum variance = 1)::

        [[a*I2,  c*Z2],
         [c*Z2,  b*I2]]     with I2 = diag(1, 1), Z2 = diag(1, -1)

    :param a: Quadrature variance of the first (Alice's) mode
    :param b: Quadrature variance of the second (Bob's) mode
    :param c: Magnitude of the cross correlation; the sign pattern lives in ``Z2``
    """
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b"):
            value = getattr(self, name)
            if not value >= 1.0 - CLAMP_TOL:  # also rejects NaN
                raise DomainError(f"Covariance entry {name}={value!r} is below the vacuum level")
        if not self.c >= 0.0:
            raise DomainError(f"Covariance entry c={self.c!r} must be non-negative")

    def as_matrix(self) -> np.ndarray:
        """ The full 4x4 matrix, quadrature order (x1, p1, x2, p2) """
        i2 = np.eye(2)
        z2 = np.diag([1.0, -1.0])
        return np.block([[self.a * i2, self.c * z2],
                         [self.c * z2, self.b * i2]])

    def __iter__(self):
        yield self.a
        yield self.b
        yield self.c


@dataclass(frozen=True)
class SourceParams:
    """
    Alice's entangled source followed by the photon-subtraction stage.

    :param V: Variance of the two-mode squeezed (EPR) state, in SNU
    :param k: Number of photons subtracted; 0 together with ``T_PS = 1`` is the plain protocol
    :param T_PS: Transmittance of the tapping beam splitter
    """
    V: float
    k: int = 0
    T_PS: float = 1.0

    def __post_init__(self):
        if not self.V >= 1.0:
            raise DomainError(f"EPR variance V={self.V!r} must be >= 1")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise DomainError(f"Photon number k={self.k!r} must be a non-negative integer")
        object.__setattr__(self, "k", int(self.k))
        if not 0.0 < self.T_PS <= 1.0:
            raise DomainError(f"Beam-splitter transmittance T_PS={self.T_PS!r} must lie in (0, 1]")

    @property
    def is_baseline(self) -> bool:
        """ Whether this is the untouched source (no beam splitter, nothing subtracted) """
        return self.k == 0 and self.T_PS == 1.0


@dataclass(frozen=True)
class SubtractedSource:
    """
    Second moments of the photon-subtracted bipartite state, and the probability of heralding it.

    :param P: Success probability of detecting exactly ``k`` photons in the tapped arm
    :param X: Variance of Alice's retained mode
    :param Y: Variance of the mode sent to the relay
    :param Z: Cross correlation between the two
    """
    P: float
    X: float
    Y: float
    Z: float

    @property
    def covariance(self) -> BipartiteCovariance:
        return BipartiteCovariance(self.X, self.Y, self.Z)

    def __iter__(self):
        yield self.P
        yield self.X
        yield self.Y
        yield self.Z


@dataclass(frozen=True)
class LinkParams:
    """
    The two fiber links to the relay and the relay's detectors.

    :param L_AC: Alice-relay fiber length, in km
    :param L_BC: Bob-relay fiber length, in km
    :param loss_coeff: Fiber attenuation, in dB/km
    :param eps_A: Thermal excess noise on Alice's link, in SNU
    :param eps_B: Thermal excess noise on Bob's link, in SNU
    :param V_B: Variance of Bob's EPR state, in SNU
    :param eta: Quantum efficiency of the relay's homodyne detectors
    :param v_el: Electronic noise of the relay's homodyne detectors, in SNU
    """
    L_AC: float
    L_BC: float = 0.0
    loss_coeff: float = DEFAULT_LOSS_DB_PER_KM
    eps_A: float = 0.01
    eps_B: float = 0.01
    V_B: float = 15.0
    eta: float = 0.975
    v_el: float = 0.01

    def __post_init__(self):
        for name in ("L_AC", "L_BC", "loss_coeff", "eps_A", "eps_B", "v_el"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise DomainError(f"{name}={value!r} must be non-negative")
        if not self.V_B >= 1.0:
            raise DomainError(f"Bob's EPR variance V_B={self.V_B!r} must be >= 1")
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"Detector efficiency eta={self.eta!r} must lie in (0, 1]")

    @property
    def L_AB(self) -> float:
        """ Total Alice-Bob fiber length, in km """
        return self.L_AC + self.L_BC


@dataclass(frozen=True)
class EffectiveChannel:
    """
    The equivalent one-way channel seen by Alice's mode once the relay's Bell measurement and Bob's displacement
    are folded in.

    :param T_A: Transmittance of Alice's link
    :param T_B: Transmittance of Bob's link
    :param g_sq: Squared gain of Bob's displacement (the value minimizing the equivalent excess noise)
    :param T: Normalized transmittance, ``T_A * g_sq / 2``
    :param eps_th: Equivalent thermal excess noise, in SNU
    :param chi_line: Channel-added noise, ``(1 - T) / T + eps_th``
    :param chi_hom: Detection-added noise of one homodyne detector
    :param chi_t: Total noise referred to the channel input, ``chi_line + 2 * chi_hom / T``
    """
    T_A: float
    T_B: float
    g_sq: float
    T: float
    eps_th: float
    chi_line: float
    chi_hom: float
    chi_t: float


@dataclass(frozen=True)
class ProtocolConfig:
    """
    Everything the key-rate engine needs for one operating point.

    :param source: Alice's source and subtraction stage
    :param link: The fiber links and relay detectors (carries Bob's EPR variance)
    :param beta: Reconciliation efficiency
    """
    source: SourceParams
    link: LinkParams
    beta: float = 0.96

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"Reconciliation efficiency beta={self.beta!r} must lie in [0, 1]")

    @classmethod
    def from_values(cls, V: float, k: int = 0, T_PS: float = 1.0, L_AC: float = 0.0, L_BC: float = 0.0,
                    loss_coeff: float = DEFAULT_LOSS_DB_PER_KM, eps_A: float = 0.01, eps_B: float = 0.01,
                    eta: float = 0.975, v_el: float = 0.01, beta: float = 0.96) -> "ProtocolConfig":
        """
        Flat constructor, with Bob's variance tied to Alice's (``V_A = V_B = V``).
        """
        return cls(source=SourceParams(V=V, k=k, T_PS=T_PS),
                   link=LinkParams(L_AC=L_AC, L_BC=L_BC, loss_coeff=loss_coeff, eps_A=eps_A, eps_B=eps_B,
                                   V_B=V, eta=eta, v_el=v_el),
                   beta=beta)

    @property
    def L_AB(self) -> float:
        return self.link.L_AB

    def at_distance(self, L_AB: float, layout: Layout) -> "ProtocolConfig":
        """ A copy with the link lengths reassigned from a total distance and a relay placement """
        L_AC, L_BC = layout.split(L_AB)
        return replace(self, link=replace(self.link, L_AC=L_AC, L_BC=L_BC))

    def flat(self) -> dict[str, Any]:
        """ All parameters as a single flat mapping, used for provenance headers """
        out = {f.name: getattr(self.source, f.name) for f in fields(self.source)}
        out.update({f.name: getattr(self.link, f.name) for f in fields(self.link)})
        out["beta"] = self.beta
        return out


@dataclass(frozen=True)
class RateReport:
    """A report of one secret-key-rate evaluation

    :param P: Success probability of the subtraction (1 for the plain protocol)
    :param cov: The conditioned Alice-Bob covariance the entropies are computed from
    :param I_AB: Alice-Bob mutual information, in bits
    :param lambda1: Larger symplectic eigenvalue of ``cov``
    :param lambda2: Smaller symplectic eigenvalue of ``cov``
    :param lambda3: Symplectic eigenvalue of Alice's mode conditioned on Bob's heterodyne outcome
    :param chi_BE: Holevo bound on Eve's information about Bob's data, in bits
    :param K_raw: Signed key rate per protocol use, ``P * (beta * I_AB - chi_BE)``
    :param K: ``max(K_raw, 0)``
    """
    P: float
    cov: BipartiteCovariance
    I_AB: float
    lambda1: float
    lambda2: float
    lambda3: float
    chi_BE: float
    K_raw: float
    K: float

    def get(self, name: str) -> float:
        """
        :param name: A field name or one of the covariance entries ``a``, ``b``, ``c``
        :return: The named value
        :raises UnknownFieldError: for anything else
        """
        if name in ("a", "b", "c"):
            return getattr(self.cov, name)
        if name == "cov" or name not in self.__dataclass_fields__:
            raise UnknownFieldError(self.__class__, RATE_FIELDS, name)
        return getattr(self, name)

    def as_dict(self) -> dict[str, float]:
        return {name: self.get(name) for name in RATE_FIELDS}


RATE_FIELDS = ("P", "a", "b", "c", "I_AB", "lambda1", "lambda2", "lambda3", "chi_BE", "K_raw", "K")
"""Every scalar a `RateReport` exposes, in output order"""


@dataclass(frozen=True)
class TruncatedBipartiteState:
    """
    The heralded state after ``k`` photons were detected in the tapped arm, kept unnormalized:
    ``sum_n coeffs[n - k] |n> (x) |n - k>`` for ``n = k .. N_max``.

    :param k: Photons projected out
    :param coeffs: Real amplitudes, first entry belonging to ``n = k``
    :param N_max: Largest photon number kept in Alice's mode
    :param tail_bound: Upper bound on the probability mass discarded by the truncation
    """
    k: int
    coeffs: np.ndarray = field(repr=False)
    N_max: int
    tail_bound: float

    @property
    def norm_sq(self) -> float:
        """ Retained probability mass (the truncated success probability) """
        return float(np.dot(self.coeffs, self.coeffs))


@dataclass(frozen=True)
class ValidationReport:
    """
    Comparison of the closed-form subtraction model with the Fock-space oracle at one parameter point.
    Errors are relative to the closed-form value.
    """
    V: float
    T_PS: float
    k: int
    err_P: float
    err_X: float
    err_Y: float
    err_Z: float
    passed: bool
    N_max: int = 0

    @property
    def max_error(self) -> float:
        return max(self.err_P, self.err_X, self.err_Y, self.err_Z)


class RunConfig(UserDict):
    """
    A subclass of UserDict holding every input of a command line run, keyed as in
    :data:`cvmdips.constants.DEFAULTS`.

    Usage of this class adds validation to ensure only the pre-defined keys can be set, converts values to the
    type of their default, and records where each value came from (``default``, ``file`` or ``flag``).
    """

    def __init__(self, *args, **kwargs):
        self.provenance: dict[str, str] = {}
        super().__init__(*args, **kwargs)
        for key in DEFAULTS:
            if key not in self:
                # when it's missing, use the default
                self.data[key] = self.__missing__(key)
                self.provenance[key] = "default"

    def __missing__(self, key):
        if key not in DEFAULTS:
            raise UnknownFieldError(self.__class__, list(DEFAULTS), key)
        return DEFAULTS[key]

    def __setitem__(self, key, item):
        # don't allow to set any values that aren't defined in the defaults
        if key not in DEFAULTS:
            raise UnknownFieldError(self.__class__, list(DEFAULTS), key)
        super().__setitem__(key, self._coerce(key, item))
        self.provenance[key] = "flag"

    def layer(self, values: Mapping[str, Any], source: str) -> "RunConfig":
        """
        Apply a set of overrides, tagging each of them with its source.

        :param values: Mapping of configuration keys to new values
        :param source: Provenance label, e.g. ``file`` or ``flag``
        :return: This object, for chaining
        """
        for key, value in values.items():
            self[key] = value
            self.provenance[key] = source
        return self

    @staticmethod
    def _coerce(key: str, value: Any) -> Any:
        default = DEFAULTS[key]
        if key == "T_PS":
            # either a rule name or a number
            if isinstance(value, str):
                try:
                    return TpsRule(value.strip().lower()).value
                except ValueError:
                    pass
            try:
                return float(value)
            except (TypeError, ValueError):
                raise DomainError(f"T_PS must be a number or one of {[r.value for r in TpsRule]}, "
                                  f"got {value!r}") from None
        if key == "layout":
            return Layout.from_str(value).value
        if isinstance(default, bool) or not isinstance(default, (int, float)):
            return value
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise DomainError(f"{key} must be a number, got {value!r}") from None
        if isinstance(default, int):
            if not as_float.is_integer():
                raise DomainError(f"{key} must be an integer, got {value!r}")
            return int(as_float)
        return as_float

    @property
    def layout(self) -> Layout:
        return Layout.from_str(self["layout"])

    @property
    def tps_rule(self) -> TpsRule | None:
        """ The rule picking T_PS, or None when an explicit number was configured """
        value = self["T_PS"]
        return TpsRule(value) if isinstance(value, str) else None

    def to_protocol(self) -> ProtocolConfig:
        """
        Resolve the flat configuration into a :class:`ProtocolConfig`: the total distance is split according to
        the layout and a T_PS rule, if any, is evaluated for the configured (V, k).
        """
        L_AC, L_BC = self.layout.split(self["L"])
        rule = self.tps_rule
        cfg = ProtocolConfig.from_values(V=self["V"], k=self["k"], T_PS=1.0 if rule else self["T_PS"],
                                         L_AC=L_AC, L_BC=L_BC, loss_coeff=self["loss_coeff"],
                                         eps_A=self["eps_A"], eps_B=self["eps_B"], eta=self["eta"],
                                         v_el=self["v_el"], beta=self["beta"])
        if rule is not None:
            # local import to avoid circular dependencies
            from cvmdips.studies import resolve_tps
            cfg = resolve_tps(cfg, rule)
        logging.getLogger(__name__).debug(f"Resolved run configuration:\n{pprint.pformat(cfg.flat())}")
        return cfg

    def describe(self) -> dict[str, str]:
        """ Every key mapped to ``"value (source)"``, in schema order """
        out = {}
        for key in DEFAULTS:
            value = self[key]
            if isinstance(value, float) and math.isfinite(value):
                value = repr(value)
            out[key] = f"{value} ({self.provenance.get(key, 'default')})"
        return out
