from enum import Enum, IntEnum

from cvmdips.errors import DomainError
from cvmdips.typing import LayoutName

CLAMP_TOL = 1e-9
"""Slack below the vacuum level (or below zero, for entropies) absorbed as rounding noise; anything further is rejected"""

DEFAULT_LOSS_DB_PER_KM = 0.2
"""Fiber attenuation coefficient, in dB/km"""

FOCK_CUTOFF_CAP = 10_000
"""Largest photon number the truncated Fock oracle is allowed to keep"""

DEFAULT_TRUNCATION_TOL = 1e-16
"""Default bound on the probability mass discarded by the Fock oracle"""

DEFAULT_VALIDATION_TOL = 1e-8
"""Default relative tolerance when comparing the oracle against the closed forms"""

VALIDATION_GRID = {
    "V": (3.0, 15.0, 60.0),
    "T_PS": (0.5, 0.857, 0.95),
    "k": (0, 1, 2, 3),
}
"""Acceptance grid for the oracle comparison"""

BRACKET_START_KM = 1.0
"""First upper bracket tried when searching for a distance root; doubled until the sign changes"""

MAX_BRACKET_KM = 500.0
"""Distance beyond which a root search gives up"""

DEFAULT_TOL_KM = 0.01
"""Default bisection tolerance for distances"""

DEFAULT_TOL_ETA = 1e-6
"""Default bisection tolerance for detector efficiencies"""

VARIANCE_LIMITS = (1.1, 1e4)
"""Admissible range of EPR variances for the variance optimizer"""

VARIANCE_SEED_POINTS = 200
"""Size of the coarse grid seeding the golden-section search over V"""

SIGNIFICANT_DIGITS = 9
"""Significant digits written for every float in tabular output"""

LOG_FORMAT = "%(asctime)s [%(name)s @ %(lineno)s][%(levelname)8s] %(message)s"
"""Format of every log record emitted through the command line front end"""


class Layout(Enum):
    """
    Where the untrusted relay sits on the Alice-Bob line.
    """

    SYMMETRIC = "symmetric"
    """Relay halfway: L_AC = L_BC = L_AB / 2"""

    EXTREME_ASYM = "extreme-asym"
    """Relay co-located with Bob: L_AC = L_AB, L_BC = 0"""

    def split(self, L_AB: float) -> tuple[float, float]:
        """
        :param L_AB: Total Alice-Bob distance, in km
        :return: The pair (L_AC, L_BC) for this layout
        """
        if self is Layout.SYMMETRIC:
            return L_AB / 2, L_AB / 2
        return L_AB, 0.0

    @classmethod
    def from_str(cls, value: "LayoutName | str | Layout") -> "Layout":
        if isinstance(value, Layout):
            return value
        # accept the python-ish spelling too
        normalized = str(value).strip().lower().replace("_", "-")
        if normalized in ("extreme-asymmetric", "asym", "extreme"):
            normalized = cls.EXTREME_ASYM.value
        try:
            return cls(normalized)
        except ValueError:
            raise DomainError(f"Unknown layout '{value}'; options: {[m.value for m in cls]}") from None


class TpsRule(Enum):
    """
    How the beam-splitter transmittance of the subtraction stage is chosen when it is not given explicitly.
    """

    OPTIMAL = "optimal"
    """Maximize the success probability (closed form); the no-subtraction baseline T_PS = 1 when k = 0"""

    RATE = "rate"
    """Maximize the secret key rate numerically at the configured operating point"""


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


class ExitCode(IntEnum):
    """
    Process exit statuses of the command line front end.
    """

    OK = 0
    USAGE = 1
    DOMAIN = 2
    NO_RESULT = 3


DEFAULTS = {
    "V": 15.0,
    "k": 0,
    "T_PS": TpsRule.OPTIMAL.value,
    "L": 20.0,
    "layout": Layout.EXTREME_ASYM.value,
    "loss_coeff": DEFAULT_LOSS_DB_PER_KM,
    "eps_A": 0.01,
    "eps_B": 0.01,
    "eta": 0.975,
    "v_el": 0.01,
    "beta": 0.96,
    "tol_km": DEFAULT_TOL_KM,
    "tol_eta": DEFAULT_TOL_ETA,
    "V_min": 1.5,
    "V_max": 500.0,
}
"""
Built-in configuration: the parameter set shared by the figure captions (excess noise 0.01 on both links,
homodyne efficiency 0.975, electronic noise 0.01, reconciliation efficiency 96%) plus study settings.
"""
