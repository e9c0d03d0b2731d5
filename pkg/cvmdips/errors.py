from typing import Iterable


class CvmdipsError(Exception):
    """
    Base class for every error raised by this library. Subclasses set ``exit_code``, the status the command line
    front end terminates with when the error reaches it.
    """
    exit_code = 2


class DomainError(CvmdipsError, ValueError):
    """
    An input lies outside the domain of the formula it is passed to (e.g., a variance below the vacuum level).
    """
    exit_code = 2


class DegenerateSourceError(DomainError):
    """
    The photon subtraction has zero success probability for the requested parameters
    (``k >= 1`` with ``T_PS = 1``, or a vacuum input with ``k >= 1``).
    """

    def __init__(self, k: int, T_PS: float, reason: str = "success probability is zero"):
        self.k = k
        self.T_PS = T_PS
        super().__init__(f"Degenerate subtraction (k={k}, T_PS={T_PS}): {reason}")


class PhysicalityError(CvmdipsError, ArithmeticError):
    """
    A covariance matrix (or a quantity derived from one) violates the vacuum noise floor by more than the
    clamp tolerance. Usually points to a modeling bug or to parameters outside the model's range of validity.
    """
    exit_code = 2

    def __init__(self, quantity: str, value: float, bound: float = 1.0, relation: str = ">="):
        self.quantity = quantity
        self.value = value
        self.bound = bound
        super().__init__(f"Unphysical {quantity} = {value!r} (must be {relation} {bound})")


class TruncationError(CvmdipsError):
    """
    The photon-number cut-off required for the requested tail tolerance exceeds the configured cap.
    """
    exit_code = 2

    def __init__(self, required: int, cap: int, tol: float):
        self.required = required
        self.cap = cap
        super().__init__(f"Truncation at N_max={required} needed for tol={tol:g}, above the cap of {cap}")


class NormalizationError(CvmdipsError):
    """
    The retained probability mass of a truncated state is too small, relative to the discarded tail,
    for its normalized moments to be trusted.
    """
    exit_code = 2


class OracleStructureError(CvmdipsError):
    """
    A truncated Fock state lacks a symmetry its construction guarantees (vanishing first moments, the sign
    structure of the cross correlations). Indicates a bug in the oracle rather than in the closed forms.
    """
    exit_code = 2


class NoKeyError(CvmdipsError):
    """
    No positive secret key exists where one was demanded (e.g., a threshold search anchored at a negative rate).
    """
    exit_code = 3


class NoRootError(CvmdipsError):
    """
    A bisection bracket could not be established: the function never changed sign within the search range.
    """
    exit_code = 3


class UsageError(CvmdipsError):
    """
    The command line invocation cannot be carried out as given (e.g., an unreadable configuration file).
    """
    exit_code = 1


class UnknownFieldError(CvmdipsError, KeyError):
    """
    Raised when the user attempts to get/set a non-existent configuration key, sweep axis, or output field.
    """
    exit_code = 1

    def __init__(self, cls: type | str, valid_names: Iterable[str], attempted_name: str):
        name = cls if isinstance(cls, str) else cls.__name__
        self.attempted_name = attempted_name
        self.valid_names = list(valid_names)
        super().__init__(f"'{attempted_name}' not in {name} spec; options: {self.valid_names}")

    def __str__(self):
        # KeyError would otherwise repr() the message
        return self.args[0]
