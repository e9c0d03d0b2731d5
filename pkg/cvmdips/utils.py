import json
import logging
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from multiprocessing import Pool
from typing import Callable, Sequence, TypeVar

import numpy as np
import psutil
from scipy import optimize

from cvmdips.constants import SIGNIFICANT_DIGITS
from cvmdips.errors import DomainError, NoRootError
from cvmdips.typing import Number

T = TypeVar("T")
R = TypeVar("R")


def limit(lower: Number, value: Number, upper: Number) -> Number:
    """ Convenience function to constrain a given value between a lower and upper bound. """
    return max(lower, min(value, upper))


def resolve_jobs(jobs: int) -> int:
    """
    :param jobs: Requested worker count; 0 means one per physical core
    :return: A positive worker count
    """
    if jobs < 0:
        raise DomainError(f"Number of jobs must be >= 0, got {jobs}")
    if jobs == 0:
        # cpu_count may report None on exotic platforms
        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return jobs


def parallel_map(func: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    """
    Apply `func` to every item, in input order, optionally across a pool of worker processes.
    `func` must be picklable (a module-level function) when ``jobs != 1``.
    """
    workers = min(resolve_jobs(jobs), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    logging.getLogger(__name__).debug(f"Mapping {len(items)} items over {workers} processes")
    with Pool(processes=workers) as pool:
        return pool.map(func, items)


def bisect_root(func: Callable[[float], float], lower: float, upper: float, tol: float) -> float:
    """
    Root of `func` in ``[lower, upper]`` by bisection, accurate to better than `tol`.

    :raises NoRootError: if `func` has the same sign at both ends
    """
    f_lo, f_hi = func(lower), func(upper)
    if f_lo == 0.0:
        return lower
    if f_hi == 0.0:
        return upper
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise NoRootError(f"No sign change on [{lower:.6g}, {upper:.6g}] "
                          f"(f = {f_lo:.3g} and {f_hi:.3g})")
    return optimize.bisect(func, lower, upper, xtol=tol / 2.0)


def golden_maximize(func: Callable[[float], float], lower: float, middle: float, upper: float,
                    xtol: float = 1e-4) -> tuple[float, float]:
    """
    Maximize a unimodal `func` by golden-section search inside the bracket ``lower < middle < upper``.
    If `middle` does not strictly beat both ends (a flat or edge optimum), it is returned as is.

    :param xtol: Relative tolerance on the abscissa
    :return: ``(x*, func(x*))``
    """
    f_mid = func(middle)
    if not (f_mid > func(lower) and f_mid > func(upper)):
        return middle, f_mid
    res = optimize.minimize_scalar(lambda x: -func(x), bracket=(lower, middle, upper), method="golden",
                                   options={"xtol": xtol})
    x = limit(lower, float(res.x), upper)
    f_x = func(x)
    # the clamp may move x off the search optimum
    return (x, f_x) if f_x >= f_mid else (middle, f_mid)


def format_number(value) -> str:
    """
    Fixed textual form for tabular output: integers verbatim, floats with nine significant digits (scientific
    notation below 1e-4 in magnitude), ``None`` as an empty cell.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value == 0.0:
            return "0"
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


class CvmdipsJSONEncoder(json.JSONEncoder):
    """
    A custom encoder for the library's dataclasses, Enums and numpy scalars.

    To use it, pass a reference to the class to the `cls` argument of `json.dump` or `json.dumps`).
    For example, `json.dumps(report, cls=CvmdipsJSONEncoder)`
    """

    def default(self, o):
        # local import to avoid circular dependencies
        from cvmdips.data import RateReport, RunConfig

        if isinstance(o, RateReport):
            return o.as_dict()
        elif isinstance(o, RunConfig):
            return dict(o)
        elif is_dataclass(o):
            return asdict(o)
        elif isinstance(o, Enum):
            return o.value
        elif isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, np.floating):
            return float(o)
        elif isinstance(o, np.bool_):
            return bool(o)
        elif isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)
