"""
Parameter sweeps, optimizers and threshold searches on top of the key-rate engine.

Root searches work on the signed rate ``K_raw``; a search bracket is only accepted where ``K_raw`` changes sign.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence, get_args

import numpy as np

from cvmdips.constants import (BRACKET_START_KM, DEFAULT_TOL_ETA, DEFAULT_TOL_KM, MAX_BRACKET_KM, VARIANCE_LIMITS,
                               VARIANCE_SEED_POINTS, Layout, TpsRule)
from cvmdips.data import RATE_FIELDS, ProtocolConfig
from cvmdips.errors import CvmdipsError, DegenerateSourceError, DomainError, NoKeyError, NoRootError, \
    UnknownFieldError
from cvmdips.keyrate import secret_key_rate
from cvmdips.outputs import StudyResult
from cvmdips.source import optimal_T_PS
from cvmdips.typing import AxisName, Number, RateField
from cvmdips.utils import bisect_root, golden_maximize, parallel_map

log = logging.getLogger(__name__)

AXIS_NAMES: tuple[str, ...] = get_args(AxisName)
"""Parameters a sweep can vary"""

NO_CROSSOVER = None
"""Returned by the crossover searches when the two rates never swap order"""

CROSSOVER_SCAN_POINTS = 200
"""Grid size of the coarse scan locating the first sign change of a rate difference"""

TPS_SEED_POINTS = 99
"""Grid size seeding the rate-optimal T_PS search"""

ETA_FLOOR = 1e-3
"""Smallest detector efficiency the efficiency searches look at"""


@dataclass(frozen=True)
class Axis:
    """
    One swept parameter.

    :param name: One of :data:`AXIS_NAMES`
    :param values: Grid, non-empty and strictly increasing
    """
    name: AxisName
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise UnknownFieldError("SweepSpec", AXIS_NAMES, self.name)
        values = tuple(float(v) for v in self.values)
        if not values:
            raise DomainError(f"Axis '{self.name}' has an empty grid")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError(f"Axis '{self.name}' grid must be strictly increasing")
        if self.name == "k":
            if not all(v.is_integer() for v in values):
                raise DomainError(f"Axis 'k' takes integers only, got {values}")
            values = tuple(int(v) for v in values)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_range(cls, name: AxisName, start: Number, stop: Number, steps: int) -> "Axis":
        """ An evenly spaced grid of `steps` points from `start` to `stop`, both included """
        if steps < 1:
            raise DomainError(f"Axis '{name}' needs at least one step")
        return cls(name, tuple(np.linspace(start, stop, steps)))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SweepSpec:
    """
    A one- or two-dimensional sweep over a base configuration.

    :param base: The configuration every point starts from
    :param axis1: Outer (slowest-varying) axis
    :param axis2: Optional inner axis
    :param outputs: Report fields to tabulate
    :param tps_rule: If given, T_PS is re-chosen with this rule at every point (unless T_PS itself is swept)
    """
    base: ProtocolConfig
    axis1: Axis
    axis2: Axis | None = None
    outputs: tuple[RateField, ...] = ("K_raw", "K")
    tps_rule: TpsRule | None = None
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in self.outputs:
            if name not in RATE_FIELDS:
                raise UnknownFieldError("RateReport", RATE_FIELDS, name)
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise DomainError(f"Both axes sweep '{self.axis1.name}'")

    @property
    def axes(self) -> list[Axis]:
        return [self.axis1] if self.axis2 is None else [self.axis1, self.axis2]

    def points(self) -> list[tuple]:
        """ Every grid point, in row-major order """
        if self.axis2 is None:
            return [(v,) for v in self.axis1.values]
        return [(v1, v2) for v1 in self.axis1.values for v2 in self.axis2.values]


def apply_parameter(cfg: ProtocolConfig, name: AxisName, value: Number) -> ProtocolConfig:
    """
    A copy of `cfg` with one named parameter replaced. ``V`` sets both EPR variances, ``eps`` both excess
    noises and ``L_AB_symmetric`` places the relay halfway along the given total distance.

    :raises UnknownFieldError: for a name outside :data:`AXIS_NAMES`
    """
    src, link = cfg.source, cfg.link
    if name == "V":
        return replace(cfg, source=replace(src, V=value), link=replace(link, V_B=value))
    elif name in ("k", "T_PS"):
        return replace(cfg, source=replace(src, **{name: value}))
    elif name in ("L_AC", "L_BC", "eta", "v_el"):
        return replace(cfg, link=replace(link, **{name: value}))
    elif name == "L_AB_symmetric":
        return cfg.at_distance(value, Layout.SYMMETRIC)
    elif name == "eps":
        return replace(cfg, link=replace(link, eps_A=value, eps_B=value))
    elif name == "beta":
        return replace(cfg, beta=value)
    raise UnknownFieldError("SweepSpec", AXIS_NAMES, name)


def resolve_tps(cfg: ProtocolConfig, rule: TpsRule | None) -> ProtocolConfig:
    """
    Set T_PS according to `rule` for the configuration's (V, k); None leaves it untouched.

    :raises DegenerateSourceError: if the rule has no valid T_PS (e.g. ``V <= 2k + 1`` for the optimal rule)
    """
    if rule is None:
        return cfg
    if rule is TpsRule.OPTIMAL:
        t = optimal_T_PS(cfg.source.V, cfg.source.k)
    else:
        t = rate_optimal_T_PS(cfg)
    return replace(cfg, source=replace(cfg.source, T_PS=t))


def _k_raw(cfg: ProtocolConfig) -> float:
    return secret_key_rate(cfg).K_raw


def _k_raw_or_worst(cfg: ProtocolConfig) -> float:
    """ Signed rate, with undefined points ranked below everything else """
    try:
        return _k_raw(cfg)
    except CvmdipsError:
        return -math.inf


def _evaluate_point(job: tuple[SweepSpec, tuple]) -> tuple:
    spec, values = job
    try:
        cfg = spec.base
        for axis, value in zip(spec.axes, values):
            cfg = apply_parameter(cfg, axis.name, value)
        if spec.tps_rule is not None and "T_PS" not in (a.name for a in spec.axes):
            cfg = resolve_tps(cfg, spec.tps_rule)
        report = secret_key_rate(cfg)
    except CvmdipsError as e:
        log.warning(f"Point {dict(zip((a.name for a in spec.axes), values))} failed: {e}")
        return (*values, *(None for _ in spec.outputs), str(e))
    return (*values, *(report.get(name) for name in spec.outputs), "")


def sweep(spec: SweepSpec, jobs: int = 1) -> StudyResult:
    """
    Evaluate the key rate on every point of the sweep's grid.

    Points that fail (a degenerate subtraction, an unphysical state) are kept: their output cells are None and the
    ``error`` column carries the message. Rows are in row-major order regardless of `jobs`.

    :param spec: What to sweep
    :param jobs: Worker processes; 0 means one per physical core
    :return: Columns are the axis names, then the requested outputs, then ``error``
    """
    points = spec.points()
    log.info(f"Sweeping {' x '.join(f'{a.name}[{len(a)}]' for a in spec.axes)} ({len(points)} points)")
    rows = parallel_map(_evaluate_point, [(spec, p) for p in points], jobs=jobs)
    columns = [a.name for a in spec.axes] + list(spec.outputs) + ["error"]
    return StudyResult(columns=columns, rows=rows, metadata=dict(spec.metadata))


def _rate_along_distance(cfg: ProtocolConfig, layout: Layout, tps_rule: TpsRule | None) -> Callable[[float], float]:
    # T_PS from the optimal rule does not depend on distance, so it is resolved once
    if tps_rule is TpsRule.RATE:
        return lambda L: _k_raw(resolve_tps(cfg.at_distance(L, layout), tps_rule))
    fixed = resolve_tps(cfg, tps_rule)
    return lambda L: _k_raw(fixed.at_distance(L, layout))


def max_distance(cfg: ProtocolConfig, layout: Layout = Layout.EXTREME_ASYM, tol_km: float = DEFAULT_TOL_KM,
                 tps_rule: TpsRule | None = None) -> float:
    """
    Largest total distance with a positive key rate.

    The upper bracket starts at 1 km and doubles until the rate turns negative, then the root is bisected.

    :param cfg: Operating point; its link lengths are ignored
    :param layout: Where the relay sits
    :param tol_km: Bisection tolerance
    :param tps_rule: Optionally re-choose T_PS first (per distance for the rate rule)
    :return: The root, in km, or 0 when there is no key even at zero distance
    :raises NoRootError: if the rate is still positive at 500 km
    """
    rate = _rate_along_distance(cfg, layout, tps_rule)
    if rate(0.0) <= 0.0:
        log.info("No key at zero distance")
        return 0.0

    lower, upper = 0.0, BRACKET_START_KM
    while rate(upper) > 0.0:
        if upper >= MAX_BRACKET_KM:
            raise NoRootError(f"Key rate still positive at {MAX_BRACKET_KM} km")
        lower, upper = upper, min(2.0 * upper, MAX_BRACKET_KM)
        log.debug(f"Expanding distance bracket to [{lower}, {upper}] km")

    root = bisect_root(rate, lower, upper, tol_km)
    log.info(f"Maximum distance ({layout.value}, k={cfg.source.k}): {root:.4f} km")
    return root


def distance_improvement(cfg: ProtocolConfig, layout: Layout = Layout.EXTREME_ASYM,
                         tol_km: float = DEFAULT_TOL_KM, k: int = 1) -> float:
    """
    Ratio of the maximum distance with `k` photons subtracted (at the probability-optimal T_PS) to the one of the
    untouched protocol at the same variance.

    :raises NoKeyError: if the untouched protocol has no key at all
    """
    base = replace(cfg, source=replace(cfg.source, k=0, T_PS=1.0))
    reference = max_distance(base, layout, tol_km)
    if reference <= 0.0:
        raise NoKeyError("The protocol without subtraction yields no key at any distance")
    subtracted = replace(cfg, source=replace(cfg.source, k=k))
    return max_distance(subtracted, layout, tol_km, tps_rule=TpsRule.OPTIMAL) / reference


def _with_eta(cfg: ProtocolConfig, eta: float) -> ProtocolConfig:
    return replace(cfg, link=replace(cfg.link, eta=eta))


def eta_threshold(cfg: ProtocolConfig, tol: float = DEFAULT_TOL_ETA) -> float:
    """
    Smallest detector efficiency giving a positive key rate at the configured distance.

    :raises NoKeyError: if there is no key even with perfect detectors
    :raises NoRootError: if the rate is still positive at the efficiency floor
    """
    def rate(eta: float) -> float:
        return _k_raw(_with_eta(cfg, eta))

    if rate(1.0) <= 0.0:
        raise NoKeyError(f"No key at eta = 1 (L_AC={cfg.link.L_AC}, L_BC={cfg.link.L_BC})")
    root = bisect_root(rate, ETA_FLOOR, 1.0, tol)
    log.info(f"Efficiency threshold (k={cfg.source.k}): {root:.6f}")
    return root


def _first_sign_change(diff: Callable[[float], float], grid: Sequence[float], tol: float) -> float | None:
    values = [diff(x) for x in grid]
    for (x0, d0), (x1, d1) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if d0 * d1 < 0.0:
            return bisect_root(diff, min(x0, x1), max(x0, x1), tol)
    return NO_CROSSOVER


def crossover(cfg_a: ProtocolConfig, cfg_b: ProtocolConfig, layout: Layout = Layout.EXTREME_ASYM,
              tol_km: float = DEFAULT_TOL_KM, tps_rule: TpsRule | None = None) -> float | None:
    """
    Distance where the two rates swap order: the first sign change of ``K_a - K_b`` on
    ``(0, min(max_distance_a, max_distance_b)]``, located by a grid scan and refined by bisection.

    :return: The distance in km, or :data:`NO_CROSSOVER`
    """
    reach = min(max_distance(cfg_a, layout, tol_km, tps_rule), max_distance(cfg_b, layout, tol_km, tps_rule))
    if reach <= 0.0:
        return NO_CROSSOVER
    rate_a = _rate_along_distance(cfg_a, layout, tps_rule)
    rate_b = _rate_along_distance(cfg_b, layout, tps_rule)
    grid = list(np.linspace(0.0, reach, CROSSOVER_SCAN_POINTS + 1)[1:])
    root = _first_sign_change(lambda L: rate_a(L) - rate_b(L), grid, tol_km)
    log.info(f"Crossover ({layout.value}): {root if root is not None else 'none'}")
    return root


def eta_crossover(cfg_a: ProtocolConfig, cfg_b: ProtocolConfig, tol: float = DEFAULT_TOL_ETA) -> float | None:
    """
    Detector efficiency where the two rates swap order, scanning down from ``eta = 1`` over the range where at
    least one of them is positive.

    :return: The efficiency, or :data:`NO_CROSSOVER`
    """
    def diff(eta: float) -> float:
        return _k_raw(_with_eta(cfg_a, eta)) - _k_raw(_with_eta(cfg_b, eta))

    grid = []
    for eta in np.linspace(1.0, ETA_FLOOR, CROSSOVER_SCAN_POINTS + 1):
        grid.append(float(eta))
        if _k_raw(_with_eta(cfg_a, eta)) <= 0.0 and _k_raw(_with_eta(cfg_b, eta)) <= 0.0:
            break
    root = _first_sign_change(diff, grid, tol)
    log.info(f"Efficiency crossover: {root if root is not None else 'none'}")
    return root


def _seeded_maximum(func: Callable[[float], float], grid: np.ndarray, xtol: float) -> tuple[float, float]:
    values = np.array([func(x) for x in grid])
    if not np.any(np.isfinite(values)):
        raise NoKeyError("The key rate is undefined on the whole search grid")
    i = int(np.argmax(values))
    if i == 0 or i == len(grid) - 1:
        return float(grid[i]), float(values[i])
    return golden_maximize(func, float(grid[i - 1]), float(grid[i]), float(grid[i + 1]), xtol=xtol)


def rate_optimal_T_PS(cfg: ProtocolConfig, xtol: float = 1e-6) -> float:
    """
    The tap transmittance maximizing the signed key rate at the configured operating point. Without subtraction
    the untouched source (``T_PS = 1``) is returned.

    :raises DegenerateSourceError: if no transmittance gives a defined rate
    """
    if cfg.source.k == 0:
        return 1.0

    def rate(t: float) -> float:
        return _k_raw_or_worst(replace(cfg, source=replace(cfg.source, T_PS=t)))

    try:
        t, _ = _seeded_maximum(rate, np.linspace(0.01, 0.99, TPS_SEED_POINTS), xtol)
    except NoKeyError:
        raise DegenerateSourceError(cfg.source.k, cfg.source.T_PS, "no T_PS gives a defined key rate") from None
    return t


def optimal_variance(cfg: ProtocolConfig, V_range: tuple[float, float] = (1.5, 500.0),
                     tps_rule: TpsRule | None = TpsRule.OPTIMAL, seed_points: int = VARIANCE_SEED_POINTS,
                     xtol: float = 1e-4) -> tuple[float, float]:
    """
    EPR variance maximizing the key rate at the configured distances.

    A log-spaced grid of `seed_points` variances locates the best cell; a golden-section search then refines it
    to relative tolerance `xtol`. An optimum on the edge of the range is returned from the grid.

    :param V_range: Search interval, inside ``[1.1, 1e4]``
    :param tps_rule: How T_PS follows V (only matters with subtraction)
    :return: ``(V*, K*)``
    :raises NoKeyError: if the rate is nowhere positive on the range
    """
    lo, hi = V_range
    if not VARIANCE_LIMITS[0] <= lo < hi <= VARIANCE_LIMITS[1]:
        raise DomainError(f"Variance range {V_range} must be increasing and inside {VARIANCE_LIMITS}")

    def rate(V: float) -> float:
        try:
            return _k_raw_or_worst(resolve_tps(apply_parameter(cfg, "V", V), tps_rule))
        except CvmdipsError:
            return -math.inf

    grid = np.geomspace(lo, hi, seed_points)
    V_star, K_star = _seeded_maximum(rate, grid, xtol)
    if not K_star > 0.0:
        raise NoKeyError(f"No positive key for V in [{lo}, {hi}]")
    log.info(f"Optimal variance (k={cfg.source.k}): V*={V_star:.6g}, K*={K_star:.6g}")
    return V_star, K_star


def optimize_tps(cfg: ProtocolConfig, rule: TpsRule = TpsRule.OPTIMAL) -> dict[str, float]:
    """
    T_PS by the given rule, with the success probability and key rate it leads to.
    """
    resolved = resolve_tps(cfg, rule)
    report = secret_key_rate(resolved)
    return {"T_PS": resolved.source.T_PS, "P": report.P, "K_raw": report.K_raw, "K": report.K}

