"""
Named study presets, one per published figure. Each preset carries every parameter of its caption and returns a
:class:`~cvmdips.outputs.StudyResult` ready for plotting.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from cvmdips.constants import Layout, TpsRule
from cvmdips.data import ProtocolConfig, SourceParams
from cvmdips.errors import UnknownFieldError
from cvmdips.keyrate import plob_bound
from cvmdips.outputs import StudyResult
from cvmdips.source import success_probability
from cvmdips.studies import Axis, SweepSpec, sweep

log = logging.getLogger(__name__)

PHOTON_NUMBERS = (0, 1, 2, 3, 4)
"""Subtracted photon numbers drawn in the rate figures"""

FIG8_ETAS = (0.85, 0.90, 0.95, 1.0)
"""Detector efficiencies compared in the efficiency-versus-distance figure"""


def caption_config(V: float, L_AC: float = 0.0, L_BC: float = 0.0, eta: float = 0.975) -> ProtocolConfig:
    """ The parameter set shared by the captions: excess noise 0.01, v_el 0.01, beta 0.96 """
    return ProtocolConfig.from_values(V=V, L_AC=L_AC, L_BC=L_BC, eps_A=0.01, eps_B=0.01, eta=eta, v_el=0.01,
                                      beta=0.96)


@dataclass(frozen=True)
class FigurePreset:
    """
    :param name: Preset name, e.g. ``fig7``
    :param description: What the table holds
    :param build: Produces the table; takes ``signed`` (tabulate ``K_raw`` instead of ``K``) and ``jobs``
    """
    name: str
    description: str
    build: Callable[..., StudyResult]

    def run(self, signed: bool = False, jobs: int = 1) -> StudyResult:
        log.info(f"Building {self.name}: {self.description}")
        result = self.build(signed=signed, jobs=jobs)
        result.metadata = {"figure": self.name, "description": self.description, **result.metadata}
        return result


def _rate_columns(base: ProtocolConfig, axis: Axis, ks, signed: bool, jobs: int,
                  label: Callable[[int], str] = lambda k: f"k{k}") -> tuple[list[str], list[list]]:
    """ One sweep per photon number over the same axis, merged column-wise """
    field = "K_raw" if signed else "K"
    names, columns = [], []
    for k in ks:
        cfg = replace(base, source=replace(base.source, k=k))
        result = sweep(SweepSpec(base=cfg, axis1=axis, outputs=(field,), tps_rule=TpsRule.OPTIMAL), jobs=jobs)
        names.append(f"{field}_{label(k)}")
        columns.append(result.column(field))
    return names, columns


def _distance_table(base: ProtocolConfig, layout: Layout, grid: np.ndarray, signed: bool, jobs: int,
                    ks=PHOTON_NUMBERS) -> StudyResult:
    # the swept parameter is total distance, split by the layout
    if layout is Layout.SYMMETRIC:
        axis = Axis("L_AB_symmetric", tuple(grid))
    else:
        axis = Axis("L_AC", tuple(grid))
    names, columns = _rate_columns(base, axis, ks, signed, jobs)
    plob = [plob_bound(L, base.link.loss_coeff) for L in axis.values]
    rows = [(L, *values, p) for L, *values, p in zip(axis.values, *columns, plob)]
    return StudyResult(columns=["L_km", *names, "PLOB"], rows=rows, metadata=base.flat())


def fig3(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Success probability against tap transmittance, V = 15 """
    grid = np.round(np.linspace(0.01, 0.99, 99), 10)
    ks = PHOTON_NUMBERS[1:]
    rows = [(t, *(success_probability(SourceParams(V=15.0, k=k, T_PS=t)) for k in ks)) for t in grid]
    return StudyResult(columns=["T_PS", *(f"P_k{k}" for k in ks)], rows=rows, metadata={"V": 15.0})


def _variance_table(L_AB: float, layout: Layout, signed: bool, jobs: int) -> StudyResult:
    L_AC, L_BC = layout.split(L_AB)
    base = caption_config(V=15.0, L_AC=L_AC, L_BC=L_BC)
    axis = Axis("V", tuple(np.geomspace(1.5, 500.0, 120)))
    names, columns = _rate_columns(base, axis, PHOTON_NUMBERS, signed, jobs)
    rows = [(V, *values) for V, *values in zip(axis.values, *columns)]
    metadata = {k: v for k, v in base.flat().items() if k not in ("V", "V_B")}
    return StudyResult(columns=["V", *names], rows=rows, metadata=metadata)


def fig4(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Key rate against V, symmetric relay, 6 km """
    return _variance_table(6.0, Layout.SYMMETRIC, signed, jobs)


def fig5(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Key rate against V, relay at Bob, 30 km """
    return _variance_table(30.0, Layout.EXTREME_ASYM, signed, jobs)


def fig6(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Key rate against distance, symmetric relay, V = 100 """
    return _distance_table(caption_config(V=100.0), Layout.SYMMETRIC, np.linspace(0.0, 20.0, 201), signed, jobs)


def fig7(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Key rate against distance, relay at Bob, V = 15 """
    return _distance_table(caption_config(V=15.0), Layout.EXTREME_ASYM, np.linspace(0.0, 100.0, 201), signed, jobs)


def fig8(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Key rate against distance for k = 0, 1 at several detector efficiencies, relay at Bob, V = 15 """
    axis = Axis("L_AC", tuple(np.linspace(0.0, 100.0, 201)))
    names, columns = [], []
    for eta in FIG8_ETAS:
        base = caption_config(V=15.0, eta=eta)
        n, c = _rate_columns(base, axis, (0, 1), signed, jobs, label=lambda k: f"k{k}_eta{eta:.2f}")
        names += n
        columns += c
    rows = [(L, *values) for L, *values in zip(axis.values, *columns)]
    metadata = {k: v for k, v in caption_config(V=15.0).flat().items() if k != "eta"}
    return StudyResult(columns=["L_km", *names], rows=rows, metadata=metadata)


def fig9(signed: bool = False, jobs: int = 1) -> StudyResult:
    """ Key rate against detector efficiency, relay at Bob, 20 km, V = 15 """
    base = caption_config(V=15.0, L_AC=20.0)
    axis = Axis("eta", tuple(np.round(np.linspace(0.5, 1.0, 101), 10)))
    names, columns = _rate_columns(base, axis, PHOTON_NUMBERS, signed, jobs)
    rows = [(eta, *values) for eta, *values in zip(axis.values, *columns)]
    metadata = {k: v for k, v in base.flat().items() if k != "eta"}
    return StudyResult(columns=["eta", *names], rows=rows, metadata=metadata)


PRESETS: dict[str, FigurePreset] = {
    p.name: p for p in (
        FigurePreset("fig3", "success probability vs T_PS, V=15, k=1..4", fig3),
        FigurePreset("fig4", "key rate vs V at the optimal T_PS, symmetric, L_AB=6 km", fig4),
        FigurePreset("fig5", "key rate vs V at the optimal T_PS, extreme asymmetric, L_AB=30 km", fig5),
        FigurePreset("fig6", "key rate vs distance at the optimal T_PS, symmetric, V=100, with PLOB", fig6),
        FigurePreset("fig7", "key rate vs distance at the optimal T_PS, extreme asymmetric, V=15, with PLOB", fig7),
        FigurePreset("fig8", "key rate vs distance for k=0,1 at several detector efficiencies, V=15", fig8),
        FigurePreset("fig9", "key rate vs detector efficiency, extreme asymmetric, L_AB=20 km, V=15", fig9),
    )
}
"""Every figure preset, by name"""


def get_preset(name: str) -> FigurePreset:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise UnknownFieldError("figure", PRESETS, name) from None
