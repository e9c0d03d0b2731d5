import pytest

from cvmdips.constants import Layout
from cvmdips.data import ProtocolConfig
from cvmdips.figures import caption_config


@pytest.fixture
def caption_cfg() -> ProtocolConfig:
    """ Figure-caption parameters, V = 15, no subtraction, zero distance """
    return caption_config(V=15.0)


@pytest.fixture
def subtracted_cfg() -> ProtocolConfig:
    """ One photon subtracted at the probability-optimal tap, V = 15 """
    return ProtocolConfig.from_values(V=15.0, k=1, T_PS=6.0 / 7.0)


@pytest.fixture
def ideal_cfg() -> ProtocolConfig:
    """ Noiseless links and perfect detectors at zero distance """
    return ProtocolConfig.from_values(V=15.0, eps_A=0.0, eps_B=0.0, eta=1.0, v_el=0.0)


@pytest.fixture
def short_link_cfg(caption_cfg) -> ProtocolConfig:
    """ Caption parameters with the relay at Bob, 5 km, where the plain protocol still has key """
    return caption_cfg.at_distance(5.0, Layout.EXTREME_ASYM)
