from typing import Literal, Union

Number = Union[int, float]
"""Describes any valid number type"""

LayoutName = Literal["symmetric", "extreme-asym"]
"""Placement of the relay: halfway between the parties, or co-located with Bob (L_BC = 0)"""

AxisName = Literal["V", "k", "T_PS", "L_AC", "L_BC", "L_AB_symmetric", "eta", "v_el", "beta", "eps"]
"""Valid parameter names for a sweep axis"""

RateField = Literal["P", "a", "b", "c", "I_AB", "lambda1", "lambda2", "lambda3", "chi_BE", "K_raw", "K"]
"""Names of the fields of a `RateReport` that a sweep may emit"""
