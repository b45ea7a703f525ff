"""Photovoltaic array conversion efficiency.

``eta = E_elec / (A_c * H_t * tau)``: electrical energy delivered by the
array over the solar energy reaching it through a cover of transmissivity
``tau``.  ``E_elec`` is the electrical energy (not earth skin temperature).
Units are the caller's business; only the ratio must be dimensionless.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import NonPositiveDenominator


def _check_common(e_elec: float, area: float, tau: float):
    if not math.isfinite(e_elec) or e_elec < 0:
        raise ValueError(f"electrical energy must be finite and >= 0, got {e_elec}")
    if not area > 0:
        raise NonPositiveDenominator(f"array area must be > 0, got {area}")
    if not tau > 0:
        raise NonPositiveDenominator(f"transmissivity must be > 0, got {tau}")
    if tau > 1:
        raise ValueError(f"transmissivity must be <= 1, got {tau}")


def efficiency(e_elec: float, area: float, h_t: float, tau: float) -> float:
    """Array efficiency for one period.

    Parameters
    ----------
    e_elec : float
        Electrical energy produced, >= 0.
    area : float
        Array area A_c, > 0.
    h_t : float
        Irradiance per unit area on the array, > 0.
    tau : float
        Cover transmissivity in (0, 1].
    """
    _check_common(e_elec, area, tau)
    if not h_t > 0:
        raise NonPositiveDenominator(f"irradiance must be > 0, got {h_t}")
    return e_elec / (area * h_t * tau)


def efficiency_series(e_elec: float, area: float, tau: float,
                      irradiance: Sequence[float]) -> np.ndarray:
    """:func:`efficiency` applied to each irradiance value.

    Raises :class:`NonPositiveDenominator` carrying the index of the first
    non-positive irradiance.
    """
    _check_common(e_elec, area, tau)
    h = np.asarray(irradiance, dtype=float)
    bad = np.flatnonzero(~(h > 0))
    if bad.size:
        i = int(bad[0])
        raise NonPositiveDenominator(f"irradiance[{i}] = {h[i]} is not > 0", index=i)
    return e_elec / (area * h * tau)
