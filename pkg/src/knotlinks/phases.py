"""Aharonov-Bohm phases and the generalized Josephson maximum current.

Units are whatever the caller supplies (gaussian/natural); nothing is
converted.
"""
import math
from dataclasses import dataclass

from .errors import InvalidParameterError

PRINTED = "printed"
PHI0_SQUARED = "phi0-squared"


@dataclass(frozen=True)
class FluxConfig:
    """Fluxes and couplings for one interferometer/junction setup.

    ``normalization`` picks the Josephson argument: ``"printed"`` uses
    ``pi phi1 phi2 / phi0`` as written; ``"phi0-squared"`` divides by
    ``phi0**2`` instead, which makes the argument dimensionless.
    """

    phi1: float = 0.0
    phi2: float = 0.0
    phi0: float = 1.0
    j0: float = 1.0
    kappa: float = 1.0
    topo_coeff: int = 1
    normalization: str = PRINTED

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.j0 < 0:
            raise InvalidParameterError(f"j0 must be >= 0, got {self.j0}")
        if int(self.topo_coeff) != self.topo_coeff:
            raise InvalidParameterError("topo_coeff must be an integer")
        if self.normalization not in (PRINTED, PHI0_SQUARED):
            raise InvalidParameterError(f"unknown normalization {self.normalization!r}")


def ab_phase_first_order(cfg: FluxConfig, linking: int) -> float:
    """Phase picked up by a path linking the solenoid ``linking`` times."""
    return cfg.kappa * linking * cfg.phi1


def ab_phase_second_order(cfg: FluxConfig) -> float:
    return cfg.topo_coeff * cfg.kappa ** 2 * cfg.phi1 * cfg.phi2


def josephson_argument(cfg: FluxConfig) -> float:
    if not cfg.phi0 > 0:
        raise InvalidParameterError(f"phi0 must be > 0, got {cfg.phi0}")
    denom = cfg.phi0 if cfg.normalization == PRINTED else cfg.phi0 ** 2
    return cfg.phi1 * cfg.phi2 / denom


def _cos_pi(x):
    # cos(pi x) with exact zeros at half-integers and exact +-1 at integers
    r = math.remainder(x, 2.0)
    if abs(r) == 0.5:
        return 0.0
    if r == 0.0:
        return 1.0
    if abs(r) == 1.0:
        return -1.0
    return math.cos(math.pi * r)


def josephson_max_current(cfg: FluxConfig) -> float:
    """``j0 * |cos(pi phi1 phi2 / phi0)|``."""
    return cfg.j0 * abs(_cos_pi(josephson_argument(cfg)))
