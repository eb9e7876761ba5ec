"""Geometry and numerics of tight knotted and linked flux tubes.

Inertia tensors (exact for solid-torus chains, Monte Carlo for arbitrary
tubes), Gauss linking numbers, Aharonov-Bohm/Josephson phase formulas,
rigid-rotor levels and the one-parameter length-to-mass fit.
"""
__version__ = "0.1.0"

from .curves import (Component, Link, SegmentGrid, distance_to_link, make_borromean,  # noqa: E402
                     make_chain, make_circle, make_tight_hopf, make_torus_link)
from .inertia import (InertiaResult, MCConfig, SolidTorusSpec, composite_inertia,  # noqa: E402
                      mc_inertia, principal_axes, torus_inertia)
from .linking import LinkingResult, gauss_linking  # noqa: E402
from .phases import (FluxConfig, ab_phase_first_order, ab_phase_second_order,  # noqa: E402
                     josephson_max_current)
from .rotor import classify_top, symmetric_top_levels  # noqa: E402
from .spectrum_fit import assign, fit_affine, fit_scale  # noqa: E402
