"""Fit glueball masses to tight knot/link lengths with one scale factor.

``fit_scale`` is the default proportional model E = lambda L; ``fit_affine``
adds an intercept for comparison.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AssignmentError, InsufficientDataError, InvalidParameterError, SingularFitError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KnotEntry:
    name: str
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidParameterError(f"knot {self.name!r}: length must be > 0")


@dataclass(frozen=True)
class StateEntry:
    name: str
    mass: float
    sigma: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise InvalidParameterError(f"state {self.name!r}: mass must be > 0")
        if not self.sigma > 0:
            raise InvalidParameterError(f"state {self.name!r}: sigma must be > 0")


@dataclass
class FitResult:
    lam: float
    chi2: float
    dof: int
    residuals: np.ndarray
    assignments: list = field(default_factory=list)
    intercept: float | None = None

    def to_dict(self):
        out = {"model": "proportional" if self.intercept is None else "affine",
               "lambda": self.lam, "chi2": self.chi2, "dof": self.dof,
               "residuals": self.residuals.tolist(),
               "assignments": [list(p) for p in self.assignments]}
        if self.intercept is not None:
            out["intercept"] = self.intercept
        return out


def _unique(entries, what):
    names = [e.name for e in entries]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise InvalidParameterError(f"duplicate {what} names: {dupes}")


def assign(knots, states, mapping=None):
    """Pair states with knots.

    Without ``mapping`` the i-th lightest state goes with the i-th shortest
    knot.  With a ``{state: knot}`` mapping every state must be covered and
    every referenced name must exist.  Returns ``(state, knot)`` pairs in
    state-mass order.
    """
    _unique(knots, "knot")
    _unique(states, "state")
    states = sorted(states, key=lambda s: (s.mass, s.name))
    if mapping is None:
        if len(states) > len(knots):
            raise AssignmentError(
                f"ordered assignment needs at least as many knots ({len(knots)}) as states ({len(states)})")
        knots = sorted(knots, key=lambda k: (k.length, k.name))
        return list(zip(states, knots))
    by_name = {k.name: k for k in knots}
    state_names = {s.name for s in states}
    missing = [s.name for s in states if s.name not in mapping]
    unknown_states = [n for n in mapping if n not in state_names]
    unknown_knots = [k for k in mapping.values() if k not in by_name]
    if missing or unknown_states or unknown_knots:
        parts = []
        if missing:
            parts.append(f"states without a knot: {missing}")
        if unknown_states:
            parts.append(f"unknown states: {unknown_states}")
        if unknown_knots:
            parts.append(f"unknown knots: {unknown_knots}")
        raise AssignmentError("; ".join(parts))
    return [(s, by_name[mapping[s.name]]) for s in states]


def _columns(pairs):
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidParameterError("pairs must be (length, energy, sigma) triples")
    L, E, sigma = arr.T
    if np.any(sigma <= 0):
        raise InvalidParameterError("all sigma must be > 0")
    return L, E, 1.0 / sigma ** 2


def fit_scale(pairs) -> FitResult:
    """Weighted least squares E = lambda L through the origin."""
    if len(pairs) < 2:
        raise InsufficientDataError(f"need at least 2 pairs, got {len(pairs)}")
    L, E, w = _columns(pairs)
    lam = float(np.sum(w * L * E) / np.sum(w * L * L))
    resid = E - lam * L
    return FitResult(lam, float(np.sum(w * resid * resid)), len(L) - 1, resid)


def fit_affine(pairs) -> FitResult:
    """Weighted least squares E = intercept + lambda L."""
    if len(pairs) < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {len(pairs)}")
    L, E, w = _columns(pairs)
    sw = w.sum()
    Lbar = np.sum(w * L) / sw
    Ebar = np.sum(w * E) / sw
    sxx = np.sum(w * (L - Lbar) ** 2)
    if sxx <= 1e-14 * np.sum(w * L * L):
        raise SingularFitError("all lengths are equal; slope and intercept are not separable")
    slope = float(np.sum(w * (L - Lbar) * (E - Ebar)) / sxx)
    intercept = float(Ebar - slope * Lbar)
    resid = E - intercept - slope * L
    return FitResult(slope, float(np.sum(w * resid * resid)), len(L) - 2, resid, intercept=intercept)


def fit_assigned(pairs_se, affine=False) -> FitResult:
    """Fit ``(state, knot)`` pairs from :func:`assign` and record the assignment."""
    rows = [(k.length, s.mass, s.sigma) for s, k in pairs_se]
    res = fit_affine(rows) if affine else fit_scale(rows)
    res.assignments = [(s.name, k.name) for s, k in pairs_se]
    return res


# -- tables ---------------------------------------------------------------------------

def read_knots(path) -> list[KnotEntry]:
    with open(path, newline="") as fh:
        return [KnotEntry(row["name"].strip(), float(row["length"]))
                for row in csv.DictReader(_skip_comments(fh))]


def read_states(path) -> list[StateEntry]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(_skip_comments(fh)):
            sigma = (row.get("sigma_mev") or "").strip()
            if not sigma:
                log.warning("state %s has no sigma; using 1 MeV (unweighted)", row["name"])
                sigma = 1.0
            out.append(StateEntry(row["name"].strip(), float(row["mass_mev"]), float(sigma)))
    return out


def _skip_comments(lines):
    return (ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#"))


def write_plot_csv(path, result: FitResult, pairs_se):
    """Rows ``(name, L, E, fitted)`` for plotting data against the fitted line."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["state", "knot", "L", "E", "fit"])
        for s, k in pairs_se:
            fit = result.lam * k.length + (result.intercept or 0.0)
            wr.writerow([s.name, k.name, repr(k.length), repr(s.mass), repr(fit)])


def sample_tables():
    """Paths of the bundled example knot and f0 tables."""
    here = Path(__file__).parent / "data"
    return here / "knot_lengths.csv", here / "f0_states.csv"
