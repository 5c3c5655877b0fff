"""Spectral stability analysis and critical control gains.

A closed loop is stable when the spectral radius of its dynamics, restricted
to the feedback-coupled subspace, is strictly below one (rho = 1 is not
stable). The critical gain scale a_crit is the boundary of the stable gain
range when the whole gain matrix is scaled by a; the four two-bus families
with diagonal blocks admit closed forms, everything else is bisected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import disturbance_response
from .errors import NoStabilizingGain, NumericalFailure, UnboundedGain

DEFAULT_DV = 0.535
DEFAULT_CONTRACTION = 0.07


@dataclass
class EigenReport:
    eigenvalues: np.ndarray
    spectral_radius: float
    dominant: complex
    dominant_all: tuple
    stable: bool


def eigen_report(system, tie_tol=1e-9):
    """Eigenvalues of the closed-loop dynamics on the coupled subspace."""
    idx = np.where(system.loop_mask)[0]
    if idx.size == 0:
        return EigenReport(np.array([]), 0.0, 0j, (), True)
    try:
        eig = np.linalg.eigvals(system.dynamics[np.ix_(idx, idx)])
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("eigenvalue computation failed") from exc
    mods = np.abs(eig)
    rho = float(mods.max())
    order = np.argsort(-mods)
    eig = eig[order]
    dominant_all = tuple(eig[np.abs(eig) >= rho - tie_tol])
    return EigenReport(
        eigenvalues=eig,
        spectral_radius=rho,
        dominant=complex(eig[0]),
        dominant_all=dominant_all,
        stable=bool(rho < 1.0),
    )


def spectral_radius(system):
    return eigen_report(system).spectral_radius


@dataclass
class CriticalGain:
    a_crit: float
    method: str
    family: str = None
    bracket: tuple = None
    iterations: int = 0


def analytic_acrit(family, **params):
    """Closed-form critical gain scale for the diagonal two-bus families.

    pbc_1ph:  2/X            droop_1ph: 1/X
    pbc_rx:   2/(L1 sqrt(d^2+1))
    droop_rx: sqrt(d^2+1)/(L1 (d+1))
    """
    if family == "pbc_1ph":
        val = 2.0 / float(params["x"])
    elif family == "droop_1ph":
        val = 1.0 / float(params["x"])
    elif family == "pbc_rx":
        d, l1 = float(params["d"]), float(params["l1"])
        val = 2.0 / (l1 * np.sqrt(d * d + 1.0))
    elif family == "droop_rx":
        d, l1 = float(params["d"]), float(params["l1"])
        val = np.sqrt(d * d + 1.0) / (l1 * (d + 1.0))
    else:
        raise ValueError("no closed form for family %r" % family)
    return CriticalGain(a_crit=float(val), method="analytic", family=family)


def bisect_acrit(builder, lo=1e-6, hi=1e4, tol=1e-6, max_iter=60):
    """Bisect the stable/unstable boundary of a gain-scaled loop.

    builder maps a gain scale a > 0 to a ClosedLoopSystem. Raises
    NoStabilizingGain when already unstable at `lo` and UnboundedGain when
    still stable at `hi`.
    """

    def stable(a):
        return spectral_radius(builder(a)) < 1.0

    if not stable(lo):
        raise NoStabilizingGain("spectral radius >= 1 at gain scale %g" % lo)
    if stable(hi):
        raise UnboundedGain("still stable at gain scale %g" % hi, hi=hi)
    it = 0
    while it < max_iter and (hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
        it += 1
    return CriticalGain(
        a_crit=0.5 * (lo + hi), method="bisection", bracket=(lo, hi), iterations=it
    )


def gain_sweep(builder, a_values):
    """[(a, spectral radius, stable)] over the given gain scales."""
    out = []
    for a in a_values:
        rho = spectral_radius(builder(float(a)))
        out.append((float(a), rho, bool(rho < 1.0)))
    return out


@dataclass
class GoodnessReport:
    stable: bool
    spectral_radius: float
    mean_contraction: float
    worst_contraction: float
    good: bool


def goodness_report(system, dv=DEFAULT_DV, min_contraction=DEFAULT_CONTRACTION):
    """Stability plus, for droop, the disturbance-contraction requirement.

    A droop configuration is good when it is stable and the mean per-phase
    contraction 1 - |dSS_i|/|dV_i| under a uniform voltage disturbance dv
    reaches min_contraction. A PBC configuration is good when it is stable.
    """
    rep = eigen_report(system)
    if system.kind == "pbc":
        return GoodnessReport(rep.stable, rep.spectral_radius, 0.0, 0.0, rep.stable)
    if not rep.stable:
        return GoodnessReport(False, rep.spectral_radius, 0.0, 0.0, False)
    dss = disturbance_response(system, dv)
    act = system.active_mask
    contraction = 1.0 - np.abs(dss[act]) / dv
    mean_c = float(contraction.mean())
    worst_c = float(contraction.min())
    return GoodnessReport(
        True, rep.spectral_radius, mean_c, worst_c, mean_c >= min_contraction
    )


def is_good(system, dv=DEFAULT_DV, min_contraction=DEFAULT_CONTRACTION):
    return goodness_report(system, dv, min_contraction).good
