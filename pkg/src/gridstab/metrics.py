"""Impedance metrics: R/X ratio, phase ratio, line length, and ratio scaling.

All metrics are read off a 3x3 impedance block Z = R + jX:

    d_i   = R_ii / X_ii                      (R/X ratio per phase)
    c_x,i = (sum of |row i| off-diagonal X) / X_ii   (phase ratio, likewise c_r)
    L1_i  = sqrt(R_ii^2 + X_ii^2)            (per-phase length)
    L2    = sigma_1(Z)                       (largest singular value)

`scale_feeder_ratios` multiplies one family of ratios by a factor while
holding every line's L2 fixed, which is how the modified feeders for the
cross-application experiments are produced.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateBlock, DivisionByZeroReactance
from .feeder import Feeder, Line, LineImpedance, PhaseSet

log = logging.getLogger(__name__)


def _per_phase(z, phases, num_fn, den_fn, what):
    out = np.full(3, np.nan)
    bad = []
    for i in phases.indices():
        num, den = num_fn(z, i), den_fn(z, i)
        if den == 0.0:
            if num == 0.0:
                out[i] = 0.0
            else:
                bad.append("ABC"[i])
        else:
            out[i] = num / den
    if bad:
        raise DivisionByZeroReactance("zero diagonal in %s on phase(s) %s" % (what, ",".join(bad)), bad)
    return out


def rx_ratio(imp):
    """Per-phase d_i = R_ii/X_ii; NaN on absent phases."""
    return _per_phase(
        imp.z, imp.phases, lambda z, i: z[i, i].real, lambda z, i: z[i, i].imag, "R/X ratio"
    )


def phase_ratio(imp):
    """Per-phase (c_x, c_r): off-diagonal row sums over the diagonal entry."""
    others = [(1, 2), (0, 2), (0, 1)]
    cx = _per_phase(
        imp.z,
        imp.phases,
        lambda z, i: sum(z[i, j].imag for j in others[i]),
        lambda z, i: z[i, i].imag,
        "phase ratio c_x",
    )
    cr = _per_phase(
        imp.z,
        imp.phases,
        lambda z, i: sum(z[i, j].real for j in others[i]),
        lambda z, i: z[i, i].real,
        "phase ratio c_r",
    )
    return cx, cr


def line_length(imp):
    """(L1 per phase, L2). L2 is the largest singular value of the block."""
    l1 = np.full(3, np.nan)
    for i in imp.phases.indices():
        l1[i] = abs(imp.z[i, i])
    return l1, sigma1(imp.z)


def sigma1(z):
    return float(np.linalg.svd(np.asarray(z, dtype=complex), compute_uv=False)[0])


@dataclass
class LineMetrics:
    line: Line
    d: np.ndarray
    c_x: np.ndarray
    c_r: np.ndarray
    l1: np.ndarray
    l2: float


def line_metrics(line):
    cx, cr = phase_ratio(line.imp)
    l1, l2 = line_length(line.imp)
    return LineMetrics(line=line, d=rx_ratio(line.imp), c_x=cx, c_r=cr, l1=l1, l2=l2)


def make_rx_line(d, l1, phases=None):
    """Balanced diagonal block with R/X ratio d and per-phase length l1.

    X = l1/sqrt(d^2+1), R = d*X, zero mutuals.
    """
    if l1 <= 0 or d < 0:
        raise ValueError("need l1 > 0 and d >= 0")
    phases = phases or PhaseSet.from_string("ABC")
    x = l1 / np.sqrt(d * d + 1.0)
    z = np.zeros((3, 3), dtype=complex)
    for i in phases.indices():
        z[i, i] = d * x + 1j * x
    return LineImpedance(z, phases)


def make_phase_ratio_line(c_x, l2):
    """Purely reactive block with equal mutuals and phase ratio c_x.

    X = l2/(1+c_x), Xbar = c_x*X/2, so that X + 2*Xbar = sigma_1 = l2.
    """
    if l2 <= 0 or c_x < 0:
        raise ValueError("need l2 > 0 and c_x >= 0")
    x = l2 / (1.0 + c_x)
    xbar = 0.5 * c_x * x
    z = np.full((3, 3), 1j * xbar, dtype=complex)
    np.fill_diagonal(z, 1j * x)
    return LineImpedance(z, PhaseSet.from_string("ABC"))


def scale_feeder_ratios(feeder, which, factor):
    """Return a copy of the feeder with R/X or phase ratios scaled by `factor`.

    which = "rx":    multiply all nine R entries of each block by factor,
    which = "phase": multiply all off-diagonal complex entries by factor,
    then rescale the whole block by sigma_1(Z_orig)/sigma_1(Z_new) so every
    line keeps its L2. Ratios (being scale-invariant) end up multiplied by
    exactly `factor`. Lines with a zero diagonal reactance on a present phase
    are left unchanged under "rx" (switch/jumper lines); a warning is logged.
    """
    if which not in ("rx", "phase"):
        raise ValueError("which must be 'rx' or 'phase'")
    if factor <= 0:
        raise ValueError("factor must be positive")
    new_lines = []
    for ln in feeder.lines:
        z = ln.imp.z
        if which == "rx":
            if any(z[i, i].imag == 0.0 for i in ln.imp.phases.indices()):
                log.warning(
                    "scale_feeder_ratios: skipping line %s-%s (zero diagonal reactance)",
                    ln.from_id,
                    ln.to_id,
                )
                new_lines.append(ln)
                continue
            z_new = z.real * factor + 1j * z.imag
        else:
            z_new = z.copy()
            off = ~np.eye(3, dtype=bool)
            z_new[off] = z_new[off] * factor
        s_new = sigma1(z_new)
        if s_new == 0.0:
            raise DegenerateBlock("line %s-%s collapsed to zero" % (ln.from_id, ln.to_id))
        z_new = z_new * (sigma1(z) / s_new)
        new_lines.append(Line(ln.from_id, ln.to_id, LineImpedance(z_new, ln.imp.phases)))
    return Feeder(
        base_kv=feeder.base_kv,
        base_mva=feeder.base_mva,
        substation=feeder.substation,
        nodes=dict(feeder.nodes),
        lines=new_lines,
    )


def path_cumulative_metrics(feeder, sens=None):
    """Per-node metrics of the summed path impedance block.

    For each non-substation node, sum the raw line blocks on its path to the
    substation and report the ratios of the summed block (sum of R over sum
    of X, etc.). Returns a list of dict records ordered as feeder.node_ids().
    """
    from .feeder import path_to_substation

    records = []
    for nid in feeder.node_ids():
        blk = np.zeros((3, 3), dtype=complex)
        for ln in path_to_substation(feeder, nid):
            blk = blk + ln.imp.z
        imp = LineImpedance(_mask_block(blk, feeder.nodes[nid]), feeder.nodes[nid])
        cx, cr = phase_ratio(imp)
        l1, l2 = line_length(imp)
        d = rx_ratio(imp)
        pres = list(feeder.nodes[nid].indices())
        records.append(
            {
                "node": nid,
                "phases": feeder.nodes[nid].to_string(),
                "d": d,
                "c_x": cx,
                "c_r": cr,
                "l1": l1,
                "l2": l2,
                "d_mean": float(np.mean(d[pres])),
                "c_x_mean": float(np.mean(cx[pres])),
            }
        )
    return records


def _mask_block(z, phases):
    out = z.copy()
    absent = [i for i in range(3) if i not in phases.indices()]
    out[absent, :] = 0.0
    out[:, absent] = 0.0
    return out
