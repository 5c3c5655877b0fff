"""Two-bus closed-loop families with directly specified sensitivity entries.

The analytic two-bus results quote the sensitivity entry X itself (a_crit =
2/X for single-phase PBC and so on). Path sensitivities built from a feeder
carry a factor 2, so a feeder line reproducing a target entry X must have
line reactance X/2; `two_bus_feeder` below does exactly that. The `raw_b`
builders here skip the feeder altogether and place the quoted entries in B
directly, which is what the closed-form eigenvalue and a_crit expressions
refer to.

Families: pbc_1ph, droop_1ph, pbc_rx, droop_rx, pbc_phase, droop_phase.
"""

from __future__ import annotations

import numpy as np

from .control import (
    ClosedLoopSystem,
    GainMatrix,
    build_closed_loop,
    colocated_config,
    uniform_gains,
)
from .feeder import Feeder, Line, LineImpedance, PhaseSet, build_sensitivity
from .metrics import make_phase_ratio_line, make_rx_line

FAMILIES = ("pbc_1ph", "droop_1ph", "pbc_rx", "droop_rx", "pbc_phase", "droop_phase")


def _system(kind, Xm, Rm, a, active=None):
    """Assemble a raw-B closed loop from dense sensitivity blocks."""
    n = Xm.shape[0]
    if active is None:
        active = np.ones(n, dtype=bool)
    f11 = a * np.eye(n) * active
    if kind == "droop":
        A = np.zeros((n, n))
        B = np.hstack([Xm, Rm])
        f21 = a * np.eye(n) * active
        F = np.vstack([f11, f21])
        gains = GainMatrix("droop", f11, np.zeros((n, n)), f21, np.zeros((n, n)))
        dynamics = -(Xm @ f11 + Rm @ f21)
        mask = active
    elif kind == "pbc":
        A = np.eye(2 * n)
        B = np.block([[Xm, Rm], [-0.5 * Rm, 0.5 * Xm]])
        f22 = 2.0 * a * np.eye(n) * active
        F = np.block([[f11, np.zeros((n, n))], [np.zeros((n, n)), f22]])
        gains = GainMatrix("pbc", f11, np.zeros((n, n)), np.zeros((n, n)), f22)
        dynamics = A - B @ F
        mask = np.concatenate([active, active])
    else:
        raise ValueError("kind must be droop or pbc")
    return ClosedLoopSystem(
        kind=kind,
        A=A,
        B=B,
        F=F,
        gains=gains,
        dynamics=dynamics,
        active_mask=mask,
        loop_mask=mask.copy(),
    )


def raw_b(family, a, **params):
    """Closed loop for one two-bus family at gain scale a.

    params: x (1ph families), d and l1 (rx), c_x and l2 (phase).
    """
    if family == "pbc_1ph":
        x = float(params["x"])
        return _system("pbc", np.array([[x]]), np.zeros((1, 1)), a)
    if family == "droop_1ph":
        x = float(params["x"])
        return _system("droop", np.array([[x]]), np.zeros((1, 1)), a)
    if family in ("pbc_rx", "droop_rx"):
        imp = make_rx_line(float(params["d"]), float(params["l1"]))
        return _system(family.split("_")[0], imp.x, imp.r, a)
    if family in ("pbc_phase", "droop_phase"):
        imp = make_phase_ratio_line(float(params["c_x"]), float(params["l2"]))
        return _system(family.split("_")[0], imp.x, imp.r, a)
    raise ValueError("unknown family %r (choose from %s)" % (family, FAMILIES))


def family_builder(family, **params):
    """Gain scale -> ClosedLoopSystem, for bisection and sweeps."""
    return lambda a: raw_b(family, a, **params)


def two_bus_feeder(family, base_kv=4.16, base_mva=1.0, **params):
    """Two-node feeder whose built sensitivity reproduces a family's B entries.

    The line block is half the family's target block, so build_sensitivity
    (factor 2) lands on the quoted X/R entries. Returns (feeder, config) with
    one co-located APNP at the load node.
    """
    if family.endswith("_1ph"):
        x = float(params["x"])
        z = np.zeros((3, 3), dtype=complex)
        z[0, 0] = 0.5j * x
        imp = LineImpedance(z, PhaseSet.from_string("A"))
    elif family.endswith("_rx"):
        imp = make_rx_line(float(params["d"]), 0.5 * float(params["l1"]))
    elif family.endswith("_phase"):
        imp = make_phase_ratio_line(float(params["c_x"]), 0.5 * float(params["l2"]))
    else:
        raise ValueError("unknown family %r" % family)
    feeder = Feeder(
        base_kv=base_kv,
        base_mva=base_mva,
        substation="source",
        nodes={"source": imp.phases, "load": imp.phases},
        lines=[Line("source", "load", imp)],
    )
    cfg = colocated_config(["load"], feeder)
    return feeder, cfg


def two_bus_system(family, a, **params):
    """Feeder-built counterpart of raw_b (same spectrum, file-backed route)."""
    feeder, cfg = two_bus_feeder(family, **params)
    sens = build_sensitivity(feeder)
    kind = family.split("_")[0]
    return build_closed_loop(sens, cfg, uniform_gains(sens, cfg, kind, a))
